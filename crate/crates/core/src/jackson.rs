//! Geometric-node integrals.
//!
//! The (s,t)-integral over `[a, b]_q` is the Jackson sum
//!
//! ```text
//! (1 - q) sum_n [ b f(b q^n / phi) - a f(a q^n / phi) ] q^n
//! ```
//!
//! which inverts the (s,t)-derivative. Every sum here runs through
//! [`crate::sum::sum_decay`].

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numbers::Params;
use crate::scalar::Scalar;
use crate::series::Series;
use crate::special::{pantograph, pantograph_at, partial_theta, PantographSpec};
use crate::sum::{sum_decay, Summed};

/// The node set `{a q^n / phi} u {b q^n / phi}`; needs `0 < |q| < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QInterval<S: Scalar> {
    pub a: S,
    pub b: S,
    params: Params<S>,
}

impl<S: Scalar> QInterval<S> {
    pub fn new(params: &Params<S>, a: S, b: S) -> Result<Self> {
        require_q_in_unit_disk(params)?;
        Ok(QInterval {
            a,
            b,
            params: params.clone(),
        })
    }

    pub fn params(&self) -> &Params<S> {
        &self.params
    }
}

fn require_q_in_unit_disk<S: Scalar>(params: &Params<S>) -> Result<()> {
    let q = params.q().abs();
    if q.is_zero() || q >= S::one() {
        Err(Error::QOutOfRange)
    } else {
        Ok(())
    }
}

/// The (s,t)-integral of a callable, with the number of terms used.
pub fn st_integral_summed<S: Scalar>(
    f: impl Fn(&S) -> S,
    interval: &QInterval<S>,
    tol: &S,
) -> Result<Summed<S>> {
    let p = &interval.params;
    let q = p.q().clone();
    let one_minus_q = S::one() - q.clone();
    let (a, b) = (interval.a.clone(), interval.b.clone());
    let mut qn = S::one();
    let mut node = S::one() / p.phi().clone();
    sum_decay(
        |n| {
            if n > 0 {
                qn = qn.clone() * q.clone();
                node = node.clone() * q.clone();
            }
            let hi = if b.is_zero() { S::zero() } else { b.clone() * f(&(b.clone() * node.clone())) };
            let lo = if a.is_zero() { S::zero() } else { a.clone() * f(&(a.clone() * node.clone())) };
            Ok(one_minus_q.clone() * (hi - lo) * qn.clone())
        },
        tol,
    )
}

/// The (s,t)-integral of a callable over `[a, b]_q`.
pub fn st_integral<S: Scalar>(f: impl Fn(&S) -> S, interval: &QInterval<S>, tol: &S) -> Result<S> {
    Ok(st_integral_summed(f, interval, tol)?.value)
}

/// The (s,t)-integral of a series, evaluated through its truncated polynomial.
pub fn st_integral_series<S: Scalar>(f: &Series<S>, interval: &QInterval<S>, tol: &S) -> Result<S> {
    st_integral(|x| f.eval(x), interval, tol)
}

/// The (p,q)-integral from 0 to `a`, using whichever branch `|p/q|` selects.
pub fn pq_integral<S: Scalar>(f: impl Fn(&S) -> S, a: &S, p: &S, q: &S, tol: &S) -> Result<S> {
    let ratio = (p.clone() / q.clone()).abs();
    if ratio == S::one() {
        return Err(Error::DegenerateRatio);
    }
    if a.is_zero() {
        return Ok(S::zero());
    }
    // Large branch: weights q^k / p^(k+1); small branch: p^k / q^(k+1).
    let (num, den, lead) = if ratio > S::one() {
        (q.clone(), p.clone(), p.clone() - q.clone())
    } else {
        (p.clone(), q.clone(), q.clone() - p.clone())
    };
    let step = num / den.clone();
    let mut w = S::one() / den;
    let out = sum_decay(
        |k| {
            if k > 0 {
                w = w.clone() * step.clone();
            }
            Ok(w.clone() * f(&(w.clone() * a.clone())))
        },
        tol,
    )?;
    Ok(lead * a.clone() * out.value)
}

/// `|int_a^b D f - (f(b) - f(a))|`.
pub fn check_ftc<S: Scalar>(f: &Series<S>, interval: &QInterval<S>, tol: &S) -> Result<S> {
    let df = f.derive();
    let lhs = st_integral_series(&df, interval, tol)?;
    let rhs = f.eval(&interval.b) - f.eval(&interval.a);
    Ok((lhs - rhs).abs())
}

/// Defect of `int D f(x) g(phi' x) = [f g]_a^b - int f(phi x) D g(x)`.
pub fn check_by_parts<S: Scalar>(
    f: &Series<S>,
    g: &Series<S>,
    interval: &QInterval<S>,
    tol: &S,
) -> Result<S> {
    if f.params() != g.params() {
        return Err(Error::ParamsMismatch);
    }
    let p = interval.params();
    let (df, dg) = (f.derive(), g.derive());
    let lhs = st_integral(
        |x| df.eval(x) * g.eval(&(p.phi_prime().clone() * x.clone())),
        interval,
        tol,
    )?;
    let rest = st_integral(
        |x| f.eval(&(p.phi().clone() * x.clone())) * dg.eval(x),
        interval,
        tol,
    )?;
    let (a, b) = (&interval.a, &interval.b);
    let bracket = f.eval(b) * g.eval(b) - f.eval(a) * g.eval(a);
    Ok((lhs - (bracket - rest)).abs())
}

fn require_nonzero_a<S: Scalar>(spec: &PantographSpec<S>) -> Result<()> {
    if spec.a.is_zero() {
        Err(Error::HypothesisViolated("antiderivative sum needs a != 0"))
    } else if spec.u.is_zero() {
        Err(Error::ZeroDelay)
    } else {
        Ok(())
    }
}

/// The centered sum `(1/a) sum_k (-b/(a u))^k (E(a,b; u^k x, u) - 1)`.
///
/// This differs from the full antiderivative sum by the constant
/// `u/(a u + b)` and still converges when `|b/(a u)| = 1`, which is the
/// partial theta case `(1, -q, q)`.
pub fn centered_antiderivative_at<S: Scalar>(
    params: &Params<S>,
    spec: &PantographSpec<S>,
    x: &S,
    tol: &S,
) -> Result<S> {
    require_nonzero_a(spec)?;
    let c = -spec.b.clone() / (spec.a.clone() * spec.u.clone());
    if c.abs() > S::one() {
        return Err(Error::HypothesisViolated("|b/(a u)| must not exceed 1"));
    }
    let mut ck = S::one();
    let mut uk = S::one();
    let out = sum_decay(
        |k| {
            if k > 0 {
                ck = ck.clone() * c.clone();
                uk = uk.clone() * spec.u.clone();
            }
            let e = pantograph_at(params, spec, &(uk.clone() * x.clone()), tol)?;
            Ok(ck.clone() * (e - S::one()))
        },
        tol,
    )?;
    Ok(out.value / spec.a.clone())
}

/// `(1/a) sum_k (-1)^k (b/(a u))^k E(a, b; u^k x, u)`, an antiderivative of
/// `E(a, b; x, u)`. Needs `a != 0` and `|b/(a u)| < 1`.
pub fn pantograph_antiderivative_at<S: Scalar>(
    params: &Params<S>,
    spec: &PantographSpec<S>,
    x: &S,
    tol: &S,
) -> Result<S> {
    require_nonzero_a(spec)?;
    let ratio = (spec.b.clone() / (spec.a.clone() * spec.u.clone())).abs();
    if ratio >= S::one() {
        return Err(Error::HypothesisViolated("|b/(a u)| must be below 1"));
    }
    let mut ck = S::one();
    let c = -spec.b.clone() / (spec.a.clone() * spec.u.clone());
    let mut uk = S::one();
    let out = sum_decay(
        |k| {
            if k > 0 {
                ck = ck.clone() * c.clone();
                uk = uk.clone() * spec.u.clone();
            }
            let e = pantograph_at(params, spec, &(uk.clone() * x.clone()), tol)?;
            Ok(ck.clone() * e)
        },
        tol,
    )?;
    Ok(out.value / spec.a.clone())
}

/// The coefficients of the same k-sum, taken term by term: `x^n` collects
/// `(e_n / a) sum_k (-b u^(n-1) / a)^k`, a geometric series summed in
/// closed form. Every ratio must lie strictly inside the unit interval.
pub fn pantograph_antiderivative_series<S: Scalar>(
    params: &Params<S>,
    spec: &PantographSpec<S>,
    order: usize,
) -> Result<Series<S>> {
    require_nonzero_a(spec)?;
    let e = pantograph(params, spec, order);
    let mut coeffs = Vec::with_capacity(order + 1);
    for n in 0..=order {
        // u^(n-1) without negative powers of an integer type.
        let un1 = if n == 0 {
            S::one() / spec.u.clone()
        } else {
            spec.u.powi(n as i64 - 1)
        };
        let r = -spec.b.clone() * un1 / spec.a.clone();
        if r.abs() >= S::one() {
            return Err(Error::ConvergenceFailure { terms: n });
        }
        coeffs.push(e.coeff(n) / (spec.a.clone() * (S::one() - r)));
    }
    Ok(Series::new(params, coeffs))
}

/// `sum_k (Theta_0((1-q) q^k x, 1/phi) - 1)`, an antiderivative of
/// `Theta_0((1-q) x, 1/phi)`.
pub fn theta_antiderivative_at<S: Scalar>(params: &Params<S>, x: &S, tol: &S) -> Result<S> {
    require_q_in_unit_disk(params)?;
    let q = params.q().clone();
    let y = S::one() / params.phi().clone();
    let base = (S::one() - q.clone()) * x.clone();
    let mut qk = S::one();
    let out = sum_decay(
        |k| {
            if k > 0 {
                qk = qk.clone() * q.clone();
            }
            Ok(partial_theta(&(base.clone() * qk.clone()), &y, tol)? - S::one())
        },
        tol,
    )?;
    Ok(out.value)
}
