//! Deformed exponentials, pantograph functions and the partial theta function.
//!
//! All of them are exponential-type series `sum P_n x^n / {n}!` whose
//! weights `P_n` are prefix products of factors `x1 r1^k + x2 r2^k`:
//!
//! * deformed exponential: `0 + 1 u^k`, so `P_n = u^C(n,2)`,
//! * pantograph function: `a + b u^k`,
//! * product exponential: `alpha phi^k + beta phi'^k`.

use alloc::vec::Vec;

use crate::error::Result;
use crate::numbers::Params;
use crate::scalar::Scalar;
use crate::series::Series;
use crate::sum::sum_decay;

/// The triple `(a, b, u)` of a pantograph function `E(a, b; x, u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PantographSpec<S> {
    pub a: S,
    pub b: S,
    pub u: S,
}

impl<S: Scalar> PantographSpec<S> {
    pub fn new(a: S, b: S, u: S) -> Self {
        PantographSpec { a, b, u }
    }

    /// `(0, 1, u)`, whose pantograph function is the deformed exponential.
    pub fn deformed_exp(u: S) -> Self {
        Self::new(S::zero(), S::one(), u)
    }

    /// `(1, -q, q)`, whose pantograph function is a partial theta function.
    pub fn theta(params: &Params<S>) -> Self {
        let q = params.q().clone();
        Self::new(S::one(), -q.clone(), q)
    }
}

/// Which product an [`OplusProduct`] computes.
#[derive(Clone, Debug, PartialEq)]
pub enum OplusMode<S> {
    /// `prod_{k<n} (alpha phi^k + beta phi'^k)`.
    Golden { alpha: S, beta: S },
    /// `prod_{k<n} (a + b u^k)`.
    Delay { a: S, b: S, u: S },
}

/// Prefix products `P_0 = 1`, `P_{n+1} = P_n (x1 r1^n + x2 r2^n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OplusProduct<S> {
    mode: OplusMode<S>,
    x1: S,
    r1: S,
    x2: S,
    r2: S,
    prefix: Vec<S>,
}

impl<S: Scalar> OplusProduct<S> {
    fn build(mode: OplusMode<S>, x1: S, r1: S, x2: S, r2: S, upto: usize) -> Self {
        let mut prefix = Vec::with_capacity(upto + 1);
        prefix.push(S::one());
        let (mut p1, mut p2) = (S::one(), S::one());
        for n in 0..upto {
            let f = x1.clone() * p1.clone() + x2.clone() * p2.clone();
            let next = prefix[n].clone() * f;
            prefix.push(next);
            p1 = p1 * r1.clone();
            p2 = p2 * r2.clone();
        }
        OplusProduct {
            mode,
            x1,
            r1,
            x2,
            r2,
            prefix,
        }
    }

    /// `(alpha + beta)^n_{phi, phi'}` with products cached through `upto`.
    pub fn golden(params: &Params<S>, alpha: S, beta: S, upto: usize) -> Self {
        let mode = OplusMode::Golden {
            alpha: alpha.clone(),
            beta: beta.clone(),
        };
        Self::build(mode, alpha, params.phi().clone(), beta, params.phi_prime().clone(), upto)
    }

    /// `(a + b)^n_{1, u}` with products cached through `upto`.
    pub fn delay(spec: &PantographSpec<S>, upto: usize) -> Self {
        let mode = OplusMode::Delay {
            a: spec.a.clone(),
            b: spec.b.clone(),
            u: spec.u.clone(),
        };
        Self::build(mode, spec.a.clone(), S::one(), spec.b.clone(), spec.u.clone(), upto)
    }

    pub fn mode(&self) -> &OplusMode<S> {
        &self.mode
    }

    /// The factor `x1 r1^k + x2 r2^k` joining `P_k` to `P_{k+1}`.
    pub fn factor(&self, k: usize) -> S {
        self.x1.clone() * self.r1.powi(k as i64) + self.x2.clone() * self.r2.powi(k as i64)
    }

    /// `P_n`; past the cache the product is extended on the fly.
    pub fn pow(&self, n: usize) -> S {
        if let Some(v) = self.prefix.get(n) {
            return v.clone();
        }
        let last = self.prefix.len() - 1;
        let mut acc = self.prefix[last].clone();
        for k in last..n {
            acc = acc * self.factor(k);
        }
        acc
    }

    /// The series `sum P_n x^n / {n}!` through `order`.
    pub fn exp_series(&self, params: &Params<S>, order: usize) -> Series<S> {
        let facts = params.st_factorials(order);
        Series::from_fn(params, order, |n| self.pow(n) / facts[n].clone())
    }

    /// Point value of `sum P_n x^n / {n}!` under the decay rule.
    pub fn exp_at(&self, params: &Params<S>, x: &S, tol: &S) -> Result<S> {
        let s = params.s().clone();
        let t = params.t().clone();
        // term_n and the (s,t)-numbers {n}, {n+1}.
        let mut term = S::one();
        let (mut prev, mut cur) = (S::zero(), S::one());
        let (mut p1, mut p2) = (S::one(), S::one());
        let out = sum_decay(
            |n| {
                if n > 0 {
                    let f = self.x1.clone() * p1.clone() + self.x2.clone() * p2.clone();
                    term = term.clone() * f * x.clone() / cur.clone();
                    p1 = p1.clone() * self.r1.clone();
                    p2 = p2.clone() * self.r2.clone();
                    let next = s.clone() * cur.clone() + t.clone() * prev.clone();
                    prev = cur.clone();
                    cur = next;
                }
                Ok(term.clone())
            },
            tol,
        )?;
        Ok(out.value)
    }
}

/// Coefficients `u^C(n,2) / {n}!` of the deformed exponential
/// `exp(x, u)`. At `u = 0` this is `1 + x`.
pub fn deformed_exp<S: Scalar>(params: &Params<S>, u: &S, order: usize) -> Series<S> {
    pantograph(params, &PantographSpec::deformed_exp(u.clone()), order)
}

pub fn deformed_exp_at<S: Scalar>(params: &Params<S>, u: &S, z: &S, tol: &S) -> Result<S> {
    pantograph_at(params, &PantographSpec::deformed_exp(u.clone()), z, tol)
}

/// `Exp(x) = exp(x, phi)`.
pub fn exp_phi<S: Scalar>(params: &Params<S>, order: usize) -> Series<S> {
    deformed_exp(params, params.phi(), order)
}

/// `Exp'(x) = exp(x, phi')`.
pub fn exp_phi_prime<S: Scalar>(params: &Params<S>, order: usize) -> Series<S> {
    deformed_exp(params, params.phi_prime(), order)
}

/// `exp((alpha + beta)_{phi,phi'} x)`, equal to `Exp(alpha x) Exp'(beta x)`.
pub fn product_exp<S: Scalar>(params: &Params<S>, alpha: &S, beta: &S, order: usize) -> Series<S> {
    OplusProduct::golden(params, alpha.clone(), beta.clone(), order).exp_series(params, order)
}

/// Pantograph series `E(a, b; x, u) = sum (a + b)^n_{1,u} x^n / {n}!`.
pub fn pantograph<S: Scalar>(params: &Params<S>, spec: &PantographSpec<S>, order: usize) -> Series<S> {
    OplusProduct::delay(spec, order).exp_series(params, order)
}

pub fn pantograph_at<S: Scalar>(
    params: &Params<S>,
    spec: &PantographSpec<S>,
    x: &S,
    tol: &S,
) -> Result<S> {
    OplusProduct::delay(spec, 0).exp_at(params, x, tol)
}

/// `Theta_0(x, y) = sum y^C(n,2) x^n`.
pub fn partial_theta<S: Scalar>(x: &S, y: &S, tol: &S) -> Result<S> {
    let mut term = S::one();
    let mut yn = S::one();
    let out = sum_decay(
        |n| {
            if n > 0 {
                term = term.clone() * yn.clone() * x.clone();
                yn = yn.clone() * y.clone();
            }
            Ok(term.clone())
        },
        tol,
    )?;
    Ok(out.value)
}

/// Coefficients `y^C(n,2)` of `Theta_0(x, y)` in `x`.
pub fn partial_theta_series<S: Scalar>(y: &S, order: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(order + 1);
    let mut c = S::one();
    let mut yn = S::one();
    for _ in 0..=order {
        out.push(c.clone());
        c = c * yn.clone();
        yn = yn * y.clone();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::error::Error;
    use crate::numbers::golden_pair;
    use crate::scalar::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn oplus_products() {
        let spec = PantographSpec::new(r(2, 1), r(-2, 1), r(1, 3));
        let op = OplusProduct::delay(&spec, 4);
        assert_eq!(op.pow(0), r(1, 1));
        for n in 1..8 {
            assert!(op.pow(n).is_zero());
        }
        // (1 + 2)(1 + 2*3)(1 + 2*9) past the cache.
        let op = OplusProduct::delay(&PantographSpec::new(r(1, 1), r(2, 1), r(3, 1)), 1);
        assert_eq!(op.pow(3), r(3 * 7 * 19, 1));
    }

    #[test]
    fn deformed_exp_coefficients() {
        let p = golden_pair(r(3, 1), r(-2, 1)).unwrap();
        let e0 = deformed_exp(&p, &r(0, 1), 4);
        assert_eq!(e0.coeffs(), &[r(1, 1), r(1, 1), r(0, 1), r(0, 1), r(0, 1)]);
        let e1 = deformed_exp(&p, &r(1, 1), 3);
        assert_eq!(e1.coeffs(), &[r(1, 1), r(1, 1), r(1, 3), r(1, 21)]);
    }

    #[test]
    fn point_values_match_truncated_series() {
        let p = golden_pair(3.0f64, -2.0).unwrap();
        let spec = PantographSpec::new(1.0, 0.5, 1.0 / 3.0);
        let series = pantograph(&p, &spec, 60);
        for &x in &[0.1, 0.7, -1.3] {
            let v = pantograph_at(&p, &spec, &x, &1e-16).unwrap();
            assert!((v - series.eval(&x)).abs() < 1e-13);
        }
        let e = deformed_exp_at(&p, &0.0, &0.25, &1e-16).unwrap();
        assert!((e - 1.25).abs() < 1e-15);
    }

    #[test]
    fn divergent_point_evaluation_fails() {
        let p = golden_pair(3.0f64, -2.0).unwrap();
        // u = 4 makes the weights grow like 4^C(n,2) against {n}! ~ 2^C(n+1,2).
        let spec = PantographSpec::new(1.0, 1.0, 4.0);
        let err = pantograph_at(&p, &spec, &1.0, &1e-15).unwrap_err();
        assert!(matches!(err, Error::ConvergenceFailure { .. }));
    }

    #[test]
    fn partial_theta_values() {
        assert!((partial_theta(&0.5, &1.0, &1e-16).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(partial_theta(&0.0, &0.3, &1e-16).unwrap(), 1.0);
        let c = partial_theta_series(&r(1, 2), 4);
        assert_eq!(c, vec![r(1, 1), r(1, 1), r(1, 2), r(1, 8), r(1, 64)]);
    }
}
