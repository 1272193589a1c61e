//! (s,t)-numbers, fibotorials, fibonomials and the q-products they bridge to.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar};
use crate::sum::{MAX_TERMS, RUN};

struct Inner<S> {
    s: S,
    t: S,
    phi: S,
    phi_prime: S,
    q: S,
}

/// The pair `(s, t)` together with its golden pair `phi`, `phi'` and
/// `q = phi'/phi`. Cheap to clone; every series carries one.
pub struct Params<S: Scalar>(Arc<Inner<S>>);

impl<S: Scalar> Clone for Params<S> {
    fn clone(&self) -> Self {
        Params(Arc::clone(&self.0))
    }
}

impl<S: Scalar> PartialEq for Params<S> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.s == other.0.s && self.0.t == other.0.t)
    }
}

impl<S: Scalar> fmt::Debug for Params<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Params")
            .field("s", &self.0.s)
            .field("t", &self.0.t)
            .field("phi", &self.0.phi)
            .field("phi_prime", &self.0.phi_prime)
            .field("q", &self.0.q)
            .finish()
    }
}

/// Builds [`Params`] from `(s, t)`.
///
/// `phi = (s + sqrt(s^2 + 4t))/2` and `phi' = s - phi`. With the exact
/// backend the discriminant must be the square of a rational.
pub fn golden_pair<S: Scalar>(s: S, t: S) -> Result<Params<S>> {
    if s.is_zero() || t.is_zero() {
        return Err(Error::ZeroParameter);
    }
    let disc = s.clone() * s.clone() + S::from_i64(4) * t.clone();
    if disc.is_zero() {
        return Err(Error::DegenerateDiscriminant);
    }
    if disc < S::zero() {
        return Err(Error::NegativeDiscriminant);
    }
    let root = disc
        .sqrt()
        .ok_or(Error::BackendMismatch("s^2 + 4t is not the square of a rational"))?;
    let phi = (s.clone() + root) / S::from_i64(2);
    let phi_prime = s.clone() - phi.clone();
    let q = phi_prime.clone() / phi.clone();
    Ok(Params(Arc::new(Inner {
        s,
        t,
        phi,
        phi_prime,
        q,
    })))
}

impl<S: Scalar> Params<S> {
    pub fn s(&self) -> &S {
        &self.0.s
    }
    pub fn t(&self) -> &S {
        &self.0.t
    }
    pub fn phi(&self) -> &S {
        &self.0.phi
    }
    pub fn phi_prime(&self) -> &S {
        &self.0.phi_prime
    }
    pub fn q(&self) -> &S {
        &self.0.q
    }
    pub fn backend(&self) -> Backend {
        S::backend()
    }
    /// `phi - phi'`, the divisor of every divided difference.
    pub fn delta(&self) -> S {
        self.0.phi.clone() - self.0.phi_prime.clone()
    }

    /// Re-expresses the parameters in another backend.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Result<Params<T>> {
        golden_pair(f(self.s()), f(self.t()))
    }

    /// The same calculus with `phi` and `phi'` exchanged. The (s,t)-numbers
    /// and the derivative are symmetric in the pair, so everything except
    /// `q` is unchanged.
    pub fn swapped(&self) -> Params<S> {
        Params(Arc::new(Inner {
            s: self.0.s.clone(),
            t: self.0.t.clone(),
            phi: self.0.phi_prime.clone(),
            phi_prime: self.0.phi.clone(),
            q: self.0.phi.clone() / self.0.phi_prime.clone(),
        }))
    }

    /// `{0}, {1}, ..., {upto}` by the defining recurrence.
    pub fn st_numbers(&self, upto: usize) -> Vec<S> {
        let mut out = Vec::with_capacity(upto + 1);
        out.push(S::zero());
        if upto >= 1 {
            out.push(S::one());
        }
        for n in 2..=upto {
            let next = self.0.s.clone() * out[n - 1].clone() + self.0.t.clone() * out[n - 2].clone();
            out.push(next);
        }
        out
    }

    /// `{0}!, {1}!, ..., {upto}!`.
    pub fn st_factorials(&self, upto: usize) -> Vec<S> {
        let nums = self.st_numbers(upto);
        let mut out = Vec::with_capacity(upto + 1);
        out.push(S::one());
        for n in 1..=upto {
            let next = out[n - 1].clone() * nums[n].clone();
            out.push(next);
        }
        out
    }
}

/// `{n}` by the recurrence `{n+2} = s{n+1} + t{n}`.
pub fn st_number<S: Scalar>(params: &Params<S>, n: usize) -> S {
    let (mut a, mut b) = (S::zero(), S::one());
    for _ in 0..n {
        let next = params.s().clone() * b.clone() + params.t().clone() * a.clone();
        a = b;
        b = next;
    }
    a
}

/// `{n}` for any integer `n`, using `{-n} = -{n} / (-t)^n`.
pub fn st_number_signed<S: Scalar>(params: &Params<S>, n: i64) -> S {
    let m = n.unsigned_abs() as usize;
    let v = st_number(params, m);
    if n >= 0 {
        v
    } else {
        -v / (-params.t().clone()).powi(m as i64)
    }
}

/// `{a}` for real `a`. Integers go through the recurrence; other orders use
/// `(phi^a - phi'^a)/(phi - phi')`, which needs `phi, phi' > 0`.
pub fn st_number_real<S: Scalar>(params: &Params<S>, a: &S) -> Result<S> {
    if let Some(n) = a.as_integer() {
        return Ok(st_number_signed(params, n));
    }
    if *params.phi_prime() <= S::zero() || *params.phi() <= S::zero() {
        return Err(Error::HypothesisViolated(
            "non-integer (s,t)-number needs phi and phi' positive",
        ));
    }
    let p = params
        .phi()
        .powf(a)
        .ok_or(Error::BackendMismatch("irrational power"))?;
    let pp = params
        .phi_prime()
        .powf(a)
        .ok_or(Error::BackendMismatch("irrational power"))?;
    Ok((p - pp) / params.delta())
}

/// `{n}! = {1}{2}...{n}`.
pub fn st_factorial<S: Scalar>(params: &Params<S>, n: usize) -> S {
    params.st_factorials(n).pop().unwrap_or_else(S::one)
}

/// `{n}! / ({k}! {n-k}!)`, computed as a product of `k` ratios.
pub fn st_fibonomial<S: Scalar>(params: &Params<S>, n: usize, k: usize) -> Result<S> {
    if k > n {
        return Err(Error::IndexOutOfRange { n, k });
    }
    let nums = params.st_numbers(n);
    let mut num = S::one();
    let mut den = S::one();
    for j in 0..k.min(n - k) {
        num = num * nums[n - j].clone();
        den = den * nums[j + 1].clone();
    }
    Ok(num / den)
}

/// `[a]_q = (1 - q^a)/(1 - q)`.
pub fn q_number<S: Scalar>(q: &S, a: &S) -> Result<S> {
    if *q == S::one() {
        return Err(Error::DegenerateQ);
    }
    let qa = q.powf(a).ok_or(Error::BackendMismatch("irrational power"))?;
    Ok((S::one() - qa) / (S::one() - q.clone()))
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q`.
pub fn q_factorial<S: Scalar>(q: &S, n: usize) -> Result<S> {
    if *q == S::one() {
        return Err(Error::DegenerateQ);
    }
    let mut acc = S::one();
    let mut qk = S::one();
    let mut bracket = S::zero();
    for _ in 0..n {
        bracket = bracket + qk.clone();
        qk = qk * q.clone();
        acc = acc * bracket.clone();
    }
    Ok(acc)
}

/// `(a; q)_n = (1 - a)(1 - aq)...(1 - aq^(n-1))`.
pub fn q_pochhammer<S: Scalar>(a: &S, q: &S, n: usize) -> S {
    let mut acc = S::one();
    let mut aqk = a.clone();
    for _ in 0..n {
        acc = acc * (S::one() - aqk.clone());
        aqk = aqk * q.clone();
    }
    acc
}

/// `(a; q)_inf` for `|q| < 1`, stopping once three consecutive factors
/// have `|a q^k| < tol`.
pub fn q_pochhammer_inf<S: Scalar>(a: &S, q: &S, tol: &S) -> Result<S> {
    if q.abs() >= S::one() {
        return Err(Error::DivergentProduct);
    }
    let mut acc = S::one();
    let mut aqk = a.clone();
    let mut small = 0;
    for _ in 0..MAX_TERMS {
        acc = acc * (S::one() - aqk.clone());
        if aqk.abs() < *tol {
            small += 1;
            if small >= RUN {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
        aqk = aqk * q.clone();
    }
    Err(Error::ConvergenceFailure { terms: MAX_TERMS })
}
