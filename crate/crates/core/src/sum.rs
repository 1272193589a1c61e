//! The one summation kernel shared by every infinite sum and product.
//!
//! A sum stops once three consecutive terms satisfy
//! `|term| <= tol * (1 + |partial|)`, and gives up after a fixed cap.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default term cap.
pub const MAX_TERMS: usize = 10_000;
/// Consecutive small terms required before stopping.
pub const RUN: usize = 3;

/// Default truncation tolerance.
pub fn default_tol<S: Scalar>() -> S {
    S::from_f64(1e-15)
}

/// Outcome of a converged sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Summed<S> {
    pub value: S,
    /// Number of terms added, including the final small run.
    pub terms: usize,
}

/// Sums `term(0) + term(1) + ...` under the decay rule.
pub fn sum_decay<S, F>(mut term: F, tol: &S) -> Result<Summed<S>>
where
    S: Scalar,
    F: FnMut(usize) -> Result<S>,
{
    sum_decay_capped(&mut term, tol, MAX_TERMS)
}

pub fn sum_decay_capped<S, F>(mut term: F, tol: &S, cap: usize) -> Result<Summed<S>>
where
    S: Scalar,
    F: FnMut(usize) -> Result<S>,
{
    let mut partial = S::zero();
    let mut small = 0;
    for k in 0..cap {
        let t = term(k)?;
        if !t.to_f64().is_finite() {
            return Err(Error::ConvergenceFailure { terms: k + 1 });
        }
        partial = partial + t.clone();
        if t.abs() <= tol.clone() * (S::one() + partial.abs()) {
            small += 1;
            if small >= RUN {
                return Ok(Summed {
                    value: partial,
                    terms: k + 1,
                });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::ConvergenceFailure { terms: cap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sum_converges() {
        let s = sum_decay(|k| Ok(0.5f64.powi(k as i32)), &1e-15).unwrap();
        assert!((s.value - 2.0).abs() < 1e-14);
        assert!(s.terms < 60);
    }

    #[test]
    fn divergent_sum_hits_cap() {
        let err = sum_decay_capped(|k| Ok(k as f64), &1e-15, 100).unwrap_err();
        assert_eq!(err, Error::ConvergenceFailure { terms: 100 });
    }

    #[test]
    fn overflowing_terms_fail_early() {
        let err = sum_decay(|k| Ok(10f64.powi(k as i32 * 50)), &1e-15).unwrap_err();
        assert!(matches!(err, Error::ConvergenceFailure { terms } if terms < 20));
    }

    #[test]
    fn isolated_zero_term_does_not_stop_the_sum() {
        // 1 + 0 + 1/4 + 0 + 1/16 ...
        let s = sum_decay(
            |k| Ok(if k % 2 == 1 { 0.0 } else { 0.5f64.powi(k as i32) }),
            &1e-15,
        )
        .unwrap();
        assert!((s.value - 4.0 / 3.0).abs() < 1e-14);
    }
}
