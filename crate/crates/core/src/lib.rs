//! Calculus on generalized Fibonacci polynomials.
//!
//! Fix nonzero `s`, `t` with `s^2 + 4t != 0`. The (s,t)-numbers are
//! `{0} = 0`, `{1} = 1`, `{n+2} = s{n+1} + t{n}`, and the roots `phi`,
//! `phi'` of `x^2 - s x - t` give the divided-difference derivative
//!
//! ```text
//! D f(x) = (f(phi x) - f(phi' x)) / ((phi - phi') x)
//! ```
//!
//! which acts on `x^n` as `{n} x^(n-1)`. The crate provides
//!
//! * [`numbers`]: (s,t)-numbers, fibotorials, fibonomials and q-products,
//! * [`series`]: truncated power series with `D`, its inverse, symbolic
//!   powers and deformed compositions,
//! * [`special`]: deformed exponentials, pantograph functions and the
//!   partial theta function,
//! * [`jackson`]: geometric-node integrals and antiderivative sums,
//! * [`solve`]: solvers for first-order linear proportional difference
//!   equations, each reporting substitution residuals.
//!
//! Everything is generic over a [`Scalar`] field: exact rationals, a
//! configurable-precision float, or `f64`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod identities;
pub mod jackson;
pub mod numbers;
pub mod scalar;
pub mod series;
pub mod solve;
pub mod special;
pub mod sum;

pub use error::{Error, ErrorClass, Result};
pub use numbers::{golden_pair, Params};
pub use scalar::{Backend, Float, Rational, Scalar};
pub use series::{QPeriodic, Series};
pub use special::{OplusProduct, PantographSpec};
