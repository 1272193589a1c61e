//! Scalar fields the rest of the crate is generic over.
//!
//! Three backends are provided:
//!
//! * [`Rational`]: exact arbitrary-size rationals. Identity checks run here
//!   whenever the golden pair of `(s, t)` is rational.
//! * [`Float`]: binary floating point with a configurable number of decimal
//!   digits (30 by default).
//! * `f64`: plain hardware doubles, convenient for callables and quick
//!   point evaluation.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::sync::atomic::{AtomicUsize, Ordering};

use dashu_float::FBig;

type Fb = FBig;
use dashu_ratio::RBig;

/// Exact rational scalar.
pub type Rational = RBig;

/// Which arithmetic a scalar type performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    ExactRational,
    Floating { digits: usize },
}

/// A field element the series, quadrature and solver code can compute with.
///
/// Constructors take no context: [`Float`] values are created at the
/// process-wide precision set by [`Float::set_default_digits`].
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn backend() -> Backend;
    fn from_i64(v: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    /// For [`Rational`] this is the exact dyadic value of `v`.
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// Square root, or `None` when it is not representable (negative input,
    /// or an irrational root in the exact backend).
    fn sqrt(&self) -> Option<Self>;
    /// Relative tolerance used by approximate equality; zero when exact.
    fn tolerance() -> Self;
    /// Natural logarithm of a positive value; `None` for the exact backend
    /// unless the result is rational.
    fn ln(&self) -> Option<Self>;
    fn exp(&self) -> Option<Self>;

    fn zero() -> Self {
        Self::from_i64(0)
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn is_exact() -> bool {
        Self::backend() == Backend::ExactRational
    }
    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
    fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.recip() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
    /// Integer part when `self` is an integer.
    fn as_integer(&self) -> Option<i64> {
        let r = libm::round(self.to_f64());
        (r.abs() < 9.0e15 && *self == Self::from_i64(r as i64)).then_some(r as i64)
    }
    /// Real power. Integer exponents work for any base; other exponents
    /// need a positive base and a backend with logarithms.
    fn powf(&self, a: &Self) -> Option<Self> {
        if let Some(n) = a.as_integer() {
            if self.is_zero() && n < 0 {
                return None;
            }
            return Some(self.powi(n));
        }
        if *self <= Self::zero() {
            return None;
        }
        (a.clone() * self.ln()?).exp()
    }
    /// `|self - other| <= tolerance * max(1, |self|, |other|)`.
    fn approx_eq(&self, other: &Self) -> bool {
        let diff = (self.clone() - other.clone()).abs();
        if Self::is_exact() {
            return diff.is_zero();
        }
        let mut scale = Self::one();
        for v in [self.abs(), other.abs()] {
            if v > scale {
                scale = v;
            }
        }
        diff <= Self::tolerance() * scale
    }
}

impl Scalar for Rational {
    fn backend() -> Backend {
        Backend::ExactRational
    }
    fn from_i64(v: i64) -> Self {
        RBig::from(v)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_f64(v: f64) -> Self {
        RBig::try_from(v).unwrap_or(RBig::ZERO)
    }
    fn to_f64(&self) -> f64 {
        self.to_f64().value()
    }
    fn abs(&self) -> Self {
        dashu_base::Abs::abs(self.clone())
    }
    fn sqrt(&self) -> Option<Self> {
        use dashu_base::{SquareRoot, UnsignedAbs};
        if *self < RBig::ZERO {
            return None;
        }
        let num = self.numerator().unsigned_abs();
        let den = self.denominator().clone();
        let rn = num.sqrt();
        let rd = den.sqrt();
        if &rn * &rn == num && &rd * &rd == den {
            Some(RBig::from_parts(rn.into(), rd))
        } else {
            None
        }
    }
    fn tolerance() -> Self {
        RBig::ZERO
    }
    fn ln(&self) -> Option<Self> {
        (*self == RBig::ONE).then_some(RBig::ZERO)
    }
    fn exp(&self) -> Option<Self> {
        (*self == RBig::ZERO).then_some(RBig::ONE)
    }
    fn is_zero(&self) -> bool {
        *self == RBig::ZERO
    }
}

const DEFAULT_DIGITS: usize = 30;
static FLOAT_DIGITS: AtomicUsize = AtomicUsize::new(DEFAULT_DIGITS);

/// Binary floating point at a configurable decimal precision.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Float(FBig);

impl Float {
    /// Sets the precision, in significant decimal digits, of every `Float`
    /// constructed afterwards. Existing values keep their precision.
    pub fn set_default_digits(digits: usize) {
        FLOAT_DIGITS.store(digits.max(1), Ordering::Relaxed);
    }

    pub fn default_digits() -> usize {
        FLOAT_DIGITS.load(Ordering::Relaxed)
    }

    fn bits() -> usize {
        // log2(10) ~ 3.3219; a few guard bits on top.
        (Self::default_digits() * 33219).div_ceil(10000) + 8
    }

    fn wrap(v: FBig) -> Self {
        Float(v.with_precision(Self::bits()).value())
    }

    pub fn inner(&self) -> &FBig {
        &self.0
    }

    /// Decimal rendering with `digits` significant digits, rounded half away from zero.
    pub fn to_decimal_string(&self, digits: usize) -> alloc::string::String {
        use alloc::string::ToString;
        self.0
            .clone()
            .with_rounding::<dashu_float::round::mode::HalfAway>()
            .with_base_and_precision::<10>(digits.max(1))
            .value()
            .to_string()
    }
}

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string(Self::default_digits()))
    }
}

macro_rules! float_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Float {
            type Output = Float;
            fn $m(self, rhs: Float) -> Float {
                Float($tr::$m(self.0, rhs.0))
            }
        }
    };
}
float_binop!(Add, add);
float_binop!(Sub, sub);
float_binop!(Mul, mul);
float_binop!(Div, div);

impl Neg for Float {
    type Output = Float;
    fn neg(self) -> Float {
        Float(-self.0)
    }
}

impl Scalar for Float {
    fn backend() -> Backend {
        Backend::Floating {
            digits: Self::default_digits(),
        }
    }
    fn from_i64(v: i64) -> Self {
        Self::wrap(FBig::from(v))
    }
    fn from_rational(r: &Rational) -> Self {
        Float(r.to_float(Self::bits()).value())
    }
    fn from_f64(v: f64) -> Self {
        FBig::try_from(v).map(Self::wrap).unwrap_or_else(|_| Self::from_i64(0))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
    fn abs(&self) -> Self {
        if self.0 < Fb::ZERO {
            Float(-self.0.clone())
        } else {
            self.clone()
        }
    }
    fn sqrt(&self) -> Option<Self> {
        if self.0 < Fb::ZERO {
            None
        } else if self.0 == Fb::ZERO {
            Some(self.clone())
        } else {
            Some(Float(self.0.sqrt()))
        }
    }
    fn tolerance() -> Self {
        Self::ratio(1, 1_000_000_000_000)
    }
    fn ln(&self) -> Option<Self> {
        (self.0 > Fb::ZERO).then(|| Float(self.0.ln()))
    }
    fn exp(&self) -> Option<Self> {
        Some(Float(self.0.exp()))
    }
}

impl Scalar for f64 {
    fn backend() -> Backend {
        Backend::Floating { digits: 15 }
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64().value()
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| libm::sqrt(*self))
    }
    fn tolerance() -> Self {
        1e-12
    }
    fn ln(&self) -> Option<Self> {
        (*self > 0.0).then(|| libm::log(*self))
    }
    fn exp(&self) -> Option<Self> {
        Some(libm::exp(*self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_sqrt_only_for_perfect_squares() {
        let nine_quarters = Rational::ratio(9, 4);
        assert_eq!(nine_quarters.sqrt(), Some(Rational::ratio(3, 2)));
        assert_eq!(Rational::from_i64(5).sqrt(), None);
        assert_eq!(Rational::from_i64(-4).sqrt(), None);
    }

    #[test]
    fn float_carries_requested_precision() {
        let third = Float::ratio(1, 3);
        let back = third.clone() * Float::from_i64(3);
        assert!((back - Float::one()).abs() < Float::ratio(1, 1_000_000_000) * Float::tolerance());
        let s = third.to_decimal_string(30);
        assert!(s.starts_with("0.333333333333333333333333333"), "{s}");
    }

    #[test]
    fn powi_handles_negative_exponents() {
        assert_eq!(Rational::from_i64(2).powi(-3), Rational::ratio(1, 8));
        assert_eq!(Rational::ratio(2, 3).powi(0), Rational::one());
        assert!((2.0f64.powi(10) - 1024.0).abs() < 1e-12);
    }
}
