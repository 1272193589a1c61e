//! Truncated power series and the (s,t)-derivative acting on them.
//!
//! Coefficients are stored in the plain monomial basis: `coeffs[n]` is the
//! coefficient of `x^n`. The factorial basis `f_n x^n / {n}!` only shows up
//! inside the composition routines, which take their `g` sequences in that
//! basis.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::numbers::Params;
use crate::scalar::Scalar;
use crate::special::{OplusProduct, PantographSpec};

/// Truncation order used when none is given.
pub const DEFAULT_ORDER: usize = 32;

/// A power series `c_0 + c_1 x + ... + c_N x^N` known through order `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<S: Scalar> {
    params: Params<S>,
    coeffs: Vec<S>,
}

impl<S: Scalar> Series<S> {
    /// Builds a series from its coefficients. An empty vector is the zero
    /// series of order 0.
    pub fn new(params: &Params<S>, mut coeffs: Vec<S>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        Series {
            params: params.clone(),
            coeffs,
        }
    }

    pub fn from_fn(params: &Params<S>, order: usize, f: impl FnMut(usize) -> S) -> Self {
        Self::new(params, (0..=order).map(f).collect())
    }

    pub fn zero(params: &Params<S>, order: usize) -> Self {
        Self::from_fn(params, order, |_| S::zero())
    }

    pub fn constant(params: &Params<S>, c: S, order: usize) -> Self {
        let mut s = Self::zero(params, order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(params: &Params<S>, order: usize) -> Self {
        Self::constant(params, S::one(), order)
    }

    /// `c x^k` known through `order`.
    pub fn monomial(params: &Params<S>, c: S, k: usize, order: usize) -> Self {
        let mut s = Self::zero(params, order.max(k));
        s.coeffs[k] = c;
        s.with_order(order)
    }

    /// The identity series `x`.
    pub fn x(params: &Params<S>, order: usize) -> Self {
        Self::monomial(params, S::one(), 1, order)
    }

    pub fn params(&self) -> &Params<S> {
        &self.params
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `x^n`, zero past the order.
    pub fn coeff(&self, n: usize) -> S {
        self.coeffs.get(n).cloned().unwrap_or_else(S::zero)
    }

    /// Truncates, or pads with zeros. Padding is only meaningful when the
    /// series is really a polynomial.
    pub fn with_order(mut self, order: usize) -> Self {
        self.coeffs.resize(order + 1, S::zero());
        self
    }

    pub fn truncate(self, order: usize) -> Self {
        let order = order.min(self.order());
        self.with_order(order)
    }

    fn check(&self, other: &Self) -> Result<usize> {
        if self.params != other.params {
            return Err(Error::ParamsMismatch);
        }
        Ok(self.order().min(other.order()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let n = self.check(other)?;
        Ok(Self::from_fn(&self.params, n, |k| {
            self.coeffs[k].clone() + other.coeffs[k].clone()
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let n = self.check(other)?;
        Ok(Self::from_fn(&self.params, n, |k| {
            self.coeffs[k].clone() - other.coeffs[k].clone()
        }))
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let n = self.check(other)?;
        let mut out = vec![S::zero(); n + 1];
        for (i, a) in self.coeffs.iter().take(n + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(n + 1 - i).enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(Self::new(&self.params, out))
    }

    /// Series quotient; the divisor needs a nonzero constant term.
    pub fn div(&self, other: &Self) -> Result<Self> {
        let n = self.check(other)?;
        let d0 = other.coeffs[0].clone();
        if d0.is_zero() {
            return Err(Error::NonInvertible);
        }
        let mut out: Vec<S> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..=k {
                acc = acc - other.coeffs[j].clone() * out[k - j].clone();
            }
            out.push(acc / d0.clone());
        }
        Ok(Self::new(&self.params, out))
    }

    pub fn scalar_mul(&self, c: &S) -> Self {
        Self::from_fn(&self.params, self.order(), |k| c.clone() * self.coeffs[k].clone())
    }

    pub fn add_constant(&self, c: &S) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = s.coeffs[0].clone() + c.clone();
        s
    }

    pub fn neg(&self) -> Self {
        self.scalar_mul(&-S::one())
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    /// `(D f)_n = {n+1} c_{n+1}`, known through order `N - 1`.
    pub fn derive(&self) -> Self {
        let n = self.order();
        if n == 0 {
            return Self::zero(&self.params, 0);
        }
        let nums = self.params.st_numbers(n);
        Self::from_fn(&self.params, n - 1, |k| nums[k + 1].clone() * self.coeffs[k + 1].clone())
    }

    /// The antiderivative vanishing at 0: `F_n = c_{n-1} / {n}`, known
    /// through order `N + 1`.
    pub fn antiderive(&self) -> Self {
        let n = self.order() + 1;
        let nums = self.params.st_numbers(n);
        Self::from_fn(&self.params, n, |k| {
            if k == 0 {
                S::zero()
            } else {
                self.coeffs[k - 1].clone() / nums[k].clone()
            }
        })
    }

    /// `T_u f = f(u x)`.
    pub fn scale(&self, u: &S) -> Self {
        let mut p = S::one();
        Self::from_fn(&self.params, self.order(), |k| {
            let c = p.clone() * self.coeffs[k].clone();
            p = p.clone() * u.clone();
            c
        })
    }

    pub fn max_abs(&self) -> S {
        let mut m = S::zero();
        for c in &self.coeffs {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Largest coefficient difference over the common orders.
    pub fn max_abs_diff(&self, other: &Self) -> Result<S> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Coefficientwise comparison at the backend tolerance.
    pub fn approx_eq(&self, other: &Self) -> bool {
        let n = match self.check(other) {
            Ok(n) => n,
            Err(_) => return false,
        };
        (0..=n).all(|k| self.coeffs[k].approx_eq(&other.coeffs[k]))
    }

    fn require_vanishing(&self) -> Result<()> {
        if self.coeffs[0].is_zero() {
            Ok(())
        } else {
            Err(Error::NonzeroConstantTerm)
        }
    }

    /// `f^[0], ..., f^[k]`, where `f^[j]` vanishes at 0 and
    /// `D f^[j] = {j} f^[j-1] D f`.
    pub fn symbolic_powers(&self, k: usize) -> Result<Vec<Self>> {
        let n = self.order();
        let mut out = Vec::with_capacity(k + 1);
        out.push(Self::one(&self.params, n));
        if k == 0 {
            return Ok(out);
        }
        self.require_vanishing()?;
        let df = self.derive();
        let nums = self.params.st_numbers(k);
        for j in 1..=k {
            let rhs = out[j - 1].mul(&df)?.scalar_mul(&nums[j]);
            out.push(rhs.antiderive().with_order(n));
        }
        Ok(out)
    }

    /// The `k`-th symbolic power `f^[k]`.
    pub fn symbolic_power(&self, k: usize) -> Result<Self> {
        Ok(self.symbolic_powers(k)?.pop().expect("nonempty"))
    }
}

impl<S: Scalar> fmt::Display for Series<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{k}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " + O(x^{})", self.order() + 1)
    }
}

/// Shared body of the two compositions: `sum_n w_n g_n f^[n] / {n}!`.
fn compose_weighted<S: Scalar>(g: &[S], weights: &[S], f: &Series<S>) -> Result<Series<S>> {
    let n = f.order();
    f.require_vanishing()?;
    let terms = g.len().min(n + 1);
    let powers = f.symbolic_powers(terms.saturating_sub(1))?;
    let facts = f.params.st_factorials(terms);
    let mut acc = Series::zero(&f.params, n);
    for j in 0..terms {
        if g[j].is_zero() {
            continue;
        }
        let c = weights[j].clone() * g[j].clone() / facts[j].clone();
        acc = acc.add(&powers[j].scalar_mul(&c))?;
    }
    Ok(acc)
}

/// The u-deformed composition `g[f, u] = sum u^C(n,2) g_n f^[n] / {n}!`.
///
/// `g` is given in the factorial basis; entries past `f`'s order are unused.
pub fn compose_deformed<S: Scalar>(g: &[S], u: &S, f: &Series<S>) -> Result<Series<S>> {
    let mut weights = Vec::with_capacity(g.len());
    let mut w = S::one();
    let mut up = S::one();
    for _ in 0..g.len() {
        weights.push(w.clone());
        w = w * up.clone();
        up = up * u.clone();
    }
    compose_weighted(g, &weights, f)
}

/// The (1,u)-deformed composition `g[a,b; f, u] = sum (a+b)^n_{1,u} g_n f^[n] / {n}!`.
pub fn compose_ab<S: Scalar>(g: &[S], spec: &PantographSpec<S>, f: &Series<S>) -> Result<Series<S>> {
    let op = OplusProduct::delay(spec, g.len());
    let weights: Vec<S> = (0..g.len()).map(|n| op.pow(n)).collect();
    compose_weighted(g, &weights, f)
}

/// `g'_n = g_{n+1}`: the factorial-basis coefficients of `D g`.
pub fn shift_coeffs<S: Scalar>(g: &[S]) -> Vec<S> {
    g.iter().skip(1).cloned().collect()
}

fn check_bounds<S: Scalar>(lower: &Series<S>, upper: &Series<S>) -> Result<usize> {
    lower.require_vanishing()?;
    upper.require_vanishing()?;
    lower.check(upper)
}

/// Substitution integral of a monomial-basis integrand
/// `f = sum c_m x^m` between two series bounds:
/// `sum c_m (upper^[m+1] - lower^[m+1]) / {m+1}`.
pub fn sq_int<S: Scalar>(f: &Series<S>, lower: &Series<S>, upper: &Series<S>) -> Result<Series<S>> {
    let n = check_bounds(lower, upper)?;
    let lower = lower.clone().with_order(n);
    let upper = upper.clone().with_order(n);
    let terms = (f.order() + 1).min(n);
    let hi = upper.symbolic_powers(terms)?;
    let lo = lower.symbolic_powers(terms)?;
    let nums = f.params.st_numbers(terms);
    let mut acc = Series::zero(&f.params, n);
    for m in 0..terms {
        if f.coeffs[m].is_zero() {
            continue;
        }
        let c = f.coeffs[m].clone() / nums[m + 1].clone();
        acc = acc.add(&hi[m + 1].sub(&lo[m + 1])?.scalar_mul(&c))?;
    }
    Ok(acc)
}

/// Substitution integral of the deformed function
/// `f(x, u) = sum u^C(m,2) f_m x^m / {m}!`, i.e.
/// `sum u^C(m,2) f_m (upper^[m+1] - lower^[m+1]) / {m+1}!`.
pub fn sq_int_deformed<S: Scalar>(
    f: &[S],
    u: &S,
    lower: &Series<S>,
    upper: &Series<S>,
) -> Result<Series<S>> {
    let n = check_bounds(lower, upper)?;
    let lower = lower.clone().with_order(n);
    let upper = upper.clone().with_order(n);
    let terms = f.len().min(n);
    let hi = upper.symbolic_powers(terms)?;
    let lo = lower.symbolic_powers(terms)?;
    let facts = upper.params.st_factorials(terms + 1);
    let mut acc = Series::zero(&upper.params, n);
    let mut w = S::one();
    let mut up = S::one();
    for m in 0..terms {
        if !f[m].is_zero() {
            let c = w.clone() * f[m].clone() / facts[m + 1].clone();
            acc = acc.add(&hi[m + 1].sub(&lo[m + 1])?.scalar_mul(&c))?;
        }
        w = w * up.clone();
        up = up * u.clone();
    }
    Ok(acc)
}

/// `(f(phi x) - f(phi' x)) / ((phi - phi') x)` for a callable `f`.
pub fn st_derive_at<S: Scalar>(f: impl Fn(&S) -> S, x: &S, params: &Params<S>) -> Result<S> {
    if x.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let hi = f(&(params.phi().clone() * x.clone()));
    let lo = f(&(params.phi_prime().clone() * x.clone()));
    Ok((hi - lo) / (params.delta() * x.clone()))
}

/// Jackson's q-derivative `(f(y) - f(q y)) / ((1 - q) y)`.
pub fn q_derive_at<S: Scalar>(f: impl Fn(&S) -> S, y: &S, q: &S) -> Result<S> {
    if y.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let hi = f(y);
    let lo = f(&(q.clone() * y.clone()));
    Ok((hi - lo) / ((S::one() - q.clone()) * y.clone()))
}

type PeriodFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A q-periodic function, the integration constant of the (s,t)-calculus.
///
/// The callable form holds a period-one `G` and evaluates `G(ln|x| / ln|q|)`;
/// that is invariant under `x -> q x` for any real `q` with `|q| != 1`.
#[derive(Clone)]
pub enum QPeriodic<S: Scalar> {
    Constant(S),
    Callable(PeriodFn),
}

impl<S: Scalar> fmt::Debug for QPeriodic<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QPeriodic::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            QPeriodic::Callable(_) => f.write_str("Callable(..)"),
        }
    }
}

/// Grid size of the periodicity check.
pub const PERIODIC_GRID: usize = 50;
/// Tolerance of the periodicity check.
pub const PERIODIC_TOL: f64 = 1e-10;

impl<S: Scalar> QPeriodic<S> {
    pub fn callable(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        QPeriodic::Callable(Arc::new(g))
    }

    /// Value at `x != 0`.
    pub fn evaluate(&self, x: &S, q: &S) -> S {
        match self {
            QPeriodic::Constant(c) => c.clone(),
            QPeriodic::Callable(g) => {
                let lx = libm::log(libm::fabs(x.to_f64()));
                let lq = libm::log(libm::fabs(q.to_f64()));
                S::from_f64(g(lx / lq))
            }
        }
    }

    /// Largest `|G(x) - G(q x)|` over a logarithmic grid in `[1e-3, 1e3]`.
    pub fn periodicity_defect(&self, q: &S) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..PERIODIC_GRID {
            let e = -3.0 + 6.0 * i as f64 / (PERIODIC_GRID - 1) as f64;
            let x = S::from_f64(libm::pow(10.0, e));
            let qx = q.clone() * x.clone();
            let d = (self.evaluate(&x, q) - self.evaluate(&qx, q)).to_f64();
            worst = worst.max(libm::fabs(d));
        }
        worst
    }

    /// Rejects callables that fail the periodicity grid.
    pub fn check(&self, q: &S) -> Result<()> {
        let defect = self.periodicity_defect(q);
        if defect.is_finite() && defect <= PERIODIC_TOL {
            Ok(())
        } else {
            Err(Error::NonQPeriodicInitial { defect })
        }
    }
}
