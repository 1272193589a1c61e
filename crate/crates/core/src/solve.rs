//! Solvers for first-order linear proportional difference equations.
//!
//! Four families are covered:
//!
//! * integration factor: `D y + alpha(x) R(x) y(phi' x) = beta(x)` where
//!   `R = (a E[A] + b E[u A]) / E[A(phi x)]` and `A` is the antiderivative
//!   of `alpha` (or the variant with `phi` and `phi'` exchanged),
//! * series-linear: `D y = alpha (a y(x) + b y(u x)) + beta(x)`,
//! * operator: `D y = a beta y + gamma y(u x) + delta E(a, b; alpha x, u)`,
//! * Bernoulli: nonlinear equations reduced to the first two families.
//!
//! Every solver returns a [`SolutionReport`] whose residuals are computed by
//! substituting the solution back into the problem.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jackson::{st_integral_summed, QInterval};
use crate::numbers::{st_number_real, Params};
use crate::scalar::Scalar;
use crate::series::{compose_ab, st_derive_at, QPeriodic, Series};
use crate::special::{pantograph, OplusProduct, PantographSpec};
use crate::sum::default_tol;

/// Which argument the delayed term is evaluated at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DelaySide {
    /// `y(phi' x)`, with `E[A(phi x)]` in the denominator.
    PhiPrime,
    /// `y(phi x)`, with `E[A(phi' x)]` in the denominator.
    Phi,
}

impl DelaySide {
    /// `(delay, lift)`: the delay scale and the scale applied to `E[A]` in
    /// the denominator and the solution integrand.
    fn scales<S: Scalar>(self, params: &Params<S>) -> (S, S) {
        match self {
            DelaySide::PhiPrime => (params.phi_prime().clone(), params.phi().clone()),
            DelaySide::Phi => (params.phi().clone(), params.phi_prime().clone()),
        }
    }
}

/// How the coefficient of the delayed term is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientForm {
    /// `alpha(x) (a E[A] + b E[u A]) / E[A(lift x)]`.
    General,
    /// `alpha(lift x) (D_q E) [] A(lift x) / E[A(lift x)]`, where
    /// `(D_q E)(x) = a E(x/lift) + b E(u x/lift)`. Equal to the general form
    /// when `alpha` is constant.
    ThetaLiteral,
}

/// The integration constant: a value at `eta`, or a q-periodic function.
#[derive(Clone, Debug)]
pub enum Initial<S: Scalar> {
    Value(S),
    Periodic(QPeriodic<S>),
}

/// `D y + alpha(x) R(x) y(delay x) = beta(x)` with `y(eta)` given.
#[derive(Clone, Debug)]
pub struct IntegrationFactorProblem<S: Scalar> {
    pub params: Params<S>,
    pub spec: PantographSpec<S>,
    pub alpha: Series<S>,
    pub beta: Series<S>,
    pub eta: S,
    pub initial: Initial<S>,
    pub delay_side: DelaySide,
    pub form: CoefficientForm,
}

impl<S: Scalar> IntegrationFactorProblem<S> {
    /// General problem with `y(0) = 0`, delay `phi' x`.
    pub fn new(params: &Params<S>, spec: PantographSpec<S>, alpha: Series<S>, beta: Series<S>) -> Self {
        IntegrationFactorProblem {
            params: params.clone(),
            spec,
            alpha,
            beta,
            eta: S::zero(),
            initial: Initial::Value(S::zero()),
            delay_side: DelaySide::PhiPrime,
            form: CoefficientForm::General,
        }
    }

    /// Factor `exp[A, u]`: spec `(0, 1, u)`.
    pub fn deformed_exp(params: &Params<S>, u: S, alpha: Series<S>, beta: Series<S>) -> Self {
        Self::new(params, PantographSpec::deformed_exp(u), alpha, beta)
    }

    /// Factor `Exp[A]`: spec `(0, 1, phi)`, or `(0, 1, phi')` for the
    /// exchanged variant. For linear `A` the coefficient ratio is 1 and the
    /// equation reads `D y + alpha y(delay x) = beta`.
    pub fn classical(params: &Params<S>, side: DelaySide, alpha: Series<S>, beta: Series<S>) -> Self {
        let u = match side {
            DelaySide::PhiPrime => params.phi().clone(),
            DelaySide::Phi => params.phi_prime().clone(),
        };
        Self::new(params, PantographSpec::deformed_exp(u), alpha, beta).with_delay_side(side)
    }

    /// Factor `Theta_0[(1 - q) A, 1/phi]`: spec `(1, -q, q)`.
    pub fn theta(params: &Params<S>, form: CoefficientForm, alpha: Series<S>, beta: Series<S>) -> Self {
        let mut p = Self::new(params, PantographSpec::theta(params), alpha, beta);
        p.form = form;
        p
    }

    pub fn with_xi(mut self, xi: S) -> Self {
        self.eta = S::zero();
        self.initial = Initial::Value(xi);
        self
    }

    /// `y(eta) = G(log_q eta)`.
    pub fn with_initial(mut self, eta: S, g: Initial<S>) -> Self {
        self.eta = eta;
        self.initial = g;
        self
    }

    pub fn with_delay_side(mut self, side: DelaySide) -> Self {
        self.delay_side = side;
        self
    }

    fn is_series_mode(&self) -> bool {
        self.eta.is_zero() && matches!(self.initial, Initial::Value(_))
    }
}

/// `D y = alpha (a y(x) + b y(u x)) + beta(x)`, `y(0) = y0`, constant `alpha`.
#[derive(Clone, Debug)]
pub struct SeriesLinearProblem<S: Scalar> {
    pub params: Params<S>,
    pub spec: PantographSpec<S>,
    pub alpha: S,
    pub beta: Series<S>,
    pub y0: S,
}

/// `D y = a beta y + gamma y(u x) + delta E(a, b; alpha x, u)`. The
/// constant `c` weights the homogeneous solution.
#[derive(Clone, Debug)]
pub struct OperatorProblem<S: Scalar> {
    pub params: Params<S>,
    pub spec: PantographSpec<S>,
    pub alpha: S,
    pub beta: S,
    pub gamma: S,
    pub delta: S,
    pub c: S,
}

/// Bernoulli equation of order `n`.
///
/// With `delay_side = PhiPrime` this is
///
/// ```text
/// D_n y + alpha R y(phi^(n-1) x) = beta prod_j y(q^j phi^(n-1) x) / y(q^(n+j) phi^(n-1) x)
/// ```
///
/// where `D_n` is the divided difference with nodes `phi^(n-1) x` and
/// `phi'^(n-1) x` and `R` is the integration-factor ratio. `Phi` selects
/// the variant with `y(phi'^(n-1) x)` and `E[A(phi' x)]`. The side names
/// the delay of the transformed linear equation.
#[derive(Clone, Debug)]
pub struct BernoulliProblem<S: Scalar> {
    pub params: Params<S>,
    pub spec: PantographSpec<S>,
    pub alpha: Series<S>,
    pub beta: Series<S>,
    pub n: S,
    pub delay_side: DelaySide,
    /// `y(0)`.
    pub y0: S,
}

/// u-deformed Bernoulli equation with constant `alpha`:
///
/// ```text
/// D_n y + alpha y(phi^(n-1) u x) = beta prod_j y(q^j phi^(n-1) u x) / y(q^(n+j) phi^(n-1) u x)
/// ```
///
/// or, with `delay_side = Phi`, the delay `phi'^(n-1) u x`.
#[derive(Clone, Debug)]
pub struct UBernoulliProblem<S: Scalar> {
    pub params: Params<S>,
    pub alpha: S,
    pub beta: Series<S>,
    pub u: S,
    pub n: S,
    pub delay_side: DelaySide,
    pub y0: S,
}

/// One equation of any supported family.
#[derive(Clone, Debug)]
pub enum LinearProblem<S: Scalar> {
    IntegrationFactor(IntegrationFactorProblem<S>),
    SeriesLinear(SeriesLinearProblem<S>),
    Operator(OperatorProblem<S>),
    Bernoulli(BernoulliProblem<S>),
    UBernoulli(UBernoulliProblem<S>),
}

impl<S: Scalar> LinearProblem<S> {
    pub fn family(&self) -> &'static str {
        match self {
            LinearProblem::IntegrationFactor(_) => "integration-factor",
            LinearProblem::SeriesLinear(_) => "series-linear",
            LinearProblem::Operator(_) => "operator",
            LinearProblem::Bernoulli(_) => "bernoulli",
            LinearProblem::UBernoulli(_) => "u-bernoulli",
        }
    }

    pub fn params(&self) -> &Params<S> {
        match self {
            LinearProblem::IntegrationFactor(p) => &p.params,
            LinearProblem::SeriesLinear(p) => &p.params,
            LinearProblem::Operator(p) => &p.params,
            LinearProblem::Bernoulli(p) => &p.params,
            LinearProblem::UBernoulli(p) => &p.params,
        }
    }
}

/// Structured description of a closed-form solution.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub tag: &'static str,
    pub params: Vec<(&'static str, String)>,
}

/// Convergence flags and free-form notes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub converged: bool,
    /// Largest term count used by an infinite sum, if any ran.
    pub terms: Option<usize>,
    pub notes: Vec<(&'static str, String)>,
}

/// Coefficient and point residuals of a candidate solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual<S> {
    /// Largest residual coefficient through order `N - 1`; `None` when the
    /// solution is only known pointwise.
    pub coeff_max: Option<S>,
    pub points: Vec<(S, S)>,
}

/// A solution together with the residuals it produces.
///
/// The residual fields are computed from the solution and the problem when
/// the report is built and cannot be changed afterwards.
#[derive(Clone, Debug)]
pub struct SolutionReport<S: Scalar> {
    problem: LinearProblem<S>,
    solution: Option<Series<S>>,
    closed_form: Option<ClosedForm>,
    samples: Vec<(S, S)>,
    residual: Residual<S>,
    order: usize,
    diagnostics: Diagnostics,
}

impl<S: Scalar> SolutionReport<S> {
    fn from_series(
        problem: LinearProblem<S>,
        solution: Series<S>,
        closed_form: Option<ClosedForm>,
        points: &[S],
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        let residual = residual(&problem, &solution, points)?;
        let samples = points.iter().map(|x| (x.clone(), solution.eval(x))).collect();
        Ok(SolutionReport {
            order: solution.order(),
            problem,
            solution: Some(solution),
            closed_form,
            samples,
            residual,
            diagnostics,
        })
    }

    pub fn problem(&self) -> &LinearProblem<S> {
        &self.problem
    }
    pub fn solution(&self) -> Option<&Series<S>> {
        self.solution.as_ref()
    }
    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed_form.as_ref()
    }
    /// `(x, y(x))` at the sample points.
    pub fn samples(&self) -> &[(S, S)] {
        &self.samples
    }
    pub fn residual_coeff_max(&self) -> Option<&S> {
        self.residual.coeff_max.as_ref()
    }
    pub fn residual_points(&self) -> &[(S, S)] {
        &self.residual.points
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }
}

/// Sample points `0.1, 0.2, ..., 0.5`.
pub fn default_points<S: Scalar>() -> Vec<S> {
    (1..=5).map(|k| S::ratio(k, 10)).collect()
}

fn ones<S: Scalar>(n: usize) -> Vec<S> {
    vec![S::one(); n + 1]
}

fn require_order(got: usize, need: usize) -> Result<()> {
    if got < need {
        Err(Error::OrderTooSmall { got, need })
    } else {
        Ok(())
    }
}

/// Pads a short input, which is then read as a polynomial.
fn fit<S: Scalar>(f: &Series<S>, order: usize) -> Series<S> {
    f.clone().with_order(order.max(f.order())).truncate(order)
}

fn cf(tag: &'static str, params: Vec<(&'static str, String)>) -> Option<ClosedForm> {
    Some(ClosedForm { tag, params })
}

// ---------------------------------------------------------------------------
// Integration factor

/// The composed series an integration-factor solution is built from.
#[derive(Clone, Debug)]
pub struct IntegratingFactor<S: Scalar> {
    /// `A`, the antiderivative of `alpha` vanishing at 0.
    pub a: Series<S>,
    /// `E[a, b; A(x), u]`.
    pub e: Series<S>,
    /// `a E[A] + b E[u A]`, which equals `D E[A] / alpha`.
    pub numerator: Series<S>,
}

/// Builds `E[a, b; A(x), u]` and its derivative factor through `order`.
pub fn integrating_factor<S: Scalar>(
    params: &Params<S>,
    spec: &PantographSpec<S>,
    alpha: &Series<S>,
    order: usize,
) -> Result<IntegratingFactor<S>> {
    require_order(order, 1)?;
    if alpha.params() != params {
        return Err(Error::ParamsMismatch);
    }
    let a = fit(alpha, order - 1).antiderive();
    let g = ones(order);
    let e = compose_ab(&g, spec, &a)?;
    let e_u = compose_ab(&g, spec, &a.scalar_mul(&spec.u))?;
    let numerator = e.scalar_mul(&spec.a).add(&e_u.scalar_mul(&spec.b))?;
    Ok(IntegratingFactor { a, e, numerator })
}

/// The delayed-term coefficient as `alpha * numerator / denominator`.
#[derive(Clone, Debug)]
pub struct CoefficientParts<S: Scalar> {
    pub alpha: Series<S>,
    pub numerator: Series<S>,
    pub denominator: Series<S>,
}

impl<S: Scalar> CoefficientParts<S> {
    pub fn series(&self) -> Result<Series<S>> {
        self.alpha.mul(&self.numerator)?.div(&self.denominator)
    }

    /// Point value from the three polynomials, avoiding the reciprocal series.
    pub fn eval(&self, x: &S) -> S {
        self.alpha.eval(x) * self.numerator.eval(x) / self.denominator.eval(x)
    }
}

pub fn coefficient_parts<S: Scalar>(
    problem: &IntegrationFactorProblem<S>,
    order: usize,
) -> Result<CoefficientParts<S>> {
    let p = &problem.params;
    let f = integrating_factor(p, &problem.spec, &problem.alpha, order)?;
    let (_, lift) = problem.delay_side.scales(p);
    let denominator = f.e.scale(&lift);
    match problem.form {
        CoefficientForm::General => Ok(CoefficientParts {
            alpha: fit(&problem.alpha, order),
            numerator: f.numerator,
            denominator,
        }),
        CoefficientForm::ThetaLiteral => {
            let spec = &problem.spec;
            let shifted = f.a.scale(&lift).scalar_mul(&lift.recip());
            let g = ones(order);
            let e1 = compose_ab(&g, spec, &shifted)?;
            let e2 = compose_ab(&g, spec, &shifted.scalar_mul(&spec.u))?;
            Ok(CoefficientParts {
                alpha: fit(&problem.alpha, order).scale(&lift),
                numerator: e1.scalar_mul(&spec.a).add(&e2.scalar_mul(&spec.b))?,
                denominator,
            })
        }
    }
}

/// The coefficient of the delayed term, as a series through `order`.
pub fn integration_factor_coefficient<S: Scalar>(
    problem: &IntegrationFactorProblem<S>,
    order: usize,
) -> Result<Series<S>> {
    coefficient_parts(problem, order)?.series()
}

/// Solves an integration-factor problem.
///
/// With `eta = 0` and a constant initial value the solution is returned as
/// a series, `(antiderive(beta E[A(lift x)]) + xi) / E[A]`. Otherwise the
/// solution is evaluated pointwise with Jackson sums, see
/// [`integration_factor_at`].
pub fn solve_integration_factor<S: Scalar>(
    problem: &IntegrationFactorProblem<S>,
    order: usize,
) -> Result<SolutionReport<S>> {
    let points = if problem.is_series_mode() {
        default_points()
    } else {
        (1..=5)
            .map(|k| problem.eta.clone() + S::ratio(k, 10))
            .collect()
    };
    solve_integration_factor_at_points(problem, order, &points)
}

pub fn solve_integration_factor_at_points<S: Scalar>(
    problem: &IntegrationFactorProblem<S>,
    order: usize,
    points: &[S],
) -> Result<SolutionReport<S>> {
    if problem.alpha.params() != &problem.params || problem.beta.params() != &problem.params {
        return Err(Error::ParamsMismatch);
    }
    let closed = cf(
        "integration-factor",
        vec![
            ("a", problem.spec.a.to_string()),
            ("b", problem.spec.b.to_string()),
            ("u", problem.spec.u.to_string()),
            ("eta", problem.eta.to_string()),
        ],
    );
    if problem.is_series_mode() {
        let xi = match &problem.initial {
            Initial::Value(v) => v.clone(),
            Initial::Periodic(_) => unreachable!(),
        };
        let y = integration_factor_series(problem, &xi, order)?;
        let diag = Diagnostics {
            converged: true,
            ..Diagnostics::default()
        };
        return SolutionReport::from_series(
            LinearProblem::IntegrationFactor(problem.clone()),
            y,
            closed,
            points,
            diag,
        );
    }
    if S::is_exact() {
        return Err(Error::BackendMismatch("pointwise mode needs a floating backend"));
    }
    if let Initial::Periodic(g) = &problem.initial {
        g.check(problem.params.q())?;
    }
    let tol = default_tol::<S>();
    let eval = IntegrationFactorEvaluator::new(problem, order)?;
    let mut samples = Vec::new();
    let mut res = Vec::new();
    let mut terms = 0;
    let coef = coefficient_parts(problem, order)?;
    let (delay, _) = problem.delay_side.scales(&problem.params);
    for x in points {
        let (y, n) = eval.eval(x, &tol)?;
        terms = terms.max(n);
        samples.push((x.clone(), y));
        if x.is_zero() {
            return Err(Error::ZeroPoint);
        }
        let p = &problem.params;
        let hi = eval.eval(&(p.phi().clone() * x.clone()), &tol)?.0;
        let lo = eval.eval(&(p.phi_prime().clone() * x.clone()), &tol)?.0;
        let dy = (hi - lo) / (p.delta() * x.clone());
        let yd = eval.eval(&(delay.clone() * x.clone()), &tol)?.0;
        let r = dy + coef.eval(x) * yd - problem.beta.eval(x);
        res.push((x.clone(), r.abs()));
    }
    let diagnostics = Diagnostics {
        converged: true,
        terms: Some(terms),
        notes: vec![("mode", "pointwise".to_string())],
    };
    Ok(SolutionReport {
        problem: LinearProblem::IntegrationFactor(problem.clone()),
        solution: None,
        closed_form: closed,
        samples,
        residual: Residual {
            coeff_max: None,
            points: res,
        },
        order,
        diagnostics,
    })
}

fn integration_factor_series<S: Scalar>(
    problem: &IntegrationFactorProblem<S>,
    xi: &S,
    order: usize,
) -> Result<Series<S>> {
    let p = &problem.params;
    let f = integrating_factor(p, &problem.spec, &problem.alpha, order)?;
    let (_, lift) = problem.delay_side.scales(p);
    let integrand = fit(&problem.beta, order).mul(&f.e.scale(&lift))?;
    let num = integrand.antiderive().truncate(order).add_constant(xi);
    num.div(&f.e)
}

/// Pointwise evaluator for integration-factor solutions:
/// `y(x) = (int_eta^x beta(r) E[A](lift r) d r + E[A](eta) G(log_q x)) / E[A](x)`.
///
/// `A` vanishes at 0 rather than at `eta`; the factor `E[A](eta)` keeps
/// `y(eta) = G(log_q eta)`.
pub struct IntegrationFactorEvaluator<S: Scalar> {
    params: Params<S>,
    e: Series<S>,
    beta: Series<S>,
    lift: S,
    eta: S,
    e_eta: S,
    initial: Initial<S>,
}

impl<S: Scalar> IntegrationFactorEvaluator<S> {
    pub fn new(problem: &IntegrationFactorProblem<S>, order: usize) -> Result<Self> {
        let p = &problem.params;
        let f = integrating_factor(p, &problem.spec, &problem.alpha, order)?;
        let (_, lift) = problem.delay_side.scales(p);
        if problem.eta.is_zero() && matches!(problem.initial, Initial::Periodic(_)) {
            return Err(Error::HypothesisViolated("a q-periodic initial function needs eta > 0"));
        }
        Ok(IntegrationFactorEvaluator {
            params: p.clone(),
            e_eta: f.e.eval(&problem.eta),
            e: f.e,
            beta: problem.beta.clone(),
            lift,
            eta: problem.eta.clone(),
            initial: problem.initial.clone(),
        })
    }

    /// `y(x)` and the number of Jackson terms used.
    pub fn eval(&self, x: &S, tol: &S) -> Result<(S, usize)> {
        let interval = QInterval::new(&self.params, self.eta.clone(), x.clone())?;
        let lift = self.lift.clone();
        let sum = st_integral_summed(
            |r| self.beta.eval(r) * self.e.eval(&(lift.clone() * r.clone())),
            &interval,
            tol,
        )?;
        let g = match &self.initial {
            Initial::Value(v) => v.clone(),
            Initial::Periodic(g) => g.evaluate(x, self.params.q()),
        };
        let y = (sum.value + self.e_eta.clone() * g) / self.e.eval(x);
        Ok((y, sum.terms))
    }
}

/// `y(x)` for an integration-factor problem by Jackson summation; works for
/// any `eta >= 0`.
pub fn integration_factor_at<S: Scalar>(
    problem: &IntegrationFactorProblem<S>,
    x: &S,
    order: usize,
    tol: &S,
) -> Result<S> {
    Ok(IntegrationFactorEvaluator::new(problem, order)?.eval(x, tol)?.0)
}

// ---------------------------------------------------------------------------
// Series-linear

/// Solves `D y = alpha (a y + b y(u x)) + beta` by
/// `a_{n+1} = (alpha (a + b u^n) a_n + b_n) / {n+1}`.
pub fn solve_series_linear<S: Scalar>(problem: &SeriesLinearProblem<S>, order: usize) -> Result<SolutionReport<S>> {
    let y = series_linear_recurrence(problem, order)?;
    let closed = cf(
        "series-linear",
        vec![
            ("y0", problem.y0.to_string()),
            ("a", problem.spec.a.to_string()),
            ("b", problem.spec.b.to_string()),
            ("u", problem.spec.u.to_string()),
            ("alpha", problem.alpha.to_string()),
        ],
    );
    let diag = Diagnostics {
        converged: true,
        ..Diagnostics::default()
    };
    SolutionReport::from_series(LinearProblem::SeriesLinear(problem.clone()), y, closed, &default_points(), diag)
}

fn series_linear_recurrence<S: Scalar>(problem: &SeriesLinearProblem<S>, order: usize) -> Result<Series<S>> {
    let p = &problem.params;
    if problem.beta.params() != p {
        return Err(Error::ParamsMismatch);
    }
    let nums = p.st_numbers(order);
    let spec = &problem.spec;
    let mut a = Vec::with_capacity(order + 1);
    a.push(problem.y0.clone());
    let mut un = S::one();
    for n in 0..order {
        let f = spec.a.clone() + spec.b.clone() * un.clone();
        let next = (problem.alpha.clone() * f * a[n].clone() + problem.beta.coeff(n)) / nums[n + 1].clone();
        a.push(next);
        un = un * spec.u.clone();
    }
    Ok(Series::new(p, a))
}

/// The closed form
/// `y0 E(a,b; alpha x, u) + sum_n (sum_{k<n} {k}! alpha^(n-k-1) b_k / P_{k+1}) P_n x^n / {n}!`
/// with `P_n = (a + b)^n_{1,u}`. Needs every `P_k` nonzero.
pub fn series_linear_closed_form<S: Scalar>(problem: &SeriesLinearProblem<S>, order: usize) -> Result<Series<S>> {
    let p = &problem.params;
    let op = OplusProduct::delay(&problem.spec, order + 1);
    let facts = p.st_factorials(order);
    let al = &problem.alpha;
    let mut out = pantograph(p, &problem.spec, order).scale(al).scalar_mul(&problem.y0);
    let mut coeffs = out.coeffs().to_vec();
    for n in 1..=order {
        let mut inner = S::zero();
        for (k, fk) in facts.iter().enumerate().take(n) {
            let pk = op.pow(k + 1);
            if pk.is_zero() {
                return Err(Error::HypothesisViolated("closed form needs (a+b)^k nonzero"));
            }
            inner = inner + fk.clone() * al.powi((n - k - 1) as i64) * problem.beta.coeff(k) / pk;
        }
        coeffs[n] = coeffs[n].clone() + inner * op.pow(n) / facts[n].clone();
    }
    out = Series::new(p, coeffs);
    Ok(out)
}

/// Solves `D y = phi' (a y + b y(u x)) + beta (a E(phi x) + b E(phi u x))`
/// by `y = y0 E(a,b; phi' x, u) + beta x (a E(x) + b E(u x))`.
pub fn solve_special_rhs<S: Scalar>(
    params: &Params<S>,
    spec: &PantographSpec<S>,
    beta: &S,
    y0: &S,
    order: usize,
) -> Result<SolutionReport<S>> {
    let e = pantograph(params, spec, order + 1);
    let rhs = e
        .scale(params.phi())
        .scalar_mul(&spec.a)
        .add(&e.scale(&(params.phi().clone() * spec.u.clone())).scalar_mul(&spec.b))?
        .scalar_mul(beta);
    let problem = SeriesLinearProblem {
        params: params.clone(),
        spec: spec.clone(),
        alpha: params.phi_prime().clone(),
        beta: rhs,
        y0: y0.clone(),
    };
    let x = Series::x(params, order + 1);
    let forced = x
        .mul(&e.scalar_mul(&spec.a).add(&e.scale(&spec.u).scalar_mul(&spec.b))?)?
        .scalar_mul(beta);
    let y = e
        .scale(params.phi_prime())
        .scalar_mul(y0)
        .add(&forced)?
        .truncate(order);
    let closed = cf(
        "phi-prime-rhs",
        vec![("c", y0.to_string()), ("beta", beta.to_string())],
    );
    let diag = Diagnostics {
        converged: true,
        ..Diagnostics::default()
    };
    SolutionReport::from_series(LinearProblem::SeriesLinear(problem), y, closed, &default_points(), diag)
}

// ---------------------------------------------------------------------------
// Operator method

/// Coefficients of `(D - a beta - gamma T_u) E(a,b; beta x, u) - (b beta - gamma) E(a,b; u beta x, u)`.
pub fn operator_identity_defect<S: Scalar>(
    params: &Params<S>,
    spec: &PantographSpec<S>,
    beta: &S,
    gamma: &S,
    order: usize,
) -> Result<Series<S>> {
    let e = pantograph(params, spec, order + 1).scale(beta);
    let lhs = e
        .derive()
        .sub(&e.scalar_mul(&(spec.a.clone() * beta.clone())))?
        .sub(&e.scale(&spec.u).scalar_mul(gamma))?;
    let rhs = pantograph(params, spec, order)
        .scale(&(spec.u.clone() * beta.clone()))
        .scalar_mul(&(spec.b.clone() * beta.clone() - gamma.clone()));
    lhs.sub(&rhs)
}

/// The operator-method solution
/// `c E(a beta, gamma; x, u) + (u delta / (b alpha - u gamma)) E(a, b; alpha x / u, u)`.
///
/// The particular part inverts `D - a beta - gamma T_u` on
/// `E(a, b; alpha x, u)` through the operator identity at scale
/// `alpha / u`; it solves the equation when that scale equals `beta` or
/// `a = 0`. The report's residual shows whether it does.
pub fn solve_operator<S: Scalar>(problem: &OperatorProblem<S>, order: usize) -> Result<SolutionReport<S>> {
    let p = &problem.params;
    let spec = &problem.spec;
    if spec.u.is_zero() {
        return Err(Error::ZeroDelay);
    }
    let den = spec.b.clone() * problem.alpha.clone() - spec.u.clone() * problem.gamma.clone();
    if den.is_zero() {
        return Err(Error::ResonantParameters);
    }
    let identity = operator_identity_defect(p, spec, &problem.beta, &problem.gamma, order)?.max_abs();
    let scale = problem.alpha.clone() / spec.u.clone();
    let hom_spec = PantographSpec::new(spec.a.clone() * problem.beta.clone(), problem.gamma.clone(), spec.u.clone());
    let hom = pantograph(p, &hom_spec, order).scalar_mul(&problem.c);
    let part = pantograph(p, spec, order)
        .scale(&scale)
        .scalar_mul(&(spec.u.clone() * problem.delta.clone() / den));
    let y = hom.add(&part)?;
    let closed = cf(
        "operator",
        vec![
            ("c", problem.c.to_string()),
            ("particular_scale", scale.to_string()),
        ],
    );
    let mut notes = vec![("operator_identity_defect", identity.to_string())];
    if !(scale == problem.beta || spec.a.is_zero()) {
        notes.push(("scale_mismatch", format!("alpha/u = {scale} differs from beta = {}", problem.beta)));
    }
    let diag = Diagnostics {
        converged: true,
        terms: None,
        notes,
    };
    SolutionReport::from_series(LinearProblem::Operator(problem.clone()), y, closed, &default_points(), diag)
}

// ---------------------------------------------------------------------------
// Residuals

/// Substitutes `y` into the problem. The coefficient residual runs through
/// order `N - 1`; point residuals use divided differences on the truncated
/// polynomial.
pub fn residual<S: Scalar>(problem: &LinearProblem<S>, y: &Series<S>, points: &[S]) -> Result<Residual<S>> {
    require_order(y.order(), 1)?;
    let n = y.order();
    let p = problem.params();
    let series = match problem {
        LinearProblem::IntegrationFactor(pr) => {
            let coef = integration_factor_coefficient(pr, n)?;
            let (delay, _) = pr.delay_side.scales(p);
            Some(y.derive().add(&coef.mul(&y.scale(&delay))?)?.sub(&fit(&pr.beta, n))?)
        }
        LinearProblem::SeriesLinear(pr) => {
            let spec = &pr.spec;
            let rhs = y
                .scalar_mul(&spec.a)
                .add(&y.scale(&spec.u).scalar_mul(&spec.b))?
                .scalar_mul(&pr.alpha)
                .add(&fit(&pr.beta, n))?;
            Some(y.derive().sub(&rhs)?)
        }
        LinearProblem::Operator(pr) => {
            let spec = &pr.spec;
            let forcing = pantograph(p, spec, n).scale(&pr.alpha).scalar_mul(&pr.delta);
            let rhs = y
                .scalar_mul(&(spec.a.clone() * pr.beta.clone()))
                .add(&y.scale(&spec.u).scalar_mul(&pr.gamma))?
                .add(&forcing)?;
            Some(y.derive().sub(&rhs)?)
        }
        LinearProblem::Bernoulli(_) | LinearProblem::UBernoulli(_) => None,
    };
    let coeff_max = series.as_ref().map(|s| s.max_abs());
    let mut pts = Vec::with_capacity(points.len());
    match problem {
        LinearProblem::Bernoulli(_) | LinearProblem::UBernoulli(_) => {
            let tol = default_tol::<S>();
            for x in points {
                let r = bernoulli_residual_at(problem, |v| Ok(y.eval(v)), x, &tol)?;
                pts.push((x.clone(), r.abs()));
            }
        }
        _ => {
            let r = series.expect("linear family");
            for x in points {
                pts.push((x.clone(), point_residual(problem, y, &r, x)?));
            }
        }
    }
    Ok(Residual { coeff_max, points: pts })
}

fn point_residual<S: Scalar>(problem: &LinearProblem<S>, y: &Series<S>, fallback: &Series<S>, x: &S) -> Result<S> {
    let p = problem.params();
    if x.is_zero() {
        return Ok(fallback.coeff(0).abs());
    }
    let dy = st_derive_at(|v| y.eval(v), x, p)?;
    let n = y.order();
    let r = match problem {
        LinearProblem::IntegrationFactor(pr) => {
            let coef = coefficient_parts(pr, n)?;
            let (delay, _) = pr.delay_side.scales(p);
            dy + coef.eval(x) * y.eval(&(delay * x.clone())) - pr.beta.eval(x)
        }
        LinearProblem::SeriesLinear(pr) => {
            let s = &pr.spec;
            dy - pr.alpha.clone() * (s.a.clone() * y.eval(x) + s.b.clone() * y.eval(&(s.u.clone() * x.clone())))
                - pr.beta.eval(x)
        }
        LinearProblem::Operator(pr) => {
            let s = &pr.spec;
            let forcing = pantograph(p, s, n).eval(&(pr.alpha.clone() * x.clone()));
            dy - s.a.clone() * pr.beta.clone() * y.eval(x)
                - pr.gamma.clone() * y.eval(&(s.u.clone() * x.clone()))
                - pr.delta.clone() * forcing
        }
        _ => unreachable!(),
    };
    Ok(r.abs())
}

/// Dispatches to the solver of the problem's family. Bernoulli problems are
/// transformed first and the report describes the linear problem in `z`.
pub fn solve<S: Scalar>(problem: &LinearProblem<S>, order: usize) -> Result<SolutionReport<S>> {
    match problem {
        LinearProblem::IntegrationFactor(p) => solve_integration_factor(p, order),
        LinearProblem::SeriesLinear(p) => solve_series_linear(p, order),
        LinearProblem::Operator(p) => solve_operator(p, order),
        LinearProblem::Bernoulli(_) | LinearProblem::UBernoulli(_) => {
            let t = bernoulli_transform(problem)?;
            solve(&t.problem, order)
        }
    }
}

// ---------------------------------------------------------------------------
// Bernoulli

/// The linear problem in `z` a Bernoulli problem reduces to.
#[derive(Clone, Debug)]
pub struct BernoulliTransform<S: Scalar> {
    /// Already multiplied through by `scale`, so it has the solver's form.
    pub problem: LinearProblem<S>,
    /// `-1/{n-1}`, the coefficient of `D z` before rescaling.
    pub d_coefficient: S,
    /// `-{n-1}`.
    pub scale: S,
}

fn bernoulli_scale<S: Scalar>(params: &Params<S>, n: &S) -> Result<S> {
    if n.is_zero() || *n == S::one() {
        return Err(Error::InvalidBernoulliOrder);
    }
    let nm1 = st_number_real(params, &(n.clone() - S::one()))?;
    if nm1.is_zero() {
        return Err(Error::DegenerateStNumber);
    }
    Ok(nm1)
}

/// `(z(0), c)` such that the transformed right-hand side is `c beta`.
///
/// The product substitution has `z(0) = 1` and, with the infinite products
/// read literally, picks up `1/y(0)` on the right. For `n = 2` the
/// substitution is `z = 1/y`, so `z(0) = 1/y(0)` and the right side carries
/// `1/y(0)^2`. Both reduce to the unscaled form when `y(0) = 1`.
pub fn bernoulli_normalisation<S: Scalar>(n: &S, y0: &S) -> Result<(S, S)> {
    if y0.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let inv = y0.recip();
    if *n == S::from_i64(2) {
        Ok((inv.clone(), inv.clone() * inv))
    } else {
        Ok((S::one(), inv))
    }
}

/// Turns a Bernoulli problem into
/// `-(1/{n-1}) D z + alpha R z(delay x) = beta` and rescales it by
/// `-{n-1}`. See [`bernoulli_normalisation`] for the factor on `beta` when
/// `y(0) != 1`.
///
/// The u-deformed equations map to `-(1/{n-1}) D z + alpha z(phi' u x) = beta`
/// (or `z(phi u x)`). That form is exact for `u = 1` only: the substitution
/// carries the derivative to `u x` while the remaining terms stay at `x`.
///
/// For the integration-factor family the rescaled coefficient
/// `-{n-1} alpha R_A` must again be of the form `alpha' R_A'` with
/// `A' = -{n-1} A`; this holds for constant `alpha` with spec
/// `(0, 1, phi)` and is checked coefficientwise.
pub fn bernoulli_transform<S: Scalar>(problem: &LinearProblem<S>) -> Result<BernoulliTransform<S>> {
    match problem {
        LinearProblem::Bernoulli(b) => {
            let nm1 = bernoulli_scale(&b.params, &b.n)?;
            let scale = -nm1.clone();
            let (z0, c) = bernoulli_normalisation(&b.n, &b.y0)?;
            let order = b.alpha.order().max(b.beta.order()).max(4);
            let lin = IntegrationFactorProblem {
                params: b.params.clone(),
                spec: b.spec.clone(),
                alpha: fit(&b.alpha, order).scalar_mul(&scale),
                beta: fit(&b.beta, order).scalar_mul(&(scale.clone() * c)),
                eta: S::zero(),
                initial: Initial::Value(z0),
                delay_side: b.delay_side,
                form: CoefficientForm::General,
            };
            let mut original = lin.clone();
            original.alpha = fit(&b.alpha, order);
            let want = integration_factor_coefficient(&original, order)?.scalar_mul(&scale);
            let got = integration_factor_coefficient(&lin, order)?;
            if !got.approx_eq(&want) {
                return Err(Error::HypothesisViolated(
                    "rescaled coefficient leaves the integration-factor family",
                ));
            }
            Ok(BernoulliTransform {
                problem: LinearProblem::IntegrationFactor(lin),
                d_coefficient: -nm1.recip(),
                scale,
            })
        }
        LinearProblem::UBernoulli(b) => {
            let nm1 = bernoulli_scale(&b.params, &b.n)?;
            let (delay, _) = b.delay_side.scales(&b.params);
            let (z0, c) = bernoulli_normalisation(&b.n, &b.y0)?;
            let lin = SeriesLinearProblem {
                params: b.params.clone(),
                spec: PantographSpec::deformed_exp(delay * b.u.clone()),
                alpha: nm1.clone() * b.alpha.clone(),
                beta: b.beta.scalar_mul(&(-nm1.clone() * c)),
                y0: z0,
            };
            Ok(BernoulliTransform {
                problem: LinearProblem::SeriesLinear(lin),
                d_coefficient: -nm1.recip(),
                scale: -nm1,
            })
        }
        _ => Err(Error::FamilyMismatch),
    }
}

/// Which value anchors the reconstruction product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchor {
    /// `n = 2`: `y = 1/z`.
    Reciprocal,
    /// `y(0)`: `0 < |q| < 1` with `n > 1`, or `|q| > 1` with `n < 1`.
    Zero,
    /// `y(inf)`, supplied by the caller.
    Infinity,
}

pub fn anchor_case<S: Scalar>(n: &S, q: &S) -> Anchor {
    if *n == S::from_i64(2) {
        return Anchor::Reciprocal;
    }
    let aq = q.abs();
    let inside = !aq.is_zero() && aq < S::one();
    if (inside && *n > S::one()) || (aq > S::one() && *n < S::one()) {
        Anchor::Zero
    } else {
        Anchor::Infinity
    }
}

/// Cap on reconstruction factors.
pub const MAX_FACTORS: usize = 500;

/// `y` recovered from `z`:
/// `y(x) = y_anchor prod_i z(q^(i(n-1)+1) x / phi^(n-2)) / z(q^(i(n-1)) x / phi^(n-2))`,
/// or `1/z(x)` when `n = 2`. For the u-deformed family the result is read
/// at `x / u`.
pub struct Reconstruction<S: Scalar, F> {
    z: F,
    params: Params<S>,
    n: S,
    anchor_value: S,
    inner: S,
    tol: S,
    pub anchor: Anchor,
}

pub fn bernoulli_reconstruct<S, F>(z: F, n: &S, params: &Params<S>, y_anchor: &S, tol: &S) -> Result<Reconstruction<S, F>>
where
    S: Scalar,
    F: Fn(&S) -> Result<S>,
{
    if n.is_zero() || *n == S::one() {
        return Err(Error::InvalidBernoulliOrder);
    }
    Ok(Reconstruction {
        z,
        params: params.clone(),
        n: n.clone(),
        anchor_value: y_anchor.clone(),
        inner: S::one(),
        tol: tol.clone(),
        anchor: anchor_case(n, params.q()),
    })
}

impl<S: Scalar, F: Fn(&S) -> Result<S>> Reconstruction<S, F> {
    /// Reads the reconstruction at `x / u`, as the u-deformed substitution needs.
    pub fn with_inner_scale(mut self, u: S) -> Self {
        self.inner = u;
        self
    }

    fn z_at(&self, x: &S) -> Result<S> {
        let v = (self.z)(x)?;
        if v.is_zero() {
            Err(Error::ZeroDenominator)
        } else {
            Ok(v)
        }
    }

    pub fn eval(&self, x: &S) -> Result<S> {
        let x = x.clone() / self.inner.clone();
        if self.anchor == Anchor::Reciprocal {
            return Ok(self.z_at(&x)?.recip());
        }
        let nm1 = self.n.clone() - S::one();
        let r = self
            .params
            .q()
            .powf(&nm1)
            .ok_or(Error::HypothesisViolated("q^(n-1) is not real"))?;
        let lift = self
            .params
            .phi()
            .powf(&(self.n.clone() - S::from_i64(2)))
            .ok_or(Error::HypothesisViolated("phi^(n-2) is not real"))?;
        let q = self.params.q().clone();
        let mut node = x / lift;
        let mut acc = self.anchor_value.clone();
        let mut small = 0;
        for _ in 0..MAX_FACTORS {
            let f = self.z_at(&(q.clone() * node.clone()))? / self.z_at(&node)?;
            acc = acc * f.clone();
            if (f - S::one()).abs() < self.tol {
                small += 1;
                if small >= crate::sum::RUN {
                    return Ok(acc);
                }
            } else {
                small = 0;
            }
            node = node * r.clone();
        }
        Err(Error::ConvergenceFailure { terms: MAX_FACTORS })
    }
}

/// `prod_j y(q^j c) / y(q^(n+j) c)`. Integer orders telescope to a finite
/// product; other orders are truncated once factors settle at 1.
fn bernoulli_product<S: Scalar>(
    y: &impl Fn(&S) -> Result<S>,
    n: &S,
    q: &S,
    c: &S,
    tol: &S,
) -> Result<S> {
    let nonzero = |v: S| if v.is_zero() { Err(Error::ZeroDenominator) } else { Ok(v) };
    if let Some(k) = n.as_integer() {
        let y0 = nonzero(y(&S::zero())?)?;
        let mut acc = S::one();
        if k >= 0 {
            let mut node = c.clone();
            for _ in 0..k {
                acc = acc * y(&node)? / y0.clone();
                node = node * q.clone();
            }
        } else {
            let mut node = c.clone();
            for _ in 0..(-k) {
                node = node / q.clone();
                acc = acc * y0.clone() / nonzero(y(&node)?)?;
            }
        }
        return Ok(acc);
    }
    let qn = q.powf(n).ok_or(Error::HypothesisViolated("q^n is not real"))?;
    let mut node = c.clone();
    let mut acc = S::one();
    let mut small = 0;
    for _ in 0..MAX_FACTORS {
        let f = y(&node)? / nonzero(y(&(qn.clone() * node.clone()))?)?;
        acc = acc * f.clone();
        if (f - S::one()).abs() < *tol {
            small += 1;
            if small >= crate::sum::RUN {
                return Ok(acc);
            }
        } else {
            small = 0;
        }
        node = node * q.clone();
    }
    Err(Error::ConvergenceFailure { terms: MAX_FACTORS })
}

/// Residual of the original Bernoulli equation at `x != 0`.
pub fn bernoulli_residual_at<S: Scalar>(
    problem: &LinearProblem<S>,
    y: impl Fn(&S) -> Result<S>,
    x: &S,
    tol: &S,
) -> Result<S> {
    let (params, n, side, u) = match problem {
        LinearProblem::Bernoulli(b) => (&b.params, &b.n, b.delay_side, S::one()),
        LinearProblem::UBernoulli(b) => (&b.params, &b.n, b.delay_side, b.u.clone()),
        _ => return Err(Error::FamilyMismatch),
    };
    if x.is_zero() {
        return Err(Error::ZeroPoint);
    }
    let nm1 = n.clone() - S::one();
    let power = |v: &S| v.powf(&nm1).ok_or(Error::HypothesisViolated("non-real node power"));
    let pn = power(params.phi())?;
    let ppn = power(params.phi_prime())?;
    let dn = (y(&(pn.clone() * x.clone()))? - y(&(ppn.clone() * x.clone()))?) / ((pn.clone() - ppn.clone()) * x.clone());
    let delayed = match side {
        DelaySide::PhiPrime => pn.clone(),
        DelaySide::Phi => ppn.clone(),
    } * u.clone()
        * x.clone();
    let (coef, beta) = match problem {
        LinearProblem::Bernoulli(b) => {
            let order = b.alpha.order().max(b.beta.order()).max(8);
            let mut lin = IntegrationFactorProblem::new(&b.params, b.spec.clone(), fit(&b.alpha, order), b.beta.clone());
            lin.delay_side = b.delay_side;
            (coefficient_parts(&lin, order)?.eval(x), b.beta.eval(x))
        }
        LinearProblem::UBernoulli(b) => (b.alpha.clone(), b.beta.eval(x)),
        _ => unreachable!(),
    };
    let prod = bernoulli_product(&y, n, params.q(), &(pn * u * x.clone()), tol)?;
    Ok(dn + coef * y(&delayed)? - beta * prod)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numbers::golden_pair;
    use crate::scalar::Rational;
    use crate::special::deformed_exp;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn p32() -> Params<Rational> {
        golden_pair(r(3, 1), r(-2, 1)).unwrap()
    }

    #[test]
    fn series_linear_exponential() {
        let p = p32();
        let prob = SeriesLinearProblem {
            params: p.clone(),
            spec: PantographSpec::new(r(0, 1), r(1, 1), r(1, 1)),
            alpha: r(1, 1),
            beta: Series::zero(&p, 8),
            y0: r(1, 1),
        };
        let rep = solve_series_linear(&prob, 8).unwrap();
        let c = rep.solution().unwrap().coeffs();
        assert_eq!(&c[..4], &[r(1, 1), r(1, 1), r(1, 3), r(1, 21)]);
        assert!(rep.residual_coeff_max().unwrap().is_zero());
        // Point residuals only see the truncation tail.
        for (_, v) in rep.residual_points() {
            assert!(*v < r(1, 1_000_000));
        }
    }

    #[test]
    fn recurrence_matches_closed_form() {
        let p = p32();
        let prob = SeriesLinearProblem {
            params: p.clone(),
            spec: PantographSpec::new(r(2, 3), r(-1, 2), r(3, 4)),
            alpha: r(5, 7),
            beta: Series::new(&p, vec![r(1, 1), r(-2, 1), r(0, 1), r(1, 5)]),
            y0: r(-3, 2),
        };
        let rec = series_linear_recurrence(&prob, 12).unwrap();
        let closed = series_linear_closed_form(&prob, 12).unwrap();
        assert_eq!(rec, closed);
    }

    #[test]
    fn zero_alpha_gives_unit_factor() {
        let p = p32();
        let spec = PantographSpec::new(r(1, 1), r(1, 2), r(1, 3));
        let f = integrating_factor(&p, &spec, &Series::zero(&p, 6), 6).unwrap();
        assert_eq!(f.e, Series::one(&p, 6));
    }

    #[test]
    fn exp_factor_of_power() {
        // alpha = {n} x^(n-1) integrates to x^n.
        let p = p32();
        let u = r(1, 2);
        let alpha = Series::monomial(&p, r(3, 1), 1, 10);
        let f = integrating_factor(&p, &PantographSpec::deformed_exp(u.clone()), &alpha, 10).unwrap();
        assert_eq!(f.a, Series::monomial(&p, r(1, 1), 2, 10));
        let g = vec![r(1, 1); 11];
        let direct = crate::series::compose_deformed(&g, &u, &f.a.scalar_mul(&u)).unwrap();
        assert_eq!(f.numerator, direct);
    }

    #[test]
    fn series_mode_integration_factor_has_zero_residual() {
        let p = p32();
        let spec = PantographSpec::new(r(1, 1), r(1, 2), r(1, 3));
        let alpha = Series::new(&p, vec![r(1, 1), r(2, 1)]);
        let beta = Series::new(&p, vec![r(1, 1), r(0, 1), r(-1, 1)]);
        for side in [DelaySide::PhiPrime, DelaySide::Phi] {
            let prob = IntegrationFactorProblem::new(&p, spec.clone(), alpha.clone(), beta.clone())
                .with_xi(r(2, 1))
                .with_delay_side(side);
            let rep = solve_integration_factor(&prob, 10).unwrap();
            assert!(rep.residual_coeff_max().unwrap().is_zero(), "{side:?}");
            assert_eq!(rep.solution().unwrap().coeff(0), r(2, 1));
        }
    }

    #[test]
    fn pointwise_mode_matches_series_mode() {
        let p = golden_pair(3.0f64, -2.0).unwrap();
        let spec = PantographSpec::new(0.0, 1.0, 0.5);
        let alpha = Series::new(&p, vec![1.0]);
        let beta = Series::new(&p, vec![1.0, 1.0]);
        let prob = IntegrationFactorProblem::new(&p, spec, alpha, beta).with_xi(0.5);
        let series = solve_integration_factor(&prob, 48).unwrap();
        let y = series.solution().unwrap();
        for &x in &[0.2, 0.4] {
            let v = integration_factor_at(&prob, &x, 48, &1e-16).unwrap();
            assert!((v - y.eval(&x)).abs() < 1e-12, "{x}: {v} vs {}", y.eval(&x));
        }
    }

    #[test]
    fn pointwise_mode_with_periodic_initial() {
        let p = golden_pair(3.0f64, -2.0).unwrap();
        let spec = PantographSpec::new(0.0, 1.0, 0.5);
        let alpha = Series::new(&p, vec![1.0]);
        let beta = Series::new(&p, vec![0.0, 1.0]);
        let g = QPeriodic::callable(|t| 1.0 + 0.25 * libm::sin(2.0 * core::f64::consts::PI * t));
        let prob = IntegrationFactorProblem::new(&p, spec, alpha, beta)
            .with_initial(0.3, Initial::Periodic(g.clone()));
        let rep = solve_integration_factor(&prob, 24).unwrap();
        assert!(rep.solution().is_none());
        for (_, v) in rep.residual_points() {
            assert!(*v < 1e-9, "{v}");
        }
        let y_eta = integration_factor_at(&prob, &0.3, 24, &1e-16).unwrap();
        assert!((y_eta - g.evaluate(&0.3, p.q())).abs() < 1e-12);
        let bad = IntegrationFactorProblem::new(&p, PantographSpec::new(0.0, 1.0, 0.5), Series::one(&p, 0), Series::one(&p, 0))
            .with_initial(0.3, Initial::Periodic(QPeriodic::callable(|t| t)));
        assert!(matches!(
            solve_integration_factor(&bad, 8),
            Err(Error::NonQPeriodicInitial { .. })
        ));
    }

    #[test]
    fn operator_identity_and_errors() {
        let p = p32();
        let spec = PantographSpec::new(r(2, 1), r(-1, 3), r(1, 2));
        let d = operator_identity_defect(&p, &spec, &r(3, 5), &r(1, 7), 16).unwrap();
        assert!(d.max_abs().is_zero());
        let mut prob = OperatorProblem {
            params: p.clone(),
            spec: PantographSpec::new(r(1, 1), r(1, 1), r(1, 2)),
            alpha: r(1, 1),
            beta: r(2, 1),
            gamma: r(1, 3),
            delta: r(1, 1),
            c: r(1, 1),
        };
        // beta = alpha / u: the particular part is exact.
        let rep = solve_operator(&prob, 12).unwrap();
        assert!(rep.residual_coeff_max().unwrap().is_zero());
        prob.gamma = r(2, 1);
        assert_eq!(solve_operator(&prob, 4).unwrap_err(), Error::ResonantParameters);
        prob.spec.u = r(0, 1);
        assert_eq!(solve_operator(&prob, 4).unwrap_err(), Error::ZeroDelay);
    }

    #[test]
    fn residual_detects_perturbation() {
        let p = p32();
        let prob = LinearProblem::SeriesLinear(SeriesLinearProblem {
            params: p.clone(),
            spec: PantographSpec::new(r(1, 1), r(1, 2), r(1, 3)),
            alpha: r(1, 1),
            beta: Series::zero(&p, 10),
            y0: r(1, 1),
        });
        let y = solve(&prob, 10).unwrap().solution().unwrap().clone();
        let mut c = y.coeffs().to_vec();
        c[4] = c[4].clone() + r(1, 1000);
        let bumped = Series::new(&p, c);
        let res = residual(&prob, &bumped, &default_points()).unwrap();
        assert!(res.coeff_max.unwrap() >= r(1, 10_000));
    }

    #[test]
    fn bernoulli_transform_scales() {
        let p = p32();
        let one = Series::one(&p, 6);
        let b = |n: i64| {
            LinearProblem::Bernoulli(BernoulliProblem {
                params: p.clone(),
                spec: PantographSpec::deformed_exp(p.phi().clone()),
                alpha: one.clone(),
                beta: one.clone(),
                n: r(n, 1),
                delay_side: DelaySide::PhiPrime,
                y0: r(1, 1),
            })
        };
        let t = bernoulli_transform(&b(3)).unwrap();
        assert_eq!(t.d_coefficient, r(-1, 3));
        assert_eq!(bernoulli_transform(&b(1)).unwrap_err(), Error::InvalidBernoulliOrder);
        assert_eq!(bernoulli_transform(&b(0)).unwrap_err(), Error::InvalidBernoulliOrder);
        let ub = LinearProblem::UBernoulli(UBernoulliProblem {
            params: p.clone(),
            alpha: r(2, 1),
            beta: one.clone(),
            u: r(1, 3),
            n: r(3, 1),
            delay_side: DelaySide::PhiPrime,
            y0: r(1, 1),
        });
        match bernoulli_transform(&ub).unwrap().problem {
            LinearProblem::SeriesLinear(s) => {
                assert_eq!(s.spec.u, r(1, 3));
                assert_eq!(s.alpha, r(6, 1));
                assert_eq!(s.beta.coeff(0), r(-3, 1));
            }
            other => panic!("{}", other.family()),
        }
    }

    #[test]
    fn reconstruction_edge_cases() {
        let p = golden_pair(3.0f64, -2.0).unwrap();
        let rec = bernoulli_reconstruct(|x: &f64| Ok(1.0 + x), &2.0, &p, &5.0, &1e-14).unwrap();
        assert_eq!(rec.anchor, Anchor::Reciprocal);
        assert!((rec.eval(&0.5).unwrap() - 1.0 / 1.5).abs() < 1e-15);
        let flat = bernoulli_reconstruct(|_: &f64| Ok(2.0), &3.0, &p, &7.0, &1e-14).unwrap();
        assert_eq!(flat.anchor, Anchor::Zero);
        assert_eq!(flat.eval(&0.4).unwrap(), 7.0);
        let zero = bernoulli_reconstruct(|_: &f64| Ok(0.0), &2.0, &p, &1.0, &1e-14).unwrap();
        assert_eq!(zero.eval(&0.4).unwrap_err(), Error::ZeroDenominator);
    }

    #[test]
    fn bernoulli_round_trip_order_three() {
        let p = golden_pair(3.0f64, -2.0).unwrap();
        let prob = LinearProblem::Bernoulli(BernoulliProblem {
            params: p.clone(),
            spec: PantographSpec::deformed_exp(*p.phi()),
            alpha: Series::constant(&p, 0.5, 0),
            beta: Series::new(&p, vec![1.0, 1.0]),
            n: 3.0,
            delay_side: DelaySide::PhiPrime,
            y0: 2.0,
        });
        let t = bernoulli_transform(&prob).unwrap();
        let z = solve(&t.problem, 36).unwrap().solution().unwrap().clone();
        assert_eq!(z.coeff(0), 1.0);
        let rec = bernoulli_reconstruct(|x: &f64| Ok(z.eval(x)), &3.0, &p, &2.0, &1e-15).unwrap();
        assert_eq!(rec.anchor, Anchor::Zero);
        for &x in &[0.1, 0.2, 0.3] {
            let res = bernoulli_residual_at(&prob, |v| rec.eval(v), &x, &1e-15).unwrap();
            assert!(res.abs() < 1e-8, "x = {x}: {res}");
        }
    }

    #[test]
    fn exp_factor_solution_matches_direct_formula() {
        // With u = phi^2 the particular integral is (exp[x^2,u] - 1)/{2}.
        let p = p32();
        let u = r(4, 1);
        let alpha = Series::monomial(&p, r(3, 1), 1, 12);
        let beta = Series::monomial(&p, r(1, 1), 1, 12);
        let prob = IntegrationFactorProblem::deformed_exp(&p, u.clone(), alpha, beta).with_xi(r(1, 2));
        let y = solve_integration_factor(&prob, 12).unwrap().solution().unwrap().clone();
        let g = vec![r(1, 1); 13];
        let e = crate::series::compose_deformed(&g, &u, &Series::monomial(&p, r(1, 1), 2, 12)).unwrap();
        let want = e
            .add_constant(&r(-1, 1))
            .scalar_mul(&r(1, 3))
            .add_constant(&r(1, 2))
            .div(&e)
            .unwrap();
        assert_eq!(y, want);
        let _ = deformed_exp(&p, &u, 2);
    }
}
