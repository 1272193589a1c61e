//! Command implementations, generic over the arithmetic backend.

use std::fmt;

use serde_json::{json, Map, Value};
use stcalc::identities::{run_all, Outcome};
use stcalc::jackson::{st_integral, QInterval};
use stcalc::solve::{
    bernoulli_reconstruct, bernoulli_residual_at, bernoulli_transform, default_points, residual, solve,
    solve_integration_factor_at_points,
    BernoulliProblem, CoefficientForm, DelaySide, Initial, IntegrationFactorProblem, LinearProblem,
    OperatorProblem, SeriesLinearProblem, SolutionReport, UBernoulliProblem,
};
use stcalc::special::pantograph_at;
use stcalc::{golden_pair, Float, PantographSpec, Params, Rational, Scalar, Series};

use crate::args::{DelayArg, Family, FormArg, SolveArgs, Special, SpecArgs, StArgs};
use crate::expr::{parse_expression, parse_number, print_expression, ExprError};

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Lib(stcalc::Error),
    /// A recomputed certificate differs from the claimed one.
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use stcalc::ErrorClass;
        match self {
            CliError::Input(_) => 1,
            CliError::Lib(e) => match e.class() {
                ErrorClass::Input => 1,
                ErrorClass::Convergence => 2,
                ErrorClass::Hypothesis => 3,
            },
            CliError::Mismatch(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Mismatch(m) => write!(f, "certificate mismatch: {m}"),
        }
    }
}

impl From<stcalc::Error> for CliError {
    fn from(e: stcalc::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A scalar the CLI can read and print.
pub trait Num: Scalar + fmt::Display {
    const NAME: &'static str;
    fn emit(&self) -> String;
}

impl Num for Rational {
    const NAME: &'static str = "rational";
    fn emit(&self) -> String {
        self.to_string()
    }
}

impl Num for Float {
    const NAME: &'static str = "float";
    fn emit(&self) -> String {
        self.to_decimal_string(Float::default_digits())
    }
}

/// Result of a command: the JSON document and, where it applies, a CSV table.
pub struct Output {
    pub doc: Value,
    pub table: Option<Table>,
    /// Set when the document was produced but the command still fails.
    pub failure: Option<CliError>,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Settings shared by every command.
pub struct Ctx {
    pub order: usize,
    pub tol: Option<String>,
    pub echo: Map<String, Value>,
}

impl Ctx {
    fn tol<S: Num>(&self) -> CliResult<S> {
        match &self.tol {
            Some(t) => Ok(S::from_rational(&parse_number(t)?)),
            None if S::is_exact() => Ok(S::zero()),
            None => Ok(S::ratio(1, 10).powi(Float::default_digits() as i64)),
        }
    }

    fn document<S: Num>(&self, params: &Params<S>, body: Map<String, Value>) -> Value {
        let mut doc = Map::new();
        doc.insert("schema".into(), json!(1));
        doc.insert("input".into(), Value::Object(self.echo.clone()));
        doc.insert("backend".into(), json!(S::NAME));
        doc.insert("params".into(), params_json(params));
        doc.extend(body);
        Value::Object(doc)
    }
}

fn params_json<S: Num>(p: &Params<S>) -> Value {
    json!({
        "s": p.s().emit(),
        "t": p.t().emit(),
        "phi": p.phi().emit(),
        "phi_prime": p.phi_prime().emit(),
        "q": p.q().emit(),
    })
}

pub fn num<S: Num>(text: &str) -> CliResult<S> {
    Ok(S::from_rational(&parse_number(text)?))
}

fn poly<S: Num>(p: &Params<S>, text: &str, order: usize) -> CliResult<Series<S>> {
    let c = parse_expression(text, order)?;
    Ok(Series::new(p, c.iter().map(S::from_rational).collect()))
}

fn point_list<S: Num>(text: &str) -> CliResult<Vec<S>> {
    text.split(',').map(|v| num(v.trim())).collect()
}

pub fn params<S: Num>(st: &StArgs) -> CliResult<Params<S>> {
    Ok(golden_pair(num(&st.s)?, num(&st.t)?)?)
}

fn pairs<S: Num>(v: &[(S, S)]) -> Value {
    Value::Array(v.iter().map(|(x, y)| json!([x.emit(), y.emit()])).collect())
}

fn strings<S: Num>(v: &[S]) -> Value {
    Value::Array(v.iter().map(|x| json!(x.emit())).collect())
}

fn object(entries: Vec<(&str, Value)>) -> Map<String, Value> {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

// ---------------------------------------------------------------------------

pub fn numbers<S: Num>(ctx: &Ctx, st: &StArgs, upto: usize, factorial: bool) -> CliResult<Output> {
    let p = params::<S>(st)?;
    let values = if factorial { p.st_factorials(upto) } else { p.st_numbers(upto) };
    let table = Table {
        header: vec!["n", if factorial { "factorial" } else { "number" }],
        rows: values.iter().enumerate().map(|(n, v)| vec![n.to_string(), v.emit()]).collect(),
    };
    let body = object(vec![("values", strings(&values))]);
    Ok(Output {
        doc: ctx.document(&p, body),
        table: Some(table),
        failure: None,
    })
}

fn special_spec<S: Num>(p: &Params<S>, which: Special, spec: &SpecArgs) -> CliResult<PantographSpec<S>> {
    Ok(match which {
        Special::Exp => PantographSpec::deformed_exp(num(&spec.u)?),
        Special::ExpPhi => PantographSpec::deformed_exp(p.phi().clone()),
        Special::ExpPhiPrime => PantographSpec::deformed_exp(p.phi_prime().clone()),
        Special::Pantograph => PantographSpec::new(num(&spec.a)?, num(&spec.b)?, num(&spec.u)?),
        Special::Theta => PantographSpec::theta(p),
    })
}

pub fn eval<S: Num>(
    ctx: &Ctx,
    st: &StArgs,
    expr: Option<&str>,
    special: Option<Special>,
    spec: &SpecArgs,
    at: &str,
) -> CliResult<Output> {
    let p = params::<S>(st)?;
    let xs = point_list::<S>(at)?;
    let mut values = Vec::with_capacity(xs.len());
    let mut info = Map::new();
    match (expr, special) {
        (Some(e), _) => {
            let f = poly(&p, e, ctx.order)?;
            for x in &xs {
                values.push((x.clone(), f.eval(x)));
            }
        }
        (None, Some(which)) => {
            let sp = special_spec(&p, which, spec)?;
            let tol = ctx.tol::<S>()?;
            for x in &xs {
                values.push((x.clone(), pantograph_at(&p, &sp, x, &tol)?));
            }
            info.insert(
                "spec".into(),
                json!({"a": sp.a.emit(), "b": sp.b.emit(), "u": sp.u.emit()}),
            );
        }
        (None, None) => return Err(CliError::Input("either --expr or --special is required".into())),
    }
    let table = Table {
        header: vec!["x", "value"],
        rows: values.iter().map(|(x, y)| vec![x.emit(), y.emit()]).collect(),
    };
    let mut body = object(vec![("values", pairs(&values))]);
    body.extend(info);
    Ok(Output {
        doc: ctx.document(&p, body),
        table: Some(table),
        failure: None,
    })
}

fn expression_json<S: Num>(s: &Series<S>) -> Value {
    // Only exact coefficients print as a re-readable expression.
    if S::is_exact() {
        let c: Vec<Rational> = s.coeffs().iter().map(|v| v.emit().parse().expect("rational text")).collect();
        json!(print_expression(&c))
    } else {
        Value::Null
    }
}

pub fn derive<S: Num>(ctx: &Ctx, st: &StArgs, expr: &str, at: Option<&str>) -> CliResult<Output> {
    let p = params::<S>(st)?;
    let f = poly(&p, expr, ctx.order)?;
    let df = f.derive();
    let mut body = object(vec![
        ("coeffs", strings(df.coeffs())),
        ("expression", expression_json(&df)),
    ]);
    let mut table = Table {
        header: vec!["k", "coeff"],
        rows: df.coeffs().iter().enumerate().map(|(k, c)| vec![k.to_string(), c.emit()]).collect(),
    };
    if let Some(at) = at {
        let values: Vec<(S, S)> = point_list::<S>(at)?.into_iter().map(|x| (x.clone(), df.eval(&x))).collect();
        table = Table {
            header: vec!["x", "value"],
            rows: values.iter().map(|(x, y)| vec![x.emit(), y.emit()]).collect(),
        };
        body.insert("values".into(), pairs(&values));
    }
    Ok(Output {
        doc: ctx.document(&p, body),
        table: Some(table),
        failure: None,
    })
}

pub fn integrate<S: Num>(ctx: &Ctx, st: &StArgs, expr: &str, from: &str, to: &str) -> CliResult<Output> {
    let p = params::<S>(st)?;
    let f = poly(&p, expr, ctx.order)?;
    let (a, b) = (num::<S>(from)?, num::<S>(to)?);
    let interval = QInterval::new(&p, a.clone(), b.clone())?;
    let (value, method) = if S::is_exact() {
        // Exact on polynomials: the Jackson sum telescopes to F(b) - F(a).
        let big_f = f.antiderive();
        (big_f.eval(&b) - big_f.eval(&a), "antiderivative")
    } else {
        (st_integral(|x| f.eval(x), &interval, &ctx.tol::<S>()?)?, "jackson-sum")
    };
    let body = object(vec![
        ("value", json!(value.emit())),
        ("method", json!(method)),
        ("from", json!(a.emit())),
        ("to", json!(b.emit())),
    ]);
    Ok(Output {
        doc: ctx.document(&p, body),
        table: None,
        failure: None,
    })
}

pub fn identities<S: Num>(ctx: &Ctx, st: &StArgs) -> CliResult<Output> {
    let p = params::<S>(st)?;
    let checks = run_all(&p, ctx.order);
    let list: Vec<Value> = checks
        .iter()
        .map(|c| {
            let outcome = match &c.outcome {
                Outcome::Pass => json!("pass"),
                Outcome::Fail => json!("fail"),
                Outcome::Skipped(e) => json!(format!("skipped: {e}")),
            };
            json!({"name": c.name, "defect": c.defect, "tol": c.tol, "outcome": outcome})
        })
        .collect();
    let passed = checks.iter().filter(|c| c.passed()).count();
    let body = object(vec![
        ("identities", Value::Array(list)),
        ("passed", json!(passed)),
        ("total", json!(checks.len())),
    ]);
    Ok(Output {
        doc: ctx.document(&p, body),
        table: None,
        failure: None,
    })
}

// ---------------------------------------------------------------------------
// Solving

/// True when the problem needs a backend with logarithms or inexact sums.
pub fn solve_needs_float(args: &SolveArgs) -> CliResult<bool> {
    let eta = parse_number(&args.eta)?;
    let n = parse_number(&args.n)?;
    Ok(match args.family {
        Family::IntegrationFactor => !eta.is_zero(),
        Family::Bernoulli | Family::UBernoulli => n.as_integer().is_none(),
        _ => false,
    })
}

fn side(d: DelayArg) -> DelaySide {
    match d {
        DelayArg::PhiPrime => DelaySide::PhiPrime,
        DelayArg::Phi => DelaySide::Phi,
    }
}

pub fn build_problem<S: Num>(args: &SolveArgs, order: usize) -> CliResult<LinearProblem<S>> {
    let p = params::<S>(&args.st)?;
    let spec = PantographSpec::new(num(&args.spec.a)?, num(&args.spec.b)?, num(&args.spec.u)?);
    let y0 = num::<S>(&args.y0)?;
    Ok(match args.family {
        Family::IntegrationFactor => {
            let mut pr = IntegrationFactorProblem::new(&p, spec, poly(&p, &args.alpha, order)?, poly(&p, &args.beta, order)?)
                .with_delay_side(side(args.delay));
            pr.form = match args.form {
                FormArg::General => CoefficientForm::General,
                FormArg::ThetaLiteral => CoefficientForm::ThetaLiteral,
            };
            let eta = num::<S>(&args.eta)?;
            if eta.is_zero() {
                LinearProblem::IntegrationFactor(pr.with_xi(y0))
            } else {
                LinearProblem::IntegrationFactor(pr.with_initial(eta, Initial::Value(y0)))
            }
        }
        Family::SeriesLinear => LinearProblem::SeriesLinear(SeriesLinearProblem {
            params: p.clone(),
            spec,
            alpha: num(&args.alpha)?,
            beta: poly(&p, &args.beta, order)?,
            y0,
        }),
        Family::Operator => LinearProblem::Operator(OperatorProblem {
            params: p.clone(),
            spec,
            alpha: num(&args.alpha)?,
            beta: num(&args.beta)?,
            gamma: num(&args.gamma)?,
            delta: num(&args.delta)?,
            c: num(&args.c)?,
        }),
        Family::Bernoulli => LinearProblem::Bernoulli(BernoulliProblem {
            params: p.clone(),
            spec,
            alpha: poly(&p, &args.alpha, order)?,
            beta: poly(&p, &args.beta, order)?,
            n: num(&args.n)?,
            delay_side: side(args.delay),
            y0,
        }),
        Family::UBernoulli => LinearProblem::UBernoulli(UBernoulliProblem {
            params: p.clone(),
            alpha: num(&args.alpha)?,
            beta: poly(&p, &args.beta, order)?,
            u: spec.u,
            n: num(&args.n)?,
            delay_side: side(args.delay),
            y0,
        }),
    })
}

/// The linear problem whose solution the document carries.
fn linear_part<S: Num>(problem: &LinearProblem<S>) -> CliResult<LinearProblem<S>> {
    Ok(match problem {
        LinearProblem::Bernoulli(_) | LinearProblem::UBernoulli(_) => bernoulli_transform(problem)?.problem,
        other => other.clone(),
    })
}

fn sample_points<S: Num>(args: &SolveArgs) -> CliResult<Vec<S>> {
    match &args.points {
        Some(text) => point_list(text),
        None => Ok(default_points()),
    }
}

/// Solves, passing `--points` to the integration-factor solver, whose pointwise mode samples there.
fn run_solver<S: Num>(problem: &LinearProblem<S>, order: usize, args: &SolveArgs) -> CliResult<SolutionReport<S>> {
    match (problem, &args.points) {
        (LinearProblem::IntegrationFactor(pr), Some(text)) => {
            Ok(solve_integration_factor_at_points(pr, order, &point_list(text)?)?)
        }
        _ => Ok(solve(problem, order)?),
    }
}

/// Reads coefficients back the way `verify` will, so certificates reproduce.
fn reread<S: Num>(p: &Params<S>, coeffs: &[String]) -> CliResult<Series<S>> {
    let c: CliResult<Vec<S>> = coeffs.iter().map(|c| num(c)).collect();
    Ok(Series::new(p, c?))
}

struct Certificate<S> {
    coeff_max: Option<S>,
    points: Vec<(S, S)>,
    /// `(x, y(x), residual)` of the original equation, for Bernoulli problems.
    original: Option<Vec<(S, S, S)>>,
}

fn certificate<S: Num>(
    ctx: &Ctx,
    problem: &LinearProblem<S>,
    linear: &LinearProblem<S>,
    solution: &Series<S>,
    points: &[S],
) -> CliResult<Certificate<S>> {
    let res = residual(linear, solution, points)?;
    let original = match problem {
        LinearProblem::Bernoulli(b) => Some(original_residuals(ctx, problem, &b.n, &b.params, &b.y0, None, solution, points)?),
        LinearProblem::UBernoulli(b) => Some(original_residuals(
            ctx,
            problem,
            &b.n,
            &b.params,
            &b.y0,
            Some(b.u.clone()),
            solution,
            points,
        )?),
        _ => None,
    };
    Ok(Certificate {
        coeff_max: res.coeff_max,
        points: res.points,
        original,
    })
}

#[allow(clippy::too_many_arguments)]
fn original_residuals<S: Num>(
    ctx: &Ctx,
    problem: &LinearProblem<S>,
    n: &S,
    p: &Params<S>,
    y0: &S,
    u: Option<S>,
    z: &Series<S>,
    points: &[S],
) -> CliResult<Vec<(S, S, S)>> {
    let tol = match ctx.tol::<S>()? {
        t if t.is_zero() && !S::is_exact() => S::tolerance(),
        t => t,
    };
    let mut rec = bernoulli_reconstruct(|x: &S| Ok(z.eval(x)), n, p, y0, &tol)?;
    if let Some(u) = u {
        rec = rec.with_inner_scale(u);
    }
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        let y = rec.eval(x)?;
        let r = bernoulli_residual_at(problem, |v| rec.eval(v), x, &tol)?;
        out.push((x.clone(), y, r.abs()));
    }
    Ok(out)
}

fn certificate_json<S: Num>(c: &Certificate<S>) -> Value {
    json!({
        "coeff_max": c.coeff_max.as_ref().map(|v| v.emit()),
        "points": pairs(&c.points),
    })
}

pub fn solve_cmd<S: Num>(ctx: &Ctx, args: &SolveArgs) -> CliResult<Output> {
    let problem = build_problem::<S>(args, ctx.order)?;
    let p = problem.params().clone();
    let points = sample_points::<S>(args)?;
    let report = run_solver(&problem, ctx.order, args)?;
    let linear = report.problem().clone();
    let transformed = matches!(problem, LinearProblem::Bernoulli(_) | LinearProblem::UBernoulli(_));

    let (coeffs, cert, samples) = match report.solution() {
        Some(sol) => {
            let text: Vec<String> = sol.coeffs().iter().map(Num::emit).collect();
            let y = reread(&p, &text)?;
            let cert = certificate(ctx, &problem, &linear, &y, &points)?;
            let samples: Vec<(S, S)> = points.iter().map(|x| (x.clone(), y.eval(x))).collect();
            (Some((text, expression_json(&y))), cert, samples)
        }
        None => (
            None,
            Certificate {
                coeff_max: None,
                points: report.residual_points().to_vec(),
                original: None,
            },
            report.samples().to_vec(),
        ),
    };

    let closed = report.closed_form().map(|cf| {
        let params: Map<String, Value> = cf.params.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        json!({"tag": cf.tag, "params": params})
    });
    let diag = report.diagnostics();
    let notes: Map<String, Value> = diag.notes.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
    let (coeff_json, expr_json) = match &coeffs {
        Some((c, e)) => (json!(c), e.clone()),
        None => (Value::Null, Value::Null),
    };
    let mut body = object(vec![
        (
            "solution",
            json!({
                "family": linear.family(),
                "variable": if transformed { "z" } else { "y" },
                "order": report.order(),
                "coeffs": coeff_json,
                "expression": expr_json,
                "closed_form": closed,
                "samples": pairs(&samples),
            }),
        ),
        ("residual", certificate_json(&cert)),
        (
            "diagnostics",
            json!({"converged": diag.converged, "terms": diag.terms, "notes": notes}),
        ),
    ]);
    let rows = match &cert.original {
        Some(orig) => {
            body.insert(
                "original".into(),
                json!({
                    "family": problem.family(),
                    "samples": orig.iter().map(|(x, y, _)| json!([x.emit(), y.emit()])).collect::<Vec<_>>(),
                    "residual_points": orig.iter().map(|(x, _, r)| json!([x.emit(), r.emit()])).collect::<Vec<_>>(),
                }),
            );
            orig.iter().map(|(x, y, r)| vec![x.emit(), y.emit(), r.emit()]).collect()
        }
        None => samples
            .iter()
            .zip(&cert.points)
            .map(|((x, y), (_, r))| vec![x.emit(), y.emit(), r.emit()])
            .collect(),
    };
    Ok(Output {
        doc: ctx.document(&p, body),
        table: Some(Table {
            header: vec!["x", "y", "residual"],
            rows,
        }),
        failure: None,
    })
}

fn str_at<'a>(v: &'a Value, path: &[&str]) -> Option<&'a Value> {
    path.iter().try_fold(v, |acc, k| acc.get(k))
}

pub fn verify_cmd<S: Num>(ctx: &Ctx, args: &SolveArgs, claimed: &Value) -> CliResult<Output> {
    let problem = build_problem::<S>(args, ctx.order)?;
    let p = problem.params().clone();
    let linear = linear_part(&problem)?;
    let points = sample_points::<S>(args)?;
    let cert = match str_at(claimed, &["solution", "coeffs"]) {
        Some(Value::Array(items)) => {
            let text: CliResult<Vec<String>> = items
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| CliError::Input("coefficients must be strings".into()))
                })
                .collect();
            let y = reread(&p, &text?)?;
            certificate(ctx, &problem, &linear, &y, &points)?
        }
        _ => {
            // Pointwise solutions carry no coefficients; solve again.
            let report = run_solver(&problem, ctx.order, args)?;
            Certificate {
                coeff_max: None,
                points: report.residual_points().to_vec(),
                original: None,
            }
        }
    };
    let recomputed = certificate_json(&cert);
    let claimed_res = claimed.get("residual").cloned().unwrap_or(Value::Null);
    let mut matches = recomputed == claimed_res;
    let mut body = object(vec![("residual", recomputed), ("claimed", claimed_res)]);
    if let Some(orig) = &cert.original {
        let points: Vec<Value> = orig.iter().map(|(x, _, r)| json!([x.emit(), r.emit()])).collect();
        let claimed_orig = str_at(claimed, &["original", "residual_points"]).cloned().unwrap_or(Value::Null);
        matches &= Value::Array(points.clone()) == claimed_orig;
        body.insert("original_residual_points".into(), Value::Array(points));
    }
    body.insert("matches".into(), json!(matches));
    let failure = (!matches).then(|| CliError::Mismatch("recomputed residual differs from the document".into()));
    Ok(Output {
        doc: ctx.document(&p, body),
        table: None,
        failure,
    })
}
