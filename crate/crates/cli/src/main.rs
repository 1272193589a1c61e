mod args;
mod commands;
mod expr;

use std::fs;
use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Map, Value};
use stcalc::{golden_pair, Error, Float, Rational};

use args::{BackendArg, Cli, Command, Format, Global, SolveArgs, StArgs};
use commands::{num, CliError, CliResult, Ctx, Output};

const DEFAULT_DIGITS: usize = 30;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Backend {
    Rational,
    Float,
}

fn digits(global: &Global) -> CliResult<usize> {
    if let Some(d) = global.precision {
        return Ok(d);
    }
    match std::env::var("ST_PANTO_PRECISION") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("ST_PANTO_PRECISION is not a digit count: {v}"))),
        Err(_) => Ok(DEFAULT_DIGITS),
    }
}

/// Picks the backend; `auto` prefers exact rationals when the golden pair allows it.
fn choose(requested: BackendArg, st: &StArgs, needs_float: bool) -> CliResult<Backend> {
    match requested {
        BackendArg::Float => Ok(Backend::Float),
        BackendArg::Rational if needs_float => {
            Err(CliError::Input("this computation needs the float backend".into()))
        }
        BackendArg::Rational => Ok(Backend::Rational),
        BackendArg::Auto if needs_float => Ok(Backend::Float),
        BackendArg::Auto => match golden_pair(num::<Rational>(&st.s)?, num::<Rational>(&st.t)?) {
            Ok(_) => Ok(Backend::Rational),
            Err(Error::BackendMismatch(_)) => Ok(Backend::Float),
            Err(e) => Err(e.into()),
        },
    }
}

macro_rules! dispatch {
    ($backend:expr, $f:ident ( $($arg:expr),* )) => {
        match $backend {
            Backend::Rational => commands::$f::<Rational>($($arg),*),
            Backend::Float => commands::$f::<Float>($($arg),*),
        }
    };
}

fn echo(command: &str, backend: Backend, global: &Global, digits: usize, extra: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    if let Value::Object(fields) = extra {
        m.extend(fields);
    }
    m.insert(
        "backend".into(),
        json!(match backend {
            Backend::Rational => "rational",
            Backend::Float => "float",
        }),
    );
    m.insert("precision".into(), json!(digits));
    m.insert("order".into(), json!(global.order));
    m.insert("tol".into(), json!(global.tol));
    m
}

fn st_json(st: &StArgs) -> Value {
    json!({"s": st.s, "t": st.t})
}

fn merge(a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Object(mut x), Value::Object(y)) => {
            x.extend(y);
            Value::Object(x)
        }
        (x, _) => x,
    }
}

fn run(cli: &Cli) -> CliResult<Output> {
    let g = &cli.global;
    let digits = digits(g)?;
    if digits == 0 {
        return Err(CliError::Input("precision must be at least one digit".into()));
    }
    Float::set_default_digits(digits);
    let ctx = |backend: Backend, name: &str, extra: Value| Ctx {
        order: g.order,
        tol: g.tol.clone(),
        echo: echo(name, backend, g, digits, extra),
    };
    match &cli.command {
        Command::Numbers { st, upto, factorial } => {
            let b = choose(g.backend, st, false)?;
            let c = ctx(b, "numbers", merge(st_json(st), json!({"upto": upto, "factorial": factorial})));
            dispatch!(b, numbers(&c, st, *upto, *factorial))
        }
        Command::Eval {
            st,
            expr,
            special,
            spec,
            at,
        } => {
            let b = choose(g.backend, st, special.is_some())?;
            let extra = json!({
                "expr": expr,
                "special": special.map(|s| format!("{s:?}")),
                "a": spec.a, "b": spec.b, "u": spec.u, "at": at,
            });
            let c = ctx(b, "eval", merge(st_json(st), extra));
            dispatch!(b, eval(&c, st, expr.as_deref(), *special, spec, at))
        }
        Command::Derive { st, expr, at } => {
            let b = choose(g.backend, st, false)?;
            let c = ctx(b, "derive", merge(st_json(st), json!({"expr": expr, "at": at})));
            dispatch!(b, derive(&c, st, expr, at.as_deref()))
        }
        Command::Integrate { st, expr, from, to } => {
            let b = choose(g.backend, st, false)?;
            let c = ctx(b, "integrate", merge(st_json(st), json!({"expr": expr, "from": from, "to": to})));
            dispatch!(b, integrate(&c, st, expr, from, to))
        }
        Command::Identities { st } => {
            let b = choose(g.backend, st, false)?;
            let c = ctx(b, "identities", st_json(st));
            dispatch!(b, identities(&c, st))
        }
        Command::Solve(args) => {
            let b = choose(g.backend, &args.st, commands::solve_needs_float(args)?)?;
            let extra = serde_json::to_value(args).map_err(|e| CliError::Input(e.to_string()))?;
            let c = ctx(b, "solve", extra);
            dispatch!(b, solve_cmd(&c, args))
        }
        Command::Verify { input } => verify(input),
    }
}

/// Rebuilds the solve invocation recorded in a document and re-certifies it.
fn verify(path: &std::path::Path) -> CliResult<Output> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(e.to_string()))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
    };
    let doc: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("not JSON: {e}")))?;
    if doc.get("schema") != Some(&json!(1)) {
        return Err(CliError::Input("unsupported document schema".into()));
    }
    let input = doc.get("input").cloned().unwrap_or(Value::Null);
    if input.get("command") != Some(&json!("solve")) {
        return Err(CliError::Input("verify needs a document written by solve".into()));
    }
    let args: SolveArgs =
        serde_json::from_value(input.clone()).map_err(|e| CliError::Input(format!("bad input echo: {e}")))?;
    let field = |k: &str| input.get(k).cloned().unwrap_or(Value::Null);
    let digits = field("precision").as_u64().unwrap_or(DEFAULT_DIGITS as u64) as usize;
    Float::set_default_digits(digits);
    let backend = match field("backend").as_str() {
        Some("rational") => Backend::Rational,
        Some("float") => Backend::Float,
        _ => return Err(CliError::Input("document names no backend".into())),
    };
    let order = field("order")
        .as_u64()
        .ok_or_else(|| CliError::Input("document names no order".into()))? as usize;
    let mut echo = Map::new();
    echo.insert("command".into(), json!("verify"));
    echo.insert("source".into(), json!(path.display().to_string()));
    let ctx = Ctx {
        order,
        tol: field("tol").as_str().map(str::to_string),
        echo,
    };
    dispatch!(backend, verify_cmd(&ctx, &args, &doc))
}

fn write_output(out: &Output, global: &Global) -> CliResult<()> {
    let io_err = |e: io::Error| CliError::Input(format!("cannot write output: {e}"));
    let mut sink: Box<dyn Write> = match &global.out {
        Some(path) => Box::new(fs::File::create(path).map_err(io_err)?),
        None => Box::new(io::stdout().lock()),
    };
    match global.format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&out.doc).map_err(|e| CliError::Input(e.to_string()))?;
            writeln!(sink, "{text}").map_err(io_err)?;
        }
        Format::Csv => {
            let table = out
                .table
                .as_ref()
                .ok_or_else(|| CliError::Input("csv output is only available for point grids".into()))?;
            let mut w = csv::Writer::from_writer(sink);
            let csv_err = |e: csv::Error| CliError::Input(format!("cannot write csv: {e}"));
            w.write_record(&table.header).map_err(csv_err)?;
            for row in &table.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|out| {
        write_output(&out, &cli.global)?;
        match out.failure {
            Some(f) => Err(f),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stcalc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
