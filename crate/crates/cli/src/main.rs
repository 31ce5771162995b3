//! `wittlab`: structure polynomials, Witt vector arithmetic and verification
//! suites from the command line.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use wittlab_core::coeff_ring::{make_instance, parse_elem, CoeffError, CoeffRing, InstanceDescriptor, LocalRing, OAlgebra};
use wittlab_core::drinfeld::DrinfeldMap;
use wittlab_core::greenberg::{GreenbergElem, GreenbergRing};
use wittlab_core::local_ring::{Extension, LocalElem, LocalError, LocalFieldSpec, SpecDescriptor};
use wittlab_core::verify::{self, Suite, VerifyError, VerifyParams, DEFAULT_PRECISION};
use wittlab_core::with_ring;
use wittlab_core::witt::{FamilyCache, FamilyKind, FamilySource, WittError, WittRing, WittVector};

#[derive(Parser, Debug)]
#[command(name = "wittlab", version, about = "Ramified Witt vectors, Drinfeld morphisms and Greenberg algebras")]
struct Cli {
    /// Local ring: a JSON file, inline JSON, or one of `Z2`, `W(F4)`, `Z2[pi]/(pi^2-2)`, `W(F4)[pi]/(pi^2-2)`.
    #[arg(long, global = true)]
    spec: Option<String>,
    /// Extension JSON file (or inline JSON) with `base`, `top` and optional `embedding`.
    #[arg(long, global = true)]
    ext: Option<String>,
    /// Coefficient ring: JSON or a shorthand such as `F4`, `F2[x]/(x^2)`, `F2[x]`.
    #[arg(long, global = true, alias = "A")]
    instance: Option<String>,
    /// Length (for Greenberg algebras the p-typical length m).
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for persisted structure polynomials.
    #[arg(long, global = true, env = "WITTLAB_CACHE")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print a family of structure polynomials.
    Polys {
        #[arg(long)]
        kind: String,
        /// Signed coordinates of the scalar for `--kind scalar`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Option<Vec<i64>>,
    },
    /// Evaluate a Witt vector operation.
    Eval {
        op: EvalOp,
        operands: Vec<String>,
    },
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// The Drinfeld morphism of an extension.
    Drinfeld {
        #[command(subcommand)]
        action: DrinfeldAction,
    },
    /// The truncated Greenberg algebra and its comparison map.
    Greenberg {
        #[command(subcommand)]
        action: GreenbergAction,
    },
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    suite: String,
    /// Ramification degree for the default totally ramified extension.
    #[arg(long)]
    e: Option<usize>,
    #[arg(long)]
    s_max: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum DrinfeldAction {
    Polys {
        /// The extension `u^ra` to the tensor product instead of `u`.
        #[arg(long)]
        ra: bool,
    },
    /// `u` of one vector, or `u^ra` of one vector per tensor component.
    Eval {
        #[arg(long)]
        ra: bool,
        operands: Vec<String>,
    },
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum GreenbergAction {
    /// Operands are `;`-separated component vectors, e.g. `(0,1);(0,0)`.
    Eval { op: GreenbergOp, operands: Vec<String> },
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EvalOp {
    Add,
    Sub,
    Mul,
    Neg,
    Scalar,
    Ghost,
    Frobenius,
    Verschiebung,
    Teichmuller,
    FromScalar,
    PiSeries,
    Digits,
    Glue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GreenbergOp {
    Add,
    Mul,
    R,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Witt(#[from] WittError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        let solver = match self {
            CliError::Witt(e) => e.is_solver_failure(),
            CliError::Verify(e) => e.is_solver_failure(),
            _ => false,
        };
        if solver {
            3
        } else {
            2
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    if let Some(dir) = &cli.cache_dir {
        FamilyCache::install_global(FamilyCache::with_dir(dir));
    }
    match &cli.command {
        Command::Polys { kind, lambda } => {
            let kind = parse_kind(kind, lambda.clone())?;
            let source = if matches!(kind, FamilyKind::DrinfeldU | FamilyKind::DrinfeldURa | FamilyKind::UniformizerChange) {
                FamilySource::Extension(load_ext(cli)?)
            } else {
                FamilySource::Local(load_spec(cli)?)
            };
            print_family(cli, &kind, &source)
        }
        Command::Eval { op, operands } => eval_witt(cli, *op, operands),
        Command::Verify(args) => run_suite(cli, args),
        Command::Drinfeld { action } => match action {
            DrinfeldAction::Polys { ra } => {
                let kind = if *ra { FamilyKind::DrinfeldURa } else { FamilyKind::DrinfeldU };
                print_family(cli, &kind, &FamilySource::Extension(load_ext(cli)?))
            }
            DrinfeldAction::Eval { ra, operands } => eval_drinfeld(cli, *ra, operands),
            DrinfeldAction::Verify(args) => run_suite(cli, args),
        },
        Command::Greenberg { action } => match action {
            GreenbergAction::Eval { op, operands } => eval_greenberg(cli, *op, operands),
            GreenbergAction::Verify(args) => run_suite(cli, args),
        },
    }
}

fn read_arg(text: &str) -> Result<String, CliError> {
    let t = text.trim();
    if t.starts_with('{') {
        return Ok(t.to_string());
    }
    std::fs::read_to_string(t).map_err(|e| CliError::Input(format!("cannot read {t}: {e}")))
}

/// `Zp`, `W(Fq)`, and either followed by `[pi]/(pi^e-p)`.
fn spec_shorthand(text: &str) -> Option<SpecDescriptor> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (head, tail) = match t.find("[pi]") {
        Some(i) => (&t[..i], Some(&t[i + 4..])),
        None => (t.as_str(), None),
    };
    let (p, h) = if let Some(p) = head.strip_prefix('Z') {
        (p.parse::<u64>().ok()?, 1)
    } else {
        let q: u64 = head.strip_prefix("W(F")?.strip_suffix(')')?.parse().ok()?;
        let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
        let mut h = 0;
        let mut r = q;
        while r.is_multiple_of(p) {
            r /= p;
            h += 1;
        }
        if r != 1 {
            return None;
        }
        (p, h)
    };
    match tail {
        None => SpecDescriptor::unramified(p, h, DEFAULT_PRECISION).ok(),
        Some(rel) => {
            let body = rel.strip_prefix("/(pi^")?.strip_suffix(')')?;
            let (e, rhs) = body.split_once('-')?;
            if rhs.parse::<u64>().ok()? != p {
                return None;
            }
            SpecDescriptor::pure_root(p, h, e.parse().ok()?, DEFAULT_PRECISION).ok()
        }
    }
}

fn parse_spec(text: &str) -> Result<Arc<LocalFieldSpec>, CliError> {
    if let Some(desc) = spec_shorthand(text) {
        return Ok(LocalFieldSpec::new(desc)?);
    }
    Ok(LocalFieldSpec::from_json(&read_arg(text)?)?)
}

fn load_spec(cli: &Cli) -> Result<Arc<LocalFieldSpec>, CliError> {
    match &cli.spec {
        Some(s) => parse_spec(s),
        None => Ok(LocalFieldSpec::zp(2, DEFAULT_PRECISION)?),
    }
}

fn load_ext(cli: &Cli) -> Result<Arc<Extension>, CliError> {
    let text = cli.ext.as_ref().ok_or_else(|| CliError::Input("this command needs --ext".into()))?;
    Ok(Extension::from_json(&read_arg(text)?)?)
}

fn parse_instance(text: &str) -> Result<InstanceDescriptor, CliError> {
    Ok(text.parse::<InstanceDescriptor>()?)
}

fn parse_kind(name: &str, lambda: Option<Vec<i64>>) -> Result<FamilyKind, CliError> {
    Ok(match name {
        "sum" => FamilyKind::Sum,
        "prod" => FamilyKind::Prod,
        "neg" => FamilyKind::Neg,
        "frobenius" => FamilyKind::Frobenius,
        "scalar" => FamilyKind::Scalar {
            lambda: lambda.ok_or_else(|| CliError::Input("--kind scalar needs --lambda".into()))?,
        },
        "drinfeld_u" => FamilyKind::DrinfeldU,
        "drinfeld_u_ra" => FamilyKind::DrinfeldURa,
        "uniformizer_change" => FamilyKind::UniformizerChange,
        other => return Err(CliError::Input(format!("unknown family kind `{other}`"))),
    })
}

fn print_family(cli: &Cli, kind: &FamilyKind, source: &FamilySource) -> Result<u8, CliError> {
    let n = cli.n.unwrap_or(2);
    let fam = FamilyCache::global().get(kind, source, n).map_err(WittError::from)?;
    match cli.format {
        Format::Json => println!("{}", fam.to_json()),
        Format::Text => print!("{fam}"),
    }
    Ok(0)
}

fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_vector<R: CoeffRing>(ring: &R, text: &str) -> Result<WittVector<R::Elem>, CliError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| CliError::Input(format!("expected a vector like (a, b), got `{t}`")))?;
    let coords = split_top_level(inner, ',')
        .into_iter()
        .map(|c| parse_elem(ring, c.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(WittVector::new(coords))
}

fn parse_scalar(spec: &Arc<LocalFieldSpec>, text: &str) -> Result<LocalElem, CliError> {
    let local = LocalRing::new(spec, spec.max_precision());
    Ok(local.to_local(&parse_elem(&local, text)?))
}

fn operands<const K: usize>(ops: &[String], what: &str) -> Result<[String; K], CliError> {
    ops.to_vec()
        .try_into()
        .map_err(|_| CliError::Input(format!("{what} takes {K} operand(s), got {}", ops.len())))
}

fn emit(cli: &Cli, op: &str, text: String, value: Value) -> Result<u8, CliError> {
    match cli.format {
        Format::Json => println!("{}", json!({ "op": op, "result": value })),
        Format::Text => println!("{text}"),
    }
    Ok(0)
}

fn vector_json<R: CoeffRing>(ring: &R, v: &WittVector<R::Elem>) -> Value {
    Value::Array(v.coords.iter().map(|c| Value::String(ring.format(c))).collect())
}

fn eval_witt(cli: &Cli, op: EvalOp, ops: &[String]) -> Result<u8, CliError> {
    let spec = load_spec(cli)?;
    let desc = match &cli.instance {
        Some(t) => parse_instance(t)?,
        None => InstanceDescriptor::FiniteField {
            p: spec.p(),
            d: spec.h(),
            modulus: None,
        },
    };
    let ring = make_instance(&desc, Some(&spec))?;
    with_ring!(ring, r => eval_in(cli, &spec, r, op, ops))
}

fn eval_in<R: CoeffRing>(cli: &Cli, spec: &Arc<LocalFieldSpec>, ring: R, op: EvalOp, ops: &[String]) -> Result<u8, CliError> {
    let w = WittRing::new(OAlgebra::natural(ring, spec)?);
    let r = w.ring().clone();
    let vec_of = |s: &str| parse_vector(&r, s);
    let name = format!("{op:?}").to_lowercase();
    let out = match op {
        EvalOp::Add | EvalOp::Sub | EvalOp::Mul => {
            let [a, b] = operands::<2>(ops, &name)?;
            let (x, y) = (vec_of(&a)?, vec_of(&b)?);
            match op {
                EvalOp::Add => w.add(&x, &y)?,
                EvalOp::Sub => w.sub(&x, &y)?,
                _ => w.mul(&x, &y)?,
            }
        }
        EvalOp::Neg | EvalOp::Frobenius | EvalOp::Verschiebung | EvalOp::Digits | EvalOp::Ghost => {
            let [a] = operands::<1>(ops, &name)?;
            let x = vec_of(&a)?;
            match op {
                EvalOp::Neg => w.neg(&x)?,
                EvalOp::Frobenius => w.frobenius(&x)?,
                EvalOp::Verschiebung => w.verschiebung(&x),
                EvalOp::Digits => WittVector::new(w.pi_series_inverse(&x)?),
                _ => WittVector::new(w.ghost(&x)?),
            }
        }
        EvalOp::Scalar => {
            let [l, a] = operands::<2>(ops, &name)?;
            w.scalar(&parse_scalar(spec, &l)?, &vec_of(&a)?)?
        }
        EvalOp::Teichmuller => {
            let [b] = operands::<1>(ops, &name)?;
            w.teichmuller(parse_elem(&r, &b)?, cli.n.unwrap_or(1))
        }
        EvalOp::FromScalar => {
            let [l] = operands::<1>(ops, &name)?;
            w.from_scalar(&parse_scalar(spec, &l)?, cli.n.unwrap_or(1))?
        }
        EvalOp::PiSeries => {
            let digits = ops.iter().map(|d| parse_elem(&r, d)).collect::<Result<Vec<_>, _>>()?;
            w.pi_series(&digits)?
        }
        EvalOp::Glue => {
            let parts = ops.iter().map(|s| vec_of(s)).collect::<Result<Vec<_>, _>>()?;
            w.glue(&parts)?
        }
    };
    emit(cli, &name, w.format(&out), vector_json(&r, &out))
}

fn eval_drinfeld(cli: &Cli, ra: bool, ops: &[String]) -> Result<u8, CliError> {
    let ext = load_ext(cli)?;
    let desc = match &cli.instance {
        Some(t) => parse_instance(t)?,
        None => InstanceDescriptor::FiniteField {
            p: ext.top().p(),
            d: ext.top().h(),
            modulus: None,
        },
    };
    let ring = make_instance(&desc, Some(ext.top()))?;
    with_ring!(ring, r => eval_drinfeld_in(cli, &ext, r, ra, ops))
}

fn eval_drinfeld_in<R: CoeffRing>(cli: &Cli, ext: &Arc<Extension>, ring: R, ra: bool, ops: &[String]) -> Result<u8, CliError> {
    let dm = DrinfeldMap::new(ext, OAlgebra::natural(ring, ext.top())?)?;
    let r = dm.top().ring().clone();
    let cap = cli.n.unwrap_or(usize::MAX);
    let out = if ra {
        let parts = ops.iter().map(|s| parse_vector(&r, s)).collect::<Result<Vec<_>, _>>()?;
        dm.u_ra_upto(&parts, cap)?
    } else {
        let [a] = operands::<1>(ops, "u")?;
        dm.u_upto(&parse_vector(&r, &a)?, cap)?
    };
    let name = if ra { "u_ra" } else { "u" };
    emit(cli, name, dm.top().format(&out), vector_json(&r, &out))
}

fn parse_greenberg<R: CoeffRing>(g: &GreenbergRing<R>, text: &str) -> Result<GreenbergElem<R::Elem>, CliError> {
    let parts = split_top_level(text.trim(), ';')
        .into_iter()
        .map(|s| parse_vector(g.ring(), s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(g.element(parts)?)
}

fn eval_greenberg(cli: &Cli, op: GreenbergOp, ops: &[String]) -> Result<u8, CliError> {
    let spec = load_spec(cli)?;
    let desc = match &cli.instance {
        Some(t) => parse_instance(t)?,
        None => InstanceDescriptor::FiniteField {
            p: spec.p(),
            d: spec.h(),
            modulus: None,
        },
    };
    let ring = make_instance(&desc, Some(&spec))?;
    with_ring!(ring, r => eval_greenberg_in(cli, &spec, r, op, ops))
}

fn eval_greenberg_in<R: CoeffRing>(cli: &Cli, spec: &Arc<LocalFieldSpec>, ring: R, op: GreenbergOp, ops: &[String]) -> Result<u8, CliError> {
    let g = GreenbergRing::new(spec, ring)?;
    let r = g.ring().clone();
    let components = |x: &GreenbergElem<R::Elem>| Value::Array(x.parts.iter().map(|v| vector_json(&r, v)).collect());
    match op {
        GreenbergOp::Add | GreenbergOp::Mul => {
            let [a, b] = operands::<2>(ops, "greenberg arithmetic")?;
            let (x, y) = (parse_greenberg(&g, &a)?, parse_greenberg(&g, &b)?);
            let z = if op == GreenbergOp::Add { g.add(&x, &y)? } else { g.mul(&x, &y)? };
            let name = if op == GreenbergOp::Add { "add" } else { "mul" };
            emit(cli, name, g.format(&z), components(&z))
        }
        GreenbergOp::R => {
            let [a] = operands::<1>(ops, "r")?;
            let x = parse_greenberg(&g, &a)?;
            let n = cli.n.unwrap_or(x.len() * g.e());
            let y = g.r_eval(&x, n)?;
            emit(cli, "r", g.target().format(&y), vector_json(&r, &y))
        }
    }
}

fn run_suite(cli: &Cli, args: &VerifyArgs) -> Result<u8, CliError> {
    let suite: Suite = args.suite.parse()?;
    let params = VerifyParams {
        spec: cli.spec.as_deref().map(parse_spec).transpose()?,
        ext: cli.ext.as_ref().map(|_| load_ext(cli)).transpose()?,
        instance: cli.instance.as_deref().map(parse_instance).transpose()?,
        n: cli.n,
        e: args.e,
        s_max: args.s_max,
        samples: args.samples,
        seed: cli.seed,
    };
    let report = verify::run(suite, &params)?;
    match cli.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize")),
        Format::Text => print!("{}", report.to_text()),
    }
    Ok(if report.passed { 0 } else { 1 })
}
