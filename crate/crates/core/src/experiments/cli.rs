//! Command-line front end. Exit codes: 0 success, 1 usage or input error,
//! 2 when a run completes but one of its checks fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use super::boundedness::{boundedness_sweep, BoundednessConfig};
use super::convergence::{convergence_run, t4b_floor_run, ConvergenceConfig};
use super::divergence::divergence_run;
use super::lebesgue::{lebesgue_sweep, Sample};
use super::report::{float_value, ExperimentReport};
use crate::dyadic::Number;
use crate::error::{Error, Result};
use crate::group::{Mode, StepFunction};
use crate::index::{self, IndexSequence, SequenceKind};
use crate::martingale::{build, ConstructionSpec, Theorem, WeightFunction};
use crate::norms::{hp_norm, lp_norm, modulus_hp, modulus_lp, weak_lp_norm};
use crate::transform::{dirichlet_direct, dirichlet_formula, fwht, ifwht, CoefficientFile, CoefficientVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Direct,
    Formula,
}

#[derive(Debug, Parser)]
#[command(name = "dyadic-walsh", version, about = "Walsh–Paley partial sums, kernels and norms on the dyadic group")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Resolution N (functions live on 2^N cells).
    #[arg(long, global = true)]
    level: Option<u32>,

    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Binary digits and functionals of an index.
    Index { n: u64 },
    /// Dirichlet kernel D_n.
    Kernel {
        n: u64,
        #[arg(long, value_enum, default_value = "formula")]
        route: Route,
    },
    /// Lebesgue constants with the two-sided variation bound.
    Lebesgue {
        #[arg(long, default_value_t = 4096)]
        max_n: u64,
        /// Number of extra random indices.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 20)]
        max_exponent: u32,
    },
    /// Walsh–Fourier coefficients of a step-function file (or the inverse).
    Fwht {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Norms of a step-function file.
    Norms {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Comma-separated: lp, weak, hp, mod:n (L_p modulus), hmod:n (H_p modulus).
        #[arg(long, default_value = "lp,weak,hp")]
        ops: String,
    },
    /// Realise a counterexample martingale.
    Construct(ConstructionArgs),
    /// Divergence run for a construction.
    Diverge(ConstructionArgs),
    /// Convergence run of a random martingale along a sequence, or the t4b floor run.
    Converge {
        #[arg(long)]
        theorem: Option<Theorem>,
        #[arg(long)]
        seq: Option<SequenceKind>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        decay: f64,
    },
    /// Normalised partial-sum ratios over random atoms or step functions.
    Bounded {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        max_n: Option<u64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Debug, Args)]
struct ConstructionArgs {
    #[arg(long)]
    theorem: Theorem,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value = "one")]
    phi: WeightFunction,
    #[arg(long)]
    seq: Option<SequenceKind>,
    /// Explicit base sequence, comma separated (overrides --seq).
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<u64>>,
    #[arg(long)]
    terms: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    budget: f64,
}

impl ConstructionArgs {
    fn spec(&self, level: u32) -> Result<ConstructionSpec> {
        let p = self.p.unwrap_or(if self.theorem.is_h1() { 1.0 } else { 0.5 });
        let base = match &self.values {
            Some(v) => IndexSequence::explicit(v.clone())?,
            None => {
                let kind = self.seq.unwrap_or(if self.theorem.is_h1() {
                    SequenceKind::AlternatingBits
                } else {
                    SequenceKind::Pow2Plus1
                });
                IndexSequence::family(kind, level)?
            }
        };
        let mut spec = ConstructionSpec::new(self.theorem, p, base, level)
            .with_phi(self.phi.clone())
            .with_budget(self.budget);
        spec.terms = self.terms;
        Ok(spec)
    }
}

enum Output {
    Text(String),
    Report(Box<ExperimentReport>),
}

fn render(report: &ExperimentReport, format: Format) -> Result<String> {
    match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    }
}

fn number_json(x: Number) -> serde_json::Value {
    match x {
        Number::Exact(d) => json!(d),
        Number::Float(v) => float_value(v),
    }
}

fn pretty(v: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn values_csv(header: &str, f: &StepFunction) -> String {
    let mut s = format!("{header}\n");
    for ix in 0..f.len() {
        s.push_str(&format!("{ix},{}\n", f.value(ix)));
    }
    s
}

fn load_with_mode(path: &PathBuf, mode: Option<ModeArg>) -> Result<StepFunction> {
    let f = StepFunction::load(path)?;
    match mode {
        Some(m) => f.to_mode(m.into()),
        None => Ok(f),
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    let fmt = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Index { n } => {
            let e = index::expand(*n)?;
            let text = match fmt(Format::Json) {
                Format::Json => pretty(&json!({
                    "n": e.n,
                    "bits": e.bits,
                    "order": e.order,
                    "low": e.low,
                    "gap": e.gap,
                    "variation": e.variation,
                }))?,
                Format::Csv => format!(
                    "n,order,low,gap,variation\n{},{},{},{},{}\n",
                    e.n, e.order, e.low, e.gap, e.variation
                ),
            };
            Ok(Output::Text(text))
        }
        Command::Kernel { n, route } => {
            let level = cli.level.unwrap_or(index::order((*n).max(1)) + 1);
            let d = match route {
                Route::Direct => dirichlet_direct(*n, level)?,
                Route::Formula => dirichlet_formula(*n, level)?,
            };
            let d = d.to_mode(cli.mode.map(Mode::from).unwrap_or(Mode::Exact))?;
            Ok(Output::Text(match fmt(Format::Json) {
                Format::Json => pretty(&serde_json::to_value(d.to_file())?)?,
                Format::Csv => values_csv("ix,value", &d),
            }))
        }
        Command::Lebesgue { max_n, sample, max_exponent } => {
            let sample = sample.map(|count| Sample {
                count,
                seed: cli.seed.unwrap_or(0),
                max_exponent: *max_exponent,
            });
            Ok(Output::Report(Box::new(lebesgue_sweep(*max_n, sample)?)))
        }
        Command::Fwht { input, inverse } => {
            if *inverse {
                let file: CoefficientFile = serde_json::from_str(&std::fs::read_to_string(input)?)?;
                let f = ifwht(&CoefficientVector::from_file(&file)?)?;
                let f = match cli.mode {
                    Some(m) => f.to_mode(m.into())?,
                    None => f,
                };
                return Ok(Output::Text(match fmt(Format::Json) {
                    Format::Json => pretty(&serde_json::to_value(f.to_file())?)?,
                    Format::Csv => values_csv("ix,value", &f),
                }));
            }
            let c = fwht(&load_with_mode(input, cli.mode)?)?;
            Ok(Output::Text(match fmt(Format::Json) {
                Format::Json => pretty(&serde_json::to_value(c.to_file())?)?,
                Format::Csv => {
                    let mut s = String::from("k,coeff\n");
                    for k in 0..c.len() {
                        s.push_str(&format!("{k},{}\n", c.coeff(k)));
                    }
                    s
                }
            }))
        }
        Command::Norms { input, p, ops } => {
            let f = load_with_mode(input, cli.mode)?;
            let mut report = ExperimentReport::new("norms", &["op", "p", "value"]);
            report.config("input", input.display().to_string()).config("p", p).config("level", f.level());
            for op in ops.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let value = match op.split_once(':') {
                    None => match op {
                        "lp" => lp_norm(&f, *p)?,
                        "weak" => weak_lp_norm(&f, *p)?,
                        "hp" => hp_norm(&f, *p)?,
                        _ => return Err(Error::Parse(format!("unknown norm op {op:?}"))),
                    },
                    Some((kind, n)) => {
                        let n: u32 = n.parse().map_err(|_| Error::Parse(format!("bad rank in {op:?}")))?;
                        match kind {
                            "mod" => modulus_lp(&f, n, *p)?,
                            "hmod" => modulus_hp(&f, n, *p)?,
                            _ => return Err(Error::Parse(format!("unknown norm op {op:?}"))),
                        }
                    }
                };
                report.push_row(vec![json!(op), json!(p), number_json(value.value)]);
            }
            Ok(Output::Report(Box::new(report)))
        }
        Command::Construct(args) => {
            let spec = args.spec(cli.level.unwrap_or(20))?;
            let mut rc = build(&spec)?;
            if let Some(m) = cli.mode {
                rc.f = rc.f.to_mode(m.into())?;
            }
            let check = rc.verify_oracle()?;
            Ok(Output::Text(match fmt(Format::Json) {
                Format::Json => {
                    let mut v = rc.to_json_value();
                    v["oracle"] = serde_json::to_value(&check)?;
                    pretty(&v)?
                }
                Format::Csv => {
                    let mut s = String::from("k,alpha,order,lambda\n");
                    for (k, (&a, l)) in rc.alphas.values.iter().zip(&rc.lambdas).enumerate() {
                        s.push_str(&format!("{},{a},{},{l}\n", k + 1, index::order(a)));
                    }
                    s
                }
            }))
        }
        Command::Diverge(args) => {
            let spec = args.spec(cli.level.unwrap_or(20))?;
            let report = if spec.theorem == Theorem::T4b {
                t4b_floor_run(&spec)?
            } else {
                divergence_run(&spec)?
            };
            Ok(Output::Report(Box::new(report)))
        }
        Command::Converge { theorem, seq, p, decay } => {
            let level = cli.level.unwrap_or(18);
            match theorem {
                Some(Theorem::T4b) => {
                    let base = IndexSequence::family(seq.unwrap_or(SequenceKind::Pow2Plus1), level)?;
                    let spec = ConstructionSpec::new(Theorem::T4b, p.unwrap_or(0.5), base, level);
                    Ok(Output::Report(Box::new(t4b_floor_run(&spec)?)))
                }
                Some(other) => Err(Error::Domain(format!(
                    "converge takes no construction other than t4b, got {other}"
                ))),
                None => {
                    let mut cfg = ConvergenceConfig::new(
                        seq.unwrap_or(SequenceKind::Pow2PlusHalf),
                        level,
                        p.unwrap_or(0.5),
                        cli.seed.unwrap_or(0),
                    )?;
                    cfg.decay = *decay;
                    Ok(Output::Report(Box::new(convergence_run(&cfg)?)))
                }
            }
        }
        Command::Bounded { p, max_n, trials } => {
            let level = cli.level.unwrap_or(10);
            let mut cfg = BoundednessConfig::new(*p, level, *trials, cli.seed.unwrap_or(0));
            if let Some(m) = max_n {
                cfg.max_n = *m;
            }
            Ok(Output::Report(Box::new(boundedness_sweep(&cfg)?)))
        }
    }
}

fn default_format(cmd: &Command) -> Format {
    match cmd {
        Command::Lebesgue { .. } | Command::Diverge(_) | Command::Converge { .. } | Command::Bounded { .. } => {
            Format::Csv
        }
        _ => Format::Json,
    }
}

/// Parse `argv` (including the program name), run, and write to `stdout`
/// unless `--out` is given. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };
    let (text, passed, failed) = match execute(&cli) {
        Ok(Output::Text(t)) => (t, true, Vec::new()),
        Ok(Output::Report(r)) => {
            let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
            let failed: Vec<String> = r.failed_checks().iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
            match render(&r, format) {
                Ok(t) => (t, r.passed(), failed),
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(Error::from),
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    for f in &failed {
        eprintln!("check failed: {f}");
    }
    if passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

/// Entry point used by the binary.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run(argv, &mut std::io::stdout().lock())
}
