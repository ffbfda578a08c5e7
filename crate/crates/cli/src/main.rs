//! `multisum`: reproducible experiments on multiple summing norms.
//!
//! Exit codes: 0 success, 1 replay mismatch, 2 parameter or parse error,
//! 3 mathematical refusal, 4 I/O failure.

mod record;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use multisum::asymptotics::InclusionCodomain;
use multisum::multilinear::{make_phi, random_dense_operator, random_sign_operator, Codomain, OperatorDocument};
use multisum::{Coefficients, Field, MultilinearOperator};

use record::{AlphaKind, Format, Params, ResultRecord, RunConfig, SearchParams, VERSION};
use run::{execute, load_operator, usage, Usage};

#[derive(Parser)]
#[command(name = "multisum", version, about = "Multiple summing norms via stable-measure integrals")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the output here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Sampling {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 64)]
    blocks: usize,
}

fn exponent(s: &str) -> std::result::Result<f64, String> {
    multisum::serde_exponent::parse(s).ok_or_else(|| format!("`{s}` is not a number or `inf`"))
}

#[derive(Clone, Copy, ValueEnum)]
enum CodomainChoice {
    AsGiven,
    Match,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpKind {
    /// The diagonal `Σ_j x¹_j⋯xᵐ_j e_j` into `ℓ_q^N`.
    Phi,
    /// Gaussian coefficients.
    Random,
    /// Random `±1` coefficients into `ℓ_q^N`.
    Signs,
    /// A linear form with the coefficients given by `--coeffs`.
    Form,
}

#[derive(Subcommand)]
enum Command {
    /// The moment constant c_{s,q} from both the closed form and quadrature.
    CConst {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value = "real")]
        field: Field,
    },
    /// Estimate π_p of an operator, with basis and search lower bounds.
    Pi {
        operator: PathBuf,
        #[arg(long)]
        p: f64,
        /// Domain exponent; defaults to the operator's own.
        #[arg(long, value_parser = exponent)]
        r: Option<f64>,
        /// Sampling field; defaults to the operator's.
        #[arg(long)]
        field: Option<Field>,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        no_search: bool,
        #[arg(long, default_value_t = 4)]
        family_size: usize,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 30)]
        rounds: usize,
    },
    /// Fit the growth exponent of π_1(Φ_N) over a list of dimensions.
    LimitOrder {
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = exponent)]
        r: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
        /// Write the per-dimension table as CSV.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Compare π_p(T_α) with ‖α‖_∞ π_p(T).
    Contraction {
        operator: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, value_parser = exponent)]
        r: Option<f64>,
        #[arg(long, value_enum)]
        alpha: AlphaKind,
        #[arg(long, default_value_t = 0)]
        flip_index: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Track π_{p1}/π_{p2} over random operators of growing dimension.
    Inclusion {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        q: f64,
        #[arg(long, value_parser = exponent)]
        r: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, value_enum, default_value_t = CodomainChoice::AsGiven)]
        codomain: CodomainChoice,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Check π_p(T) against the Gaussian radial bound on an ℓ_2 domain.
    GammaBound {
        operator: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        field: Option<Field>,
        #[arg(long, default_value_t = 32)]
        sup_restarts: usize,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Write an operator document.
    MakeOp {
        #[arg(long, value_enum)]
        kind: OpKind,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        n: Option<usize>,
        /// Codomain exponent; scalar codomain when absent.
        #[arg(long, value_parser = exponent)]
        q: Option<f64>,
        #[arg(long, value_parser = exponent, default_value = "2")]
        r: f64,
        #[arg(long)]
        complex: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Option<Vec<f64>>,
    },
    /// Re-run a stored record and check the outputs match bit for bit.
    Replay { record: PathBuf },
}

fn sampled(cfg: Params, s: &Sampling, cli: &Cli) -> RunConfig {
    RunConfig {
        params: cfg,
        seed: Some(s.seed),
        n_samples: Some(s.samples),
        blocks: Some(s.blocks),
        out: cli.out.clone(),
        format: cli.format,
        threads: cli.threads,
    }
}

fn operator_doc(path: &Path) -> Result<(OperatorDocument, MultilinearOperator)> {
    let doc = load_operator(path)?;
    let op = MultilinearOperator::try_from(doc.clone())?;
    Ok((doc, op))
}

fn config(cli: &Cli) -> Result<RunConfig> {
    Ok(match &cli.command {
        Command::CConst { s, q, field } => RunConfig {
            params: Params::CConst { s: *s, q: *q, field: *field },
            seed: None,
            n_samples: None,
            blocks: None,
            out: cli.out.clone(),
            format: cli.format,
            threads: cli.threads,
        },
        Command::Pi { operator, p, r, field, sampling, no_search, family_size, restarts, rounds } => {
            let (doc, op) = operator_doc(operator)?;
            let search = (!no_search).then_some(SearchParams { family_size: *family_size, restarts: *restarts, rounds: *rounds });
            let params = Params::Pi {
                operator_path: Some(operator.clone()),
                r: r.unwrap_or(op.domain_exponent()),
                field: field.unwrap_or(op.field()),
                operator: doc,
                p: *p,
                search,
            };
            sampled(params, sampling, cli)
        }
        Command::LimitOrder { m, r, q, n_list, sampling, bootstrap, tolerance, table } => sampled(
            Params::LimitOrder {
                m: *m,
                r: *r,
                q: *q,
                n_list: n_list.clone(),
                bootstrap: *bootstrap,
                tolerance: *tolerance,
                table: table.clone(),
            },
            sampling,
            cli,
        ),
        Command::Contraction { operator, p, r, alpha, flip_index, sampling } => {
            let (doc, op) = operator_doc(operator)?;
            let params = Params::Contraction {
                operator_path: Some(operator.clone()),
                r: r.unwrap_or(op.domain_exponent()),
                operator: doc,
                p: *p,
                alpha: *alpha,
                flip_index: *flip_index,
            };
            sampled(params, sampling, cli)
        }
        Command::Inclusion { m, q, r, n_list, p1, p2, codomain, sampling } => sampled(
            Params::Inclusion {
                m: *m,
                q: *q,
                r: *r,
                n_list: n_list.clone(),
                p1: *p1,
                p2: *p2,
                codomain: match codomain {
                    CodomainChoice::AsGiven => InclusionCodomain::AsGiven,
                    CodomainChoice::Match => InclusionCodomain::MatchSummingExponent,
                },
            },
            sampling,
            cli,
        ),
        Command::GammaBound { operator, p, field, sup_restarts, sampling } => {
            let (doc, op) = operator_doc(operator)?;
            let params = Params::GammaBound {
                operator_path: Some(operator.clone()),
                field: field.unwrap_or(op.field()),
                operator: doc,
                p: *p,
                sup_restarts: *sup_restarts,
            };
            sampled(params, sampling, cli)
        }
        Command::MakeOp { .. } | Command::Replay { .. } => unreachable!("handled before building a config"),
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let written = stdout.write_all(text.as_bytes()).and_then(|_| {
        if text.ends_with('\n') {
            Ok(())
        } else {
            stdout.write_all(b"\n")
        }
    });
    match written {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    if let Some(path) = out {
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_config(cfg: RunConfig) -> Result<ResultRecord> {
    let start = Instant::now();
    let threads = cfg.threads;
    let outputs = multisum::exec::with_threads(threads, || execute(&cfg))?;
    Ok(ResultRecord { version: VERSION.to_string(), config: cfg, outputs, duration_seconds: start.elapsed().as_secs_f64() })
}

fn make_op(cmd: &Command) -> Result<MultilinearOperator> {
    let Command::MakeOp { kind, m, n, q, r, complex, seed, coeffs } = cmd else { unreachable!() };
    let need_n = || n.ok_or_else(|| usage("--n is required for this kind"));
    let need_seed = || seed.ok_or_else(|| usage("--seed is required for random operators"));
    let op = match kind {
        OpKind::Phi => make_phi(*m, need_n()?, q.ok_or_else(|| usage("--q is required for phi"))?)?,
        OpKind::Random => {
            let n = need_n()?;
            let codomain = match q {
                Some(q) => Codomain::sequence(*q, n)?,
                None => Codomain::Scalar,
            };
            random_dense_operator(*m, n, *r, codomain, *complex, need_seed()?)?
        }
        OpKind::Signs => {
            random_sign_operator(*m, need_n()?, q.ok_or_else(|| usage("--q is required for signs"))?, need_seed()?)?
        }
        OpKind::Form => {
            let c = coeffs.clone().ok_or_else(|| usage("--coeffs is required for a form"))?;
            if *m != 1 {
                return Err(usage("--coeffs describes a linear form; use --m 1"));
            }
            MultilinearOperator::dense(1, c.len(), *r, Codomain::Scalar, Coefficients::Real(c))?
        }
    };
    Ok(op.with_domain_exponent(*r)?)
}

fn replay(path: &Path, cli: &Cli) -> Result<bool> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let stored = ResultRecord::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut cfg = stored.config.clone();
    cfg.threads = cli.threads.or(cfg.threads);
    cfg.out = cli.out.clone();
    cfg.format = cli.format;
    let fresh = run_config(cfg)?;
    let same = serde_json::to_value(&fresh.outputs)? == serde_json::to_value(&stored.outputs)?;
    emit(&fresh.render(cli.format), cli.out.as_deref())?;
    Ok(same)
}

fn dispatch(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::MakeOp { .. } => {
            emit(&make_op(&cli.command)?.to_json(), cli.out.as_deref())?;
            Ok(0)
        }
        Command::Replay { record } => {
            if replay(record, cli)? {
                Ok(0)
            } else {
                eprintln!("replay mismatch: outputs differ from {}", record.display());
                Ok(1)
            }
        }
        _ => {
            let record = run_config(config(cli)?)?;
            emit(&record.render(cli.format), cli.out.as_deref())?;
            Ok(0)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
        if let Some(e) = cause.downcast_ref::<multisum::Error>() {
            return if e.is_refusal() { 3 } else { 2 };
        }
        if cause.downcast_ref::<Usage>().is_some() || cause.downcast_ref::<serde_json::Error>().is_some() {
            return 2;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
