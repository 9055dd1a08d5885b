use clap::{Args, Parser, Subcommand};
use delone_fermions::canonical_order::{canonical_order, label_bijection};
use delone_fermions::fock::SectorBasis;
use delone_fermions::hamiltonian::assemble_sector;
use delone_fermions::pattern::{generate, pattern_metric_report, validate_delone, Pattern, PatternKind};
use delone_fermions::sparse::SparseMatrix;
use dfcli::checks::{self, CheckParams, CheckReport};
use dfcli::config::{self, ExperimentConfig, HamSpec};
use dfcli::eigen::{eigensolve_matrix, DEFAULT_CAP};
use dfcli::experiment::run_selfbinding;
use dfcli::Result;
use serde::Serialize;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "dfx", version, about = "Delone patterns, fermion groupoids and Fock-sector Hamiltonians")]
struct Cli {
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 8.0)]
    window: f64,
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    #[command(subcommand)]
    Pattern(PatternCmd),
    #[command(subcommand)]
    Car(SuiteCmd),
    #[command(subcommand)]
    Fock(SuiteCmd),
    #[command(subcommand)]
    Ham(HamCmd),
    #[command(subcommand)]
    Galg(GalgCmd),
    #[command(subcommand)]
    Groupoid(GroupoidCmd),
    #[command(subcommand)]
    Canon(CanonCmd),
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Run one acceptance suite, or `all`.
    Check {
        suite: String,
        #[command(flatten)]
        opts: SuiteOpts,
    },
}

#[derive(Args, Clone, Default)]
struct SuiteOpts {
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum SuiteCmd {
    Check(SuiteOpts),
}

#[derive(Subcommand)]
enum PatternCmd {
    /// Generate a pattern; `.csv` outputs one point per row, anything else JSON.
    Gen {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.3)]
        lambda: f64,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, default_value_t = 3.0)]
        spacing: f64,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Metric {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    Validate {
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum HamCmd {
    /// Assemble the N-particle sector matrix and write it in Matrix Market format.
    Assemble {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long = "N", alias = "n")]
        n: usize,
        #[arg(long)]
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Eigenvalues of a Matrix Market Hermitian matrix as CSV.
    Spectrum {
        matrix: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

#[derive(Subcommand)]
enum GalgCmd {
    Check {
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        arity: usize,
    },
}

#[derive(Subcommand)]
enum GroupoidCmd {
    Verify {
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum CanonCmd {
    Order {
        #[arg(long)]
        pattern: PathBuf,
        /// Comma-separated point indices.
        #[arg(long)]
        subset: String,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    Selfbinding {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        gap_factor: Option<f64>,
        /// Spectrum CSV: index, eigenvalue, island, mean pair distance.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_kind(cli: &PatternCmd) -> Result<PatternKind> {
    let PatternCmd::Gen { kind, dim, lambda, epsilon, theta, spacing, r, count, .. } = cli else { unreachable!() };
    Ok(match kind.as_str() {
        "periodic" => PatternKind::Periodic { dim: *dim },
        "random_displaced" => PatternKind::RandomDisplaced { dim: *dim, lambda: *lambda },
        "perturbed_periodic" => PatternKind::PerturbedPeriodic { dim: *dim, epsilon: *epsilon },
        "triplet_rotation" => PatternKind::TripletRotation { theta: *theta, spacing: *spacing, r: *r, count: *count },
        other => return Err(dfcli::Error::Config(format!("unknown pattern kind `{other}`"))),
    })
}

/// Writes through a temporary sibling so readers never see a partial file.
fn write_atomic(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut w = BufWriter::new(std::fs::File::create(&tmp)?);
        f(&mut w)?;
        w.flush()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

fn emit<T: Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit_reports(reports: &[CheckReport]) -> Result<bool> {
    for r in reports {
        eprintln!("{}", r.line());
    }
    let passed = reports.iter().all(|r| r.passed);
    emit(&serde_json::json!({ "passed": passed, "reports": reports }))?;
    Ok(passed)
}

fn params(cli: &Cli, opts: &SuiteOpts) -> CheckParams {
    CheckParams { seed: cli.seed, sites: opts.sites, samples: opts.samples, tol: cli.tol }
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.cmd {
        Cmd::Pattern(pc) => match pc {
            PatternCmd::Gen { output, .. } => {
                let p = generate(&parse_kind(pc)?, cli.window, cli.seed)?;
                match output {
                    Some(path) if path.extension().is_some_and(|e| e == "csv") => write_atomic(path, |w| Ok(p.write_csv(w)?))?,
                    Some(path) => write_atomic(path, |w| Ok(w.write_all(p.to_json()?.as_bytes())?))?,
                    None => println!("{}", p.to_json()?),
                }
                Ok(true)
            }
            PatternCmd::Metric { a, b, grid } => {
                emit(&pattern_metric_report(&Pattern::load(a)?, &Pattern::load(b)?, *grid)?)?;
                Ok(true)
            }
            PatternCmd::Validate { file } => {
                let rep = validate_delone(&Pattern::load(file)?);
                emit(&rep)?;
                Ok(rep.valid)
            }
        },
        Cmd::Car(SuiteCmd::Check(o)) => emit_reports(&[checks::run_suite("car", &params(cli, o))?]),
        Cmd::Fock(SuiteCmd::Check(o)) => {
            let p = params(cli, o);
            emit_reports(&[checks::run_suite("fock", &p)?, checks::run_suite("frame", &p)?])
        }
        Cmd::Ham(HamCmd::Assemble { pattern, n, spec, output }) => {
            let p = Pattern::load(pattern)?;
            let spec: HamSpec = config::load(spec)?;
            let basis = Arc::new(SectorBasis::new(p.len(), *n)?);
            let op = assemble_sector(&spec.coefficients()?, &p, &basis)?;
            write_atomic(output, |w| Ok(op.matrix.write_matrix_market(w)?))?;
            emit(&serde_json::json!({ "dimension": basis.dim(), "nnz": op.matrix.nnz(), "hermitian": op.hermitian }))?;
            Ok(true)
        }
        Cmd::Ham(HamCmd::Spectrum { matrix, output, cap }) => {
            let m = SparseMatrix::read_matrix_market(BufReader::new(std::fs::File::open(matrix)?))?;
            let s = eigensolve_matrix(&m, true, *cap)?;
            let write = |w: &mut dyn Write| -> Result<()> {
                writeln!(w, "index,eigenvalue")?;
                for (k, e) in s.values.iter().enumerate() {
                    writeln!(w, "{k},{e:.15e}")?;
                }
                Ok(())
            };
            match output {
                Some(path) => write_atomic(path, write)?,
                None => write(&mut std::io::stdout().lock())?,
            }
            eprintln!("dimension {}, max residual {:.3e}", s.values.len(), s.max_residual);
            Ok(true)
        }
        Cmd::Galg(GalgCmd::Check { pattern, arity }) => {
            let p = CheckParams { seed: cli.seed, tol: cli.tol, ..Default::default() };
            let mut reports = vec![checks::run_suite("expectation", &p)?, checks::run_suite("galilean", &p)?];
            if let Some(path) = pattern {
                reports.push(checks::galgebra_on(&Pattern::load(path)?, *arity, cli.seed, cli.tol.max(1e-12))?);
            }
            emit_reports(&reports)
        }
        Cmd::Groupoid(GroupoidCmd::Verify { pattern, arity, samples }) => {
            let report = match pattern {
                Some(path) => checks::groupoid_on(Arc::new(Pattern::load(path)?), *arity, *samples, cli.seed)?,
                None => {
                    let p = generate(&PatternKind::PerturbedPeriodic { dim: 2, epsilon: 0.2 }, cli.window, cli.seed)?;
                    checks::groupoid_on(Arc::new(p), *arity, *samples, cli.seed)?
                }
            };
            emit_reports(&[report])
        }
        Cmd::Canon(CanonCmd::Order { pattern, subset, epsilon }) => {
            let p = Arc::new(Pattern::load(pattern)?);
            let l = label_bijection(p.clone(), *epsilon)?;
            let v: Vec<usize> = subset
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| dfcli::Error::Config(format!("bad index `{s}`: {e}"))))
                .collect::<Result<_>>()?;
            if let Some(&bad) = v.iter().find(|&&i| i >= p.len()) {
                return Err(dfcli::Error::Config(format!("index {bad} out of range")));
            }
            let order = canonical_order(&l, &v);
            let labels: Vec<&[i64]> = order.iter().map(|&i| l.label(i)).collect();
            emit(&serde_json::json!({ "order": order, "labels": labels }))?;
            Ok(true)
        }
        Cmd::Experiment(ExperimentCmd::Selfbinding { config: path, sites, u, t, gap_factor, output }) => {
            let mut cfg: ExperimentConfig = match path {
                Some(p) => config::load(p)?,
                None => ExperimentConfig::default(),
            };
            cfg.sites = sites.unwrap_or(cfg.sites);
            cfg.u = u.unwrap_or(cfg.u);
            cfg.t = t.unwrap_or(cfg.t);
            cfg.gap_factor = gap_factor.unwrap_or(cfg.gap_factor);
            let rep = run_selfbinding(&cfg)?;
            if let Some(out) = output {
                write_atomic(out, |w| rep.write_csv(w))?;
            }
            emit(&serde_json::json!({
                "dimension": rep.dimension,
                "islands": rep.islands,
                "bound_island": rep.bound_island().id,
                "gap": rep.gap(),
                "continuum_pair_distance": rep.continuum_pair_distance(),
                "max_residual": rep.max_residual,
            }))?;
            Ok(true)
        }
        Cmd::Check { suite, opts } => {
            let p = params(cli, opts);
            if suite == "all" {
                emit_reports(&checks::run_all(&p))
            } else {
                emit_reports(&[checks::run_suite(suite, &p)?])
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
