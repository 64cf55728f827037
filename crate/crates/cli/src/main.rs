use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use entbounds::bounds::{
    bounds_report, chain_check_on, sandwich_check_on, BoundsReport, Reference,
};
use entbounds::campaign::{
    emit_report, run_campaign, write_report, CampaignConfig, MarginalChoice, RankSpec,
    ReportFormat, Task,
};
use entbounds::io::{load_pure, load_state, FileError};
use entbounds::measures::aligned_purifications;
use entbounds::{
    concurrence_pure, concurrence_two_qubit, fidelity, minimize_average_concurrence, overlap,
    super_fidelity, BipartiteSplit, PureState, QuantumState, SearchConfig, SeedSpec,
};

#[derive(Parser)]
#[command(
    name = "entbounds",
    version,
    about = "Concurrence bounds and fidelity checks for bipartite states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo verification campaign over random states.
    Verify(VerifyArgs),
    /// Lower and upper bounds on the squared concurrence of a state file.
    Bounds {
        file: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Concurrence of a state file: closed form for two qubits, search otherwise.
    Concurrence {
        file: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Master seed for the search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Fidelity and super-fidelity of two states.
    Fidelity {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Fidelity chain for two pure bipartite states and their marginals.
    Chain {
        file1: PathBuf,
        file2: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct SplitArgs {
    /// Dimension of subsystem A; overrides the file.
    #[arg(long, requires = "dim_b")]
    dim_a: Option<usize>,
    /// Dimension of subsystem B; overrides the file.
    #[arg(long, requires = "dim_a")]
    dim_b: Option<usize>,
}

#[derive(Args)]
struct CommonArgs {
    /// Tolerance for inequality checks.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Reduced state used by the bounds: a, b or both.
    #[arg(long, default_value = "a", value_parser = parse_with::<MarginalChoice>)]
    marginal: MarginalChoice,
}

#[derive(Args)]
struct SearchArgs {
    /// Independent descents per search.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    /// Members per decomposition; defaults to rank squared.
    #[arg(long)]
    ensemble_size: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 2)]
    dim_a: usize,
    #[arg(long, default_value_t = 2)]
    dim_b: usize,
    /// Rank of the sampled states, or "all" to cycle through every rank.
    #[arg(long, default_value = "all", value_parser = parse_with::<RankSpec>)]
    rank: RankSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of bounds, chain, proof-chain, search, sandwich.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "bounds,chain,proof-chain,sandwich",
        value_parser = parse_with::<Task>
    )]
    tasks: Vec<Task>,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_with::<ReportFormat>)]
    format: ReportFormat,
    /// Random isometry ensembles per state for proof-chain.
    #[arg(long, default_value_t = 1)]
    isometries: usize,
    /// Worker threads; falls back to ENTBOUNDS_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_with<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

enum Failure {
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<entbounds::Error> for Failure {
    fn from(e: entbounds::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Validation { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(args) => verify(args),
        Command::Bounds {
            file,
            split,
            common,
        } => bounds(&file, &split, &common),
        Command::Concurrence {
            file,
            split,
            search,
            seed,
            common,
        } => concurrence(&file, &split, &search, seed, &common),
        Command::Fidelity { file1, file2, tol } => fidelity_cmd(&file1, &file2, tol),
        Command::Chain {
            file1,
            file2,
            split,
            common,
        } => chain(&file1, &file2, &split, &common),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn print_json(value: &Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

fn resolve_split(
    args: &SplitArgs,
    from_file: Option<BipartiteSplit>,
    dim: usize,
) -> Result<BipartiteSplit, Failure> {
    let split = match (args.dim_a, args.dim_b, from_file) {
        (Some(a), Some(b), _) => BipartiteSplit::new(a, b)?,
        (_, _, Some(s)) => s,
        _ => {
            return Err(Failure::Usage(
                "state has no bipartite dims; pass --dim-a and --dim-b".into(),
            ))
        }
    };
    if split.total() != dim {
        return Err(Failure::Usage(format!(
            "split {split} does not match state dimension {dim}"
        )));
    }
    Ok(split)
}

fn verify(args: VerifyArgs) -> Outcome {
    let cfg = CampaignConfig {
        samples: args.samples,
        split: BipartiteSplit::new(args.dim_a, args.dim_b)?,
        rank: args.rank,
        master_seed: args.seed,
        tol: args.common.tol,
        tasks: args.tasks,
        marginal: args.common.marginal,
        isometries: args.isometries,
        search: SearchConfig {
            ensemble_size: args.search.ensemble_size,
            restarts: args.search.restarts,
            ..SearchConfig::default()
        },
        output_path: args.out.clone(),
        format: args.format,
        threads: args.threads,
    };
    let report = run_campaign(&cfg)?;
    match &args.out {
        Some(path) => emit_report(&report, args.format, path)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
        None => write_report(&report, args.format, io::stdout().lock())?,
    }
    let s = &report.summary;
    eprintln!(
        "{} trials: {} passed, {} failed, {} errors in {:.2}s",
        s.trials, s.pass_count, s.fail_count, s.error_count, s.wall_time_s
    );
    Ok(report.exit_code() == 0)
}

fn bounds(file: &Path, split: &SplitArgs, common: &CommonArgs) -> Outcome {
    check_tol(common.tol)?;
    let rho = load_state(file)?;
    let sp = resolve_split(split, rho.split(), rho.dim())?;
    let reports = common
        .marginal
        .subsystems()
        .iter()
        .map(|&keep| Ok(bounds_report(&rho, sp, keep)?.with_inequality_tolerance(common.tol)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let passed = reports.iter().all(BoundsReport::passed);
    print_json(&json!({
        "split": [sp.dim_a(), sp.dim_b()],
        "rank": rho.rank()?,
        "purity": entbounds::purity(&rho),
        "reports": reports,
        "passed": passed,
    }))?;
    Ok(passed)
}

fn concurrence(
    file: &Path,
    split: &SplitArgs,
    search: &SearchArgs,
    seed: u64,
    common: &CommonArgs,
) -> Outcome {
    check_tol(common.tol)?;
    let rho = load_state(file)?;
    let sp = resolve_split(split, rho.split(), rho.dim())?;
    let mut extra = json!({});
    let (method, reference) = if sp == BipartiteSplit::QUBITS {
        (
            "closed_form",
            Reference::Exact(concurrence_two_qubit(&rho)?),
        )
    } else if rho.rank()? == 1 {
        let psi = entbounds::eigen_ensemble(&rho)?.states()[0].clone();
        ("pure", Reference::Exact(concurrence_pure(&psi, sp)?))
    } else {
        let cfg = SearchConfig {
            ensemble_size: search.ensemble_size,
            restarts: search.restarts,
            seed: SeedSpec::new(seed, 0),
            ..SearchConfig::default()
        };
        let result = minimize_average_concurrence(&rho, sp, &cfg)?;
        extra = json!({
            "ensemble_size": result.decomposition.len(),
            "restart": result.restart,
            "sweeps": result.history.len().saturating_sub(1),
        });
        ("search", Reference::UpperEstimate(result.concurrence))
    };
    let reports = common
        .marginal
        .subsystems()
        .iter()
        .map(|&keep| {
            Ok(sandwich_check_on(&rho, sp, reference, keep)?.with_inequality_tolerance(common.tol))
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let passed = reports.iter().all(BoundsReport::passed);
    print_json(&json!({
        "split": [sp.dim_a(), sp.dim_b()],
        "method": method,
        "concurrence": reference.value(),
        "search": if method == "search" { extra } else { Value::Null },
        "reports": reports,
        "passed": passed,
    }))?;
    Ok(passed)
}

fn fidelity_cmd(file1: &Path, file2: &Path, tol: f64) -> Outcome {
    check_tol(tol)?;
    let (r1, r2): (QuantumState, QuantumState) = (load_state(file1)?, load_state(file2)?);
    if r1.dim() != r2.dim() {
        return Err(Failure::Usage(format!(
            "dimensions differ: {} vs {}",
            r1.dim(),
            r2.dim()
        )));
    }
    let f = fidelity(&r1, &r2)?;
    let g = super_fidelity(&r1, &r2)?;
    let (p1, p2) = aligned_purifications(&r1, &r2)?;
    let purified = overlap(&p1, &p2)?;
    let slacks = [1.0 - g, g - f];
    let passed = slacks.iter().all(|&s| s >= -tol);
    print_json(&json!({
        "fidelity": f,
        "super_fidelity": g,
        "purification_overlap": purified,
        "slacks": {"one_minus_g": slacks[0], "g_minus_f": slacks[1]},
        "passed": passed,
    }))?;
    Ok(passed)
}

fn load_bipartite_pure(
    file: &Path,
    split: &SplitArgs,
) -> Result<(PureState, BipartiteSplit), Failure> {
    let (psi, from_file) = load_pure(file)?;
    let sp = resolve_split(split, from_file, psi.dim())?;
    Ok((psi, sp))
}

fn chain(file1: &Path, file2: &Path, split: &SplitArgs, common: &CommonArgs) -> Outcome {
    check_tol(common.tol)?;
    let (psi1, sp1) = load_bipartite_pure(file1, split)?;
    let (psi2, sp2) = load_bipartite_pure(file2, split)?;
    if sp1 != sp2 {
        return Err(Failure::Usage(format!("splits differ: {sp1} vs {sp2}")));
    }
    let mut passed = true;
    let mut links = Vec::new();
    for &keep in common.marginal.subsystems() {
        let r = chain_check_on(&psi1, &psi2, sp1, keep)?;
        passed &= r.holds(common.tol);
        links.push(json!({"marginal": keep, "report": r, "min_slack": r.min_slack()}));
    }
    print_json(&json!({
        "split": [sp1.dim_a(), sp1.dim_b()],
        "chains": links,
        "passed": passed,
    }))?;
    Ok(passed)
}
