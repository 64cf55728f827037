//! Verification campaigns over random ensembles and their reports.
//!
//! Trial `i` draws everything it needs from the stream
//! `SeedSpec::new(master_seed, i)`, and records are assembled in trial
//! order, so a report depends only on the configuration and never on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundsReport, Check, Reference};
use crate::decomposition::{from_isometry, minimize_average_concurrence, SearchConfig};
use crate::error::{Error, Result};
use crate::measures::concurrence_two_qubit;
use crate::random::{haar_pure_with, random_density_with, random_isometry_with, SeedSpec};
use crate::state::{BipartiteSplit, QuantumState, Subsystem};
use crate::tolerance;

/// Environment variable overriding the worker-pool size.
pub const THREADS_ENV: &str = "ENTBOUNDS_THREADS";
/// Allowed undershoot of a searched concurrence below the exact value.
pub const SEARCH_ORACLE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Bounds,
    Chain,
    ProofChain,
    Search,
    Sandwich,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::Bounds,
        Task::Chain,
        Task::ProofChain,
        Task::Search,
        Task::Sandwich,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Task::Bounds => "bounds",
            Task::Chain => "chain",
            Task::ProofChain => "proof-chain",
            Task::Search => "search",
            Task::Sandwich => "sandwich",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown task {s:?}")))
    }
}

/// Rank of the sampled states. `All` cycles through `1..=d` by trial index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankSpec {
    All,
    Fixed(usize),
}

impl RankSpec {
    fn for_trial(&self, trial: usize, d: usize) -> usize {
        match *self {
            RankSpec::All => 1 + trial % d,
            RankSpec::Fixed(r) => r,
        }
    }
}

impl FromStr for RankSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(RankSpec::All);
        }
        s.parse().map(RankSpec::Fixed).map_err(|_| {
            Error::InvalidConfig(format!(
                "rank must be a positive integer or \"all\", got {s:?}"
            ))
        })
    }
}

/// Which reduced state the bounds use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalChoice {
    A,
    B,
    Both,
}

impl MarginalChoice {
    pub fn subsystems(&self) -> &'static [Subsystem] {
        match self {
            MarginalChoice::A => &[Subsystem::A],
            MarginalChoice::B => &[Subsystem::B],
            MarginalChoice::Both => &[Subsystem::A, Subsystem::B],
        }
    }
}

impl FromStr for MarginalChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(MarginalChoice::A),
            "b" | "B" => Ok(MarginalChoice::B),
            "both" => Ok(MarginalChoice::Both),
            _ => Err(Error::InvalidConfig(format!(
                "marginal must be a, b or both, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidConfig(format!(
                "format must be csv or json, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub samples: usize,
    pub split: BipartiteSplit,
    pub rank: RankSpec,
    pub master_seed: u64,
    /// Tolerance for every inequality check.
    pub tol: f64,
    pub tasks: Vec<Task>,
    pub marginal: MarginalChoice,
    /// Random isometry ensembles checked per state by `proof-chain`.
    pub isometries: usize,
    /// Search settings; the seed is replaced per trial.
    pub search: SearchConfig,
    pub output_path: Option<PathBuf>,
    pub format: ReportFormat,
    /// Worker threads; `None` defers to `ENTBOUNDS_THREADS`, then rayon's default.
    pub threads: Option<usize>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            split: BipartiteSplit::QUBITS,
            rank: RankSpec::All,
            master_seed: 0,
            tol: tolerance::INEQUALITY,
            tasks: vec![Task::Bounds, Task::Chain, Task::ProofChain, Task::Sandwich],
            marginal: MarginalChoice::A,
            isometries: 1,
            search: SearchConfig::default(),
            output_path: None,
            format: ReportFormat::Csv,
            threads: None,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let d = self.split.total();
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if let RankSpec::Fixed(r) = self.rank {
            if r == 0 || r > d {
                return Err(Error::InvalidConfig(format!("rank {r} outside 1..={d}")));
            }
        }
        if d > tolerance::DEFAULT_MAX_DIM {
            return Err(Error::InvalidConfig(format!(
                "dimension {d} exceeds {}",
                tolerance::DEFAULT_MAX_DIM
            )));
        }
        if self.tasks.is_empty() {
            return Err(Error::InvalidConfig("at least one task is required".into()));
        }
        if self.isometries == 0 {
            return Err(Error::InvalidConfig("isometries must be at least 1".into()));
        }
        if self.search.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        Ok(())
    }

    fn sorted_tasks(&self) -> Vec<Task> {
        let mut t = self.tasks.clone();
        t.sort();
        t.dedup();
        t
    }

    fn is_two_qubit(&self) -> bool {
        self.split == BipartiteSplit::QUBITS
    }

    /// Metric and check columns, fixed by the task set and marginal choice.
    pub fn columns(&self) -> (Vec<String>, Vec<String>) {
        let mut metrics = Vec::new();
        let mut checks = Vec::new();
        let suffixes: Vec<&str> = self
            .marginal
            .subsystems()
            .iter()
            .map(|s| suffix(*s))
            .collect();
        for task in self.sorted_tasks() {
            match task {
                Task::Bounds => {
                    for s in &suffixes {
                        metrics.extend([format!("lower_sq_{s}"), format!("upper_sq_{s}")]);
                        checks.extend(
                            ["bounds_order", "upper_range", "pure_tightness"]
                                .map(|c| format!("{c}_{s}")),
                        );
                    }
                }
                Task::Chain => {
                    for s in &suffixes {
                        metrics.extend(
                            ["g_marginal", "f_marginal", "f_joint"].map(|c| format!("{c}_{s}")),
                        );
                        checks.push(format!("fidelity_chain_{s}"));
                    }
                }
                Task::ProofChain => {
                    for s in &suffixes {
                        metrics
                            .extend(["proof_a", "proof_b", "proof_c"].map(|c| format!("{c}_{s}")));
                        checks.extend(
                            [
                                "identity_a",
                                "identity_b",
                                "identity_c",
                                "chain_upper",
                                "chain_lower",
                            ]
                            .map(|c| format!("{c}_{s}")),
                        );
                    }
                }
                Task::Search => {
                    metrics.push("c_search".into());
                    if self.is_two_qubit() {
                        metrics.extend(["c_oracle".into(), "oracle_gap".into()]);
                        checks.push("search_above_oracle".into());
                    }
                }
                Task::Sandwich => {
                    metrics.push("c_reference".into());
                    for s in &suffixes {
                        checks.push(format!("sandwich_lower_{s}"));
                        if self.is_two_qubit() {
                            checks.push(format!("sandwich_upper_{s}"));
                        }
                    }
                }
            }
        }
        (metrics, checks)
    }
}

fn suffix(s: Subsystem) -> &'static str {
    match s {
        Subsystem::A => "a",
        Subsystem::B => "b",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub stream: u64,
    pub rank: usize,
    /// FNV-1a hash of the sampled matrix entries.
    pub state_hash: String,
    pub metrics: BTreeMap<String, f64>,
    pub checks: BTreeMap<String, CheckOutcome>,
    pub error: Option<String>,
    pub elapsed_us: u64,
}

impl TrialRecord {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.values().all(|c| c.passed)
    }

    /// Copy with the timing zeroed, for run-to-run comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_us: 0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub pass_count: usize,
    /// Trials with at least one failed check.
    pub fail_count: usize,
    /// Trials that raised an error instead of completing.
    pub error_count: usize,
    /// Pass count per check.
    pub check_pass_counts: BTreeMap<String, usize>,
    /// Minimum slack per check.
    pub min_slack: BTreeMap<String, f64>,
    /// Largest `c_search − c_oracle`, when both were computed.
    pub max_oracle_gap: Option<f64>,
    pub wall_time_s: f64,
}

impl Summary {
    pub fn from_records(records: &[TrialRecord], wall_time_s: f64) -> Self {
        let mut check_pass_counts = BTreeMap::new();
        let mut min_slack: BTreeMap<String, f64> = BTreeMap::new();
        let mut max_oracle_gap: Option<f64> = None;
        let (mut pass_count, mut fail_count, mut error_count) = (0, 0, 0);
        for r in records {
            if r.error.is_some() {
                error_count += 1;
            } else if r.passed() {
                pass_count += 1;
            } else {
                fail_count += 1;
            }
            for (name, c) in &r.checks {
                *check_pass_counts.entry(name.clone()).or_insert(0) += usize::from(c.passed);
                let e = min_slack.entry(name.clone()).or_insert(f64::INFINITY);
                *e = e.min(c.slack);
            }
            if let Some(&gap) = r.metrics.get("oracle_gap") {
                max_oracle_gap = Some(max_oracle_gap.map_or(gap, |g: f64| g.max(gap)));
            }
        }
        Self {
            trials: records.len(),
            pass_count,
            fail_count,
            error_count,
            check_pass_counts,
            min_slack,
            max_oracle_gap,
            wall_time_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub metric_columns: Vec<String>,
    pub check_columns: Vec<String>,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

impl CampaignReport {
    /// 0 when every completed trial passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail_count == 0 {
            0
        } else {
            1
        }
    }
}

/// Worker count: explicit setting, then `ENTBOUNDS_THREADS`, then rayon's default.
pub fn resolve_threads(explicit: Option<usize>) -> Option<usize> {
    explicit.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .filter(|&n| n > 0)
    })
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = resolve_threads(cfg.threads) {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let records: Vec<TrialRecord> = pool.install(|| {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| run_trial(cfg, i))
            .collect()
    });
    let (metric_columns, check_columns) = cfg.columns();
    let summary = Summary::from_records(&records, start.elapsed().as_secs_f64());
    Ok(CampaignReport {
        metric_columns,
        check_columns,
        records,
        summary,
    })
}

/// Runs one trial; failures become an error record.
pub fn run_trial(cfg: &CampaignConfig, trial: usize) -> TrialRecord {
    let start = Instant::now();
    let seed = SeedSpec::new(cfg.master_seed, trial as u64);
    let rank = cfg.rank.for_trial(trial, cfg.split.total());
    let mut record = TrialRecord {
        trial,
        stream: seed.stream_index,
        rank,
        state_hash: String::new(),
        metrics: BTreeMap::new(),
        checks: BTreeMap::new(),
        error: None,
        elapsed_us: 0,
    };
    if let Err(e) = fill_trial(cfg, seed, rank, &mut record) {
        record.metrics.clear();
        record.checks.clear();
        record.error = Some(e.to_string());
    }
    record.elapsed_us = start.elapsed().as_micros() as u64;
    record
}

fn fill_trial(
    cfg: &CampaignConfig,
    seed: SeedSpec,
    rank: usize,
    rec: &mut TrialRecord,
) -> Result<()> {
    let split = cfg.split;
    let d = split.total();
    let mut rng = seed.rng();
    let rho = random_density_with(d, rank, &mut rng)?.with_split(split)?;
    rec.state_hash = state_hash(&rho);

    let tasks = cfg.sorted_tasks();
    let mut push = |rec: &mut TrialRecord, name: String, check: &Check, tol: f64| {
        let passed = check.slack >= -tol;
        rec.checks.insert(
            name,
            CheckOutcome {
                slack: check.slack,
                passed,
            },
        );
    };
    let inequality_tol = |c: &Check| match c.kind {
        bounds::CheckKind::Inequality => cfg.tol,
        bounds::CheckKind::Identity => c.tolerance,
    };

    if tasks.contains(&Task::Bounds) {
        for &keep in cfg.marginal.subsystems() {
            let s = suffix(keep);
            let report = bounds::bounds_report(&rho, split, keep)?;
            rec.metrics.insert(format!("lower_sq_{s}"), report.lower_sq);
            rec.metrics.insert(format!("upper_sq_{s}"), report.upper_sq);
            record_checks(rec, &report, s, &mut push, &inequality_tol);
        }
    }

    if tasks.contains(&Task::Chain) {
        let psi_i = haar_pure_with(d, &mut rng);
        let psi_j = haar_pure_with(d, &mut rng);
        for &keep in cfg.marginal.subsystems() {
            let s = suffix(keep);
            let chain = bounds::chain_check_on(&psi_i, &psi_j, split, keep)?;
            rec.metrics
                .insert(format!("g_marginal_{s}"), chain.g_marginal);
            rec.metrics
                .insert(format!("f_marginal_{s}"), chain.f_marginal);
            rec.metrics.insert(format!("f_joint_{s}"), chain.f_joint);
            push(
                rec,
                format!("fidelity_chain_{s}"),
                &Check::inequality("fidelity_chain", chain.min_slack()),
                cfg.tol,
            );
        }
    }

    if tasks.contains(&Task::ProofChain) {
        let isometries = (0..cfg.isometries)
            .map(|_| random_isometry_with(rank * rank, rank, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        for &keep in cfg.marginal.subsystems() {
            let s = suffix(keep);
            let mut worst: BTreeMap<String, Check> = BTreeMap::new();
            for v in &isometries {
                let dec = from_isometry(&rho, v)?;
                let report = bounds::proof_chain_check_on(&dec, split, keep)?;
                if worst.is_empty() {
                    let t = report.proof_terms.expect("proof terms");
                    rec.metrics.insert(format!("proof_a_{s}"), t.a);
                    rec.metrics.insert(format!("proof_b_{s}"), t.b);
                    rec.metrics.insert(format!("proof_c_{s}"), t.c);
                }
                for c in report.checks {
                    let e = worst.entry(c.name.clone()).or_insert_with(|| c.clone());
                    if c.slack < e.slack {
                        *e = c;
                    }
                }
            }
            for (name, c) in worst {
                let tol = inequality_tol(&c);
                push(rec, format!("{name}_{s}"), &c, tol);
            }
        }
    }

    let oracle = if cfg.is_two_qubit() {
        Some(concurrence_two_qubit(&rho)?)
    } else {
        None
    };

    let mut searched = None;
    if tasks.contains(&Task::Search) || (tasks.contains(&Task::Sandwich) && oracle.is_none()) {
        let search_cfg = SearchConfig {
            seed: seed.derive(SEARCH_LABEL),
            ..cfg.search
        };
        searched = Some(minimize_average_concurrence(&rho, split, &search_cfg)?.concurrence);
    }

    if tasks.contains(&Task::Search) {
        let c = searched.expect("search ran");
        rec.metrics.insert("c_search".into(), c);
        if let Some(o) = oracle {
            rec.metrics.insert("c_oracle".into(), o);
            rec.metrics.insert("oracle_gap".into(), c - o);
            push(
                rec,
                "search_above_oracle".into(),
                &Check::inequality("search_above_oracle", c - o),
                SEARCH_ORACLE_TOL,
            );
        }
    }

    if tasks.contains(&Task::Sandwich) {
        let reference = match oracle {
            Some(o) => Reference::Exact(o),
            None => Reference::UpperEstimate(searched.expect("search ran")),
        };
        rec.metrics.insert("c_reference".into(), reference.value());
        for &keep in cfg.marginal.subsystems() {
            let report = bounds::sandwich_check_on(&rho, split, reference, keep)?;
            record_checks(rec, &report, suffix(keep), &mut push, &inequality_tol);
        }
    }
    Ok(())
}

const SEARCH_LABEL: u64 = 0x5ea7_c4ed;

fn record_checks(
    rec: &mut TrialRecord,
    report: &BoundsReport,
    suffix: &str,
    push: &mut impl FnMut(&mut TrialRecord, String, &Check, f64),
    tol_for: &impl Fn(&Check) -> f64,
) {
    for c in &report.checks {
        push(rec, format!("{}_{suffix}", c.name), c, tol_for(c));
    }
}

/// FNV-1a over the bit patterns of the matrix entries, row-major.
pub fn state_hash(rho: &QuantumState) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let m = rho.matrix();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            for x in [m[(i, j)].re, m[(i, j)].im] {
                for byte in x.to_bits().to_le_bytes() {
                    h ^= u64::from(byte);
                    h = h.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
    }
    format!("{h:016x}")
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes the report as CSV (one row per trial, then `#`-prefixed summary
/// lines) or JSON (`{"records": [...], "summary": {...}}`).
pub fn write_report<W: Write>(
    report: &CampaignReport,
    format: ReportFormat,
    mut out: W,
) -> std::io::Result<()> {
    match format {
        ReportFormat::Json => {
            let body = serde_json::json!({
                "metric_columns": report.metric_columns,
                "check_columns": report.check_columns,
                "records": report.records,
                "summary": report.summary,
            });
            serde_json::to_writer_pretty(&mut out, &body)?;
            writeln!(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header: Vec<String> = [
                "trial",
                "stream",
                "rank",
                "state_hash",
                "error",
                "elapsed_us",
            ]
            .map(String::from)
            .to_vec();
            header.extend(report.metric_columns.iter().cloned());
            for c in &report.check_columns {
                header.push(format!("{c}_slack"));
                header.push(format!("{c}_pass"));
            }
            w.write_record(&header)?;
            for r in &report.records {
                let mut row = vec![
                    r.trial.to_string(),
                    r.stream.to_string(),
                    r.rank.to_string(),
                    r.state_hash.clone(),
                    r.error.clone().unwrap_or_default(),
                    r.elapsed_us.to_string(),
                ];
                row.extend(
                    report
                        .metric_columns
                        .iter()
                        .map(|c| r.metrics.get(c).map(|&x| fmt_f64(x)).unwrap_or_default()),
                );
                for c in &report.check_columns {
                    match r.checks.get(c) {
                        Some(o) => {
                            row.push(fmt_f64(o.slack));
                            row.push(o.passed.to_string());
                        }
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                w.write_record(&row)?;
            }
            let bytes = w.into_inner().map_err(|e| e.into_error())?;
            out.write_all(&bytes)?;
            let s = &report.summary;
            writeln!(out, "# trials: {}", s.trials)?;
            writeln!(out, "# pass_count: {}", s.pass_count)?;
            writeln!(out, "# fail_count: {}", s.fail_count)?;
            writeln!(out, "# error_count: {}", s.error_count)?;
            for (name, slack) in &s.min_slack {
                let passes = s.check_pass_counts.get(name).copied().unwrap_or(0);
                writeln!(
                    out,
                    "# check {name}: pass {passes}/{} min_slack {}",
                    s.trials,
                    fmt_f64(*slack)
                )?;
            }
            if let Some(g) = s.max_oracle_gap {
                writeln!(out, "# max_oracle_gap: {}", fmt_f64(g))?;
            }
            writeln!(out, "# wall_time_s: {}", fmt_f64(s.wall_time_s))
        }
    }
}

pub fn emit_report(
    report: &CampaignReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    let mut buf = std::io::BufWriter::new(file);
    write_report(report, format, &mut buf)?;
    buf.flush()
}
