//! Acceptance suite. Runs every criterion at its stated tolerance, prints
//! one PASS/FAIL line per criterion, and exits non-zero if any fails.
//!
//! Run with `cargo test -p entbounds --test acceptance`. Pass criterion
//! numbers as arguments to run a subset, e.g. `-- 1 6`.

use std::process::ExitCode;
use std::time::Instant;

use entbounds::bounds::{chain_check, proof_chain_check};
use entbounds::campaign::{run_campaign, CampaignConfig, MarginalChoice, RankSpec, Task};
use entbounds::linalg::CMatrix;
use entbounds::random::random_isometry;
use entbounds::*;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn split(a: usize, b: usize) -> BipartiteSplit {
    BipartiteSplit::new(a, b).unwrap()
}

fn werner(p: f64) -> QuantumState {
    let s = 0.5f64.sqrt();
    let z = Complex64::new(0.0, 0.0);
    let singlet =
        PureState::from_slice(&[z, Complex64::new(s, 0.0), Complex64::new(-s, 0.0), z]).unwrap();
    let m = density_from_pure(&singlet).matrix().scale(p)
        + CMatrix::identity(4, 4).scale((1.0 - p) / 4.0);
    QuantumState::new(m).unwrap()
}

/// 1. Pure states: lower = upper = C² within 1e-9 at 2x2, 2x3, 3x3.
fn pure_state_tightness() -> Outcome {
    let mut worst: f64 = 0.0;
    for (k, sp) in [split(2, 2), split(2, 3), split(3, 3)]
        .into_iter()
        .enumerate()
    {
        for i in 0..10_000u64 {
            let psi = haar_pure(sp.total(), SeedSpec::new(100 + k as u64, i));
            let rho = density_from_pure(&psi);
            let c2 = concurrence_pure(&psi, sp)
                .map_err(|e| e.to_string())?
                .powi(2);
            let lo = lower_bound(&rho, sp).map_err(|e| e.to_string())?;
            let hi = upper_bound(&rho, sp).map_err(|e| e.to_string())?;
            worst = worst
                .max((lo - c2).abs())
                .max((hi - c2).abs())
                .max((lo - hi).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e} > 1e-9"))?;
    Ok(format!("30000 states, max deviation {worst:.2e}"))
}

/// 2. Two-qubit sandwich lower ≤ C² ≤ upper on Ginibre states of rank 1-4.
fn two_qubit_sandwich() -> Outcome {
    let q = BipartiteSplit::QUBITS;
    let mut min_slack = f64::INFINITY;
    let mut fails = 0;
    for rank in 1..=4usize {
        for i in 0..10_000u64 {
            let rho = random_density(4, rank, SeedSpec::new(200 + rank as u64, i))
                .map_err(|e| e.to_string())?;
            let c = concurrence_two_qubit(&rho).map_err(|e| e.to_string())?;
            let report = sandwich_check(&rho, q, Reference::Exact(c)).map_err(|e| e.to_string())?;
            let slack = report
                .checks
                .iter()
                .map(|c| c.slack)
                .fold(f64::INFINITY, f64::min);
            min_slack = min_slack.min(slack);
            if slack < -1e-8 {
                fails += 1;
            }
        }
    }
    ensure(fails == 0, || {
        format!("{fails} of 40000 failed, min slack {min_slack:e}")
    })?;
    Ok(format!("40000/40000 pass, min slack {min_slack:.2e}"))
}

/// 3. 1 ≥ G ≥ F on random pairs, and F(marginals) ≥ overlap on pure pairs.
fn fidelity_ordering() -> Outcome {
    let mut min_gf = f64::INFINITY;
    let mut min_one_g = f64::INFINITY;
    for (k, d) in [2usize, 3, 4, 8].into_iter().enumerate() {
        for i in 0..10_000u64 {
            let r1 = 1 + (i as usize) % d;
            let r2 = 1 + (i as usize / d) % d;
            let a = random_density(d, r1, SeedSpec::new(300 + k as u64, 2 * i))
                .map_err(|e| e.to_string())?;
            let b = random_density(d, r2, SeedSpec::new(300 + k as u64, 2 * i + 1))
                .map_err(|e| e.to_string())?;
            let f = fidelity(&a, &b).map_err(|e| e.to_string())?;
            let g = super_fidelity(&a, &b).map_err(|e| e.to_string())?;
            min_gf = min_gf.min(g - f);
            min_one_g = min_one_g.min(1.0 - g);
        }
    }
    let mut min_marginal = f64::INFINITY;
    for i in 0..10_000u64 {
        let sp = [split(2, 2), split(2, 3), split(3, 3)][i as usize % 3];
        let a = haar_pure(sp.total(), SeedSpec::new(310, 2 * i));
        let b = haar_pure(sp.total(), SeedSpec::new(310, 2 * i + 1));
        let r = chain_check(&a, &b, sp).map_err(|e| e.to_string())?;
        min_marginal = min_marginal.min(r.link_slacks[2]);
    }
    let min = min_gf.min(min_one_g).min(min_marginal);
    ensure(min >= -1e-8, || {
        format!("slacks: G-F {min_gf:e}, 1-G {min_one_g:e}, F_marg-overlap {min_marginal:e}")
    })?;
    Ok(format!(
        "40000 mixed pairs + 10000 pure pairs; min G-F {min_gf:.2e}, min 1-G {min_one_g:.2e}, min F_marg-overlap {min_marginal:.2e}"
    ))
}

/// 4. Double-sum identities within 1e-9 and 2 ≥ a + b ≥ c on isometry ensembles.
fn proof_chain() -> Outcome {
    let mut worst_identity: f64 = 0.0;
    let mut min_chain = f64::INFINITY;
    let mut count = 0;
    for (sp, states, stream) in [(split(2, 2), 1000u64, 400u64), (split(2, 3), 1000, 401)] {
        let d = sp.total();
        for i in 0..states {
            let rank = 1 + (i as usize) % d;
            let rho =
                random_density(d, rank, SeedSpec::new(stream, i)).map_err(|e| e.to_string())?;
            for k in 0..5u64 {
                let v = random_isometry(rank * rank, rank, SeedSpec::new(stream + 100, i * 5 + k))
                    .map_err(|e| e.to_string())?;
                let dec = from_isometry(&rho, &v).map_err(|e| e.to_string())?;
                let report = proof_chain_check(&dec, sp).map_err(|e| e.to_string())?;
                for c in &report.checks {
                    if c.name.starts_with("identity") {
                        worst_identity = worst_identity.max(-c.slack);
                    } else {
                        min_chain = min_chain.min(c.slack);
                    }
                }
                count += 1;
            }
        }
    }
    ensure(worst_identity <= 1e-9 && min_chain >= -1e-8, || {
        format!("max identity residual {worst_identity:e}, min chain slack {min_chain:e}")
    })?;
    Ok(format!("{count} ensembles (2x2 and 2x3), max identity residual {worst_identity:.2e}, min chain slack {min_chain:.2e}"))
}

/// 5. Searched c* ≥ oracle − 1e-7 always, and c* − oracle ≤ 5e-3 for ≥ 95/100.
fn search_vs_oracle() -> Outcome {
    let q = BipartiteSplit::QUBITS;
    let mut close = 0;
    let mut min_gap = f64::INFINITY;
    let mut max_gap: f64 = 0.0;
    for i in 0..100u64 {
        let rho = random_density(4, 4, SeedSpec::new(500, i)).map_err(|e| e.to_string())?;
        let oracle = concurrence_two_qubit(&rho).map_err(|e| e.to_string())?;
        let cfg = SearchConfig {
            ensemble_size: Some(16),
            restarts: 20,
            seed: SeedSpec::new(501, i).derive(0),
            ..SearchConfig::default()
        };
        let res = minimize_average_concurrence(&rho, q, &cfg).map_err(|e| e.to_string())?;
        let gap = res.concurrence - oracle;
        min_gap = min_gap.min(gap);
        max_gap = max_gap.max(gap);
        if gap <= 5e-3 {
            close += 1;
        }
    }
    ensure(min_gap >= -1e-7 && close >= 95, || {
        format!("min gap {min_gap:e}, {close}/100 within 5e-3 (max gap {max_gap:e})")
    })?;
    Ok(format!(
        "{close}/100 within 5e-3, gap range [{min_gap:.2e}, {max_gap:.2e}]"
    ))
}

/// 6. Werner profile over p = 0, 0.1, ..., 1.
fn werner_profile() -> Outcome {
    let q = BipartiteSplit::QUBITS;
    for step in 0..=10 {
        let p = step as f64 / 10.0;
        let rho = werner(p);
        let c = concurrence_two_qubit(&rho).map_err(|e| e.to_string())?;
        let lo = lower_bound(&rho, q).map_err(|e| e.to_string())?;
        let hi = upper_bound(&rho, q).map_err(|e| e.to_string())?;
        let c_expected = ((3.0 * p - 1.0) / 2.0).max(0.0);
        let lo_expected = (3.0 * p * p - 1.0) / 2.0;
        ensure((c - c_expected).abs() <= 1e-9, || {
            format!("p={p}: C={c}, expected {c_expected}")
        })?;
        ensure((lo - lo_expected).abs() <= 1e-9, || {
            format!("p={p}: lower={lo}, expected {lo_expected}")
        })?;
        ensure((hi - 1.0).abs() <= 1e-12, || format!("p={p}: upper={hi}"))?;
        let report = sandwich_check(&rho, q, Reference::Exact(c)).map_err(|e| e.to_string())?;
        ensure(report.passed(), || {
            format!("p={p}: sandwich failed {:?}", report.checks)
        })?;
        if step == 10 {
            ensure((c - 1.0).abs() <= 1e-9 && (lo - 1.0).abs() <= 1e-9, || {
                format!("p=1: C={c}, lower={lo}, upper={hi}")
            })?;
        }
    }
    Ok("11 values of p, C, lower and upper match the analytic profile".into())
}

/// 7. Mean Tr ρ_A² over Haar two-qubit pure states lies in [0.795, 0.805].
fn haar_moment() -> Outcome {
    let n = 100_000u64;
    let q = BipartiteSplit::QUBITS;
    let mut sum = 0.0;
    for i in 0..n {
        let psi = haar_pure(4, SeedSpec::new(700, i));
        sum += purity(&psi.reduced(q, Subsystem::A).map_err(|e| e.to_string())?);
    }
    let mean = sum / n as f64;
    ensure((0.795..=0.805).contains(&mean), || {
        format!("mean purity {mean}")
    })?;
    Ok(format!("mean Tr(rho_A^2) = {mean:.5} over {n} states"))
}

/// 8. A 1000-sample campaign is identical on 1 and 8 threads, run twice.
fn campaign_determinism() -> Outcome {
    let base = CampaignConfig {
        samples: 1000,
        split: BipartiteSplit::QUBITS,
        rank: RankSpec::All,
        master_seed: 0x00c0_ffee,
        tasks: vec![Task::Bounds, Task::Chain, Task::ProofChain, Task::Sandwich],
        marginal: MarginalChoice::Both,
        ..CampaignConfig::default()
    };
    let run = |threads: usize| -> Result<Vec<_>, String> {
        let cfg = CampaignConfig {
            threads: Some(threads),
            ..base.clone()
        };
        let report = run_campaign(&cfg).map_err(|e| e.to_string())?;
        Ok(report
            .records
            .iter()
            .map(|r| r.without_timing())
            .collect::<Vec<_>>())
    };
    let runs = [run(1)?, run(8)?, run(1)?, run(8)?];
    ensure(runs[0].len() == 1000, || {
        format!("{} records", runs[0].len())
    })?;
    for (i, r) in runs.iter().enumerate().skip(1) {
        ensure(*r == runs[0], || format!("run {i} differs from run 0"))?;
    }
    let passed = runs[0].iter().filter(|r| r.passed()).count();
    Ok(format!(
        "4 runs (1/8/1/8 threads) identical, {passed}/1000 trials pass"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "pure-state tightness", pure_state_tightness),
        (2, "two-qubit sandwich", two_qubit_sandwich),
        (3, "fidelity ordering", fidelity_ordering),
        (4, "proof-chain identities and sandwich", proof_chain),
        (5, "decomposition search vs oracle", search_vs_oracle),
        (6, "Werner profile", werner_profile),
        (7, "Haar purity moment", haar_moment),
        (8, "campaign determinism", campaign_determinism),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
