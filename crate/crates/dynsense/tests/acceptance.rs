//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.

use std::time::{Duration, Instant};

use dynsense::config::{ExperimentConfig, FilterKind, Method, ScenarioKind, ScheduleSetting};
use dynsense::harness::{gap_check, run_experiment, sweep_k, GapSetup, RunOptions};
use dynsense_core::dictionary::{sparse_coding_objective, update_coefficients, update_dictionary, LearnerParams};
use dynsense_core::filter::{chebyshev_filter_apply, exact_filter_matrix, FilterSpec, SpectralResponse};
use dynsense_core::graph::{random_sensor_graph, Spectrum};
use dynsense_core::placement::Schedule;
use dynsense_core::sampling::greedy_select_with_increments;
use dynsense_core::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let pass = ok && elapsed < limit;
    println!(
        "{} criterion {id} ({name}): {detail}; {:.2}s (limit {}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(elapsed < limit, "criterion {id} too slow: {elapsed:?}");
}

fn random_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

#[test]
fn criterion_1_perfect_recovery() {
    let started = Instant::now();
    let mut cfg = ExperimentConfig::preset(ScenarioKind::SyntheticBl);
    cfg.noise_variance = 0.0;
    cfg.sensors.count = cfg.signal.bandwidth;
    cfg.filter.kind = FilterKind::Identity;
    cfg.methods = vec![Method::Static1];
    cfg.replicates = 5;
    let exp = run_experiment(&cfg, RunOptions { oracle_dictionary: true, ..RunOptions::default() }).unwrap();
    let worst = exp.records.iter().flat_map(|r| r.mse.iter().copied()).fold(0.0, f64::max);
    report(1, "perfect recovery", worst < 1e-9, started.elapsed(), Duration::from_secs(10), &format!("max MSE {worst:.3e}"));
}

fn log_det(z: &DMatrix<f64>, set: &[usize]) -> f64 {
    z.select_rows(set.iter()).select_columns(set.iter()).determinant().ln()
}

#[test]
fn criterion_2_greedy_oracle() {
    let started = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let mut worst_rel = 0.0f64;
    let mut beats_median = 0;
    for _ in 0..20 {
        let f = random_matrix(12, 12, &mut r);
        let z = &f * f.transpose();
        let (chosen, incs) = greedy_select_with_increments(&z, 4).unwrap();
        let mut prev = 1.0;
        for m in 1..=4 {
            let det = z.select_rows(chosen[..m].iter()).select_columns(chosen[..m].iter()).determinant();
            let ratio = det / prev;
            worst_rel = worst_rel.max((incs[m - 1] - ratio).abs() / ratio.abs());
            prev = det;
        }
        let mut random: Vec<f64> = (0..1000).map(|_| log_det(&z, &sample(&mut r, 12, 4).into_vec())).collect();
        random.sort_by(f64::total_cmp);
        let median = 0.5 * (random[499] + random[500]);
        if log_det(&z, &chosen) >= median {
            beats_median += 1;
        }
    }
    let ok = worst_rel < 1e-8 && beats_median == 20;
    let detail = format!("max relative increment error {worst_rel:.2e}, above median in {beats_median}/20");
    report(2, "greedy oracle", ok, started.elapsed(), Duration::from_secs(30), &detail);
}

#[test]
fn criterion_3_ista() {
    let started = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let (mut monotone, mut close) = (0, 0);
    let mut worst_gap = 0.0f64;
    for _ in 0..50 {
        let a = random_matrix(16, 5, &mut r);
        let x = random_matrix(16, 8, &mut r);
        let start = DMatrix::from_element(5, 8, 1.0);
        let params = LearnerParams { mu: 0.5, gamma: 1.0, epsilon: 1e-14, max_iters: 20_000, ..LearnerParams::default() };
        let run = update_coefficients(&a, &x, &start, &params, true).unwrap();
        let trace = run.objective_trace.unwrap();
        if trace.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)) {
            monotone += 1;
        }
        let fine = LearnerParams { gamma: run.gamma_used / 10.0, max_iters: 200_000, ..params };
        let oracle = update_coefficients(&a, &x, &start, &fine, false).unwrap();
        let f = sparse_coding_objective(&a, &x, &run.coefficients, params.mu);
        let fo = sparse_coding_objective(&a, &x, &oracle.coefficients, params.mu);
        let gap = (f - fo).abs();
        worst_gap = worst_gap.max(gap);
        if gap <= 1e-6 {
            close += 1;
        }
    }
    let ok = monotone == 50 && close == 50;
    let detail = format!("monotone {monotone}/50, within 1e-6 of oracle {close}/50 (worst {worst_gap:.2e})");
    report(3, "ISTA", ok, started.elapsed(), Duration::from_secs(60), &detail);
}

#[test]
fn criterion_4_dictionary_update() {
    let started = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let prev = random_matrix(40, 8, &mut r);
        let x = random_matrix(40, 8, &mut r);
        let c = random_matrix(8, 8, &mut r);
        let eta = r.random_range(0.1..5.0);
        let a = update_dictionary(&prev, &x, &c, eta).unwrap();
        let grad = (&a * &c - &x) * c.transpose() + (&a - &prev) * eta;
        let scale = (&x * c.transpose()).norm() + eta * prev.norm();
        worst = worst.max(grad.norm() / scale);
    }
    report(4, "dictionary update", worst < 1e-8, started.elapsed(), Duration::from_secs(10), &format!("max relative residual {worst:.2e}"));
}

#[test]
fn criterion_5_distributed_gap() {
    let started = Instant::now();
    let results = gap_check(&GapSetup::default()).unwrap();
    let holds = results.iter().filter(|(row, _)| row.holds).count();
    report(5, "distributed gap", holds == 20, started.elapsed(), Duration::from_secs(60), &format!("{holds}/20 instances in bounds"));
}

#[test]
fn criterion_6_synthetic_ordering() {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for scenario in [ScenarioKind::SyntheticBl, ScenarioKind::SyntheticPc] {
        let cfg = ExperimentConfig::preset(scenario);
        let exp = run_experiment(&cfg, RunOptions { schedule: cfg.schedule(), oracle_dictionary: false }).unwrap();
        for baseline in [Method::Static1, Method::Static2] {
            let c = exp.compare(Method::Dynamic, baseline);
            let sig = c.significant(0.05);
            ok &= sig;
            lines.push(format!(
                "{scenario} dynamic {:.4e} vs {baseline} {:.4e}, wins {}/{} p={:.2e}",
                c.mean_first,
                c.mean_second,
                c.wins,
                c.wins + c.losses,
                c.p_value
            ));
        }
        if scenario == ScenarioKind::SyntheticBl {
            let table = exp.mse_table();
            let dynamic: Vec<f64> = table.iter().filter(|r| r.method == Method::Dynamic.to_string()).map(|r| r.mean_mse).collect();
            let first = dynamic[..5].iter().sum::<f64>() / 5.0;
            let last = dynamic[dynamic.len() - 5..].iter().sum::<f64>() / 5.0;
            ok &= last < first;
            lines.push(format!("bl dynamic first-5 {first:.4e} last-5 {last:.4e}"));
        }
    }
    report(6, "synthetic ordering", ok, started.elapsed(), Duration::from_secs(15 * 60), &lines.join("; "));
}

#[test]
fn criterion_7_sensor_count_sweep() {
    let started = Instant::now();
    let cfg = ExperimentConfig::preset(ScenarioKind::Real);
    let rows = sweep_k(&cfg, &[5, 10, 20], RunOptions { schedule: cfg.schedule(), oracle_dictionary: false }).unwrap();
    let inversions = rows.windows(2).filter(|w| w[1].mean_mse > w[0].mean_mse).count();
    let detail = rows.iter().map(|r| format!("K={} {:.4e}", r.k, r.mean_mse)).collect::<Vec<_>>().join(", ");
    report(7, "sensor count sweep", inversions <= 1, started.elapsed(), Duration::from_secs(5 * 60), &format!("{detail}; {inversions} inversions"));
}

#[test]
fn criterion_8_chebyshev() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let mut r = ChaCha8Rng::seed_from_u64(800 + seed);
        let g = random_sensor_graph(64, &mut r).unwrap();
        let s = Spectrum::of(&g).unwrap();
        let x = DVector::from_fn(64, |_, _| r.random_range(-1.0..1.0));
        let exact = exact_filter_matrix(&s, SpectralResponse::LowpassCosine) * &x;
        let spec = FilterSpec::chebyshev(SpectralResponse::LowpassCosine, 20);
        let approx = chebyshev_filter_apply(&g, &s, &spec, &x).unwrap();
        worst = worst.max((&approx - &exact).norm() / exact.norm());
    }
    report(8, "Chebyshev fidelity", worst < 1e-3, started.elapsed(), Duration::from_secs(5), &format!("max relative error {worst:.2e}"));
}

#[test]
fn criterion_9_schedule_independence() {
    let started = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, schedule) in dirs.iter().zip([ScheduleSetting::Sequential, ScheduleSetting::Parallel]) {
        let mut cfg = ExperimentConfig::preset(ScenarioKind::SyntheticPc);
        cfg.placement.schedule = schedule;
        let exp = run_experiment(&cfg, RunOptions { schedule: Schedule::from(schedule), oracle_dictionary: false }).unwrap();
        exp.write_outputs(dir.path()).unwrap();
    }
    let mut same = true;
    for file in ["mse.csv", "trajectory.jsonl"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        same &= !a.is_empty() && a == b;
    }
    report(9, "schedule independence", same, started.elapsed(), Duration::from_secs(120), "mse.csv and trajectory.jsonl byte-identical");
}
