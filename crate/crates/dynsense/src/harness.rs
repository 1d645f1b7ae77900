//! Scenario construction and the per-replicate simulation loop.

use std::path::Path;
use std::time::{Duration, Instant};

use dynsense_core::dictionary::{OnlineDictionaryLearner, SignalWindow};
use dynsense_core::filter::SensingOperator;
use dynsense_core::graph::{hop_distances, random_sensor_graph, Graph, Spectrum};
use dynsense_core::linalg::{leading_left_singular_vectors, select_rows};
use dynsense_core::placement::{
    distributed_gap_check, step_with_selection, GapReport, HopLimit, PlacementState, Schedule, SensorMove,
};
use dynsense_core::sampling::{build_z, greedy_select, reconstruct_from_sampled};
use dynsense_core::signal::{noise_vector, random_connected_partition, BandlimitedModel, PiecewiseConstantModel, TimeGrid};
use dynsense_core::{DMatrix, DVector, Error as CoreError};
use log::{debug, info};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Method, ScenarioKind};
use crate::io::{self, GridData, MoveRecord, MseRow, TrajectoryRecord};
use crate::standin::sst_standin_grid;
use crate::{Error, Result};

/// Generator for replicate `r`: one ChaCha stream per replicate.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Everything a replicate shares across methods.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub graph: Graph,
    pub sensing: SensingOperator,
    /// Noiseless signals of the test horizon, one column per step.
    pub test_signals: DMatrix<f64>,
    /// Training signals plus noise.
    pub initial_data: DMatrix<f64>,
    /// Measurement noise for each test step, drawn once so that every
    /// method sees the same noise.
    pub sampling_noise: DMatrix<f64>,
    /// Generator of the signal model when it is known.
    pub true_dictionary: Option<DMatrix<f64>>,
}

/// Grid data for the real-data scenario: the configured file, or the
/// built-in stand-in.
pub fn load_grid(cfg: &ExperimentConfig) -> Result<GridData> {
    let d = &cfg.data;
    match &d.path {
        Some(p) => {
            let file = std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
            io::read_grid_csv(file, d.lat_range, d.lon_range)
        }
        None => {
            let grid = sst_standin_grid(cfg.seed);
            let inside = |x: f64, r: Option<[f64; 2]>| r.is_none_or(|[lo, hi]| x >= lo && x <= hi);
            let keep: Vec<usize> = (0..grid.coordinates.len())
                .filter(|&i| inside(grid.coordinates[i][0], d.lat_range) && inside(grid.coordinates[i][1], d.lon_range))
                .collect();
            Ok(GridData {
                coordinates: keep.iter().map(|&i| grid.coordinates[i]).collect(),
                values: grid.values.select_rows(keep.iter()),
            })
        }
    }
}

pub fn build_scenario(cfg: &ExperimentConfig, replicate: usize, grid: Option<&GridData>) -> Result<Scenario> {
    let mut rng = replicate_rng(cfg.seed, replicate);
    let n_train = cfg.horizon.n_train;
    let n_test = cfg.horizon.n_test;
    let (graph, signals, true_dictionary) = match cfg.scenario {
        ScenarioKind::SyntheticBl | ScenarioKind::SyntheticPc => {
            let graph = random_sensor_graph(cfg.graph.nodes, &mut rng)?;
            let spectrum = Spectrum::of(&graph)?;
            let grid = TimeGrid::new(cfg.horizon.sampling_period, n_train, n_test)?;
            let times: Vec<f64> = grid.train_times().chain(grid.test_times()).collect();
            let (columns, generator) = if cfg.scenario == ScenarioKind::SyntheticBl {
                let model = BandlimitedModel::new(&spectrum, cfg.signal.bandwidth)?;
                let cols = times.iter().map(|&t| model.signal(t)).collect::<std::result::Result<Vec<_>, _>>()?;
                (cols, model.basis().clone())
            } else {
                let parts = random_connected_partition(&graph, cfg.signal.clusters, &mut rng)?;
                let model = PiecewiseConstantModel::new(graph.n_nodes(), parts)?;
                (times.iter().map(|&t| model.signal(t)).collect(), model.generator())
            };
            (graph, DMatrix::from_columns(&columns), Some(generator))
        }
        ScenarioKind::Real => {
            let grid = grid.ok_or_else(|| Error::Config("real scenario needs grid data".into()))?;
            if grid.values.ncols() < n_train + n_test {
                return Err(Error::Config(format!(
                    "grid has {} time steps, horizon needs {}",
                    grid.values.ncols(),
                    n_train + n_test
                )));
            }
            let (graph, values) = io::sample_grid_graph(grid, cfg.graph.nodes, cfg.graph.knn, rng.next_u64())?;
            (graph, values.columns(0, n_train + n_test).into_owned(), None)
        }
    };
    let n = graph.n_nodes();
    let spectrum = Spectrum::of(&graph)?;
    let sensing = SensingOperator::build(&graph, &spectrum, &cfg.filter_spec())?;
    let mut initial_data = signals.columns(0, n_train).into_owned();
    for mut col in initial_data.column_iter_mut() {
        col += noise_vector(n, cfg.noise_variance, &mut rng)?;
    }
    let mut sampling_noise = DMatrix::zeros(n, n_test);
    for mut col in sampling_noise.column_iter_mut() {
        col.copy_from(&noise_vector(n, cfg.noise_variance, &mut rng)?);
    }
    Ok(Scenario {
        graph,
        sensing,
        test_signals: signals.columns(n_train, n_test).into_owned(),
        initial_data,
        sampling_noise,
        true_dictionary,
    })
}

/// Centralized greedy placement on `Z = G A A^T G`. When `Z` has rank below
/// `k` the remaining picks are made on `Z + delta I` with
/// `delta = 1e-6 tr(Z) / N`.
pub fn initial_sensors(dictionary: &DMatrix<f64>, sensing: &SensingOperator, k: usize) -> Result<Vec<usize>> {
    let z = build_z(dictionary, sensing)?;
    match greedy_select(&z, k) {
        Ok(s) => Ok(s),
        Err(CoreError::RankDeficient { chosen, .. }) => {
            let n = z.nrows();
            let delta = 1e-6 * z.trace() / n as f64;
            debug!("Z has rank {chosen} < {k}, regularising with {delta:e}");
            let mut ridge = z;
            for i in 0..n {
                ridge[(i, i)] += delta;
            }
            Ok(greedy_select(&ridge, k)?)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub schedule: Schedule,
    /// Use the scenario's true generator as a fixed dictionary.
    pub oracle_dictionary: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { schedule: Schedule::Sequential, oracle_dictionary: false }
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub method: Method,
    pub replicate: usize,
    /// `||x_t - x~_t||^2 / N` per test step.
    pub mse: Vec<f64>,
    /// Sensor positions used at each test step.
    pub positions: Vec<Vec<usize>>,
    /// Relocations decided after each test step.
    pub moves: Vec<Vec<SensorMove>>,
    /// ISTA iterations per step (dynamic methods with a learned dictionary).
    pub ista_iterations: Vec<usize>,
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn mean_mse(&self) -> f64 {
        self.mse.iter().sum::<f64>() / self.mse.len() as f64
    }
}

enum DictionarySource {
    Fixed(DMatrix<f64>),
    Online(Box<OnlineDictionaryLearner>),
    WindowSvd { initial: DMatrix<f64>, window: SignalWindow },
}

pub fn run_method(scn: &Scenario, cfg: &ExperimentConfig, method: Method, opts: RunOptions) -> Result<RunRecord> {
    let started = Instant::now();
    let n = scn.graph.n_nodes();
    let d = cfg.window.size;
    let n_train = scn.initial_data.ncols();
    let a0 = leading_left_singular_vectors(&scn.initial_data, d)?;
    let window0 = SignalWindow::new(scn.initial_data.columns(n_train - d, d).into_owned())?;

    let mut source = match (opts.oracle_dictionary, method) {
        (true, _) => DictionarySource::Fixed(
            scn.true_dictionary.clone().ok_or_else(|| Error::Config("scenario has no known generator".into()))?,
        ),
        (false, Method::Dynamic | Method::DynamicPinf) => {
            let c0 = DMatrix::from_element(a0.ncols(), d, 1.0);
            DictionarySource::Online(Box::new(OnlineDictionaryLearner::new(a0.clone(), c0, window0, cfg.learner_params())?))
        }
        (false, Method::Static1) => DictionarySource::Fixed(a0.clone()),
        (false, Method::Static2) => DictionarySource::WindowSvd { initial: a0.clone(), window: window0 },
    };
    let hop = match method {
        Method::Dynamic => Some(cfg.hop_limit()),
        Method::DynamicPinf => Some(HopLimit::Unbounded),
        Method::Static1 | Method::Static2 => None,
    };
    let start_dictionary = match &source {
        DictionarySource::Fixed(a) => a.clone(),
        _ => a0.clone(),
    };
    let mut positions = initial_sensors(&start_dictionary, &scn.sensing, cfg.sensors.count)?;

    let mut record = RunRecord {
        method,
        replicate: 0,
        mse: Vec::with_capacity(scn.test_signals.ncols()),
        positions: Vec::new(),
        moves: Vec::new(),
        ista_iterations: Vec::new(),
        wall_time: Duration::ZERO,
    };
    for k in 1..=scn.test_signals.ncols() {
        let dictionary = match &mut source {
            DictionarySource::Fixed(a) => a.clone(),
            DictionarySource::Online(learner) => {
                let step = learner.learn_step(k)?;
                record.ista_iterations.push(step.ista_iterations);
                learner.dictionary().clone()
            }
            DictionarySource::WindowSvd { initial, window } => {
                if k == 1 {
                    initial.clone()
                } else {
                    leading_left_singular_vectors(window.as_matrix(), d)?
                }
            }
        };
        let filtered_dictionary = scn.sensing.apply_columns(&dictionary)?;
        let x = scn.test_signals.column(k - 1).into_owned();
        let noisy = &x + scn.sampling_noise.column(k - 1);
        let observed = scn.sensing.apply(&noisy)?;
        let c = DVector::from_iterator(positions.len(), positions.iter().map(|&q| observed[q]));
        let estimate = reconstruct_from_sampled(&dictionary, &select_rows(&filtered_dictionary, &positions), &c)?;
        let mse = (&x - &estimate).norm_squared() / n as f64;
        if !mse.is_finite() {
            return Err(Error::Invariant(format!("non-finite MSE at step {k}")));
        }
        record.mse.push(mse);
        record.positions.push(positions.clone());

        match &mut source {
            DictionarySource::Online(learner) => learner.push_signal(&estimate)?,
            DictionarySource::WindowSvd { window, .. } => window.push(&estimate)?,
            DictionarySource::Fixed(_) => {}
        }
        let moves = match hop {
            Some(limit) => {
                let state = PlacementState::new(positions.clone(), limit, n)?;
                let out = step_with_selection(&state, &scn.graph, &filtered_dictionary.transpose(), opts.schedule)?;
                check_moves(&scn.graph, &out.partition, limit, &out.moves)?;
                positions = out.next.positions().to_vec();
                out.moves
            }
            None => Vec::new(),
        };
        record.moves.push(moves);
    }
    record.wall_time = started.elapsed();
    Ok(record)
}

fn check_moves(
    graph: &Graph,
    partition: &dynsense_core::graph::VoronoiPartition,
    limit: HopLimit,
    moves: &[SensorMove],
) -> Result<()> {
    for m in moves {
        if partition.owner(m.to) != m.sensor {
            return Err(Error::Invariant(format!("sensor {} left its region", m.sensor)));
        }
        if let HopLimit::Hops(p) = limit {
            let d = hop_distances(graph, &[m.from])?.distance[m.to];
            if d > p {
                return Err(Error::Invariant(format!("sensor {} moved {d} hops", m.sensor)));
            }
        }
        if !(m.score >= 0.0) {
            return Err(Error::Invariant(format!("negative score for sensor {}", m.sensor)));
        }
    }
    Ok(())
}

/// All replicates of one configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    /// Replicate-major, methods in configuration order.
    pub records: Vec<RunRecord>,
}

pub fn run_experiment(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Experiment> {
    cfg.validate()?;
    let grid = match cfg.scenario {
        ScenarioKind::Real => Some(load_grid(cfg)?),
        _ => None,
    };
    info!("{}: {} replicates, methods {:?}", cfg.scenario, cfg.replicates, cfg.methods);
    let per_replicate: Vec<Vec<RunRecord>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let scn = build_scenario(cfg, r, grid.as_ref()).map_err(|e| Error::Run {
                replicate: r,
                method: "setup".into(),
                source: Box::new(e),
            })?;
            cfg.methods
                .iter()
                .map(|&m| {
                    let mut rec = run_method(&scn, cfg, m, opts).map_err(|e| Error::Run {
                        replicate: r,
                        method: m.to_string(),
                        source: Box::new(e),
                    })?;
                    rec.replicate = r;
                    Ok(rec)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(Experiment { config: cfg.clone(), records: per_replicate.into_iter().flatten().collect() })
}

impl Experiment {
    pub fn records_for(&self, method: Method) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.method == method)
    }

    /// Mean and sample standard deviation across replicates, per step and
    /// method.
    pub fn mse_table(&self) -> Vec<MseRow> {
        let mut rows = Vec::new();
        for &m in &self.config.methods {
            let recs: Vec<&RunRecord> = self.records_for(m).collect();
            for t in 0..self.config.horizon.n_test {
                let values: Vec<f64> = recs.iter().map(|r| r.mse[t]).collect();
                let (mean, std) = mean_std(&values);
                rows.push(MseRow { t: t + 1, method: m.to_string(), mean_mse: mean, std_mse: std });
            }
        }
        rows
    }

    pub fn trajectories(&self) -> Vec<TrajectoryRecord> {
        self.records
            .iter()
            .flat_map(|r| {
                r.positions.iter().zip(&r.moves).enumerate().map(move |(t, (pos, moves))| TrajectoryRecord {
                    method: r.method.to_string(),
                    replicate: r.replicate,
                    t: t + 1,
                    positions: pos.clone(),
                    moves: moves
                        .iter()
                        .map(|m| MoveRecord { sensor: m.sensor, from: m.from, to: m.to, score: m.score })
                        .collect(),
                })
            })
            .collect()
    }

    /// Paired comparison of per-replicate mean test MSE.
    pub fn compare(&self, better: Method, worse: Method) -> Comparison {
        let a: Vec<f64> = self.records_for(better).map(RunRecord::mean_mse).collect();
        let b: Vec<f64> = self.records_for(worse).map(RunRecord::mean_mse).collect();
        Comparison::from_pairs(&a, &b)
    }

    /// `mse.csv`, `trajectory.jsonl`, `config.echo` and `timings.csv`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        io::write_csv_rows(&self.mse_table(), io::create(&dir.join("mse.csv"))?)?;
        io::write_jsonl(&self.trajectories(), io::create(&dir.join("trajectory.jsonl"))?)?;
        let echo = dir.join("config.echo");
        std::fs::write(&echo, self.config.to_toml()).map_err(|e| Error::io(&echo, e))?;
        let timings: Vec<TimingRow> = self
            .records
            .iter()
            .map(|r| TimingRow { method: r.method.to_string(), replicate: r.replicate, seconds: r.wall_time.as_secs_f64() })
            .collect();
        io::write_csv_rows(&timings, io::create(&dir.join("timings.csv"))?)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct TimingRow {
    method: String,
    replicate: usize,
    seconds: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Paired sign test of "first is smaller" over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub mean_first: f64,
    pub mean_second: f64,
    /// One-sided `P(X >= wins)` for `X ~ Binomial(wins + losses, 1/2)`.
    pub p_value: f64,
}

impl Comparison {
    pub fn from_pairs(first: &[f64], second: &[f64]) -> Self {
        let (mut wins, mut losses, mut ties) = (0, 0, 0);
        for (a, b) in first.iter().zip(second) {
            match a.partial_cmp(b) {
                Some(std::cmp::Ordering::Less) => wins += 1,
                Some(std::cmp::Ordering::Greater) => losses += 1,
                _ => ties += 1,
            }
        }
        Comparison {
            wins,
            losses,
            ties,
            mean_first: mean_std(first).0,
            mean_second: mean_std(second).0,
            p_value: binomial_upper_tail(wins + losses, wins),
        }
    }

    pub fn significant(&self, alpha: f64) -> bool {
        self.mean_first < self.mean_second && self.p_value < alpha
    }
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    // log-space binomial coefficients keep n in the thousands exact enough
    let ln_half_n = n as f64 * 0.5f64.ln();
    let mut ln_choose = 0.0;
    let mut total = 0.0;
    for i in 0..=n {
        if i > 0 {
            ln_choose += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= k {
            total += (ln_choose + ln_half_n).exp();
        }
    }
    total.min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub mean_mse: f64,
    pub std_mse: f64,
}

/// Average test MSE of the dynamic method for each sensor count.
pub fn sweep_k(cfg: &ExperimentConfig, ks: &[usize], opts: RunOptions) -> Result<Vec<SweepRow>> {
    ks.iter()
        .map(|&k| {
            let mut c = cfg.clone();
            c.sensors.count = k;
            c.methods = vec![Method::Dynamic];
            let exp = run_experiment(&c, opts)?;
            let per_rep: Vec<f64> = exp.records.iter().map(RunRecord::mean_mse).collect();
            let (mean, std) = mean_std(&per_rep);
            info!("K = {k}: mean MSE {mean:e}");
            Ok(SweepRow { k, mean_mse: mean, std_mse: std })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub instance: usize,
    pub distributed_sum: f64,
    pub centralized_sum: f64,
    pub lower_bound: f64,
    pub holds: bool,
}

/// Random instances for the distributed-versus-centralized comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSetup {
    pub instances: usize,
    pub nodes: usize,
    pub sensors: usize,
    /// Rows of the selection matrix.
    pub rank: usize,
    pub hop_limit: HopLimit,
    pub seed: u64,
}

impl Default for GapSetup {
    fn default() -> Self {
        GapSetup { instances: 20, nodes: 30, sensors: 4, rank: 8, hop_limit: HopLimit::Unbounded, seed: 1 }
    }
}

pub fn gap_check(setup: &GapSetup) -> Result<Vec<(GapRow, GapReport)>> {
    (0..setup.instances)
        .map(|i| {
            let mut rng = replicate_rng(setup.seed, i);
            let graph = random_sensor_graph(setup.nodes, &mut rng)?;
            let selection = DMatrix::from_fn(setup.rank, setup.nodes, |_, _| rng.random_range(-1.0..1.0));
            let positions = rand::seq::index::sample(&mut rng, setup.nodes, setup.sensors).into_vec();
            let state = PlacementState::new(positions, setup.hop_limit, setup.nodes)?;
            let report = distributed_gap_check(&selection, &graph, &state)?;
            let row = GapRow {
                instance: i,
                distributed_sum: report.distributed_sum(),
                centralized_sum: report.centralized_sum(),
                lower_bound: report.centralized_sum() / setup.sensors as f64,
                holds: report.upper_bound_holds(1e-9) && report.lower_bound_holds(1e-9),
            };
            Ok((row, report))
        })
        .collect()
}
