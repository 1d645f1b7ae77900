use std::time::Instant;

use approx::assert_relative_eq;
use dynsense_core::filter::{FilterSpec, SensingOperator, SpectralResponse};
use dynsense_core::graph::{hop_distances, random_sensor_graph, voronoi_partition, Graph, Spectrum};
use dynsense_core::placement::{
    distributed_gap_check, feasible_nodes, psi_score, relocate_sensor, step, step_with_selection, HopLimit,
    PlacementState, Schedule,
};
use dynsense_core::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

fn graph(n: usize, seed: u64) -> Graph {
    random_sensor_graph(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn distinct_nodes(n: usize, k: usize, seed: u64) -> Vec<usize> {
    rand::seq::index::sample(&mut ChaCha8Rng::seed_from_u64(seed), n, k).into_vec()
}

#[test]
fn psi_matches_gram_formula() {
    for seed in 0..10 {
        let n = random_matrix(6, 20, seed);
        let others = [2, 9, 15];
        let nm = n.select_columns(others.iter());
        let gram_inv = (nm.transpose() * &nm).try_inverse().unwrap();
        for y in (0..20).filter(|y| !others.contains(y)) {
            let nu = n.column(y);
            let direct = nu.dot(&nu) - (nu.transpose() * &nm * &gram_inv * nm.transpose() * nu)[(0, 0)];
            assert_relative_eq!(psi_score(&n, &others, y).unwrap(), direct, epsilon = 1e-8);
        }
    }
}

#[test]
fn relocation_matches_exhaustive_scan() {
    for seed in 0..10 {
        let g = graph(30, seed);
        let n = random_matrix(5, 30, 100 + seed);
        let state = PlacementState::new(distinct_nodes(30, 3, seed), HopLimit::Hops(1), 30).unwrap();
        let part = voronoi_partition(&g, state.positions()).unwrap();
        for i in 0..3 {
            let mv = relocate_sensor(&state, &g, &part, &n, i).unwrap();
            let others: Vec<usize> = state.positions().iter().copied().filter(|&q| q != state.positions()[i]).collect();
            let hops = hop_distances(&g, &[state.positions()[i]]).unwrap();
            let feasible: Vec<usize> = (0..30).filter(|&v| part.owner(v) == i && hops.distance[v] <= 1).collect();
            assert_eq!(feasible, feasible_nodes(&state, &g, &part, i));
            let best = feasible.iter().map(|&y| psi_score(&n, &others, y).unwrap()).fold(f64::MIN, f64::max);
            assert!(feasible.contains(&mv.to));
            assert_relative_eq!(psi_score(&n, &others, mv.to).unwrap(), best, epsilon = 1e-9);
            assert_relative_eq!(mv.score, best, epsilon = 1e-9);
        }
    }
}

#[test]
fn concentrated_dictionary_keeps_sensors() {
    let g = graph(40, 3);
    let positions = vec![4, 17, 30];
    // rows of N are unit vectors on the current positions
    let mut n = DMatrix::zeros(3, 40);
    for (r, &q) in positions.iter().enumerate() {
        n[(r, q)] = 1.0;
    }
    let state = PlacementState::new(positions.clone(), HopLimit::Hops(2), 40).unwrap();
    let out = step_with_selection(&state, &g, &n, Schedule::Sequential).unwrap();
    assert_eq!(out.next.positions(), &positions[..]);
}

#[test]
fn unchanged_inputs_are_a_fixed_point() {
    let g = graph(60, 4);
    let positions = vec![3, 25, 41, 58];
    let mut n = random_matrix(4, 60, 8) * 0.05;
    for (r, &q) in positions.iter().enumerate() {
        n[(r, q)] += 1.0;
    }
    let state = PlacementState::new(positions, HopLimit::Hops(1), 60).unwrap();
    let first = step_with_selection(&state, &g, &n, Schedule::Sequential).unwrap();
    assert!(first.moves.iter().all(|m| m.from == m.to));
    let second = step_with_selection(&first.next, &g, &n, Schedule::Sequential).unwrap();
    assert_eq!(second.next, state);
    assert_eq!(second.moves, first.moves);
}

#[test]
fn schedules_agree_and_moves_are_feasible() {
    let g = graph(256, 5);
    let s = Spectrum::of(&g).unwrap();
    let sensing = SensingOperator::build(&g, &s, &FilterSpec::chebyshev(SpectralResponse::LowpassCosine, 20)).unwrap();
    let a = random_matrix(256, 20, 6);
    let mut state = PlacementState::new(distinct_nodes(256, 8, 2), HopLimit::Hops(1), 256).unwrap();
    for _ in 0..5 {
        let seq = step(&state, &g, &a, &sensing, Schedule::Sequential).unwrap();
        let par = step(&state, &g, &a, &sensing, Schedule::Parallel).unwrap();
        assert_eq!(seq.next, par.next);
        assert_eq!(seq.moves, par.moves);
        for mv in &seq.moves {
            let d = hop_distances(&g, &[mv.from]).unwrap().distance[mv.to];
            assert!(d <= 1);
            assert_eq!(seq.partition.owner(mv.to), mv.sensor);
            assert!(mv.score >= 0.0);
        }
        state = seq.next;
    }
}

#[test]
fn gap_bound_on_random_instances() {
    for seed in 0..20 {
        let g = graph(30, 200 + seed);
        let n = random_matrix(8, 30, 300 + seed);
        let state = PlacementState::new(distinct_nodes(30, 4, seed), HopLimit::Unbounded, 30).unwrap();
        let report = distributed_gap_check(&n, &g, &state).unwrap();
        assert!(report.upper_bound_holds(1e-9), "{seed}: {report:?}");
        assert!(report.lower_bound_holds(1e-9), "{seed}: {report:?}");
    }
}

#[test]
fn gap_single_sensor_is_exact() {
    let g = graph(30, 9);
    let n = random_matrix(4, 30, 10);
    let state = PlacementState::new(vec![7], HopLimit::Unbounded, 30).unwrap();
    let report = distributed_gap_check(&n, &g, &state).unwrap();
    assert_eq!(report.distributed, report.centralized);
    assert_relative_eq!(report.distributed_sum(), report.centralized_sum(), epsilon = 1e-12);
}

#[test]
fn gap_identical_columns() {
    let g = graph(30, 11);
    let n = DMatrix::from_fn(3, 30, |i, _| (i + 1) as f64);
    let state = PlacementState::new(vec![0, 10, 20], HopLimit::Unbounded, 30).unwrap();
    let report = distributed_gap_check(&n, &g, &state).unwrap();
    // every sensor's column lies in the span of the others'
    assert!(report.distributed_scores.iter().all(|&s| s < 1e-12));
    assert!(report.centralized_scores[1..].iter().all(|&s| s < 1e-12));
    assert_relative_eq!(report.centralized_scores[0], 14.0, epsilon = 1e-12);
    assert!(report.upper_bound_holds(1e-9));
}

fn time_step(n: usize) -> f64 {
    let g = graph(n, 42);
    let a = random_matrix(n, 20, 43);
    let sensing = SensingOperator::Identity;
    let state = PlacementState::new(distinct_nodes(n, 8, 44), HopLimit::Hops(1), n).unwrap();
    // warm up once, then take the best of a few runs
    step(&state, &g, &a, &sensing, Schedule::Sequential).unwrap();
    (0..5)
        .map(|_| {
            let t0 = Instant::now();
            step(&state, &g, &a, &sensing, Schedule::Sequential).unwrap();
            t0.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn step_time_scales_near_linearly() {
    let sizes = [256usize, 1024, 4096];
    let times: Vec<f64> = sizes.iter().map(|&n| time_step(n)).collect();
    for w in 0..2 {
        let n_ratio = sizes[w + 1] as f64 / sizes[w] as f64;
        let t_ratio = times[w + 1] / times[w];
        assert!(t_ratio <= 4.0 * n_ratio, "{sizes:?} {times:?}");
    }
}
