use std::f64::consts::FRAC_PI_2;

use approx::assert_relative_eq;
use dynsense_core::filter::{
    chebyshev_filter_apply, exact_filter_matrix, ChebyshevFilter, FilterSpec, SensingOperator, SpectralResponse,
};
use dynsense_core::graph::{hop_distances, random_sensor_graph, Graph, Spectrum};
use dynsense_core::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(n: usize, seed: u64) -> (Graph, Spectrum) {
    let g = random_sensor_graph(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let s = Spectrum::of(&g).unwrap();
    (g, s)
}

fn random_signal(n: usize, seed: u64) -> DVector<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0))
}

#[test]
fn exact_filter_eigenvalues_are_the_response() {
    let (_, s) = setup(16, 4);
    let g = exact_filter_matrix(&s, SpectralResponse::LowpassCosine);
    let lmax = s.eigenvalues()[15];
    let mut expected: Vec<f64> = s.eigenvalues().iter().map(|&l| (FRAC_PI_2 * l / lmax).cos()).collect();
    expected.sort_by(f64::total_cmp);
    let mut got: Vec<f64> = g.symmetric_eigen().eigenvalues.iter().copied().collect();
    got.sort_by(f64::total_cmp);
    for (a, b) in got.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

fn relative_error(g: &Graph, s: &Spectrum, order: usize, x: &DVector<f64>) -> f64 {
    let exact = exact_filter_matrix(s, SpectralResponse::LowpassCosine) * x;
    let approx = chebyshev_filter_apply(g, s, &FilterSpec::chebyshev(SpectralResponse::LowpassCosine, order), x).unwrap();
    (approx - &exact).norm() / exact.norm()
}

#[test]
fn chebyshev_order_twenty_is_accurate() {
    for seed in 0..5 {
        let (g, s) = setup(64, 100 + seed);
        let x = random_signal(64, seed);
        let err = relative_error(&g, &s, 20, &x);
        assert!(err < 1e-3, "seed {seed}: {err}");
    }
}

#[test]
fn chebyshev_error_shrinks_with_order() {
    let (g, s) = setup(64, 7);
    let x = random_signal(64, 8);
    let errs: Vec<f64> = [5, 10, 20].iter().map(|&j| relative_error(&g, &s, j, &x)).collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn chebyshev_output_is_local() {
    let (g, s) = setup(64, 12);
    let order = 3;
    let mut delta = DVector::zeros(64);
    delta[5] = 1.0;
    let y = chebyshev_filter_apply(&g, &s, &FilterSpec::chebyshev(SpectralResponse::LowpassCosine, order), &delta).unwrap();
    let hops = hop_distances(&g, &[5]).unwrap();
    for v in 0..64 {
        if hops.distance[v] > order {
            assert_eq!(y[v], 0.0, "node {v} at {} hops", hops.distance[v]);
        }
    }
}

#[test]
fn filters_commute_with_laplacian() {
    let (g, s) = setup(32, 2);
    let l = g.laplacian();
    let exact = exact_filter_matrix(&s, SpectralResponse::LowpassCosine);
    assert_relative_eq!(&exact * &l, &l * &exact, epsilon = 1e-10);
    let cheb = SensingOperator::build(&g, &s, &FilterSpec::chebyshev(SpectralResponse::LowpassCosine, 10))
        .unwrap()
        .to_dense(32)
        .unwrap();
    assert_relative_eq!(&cheb * &l, &l * &cheb, epsilon = 1e-10);
    assert_relative_eq!(cheb.clone(), cheb.transpose(), epsilon = 1e-12);
}

#[test]
fn chebyshev_fit_interpolates_smooth_response() {
    let f = ChebyshevFilter::fit(SpectralResponse::LowpassCosine, 20, 5.0).unwrap();
    for i in 0..=50 {
        let l = 5.0 * i as f64 / 50.0;
        assert!((f.eval(l) - (FRAC_PI_2 * l / 5.0).cos()).abs() < 1e-10);
    }
}

#[test]
fn sensing_operator_forms_agree() {
    let (g, s) = setup(24, 3);
    let a = DMatrix::from_fn(24, 3, |i, j| ((i * 3 + j) as f64).sin());
    let dense = SensingOperator::build(&g, &s, &FilterSpec::exact(SpectralResponse::LowpassCosine)).unwrap();
    let cheb = SensingOperator::build(&g, &s, &FilterSpec::chebyshev(SpectralResponse::LowpassCosine, 30)).unwrap();
    let rel = (dense.apply_columns(&a).unwrap() - cheb.apply_columns(&a).unwrap()).norm() / a.norm();
    assert!(rel < 1e-6);
    let id = SensingOperator::build(&g, &s, &FilterSpec::exact(SpectralResponse::Identity)).unwrap();
    assert_eq!(id, SensingOperator::Identity);
    assert_eq!(id.apply_columns(&a).unwrap(), a);
}
