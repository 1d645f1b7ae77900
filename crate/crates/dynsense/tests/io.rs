use dynsense::io::{ingest_grid_csv, read_edge_list, read_grid_csv, sample_grid_graph, write_edge_list, write_grid_csv, GridData};
use dynsense::standin::{sst_standin, sst_standin_grid, STANDIN_MONTHS};
use dynsense::Error;
use dynsense_core::graph::random_sensor_graph;
use dynsense_core::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn line_grid() -> GridData {
    GridData {
        coordinates: vec![[0.0, 0.0], [1.0, 0.0], [3.0, 0.0], [7.0, 0.0]],
        values: DMatrix::from_fn(4, 3, |i, t| (i * 10 + t) as f64 + 0.25),
    }
}

#[test]
fn collinear_points_give_the_expected_chain() {
    let mut buf = Vec::new();
    write_grid_csv(&line_grid(), &mut buf).unwrap();
    let grid = read_grid_csv(buf.as_slice(), None, None).unwrap();
    assert_eq!(grid, line_grid());

    let (g, values) = sample_grid_graph(&grid, 4, 1, 9).unwrap();
    assert_eq!(values, grid.values);
    // nearest-neighbour distances 1, 1, 2, 4 so sigma = 2
    let w = |d: f64| (-d * d / 8.0).exp();
    let edges: Vec<_> = g.edges().collect();
    assert_eq!(edges.len(), 3);
    for ((u, v, weight), (eu, ev, d)) in edges.into_iter().zip([(0, 1, 1.0), (1, 2, 2.0), (2, 3, 4.0)]) {
        assert_eq!((u, v), (eu, ev));
        assert!((weight - w(d)).abs() < 1e-14);
    }
}

#[test]
fn rows_with_missing_values_are_dropped() {
    let (coords, values) = sst_standin(3);
    let full = GridData { coordinates: coords.clone(), values };
    let mut buf = Vec::new();
    write_grid_csv(&full, &mut buf).unwrap();
    let read = read_grid_csv(buf.as_slice(), None, None).unwrap();
    let expected = sst_standin_grid(3);
    assert!(read.coordinates.len() < coords.len());
    assert_eq!(read.coordinates, expected.coordinates);
    assert_eq!(read.values.ncols(), STANDIN_MONTHS);
    assert!((read.values.clone() - expected.values).amax() < 1e-12);
}

#[test]
fn latitude_box_filters_locations() {
    let grid = sst_standin_grid(1);
    let mut buf = Vec::new();
    write_grid_csv(&grid, &mut buf).unwrap();
    let boxed = read_grid_csv(buf.as_slice(), Some([35.0, 40.0]), None).unwrap();
    assert!(!boxed.coordinates.is_empty());
    assert!(boxed.coordinates.iter().all(|c| (35.0..=40.0).contains(&c[0])));
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.csv");
    write_grid_csv(&sst_standin_grid(5), std::fs::File::create(&path).unwrap()).unwrap();
    let a = ingest_grid_csv(&path, 200, 5, 11, None, None).unwrap();
    let b = ingest_grid_csv(&path, 200, 5, 11, None, None).unwrap();
    let c = ingest_grid_csv(&path, 200, 5, 12, None, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.0.n_nodes(), 200);
    assert_eq!(a.1.shape(), (200, STANDIN_MONTHS));
    assert_ne!(a.1, c.1);
}

#[test]
fn too_few_locations_is_an_error() {
    let err = sample_grid_graph(&line_grid(), 10, 1, 0).unwrap_err();
    assert!(matches!(err, Error::NotEnoughLocations { available: 4, requested: 10 }));
    let missing = ingest_grid_csv(std::path::Path::new("/nonexistent/grid.csv"), 4, 1, 0, None, None);
    assert!(matches!(missing, Err(Error::Io { .. })));
}

#[test]
fn generated_graph_survives_edge_list_round_trip() {
    let g = random_sensor_graph(50, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let mut buf = Vec::new();
    write_edge_list(&g, &mut buf).unwrap();
    assert_eq!(read_edge_list(buf.as_slice()).unwrap(), g);
}
