//! Synthetic stand-in for a monthly sea-surface-temperature grid.
//!
//! A 1-degree grid off a coastline (land cells missing), 60 monthly
//! snapshots: a meridional gradient, a seasonal cycle whose amplitude and
//! phase vary with latitude, a few drifting warm and cold eddies and a
//! little cell noise.

use std::f64::consts::PI;

use dynsense_core::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::GridData;

pub const STANDIN_MONTHS: usize = 60;
pub const LAT_RANGE: [f64; 2] = [30.0, 50.0];
pub const LON_RANGE: [f64; 2] = [-130.0, -115.0];

fn is_land(lat: f64, lon: f64) -> bool {
    lon > -117.0 - 0.25 * (lat - LAT_RANGE[0])
}

struct Eddy {
    lat: f64,
    lon: f64,
    drift_lat: f64,
    drift_lon: f64,
    radius: f64,
    strength: f64,
}

/// Full grid including land cells (all-`NaN` rows), so the missing-value
/// path is exercised when read back.
pub fn sst_standin(seed: u64) -> (Vec<[f64; 2]>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eddies: Vec<Eddy> = (0..4)
        .map(|_| Eddy {
            lat: rng.random_range(32.0..48.0),
            lon: rng.random_range(-129.0..-121.0),
            drift_lat: rng.random_range(-0.25..0.25),
            drift_lon: rng.random_range(-0.15..0.15),
            radius: rng.random_range(2.0..4.0),
            strength: rng.random_range(-1.5..1.5),
        })
        .collect();
    let mut coords = Vec::new();
    for lat in (LAT_RANGE[0] as i32)..=(LAT_RANGE[1] as i32) {
        for lon in (LON_RANGE[0] as i32)..=(LON_RANGE[1] as i32) {
            coords.push([lat as f64, lon as f64]);
        }
    }
    let mut values = DMatrix::from_element(coords.len(), STANDIN_MONTHS, f64::NAN);
    for (i, &[lat, lon]) in coords.iter().enumerate() {
        if is_land(lat, lon) {
            continue;
        }
        let rel = (lat - LAT_RANGE[0]) / (LAT_RANGE[1] - LAT_RANGE[0]);
        let base = 24.0 - 12.0 * rel + 0.1 * (lon - LON_RANGE[0]);
        let amplitude = 1.5 + 2.5 * rel;
        let phase = 0.6 * rel;
        for m in 0..STANDIN_MONTHS {
            let season = amplitude * (2.0 * PI * m as f64 / 12.0 - PI / 2.0 - phase).sin();
            let eddy: f64 = eddies
                .iter()
                .map(|e| {
                    let dlat = lat - (e.lat + e.drift_lat * m as f64);
                    let dlon = lon - (e.lon + e.drift_lon * m as f64);
                    e.strength * (-(dlat * dlat + dlon * dlon) / (2.0 * e.radius * e.radius)).exp()
                })
                .sum();
            values[(i, m)] = base + season + eddy + rng.random_range(-0.05..0.05);
        }
    }
    (coords, values)
}

/// Valid (ocean) cells of [`sst_standin`].
pub fn sst_standin_grid(seed: u64) -> GridData {
    let (coords, values) = sst_standin(seed);
    let keep: Vec<usize> = (0..coords.len()).filter(|&i| values[(i, 0)].is_finite()).collect();
    GridData { coordinates: keep.iter().map(|&i| coords[i]).collect(), values: values.select_rows(keep.iter()) }
}
