//! File formats: graph edge lists, gridded data tables and result files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use dynsense_core::graph::{knn_graph, Graph, MAX_GENERATION_ATTEMPTS};
use dynsense_core::{DMatrix, Error as CoreError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Error, Result};

/// Writes `nodes N`, one `u v weight` line per edge and, when present, a
/// `coords` block with one `x y` line per node.
pub fn write_edge_list<W: Write>(graph: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "nodes {}", graph.n_nodes())?;
    for (u, v, weight) in graph.edges() {
        writeln!(w, "{u} {v} {weight}")?;
    }
    if let Some(coords) = graph.coordinates() {
        writeln!(w, "coords")?;
        for p in coords {
            writeln!(w, "{} {}", p[0], p[1])?;
        }
    }
    Ok(())
}

/// Inverse of [`write_edge_list`]. Blank lines and `#` comments are skipped.
pub fn read_edge_list<R: Read>(r: R) -> Result<Graph> {
    let mut n = None;
    let mut edges = Vec::new();
    let mut coords: Option<Vec<[f64; 2]>> = None;
    for (idx, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let bad = |m: &str| Error::Parse { line: lineno, message: m.to_string() };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if n.is_none() {
            match fields.as_slice() {
                ["nodes", count] => n = Some(count.parse::<usize>().map_err(|_| bad("bad node count"))?),
                _ => return Err(bad("expected `nodes N`")),
            }
            continue;
        }
        if fields == ["coords"] {
            coords = Some(Vec::new());
            continue;
        }
        if let Some(c) = coords.as_mut() {
            let [x, y] = fields.as_slice() else { return Err(bad("expected `x y`")) };
            c.push([x.parse().map_err(|_| bad("bad x"))?, y.parse().map_err(|_| bad("bad y"))?]);
        } else {
            let [u, v, weight] = fields.as_slice() else { return Err(bad("expected `u v weight`")) };
            edges.push((
                u.parse().map_err(|_| bad("bad node index"))?,
                v.parse().map_err(|_| bad("bad node index"))?,
                weight.parse().map_err(|_| bad("bad weight"))?,
            ));
        }
    }
    let n = n.ok_or(Error::Parse { line: 0, message: "empty graph file".into() })?;
    let graph = Graph::from_edges(n, &edges)?;
    Ok(match coords {
        Some(c) => graph.with_coordinates(c)?,
        None => graph,
    })
}

/// Valid locations of a gridded table and their time series.
#[derive(Debug, Clone, PartialEq)]
pub struct GridData {
    /// `[lat, lon]` per location.
    pub coordinates: Vec<[f64; 2]>,
    /// One row per location, one column per time step.
    pub values: DMatrix<f64>,
}

/// Reads `lat,lon,t_0,...,t_{T-1}` rows (with a header line). Locations with
/// any missing value (`NaN` or empty) or outside the optional boxes are
/// dropped.
pub fn read_grid_csv<R: Read>(r: R, lat_range: Option<[f64; 2]>, lon_range: Option<[f64; 2]>) -> Result<GridData> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let width = reader.headers()?.len();
    if width < 3 {
        return Err(Error::Parse { line: 1, message: "need lat, lon and at least one time column".into() });
    }
    let inside = |x: f64, range: Option<[f64; 2]>| range.is_none_or(|[lo, hi]| x >= lo && x <= hi);
    let mut coordinates = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        if record.len() != width {
            return Err(Error::Parse { line, message: format!("expected {width} fields, got {}", record.len()) });
        }
        let parse = |s: &str| -> Result<f64> {
            if s.is_empty() {
                return Ok(f64::NAN);
            }
            s.parse::<f64>().map_err(|_| Error::Parse { line, message: format!("not a number: {s:?}") })
        };
        let lat = parse(&record[0])?;
        let lon = parse(&record[1])?;
        let values = record.iter().skip(2).map(parse).collect::<Result<Vec<f64>>>()?;
        if !lat.is_finite() || !lon.is_finite() || values.iter().any(|v| !v.is_finite()) {
            continue;
        }
        if !inside(lat, lat_range) || !inside(lon, lon_range) {
            continue;
        }
        coordinates.push([lat, lon]);
        rows.extend(values);
    }
    let values = DMatrix::from_row_slice(coordinates.len(), width - 2, &rows);
    Ok(GridData { coordinates, values })
}

pub fn write_grid_csv<W: Write>(grid: &GridData, w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    let mut header = vec!["lat".to_string(), "lon".to_string()];
    header.extend((0..grid.values.ncols()).map(|t| format!("t_{t}")));
    writer.write_record(&header)?;
    for (i, c) in grid.coordinates.iter().enumerate() {
        let mut row = vec![c[0].to_string(), c[1].to_string()];
        row.extend(grid.values.row(i).iter().map(|v| v.to_string()));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Randomly keeps `n_nodes` locations (kept in file order) and connects
/// them with a `knn` graph on `[lat, lon]`. Draws again when the graph is
/// disconnected.
pub fn sample_grid_graph(grid: &GridData, n_nodes: usize, knn: usize, seed: u64) -> Result<(Graph, DMatrix<f64>)> {
    let available = grid.coordinates.len();
    if available < n_nodes {
        return Err(Error::NotEnoughLocations { available, requested: n_nodes });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let mut keep = rand::seq::index::sample(&mut rng, available, n_nodes).into_vec();
        keep.sort_unstable();
        let coords: Vec<[f64; 2]> = keep.iter().map(|&i| grid.coordinates[i]).collect();
        match knn_graph(&coords, knn) {
            Ok(graph) => return Ok((graph, grid.values.select_rows(keep.iter()))),
            Err(CoreError::Disconnected { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(CoreError::GenerationFailed { attempts: MAX_GENERATION_ATTEMPTS }.into())
}

/// Reads a grid file and builds the sampled graph and its `N x T` signals.
pub fn ingest_grid_csv(
    path: &Path,
    n_nodes: usize,
    knn: usize,
    seed: u64,
    lat_range: Option<[f64; 2]>,
    lon_range: Option<[f64; 2]>,
) -> Result<(Graph, DMatrix<f64>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let grid = read_grid_csv(file, lat_range, lon_range)?;
    sample_grid_graph(&grid, n_nodes, knn, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseRow {
    pub t: usize,
    pub method: String,
    pub mean_mse: f64,
    pub std_mse: f64,
}

pub fn write_csv_rows<W: Write, T: Serialize>(rows: &[T], w: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoveRecord {
    pub sensor: usize,
    pub from: usize,
    pub to: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub method: String,
    pub replicate: usize,
    pub t: usize,
    pub positions: Vec<usize>,
    pub moves: Vec<MoveRecord>,
}

pub fn write_jsonl<W: Write, T: Serialize>(records: &[T], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}
