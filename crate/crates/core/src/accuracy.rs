//! Point-set statistics and the fraction of variance unexplained (FVU).
//!
//! FVU is the sum of squared distances from the data to an approximator
//! divided by the sum of squared distances to the data mean. For graphs the
//! distance is taken to the union of closed edge segments; a graph without
//! edges is treated as a set of degenerate segments (its nodes).

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::EmbeddedGraph;
use crate::vector::{dist2, dot, sub};

/// An immutable point cloud with cached mean, total variance and extent.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
    mean: Vec<f64>,
    total_variance: f64,
    diameter: f64,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyDataset)?.len();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// Builds a dataset from row-major coordinates.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if coords.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        let (mean, total_variance) = flat_mean_and_variance(dim, &coords);
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in coords.chunks_exact(dim) {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let diameter = dist2(&lo, &hi).sqrt();
        Ok(Dataset {
            dim,
            coords,
            mean,
            total_variance,
            diameter,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Σᵢ‖xᵢ − x̄‖².
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// Diagonal of the axis-aligned bounding box. Used as the length scale
    /// for convergence tolerances and placement offsets.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn is_degenerate(&self) -> bool {
        self.total_variance <= 0.0
    }

    /// Reads a CSV file with a header row and one point per row.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }

    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let dim = rdr
            .headers()
            .map_err(|e| Error::parse("<csv>", e))?
            .len();
        let mut coords = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::parse("<csv>", e))?;
            if record.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: record.len(),
                });
            }
            for field in record.iter() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::parse("<csv>", format!("row {}: bad number {field:?}", row + 1))
                })?;
                coords.push(v);
            }
        }
        Self::from_flat(dim, coords)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv_to(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn flat_mean_and_variance(dim: usize, coords: &[f64]) -> (Vec<f64>, f64) {
    let n = (coords.len() / dim) as f64;
    let mut mean = vec![0.0; dim];
    for p in coords.chunks_exact(dim) {
        for k in 0..dim {
            mean[k] += p[k];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let var = coords.chunks_exact(dim).map(|p| dist2(p, &mean)).sum();
    (mean, var)
}

/// Componentwise mean and Σ‖xᵢ − x̄‖² of a point list.
pub fn mean_and_variance(points: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let ds = Dataset::new(points.to_vec())?;
    Ok((ds.mean, ds.total_variance))
}

/// An infinite line through `base` along the unit vector `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
}

impl Line {
    /// Normalizes `direction`; fails on a zero direction.
    pub fn new(base: Vec<f64>, direction: Vec<f64>) -> Result<Self> {
        if base.len() != direction.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                found: direction.len(),
            });
        }
        let norm = dot(&direction, &direction).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidConfig("line direction must be nonzero".into()));
        }
        let direction = direction.iter().map(|v| v / norm).collect();
        Ok(Line { base, direction })
    }

    pub fn squared_distance(&self, x: &[f64]) -> f64 {
        let rel = sub(x, &self.base);
        let t = dot(&rel, &self.direction);
        (dot(&rel, &rel) - t * t).max(0.0)
    }
}

/// Squared Euclidean distance from `x` to the closed segment `[a, b]`.
pub fn squared_point_to_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut t = 0.0;
    for k in 0..x.len() {
        let ab = b[k] - a[k];
        ab2 += ab * ab;
        t += (x[k] - a[k]) * ab;
    }
    if ab2 <= 0.0 {
        return dist2(x, a);
    }
    let t = (t / ab2).clamp(0.0, 1.0);
    let mut d = 0.0;
    for k in 0..x.len() {
        let r = x[k] - (a[k] + t * (b[k] - a[k]));
        d += r * r;
    }
    d
}

pub fn point_to_segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
    for v in [a, b] {
        if v.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: v.len(),
            });
        }
    }
    Ok(squared_point_to_segment(x, a, b).sqrt())
}

fn check_nondegenerate(data: &Dataset) -> Result<()> {
    if data.is_degenerate() {
        Err(Error::DegenerateDataset)
    } else {
        Ok(())
    }
}

pub fn fvu_line(data: &Dataset, line: &Line) -> Result<f64> {
    check_nondegenerate(data)?;
    if line.base.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: line.base.len(),
        });
    }
    let resid: f64 = data.points().map(|x| line.squared_distance(x)).sum();
    Ok(resid / data.total_variance())
}

/// Squared distance from `x` to the union of the graph's edge segments, or
/// to its nearest node when the graph has no edges.
pub fn squared_distance_to_graph(x: &[f64], graph: &EmbeddedGraph) -> f64 {
    if graph.edges().is_empty() {
        return graph
            .positions()
            .iter()
            .map(|v| dist2(x, v))
            .fold(f64::INFINITY, f64::min);
    }
    graph
        .edges()
        .iter()
        .map(|&(a, b)| squared_point_to_segment(x, graph.position(a), graph.position(b)))
        .fold(f64::INFINITY, f64::min)
}

/// Per-point squared distances to the graph, in data order.
pub fn squared_distances_to_graph(data: &Dataset, graph: &EmbeddedGraph) -> Vec<f64> {
    data.points()
        .map(|x| squared_distance_to_graph(x, graph))
        .collect()
}

pub fn fvu_graph(data: &Dataset, graph: &EmbeddedGraph) -> Result<f64> {
    check_nondegenerate(data)?;
    if graph.node_count() == 0 {
        return Err(Error::TooFewNodes {
            needed: 1,
            found: 0,
        });
    }
    if graph.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: graph.dim(),
        });
    }
    let resid: f64 = squared_distances_to_graph(data, graph).iter().sum();
    Ok(resid / data.total_variance())
}

/// First principal axis of a dataset together with the standard deviation
/// of the data along it.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAxis {
    pub line: Line,
    /// Largest eigenvalue of the covariance matrix (normalized by n).
    pub eigenvalue: f64,
    pub sigma: f64,
}

/// Leading eigenvector of the (1/n)-normalized covariance matrix.
///
/// The sign is fixed so that the largest-magnitude component is positive.
/// With tied top eigenvalues the returned axis is whichever the eigensolver
/// reports first.
pub fn first_principal_component(data: &Dataset) -> Result<PrincipalAxis> {
    check_nondegenerate(data)?;
    let d = data.dim();
    let n = data.len() as f64;
    let mean = data.mean();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for x in data.points() {
        for i in 0..d {
            let ci = x[i] - mean[i];
            for j in i..d {
                cov[(i, j)] += ci * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = cov[(i, j)] / n;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(cov);
    let top = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > eig.eigenvalues[best] { i } else { best });
    let mut direction: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
    let lead = direction
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if v.abs() > direction[best].abs() { i } else { best });
    if direction[lead] < 0.0 {
        direction.iter_mut().for_each(|v| *v = -*v);
    }
    let eigenvalue = eig.eigenvalues[top].max(0.0);
    Ok(PrincipalAxis {
        line: Line::new(mean.to_vec(), direction)?,
        eigenvalue,
        sigma: eigenvalue.sqrt(),
    })
}
