//! Synthetic benchmark point clouds: sinus, spiral and a branching tree,
//! each in thin, scattered and scattered-and-noised variants.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::accuracy::{squared_point_to_segment, Dataset};
use crate::error::{Error, Result};

/// Identity of the random source, recorded alongside generated data.
pub const GENERATOR_ID: &str = "rand_chacha::ChaCha8Rng::seed_from_u64 (rand_chacha 0.9)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Sinus,
    Spiral,
    Tree,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Sinus, Pattern::Spiral, Pattern::Tree];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Sinus => "sinus",
            Pattern::Spiral => "spiral",
            Pattern::Tree => "tree",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown pattern {s:?}; valid patterns: sinus, spiral, tree"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Thin,
    Scattered,
    ScatteredNoised,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Thin, Variant::Scattered, Variant::ScatteredNoised];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Thin => "thin",
            Variant::Scattered => "scattered",
            Variant::ScatteredNoised => "scattered-noised",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "thin" => Ok(Variant::Thin),
            "scattered" | "s" => Ok(Variant::Scattered),
            "scattered-noised" | "sn" | "noised" => Ok(Variant::ScatteredNoised),
            _ => Err(Error::InvalidConfig(format!(
                "unknown variant {s:?}; valid variants: thin, scattered, scattered-noised"
            ))),
        }
    }
}

/// FVU stopping threshold for a benchmark variant.
pub fn threshold_for(variant: Variant) -> f64 {
    match variant {
        Variant::Thin => 0.001,
        Variant::Scattered => 0.002,
        Variant::ScatteredNoised => 0.01,
    }
}

/// Shape and noise parameters shared by all benchmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackboneParams {
    pub sinus_amplitude: f64,
    pub sinus_periods: f64,
    pub spiral_a: f64,
    pub spiral_theta_start: f64,
    pub spiral_theta_end: f64,
    pub tree_trunk_length: f64,
    pub tree_branch_angle_deg: f64,
    pub tree_child_ratio: f64,
    /// Gaussian jitter σ as a fraction of the backbone bounding-box diagonal.
    pub jitter_fraction: f64,
    /// Fraction of points replaced by uniform background noise.
    pub noise_fraction: f64,
    /// Relative inflation of the bounding box the noise is drawn from.
    pub noise_box_inflation: f64,
}

impl Default for BackboneParams {
    fn default() -> Self {
        BackboneParams {
            sinus_amplitude: 3.0,
            sinus_periods: 1.0,
            spiral_a: 0.3,
            spiral_theta_start: 2.0 * PI,
            spiral_theta_end: 4.0 * PI,
            tree_trunk_length: 1.0,
            tree_branch_angle_deg: 40.0,
            tree_child_ratio: 0.6,
            jitter_fraction: 0.007,
            noise_fraction: 0.02,
            noise_box_inflation: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub pattern: Pattern,
    pub variant: Variant,
    pub n_points: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: BackboneParams,
}

impl BenchmarkSpec {
    pub fn new(pattern: Pattern, variant: Variant, n_points: usize, seed: u64) -> Self {
        BenchmarkSpec {
            pattern,
            variant,
            n_points,
            seed,
            params: BackboneParams::default(),
        }
    }

    pub fn fvu_threshold(&self) -> f64 {
        threshold_for(self.variant)
    }

    pub fn backbone(&self) -> Backbone {
        Backbone::new(self.pattern, &self.params)
    }

    /// Sidecar document describing how a dataset was produced.
    pub fn sidecar_json(&self) -> String {
        let doc = serde_json::json!({
            "pattern": self.pattern,
            "variant": self.variant,
            "n_points": self.n_points,
            "seed": self.seed,
            "fvu_threshold": self.fvu_threshold(),
            "generator": GENERATOR_ID,
            "params": self.params,
        });
        serde_json::to_string_pretty(&doc).expect("spec serializes") + "\n"
    }

    /// Writes `<path>` as CSV and `<stem>.spec.json` next to it.
    pub fn write(&self, csv_path: impl AsRef<Path>) -> Result<Dataset> {
        let csv_path = csv_path.as_ref();
        let data = generate(self)?;
        data.write_csv(csv_path)?;
        let sidecar = sidecar_path(csv_path);
        std::fs::write(&sidecar, self.sidecar_json()).map_err(|e| Error::io(&sidecar, e))?;
        Ok(data)
    }
}

pub fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    csv_path.with_file_name(format!("{stem}.spec.json"))
}

/// Reads the spec back from a sidecar document.
pub fn spec_from_sidecar(text: &str) -> Result<BenchmarkSpec> {
    serde_json::from_str(text).map_err(|e| Error::parse("<spec.json>", e))
}

/// The generating curve of a benchmark, as a union of parameterised pieces.
#[derive(Debug, Clone)]
pub struct Backbone {
    pattern: Pattern,
    params: BackboneParams,
    segments: Vec<([f64; 2], [f64; 2])>,
}

impl Backbone {
    pub fn new(pattern: Pattern, params: &BackboneParams) -> Self {
        let segments = if pattern == Pattern::Tree {
            tree_segments(params)
        } else {
            Vec::new()
        };
        Backbone {
            pattern,
            params: params.clone(),
            segments,
        }
    }

    /// Point at parameter `u ∈ [0, 1]`. Tree points are uniform by arc length.
    pub fn point(&self, u: f64) -> [f64; 2] {
        let p = &self.params;
        match self.pattern {
            Pattern::Sinus => {
                let t = u * 2.0 * PI * p.sinus_periods;
                [t, p.sinus_amplitude * t.sin()]
            }
            Pattern::Spiral => {
                let th = p.spiral_theta_start + u * (p.spiral_theta_end - p.spiral_theta_start);
                let r = p.spiral_a * th;
                [r * th.cos(), r * th.sin()]
            }
            Pattern::Tree => {
                let total: f64 = self.segments.iter().map(|(a, b)| seg_len(a, b)).sum();
                let mut s = u.clamp(0.0, 1.0) * total;
                for (a, b) in &self.segments {
                    let l = seg_len(a, b);
                    if s <= l {
                        let f = if l > 0.0 { s / l } else { 0.0 };
                        return [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])];
                    }
                    s -= l;
                }
                self.segments.last().map(|s| s.1).unwrap_or([0.0, 0.0])
            }
        }
    }

    /// Dense polyline pieces for distance queries.
    pub fn polylines(&self) -> Vec<Vec<[f64; 2]>> {
        match self.pattern {
            Pattern::Tree => self.segments.iter().map(|(a, b)| vec![*a, *b]).collect(),
            _ => {
                let m = 20_000;
                vec![(0..=m).map(|i| self.point(i as f64 / m as f64)).collect()]
            }
        }
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for line in self.polylines() {
            for p in line {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        (lo, hi)
    }

    pub fn diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        seg_len(&lo, &hi)
    }

    /// Distance from `x` to the backbone (curves via a dense polyline).
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.polylines()
            .iter()
            .flat_map(|line| line.windows(2).map(|w| squared_point_to_segment(x, &w[0], &w[1])))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

fn seg_len(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Trunk plus two levels of symmetric binary branching (7 segments).
fn tree_segments(p: &BackboneParams) -> Vec<([f64; 2], [f64; 2])> {
    let mut out = Vec::with_capacity(7);
    let half = p.tree_branch_angle_deg.to_radians();
    let mut tips = vec![([0.0, 0.0], PI / 2.0, p.tree_trunk_length)];
    for level in 0..3 {
        let mut next = Vec::new();
        for (start, angle, len) in tips {
            let end = [start[0] + len * angle.cos(), start[1] + len * angle.sin()];
            out.push((start, end));
            if level < 2 {
                let child = len * p.tree_child_ratio;
                next.push((end, angle + half, child));
                next.push((end, angle - half, child));
            }
        }
        tips = next;
    }
    out
}

/// Deterministic point cloud for `spec`.
pub fn generate(spec: &BenchmarkSpec) -> Result<Dataset> {
    if spec.n_points < 10 {
        return Err(Error::InvalidConfig("benchmarks need at least 10 points".into()));
    }
    let backbone = spec.backbone();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_noise = match spec.variant {
        Variant::ScatteredNoised => (spec.params.noise_fraction * spec.n_points as f64).round() as usize,
        _ => 0,
    };
    let sigma = match spec.variant {
        Variant::Thin => 0.0,
        _ => spec.params.jitter_fraction * backbone.diagonal(),
    };
    let mut coords = Vec::with_capacity(2 * spec.n_points);
    for _ in 0..spec.n_points - n_noise {
        let u: f64 = rng.random();
        let p = backbone.point(u);
        if sigma > 0.0 {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            coords.extend_from_slice(&[p[0] + sigma * dx, p[1] + sigma * dy]);
        } else {
            coords.extend_from_slice(&p);
        }
    }
    if n_noise > 0 {
        let (lo, hi) = backbone.bounding_box();
        let pad = [0, 1].map(|k| 0.5 * spec.params.noise_box_inflation * (hi[k] - lo[k]));
        for _ in 0..n_noise {
            for k in 0..2 {
                let v = rng.random_range(lo[k] - pad[k]..=hi[k] + pad[k]);
                coords.push(v);
            }
        }
    }
    Dataset::from_flat(2, coords)
}
