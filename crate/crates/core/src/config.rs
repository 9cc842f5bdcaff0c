//! Run configuration, read from a TOML document with one section per module.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{threshold_for, BackboneParams, Variant};
use crate::error::{Error, Result};
use crate::gsom::SomConfig;
use crate::principal_tree::ElasticConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkSection {
    pub n_points: usize,
    /// Benchmark `i` of the 3×3 matrix (pattern-major) uses `seed + i`.
    pub seed: u64,
    pub params: BackboneParams,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        BenchmarkSection {
            n_points: 1000,
            seed: 2013,
            params: BackboneParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdSection {
    pub thin: f64,
    pub scattered: f64,
    pub scattered_noised: f64,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        ThresholdSection {
            thin: threshold_for(Variant::Thin),
            scattered: threshold_for(Variant::Scattered),
            scattered_noised: threshold_for(Variant::ScatteredNoised),
        }
    }
}

impl ThresholdSection {
    pub fn get(&self, variant: Variant) -> f64 {
        match variant {
            Variant::Thin => self.thin,
            Variant::Scattered => self.scattered,
            Variant::ScatteredNoised => self.scattered_noised,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    pub plots: bool,
    /// Lowest top order shown in barcodes.
    pub barcode_order: usize,
    /// When false, `wall_time_ms` is written as 0 so reports are reproducible
    /// byte for byte; timings then go to `timings.csv`.
    pub record_wall_time: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            plots: true,
            barcode_order: 4,
            record_wall_time: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub benchmark: BenchmarkSection,
    pub thresholds: ThresholdSection,
    pub gsom: SomConfig,
    pub principal_tree: ElasticConfig,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::parse("<config>", e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path, message),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.gsom.validate()?;
        self.principal_tree.validate()?;
        for v in Variant::ALL {
            let t = self.thresholds.get(v);
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidConfig(format!("threshold for {v} must lie in (0, 1)")));
            }
        }
        if self.benchmark.n_points < 10 {
            return Err(Error::InvalidConfig("benchmark.n_points must be ≥ 10".into()));
        }
        Ok(())
    }
}
