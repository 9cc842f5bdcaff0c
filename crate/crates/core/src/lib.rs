//! Graph-based data approximators and their complexity measures.
//!
//! Two fitters are provided: a growing self-organizing polygonal line
//! ([`gsom`]) and an elastic principal tree grown by a graph grammar
//! ([`principal_tree`]). Both produce an [`EmbeddedGraph`] which can be scored
//! by accuracy ([`accuracy::fvu_graph`]) and by complexity: node count, total
//! length, structural barcode and geometrical complexity ([`graph`]).
//! [`benchmarks`] generates the synthetic point clouds and [`harness`] runs
//! the method comparison over them.

pub mod accuracy;
pub mod benchmarks;
pub mod config;
pub mod error;
pub mod graph;
pub mod gsom;
pub mod harness;
pub mod principal_tree;
pub mod report;
pub mod svg;
pub mod vector;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use accuracy::{Dataset, Line};
pub use error::{Error, Result};
pub use graph::{Barcode, EmbeddedGraph, Star};

/// How a fit ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitStatus {
    /// FVU reached the threshold.
    Converged,
    /// Growth stopped without reaching the threshold.
    Stalled,
    /// The fit returned an error; measures are not available.
    Failed,
}

impl fmt::Display for FitStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitStatus::Converged => "converged",
            FitStatus::Stalled => "stalled",
            FitStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "GSOM")]
    Gsom,
    #[serde(rename = "PT")]
    PrincipalTree,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Gsom, Method::PrincipalTree];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Gsom => "GSOM",
            Method::PrincipalTree => "PT",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gsom" | "som" => Ok(Method::Gsom),
            "pt" | "tree" | "principal-tree" => Ok(Method::PrincipalTree),
            _ => Err(Error::InvalidConfig(format!(
                "unknown method {s:?} (expected gsom or pt)"
            ))),
        }
    }
}
