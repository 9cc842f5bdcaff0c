//! Per-fit result records and their CSV layout.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{geometrical_complexity, graph_length, structural_barcode, EmbeddedGraph};
use crate::{FitStatus, Method};

pub const REPORT_HEADER: [&str; 10] = [
    "pattern",
    "variant",
    "method",
    "n_nodes",
    "fvu",
    "gc",
    "length",
    "barcode",
    "status",
    "wall_time_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub pattern: String,
    pub variant: String,
    pub method: Method,
    pub n_nodes: usize,
    pub fvu: f64,
    pub gc: f64,
    pub length: f64,
    pub barcode: String,
    pub status: FitStatus,
    pub wall_time_ms: u64,
}

impl FitReport {
    /// Measures a fitted graph.
    #[allow(clippy::too_many_arguments)]
    pub fn measure(
        pattern: &str,
        variant: &str,
        method: Method,
        graph: &EmbeddedGraph,
        fvu: f64,
        status: FitStatus,
        wall_time_ms: u64,
        barcode_order: usize,
    ) -> Self {
        FitReport {
            pattern: pattern.to_string(),
            variant: variant.to_string(),
            method,
            n_nodes: graph.node_count(),
            fvu,
            gc: geometrical_complexity(graph),
            length: graph_length(graph),
            barcode: structural_barcode(graph, barcode_order).to_string(),
            status,
            wall_time_ms,
        }
    }

    /// A row for a fit that returned an error.
    pub fn failed(pattern: &str, variant: &str, method: Method) -> Self {
        FitReport {
            pattern: pattern.to_string(),
            variant: variant.to_string(),
            method,
            n_nodes: 0,
            fvu: f64::NAN,
            gc: f64::NAN,
            length: f64::NAN,
            barcode: String::new(),
            status: FitStatus::Failed,
            wall_time_ms: 0,
        }
    }

    fn fields(&self) -> [String; 10] {
        [
            self.pattern.clone(),
            self.variant.clone(),
            self.method.to_string(),
            self.n_nodes.to_string(),
            self.fvu.to_string(),
            self.gc.to_string(),
            self.length.to_string(),
            self.barcode.clone(),
            self.status.to_string(),
            self.wall_time_ms.to_string(),
        ]
    }
}

pub fn write_reports_to(rows: &[FitReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::parse("<report>", e);
    w.write_record(REPORT_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<report>", e))
}

pub fn write_reports(rows: &[FitReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_reports_to(rows, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_reports(path: impl AsRef<Path>) -> Result<Vec<FitReport>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
    let headers = rdr.headers().map_err(|e| Error::parse(path, e))?.clone();
    if headers.iter().ne(REPORT_HEADER) {
        return Err(Error::parse(path, "unexpected report header"));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::parse(path, format!("bad {} {:?}", REPORT_HEADER[i], &rec[i])))
        };
        let status = match &rec[8] {
            "converged" => FitStatus::Converged,
            "stalled" => FitStatus::Stalled,
            "failed" => FitStatus::Failed,
            other => return Err(Error::parse(path, format!("bad status {other:?}"))),
        };
        rows.push(FitReport {
            pattern: rec[0].to_string(),
            variant: rec[1].to_string(),
            method: rec[2].parse()?,
            n_nodes: num(3)? as usize,
            fvu: num(4)?,
            gc: num(5)?,
            length: num(6)?,
            barcode: rec[7].to_string(),
            status,
            wall_time_ms: num(9)? as u64,
        });
    }
    Ok(rows)
}
