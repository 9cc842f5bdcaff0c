//! Fitting entry points and the method comparison over the benchmark matrix.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::accuracy::Dataset;
use crate::benchmarks::{generate, BenchmarkSpec, Pattern, Variant};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::graph::EmbeddedGraph;
use crate::gsom::fit_gsom;
use crate::principal_tree::fit_principal_tree;
use crate::report::{write_reports, FitReport};
use crate::svg::render_svg;
use crate::{FitStatus, Method};

/// A fitted graph with its report row.
#[derive(Debug, Clone)]
pub struct FitOutput {
    pub graph: EmbeddedGraph,
    pub report: FitReport,
}

/// Fits `method` to `data` with the given FVU threshold, overriding the
/// threshold in the method's section of `cfg`.
pub fn run_fit(
    method: Method,
    data: &Dataset,
    threshold: f64,
    cfg: &RunConfig,
    pattern: &str,
    variant: &str,
) -> Result<FitOutput> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig("threshold must lie in (0, 1)".into()));
    }
    let start = Instant::now();
    let (graph, fvu, status) = match method {
        Method::Gsom => {
            let mut som = cfg.gsom.clone();
            som.fvu_threshold = threshold;
            let fit = fit_gsom(data, &som)?;
            (fit.chain.to_graph(), fit.fvu, fit.status)
        }
        Method::PrincipalTree => {
            let mut el = cfg.principal_tree.clone();
            el.fvu_threshold = threshold;
            let fit = fit_principal_tree(data, &el)?;
            (fit.graph, fit.fvu, fit.status)
        }
    };
    let wall = start.elapsed().as_millis() as u64;
    let report = FitReport::measure(
        pattern,
        variant,
        method,
        &graph,
        fvu,
        status,
        wall,
        cfg.output.barcode_order,
    );
    Ok(FitOutput { graph, report })
}

/// The nine benchmark specs in pattern-major order, with seeds `seed + i`.
pub fn benchmark_matrix(cfg: &RunConfig) -> Vec<BenchmarkSpec> {
    let mut out = Vec::with_capacity(9);
    for pattern in Pattern::ALL {
        for variant in Variant::ALL {
            let mut spec = BenchmarkSpec::new(
                pattern,
                variant,
                cfg.benchmark.n_points,
                cfg.benchmark.seed + out.len() as u64,
            );
            spec.params = cfg.benchmark.params.clone();
            out.push(spec);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub rows: Vec<FitReport>,
    pub report_path: PathBuf,
}

/// Column winners (minimum) for one (pattern, variant) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Winners {
    pub pattern: String,
    pub variant: String,
    pub n_nodes: Option<Method>,
    pub gc: Option<Method>,
    pub length: Option<Method>,
}

/// Minimum of each complexity column over the methods with usable rows.
/// Exact ties produce `None`.
pub fn winners(rows: &[FitReport]) -> Vec<Winners> {
    let mut out: Vec<Winners> = Vec::new();
    for r in rows {
        if out.iter().any(|w| w.pattern == r.pattern && w.variant == r.variant) {
            continue;
        }
        let group: Vec<&FitReport> = rows
            .iter()
            .filter(|x| x.pattern == r.pattern && x.variant == r.variant && x.status != FitStatus::Failed)
            .collect();
        let pick = |key: &dyn Fn(&FitReport) -> f64| -> Option<Method> {
            let best = group.iter().map(|x| key(x)).fold(f64::INFINITY, f64::min);
            let hits: Vec<_> = group.iter().filter(|x| key(x) == best).collect();
            (hits.len() == 1).then(|| hits[0].method)
        };
        out.push(Winners {
            pattern: r.pattern.clone(),
            variant: r.variant.clone(),
            n_nodes: pick(&|x| x.n_nodes as f64),
            gc: pick(&|x| x.gc),
            length: pick(&|x| x.length),
        });
    }
    out
}

fn winners_csv(ws: &[Winners]) -> String {
    let name = |m: Option<Method>| m.map(|m| m.to_string()).unwrap_or_else(|| "tie".into());
    let mut s = String::from("pattern,variant,n_nodes,gc,length\n");
    for w in ws {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            w.pattern,
            w.variant,
            name(w.n_nodes),
            name(w.gc),
            name(w.length)
        );
    }
    s
}

/// Table-1 style markdown: one row per benchmark, both methods side by side,
/// winners marked with `*`.
pub fn comparison_table(rows: &[FitReport]) -> String {
    let ws = winners(rows);
    let mut s = String::from(
        "| pattern | variant | GSOM N | GSOM FVU | GSOM GC | GSOM length | PT N | PT FVU | PT GC | PT length |\n\
         |---|---|---|---|---|---|---|---|---|---|\n",
    );
    for w in &ws {
        let _ = write!(s, "| {} | {} |", w.pattern, w.variant);
        for m in Method::ALL {
            let Some(r) = rows
                .iter()
                .find(|r| r.pattern == w.pattern && r.variant == w.variant && r.method == m)
            else {
                s.push_str(" – | – | – | – |");
                continue;
            };
            let mark = |win: Option<Method>| if win == Some(m) { "*" } else { "" };
            let _ = write!(
                s,
                " {}{} | {:.2}% | {}{:.2} | {}{:.2} |",
                mark(w.n_nodes),
                r.n_nodes,
                100.0 * r.fvu,
                mark(w.gc),
                r.gc,
                mark(w.length),
                r.length
            );
        }
        s.push('\n');
    }
    s
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Generates all nine benchmarks, fits both methods to each, and writes
/// `report.csv`, `winners.csv`, `table.md`, `timings.csv`, per-run graph
/// JSON and (optionally) SVG plots into `out_dir`.
pub fn run_compare(cfg: &RunConfig, out_dir: impl AsRef<Path>) -> Result<CompareOutcome> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let specs = benchmark_matrix(cfg);
    let datasets: Vec<Dataset> = specs.iter().map(generate).collect::<Result<_>>()?;
    for (spec, data) in specs.iter().zip(&datasets) {
        let path = out_dir.join(format!("{}-{}.csv", spec.pattern, spec.variant));
        data.write_csv(&path)?;
        let side = crate::benchmarks::sidecar_path(&path);
        write_text(&side, &spec.sidecar_json())?;
    }

    let jobs: Vec<(usize, Method)> = (0..specs.len())
        .flat_map(|i| Method::ALL.map(|m| (i, m)))
        .collect();
    let fits: Vec<(FitReport, Option<EmbeddedGraph>)> = jobs
        .par_iter()
        .map(|&(i, method)| {
            let spec = &specs[i];
            let threshold = cfg.thresholds.get(spec.variant);
            let (p, v) = (spec.pattern.name(), spec.variant.name());
            match run_fit(method, &datasets[i], threshold, cfg, p, v) {
                Ok(out) => (out.report, Some(out.graph)),
                Err(_) => (FitReport::failed(p, v, method), None),
            }
        })
        .collect();

    let mut timings = String::from("pattern,variant,method,wall_time_ms\n");
    let mut rows = Vec::with_capacity(fits.len());
    for ((i, method), (mut report, graph)) in jobs.iter().zip(fits) {
        let spec = &specs[*i];
        let _ = writeln!(
            timings,
            "{},{},{},{}",
            spec.pattern, spec.variant, method, report.wall_time_ms
        );
        if !cfg.output.record_wall_time {
            report.wall_time_ms = 0;
        }
        if let Some(g) = graph {
            let stem = format!("{}-{}-{}", spec.pattern, spec.variant, method.to_string().to_lowercase());
            g.write_json(out_dir.join(format!("{stem}.graph.json")))?;
            if cfg.output.plots {
                let svg = render_svg(&datasets[*i], Some(&g))?;
                write_text(&out_dir.join(format!("{stem}.svg")), &svg)?;
            }
        }
        rows.push(report);
    }

    let report_path = out_dir.join("report.csv");
    write_reports(&rows, &report_path)?;
    write_text(&out_dir.join("winners.csv"), &winners_csv(&winners(&rows)))?;
    write_text(&out_dir.join("table.md"), &comparison_table(&rows))?;
    write_text(&out_dir.join("timings.csv"), &timings)?;
    write_text(&out_dir.join("config.toml"), &cfg.to_toml())?;
    Ok(CompareOutcome { rows, report_path })
}
