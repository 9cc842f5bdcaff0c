use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geocomplex::benchmarks::{sidecar_path, spec_from_sidecar, BenchmarkSpec, Pattern, Variant};
use geocomplex::config::RunConfig;
use geocomplex::harness::{comparison_table, run_compare, run_fit};
use geocomplex::report::write_reports;
use geocomplex::svg::render_svg;
use geocomplex::{Dataset, EmbeddedGraph, Error, Method};

const EXIT_CODES: &str = "Exit codes: 0 ok, 2 usage error, 3 i/o error, \
4 degenerate dataset, 5 unsupported input (e.g. plotting non-2-D data).";

#[derive(Parser)]
#[command(name = "geocomplex", version, about = "Fit growing SOM polylines and elastic principal trees, and score them by accuracy and complexity.", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark dataset (CSV plus a .spec.json sidecar).
    Generate {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[arg(long = "n", default_value_t = 1000)]
        n_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Fit one method to a dataset and write its graph and report row.
    Fit {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long = "data")]
        data: PathBuf,
        #[arg(long)]
        threshold: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "out-graph")]
        out_graph: PathBuf,
        #[arg(long = "out-report")]
        out_report: PathBuf,
    },
    /// Run both methods on all nine benchmarks and write the comparison.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Render data and an optional graph as SVG (2-D only).
    Plot {
        #[arg(long = "data")]
        data: PathBuf,
        #[arg(long = "graph")]
        graph: Option<PathBuf>,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
}

fn parse_pattern(s: &str) -> Result<Pattern, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::Parse { .. } => 3,
        Error::EmptyDataset | Error::DegenerateDataset => 4,
        Error::Unsupported(_) => 5,
        _ => 2,
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

/// Pattern and variant labels from the dataset's sidecar, if present.
fn labels_for(data_path: &Path) -> (String, String) {
    let fallback = || {
        let stem = data_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".into());
        (stem, "custom".to_string())
    };
    std::fs::read_to_string(sidecar_path(data_path))
        .ok()
        .and_then(|t| spec_from_sidecar(&t).ok())
        .map(|spec| (spec.pattern.to_string(), spec.variant.to_string()))
        .unwrap_or_else(fallback)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate {
            pattern,
            variant,
            n_points,
            seed,
            out,
        } => {
            let spec = BenchmarkSpec::new(pattern, variant, n_points, seed);
            let data = spec.write(&out)?;
            eprintln!(
                "wrote {} points to {} (threshold {})",
                data.len(),
                out.display(),
                spec.fvu_threshold()
            );
        }
        Command::Fit {
            method,
            data,
            threshold,
            config,
            out_graph,
            out_report,
        } => {
            if !(threshold > 0.0 && threshold < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "threshold must lie in (0, 1), got {threshold}"
                )));
            }
            let cfg = load_config(config.as_deref())?;
            let dataset = Dataset::read_csv(&data)?;
            let (pattern, variant) = labels_for(&data);
            let out = run_fit(method, &dataset, threshold, &cfg, &pattern, &variant)?;
            out.graph.write_json(&out_graph)?;
            write_reports(std::slice::from_ref(&out.report), &out_report)?;
            let r = &out.report;
            eprintln!(
                "{} {}: N={} FVU={:.4}% GC={:.3} length={:.3} barcode={} ({})",
                r.method,
                pattern,
                r.n_nodes,
                100.0 * r.fvu,
                r.gc,
                r.length,
                r.barcode,
                r.status
            );
        }
        Command::Compare { config, out_dir } => {
            let cfg = load_config(config.as_deref())?;
            let outcome = run_compare(&cfg, &out_dir)?;
            print!("{}", comparison_table(&outcome.rows));
            eprintln!("report written to {}", outcome.report_path.display());
        }
        Command::Plot { data, graph, out } => {
            let dataset = Dataset::read_csv(&data)?;
            let graph = graph.map(EmbeddedGraph::read_json).transpose()?;
            let svg = render_svg(&dataset, graph.as_ref())?;
            std::fs::write(&out, svg).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
