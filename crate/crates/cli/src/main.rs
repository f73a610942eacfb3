use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amle::experiments::{
    consistency_check, halving, run_table, slot_experiment, ExactSolution, SlotVariant, SmoothFn, TableId,
};
use amle::grid::{build_grid, GridSpec};
use amle::io::field_csv;
use amle::netfile::parse_network;
use amle::{solve, DirichletProblem, ModulusChoice, Network, NodeId, ScalarField, SolveOptions, SolveReport};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "amle", version, about = "Minimax solver for Lipschitz extensions on networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce an error table (7.1 to 7.5).
    Table {
        id: String,
        /// Comma-separated grid sizes.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        /// Comma-separated neighborhood radii.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        #[command(flatten)]
        out: Output,
    },
    /// Solve a Dirichlet problem described by a TOML or JSON config.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Solve on the slotted square with geodesic-cone data.
    Slot {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Midrange ratios of a smooth function on shrinking circles.
    Consistency {
        function: String,
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        /// Largest radius; each further radius halves it.
        #[arg(long, default_value_t = 0.1)]
        h0: f64,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModulusKind {
    #[default]
    Lipschitz,
    Concave,
}

/// Either an explicit network with Dirichlet data, or a grid with an exact
/// solution supplying the data.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    /// Network file, relative to the config file.
    network: Option<PathBuf>,
    /// Network in the same text format, inline.
    network_text: Option<String>,
    /// `[node, value]` pairs.
    dirichlet: Option<Vec<(NodeId, f64)>>,
    grid: Option<GridSpec>,
    exact: Option<String>,
    #[serde(default)]
    modulus: ModulusKind,
    tol: Option<f64>,
    max_sweeps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotConfig {
    n: usize,
    k: usize,
    eps: Option<f64>,
    variant: String,
    tol: Option<f64>,
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())),
        _ => toml::from_str(&text).with_context(|| format!("parsing {}", path.display())),
    }
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// The summary goes to stdout when the body went to a file, else to stderr.
fn summary(out: Option<&Path>, line: &str) {
    match out {
        Some(_) => println!("{line}"),
        None => eprintln!("{line}"),
    }
}

fn options(tol: Option<f64>, max_sweeps: Option<usize>) -> SolveOptions {
    SolveOptions { tol: tol.unwrap_or(1e-9), max_sweeps, certify: true }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    field: &'a ScalarField,
    report: &'a SolveReport,
    max_error: Option<f64>,
}

fn run_solve(config: &Path, out: &Output) -> Result<()> {
    let cfg: SolveConfig = read_config(config)?;
    let opts = options(out.tol.or(cfg.tol), cfg.max_sweeps);
    let modulus = match cfg.modulus {
        ModulusKind::Lipschitz => ModulusChoice::Lipschitz,
        ModulusKind::Concave => ModulusChoice::Concave,
    };
    let (net, boundary, exact): (Network, Vec<(NodeId, f64)>, Option<Vec<f64>>) =
        match (&cfg.network, &cfg.network_text, &cfg.grid) {
            (Some(_), Some(_), _) => bail!("give either `network` or `network_text`, not both"),
            (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => bail!("give either a network or a grid, not both"),
            (None, None, None) => bail!("config needs `network`, `network_text` or `[grid]`"),
            (file, text, None) => {
                let text = match (file, text) {
                    (Some(f), _) => {
                        let path = config.parent().unwrap_or(Path::new(".")).join(f);
                        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?
                    }
                    (None, Some(t)) => t.clone(),
                    (None, None) => unreachable!(),
                };
                let net = parse_network(&text)?;
                let boundary = cfg.dirichlet.clone().context("explicit networks need `dirichlet` data")?;
                (net, boundary, None)
            }
            (None, None, Some(spec)) => {
                let exact: ExactSolution = cfg
                    .exact
                    .as_deref()
                    .context("grid configs need an `exact` function for the boundary data")?
                    .parse()
                    .map_err(anyhow::Error::msg)?;
                let grid = build_grid(*spec)?;
                let values: Vec<f64> = (0..grid.network.len()).map(|x| exact.eval(grid.point(x))).collect();
                let boundary = grid.dirichlet.iter().map(|&s| (s, values[s])).collect();
                (grid.network, boundary, Some(values))
            }
        };
    let problem = DirichletProblem::new(&net, boundary, modulus)?;
    let (field, report) = solve(&problem, &opts)?;
    let max_error = exact.map(|e| field.sup_distance(&ScalarField::new(e)));
    let body = match out.format {
        Format::Csv => field_csv(&net, &field),
        Format::Json => {
            serde_json::to_string_pretty(&SolveOutput { field: &field, report: &report, max_error })? + "\n"
        }
    };
    emit(out.out.as_deref(), &body)?;
    let mut line = format!(
        "solved {} nodes in {} sweeps, residual {:.3e}",
        net.len(),
        report.iterations,
        report.final_residual
    );
    if let Some(e) = max_error {
        line += &format!(", max error {e:.6e}");
    }
    summary(out.out.as_deref(), &line);
    Ok(())
}

fn run_slot(config: &Path, out: &Output) -> Result<()> {
    let cfg: SlotConfig = read_config(config)?;
    let variant: SlotVariant = cfg.variant.parse().map_err(anyhow::Error::msg)?;
    let eps = cfg.eps.unwrap_or(1.0 / (2.0 * cfg.n as f64));
    let outcome = slot_experiment(cfg.n, cfg.k, eps, variant, &options(out.tol.or(cfg.tol), None))?;
    let body = match out.format {
        Format::Csv => {
            let mut s = String::from("node,x,y,cone,solution\n");
            for (x, p) in outcome.coords.iter().enumerate() {
                s += &format!("{x},{:e},{:e},{:e},{:e}\n", p[0], p[1], outcome.cone[x], outcome.solution[x]);
            }
            s
        }
        Format::Json => serde_json::to_string_pretty(&outcome)? + "\n",
    };
    emit(out.out.as_deref(), &body)?;
    summary(
        out.out.as_deref(),
        &format!(
            "slot {}: max |solution - cone| = {:.6e}, mirror defect {:.3e}, {} sweeps",
            cfg.variant, outcome.gap, outcome.mirror_defect, outcome.report.iterations
        ),
    );
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Table { id, n, k, out } => {
            let table: TableId = id.parse()?;
            let n = n.unwrap_or_else(|| table.default_n());
            let k = k.unwrap_or_else(|| table.default_k());
            let result = run_table(table, &n, &k, &options(out.tol, None))?;
            let body = match out.format {
                Format::Csv => result.to_csv(),
                Format::Json => serde_json::to_string_pretty(&result)? + "\n",
            };
            emit(out.out.as_deref(), &body)?;
            summary(
                out.out.as_deref(),
                &format!("table {table}: {} rows x {} columns", result.rows.len(), result.n.len()),
            );
        }
        Command::Solve { config, out } => run_solve(&config, &out)?,
        Command::Slot { config, out } => run_slot(&config, &out)?,
        Command::Consistency { function, x, y, h0, levels, format, out } => {
            let f: SmoothFn = function.parse().map_err(anyhow::Error::msg)?;
            let report = consistency_check(f, [x, y], &halving(h0, levels))?;
            let body = match format {
                Format::Csv => {
                    let mut s = String::from("h,ratio\n");
                    for (h, r) in report.h.iter().zip(&report.ratios) {
                        s += &format!("{h:e},{r:e}\n");
                    }
                    s
                }
                Format::Json => serde_json::to_string_pretty(&report)? + "\n",
            };
            emit(out.as_deref(), &body)?;
            summary(
                out.as_deref(),
                &format!(
                    "limit {:.10} = c * {:.6} with c = {:.10} (observed order {:.2})",
                    report.limit, report.infinity_laplacian, report.constant, report.order
                ),
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
