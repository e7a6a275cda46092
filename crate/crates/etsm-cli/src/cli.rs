//! The `etsm` command-line tool.

use std::io::{Read, Write as _};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use etsm_core::{
    benchmark_groups, build_hierarchy, cophenetic_depth, gen_random, gen_scatter, iterate,
    parse_param_config, read_csv, similarity_matrix, transform_step, ClusterInput, Config64,
    Dataset64, Error, Hierarchy, Matrix64, MatrixKind, MeanMode, ParameterSpec, Result,
    ScatterGroup, SimilarityMatrix, DEFAULT_XR_BASE,
};

use crate::curves::{contrast_curve_csv, trace_csv};
use crate::export::{export_tree, TreeFormat};
use crate::svg::{render_svg, RenderMode, RenderOptions};

const DEFAULT_CSV_DIGITS: usize = 12;

#[derive(Parser)]
#[command(
    name = "etsm",
    version,
    about = "Iterative similarity-matrix averaging: bifurcation, hierarchies, and renderings"
)]
struct Cli {
    /// Worker threads for the transform kernel (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MeanModeArg {
    Am,
    Gm,
}

impl From<MeanModeArg> for MeanMode {
    fn from(m: MeanModeArg) -> Self {
        match m {
            MeanModeArg::Am => MeanMode::Arithmetic,
            MeanModeArg::Gm => MeanMode::Geometric,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClusterFormat {
    Json,
    Newick,
    Dot,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RenderFormat {
    Dendrogram,
    Radial,
    Heatmap,
}

#[derive(Subcommand)]
enum Command {
    /// Build the full hierarchy from a dataset or matrix CSV.
    Cluster {
        /// Input CSV (`-` for stdin): a dataset, or a matrix dump
        /// (detected by its `# kind:` header line).
        input: String,
        /// Per-column metric configuration file for dataset inputs.
        #[arg(long)]
        metric_config: Option<String>,
        #[arg(long, value_enum, default_value = "gm")]
        mean_mode: MeanModeArg,
        /// Contrast C used for partition extraction, in [0, 200].
        #[arg(long, default_value_t = 80.0)]
        contrast: f64,
        /// Convergence tolerance on the max entry change.
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        /// Iteration cap per bifurcation cycle.
        #[arg(long, default_value_t = 10_000)]
        t_max: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: ClusterFormat,
        /// Output path (`-` for stdout).
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Apply one averaging transform to a matrix CSV.
    Step {
        input: String,
        /// Averaging mode (a dissimilarity input forces am).
        #[arg(long, value_enum, default_value = "gm")]
        mean_mode: MeanModeArg,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Iterate to convergence and emit the per-iteration trace CSV
    /// (all pairs tracked).
    Trace {
        input: String,
        #[arg(long)]
        metric_config: Option<String>,
        #[arg(long, value_enum, default_value = "gm")]
        mean_mode: MeanModeArg,
        #[arg(long, default_value_t = 80.0)]
        contrast: f64,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        #[arg(long, default_value_t = 10_000)]
        t_max: usize,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Emit contrast-function curves over a C grid as CSV.
    ContrastCurve {
        /// Comma-separated s values in [0, 1].
        #[arg(default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95")]
        s_values: String,
        #[arg(default_value_t = 0.0)]
        c_min: f64,
        #[arg(default_value_t = 200.0)]
        c_max: f64,
        #[arg(default_value_t = 201)]
        steps: usize,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Generate a seeded uniform random dataset CSV.
    GenRandom {
        n_objects: usize,
        n_params: usize,
        #[arg(default_value_t = 1.0)]
        lo: f64,
        #[arg(default_value_t = 500.0)]
        hi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Generate seeded 3-D scattered point groups as a dataset CSV.
    GenScatter {
        /// Groups as `cx,cy,cz,spread,count` joined by `;`
        /// (default: the 16/8/8/4 benchmark).
        groups: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Render a tree JSON file as SVG.
    Render {
        input: String,
        #[arg(long, value_enum, default_value = "dendrogram")]
        format: RenderFormat,
        #[arg(long, default_value = "-")]
        output: String,
    },
}

/// Run the tool on an argument vector; returns the process exit status.
/// 0 on success, 1 on any engine/data error, 2 on usage errors.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        // a pool may already exist when run_cli is called repeatedly; that
        // is fine, the setting is best-effort
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", error_chain(&e));
            1
        }
    }
}

fn error_chain(e: &Error) -> String {
    let mut msg = e.to_string();
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        msg.push_str(": ");
        msg.push_str(&s.to_string());
        source = s.source();
    }
    msg
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Cluster {
            input,
            metric_config,
            mean_mode,
            contrast,
            eps,
            t_max,
            format,
            output,
        } => {
            let config = engine_config(mean_mode, contrast, eps, t_max);
            let tree = match load_input(&input, metric_config.as_deref())? {
                Loaded::Matrix(m) => build_hierarchy(ClusterInput::Matrix(&m), &config)?,
                Loaded::Dataset(d) => build_hierarchy(ClusterInput::Dataset(&d), &config)?,
            };
            let text = match format {
                ClusterFormat::Json => export_tree(&tree, TreeFormat::Json)?,
                ClusterFormat::Newick => export_tree(&tree, TreeFormat::Newick)?,
                ClusterFormat::Dot => export_tree(&tree, TreeFormat::Dot)?,
                ClusterFormat::Svg => {
                    render_svg(&tree, None, RenderMode::Dendrogram, &RenderOptions::default())?
                }
            };
            write_output(&output, &text)
        }
        Command::Step { input, mean_mode, output } => {
            let matrix = match load_input(&input, None)? {
                Loaded::Matrix(m) => m,
                Loaded::Dataset(_) => {
                    return Err(Error::Config(
                        "step operates on a matrix CSV (use `cluster` for datasets)".into(),
                    ))
                }
            };
            let mode = if matrix.kind() == MatrixKind::Dissimilarity {
                MeanMode::Arithmetic
            } else {
                mean_mode.into()
            };
            let out = transform_step(&matrix, mode)?;
            write_output(&output, &out.to_csv())
        }
        Command::Trace {
            input,
            metric_config,
            mean_mode,
            contrast,
            eps,
            t_max,
            output,
        } => {
            let config = engine_config(mean_mode, contrast, eps, t_max);
            let matrix = match load_input(&input, metric_config.as_deref())? {
                Loaded::Matrix(m) => m,
                Loaded::Dataset(d) => similarity_matrix(&d)?,
            };
            let n = matrix.n();
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
            let outcome = iterate(&matrix, &config, Some(&pairs))?;
            write_output(&output, &trace_csv(&outcome.trace, matrix.labels())?)
        }
        Command::ContrastCurve { s_values, c_min, c_max, steps, output } => {
            let s: Vec<f64> = s_values
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad s value `{t}`")))
                })
                .collect::<Result<_>>()?;
            if steps < 2 {
                return Err(Error::Config("need at least 2 grid steps".into()));
            }
            let grid: Vec<f64> = (0..steps)
                .map(|k| c_min + (c_max - c_min) * k as f64 / (steps - 1) as f64)
                .collect();
            write_output(&output, &contrast_curve_csv(&s, &grid)?)
        }
        Command::GenRandom { n_objects, n_params, lo, hi, seed, output } => {
            let ds = gen_random::<f64>(n_objects, n_params, lo, hi, seed)?;
            write_output(&output, &ds.to_csv(DEFAULT_CSV_DIGITS))
        }
        Command::GenScatter { groups, seed, output } => {
            let groups = match groups {
                Some(spec) => parse_groups(&spec)?,
                None => benchmark_groups(),
            };
            let scatter = gen_scatter::<f64>(&groups, seed)?;
            write_output(&output, &scatter.dataset.to_csv(DEFAULT_CSV_DIGITS))
        }
        Command::Render { input, format, output } => {
            let text = read_input(&input)?;
            let tree: Hierarchy<f64> = Hierarchy::from_json(&text)?;
            let opts = RenderOptions::default();
            let svg = match format {
                RenderFormat::Dendrogram => render_svg(&tree, None, RenderMode::Dendrogram, &opts)?,
                RenderFormat::Radial => render_svg(&tree, None, RenderMode::Radial, &opts)?,
                RenderFormat::Heatmap => {
                    let table = cophenetic_depth(&tree.root);
                    render_svg(&tree, Some(&table), RenderMode::Heatmap, &opts)?
                }
            };
            write_output(&output, &svg)
        }
    }
}

fn engine_config(mean_mode: MeanModeArg, contrast: f64, eps: f64, t_max: usize) -> Config64 {
    Config64 {
        mean_mode: mean_mode.into(),
        contrast_c: contrast,
        converge_eps: eps,
        t_max,
        ..Default::default()
    }
}

enum Loaded {
    Matrix(Matrix64),
    Dataset(Dataset64),
}

/// Matrix dumps carry a `# kind:` comment line; everything else is a
/// dataset CSV whose columns come from the metric config (default: XR with
/// base 1.1 and weight 1 on every column).
fn load_input(path: &str, metric_config: Option<&str>) -> Result<Loaded> {
    let text = read_input(path)?;
    if text.trim_start().starts_with("# kind:") {
        return Ok(Loaded::Matrix(SimilarityMatrix::from_csv(&text)?));
    }
    let specs: Vec<ParameterSpec<f64>> = match metric_config {
        Some(cfg_path) => parse_param_config(&read_input(cfg_path)?)?,
        None => default_specs(&text)?,
    };
    Ok(Loaded::Dataset(read_csv(text.as_bytes(), &specs)?))
}

fn default_specs(csv_text: &str) -> Result<Vec<ParameterSpec<f64>>> {
    let header = csv_text
        .lines()
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))?;
    let mut cols = header.split(',');
    if cols.next() != Some("id") {
        return Err(Error::Parse(format!(
            "first CSV column must be `id`, got `{header}`"
        )));
    }
    let specs: Vec<ParameterSpec<f64>> = cols
        .map(|c| ParameterSpec::xr(c.trim(), DEFAULT_XR_BASE))
        .collect();
    if specs.is_empty() {
        return Err(Error::Parse("dataset header names no parameter columns".into()));
    }
    Ok(specs)
}

/// `cx,cy,cz,spread,count` groups joined by `;`.
fn parse_groups(spec: &str) -> Result<Vec<ScatterGroup<f64>>> {
    spec.split(';')
        .map(|g| {
            let parts: Vec<&str> = g.split(',').map(str::trim).collect();
            if parts.len() != 5 {
                return Err(Error::Parse(format!(
                    "group `{g}` must be cx,cy,cz,spread,count"
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| Error::Parse(format!("bad number `{s}` in group `{g}`")))
            };
            Ok(ScatterGroup {
                center: [num(parts[0])?, num(parts[1])?, num(parts[2])?],
                spread: num(parts[3])?,
                count: parts[4]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad count `{}` in group `{g}`", parts[4])))?,
            })
        })
        .collect()
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn write_output(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        std::io::stdout().write_all(text.as_bytes())?;
        Ok(())
    } else {
        std::fs::write(path, text)?;
        Ok(())
    }
}
