//! The `gen`, `run` and `rate` commands.
//!
//! Settings come from an optional TOML file whose sections mirror the
//! library modules (`[graph]`, `[objective]`, `[estimator]`,
//! `[experiment]`); any key can be overridden by the matching flag. Unknown
//! keys are rejected. All randomness derives from `seed`.
//!
//! Exit codes: 0 success, 2 configuration or assumption violation,
//! 3 divergence, 4 I/O.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{validate_schedule, WeightSchedule};
use crate::experiment::{
    estimate_rate, monte_carlo, tail_mean, ExperimentPlan, Metric, RunTrace,
    Series, DEFAULT_WINDOW, GROUND_TRUTH_TOL,
};
use crate::graph::{generate_geometric_graph, GeometricGraphSpec, Graph, Radius, RandomNetworkModel};
use crate::io::{
    combined_hash, format_edge_list, load_dataset_dir, load_graph, write_dataset_dir, write_text,
};
use crate::objective::{generate_dataset, solve_ground_truth, DatasetSpec, LocalObjective, NoiseModel};
use crate::optimizer::{AlgorithmConfig, Baseline};
use crate::rng::{stream, Purpose, StreamKey};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Divergence { .. } | Error::ConvergenceFailure { .. } => EXIT_DIVERGENCE,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(name = "dkwsa", version, about = "Distributed zeroth-order optimization over random networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a geometric graph and a synthetic logistic dataset.
    Gen(CommonArgs),
    /// Run the Monte Carlo experiment and write one trace CSV per series.
    Run(CommonArgs),
    /// Fit log-log slopes to the columns of a trace CSV.
    Rate(RateArgs),
}

fn parse_radius(s: &str) -> std::result::Result<Radius, String> {
    if s == "auto" {
        Ok(Radius::Auto)
    } else {
        s.parse::<f64>()
            .map(Radius::Fixed)
            .map_err(|e| format!("radius must be 'auto' or a number: {e}"))
    }
}

fn parse_baseline(s: &str) -> std::result::Result<BaselineChoice, String> {
    match s {
        "kwsa" => Ok(BaselineChoice::Kwsa),
        "sgd" => Ok(BaselineChoice::Sgd),
        "none" => Ok(BaselineChoice::None),
        _ => Err(format!("baseline must be sgd, kwsa or none, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineChoice {
    Sgd,
    Kwsa,
    None,
}

impl BaselineChoice {
    fn mode(self) -> Option<Baseline> {
        match self {
            BaselineChoice::Sgd => Some(Baseline::SgdFusion),
            BaselineChoice::Kwsa => Some(Baseline::KwsaFusion),
            BaselineChoice::None => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Gaussian,
    StateScaled,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte Carlo runs.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub iters: Option<u64>,
    /// Comma-separated link failure probabilities.
    #[arg(long, value_delimiter = ',')]
    pub pfail: Option<Vec<f64>>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Centralized baseline: sgd, kwsa or none.
    #[arg(long, value_parser = parse_baseline)]
    pub baseline: Option<BaselineChoice>,
    /// Tail fraction of the log-k span used for slope fits.
    #[arg(long)]
    pub window: Option<f64>,
    /// Edge-list file to use instead of generating a graph.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Dataset directory to use instead of generating data.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Connection radius, or "auto".
    #[arg(long, value_parser = parse_radius)]
    pub radius: Option<Radius>,
    #[arg(long)]
    pub max_degree: Option<usize>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    /// Trace CSV with columns k,mse,disagreement_sq,avg_gap_sq,queries.
    pub csv: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: f64,
}

/// Contents of a configuration file. Every field is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    #[serde(default)]
    pub graph: GraphSection,
    #[serde(default)]
    pub objective: ObjectiveSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub file: Option<PathBuf>,
    pub nodes: Option<usize>,
    /// `"auto"` or a number.
    pub radius: Option<toml::Value>,
    pub max_degree: Option<usize>,
    pub p_fail: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSection {
    pub dataset: Option<PathBuf>,
    pub points_per_node: Option<usize>,
    pub feature_dim: Option<usize>,
    pub kappa: Option<f64>,
    pub noise: Option<NoiseKind>,
    pub sigma: Option<f64>,
    pub c_f: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub alpha0: Option<f64>,
    pub beta0: Option<f64>,
    pub c0: Option<f64>,
    pub delta: Option<f64>,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub runs: Option<usize>,
    pub iters: Option<u64>,
    pub window: Option<f64>,
    pub baseline: Option<BaselineChoice>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    pub graph_file: Option<PathBuf>,
    pub dataset_dir: Option<PathBuf>,
    pub nodes: usize,
    pub radius: Radius,
    pub max_degree: usize,
    pub p_fail: Vec<f64>,
    pub dataset: DatasetSpec,
    pub noise: NoiseModel,
    pub sigma: f64,
    pub schedule: WeightSchedule,
    pub runs: usize,
    pub iters: u64,
    pub window: f64,
    pub baseline: BaselineChoice,
}

/// Degree cap of generated graphs, and `1/β₀` by default.
pub const DEFAULT_MAX_DEGREE: usize = 7;

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = crate::io::read_text(path)?;
                toml::from_str::<ConfigFile>(&text)
                    .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?
            }
            None => ConfigFile::default(),
        };
        let radius = match (&args.radius, &file.graph.radius) {
            (Some(r), _) => *r,
            (None, Some(toml::Value::String(s))) => {
                parse_radius(s).map_err(|e| Error::parse("config [graph].radius", e))?
            }
            (None, Some(toml::Value::Float(r))) => Radius::Fixed(*r),
            (None, Some(toml::Value::Integer(r))) => Radius::Fixed(*r as f64),
            (None, Some(other)) => {
                return Err(Error::parse(
                    "config [graph].radius",
                    format!("expected \"auto\" or a number, got {other}"),
                ))
            }
            (None, None) => Radius::Auto,
        };
        let max_degree = args.max_degree.or(file.graph.max_degree).unwrap_or(DEFAULT_MAX_DEGREE);
        let defaults = DatasetSpec::default();
        let dataset = DatasetSpec {
            num_nodes: args.nodes.or(file.graph.nodes).unwrap_or(defaults.num_nodes),
            points_per_node: args
                .points
                .or(file.objective.points_per_node)
                .unwrap_or(defaults.points_per_node),
            feature_dim: args
                .feature_dim
                .or(file.objective.feature_dim)
                .unwrap_or(defaults.feature_dim),
            kappa: args.kappa.or(file.objective.kappa).unwrap_or(defaults.kappa),
        };
        let sigma = args.sigma.or(file.objective.sigma).unwrap_or(1.0);
        let noise = match file.objective.noise.unwrap_or(NoiseKind::Gaussian) {
            NoiseKind::Gaussian => NoiseModel::Gaussian { sigma },
            NoiseKind::StateScaled => NoiseModel::StateScaled {
                sigma,
                c_f: file.objective.c_f.unwrap_or(0.0),
            },
        };
        noise.validate()?;
        let est = &file.estimator;
        let schedule = WeightSchedule::new(
            args.alpha0.or(est.alpha0).unwrap_or(1.0),
            args.beta0
                .or(est.beta0)
                .unwrap_or(1.0 / DEFAULT_MAX_DEGREE as f64),
            args.c0.or(est.c0).unwrap_or(1.0),
            args.delta.or(est.delta).unwrap_or(0.25),
            args.tau.or(est.tau).unwrap_or(0.5),
        )?;
        let settings = Settings {
            seed: args.seed.or(file.seed).unwrap_or(1),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            jobs: args.jobs.or(file.jobs).unwrap_or(1),
            graph_file: args.graph.clone().or(file.graph.file),
            dataset_dir: args.dataset.clone().or(file.objective.dataset),
            nodes: dataset.num_nodes,
            radius,
            max_degree,
            p_fail: args
                .pfail
                .clone()
                .or(file.graph.p_fail)
                .unwrap_or_else(|| vec![0.0, 0.5, 0.7]),
            dataset,
            noise,
            sigma,
            schedule,
            runs: args.runs.or(file.experiment.runs).unwrap_or(100),
            iters: args.iters.or(file.experiment.iters).unwrap_or(10_000),
            window: args.window.or(file.experiment.window).unwrap_or(DEFAULT_WINDOW),
            baseline: args
                .baseline
                .or(file.experiment.baseline)
                .unwrap_or(BaselineChoice::Kwsa),
        };
        if settings.jobs == 0 {
            return Err(Error::InvalidSpec("jobs must be at least 1".into()));
        }
        Ok(settings)
    }

    fn geometric_spec(&self) -> GeometricGraphSpec {
        GeometricGraphSpec::new(self.nodes, self.radius).with_max_degree(self.max_degree)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub name: String,
    pub blob: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub alpha0: f64,
    pub beta0: f64,
    pub c0: f64,
    pub delta: f64,
    pub tau: f64,
}

impl From<WeightSchedule> for ScheduleEntry {
    fn from(s: WeightSchedule) -> Self {
        ScheduleEntry {
            alpha0: s.alpha0,
            beta0: s.beta0,
            c0: s.c0,
            delta: s.delta,
            tau: s.tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentEntry {
    pub runs: usize,
    pub iters: u64,
    pub p_fail: Vec<f64>,
    pub baseline: BaselineChoice,
    pub window: f64,
    pub sigma: f64,
    pub x_star: Vec<f64>,
    pub outputs: Vec<String>,
}

/// Sidecar written next to generated or produced files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub nodes: usize,
    pub edges: usize,
    pub graph_file: String,
    pub dataset_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentEntry>,
    pub dataset_files: Vec<DatasetFile>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        toml::from_str(&crate::io::read_text(path)?)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }

    fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::parse("manifest", e.to_string()))?;
        write_text(path, &text)
    }
}

pub const GRAPH_FILE: &str = "graph.txt";
pub const DATASET_DIR: &str = "dataset";
pub const MANIFEST_FILE: &str = "manifest.toml";

fn dataset_files(blobs: &[(String, String)]) -> Vec<DatasetFile> {
    blobs
        .iter()
        .map(|(name, blob)| DatasetFile {
            name: name.clone(),
            blob: blob.clone(),
        })
        .collect()
}

fn generate_graph(settings: &Settings) -> Result<Graph> {
    generate_geometric_graph(
        &settings.geometric_spec(),
        &mut stream(settings.seed, StreamKey::new(0, 0, Purpose::Instance)),
    )
}

fn generate_objectives(settings: &Settings) -> Result<Vec<LocalObjective>> {
    generate_dataset(
        &settings.dataset,
        &mut stream(settings.seed, StreamKey::new(0, 1, Purpose::Instance)),
    )
}

/// Write a graph, per-node dataset files and a manifest under `out`.
pub fn cmd_gen(settings: &Settings, stdout: &mut impl Write) -> Result<Manifest> {
    let graph = generate_graph(settings)?;
    let objectives = generate_objectives(settings)?;
    let graph_path = settings.out.join(GRAPH_FILE);
    write_text(&graph_path, &format_edge_list(&graph))?;
    let blobs = write_dataset_dir(&settings.out.join(DATASET_DIR), &objectives)?;
    let manifest = Manifest {
        command: "gen".into(),
        seed: settings.seed,
        nodes: graph.num_nodes(),
        edges: graph.num_edges(),
        graph_file: GRAPH_FILE.into(),
        dataset_hash: combined_hash(blobs.iter().map(|(n, b)| (n.as_str(), b.as_str()))),
        schedule: None,
        experiment: None,
        dataset_files: dataset_files(&blobs),
    };
    manifest.write(&settings.out.join(MANIFEST_FILE))?;
    writeln!(
        stdout,
        "wrote {} (N={}, |E|={}, max degree {}) and {} dataset files to {}",
        GRAPH_FILE,
        graph.num_nodes(),
        graph.num_edges(),
        graph.max_degree(),
        objectives.len(),
        settings.out.display()
    )
    .map_err(|e| Error::io("stdout", e))?;
    Ok(manifest)
}

/// One line of the `run` summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub series: String,
    pub final_mse: f64,
    pub slope: Option<f64>,
    pub tail_mse: f64,
    pub queries: u64,
}

/// Run the experiment described by `settings` and write its outputs.
pub fn cmd_run(settings: &Settings, stdout: &mut impl Write) -> Result<Vec<SummaryRow>> {
    let (graph, graph_name) = match &settings.graph_file {
        Some(path) => (load_graph(path)?, path.display().to_string()),
        None => {
            let g = generate_graph(settings)?;
            write_text(&settings.out.join(GRAPH_FILE), &format_edge_list(&g))?;
            (g, GRAPH_FILE.to_string())
        }
    };
    let (objectives, blobs) = match &settings.dataset_dir {
        Some(dir) => {
            let loaded = load_dataset_dir(dir, graph.num_nodes())?;
            (loaded.objectives, loaded.blobs)
        }
        None => {
            let spec = DatasetSpec {
                num_nodes: graph.num_nodes(),
                ..settings.dataset
            };
            let objs = generate_dataset(
                &spec,
                &mut stream(settings.seed, StreamKey::new(0, 1, Purpose::Instance)),
            )?;
            let blobs = write_dataset_dir(&settings.out.join(DATASET_DIR), &objs)?;
            (objs, blobs)
        }
    };
    if objectives.len() != graph.num_nodes() {
        return Err(Error::InvalidSpec(format!(
            "{} objectives for a {}-node graph",
            objectives.len(),
            graph.num_nodes()
        )));
    }
    let mu = objectives
        .iter()
        .map(|o| o.strong_convexity_bounds().0)
        .fold(f64::INFINITY, f64::min);
    validate_schedule(&settings.schedule, mu).map_err(Error::Schedule)?;

    let x_star = solve_ground_truth(&objectives, GROUND_TRUTH_TOL)?;
    let base = AlgorithmConfig::new(
        RandomNetworkModel::fixed(graph.clone()),
        objectives,
        settings.noise,
        settings.schedule,
        settings.iters,
        settings.seed,
    )?;
    let plan = ExperimentPlan {
        base,
        num_runs: settings.runs,
        p_fail: settings.p_fail.clone(),
        x_star: x_star.clone(),
        window: settings.window,
        baseline: settings.baseline.mode(),
    };
    let results = monte_carlo(&plan, settings.jobs)?;

    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    for (series, agg) in &results {
        let name = format!("{}.csv", series.file_stem());
        let path = settings.out.join(&name);
        let mut buf = Vec::new();
        agg.mean.write_csv(&mut buf)?;
        write_text(&path, std::str::from_utf8(&buf).expect("csv output is utf-8"))?;
        outputs.push(name);
        let last = agg.mean.last().expect("trace has records");
        rows.push(SummaryRow {
            series: series_label(series),
            final_mse: last.mse,
            slope: estimate_rate(&agg.mean.series(Metric::Mse), settings.window)
                .ok()
                .map(|f| f.slope),
            tail_mse: tail_mean(&agg.mean, Metric::Mse, settings.window)?,
            queries: last.queries,
        });
    }

    let manifest = Manifest {
        command: "run".into(),
        seed: settings.seed,
        nodes: graph.num_nodes(),
        edges: graph.num_edges(),
        graph_file: graph_name,
        dataset_hash: combined_hash(blobs.iter().map(|(n, b)| (n.as_str(), b.as_str()))),
        schedule: Some(settings.schedule.into()),
        experiment: Some(ExperimentEntry {
            runs: settings.runs,
            iters: settings.iters,
            p_fail: settings.p_fail.clone(),
            baseline: settings.baseline,
            window: settings.window,
            sigma: settings.sigma,
            x_star,
            outputs,
        }),
        dataset_files: dataset_files(&blobs),
    };
    manifest.write(&settings.out.join(MANIFEST_FILE))?;
    stdout
        .write_all(format_summary(&rows).as_bytes())
        .map_err(|e| Error::io("stdout", e))?;
    Ok(rows)
}

fn series_label(series: &Series) -> String {
    match series {
        Series::Distributed { p_fail } => format!("distributed p_fail={p_fail}"),
        Series::Centralized(Baseline::KwsaFusion) => "centralized kwsa".into(),
        Series::Centralized(Baseline::SgdFusion) => "centralized sgd".into(),
    }
}

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<26} {:>14} {:>10} {:>14} {:>12}\n",
        "series", "final_mse", "slope", "tail_mse", "queries"
    );
    for r in rows {
        let slope = r.slope.map_or("n/a".to_string(), |s| format!("{s:.4}"));
        writeln!(
            out,
            "{:<26} {:>14.6e} {:>10} {:>14.6e} {:>12}",
            r.series, r.final_mse, slope, r.tail_mse, r.queries
        )
        .expect("writing to a String");
    }
    out
}

/// Print a fit per metric column and a final `slope=<v>` line for the MSE.
pub fn cmd_rate(args: &RateArgs, stdout: &mut impl Write) -> Result<f64> {
    let file = std::fs::File::open(&args.csv).map_err(|e| Error::io(&args.csv, e))?;
    let trace = RunTrace::read_csv(file, &args.csv.display().to_string())?;
    let mut out = String::new();
    let mut mse_slope = None;
    for metric in Metric::ALL {
        match estimate_rate(&trace.series(metric), args.window) {
            Ok(fit) => {
                writeln!(
                    out,
                    "{:<16} slope={:.6} intercept={:.6} r2={:.6} points={}",
                    metric.column(),
                    fit.slope,
                    fit.intercept,
                    fit.r_squared,
                    fit.points
                )
                .expect("writing to a String");
                if metric == Metric::Mse {
                    mse_slope = Some(fit.slope);
                }
            }
            Err(Error::RateUndefined(why)) if metric != Metric::Mse => {
                writeln!(out, "{:<16} undefined ({why})", metric.column())
                    .expect("writing to a String");
            }
            Err(e) => return Err(e),
        }
    }
    let slope = mse_slope.expect("mse fit succeeded or returned early");
    writeln!(out, "slope={slope}").expect("writing to a String");
    stdout
        .write_all(out.as_bytes())
        .map_err(|e| Error::io("stdout", e))?;
    Ok(slope)
}

/// Parse `args` (including the program name) and execute. Returns the
/// process exit code; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(stderr, "{e}");
            if !e.use_stderr() {
                let _ = write!(stdout, "{e}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Gen(args) => Settings::resolve(args).and_then(|s| cmd_gen(&s, stdout).map(|_| ())),
        Command::Run(args) => Settings::resolve(args).and_then(|s| cmd_run(&s, stdout).map(|_| ())),
        Command::Rate(args) => cmd_rate(args, stdout).map(|_| ()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(args: &[&str]) -> CommonArgs {
        let mut full = vec!["dkwsa", "run"];
        full.extend_from_slice(args);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Run(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults_match_reference_setup() {
        let s = Settings::resolve(&CommonArgs::default()).unwrap();
        assert_eq!(s.schedule, WeightSchedule::new(1.0, 1.0 / 7.0, 1.0, 0.25, 0.5).unwrap());
        assert_eq!(s.p_fail, vec![0.0, 0.5, 0.7]);
        assert_eq!(s.runs, 100);
        assert_eq!(s.nodes, 10);
        assert_eq!(s.dataset.kappa, 0.3);
        assert_eq!(s.baseline, BaselineChoice::Kwsa);
        assert_eq!(s.noise, NoiseModel::Gaussian { sigma: 1.0 });
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "seed = 5\n[estimator]\ndelta = 0.3\ntau = 0.6\n[graph]\nradius = 0.5\np_fail = [0.1]\n[experiment]\nbaseline = \"sgd\"\n",
        )
        .unwrap();
        let s = Settings::resolve(&common(&["--config", path.to_str().unwrap(), "--delta", "0.2"])).unwrap();
        assert_eq!(s.seed, 5);
        assert_eq!(s.schedule.delta, 0.2);
        assert_eq!(s.schedule.tau, 0.6);
        assert_eq!(s.radius, Radius::Fixed(0.5));
        assert_eq!(s.p_fail, vec![0.1]);
        assert_eq!(s.baseline, BaselineChoice::Sgd);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[estimator]\ngamma = 0.3\n").unwrap();
        let err = Settings::resolve(&common(&["--config", path.to_str().unwrap()])).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        std::fs::write(&path, "[estimator]\ndelta = \"wide\"\n").unwrap();
        assert!(Settings::resolve(&common(&["--config", path.to_str().unwrap()])).is_err());
    }

    #[test]
    fn flag_parsing() {
        let a = common(&["--pfail", "0,0.25", "--radius", "auto", "--baseline", "none"]);
        assert_eq!(a.pfail, Some(vec![0.0, 0.25]));
        assert_eq!(a.radius, Some(Radius::Auto));
        assert_eq!(a.baseline, Some(BaselineChoice::None));
        assert!(Cli::try_parse_from(["dkwsa", "run", "--baseline", "adam"]).is_err());
        assert!(Cli::try_parse_from(["dkwsa", "run", "--bogus", "1"]).is_err());
        assert!(Cli::try_parse_from(["dkwsa", "run", "--seed", "-1"]).is_err());
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(exit_code(&Error::InvalidSpec("x".into())), EXIT_CONFIG);
        assert_eq!(
            exit_code(&Error::Divergence { iteration: 1, node: 0, run: None }),
            EXIT_DIVERGENCE
        );
        assert_eq!(
            exit_code(&Error::io("p", std::io::Error::other("boom"))),
            EXIT_IO
        );
    }
}
