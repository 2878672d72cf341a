//! Monte Carlo harness, convergence metrics and log-log rate estimation.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::WeightSchedule;
use crate::graph::{generate_geometric_graph, GeometricGraphSpec, Graph, RandomNetworkModel, Radius};
use crate::objective::{generate_dataset, solve_ground_truth, DatasetSpec, LocalObjective};
use crate::rng::{stream, Purpose, StreamKey};
use crate::optimizer::{
    network_average, run_centralized, run_distributed, AlgorithmConfig, Baseline,
    CentralizedConfig, DistributedState, Observer,
};

fn check_dim(state: &DistributedState, x_star: &[f64]) -> Result<()> {
    if state.dim() == x_star.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: x_star.len(),
        })
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// `(1/N) Σ_i ‖x_i − x*‖²`.
pub fn mse_across_nodes(state: &DistributedState, x_star: &[f64]) -> Result<f64> {
    check_dim(state, x_star)?;
    let total: f64 = state.rows().map(|r| dist_sq(r, x_star)).sum();
    Ok(total / state.num_nodes() as f64)
}

/// `Σ_i ‖x_i − x̄‖²`.
pub fn disagreement_sq(state: &DistributedState) -> f64 {
    let avg = network_average(state);
    state.rows().map(|r| dist_sq(r, &avg)).sum()
}

/// `‖x̄ − x*‖²`.
pub fn avg_gap_sq(state: &DistributedState, x_star: &[f64]) -> Result<f64> {
    check_dim(state, x_star)?;
    Ok(dist_sq(&network_average(state), x_star))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    pub mse: f64,
    pub disagreement_sq: f64,
    pub avg_gap_sq: f64,
    pub queries: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mse,
    Disagreement,
    AvgGap,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Mse, Metric::Disagreement, Metric::AvgGap];

    pub fn column(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Disagreement => "disagreement_sq",
            Metric::AvgGap => "avg_gap_sq",
        }
    }

    fn of(self, r: &TraceRecord) -> f64 {
        match self {
            Metric::Mse => r.mse,
            Metric::Disagreement => r.disagreement_sq,
            Metric::AvgGap => r.avg_gap_sq,
        }
    }
}

/// Metric series recorded on a grid of iterations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn series(&self, metric: Metric) -> Vec<(u64, f64)> {
        self.records.iter().map(|r| (r.k, metric.of(r))).collect()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| Error::parse("trace csv", e.to_string());
        w.write_record(["k", "mse", "disagreement_sq", "avg_gap_sq", "queries"])
            .map_err(fail)?;
        for r in &self.records {
            w.write_record([
                r.k.to_string(),
                r.mse.to_string(),
                r.disagreement_sq.to_string(),
                r.avg_gap_sq.to_string(),
                r.queries.to_string(),
            ])
            .map_err(fail)?;
        }
        w.flush()
            .map_err(|e| Error::parse("trace csv", e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R, origin: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(origin, e.to_string()))?
            .clone();
        let expected = ["k", "mse", "disagreement_sq", "avg_gap_sq", "queries"];
        if headers.iter().ne(expected) {
            return Err(Error::parse(
                origin,
                format!("header {:?}, expected {}", headers, expected.join(",")),
            ));
        }
        let mut records = Vec::new();
        for (line, row) in reader.deserialize::<TraceRecord>().enumerate() {
            records.push(row.map_err(|e| Error::parse(origin, format!("row {}: {e}", line + 1)))?);
        }
        if records.windows(2).any(|w| w[0].k >= w[1].k) {
            return Err(Error::parse(origin, "k must be strictly increasing"));
        }
        Ok(RunTrace { records })
    }
}

/// Growth factor of the geometric recording grid.
pub const GRID_RATIO: f64 = 1.05;

/// Iterations `0`, `⌈1.05^m⌉` for `m = 0, 1, …`, and `max_iterations`.
pub fn recording_grid(max_iterations: u64) -> Vec<u64> {
    let mut grid = vec![0];
    let mut m = 0;
    loop {
        let k = GRID_RATIO.powi(m).ceil() as u64;
        if k > max_iterations {
            break;
        }
        if grid.last() != Some(&k) {
            grid.push(k);
        }
        m += 1;
    }
    if grid.last() != Some(&max_iterations) {
        grid.push(max_iterations);
    }
    grid
}

/// Observer recording metrics at the iterations of a grid.
pub struct TraceRecorder {
    x_star: Vec<f64>,
    grid: Vec<u64>,
    next: usize,
    trace: RunTrace,
    error: Option<Error>,
}

impl TraceRecorder {
    pub fn new(x_star: Vec<f64>, grid: Vec<u64>) -> Self {
        TraceRecorder {
            x_star,
            grid,
            next: 0,
            trace: RunTrace::default(),
            error: None,
        }
    }

    pub fn finish(self) -> Result<RunTrace> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.trace),
        }
    }
}

impl Observer for TraceRecorder {
    fn observe(&mut self, state: &DistributedState, queries: u64) {
        if self.error.is_some() || self.grid.get(self.next) != Some(&state.iteration()) {
            return;
        }
        self.next += 1;
        let record = mse_across_nodes(state, &self.x_star).and_then(|mse| {
            Ok(TraceRecord {
                k: state.iteration(),
                mse,
                disagreement_sq: disagreement_sq(state),
                avg_gap_sq: avg_gap_sq(state, &self.x_star)?,
                queries,
            })
        });
        match record {
            Ok(r) => self.trace.records.push(r),
            Err(e) => self.error = Some(e),
        }
    }
}

/// A communication graph, one logistic objective per node, and the
/// minimizer of their sum.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub objectives: Vec<LocalObjective>,
    pub x_star: Vec<f64>,
}

/// Tolerance on `‖Σ ∇f_i‖` for the ground-truth minimizer.
pub const GROUND_TRUTH_TOL: f64 = 1e-9;

/// Geometric graph (auto radius, degree cap `max_degree`) plus a synthetic
/// dataset, both drawn from `seed`.
pub fn generate_instance(
    dataset: &DatasetSpec,
    max_degree: usize,
    seed: u64,
) -> Result<Instance> {
    let spec = GeometricGraphSpec::new(dataset.num_nodes, Radius::Auto).with_max_degree(max_degree);
    let graph = generate_geometric_graph(&spec, &mut stream(seed, StreamKey::new(0, 0, Purpose::Instance)))?;
    let objectives = generate_dataset(dataset, &mut stream(seed, StreamKey::new(0, 1, Purpose::Instance)))?;
    let x_star = solve_ground_truth(&objectives, GROUND_TRUTH_TOL)?;
    Ok(Instance {
        graph,
        objectives,
        x_star,
    })
}

/// Default tail window: the last quarter of the log10(k+1) span, i.e.
/// `k ≥ K/10` for `K = 10⁴`.
pub const DEFAULT_WINDOW: f64 = 0.25;

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    /// Template configuration; its network's failure probability is replaced
    /// by each entry of `p_fail` and its run index by each run.
    pub base: AlgorithmConfig,
    pub num_runs: usize,
    pub p_fail: Vec<f64>,
    pub x_star: Vec<f64>,
    pub window: f64,
    pub baseline: Option<Baseline>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.num_runs == 0 {
            return Err(Error::InvalidSpec("experiment needs at least one run".into()));
        }
        if !(self.window > 0.0 && self.window <= 1.0) {
            return Err(Error::InvalidSpec(format!("window {} outside (0, 1]", self.window)));
        }
        if self.x_star.len() != self.base.initial.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.base.initial.dim(),
                got: self.x_star.len(),
            });
        }
        for &p in &self.p_fail {
            RandomNetworkModel::new(self.base.network.base_graph().clone(), p)?;
        }
        self.base.validate()
    }

    pub fn schedule(&self) -> WeightSchedule {
        self.base.schedule
    }

    pub fn config_for(&self, p_fail: f64, run: usize) -> Result<AlgorithmConfig> {
        let mut config = self.base.clone();
        config.network = RandomNetworkModel::new(self.base.network.base_graph().clone(), p_fail)?;
        config.run = run;
        Ok(config)
    }

    pub fn centralized_config(&self, mode: Baseline, run: usize) -> CentralizedConfig {
        CentralizedConfig {
            mode,
            objectives: self.base.objectives.clone(),
            noise: self.base.noise,
            schedule: self.base.schedule,
            initial: network_average(&self.base.initial),
            max_iterations: self.base.max_iterations,
            seed: self.base.seed,
            run,
        }
    }
}

/// Mean trace over runs plus the individual runs.
#[derive(Debug, Clone)]
pub struct Aggregate {
    pub mean: RunTrace,
    pub runs: Vec<RunTrace>,
}

/// What one aggregated series was produced by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Series {
    Distributed { p_fail: f64 },
    Centralized(Baseline),
}

impl Series {
    /// File stem used for the CSV export.
    pub fn file_stem(&self) -> String {
        match self {
            Series::Distributed { p_fail } => format!("pfail_{p_fail}"),
            Series::Centralized(Baseline::KwsaFusion) => "centralized_kwsa".into(),
            Series::Centralized(Baseline::SgdFusion) => "centralized_sgd".into(),
        }
    }
}

/// Arithmetic mean of each metric per recorded iteration, reduced in run
/// order. All traces must share the same grid.
pub fn aggregate(runs: &[RunTrace]) -> Result<RunTrace> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidSpec("nothing to aggregate".into()))?;
    if runs.iter().any(|r| r.records.len() != first.records.len()) {
        return Err(Error::InvariantViolation("runs recorded different grids".into()));
    }
    let count = runs.len() as f64;
    let records = (0..first.records.len())
        .map(|idx| {
            let k = first.records[idx].k;
            let mut sum = [0.0; 3];
            for run in runs {
                let r = &run.records[idx];
                if r.k != k {
                    return Err(Error::InvariantViolation("runs recorded different grids".into()));
                }
                sum[0] += r.mse;
                sum[1] += r.disagreement_sq;
                sum[2] += r.avg_gap_sq;
            }
            Ok(TraceRecord {
                k,
                mse: sum[0] / count,
                disagreement_sq: sum[1] / count,
                avg_gap_sq: sum[2] / count,
                queries: first.records[idx].queries,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RunTrace { records })
}

fn run_indexed<F>(num_runs: usize, parallel_width: usize, f: F) -> Result<Vec<RunTrace>>
where
    F: Fn(usize) -> Result<RunTrace> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel_width.max(1))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    pool.install(|| (0..num_runs).into_par_iter().map(&f).collect())
}

/// Run every `p_fail` of the plan (and the baseline, when set) `num_runs`
/// times. Run `r` uses streams `(seed, r)`; results do not depend on
/// `parallel_width`.
pub fn monte_carlo(plan: &ExperimentPlan, parallel_width: usize) -> Result<Vec<(Series, Aggregate)>> {
    plan.validate()?;
    let grid = recording_grid(plan.base.max_iterations);
    let mut out = Vec::new();
    for &p in &plan.p_fail {
        let runs = run_indexed(plan.num_runs, parallel_width, |r| {
            let config = plan.config_for(p, r)?;
            let mut recorder = TraceRecorder::new(plan.x_star.clone(), grid.clone());
            run_distributed(&config, &mut recorder)?;
            recorder.finish()
        })?;
        out.push((
            Series::Distributed { p_fail: p },
            Aggregate {
                mean: aggregate(&runs)?,
                runs,
            },
        ));
    }
    if let Some(mode) = plan.baseline {
        let runs = run_indexed(plan.num_runs, parallel_width, |r| {
            let mut recorder = TraceRecorder::new(plan.x_star.clone(), grid.clone());
            run_centralized(&plan.centralized_config(mode, r), &mut recorder)?;
            recorder.finish()
        })?;
        out.push((
            Series::Centralized(mode),
            Aggregate {
                mean: aggregate(&runs)?,
                runs,
            },
        ));
    }
    Ok(out)
}

/// Least-squares line through `(log10(k+1), log10(value))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 10;

/// Points whose `log10(k+1)` lies in the last `window` fraction of the
/// series' log span.
pub fn tail_window(series: &[(u64, f64)], window: f64) -> Result<Vec<(u64, f64)>> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidSpec(format!("window {window} outside (0, 1]")));
    }
    let logk = |k: u64| ((k + 1) as f64).log10();
    let (Some(lo), Some(hi)) = (
        series.iter().map(|p| logk(p.0)).reduce(f64::min),
        series.iter().map(|p| logk(p.0)).reduce(f64::max),
    ) else {
        return Ok(Vec::new());
    };
    let cutoff = hi - window * (hi - lo);
    Ok(series.iter().copied().filter(|p| logk(p.0) >= cutoff).collect())
}

pub fn estimate_rate(series: &[(u64, f64)], window: f64) -> Result<RateFit> {
    let tail = tail_window(series, window)?;
    if tail.len() < MIN_FIT_POINTS {
        return Err(Error::RateUndefined(format!(
            "{} points in window, need at least {MIN_FIT_POINTS}",
            tail.len()
        )));
    }
    if let Some(&(k, v)) = tail.iter().find(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return Err(Error::RateUndefined(format!("value {v} at k={k} is not positive")));
    }
    let xs: Vec<f64> = tail.iter().map(|p| ((p.0 + 1) as f64).log10()).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.log10()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::RateUndefined("all points share one k".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: tail.len(),
    })
}

/// Mean of a metric over the tail window.
pub fn tail_mean(trace: &RunTrace, metric: Metric, window: f64) -> Result<f64> {
    let tail = tail_window(&trace.series(metric), window)?;
    if tail.is_empty() {
        return Err(Error::RateUndefined("empty tail window".into()));
    }
    Ok(tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64)
}
