//! Fitting log-log slopes: exact power laws, a noisy one, and the tail of
//! a Monte Carlo mean trace read back from CSV.
//!
//!     cargo run --release --example rate_fit

use dkwsa::experiment::{estimate_rate, monte_carlo, recording_grid, tail_window, ExperimentPlan, Metric, RunTrace};
use dkwsa::estimator::WeightSchedule;
use dkwsa::graph::{Graph, RandomNetworkModel};
use dkwsa::objective::{LocalObjective, NoiseModel};
use dkwsa::optimizer::AlgorithmConfig;
use nalgebra::{DMatrix, DVector};

fn main() -> dkwsa::Result<()> {
    let grid = recording_grid(10_000);
    for exponent in [0.25, 0.5, 1.0] {
        let series: Vec<(u64, f64)> = grid.iter().map(|&k| (k, 7.0 / ((k + 1) as f64).powf(exponent))).collect();
        let fit = estimate_rate(&series, 0.25)?;
        println!("C/(k+1)^{exponent}: slope {:.6}, r2 {:.6}, {} points", fit.slope, fit.r_squared, fit.points);
    }
    let window = tail_window(&grid.iter().map(|&k| (k, 1.0)).collect::<Vec<_>>(), 0.25)?;
    println!("window 0.25 keeps k in [{}, {}]\n", window[0].0, window.last().unwrap().0);

    // Two quadratic nodes on an edge that fails half the time, 50 runs.
    let objectives = vec![
        LocalObjective::quadratic(DMatrix::identity(2, 2) * 0.8, DVector::from_vec(vec![1.0, 0.0]))?,
        LocalObjective::quadratic(DMatrix::identity(2, 2) * 0.6, DVector::from_vec(vec![0.0, -1.0]))?,
    ];
    let x_star = vec![1.0 / 1.4, -1.0 / 1.4];
    let base = AlgorithmConfig::new(
        RandomNetworkModel::fixed(Graph::complete(2)?),
        objectives,
        NoiseModel::Gaussian { sigma: 1.0 },
        WeightSchedule::reference(1),
        10_000,
        5,
    )?;
    let plan = ExperimentPlan { base, num_runs: 50, p_fail: vec![0.5], x_star, window: 0.25, baseline: None };
    let (_, agg) = monte_carlo(&plan, 1)?.remove(0);

    // A single run is too noisy to fit; the 50-run mean is not.
    let single = estimate_rate(&agg.runs[0].series(Metric::Mse), 0.25)?;
    println!("one run      mse slope {:+.3}  r2 {:.3}", single.slope, single.r_squared);
    let mut csv = Vec::new();
    agg.mean.write_csv(&mut csv)?;
    let trace = RunTrace::read_csv(csv.as_slice(), "in-memory")?;
    for metric in Metric::ALL {
        let fit = estimate_rate(&trace.series(metric), 0.25)?;
        println!("mean {:<16} slope {:+.3}  r2 {:.3}", metric.column(), fit.slope, fit.r_squared);
    }
    Ok(())
}
