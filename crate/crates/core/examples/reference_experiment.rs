//! Monte Carlo experiment on the reference instance: mean MSE against k for
//! p_fail in {0, 0.5, 0.7} plus the centralized KW baseline, with fitted
//! tail slopes. CSVs land in the output directory.
//!
//!     cargo run --release --example reference_experiment -- [runs] [seed] [out-dir]

use std::path::PathBuf;

use dkwsa::estimator::WeightSchedule;
use dkwsa::experiment::{
    estimate_rate, generate_instance, monte_carlo, tail_mean, ExperimentPlan, Metric, DEFAULT_WINDOW,
};
use dkwsa::graph::RandomNetworkModel;
use dkwsa::io::write_text;
use dkwsa::objective::{DatasetSpec, NoiseModel};
use dkwsa::optimizer::{AlgorithmConfig, Baseline};

fn main() -> dkwsa::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map_or(20, |s| s.parse().expect("runs"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let out: PathBuf = args.next().unwrap_or_else(|| "reference".into()).into();

    let inst = generate_instance(&DatasetSpec::default(), 7, seed)?;
    let plan = ExperimentPlan {
        base: AlgorithmConfig::new(
            RandomNetworkModel::fixed(inst.graph.clone()),
            inst.objectives,
            NoiseModel::Gaussian { sigma: 1.0 },
            WeightSchedule::reference(7),
            10_000,
            seed,
        )?,
        num_runs: runs,
        p_fail: vec![0.0, 0.5, 0.7],
        x_star: inst.x_star,
        window: DEFAULT_WINDOW,
        baseline: Some(Baseline::KwsaFusion),
    };
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    println!("{} runs, seed {seed}, {}, {jobs} threads", runs, inst.graph);

    for (series, agg) in monte_carlo(&plan, jobs)? {
        let mse = estimate_rate(&agg.mean.series(Metric::Mse), DEFAULT_WINDOW)?;
        let dis = estimate_rate(&agg.mean.series(Metric::Disagreement), DEFAULT_WINDOW).map(|f| f.slope);
        println!(
            "{:<18} mse slope {:+.3} (r2 {:.3})  disagreement slope {}  tail mse {:.3e}",
            series.file_stem(),
            mse.slope,
            mse.r_squared,
            dis.map_or("n/a".into(), |s| format!("{s:+.3}")),
            tail_mean(&agg.mean, Metric::Mse, DEFAULT_WINDOW)?,
        );
        let mut csv = Vec::new();
        agg.mean.write_csv(&mut csv)?;
        write_text(&out.join(format!("{}.csv", series.file_stem())), &String::from_utf8(csv).expect("utf-8"))?;
    }
    println!("CSVs in {}", out.display());
    Ok(())
}
