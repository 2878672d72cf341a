//! Centralized fusion baselines next to the distributed method.
//!
//!     cargo run --release --example centralized_baselines

use dkwsa::estimator::WeightSchedule;
use dkwsa::experiment::{generate_instance, recording_grid, TraceRecorder};
use dkwsa::graph::RandomNetworkModel;
use dkwsa::objective::{DatasetSpec, NoiseModel};
use dkwsa::optimizer::{run_centralized, run_distributed, AlgorithmConfig, Baseline, CentralizedConfig};

fn main() -> dkwsa::Result<()> {
    let iters = 10_000;
    let inst = generate_instance(&DatasetSpec::default(), 7, 1)?;
    let noise = NoiseModel::Gaussian { sigma: 1.0 };
    let schedule = WeightSchedule::reference(7);

    let report = |name: &str, recorder: TraceRecorder, queries: u64| -> dkwsa::Result<()> {
        let trace = recorder.finish()?;
        let at = |k: u64| trace.records.iter().find(|r| r.k >= k).map_or(f64::NAN, |r| r.mse);
        println!(
            "{name:<14} mse@100 {:>10.4e}  mse@1000 {:>10.4e}  mse@K {:>10.4e}  queries {queries}",
            at(100),
            at(1_000),
            trace.last().expect("records").mse
        );
        Ok(())
    };

    let config = AlgorithmConfig::new(
        RandomNetworkModel::fixed(inst.graph.clone()),
        inst.objectives.clone(),
        noise,
        schedule,
        iters,
        1,
    )?;
    let mut rec = TraceRecorder::new(inst.x_star.clone(), recording_grid(iters));
    let s = run_distributed(&config, &mut rec)?;
    report("distributed", rec, s.queries)?;

    for (name, mode) in [("kwsa-fusion", Baseline::KwsaFusion), ("sgd-fusion", Baseline::SgdFusion)] {
        let central = CentralizedConfig {
            mode,
            objectives: inst.objectives.clone(),
            noise,
            schedule,
            initial: vec![0.0; 5],
            max_iterations: iters,
            seed: 1,
            run: 0,
        };
        let mut rec = TraceRecorder::new(inst.x_star.clone(), recording_grid(iters));
        let s = run_centralized(&central, &mut rec)?;
        report(name, rec, s.queries)?;
    }
    Ok(())
}
