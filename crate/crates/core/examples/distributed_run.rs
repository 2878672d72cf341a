//! One run of the distributed method on the reference instance with a
//! trace recorder and a custom observer side by side.
//!
//!     cargo run --release --example distributed_run -- [p_fail]

use dkwsa::estimator::WeightSchedule;
use dkwsa::experiment::{generate_instance, recording_grid, TraceRecorder};
use dkwsa::graph::RandomNetworkModel;
use dkwsa::objective::{DatasetSpec, NoiseModel};
use dkwsa::optimizer::{run_distributed, AlgorithmConfig, DistributedState, Observer};

/// Forwards to two observers.
struct Both<'a, A, B>(&'a mut A, &'a mut B);

impl<A: Observer, B: Observer> Observer for Both<'_, A, B> {
    fn observe(&mut self, state: &DistributedState, queries: u64) {
        self.0.observe(state, queries);
        self.1.observe(state, queries);
    }
}

fn main() -> dkwsa::Result<()> {
    let p_fail: f64 = std::env::args().nth(1).map_or(0.5, |s| s.parse().expect("p_fail"));
    let iters = 10_000;
    let inst = generate_instance(&DatasetSpec::default(), 7, 1)?;
    let config = AlgorithmConfig::new(
        RandomNetworkModel::new(inst.graph, p_fail)?,
        inst.objectives,
        NoiseModel::Gaussian { sigma: 1.0 },
        WeightSchedule::reference(7),
        iters,
        1,
    )?;

    let mut recorder = TraceRecorder::new(inst.x_star.clone(), recording_grid(iters));
    let mut spread = Vec::new();
    let mut widest = |s: &DistributedState, _q: u64| {
        if s.iteration().is_multiple_of(2_500) {
            let first = s.row(0).to_vec();
            let max_dev = s
                .rows()
                .flat_map(|r| r.iter().zip(&first).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            spread.push((s.iteration(), max_dev));
        }
    };
    let summary = run_distributed(&config, &mut Both(&mut recorder, &mut widest))?;
    let trace = recorder.finish()?;

    println!("p_fail = {p_fail}, {} oracle queries", summary.queries);
    println!("{:>6} {:>14} {:>14} {:>14}", "k", "mse", "disagreement", "avg gap");
    for r in trace.records.iter().step_by(20) {
        println!("{:>6} {:>14.6e} {:>14.6e} {:>14.6e}", r.k, r.mse, r.disagreement_sq, r.avg_gap_sq);
    }
    for (k, dev) in &spread {
        println!("k={k:>5}  max |x_i - x_0| = {dev:.3e}");
    }
    println!("node 0 final {:.4?}\nx*           {:.4?}", summary.final_state.row(0), inst.x_star);
    Ok(())
}
