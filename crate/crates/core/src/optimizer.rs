//! Consensus + innovations Kiefer-Wolfowitz optimization over a randomly
//! varying network, and the centralized fusion-node baselines.
//!
//! Node `i` updates synchronously as
//!
//! ```text
//! x_i(k+1) = x_i(k) − β_k Σ_{j ∈ Ω_i(k)} (x_i(k) − x_j(k)) − α_k g_i(x_i(k))
//! ```
//!
//! where `Ω_i(k)` is its neighborhood in the network sampled for iteration
//! `k` and `g_i` is the two-point estimate from its own noisy oracle.

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::{kw_gradient, validate_schedule, StepWeights, WeightSchedule};
use crate::graph::{sample_network, Graph, RandomNetworkModel};
use crate::objective::{LocalObjective, MeanObjective, NoiseModel, Objective, ZerothOrderOracle};
use crate::rng::{stream, Purpose, Stream, StreamKey};

/// Stacked iterates of all nodes: row `i` is `x_i(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedState {
    iterates: Vec<f64>,
    num_nodes: usize,
    dim: usize,
    iteration: u64,
}

impl DistributedState {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows
            .first()
            .ok_or_else(|| Error::InvalidSpec("state needs at least one node".into()))?
            .len();
        if dim == 0 {
            return Err(Error::InvalidSpec("state dimension must be positive".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(DistributedState {
            iterates: rows.concat(),
            num_nodes: rows.len(),
            dim,
            iteration: 0,
        })
    }

    pub fn zeros(num_nodes: usize, dim: usize) -> Self {
        DistributedState {
            iterates: vec![0.0; num_nodes * dim],
            num_nodes,
            dim,
            iteration: 0,
        }
    }

    /// Every node starts at `x`.
    pub fn replicated(num_nodes: usize, x: &[f64]) -> Self {
        DistributedState {
            iterates: x.repeat(num_nodes),
            num_nodes,
            dim: x.len(),
            iteration: 0,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.iterates[node * self.dim..(node + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.iterates.chunks_exact(self.dim)
    }

    /// The stacked vector `[x_1ᵀ, …, x_Nᵀ]ᵀ`.
    pub fn stacked(&self) -> &[f64] {
        &self.iterates
    }

    pub fn with_iteration(mut self, iteration: u64) -> Self {
        self.iteration = iteration;
        self
    }

    fn first_non_finite_node(&self) -> Option<usize> {
        self.rows().position(|r| r.iter().any(|v| !v.is_finite()))
    }
}

/// `x̄ = (1/N) Σ x_i`, summed in node order.
pub fn network_average(state: &DistributedState) -> Vec<f64> {
    let mut avg = vec![0.0; state.dim];
    for row in state.rows() {
        for (a, v) in avg.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = state.num_nodes as f64;
    avg.into_iter().map(|a| a / n).collect()
}

/// One synchronous update of every node from the same pre-step state.
///
/// `noise_streams[i]` feeds node `i`'s oracle. The consensus sum runs over
/// neighbors in ascending index order.
pub fn distributed_step<O: Objective, R: Rng>(
    state: &DistributedState,
    net: &Graph,
    oracles: &mut [ZerothOrderOracle<O>],
    weights: StepWeights,
    noise_streams: &mut [R],
) -> Result<DistributedState> {
    let n = state.num_nodes;
    if net.num_nodes() != n || oracles.len() != n || noise_streams.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if net.num_nodes() != n {
                net.num_nodes()
            } else if oracles.len() != n {
                oracles.len()
            } else {
                noise_streams.len()
            },
        });
    }
    let d = state.dim;
    let neighbors = net.neighbors();
    let mut next = Vec::with_capacity(n * d);
    for i in 0..n {
        let xi = state.row(i);
        let mut consensus = vec![0.0; d];
        for &j in &neighbors[i] {
            for ((acc, a), b) in consensus.iter_mut().zip(xi).zip(state.row(j)) {
                *acc += a - b;
            }
        }
        let g = kw_gradient(&mut oracles[i], xi, weights.c, &mut noise_streams[i])?;
        for t in 0..d {
            let v = xi[t] - weights.beta * consensus[t] - weights.alpha * g.value[t];
            if !v.is_finite() {
                return Err(Error::Divergence {
                    iteration: state.iteration,
                    node: i,
                    run: None,
                });
            }
            next.push(v);
        }
    }
    Ok(DistributedState {
        iterates: next,
        num_nodes: n,
        dim: d,
        iteration: state.iteration + 1,
    })
}

/// Receives the state at iteration 0 and after every step, together with
/// the total number of oracle queries made so far.
pub trait Observer {
    fn observe(&mut self, state: &DistributedState, queries: u64);
}

impl<F: FnMut(&DistributedState, u64)> Observer for F {
    fn observe(&mut self, state: &DistributedState, queries: u64) {
        self(state, queries)
    }
}

/// Observer that ignores everything.
pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: &DistributedState, _: u64) {}
}

#[derive(Debug, Clone)]
pub struct AlgorithmConfig {
    pub network: RandomNetworkModel,
    pub objectives: Vec<LocalObjective>,
    pub noise: NoiseModel,
    pub schedule: WeightSchedule,
    pub initial: DistributedState,
    pub max_iterations: u64,
    pub seed: u64,
    /// Monte Carlo run index; selects the run's random streams.
    pub run: usize,
}

impl AlgorithmConfig {
    /// Zero initial iterates, run 0.
    pub fn new(
        network: RandomNetworkModel,
        objectives: Vec<LocalObjective>,
        noise: NoiseModel,
        schedule: WeightSchedule,
        max_iterations: u64,
        seed: u64,
    ) -> Result<Self> {
        let d = objectives
            .first()
            .ok_or_else(|| Error::InvalidSpec("no objectives".into()))?
            .dim();
        let config = AlgorithmConfig {
            initial: DistributedState::zeros(objectives.len(), d),
            network,
            objectives,
            noise,
            schedule,
            max_iterations,
            seed,
            run: 0,
        };
        config.validate()?;
        Ok(config)
    }

    /// Smallest strong convexity modulus over the local objectives.
    pub fn min_strong_convexity(&self) -> f64 {
        min_modulus(&self.objectives)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.network.num_nodes();
        if self.objectives.len() != n {
            return Err(Error::InvalidSpec(format!(
                "{} objectives for a {n}-node network",
                self.objectives.len()
            )));
        }
        let d = self.objectives[0].dim();
        if let Some(o) = self.objectives.iter().find(|o| o.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: o.dim(),
            });
        }
        if self.initial.num_nodes() != n || self.initial.dim() != d {
            return Err(Error::InvalidSpec(format!(
                "initial state is {}x{}, expected {n}x{d}",
                self.initial.num_nodes(),
                self.initial.dim()
            )));
        }
        self.noise.validate()?;
        validate_schedule(&self.schedule, self.min_strong_convexity()).map_err(Error::Schedule)
    }
}

fn min_modulus(objectives: &[LocalObjective]) -> f64 {
    objectives
        .iter()
        .map(|o| o.strong_convexity_bounds().0)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_state: DistributedState,
    pub queries: u64,
}

/// Run `max_iterations` steps of the distributed method.
pub fn run_distributed(config: &AlgorithmConfig, observer: &mut impl Observer) -> Result<RunSummary> {
    let schedule = config.schedule;
    run_distributed_with(config, |k| schedule.at(k), observer)
}

/// Like [`run_distributed`] but with weights supplied per iteration, e.g. to
/// switch the innovation term off.
pub fn run_distributed_with(
    config: &AlgorithmConfig,
    weights: impl Fn(u64) -> StepWeights,
    observer: &mut impl Observer,
) -> Result<RunSummary> {
    config.validate()?;
    let n = config.network.num_nodes();
    let mut network_rng = stream(config.seed, StreamKey::new(config.run, 0, Purpose::Network));
    let mut noise_streams: Vec<Stream> = (0..n)
        .map(|i| stream(config.seed, StreamKey::new(config.run, i, Purpose::Noise)))
        .collect();
    let mut oracles: Vec<_> = config
        .objectives
        .iter()
        .map(|o| ZerothOrderOracle::new(o, config.noise))
        .collect();
    let tag = |e: Error| match e {
        Error::Divergence {
            iteration, node, ..
        } => Error::Divergence {
            iteration,
            node,
            run: Some(config.run),
        },
        other => other,
    };

    let mut state = config.initial.clone().with_iteration(0);
    if let Some(node) = state.first_non_finite_node() {
        return Err(tag(Error::Divergence {
            iteration: 0,
            node,
            run: None,
        }));
    }
    observer.observe(&state, 0);
    let mut queries = 0;
    for k in 0..config.max_iterations {
        let net = sample_network(&config.network, &mut network_rng);
        state = distributed_step(&state, &net, &mut oracles, weights(k), &mut noise_streams)
            .map_err(tag)?;
        queries = oracles.iter().map(|o| o.queries()).sum();
        observer.observe(&state, queries);
    }
    Ok(RunSummary {
        final_state: state,
        queries,
    })
}

/// Centralized baselines with access to every node's data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Sampled-datapoint stochastic gradients of every node, summed at a
    /// fusion node, step `α_k/N`.
    SgdFusion,
    /// Two-point estimate of `∇((1/N) Σ f_i)` from a single noisy oracle,
    /// step `α_k`.
    KwsaFusion,
}

#[derive(Debug, Clone)]
pub struct CentralizedConfig {
    pub mode: Baseline,
    pub objectives: Vec<LocalObjective>,
    pub noise: NoiseModel,
    pub schedule: WeightSchedule,
    pub initial: Vec<f64>,
    pub max_iterations: u64,
    pub seed: u64,
    pub run: usize,
}

impl CentralizedConfig {
    pub fn validate(&self) -> Result<()> {
        let mean = MeanObjective::new(&self.objectives)?;
        mean.check_dim(&self.initial)?;
        if self.mode == Baseline::SgdFusion
            && self.objectives.iter().any(|o| o.as_logistic().is_none())
        {
            return Err(Error::InvalidSpec(
                "sgd-fusion baseline needs logistic objectives with datapoints".into(),
            ));
        }
        self.noise.validate()?;
        validate_schedule(&self.schedule, min_modulus(&self.objectives)).map_err(Error::Schedule)
    }
}

/// Run a centralized baseline. The observer sees a single-row state.
///
/// `KwsaFusion` draws its noise from the stream of node 0, so a one-node
/// distributed run and this baseline produce identical trajectories.
pub fn run_centralized(
    config: &CentralizedConfig,
    observer: &mut impl Observer,
) -> Result<RunSummary> {
    config.validate()?;
    let n = config.objectives.len();
    let mut y = config.initial.clone();
    let mut state = DistributedState::replicated(1, &y);
    let diverged = |k: u64| Error::Divergence {
        iteration: k,
        node: 0,
        run: Some(config.run),
    };
    observer.observe(&state, 0);
    let mut queries = 0;

    match config.mode {
        Baseline::KwsaFusion => {
            let mean = MeanObjective::new(&config.objectives)?;
            let mut oracle = ZerothOrderOracle::new(mean, config.noise);
            let mut rng = stream(config.seed, StreamKey::new(config.run, 0, Purpose::Noise));
            for k in 0..config.max_iterations {
                let w = config.schedule.at(k);
                let g = kw_gradient(&mut oracle, &y, w.c, &mut rng)?;
                for (yt, gt) in y.iter_mut().zip(&g.value) {
                    *yt -= w.alpha * gt;
                }
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(diverged(k));
                }
                queries = oracle.queries();
                state = DistributedState::replicated(1, &y).with_iteration(k + 1);
                observer.observe(&state, queries);
            }
        }
        Baseline::SgdFusion => {
            let mut data_streams: Vec<Stream> = (0..n)
                .map(|i| stream(config.seed, StreamKey::new(config.run, i, Purpose::Data)))
                .collect();
            for k in 0..config.max_iterations {
                let step = config.schedule.at(k).alpha / n as f64;
                let mut total = vec![0.0; y.len()];
                for (obj, rng) in config.objectives.iter().zip(&mut data_streams) {
                    let local = obj.as_logistic().expect("validated");
                    let j = rng.random_range(0..local.num_points());
                    // Unbiased for ∇f_i: n_i·∇ℓ(y; a_ij, b_ij) + κ y.
                    let scale = local.num_points() as f64;
                    for ((t, g), yt) in total
                        .iter_mut()
                        .zip(local.point_loss_gradient(j, &y))
                        .zip(&y)
                    {
                        *t += scale * g + local.kappa() * yt;
                    }
                }
                for (yt, t) in y.iter_mut().zip(&total) {
                    *yt -= step * t;
                }
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(diverged(k));
                }
                state = DistributedState::replicated(1, &y).with_iteration(k + 1);
                observer.observe(&state, queries);
            }
        }
    }
    Ok(RunSummary {
        final_state: state,
        queries,
    })
}
