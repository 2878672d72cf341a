//! Distributed Kiefer-Wolfowitz stochastic approximation over i.i.d. random
//! networks.
//!
//! Every node holds a private strongly convex cost it can only query through
//! a noisy zeroth-order oracle. At each iteration the nodes average with
//! whichever neighbors are reachable in a freshly sampled link-failure
//! network (consensus) and step along a two-point finite-difference gradient
//! estimate of their own cost (innovations). The crate provides the engine,
//! the synthetic logistic-regression instance, centralized baselines, and a
//! Monte Carlo harness that measures the empirical mean-square-error decay
//! rate in log-log space.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | graphs, Laplacians, λ₂, link-failure sampling, geometric graphs |
//! | [`objective`] | quadratic / logistic costs, noisy oracle, dataset generator, ground truth |
//! | [`estimator`] | weight schedules, step-size validation, KW gradient estimate |
//! | [`optimizer`] | distributed step and run, centralized baselines |
//! | [`experiment`] | metrics, traces, Monte Carlo aggregation, rate fits |
//! | [`io`] | edge-list and dataset text formats, content hashes |
//! | [`cli`] | the `gen`, `run` and `rate` commands |
//!
//! Runnable walkthroughs live in `examples/`.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod objective;
pub mod optimizer;
pub mod rng;

pub use error::{Error, Result};
