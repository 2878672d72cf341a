use dkwsa::estimator::{kw_gradient, validate_schedule, WeightSchedule};
use dkwsa::experiment::{
    avg_gap_sq, disagreement_sq, estimate_rate, mse_across_nodes, recording_grid, RunTrace,
    TraceRecord,
};
use dkwsa::graph::{
    algebraic_connectivity, expected_laplacian, laplacian_of, sample_network,
    symmetric_eigenvalues, Graph, RandomNetworkModel,
};
use dkwsa::objective::{LocalObjective, NoiseModel, Objective, ZerothOrderOracle};
use dkwsa::optimizer::{run_distributed, AlgorithmConfig, DistributedState, NoObserver};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (2..=max_nodes).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        proptest::collection::vec(any::<bool>(), pairs.len()).prop_map(move |keep| {
            let edges = pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| *e);
            Graph::new(n, edges).unwrap()
        })
    })
}

fn state_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=8usize, 1..=5usize).prop_flat_map(|(n, d)| {
        proptest::collection::vec(proptest::collection::vec(-50.0..50.0f64, d), n)
    })
}

fn logistic_strategy() -> impl Strategy<Value = LocalObjective> {
    (1..=4usize, 1..=12usize).prop_flat_map(|(fd, n)| {
        (
            proptest::collection::vec(proptest::collection::vec(-5.0..5.0f64, fd), n),
            proptest::collection::vec(prop_oneof![Just(-1.0), Just(1.0)], n),
            0.05..2.0f64,
        )
            .prop_map(|(a, y, kappa)| LocalObjective::logistic(a, y, kappa).unwrap())
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_laplacians_are_valid(g in graph_strategy(9), p in 0.0..=1.0f64, seed in any::<u64>()) {
        let model = RandomNetworkModel::new(g.clone(), p).unwrap();
        let net = sample_network(&model, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(net.edges().iter().all(|&(i, j)| g.contains_edge(i, j)));
        let lap = laplacian_of(&net).into_matrix();
        prop_assert_eq!(&lap, &lap.transpose());
        for (i, deg) in net.degrees().into_iter().enumerate() {
            prop_assert!(lap.row(i).sum().abs() < 1e-12);
            prop_assert_eq!(lap[(i, i)], deg as f64);
        }
        let eig = symmetric_eigenvalues(&lap).unwrap();
        prop_assert!(eig[0] >= -1e-9);
    }

    #[test]
    fn connectivity_survives_relabeling(g in graph_strategy(8), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..g.num_nodes()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let h = g.relabel(&perm).unwrap();
        let a = algebraic_connectivity(laplacian_of(&g).as_matrix()).unwrap();
        let b = algebraic_connectivity(laplacian_of(&h).as_matrix()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert_eq!(a > 1e-8, g.is_connected());
    }

    #[test]
    fn logistic_gradient_matches_finite_differences(f in logistic_strategy(), seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..f.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = f.gradient(&x).unwrap();
        let (_, l) = f.strong_convexity_bounds();
        let h = 1e-5;
        for j in 0..f.dim() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (f.evaluate(&xp).unwrap() - f.evaluate(&xm).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() <= 1e-6 * l.max(1.0) * (1.0 + norm(&x)), "j={} fd={} g={}", j, fd, g[j]);
        }
    }

    #[test]
    fn hessian_respects_convexity_bounds(f in logistic_strategy(), seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..f.dim()).map(|_| rng.random_range(-10.0..10.0)).collect();
        let (mu, l) = f.strong_convexity_bounds();
        let eig = symmetric_eigenvalues(&f.hessian(&x).unwrap()).unwrap();
        prop_assert!(eig[0] >= mu - 1e-9);
        prop_assert!(*eig.last().unwrap() <= l + 1e-9);
    }

    #[test]
    fn kw_bias_within_bound(f in logistic_strategy(), c in 0.01..1.0f64, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..f.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (mu, l) = f.strong_convexity_bounds();
        let mut oracle = ZerothOrderOracle::new(&f, NoiseModel::noiseless());
        let g = kw_gradient(&mut oracle, &x, c, &mut rng).unwrap();
        prop_assert_eq!(g.queries, 2 * f.dim() as u64);
        for (a, b) in g.value.iter().zip(f.gradient(&x).unwrap()) {
            prop_assert!((a - b).abs() <= c * (l - mu) / 2.0 + 1e-10);
        }
    }

    #[test]
    fn mse_splits_into_gap_and_disagreement(rows in state_strategy(), seed in any::<u64>()) {
        use rand::Rng;
        let state = DistributedState::new(&rows).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x_star: Vec<f64> = (0..state.dim()).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mse = mse_across_nodes(&state, &x_star).unwrap();
        let rhs = avg_gap_sq(&state, &x_star).unwrap() + disagreement_sq(&state) / rows.len() as f64;
        prop_assert!((mse - rhs).abs() <= 1e-10 * mse.max(1e-300));
    }

    #[test]
    fn disagreement_is_translation_invariant(rows in state_strategy(), shift in -100.0..100.0f64) {
        let state = DistributedState::new(&rows).unwrap();
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
        let a = disagreement_sq(&state);
        let b = disagreement_sq(&DistributedState::new(&shifted).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0) * (1.0 + shift.abs()));
    }

    #[test]
    fn schedule_validation_matches_conditions(
        alpha0 in 0.1..5.0f64, delta in -0.2..0.8f64, tau in -0.2..1.3f64, mu in 0.01..2.0f64,
    ) {
        let s = WeightSchedule::new(alpha0, 0.1, 1.0, delta, tau).unwrap();
        let ok = delta > 0.0 && delta < 0.5 && tau > 0.0 && tau < 1.0 && mu * alpha0 < 1.0;
        prop_assert_eq!(validate_schedule(&s, mu).is_ok(), ok);
    }

    #[test]
    fn exact_power_laws_are_recovered(exponent in 0.05..2.0f64, scale in 1e-3..1e3f64) {
        let series: Vec<(u64, f64)> = recording_grid(10_000)
            .into_iter()
            .map(|k| (k, scale / ((k + 1) as f64).powf(exponent)))
            .collect();
        let fit = estimate_rate(&series, 0.25).unwrap();
        prop_assert!((fit.slope + exponent).abs() < 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trace_csv_round_trips(values in proptest::collection::vec((0.0..1e6f64, 0.0..1e6f64, 0.0..1e6f64), 1..40)) {
        let records = values
            .iter()
            .enumerate()
            .map(|(i, &(mse, dis, gap))| TraceRecord { k: 3 * i as u64, mse, disagreement_sq: dis, avg_gap_sq: gap, queries: 7 * i as u64 })
            .collect();
        let trace = RunTrace { records };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        prop_assert_eq!(RunTrace::read_csv(buf.as_slice(), "t").unwrap(), trace);
    }
}

fn small_config(n: usize, d: usize, p_fail: f64, iters: u64, seed: u64) -> AlgorithmConfig {
    let objectives = (0..n)
        .map(|i| {
            let a = DMatrix::from_diagonal_element(d, d, 0.5 + 0.04 * i as f64);
            LocalObjective::quadratic(a, nalgebra::DVector::from_element(d, i as f64)).unwrap()
        })
        .collect();
    AlgorithmConfig::new(
        RandomNetworkModel::new(Graph::complete(n).unwrap(), p_fail).unwrap(),
        objectives,
        NoiseModel::Gaussian { sigma: 1.0 },
        WeightSchedule::reference(n.saturating_sub(1).max(1)),
        iters,
        seed,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn queries_total_two_d_n_k(n in 1..=5usize, d in 1..=4usize, iters in 0..60u64, p in 0.0..=1.0f64) {
        let out = run_distributed(&small_config(n, d, p, iters, 3), &mut NoObserver).unwrap();
        prop_assert_eq!(out.queries, 2 * d as u64 * n as u64 * iters);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), p in 0.0..=1.0f64) {
        let config = small_config(4, 2, p, 50, seed);
        let a = run_distributed(&config, &mut NoObserver).unwrap();
        let b = run_distributed(&config, &mut NoObserver).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mean_sampled_laplacian_approaches_expectation(g in graph_strategy(6), p in 0.0..=1.0f64, seed in any::<u64>()) {
        let model = RandomNetworkModel::new(g, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = 20_000;
        let n = model.num_nodes();
        let mut sum = DMatrix::zeros(n, n);
        for _ in 0..samples {
            sum += laplacian_of(&sample_network(&model, &mut rng)).into_matrix();
        }
        let mean = sum / samples as f64;
        // Each off-diagonal entry is a Bernoulli mean; 5 sigma with sigma <= 0.5/sqrt(samples).
        let tol = 5.0 * 0.5 / (samples as f64).sqrt();
        let expected = expected_laplacian(&model);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    prop_assert!((mean[(i, j)] - expected[(i, j)]).abs() <= tol);
                }
            }
        }
    }
}
