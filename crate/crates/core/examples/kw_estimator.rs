//! The two-point Kiefer-Wolfowitz gradient estimate: bias against the exact
//! gradient and variance under Gaussian noise, across spacings.
//!
//!     cargo run --example kw_estimator

use dkwsa::estimator::kw_gradient;
use dkwsa::objective::{DatasetSpec, NoiseModel, Objective, ZerothOrderOracle};
use dkwsa::rng::{stream, Purpose, StreamKey};

fn main() -> dkwsa::Result<()> {
    let objectives =
        dkwsa::objective::generate_dataset(&DatasetSpec::default(), &mut stream(1, StreamKey::new(0, 1, Purpose::Instance)))?;
    let f = &objectives[2];
    let (mu, l) = f.strong_convexity_bounds();
    let x = vec![0.1, -0.2, 0.3, 0.0, 0.5];
    let exact = f.gradient(&x)?;
    println!("node 2: mu = {mu:.3}, L = {l:.3}\nexact gradient {exact:.5?}\n");

    let mut rng = stream(1, StreamKey::new(0, 0, Purpose::Noise));
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "c", "max bias", "c(L-mu)/2", "var[g_0]", "1/(2c^2)");
    for c in [1.0, 0.5, 0.1, 0.01] {
        let mut clean = ZerothOrderOracle::new(f, NoiseModel::noiseless());
        let g = kw_gradient(&mut clean, &x, c, &mut rng)?;
        let bias = g.value.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

        let mut noisy = ZerothOrderOracle::new(f, NoiseModel::Gaussian { sigma: 1.0 });
        let draws: Vec<f64> = (0..20_000)
            .map(|_| kw_gradient(&mut noisy, &x, c, &mut rng).map(|g| g.value[0]))
            .collect::<dkwsa::Result<_>>()?;
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        println!(
            "{c:>8} {bias:>12.3e} {:>12.3e} {var:>12.3} {:>12.3}",
            c * (l - mu) / 2.0,
            1.0 / (2.0 * c * c)
        );
        assert_eq!(noisy.queries(), 20_000 * 2 * x.len() as u64);
    }
    Ok(())
}
