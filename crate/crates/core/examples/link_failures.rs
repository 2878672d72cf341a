//! Sampling i.i.d. link failures and checking that the empirical mean
//! Laplacian approaches `(1 - p) L`.
//!
//!     cargo run --example link_failures

use dkwsa::graph::{
    algebraic_connectivity, expected_laplacian, laplacian_of, sample_network, Graph,
    RandomNetworkModel,
};
use dkwsa::rng::{stream, Purpose, StreamKey};
use nalgebra::DMatrix;

fn main() -> dkwsa::Result<()> {
    let base = Graph::new(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (3, 5)])?;
    println!("base {base}, lambda2 = {:.4}", algebraic_connectivity(laplacian_of(&base).as_matrix())?);

    for p in [0.0, 0.5, 0.7, 1.0] {
        let model = RandomNetworkModel::new(base.clone(), p)?;
        let mut rng = stream(42, StreamKey::new(0, 0, Purpose::Network));
        let samples = 10_000;
        let mut connected = 0;
        let mut edges = 0;
        let mut sum = DMatrix::zeros(6, 6);
        for _ in 0..samples {
            let net = sample_network(&model, &mut rng);
            connected += net.is_connected() as usize;
            edges += net.num_edges();
            sum += laplacian_of(&net).into_matrix();
        }
        let expected = expected_laplacian(&model);
        let err = (sum / samples as f64 - &expected).abs().max();
        println!(
            "p_fail={p:<4} mean edges {:.3}  connected {:5.1}%  lambda2(E[L]) = {:.4}  max |mean L - E[L]| = {err:.4}",
            edges as f64 / samples as f64,
            100.0 * connected as f64 / samples as f64,
            algebraic_connectivity(&expected)?,
        );
    }
    Ok(())
}
