//! Laplacians and algebraic connectivity of a few small graphs, then a
//! random geometric graph with an automatically chosen radius.
//!
//!     cargo run --example laplacian_spectrum

use dkwsa::graph::{
    algebraic_connectivity, generate_geometric_graph, laplacian_of, symmetric_eigenvalues,
    GeometricGraphSpec, Graph, Radius,
};
use dkwsa::rng::{stream, Purpose, StreamKey};

fn main() -> dkwsa::Result<()> {
    let graphs = [
        ("path(3)", Graph::path(3)?),
        ("path(10)", Graph::path(10)?),
        ("complete(5)", Graph::complete(5)?),
        ("two components", Graph::new(4, [(0, 1), (2, 3)])?),
    ];
    for (name, g) in &graphs {
        let lap = laplacian_of(g);
        let eig = symmetric_eigenvalues(lap.as_matrix())?;
        println!(
            "{name:<15} lambda2 = {:.6}  spectrum = {:.3?}",
            algebraic_connectivity(lap.as_matrix())?,
            eig
        );
    }

    let spec = GeometricGraphSpec::new(10, Radius::Auto).with_max_degree(7);
    let g = generate_geometric_graph(&spec, &mut stream(1, StreamKey::new(0, 0, Purpose::Instance)))?;
    let lambda2 = algebraic_connectivity(laplacian_of(&g).as_matrix())?;
    println!("\n{spec}: {g}, max degree {}, lambda2 = {lambda2:.4}", g.max_degree());
    for (i, nbrs) in g.neighbors().iter().enumerate() {
        println!("  {i}: {nbrs:?}");
    }
    Ok(())
}
