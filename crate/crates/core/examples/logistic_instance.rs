//! Generate the synthetic logistic-regression instance, inspect the local
//! curvature bounds, solve for the global minimizer and write the files
//! that `dkwsa run --graph --dataset` consumes.
//!
//!     cargo run --example logistic_instance -- [out-dir]

use std::path::PathBuf;

use dkwsa::experiment::generate_instance;
use dkwsa::io::{format_edge_list, write_dataset_dir, write_text, LoadedDataset};
use dkwsa::objective::{DatasetSpec, Objective};

fn main() -> dkwsa::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "instance".into()).into();
    let inst = generate_instance(&DatasetSpec::default(), 7, 1)?;

    println!("{}  max degree {}", inst.graph, inst.graph.max_degree());
    for (i, f) in inst.objectives.iter().enumerate() {
        let (mu, l) = f.strong_convexity_bounds();
        let labels = f.as_logistic().expect("logistic").labels();
        let positive = labels.iter().filter(|&&y| y > 0.0).count();
        println!("node {i}: mu = {mu:.2}  L = {l:>8.2}  +1 labels {positive}/{}", labels.len());
    }
    let grad_norm = inst
        .objectives
        .iter()
        .map(|f| f.gradient(&inst.x_star))
        .collect::<dkwsa::Result<Vec<_>>>()?
        .iter()
        .fold(vec![0.0; 5], |acc, g| acc.iter().zip(g).map(|(a, b)| a + b).collect())
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    println!("x* = {:.5?}  (|sum grad f_i(x*)| = {grad_norm:.1e})", inst.x_star);

    write_text(&out.join("graph.txt"), &format_edge_list(&inst.graph))?;
    let blobs = write_dataset_dir(&out.join("dataset"), &inst.objectives)?;
    let hash = LoadedDataset { objectives: inst.objectives, blobs }.hash();
    println!("wrote {} (dataset hash {hash})", out.display());
    Ok(())
}
