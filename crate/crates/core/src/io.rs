//! Plain-text formats for graphs and datasets, and git-style content hashes.
//!
//! Edge list:
//! ```text
//! N 4
//! 0 1
//! 1 3
//! ```
//! Dataset (one file per node): a header `d n_i kappa`, then one row per
//! datapoint `label a_1 … a_{d−1}`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha1::{Digest, Sha1};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::objective::{LocalObjective, Objective};

pub fn format_edge_list(graph: &Graph) -> String {
    let mut out = format!("N {}\n", graph.num_nodes());
    for &(i, j) in graph.edges() {
        writeln!(out, "{i} {j}").expect("writing to a String");
    }
    out
}

pub fn parse_edge_list(text: &str, origin: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, "empty edge list"))?;
    let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["N", n] => n
            .parse::<usize>()
            .map_err(|e| Error::parse(origin, format!("node count: {e}")))?,
        _ => return Err(Error::parse(origin, format!("expected 'N <num_nodes>', got {header:?}"))),
    };
    let mut edges = Vec::new();
    let mut prev = None;
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [a, b] = fields[..] else {
            return Err(Error::parse(origin, format!("line {}: expected 'i j'", lineno + 1)));
        };
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::parse(origin, format!("line {}: {e}", lineno + 1)))
        };
        let edge = (parse(a)?, parse(b)?);
        if edge.0 >= edge.1 || prev.is_some_and(|p| p >= edge) {
            return Err(Error::parse(
                origin,
                format!("line {}: edges must have i < j and be sorted", lineno + 1),
            ));
        }
        prev = Some(edge);
        edges.push(edge);
    }
    Graph::new(n, edges).map_err(|e| Error::parse(origin, e.to_string()))
}

/// Serialize a logistic objective. Quadratics have no dataset form.
pub fn format_dataset(objective: &LocalObjective) -> Result<String> {
    let l = objective
        .as_logistic()
        .ok_or_else(|| Error::InvalidSpec("only logistic objectives carry a dataset".into()))?;
    let mut out = format!("{} {} {}\n", objective.dim(), l.num_points(), l.kappa());
    for j in 0..l.num_points() {
        out.push_str(&l.labels()[j].to_string());
        for a in l.features(j) {
            write!(out, " {a}").expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_dataset(text: &str, origin: &str) -> Result<LocalObjective> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::parse(origin, "empty dataset"))?
        .split_whitespace()
        .collect();
    let [d, n, kappa] = header[..] else {
        return Err(Error::parse(origin, "header must be 'd n_i kappa'"));
    };
    let d: usize = d.parse().map_err(|e| Error::parse(origin, format!("d: {e}")))?;
    let n: usize = n.parse().map_err(|e| Error::parse(origin, format!("n_i: {e}")))?;
    let kappa: f64 = kappa
        .parse()
        .map_err(|e| Error::parse(origin, format!("kappa: {e}")))?;
    let mut labels = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n);
    for (row, line) in lines.enumerate() {
        let values = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(origin, format!("row {}: {e}", row + 1)))?;
        if values.len() != d {
            return Err(Error::parse(
                origin,
                format!("row {} has {} fields, expected {d}", row + 1, values.len()),
            ));
        }
        labels.push(values[0]);
        features.push(values[1..].to_vec());
    }
    if labels.len() != n {
        return Err(Error::parse(origin, format!("{} rows, header says {n}", labels.len())));
    }
    LocalObjective::logistic(features, labels, kappa).map_err(|e| Error::parse(origin, e.to_string()))
}

/// Git blob id: SHA-1 of `"blob <len>\0" ++ content`, lowercase hex.
pub fn git_blob_hash(content: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash over `(name, blob id)` pairs, in the given order.
pub fn combined_hash<'a>(entries: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut listing = String::new();
    for (name, blob) in entries {
        writeln!(listing, "{blob} {name}").expect("writing to a String");
    }
    git_blob_hash(listing.as_bytes())
}

pub fn dataset_file_name(node: usize) -> String {
    format!("node_{node:03}.txt")
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    parse_edge_list(&read_text(path)?, &path.display().to_string())
}

/// A dataset directory as loaded from disk.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub objectives: Vec<LocalObjective>,
    /// `(file name, blob id)` per node file.
    pub blobs: Vec<(String, String)>,
}

impl LoadedDataset {
    pub fn hash(&self) -> String {
        combined_hash(self.blobs.iter().map(|(n, b)| (n.as_str(), b.as_str())))
    }
}

/// Write one file per node; returns the `(file name, blob id)` pairs.
pub fn write_dataset_dir(dir: &Path, objectives: &[LocalObjective]) -> Result<Vec<(String, String)>> {
    objectives
        .iter()
        .enumerate()
        .map(|(i, obj)| {
            let name = dataset_file_name(i);
            let text = format_dataset(obj)?;
            write_text(&dir.join(&name), &text)?;
            Ok((name, git_blob_hash(text.as_bytes())))
        })
        .collect()
}

/// Load `node_000.txt`, `node_001.txt`, … for `num_nodes` nodes.
pub fn load_dataset_dir(dir: &Path, num_nodes: usize) -> Result<LoadedDataset> {
    let mut objectives = Vec::with_capacity(num_nodes);
    let mut blobs = Vec::with_capacity(num_nodes);
    for i in 0..num_nodes {
        let name = dataset_file_name(i);
        let path: PathBuf = dir.join(&name);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        objectives.push(parse_dataset(&text, &path.display().to_string())?);
        blobs.push((name, git_blob_hash(text.as_bytes())));
    }
    Ok(LoadedDataset { objectives, blobs })
}
