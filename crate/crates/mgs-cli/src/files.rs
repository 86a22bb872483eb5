// SPDX-License-Identifier: Apache-2.0

//! Plain-text file formats: whitespace-separated edge lists ("u v" per
//! line), permutations ("old new" per line), community labels ("v c" per
//! line) and key=value config files. Lines starting with '#' are comments.

use anyhow::{bail, Context, Result};
use mgs_core::graph::{DirectedGraph, Partition, Permutation, Vertex};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub fn read_graph(path: &Path) -> Result<DirectedGraph> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading edge list {}", path.display()))?;
    let (g, _) = DirectedGraph::parse_edge_list(&text)
        .with_context(|| format!("parsing edge list {}", path.display()))?;
    Ok(g)
}

pub fn write_graph(path: &Path, g: &DirectedGraph) -> Result<()> {
    let mut out = String::new();
    for v in g.vertices() {
        for &t in g.successors(v) {
            writeln!(out, "{v} {t}").expect("string write");
        }
    }
    fs::write(path, out).with_context(|| format!("writing edge list {}", path.display()))?;
    Ok(())
}

pub fn read_permutation(path: &Path, n: u32) -> Result<Permutation> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading permutation {}", path.display()))?;
    let mut forward: Vec<Vertex> = vec![0; n as usize];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (old, new) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => bail!("{}:{}: expected 'old new'", path.display(), i + 1),
        };
        let old: u32 = old.parse().with_context(|| format!("{}:{}", path.display(), i + 1))?;
        let new: u32 = new.parse().with_context(|| format!("{}:{}", path.display(), i + 1))?;
        if old == 0 || old > n {
            bail!("{}:{}: vertex {} outside 1..={}", path.display(), i + 1, old, n);
        }
        forward[(old - 1) as usize] = new;
    }
    Ok(Permutation::from_forward(forward)?)
}

pub fn write_permutation(path: &Path, p: &Permutation) -> Result<()> {
    let mut out = String::new();
    for (i, &new) in p.as_slice().iter().enumerate() {
        writeln!(out, "{} {}", i + 1, new).expect("string write");
    }
    fs::write(path, out).with_context(|| format!("writing permutation {}", path.display()))?;
    Ok(())
}

pub fn write_communities(path: &Path, part: &Partition) -> Result<()> {
    let mut out = String::new();
    for v in 1..=part.len() {
        writeln!(out, "{} {}", v, part.cluster_of(v)).expect("string write");
    }
    fs::write(path, out).with_context(|| format!("writing communities {}", path.display()))?;
    Ok(())
}

pub fn read_communities(path: &Path, n: u32) -> Result<Partition> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading communities {}", path.display()))?;
    let mut labels: Vec<u32> = vec![u32::MAX; n as usize];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (v, c) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => bail!("{}:{}: expected 'vertex cluster'", path.display(), i + 1),
        };
        let v: u32 = v.parse().with_context(|| format!("{}:{}", path.display(), i + 1))?;
        let c: u32 = c.parse().with_context(|| format!("{}:{}", path.display(), i + 1))?;
        if v == 0 || v > n {
            bail!("{}:{}: vertex {} outside 1..={}", path.display(), i + 1, v, n);
        }
        labels[(v - 1) as usize] = c;
    }
    if let Some(v) = labels.iter().position(|&c| c == u32::MAX) {
        bail!("{}: vertex {} has no community", path.display(), v + 1);
    }
    Ok(Partition::from_labels(&labels))
}

/// key=value pairs, one per line; later keys win.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), i + 1);
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
