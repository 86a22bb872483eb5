// SPDX-License-Identifier: Apache-2.0

//! Synthetic graph generators: directed Erdos-Renyi, a locality web model
//! with power-law outdegrees, and the LFR community benchmark with its
//! planted assignment. All generators are deterministic given the seed.

use mgs_core::graph::{DirectedGraph, Partition};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeSet;
use std::error::Error;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GenKind {
    Er {
        n: u32,
        p: f64,
    },
    Web {
        n: u32,
        avg_deg: f64,
        locality_width: u32,
        long_link_frac: f64,
        deg_exponent: f64,
    },
    Lfr {
        n: u32,
        avg_deg: f64,
        max_deg: u32,
        deg_exponent: f64,
        community_exponent: f64,
        mu: f64,
    },
}

impl GenKind {
    /// Locality web with the stock parameters: width 200, 10% long links,
    /// outdegree exponent 2.2.
    pub fn web(n: u32, avg_deg: f64) -> Self {
        GenKind::Web { n, avg_deg, locality_width: 200, long_link_frac: 0.1, deg_exponent: 2.2 }
    }

    /// LFR with the stock exponents (degree 2.5, community 1.5) and a
    /// degree cap suited to mid-sized benchmarks.
    pub fn lfr(n: u32, avg_deg: f64, mu: f64) -> Self {
        GenKind::Lfr {
            n,
            avg_deg,
            max_deg: 50,
            deg_exponent: 2.5,
            community_exponent: 1.5,
            mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub seed: u64,
}

#[derive(Debug)]
pub struct Generated {
    pub graph: DirectedGraph,
    /// Planted community assignment; only LFR produces one.
    pub communities: Option<Partition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    BadParameter(&'static str),
    Infeasible(&'static str),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::BadParameter(what) => write!(f, "bad generator parameter: {what}"),
            GenError::Infeasible(what) => write!(f, "infeasible generator constraints: {what}"),
        }
    }
}

impl Error for GenError {}

/// Entropy of a Bernoulli(p) edge indicator per realized edge: h(p)/p,
/// the information-theoretic bits-per-edge floor for G(n, p).
pub fn entropy_bound(p: f64) -> Result<f64, GenError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GenError::BadParameter("entropy bound needs 0 < p < 1"));
    }
    let h = -(p * p.log2()) - (1.0 - p) * (1.0 - p).log2();
    Ok(h / p)
}

pub fn generate(spec: &GenSpec) -> Result<Generated, GenError> {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    match spec.kind {
        GenKind::Er { n, p } => {
            if n == 0 {
                return Err(GenError::BadParameter("er needs n >= 1"));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(GenError::BadParameter("er needs p in (0, 1]"));
            }
            Ok(Generated { graph: er_graph(n, p, &mut rng), communities: None })
        }
        GenKind::Web { n, avg_deg, locality_width, long_link_frac, deg_exponent } => {
            if n == 0 || avg_deg <= 0.0 || locality_width == 0 {
                return Err(GenError::BadParameter("web needs n, avg_deg, locality_width >= 1"));
            }
            if !(0.0..=1.0).contains(&long_link_frac) {
                return Err(GenError::BadParameter("web needs long_link_frac in [0, 1]"));
            }
            if deg_exponent <= 2.0 {
                return Err(GenError::BadParameter("web needs deg_exponent > 2 for a finite mean"));
            }
            Ok(Generated {
                graph: web_graph(n, avg_deg, locality_width, long_link_frac, deg_exponent, &mut rng),
                communities: None,
            })
        }
        GenKind::Lfr { n, avg_deg, max_deg, deg_exponent, community_exponent, mu } => {
            if n == 0 || avg_deg < 1.0 {
                return Err(GenError::BadParameter("lfr needs n >= 1 and avg_deg >= 1"));
            }
            if !(0.0..=1.0).contains(&mu) {
                return Err(GenError::BadParameter("lfr needs mu in [0, 1]"));
            }
            if f64::from(max_deg) < avg_deg || max_deg >= n {
                return Err(GenError::BadParameter("lfr needs avg_deg <= max_deg < n"));
            }
            if deg_exponent <= 2.0 || community_exponent <= 1.0 {
                return Err(GenError::BadParameter(
                    "lfr needs deg_exponent > 2 and community_exponent > 1",
                ));
            }
            let (graph, part) =
                lfr_graph(n, avg_deg, max_deg, deg_exponent, community_exponent, mu, &mut rng)?;
            Ok(Generated { graph, communities: Some(part) })
        }
    }
}

fn uniform01(rng: &mut ChaCha12Rng) -> f64 {
    // 53 random mantissa bits; never returns 1.0.
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Uniform draw from 0..bound via rejection, bound >= 1.
fn below(rng: &mut ChaCha12Rng, bound: u64) -> u64 {
    debug_assert!(bound >= 1);
    let zone = u64::MAX - u64::MAX % bound;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// Directed G(n, p) without self-loops, visited with geometric jumps so the
/// cost is proportional to the edge count, not n^2.
fn er_graph(n: u32, p: f64, rng: &mut ChaCha12Rng) -> DirectedGraph {
    let total = u64::from(n) * u64::from(n - 1);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut pos: u64 = 0;
    if p >= 1.0 {
        pos = 0;
        while pos < total {
            edges.push(pair_at(pos, n));
            pos += 1;
        }
        return DirectedGraph::from_edges(n, edges).expect("in range");
    }
    let log_q = (1.0 - p).ln();
    loop {
        // Geometric(p) skip ahead; the first candidate is pos itself.
        let u = uniform01(rng);
        let skip = ((1.0 - u).ln() / log_q).floor() as u64;
        pos = match pos.checked_add(skip) {
            Some(x) => x,
            None => break,
        };
        if pos >= total {
            break;
        }
        edges.push(pair_at(pos, n));
        pos += 1;
    }
    DirectedGraph::from_edges(n, edges).expect("in range")
}

/// The pos-th ordered pair (u, t), u != t, in lexicographic order.
fn pair_at(pos: u64, n: u32) -> (u32, u32) {
    let u = (pos / u64::from(n - 1)) as u32 + 1;
    let r = (pos % u64::from(n - 1)) as u32;
    let t = if r + 1 < u { r + 1 } else { r + 2 };
    (u, t)
}

/// Mean of a Pareto(alpha) truncated to [lo, hi].
fn truncated_pareto_mean(lo: f64, hi: f64, alpha: f64) -> f64 {
    let t = lo / hi;
    lo * (alpha - 1.0) / (alpha - 2.0) * (1.0 - t.powf(alpha - 2.0))
        / (1.0 - t.powf(alpha - 1.0))
}

/// Inverse-CDF sample of the truncated Pareto on [lo, hi].
fn truncated_pareto(rng: &mut ChaCha12Rng, lo: f64, hi: f64, alpha: f64) -> f64 {
    let t = (lo / hi).powf(alpha - 1.0);
    let u = uniform01(rng);
    lo / (1.0 - u * (1.0 - t)).powf(1.0 / (alpha - 1.0))
}

/// Scale parameter that gives the truncated Pareto the requested mean, by
/// bisection; None when the mean is unreachable under the cap.
fn solve_scale(mean: f64, hi: f64, alpha: f64) -> Option<f64> {
    if truncated_pareto_mean(1.0, hi, alpha) > mean || mean >= hi {
        return None;
    }
    let (mut lo_s, mut hi_s) = (1.0f64, hi);
    for _ in 0..80 {
        let mid = 0.5 * (lo_s + hi_s);
        if truncated_pareto_mean(mid, hi, alpha) < mean {
            lo_s = mid;
        } else {
            hi_s = mid;
        }
    }
    Some(0.5 * (lo_s + hi_s))
}

fn web_graph(
    n: u32,
    avg_deg: f64,
    width: u32,
    long_frac: f64,
    alpha: f64,
    rng: &mut ChaCha12Rng,
) -> DirectedGraph {
    if n == 1 {
        return DirectedGraph::from_edges(1, Vec::new()).expect("in range");
    }
    let cap = f64::from(n - 1).max(1.0);
    // Degree scale: untruncated Pareto mean xm(a-1)/(a-2) set to avg_deg,
    // then clamped per draw; n is large against avg_deg so the truncation
    // bias is negligible.
    let scale = (avg_deg * (alpha - 2.0) / (alpha - 1.0)).max(0.5);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for v in 1..=n {
        let want = truncated_pareto(rng, scale, cap, alpha).round() as usize;
        let want = want.clamp(1, n.saturating_sub(1) as usize);
        let lo = v.saturating_sub(width).max(1);
        let hi = (v + width).min(n);
        let span = u64::from(hi - lo) + 1;
        let mut set: BTreeSet<u32> = BTreeSet::new();
        let mut attempts = 0;
        while set.len() < want && attempts < 8 * want + 16 {
            attempts += 1;
            let t = if uniform01(rng) >= long_frac {
                lo + below(rng, span) as u32
            } else {
                1 + below(rng, u64::from(n)) as u32
            };
            if t != v {
                set.insert(t);
            }
        }
        edges.extend(set.into_iter().map(|t| (v, t)));
    }
    DirectedGraph::from_edges(n, edges).expect("in range")
}

fn shuffle<T>(rng: &mut ChaCha12Rng, xs: &mut [T]) {
    for i in (1..xs.len()).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        xs.swap(i, j);
    }
}

fn lfr_graph(
    n: u32,
    avg_deg: f64,
    max_deg: u32,
    tau1: f64,
    tau2: f64,
    mu: f64,
    rng: &mut ChaCha12Rng,
) -> Result<(DirectedGraph, Partition), GenError> {
    // Degrees: truncated power law with the requested mean.
    let scale = solve_scale(avg_deg, f64::from(max_deg), tau1)
        .ok_or(GenError::Infeasible("average degree unreachable under the degree cap"))?;
    let degrees: Vec<u32> = (0..n)
        .map(|_| {
            (truncated_pareto(rng, scale, f64::from(max_deg), tau1).round() as u32)
                .clamp(1, max_deg)
        })
        .collect();
    let intra: Vec<u32> =
        degrees.iter().map(|&d| ((1.0 - mu) * f64::from(d)).round() as u32).collect();

    // Community sizes: power law between the feasibility floor and a cap.
    let max_intra = intra.iter().copied().max().unwrap_or(0);
    let s_lo = (max_intra + 1).max(2).min(n);
    let s_hi = (n / 4).max(2 * s_lo).min(n);
    if s_lo > n {
        return Err(GenError::Infeasible("communities cannot hold the largest intra degree"));
    }
    let mut sizes: Vec<u32> = Vec::new();
    let mut total: u64 = 0;
    while total < u64::from(n) {
        let s = (truncated_pareto(rng, f64::from(s_lo), f64::from(s_hi), tau2).round() as u32)
            .clamp(s_lo, s_hi);
        sizes.push(s);
        total += u64::from(s);
    }
    // Trim the overshoot; a leftover below the floor folds into the others.
    let mut over = (total - u64::from(n)) as u32;
    if let Some(last) = sizes.last_mut() {
        let cut = over.min(last.saturating_sub(s_lo));
        *last -= cut;
        over -= cut;
    }
    if over > 0 {
        let last = sizes.pop().expect("nonempty") - over;
        if sizes.is_empty() {
            return Err(GenError::Infeasible("single community below the feasibility floor"));
        }
        let k = sizes.len();
        for i in 0..last as usize {
            sizes[i % k] += 1;
        }
    }
    debug_assert_eq!(sizes.iter().map(|&s| u64::from(s)).sum::<u64>(), u64::from(n));

    // Assignment: hardest vertices first, random community with room that
    // can hold the vertex's intra degree.
    let mut order: Vec<u32> = (0..n).collect();
    shuffle(rng, &mut order);
    order.sort_by_key(|&v| std::cmp::Reverse(intra[v as usize]));
    let mut room: Vec<u32> = sizes.clone();
    let mut label = vec![u32::MAX; n as usize];
    for &v in &order {
        let valid: Vec<usize> = (0..sizes.len())
            .filter(|&c| room[c] > 0 && sizes[c] > intra[v as usize])
            .collect();
        if valid.is_empty() {
            return Err(GenError::Infeasible("no community can hold a vertex's intra degree"));
        }
        let c = valid[below(rng, valid.len() as u64) as usize];
        label[v as usize] = c as u32;
        room[c] -= 1;
    }

    // Intra edges: per-community configuration model on the intra stubs.
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); sizes.len()];
    for v in 0..n {
        members[label[v as usize] as usize].push(v + 1);
    }
    let mut undirected: BTreeSet<(u32, u32)> = BTreeSet::new();
    for comm in &members {
        let mut stubs: Vec<u32> = Vec::new();
        for &v in comm {
            for _ in 0..intra[(v - 1) as usize] {
                stubs.push(v);
            }
        }
        shuffle(rng, &mut stubs);
        pair_stubs(&stubs, &mut undirected);
    }

    // Inter edges: global configuration model on the leftover stubs,
    // rejecting same-community pairs over a few repair rounds.
    let mut stubs: Vec<u32> = Vec::new();
    for v in 0..n {
        for _ in 0..degrees[v as usize] - intra[v as usize] {
            stubs.push(v + 1);
        }
    }
    for _ in 0..8 {
        if stubs.len() < 2 {
            break;
        }
        shuffle(rng, &mut stubs);
        let mut leftover = Vec::new();
        for pair in stubs.chunks(2) {
            if pair.len() < 2 {
                continue;
            }
            let (a, b) = (pair[0], pair[1]);
            let key = (a.min(b), a.max(b));
            if a == b
                || label[(a - 1) as usize] == label[(b - 1) as usize]
                || undirected.contains(&key)
            {
                leftover.push(a);
                leftover.push(b);
            } else {
                undirected.insert(key);
            }
        }
        if leftover.len() == stubs.len() {
            break;
        }
        stubs = leftover;
    }

    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(2 * undirected.len());
    for &(a, b) in &undirected {
        edges.push((a, b));
        edges.push((b, a));
    }
    let graph = DirectedGraph::from_edges(n, edges).expect("in range");
    Ok((graph, Partition::from_labels(&label)))
}

/// Pairs consecutive stubs, skipping self-pairs and duplicates; the odd
/// leftover stub is dropped.
fn pair_stubs(stubs: &[u32], out: &mut BTreeSet<(u32, u32)>) {
    for pair in stubs.chunks(2) {
        if pair.len() < 2 || pair[0] == pair[1] {
            continue;
        }
        let key = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        out.insert(key);
    }
}
