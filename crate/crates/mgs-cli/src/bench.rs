// SPDX-License-Identifier: Apache-2.0

//! Benchmark harness: the ordering-by-codec matrix, window sweeps and a
//! cumulative feature walk. Every measured cell decompresses its own output
//! and compares it to the input before the row is emitted.

use anyhow::{bail, Context, Result};
use mgs_core::bits::{BitSink, BitSource, CodeFamily};
use mgs_core::codec::bg::{BgHeader, BgHeaderMode};
use mgs_core::codec::{CodecId, RecordHeader};
use mgs_core::container::{self, EncodeOptions, Mode};
use mgs_core::graph::{DirectedGraph, Partition, Permutation};
use mgs_core::kernel::{plan_vertex, read_payload, write_payload, CostModel, KernelConfig};
use mgs_core::ordering::{leiden_llp_order, llp_order, LeidenConfig, LlpConfig};
use std::time::Instant;

pub const CSV_HEADER: &str = "dataset,ordering,codec,params,bpe,encode_us_per_edge,decode_us_per_edge";

/// Window values covered by the sweep subcommand.
pub const WINDOW_SWEEP: [u32; 6] = [8, 16, 32, 64, 128, 256];

/// Vertices per CG cluster when no explicit layout is given: contiguous
/// runs in the current order, so the layout tracks the ordering under test.
pub const CG_CHUNK: u32 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingKind {
    /// Seeded random relabelling for synthetic graphs, file order for
    /// ingested ones.
    Original,
    Llp,
    LeidenLlp,
}

impl OrderingKind {
    pub const ALL: [OrderingKind; 3] =
        [OrderingKind::Original, OrderingKind::Llp, OrderingKind::LeidenLlp];

    pub fn as_str(self) -> &'static str {
        match self {
            OrderingKind::Original => "original",
            OrderingKind::Llp => "llp",
            OrderingKind::LeidenLlp => "leiden_llp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "original" | "random" => Ok(OrderingKind::Original),
            "llp" => Ok(OrderingKind::Llp),
            "leiden_llp" | "leiden-llp" => Ok(OrderingKind::LeidenLlp),
            _ => bail!("unknown ordering {s:?} (original, llp, leiden_llp)"),
        }
    }
}

pub fn codec_name(codec: CodecId) -> &'static str {
    match codec {
        CodecId::BvBaseline => "bv",
        CodecId::Bg => "bg",
        CodecId::Cs => "cs",
        CodecId::Cg => "cg",
    }
}

pub fn parse_codec(s: &str) -> Result<CodecId> {
    match s {
        "bv" => Ok(CodecId::BvBaseline),
        "bg" => Ok(CodecId::Bg),
        "cs" => Ok(CodecId::Cs),
        "cg" => Ok(CodecId::Cg),
        _ => bail!("unknown codec {s:?} (bv, bg, cs, cg)"),
    }
}

pub struct Dataset {
    pub name: String,
    pub graph: DirectedGraph,
    /// Synthetic graphs get a seeded random permutation as their
    /// "original" order; ingested files keep file order.
    pub synthetic: bool,
    pub seed: u64,
}

/// The relabelling a given ordering assigns to a dataset. Ordering runs on
/// the symmetrized graph; the permutation applies to the directed one.
pub fn permutation_for(ds: &Dataset, kind: OrderingKind) -> Permutation {
    let n = ds.graph.vertex_count();
    match kind {
        OrderingKind::Original => {
            if ds.synthetic {
                Permutation::random(n, ds.seed)
            } else {
                Permutation::identity(n)
            }
        }
        OrderingKind::Llp => {
            let cfg = LlpConfig { seed: ds.seed, ..LlpConfig::default() };
            llp_order(&ds.graph.symmetrize(), &cfg)
        }
        OrderingKind::LeidenLlp => {
            let llp = LlpConfig { seed: ds.seed, ..LlpConfig::default() };
            let leiden = LeidenConfig { seed: ds.seed, ..LeidenConfig::default() };
            leiden_llp_order(&ds.graph, &llp, &leiden)
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub dataset: String,
    pub ordering: String,
    pub codec: String,
    pub params: String,
    pub bpe: f64,
    pub encode_us_per_edge: f64,
    pub decode_us_per_edge: f64,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{:.4}",
            self.dataset,
            self.ordering,
            self.codec,
            self.params,
            self.bpe,
            self.encode_us_per_edge,
            self.decode_us_per_edge
        )
    }
}

/// L+L gain over plain LLP for one dataset, codec and window, in bits per
/// edge; positive means the two-stage ordering compresses better.
#[derive(Debug, Clone)]
pub struct TransferDelta {
    pub dataset: String,
    pub codec: String,
    pub window: u32,
    pub delta: f64,
}

/// Max minus min of the deltas, the "does the gain transfer" statistic.
pub fn spread(deltas: &[&TransferDelta]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in deltas {
        lo = lo.min(d.delta);
        hi = hi.max(d.delta);
    }
    if deltas.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Contiguous clusters of `chunk` vertices in the current numbering.
pub fn chunk_partition(n: u32, chunk: u32) -> Partition {
    let chunk = chunk.max(1);
    let labels: Vec<u32> = (0..n).map(|i| i / chunk).collect();
    Partition::from_labels(&labels)
}

/// Compresses `g` (children mode), verifies the roundtrip and reports the
/// measured cell. CG uses `clusters` or, when absent, contiguous chunks.
pub fn measure_cell(
    g: &DirectedGraph,
    codec: CodecId,
    window: u32,
    clusters: Option<&Partition>,
) -> Result<(f64, f64, f64)> {
    let m = g.edge_count();
    if m == 0 {
        bail!("benchmark cells need at least one edge");
    }
    let opts = EncodeOptions { window, ..EncodeOptions::new(codec) };
    let chunks;
    let part = if codec == CodecId::Cg {
        match clusters {
            Some(p) => Some(p),
            None => {
                chunks = chunk_partition(g.vertex_count(), CG_CHUNK);
                Some(&chunks)
            }
        }
    } else {
        None
    };
    let t0 = Instant::now();
    let bytes = container::compress(g, &opts, part)?;
    let enc = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let back = container::decompress(&bytes)?;
    let dec = t1.elapsed().as_secs_f64();
    if back != *g {
        bail!("cell failed to roundtrip: codec {} window {}", codec_name(codec), window);
    }
    let bpe = container::bpe(bytes.len(), m)?;
    Ok((bpe, enc * 1e6 / m as f64, dec * 1e6 / m as f64))
}

/// Runs the full ordering-by-codec matrix and derives the L+L-over-LLP
/// delta per dataset, codec and window.
pub fn run_matrix(
    datasets: &[Dataset],
    codecs: &[CodecId],
    windows: &[u32],
) -> Result<(Vec<BenchRow>, Vec<TransferDelta>)> {
    let mut rows = Vec::new();
    let mut deltas = Vec::new();
    for ds in datasets {
        let mut llp_bpe: Vec<(CodecId, u32, f64)> = Vec::new();
        let mut ll_bpe: Vec<(CodecId, u32, f64)> = Vec::new();
        for kind in OrderingKind::ALL {
            let perm = permutation_for(ds, kind);
            let h = ds.graph.apply_permutation(&perm).context("ordering permutation")?;
            for &codec in codecs {
                for &w in windows {
                    let (bpe, enc, dec) = measure_cell(&h, codec, w, None)
                        .with_context(|| format!("{} {} w={}", ds.name, kind.as_str(), w))?;
                    rows.push(BenchRow {
                        dataset: ds.name.clone(),
                        ordering: kind.as_str().to_string(),
                        codec: codec_name(codec).to_string(),
                        params: format!("w={w}"),
                        bpe,
                        encode_us_per_edge: enc,
                        decode_us_per_edge: dec,
                    });
                    match kind {
                        OrderingKind::Llp => llp_bpe.push((codec, w, bpe)),
                        OrderingKind::LeidenLlp => ll_bpe.push((codec, w, bpe)),
                        OrderingKind::Original => {}
                    }
                }
            }
        }
        for &(codec, w, a) in &llp_bpe {
            if let Some(&(_, _, b)) =
                ll_bpe.iter().find(|&&(c, ww, _)| c == codec && ww == w)
            {
                deltas.push(TransferDelta {
                    dataset: ds.name.clone(),
                    codec: codec_name(codec).to_string(),
                    window: w,
                    delta: a - b,
                });
            }
        }
    }
    Ok((rows, deltas))
}

/// One step of the cumulative feature walk.
#[derive(Debug, Clone)]
pub struct AblationStep {
    pub name: &'static str,
    pub bpe: f64,
    /// Change against the previous step; negative is a gain.
    pub delta: f64,
}

/// Encodes every record of `lists` with the given planner configuration
/// and header coding, verifies the stream decodes back, and returns the
/// total record bits.
fn stream_bits(lists: &[Vec<u64>], cfg: &KernelConfig, mode: BgHeaderMode) -> Result<u64> {
    cfg.validate()?;
    let hdr = BgHeader::new(mode, cfg.family);
    let mut sink = BitSink::new();
    let mut done: Vec<Vec<u64>> = Vec::with_capacity(lists.len());
    for (i, nb) in lists.iter().enumerate() {
        let v = i as u64 + 1;
        let plan = plan_vertex(v, nb, &done, cfg, &hdr);
        hdr.write_header(&mut sink, &plan)?;
        write_payload(&plan, v, cfg, &mut sink)?;
        done.push(nb.clone());
    }
    let bits = sink.len_bits() as u64;
    let n = lists.len() as u64;
    let bytes = sink.into_bytes();
    let mut src = BitSource::new(&bytes);
    let mut decoded: Vec<Vec<u64>> = Vec::with_capacity(lists.len());
    for (i, want) in lists.iter().enumerate() {
        let v = i as u64 + 1;
        let (action, offsets) = hdr.read_header(&mut src)?;
        let refs: Vec<&[u64]> =
            offsets.iter().map(|&o| decoded[i - o as usize].as_slice()).collect();
        let got = read_payload(action, &refs, v, cfg, &mut src, n)?;
        if got != *want {
            bail!("feature walk stream failed to roundtrip at vertex {v}");
        }
        decoded.push(got);
    }
    Ok(bits)
}

/// In-memory bits per edge of a record stream plus the fixed 96-bit file
/// header, rounded up to whole bytes like the container does.
fn stream_bpe(record_bits: u64, m: u64) -> f64 {
    (8 * (record_bits + 96).div_ceil(8)) as f64 / m as f64
}

/// Cumulative feature walk: starts from a deliberately plain encoder
/// (flat headers, no references, zeta-3 residuals, window 8) and enables
/// one feature per step, measuring bits per edge after each.
pub fn feature_ablation(g: &DirectedGraph) -> Result<Vec<AblationStep>> {
    let m = g.edge_count();
    if m == 0 {
        bail!("the feature walk needs at least one edge");
    }
    let lists: Vec<Vec<u64>> =
        g.vertices().map(|v| g.successors(v).iter().map(|&t| u64::from(t)).collect()).collect();
    let base = KernelConfig {
        window: 8,
        shortlist: 8,
        multi_top_k: 5,
        max_refs: 0,
        min_ref_degree: 3,
        lr_split: false,
        tight_intervals: false,
        stop_lists: false,
        adaptive_copy: false,
        cost_model: CostModel::Exact,
        family: CodeFamily::Zeta(3),
    };
    let steps: [(&'static str, Box<dyn Fn(&mut KernelConfig, &mut BgHeaderMode)>); 10] = [
        ("baseline", Box::new(|_, _| {})),
        ("copy-blocks", Box::new(|c, _| c.max_refs = 1)),
        ("window-64", Box::new(|c, _| c.window = 64)),
        ("fibonacci", Box::new(|c, _| c.family = CodeFamily::Fibonacci)),
        ("adaptive-copy", Box::new(|c, _| c.adaptive_copy = true)),
        ("stop-deltas", Box::new(|c, _| c.stop_lists = true)),
        (
            "vlc-header-tight-intervals",
            Box::new(|c, h| {
                c.tight_intervals = true;
                *h = BgHeaderMode::Vlc;
            }),
        ),
        ("lr-split", Box::new(|c, _| c.lr_split = true)),
        ("multi-ref", Box::new(|c, _| c.max_refs = 2)),
        ("low-degree-search", Box::new(|c, _| c.min_ref_degree = 1)),
    ];
    let mut cfg = base;
    let mut mode = BgHeaderMode::Flat5;
    let mut out = Vec::with_capacity(steps.len());
    let mut prev = f64::NAN;
    for (name, apply) in &steps {
        apply(&mut cfg, &mut mode);
        let bits = stream_bits(&lists, &cfg, mode).with_context(|| format!("step {name}"))?;
        let bpe = stream_bpe(bits, m);
        let delta = if prev.is_nan() { 0.0 } else { bpe - prev };
        out.push(AblationStep { name, bpe, delta });
        prev = bpe;
    }
    Ok(out)
}

/// Compresses under an explicit ordering and reports bits per edge; used
/// by subcommands that need a single number rather than a full matrix.
pub fn ordered_bpe(
    g: &DirectedGraph,
    perm: &Permutation,
    codec: CodecId,
    window: u32,
) -> Result<f64> {
    let h = g.apply_permutation(perm)?;
    let (bpe, _, _) = measure_cell(&h, codec, window, None)?;
    Ok(bpe)
}

/// Index-mode options used when a file must support random access.
pub fn indexed_options(codec: CodecId, window: u32, stride: u32) -> EncodeOptions {
    EncodeOptions { window, mode: Mode::Index, stride, ..EncodeOptions::new(codec) }
}
