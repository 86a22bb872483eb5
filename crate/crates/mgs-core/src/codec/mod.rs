// SPDX-License-Identifier: Apache-2.0

//! The four wire codecs. BV is the fixed-pipeline baseline with its own
//! grammar; BG, CS and CG share the kernel planner and differ in how they
//! encode record headers and whether records live in per-cluster spaces.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::bits::{BitSink, BitSource, CodeError};
use crate::kernel::{plan_vertex, read_payload, write_payload, ActionId, HeaderModel, KernelConfig, Plan, PrevLists};

pub mod bg;
pub mod bv;
pub mod cg;
pub mod cs;

/// Wire identifier of an encoder; the container header stores it verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecId {
    BvBaseline,
    Bg,
    Cs,
    Cg,
}

impl CodecId {
    pub fn wire(self) -> u8 {
        match self {
            CodecId::BvBaseline => 0,
            CodecId::Bg => 1,
            CodecId::Cs => 2,
            CodecId::Cg => 3,
        }
    }

    pub fn from_wire(b: u8) -> Option<Self> {
        match b {
            0 => Some(CodecId::BvBaseline),
            1 => Some(CodecId::Bg),
            2 => Some(CodecId::Cs),
            3 => Some(CodecId::Cg),
            _ => None,
        }
    }
}

impl core::str::FromStr for CodecId {
    type Err = &'static str;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bv" | "bv-baseline" | "bv_baseline" => Ok(CodecId::BvBaseline),
            "bg" => Ok(CodecId::Bg),
            "cs" => Ok(CodecId::Cs),
            "cg" => Ok(CodecId::Cg),
            _ => Err("unknown codec (expected bv, bg, cs or cg)"),
        }
    }
}

impl core::fmt::Display for CodecId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            CodecId::BvBaseline => "bv",
            CodecId::Bg => "bg",
            CodecId::Cs => "cs",
            CodecId::Cg => "cg",
        })
    }
}

/// Header codec of a kernel-based record stream: prices header parts for
/// the planner and converts plans to and from header bits.
pub trait RecordHeader: HeaderModel {
    fn write_header(&self, sink: &mut BitSink, plan: &Plan) -> Result<(), CodeError>;
    /// Returns the action and its reference offsets in emission order.
    fn read_header(&self, src: &mut BitSource<'_>) -> Result<(ActionId, Vec<u32>), CodeError>;
}

struct SliceLists<'a>(&'a [Vec<u64>]);

impl PrevLists for SliceLists<'_> {
    fn successors_of(&self, u: u64) -> &[u64] {
        &self.0[(u - 1) as usize]
    }
}

/// Encodes `lists` as one record per vertex, returning the bit offset of
/// every record within the sink segment that was written.
pub(crate) fn encode_stream<H: RecordHeader>(
    lists: &[Vec<u64>],
    cfg: &KernelConfig,
    hdr: &H,
    sink: &mut BitSink,
) -> Result<Vec<u64>, CodeError> {
    let base = sink.len_bits() as u64;
    let mut starts = Vec::with_capacity(lists.len());
    let prev = SliceLists(lists);
    for (i, neighbors) in lists.iter().enumerate() {
        let v = (i + 1) as u64;
        starts.push(sink.len_bits() as u64 - base);
        let plan = plan_vertex(v, neighbors, &prev, cfg, hdr);
        let before = sink.len_bits() as u64;
        hdr.write_header(sink, &plan)?;
        write_payload(&plan, v, cfg, sink)?;
        debug_assert_eq!(
            sink.len_bits() as u64 - before,
            plan.cost_bits,
            "planned cost must equal serialized record size"
        );
    }
    Ok(starts)
}

fn checked_ref_lists<'a>(
    v: u64,
    offsets: &[u32],
    window: u32,
    lists: &'a [Vec<u64>],
) -> Result<Vec<&'a [u64]>, CodeError> {
    let mut out = Vec::with_capacity(offsets.len());
    for &o in offsets {
        if o == 0 || u64::from(o) >= v || o > window {
            return Err(CodeError::Corrupt("reference offset outside window"));
        }
        out.push(&lists[(v - u64::from(o) - 1) as usize][..]);
    }
    Ok(out)
}

/// Allocation hint bounded by the input: every decoded item costs at least
/// one bit, so a claimed count beyond `remaining_bits` is already corrupt
/// and must not drive a huge reservation.
pub(crate) fn bounded(claimed: u64, src: &BitSource<'_>) -> usize {
    claimed.min(src.remaining_bits() as u64) as usize
}

/// Sequential decode of `n` records.
pub(crate) fn decode_stream<H: RecordHeader>(
    src: &mut BitSource<'_>,
    n: u64,
    cfg: &KernelConfig,
    hdr: &H,
) -> Result<Vec<Vec<u64>>, CodeError> {
    let mut lists: Vec<Vec<u64>> = Vec::with_capacity(bounded(n, src));
    for v in 1..=n {
        let (action, offsets) = hdr.read_header(src)?;
        let refs = checked_ref_lists(v, &offsets, cfg.window, &lists)?;
        let neighbors = read_payload(action, &refs, v, cfg, src, n)?;
        lists.push(neighbors);
    }
    Ok(lists)
}

/// Result of decoding one record against a partial memo: either the list,
/// or the reference vertices whose lists must be resolved first.
pub(crate) enum RecordRead {
    Done(Vec<u64>),
    Missing(Vec<u64>),
}

/// Decodes the record at the current source position. Reference lists come
/// from `memo`; absent entries abort the read with their vertex ids.
/// `limit` caps decoded successor ids (n, or the cluster size for
/// cluster-local records).
pub(crate) fn read_one<H: RecordHeader>(
    src: &mut BitSource<'_>,
    v: u64,
    cfg: &KernelConfig,
    hdr: &H,
    memo: &BTreeMap<u64, Vec<u64>>,
    limit: u64,
) -> Result<RecordRead, CodeError> {
    let (action, offsets) = hdr.read_header(src)?;
    let mut missing = Vec::new();
    for &o in &offsets {
        if o == 0 || u64::from(o) >= v || o > cfg.window {
            return Err(CodeError::Corrupt("reference offset outside window"));
        }
        let u = v - u64::from(o);
        if !memo.contains_key(&u) {
            missing.push(u);
        }
    }
    if !missing.is_empty() {
        return Ok(RecordRead::Missing(missing));
    }
    let refs: Vec<&[u64]> = offsets.iter().map(|&o| &memo[&(v - u64::from(o))][..]).collect();
    Ok(RecordRead::Done(read_payload(action, &refs, v, cfg, src, limit)?))
}
