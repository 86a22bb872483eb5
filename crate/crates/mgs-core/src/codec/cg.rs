// SPDX-License-Identifier: Apache-2.0

//! CG: the clustered encoder. Vertices are grouped into K contiguous
//! clusters and each cluster is encoded as an independent kernel stream
//! under local IDs, so references never cross a cluster boundary.
//! Successors outside the encoding vertex's cluster go into a per-vertex
//! STOP-delta side list under global IDs; that side section disappears
//! entirely when K = 1.
//!
//! Record headers are fixed width: a 1-bit reference flag, the offset
//! minus one in ceil(log2 w) bits when the flag is set, then a 4-bit
//! residual kind where 9 marks the empty vertex.

use alloc::vec::Vec;

use crate::bits::{
    read_stop_list, unzigzag, write_stop_list, zigzag, BitSink, BitSource, CodeError, CodeFamily,
};
use crate::graph::Partition;
use crate::kernel::{
    plan_vertex, read_payload, write_payload, ActionId, HeaderModel, KernelConfig, Plan, RefMode,
};

use super::RecordHeader;

/// Wire value of the 4-bit kind field that marks an empty vertex.
const EMPTY_KIND: u64 = 9;

pub fn offset_width(window: u32) -> u32 {
    if window <= 1 {
        0
    } else {
        u32::BITS - (window - 1).leading_zeros()
    }
}

pub struct CgHeader {
    pub offset_width: u32,
}

impl HeaderModel for CgHeader {
    fn action_bits(&self, action: ActionId) -> Option<u32> {
        if matches!(action.decompose(), Some((RefMode::Multi, _))) {
            return None;
        }
        // Flag bit plus the kind field; the offset is priced separately.
        Some(1 + 4)
    }

    fn offset_bits(&self, _offset: u32) -> u32 {
        self.offset_width
    }
}

impl RecordHeader for CgHeader {
    fn write_header(&self, sink: &mut BitSink, plan: &Plan) -> Result<(), CodeError> {
        let flagged = !plan.refs.is_empty();
        sink.write_bit(flagged);
        if flagged {
            sink.write_bits(u64::from(plan.refs[0].offset - 1), self.offset_width)?;
        }
        let kind = if plan.action.is_empty_action() {
            EMPTY_KIND
        } else {
            u64::from(plan.action.index() % 9)
        };
        sink.write_bits(kind, 4)
    }

    fn read_header(&self, src: &mut BitSource<'_>) -> Result<(ActionId, Vec<u32>), CodeError> {
        let flagged = src.read_bit()?;
        let mut offsets = Vec::new();
        if flagged {
            let o = src.read_bits(self.offset_width)? + 1;
            offsets.push(u32::try_from(o).map_err(|_| CodeError::Corrupt("offset too large"))?);
        }
        let kind = src.read_bits(4)?;
        let action = if kind == EMPTY_KIND {
            if flagged {
                return Err(CodeError::Corrupt("empty vertex cannot carry a reference"));
            }
            ActionId::EMPTY
        } else if kind < 9 {
            ActionId::from_index(u8::from(flagged) * 9 + kind as u8).expect("kind < 9")
        } else {
            return Err(CodeError::Corrupt("residual kind out of range"));
        };
        Ok((action, offsets))
    }
}

/// Everything but window and family is hardcoded; single reference only,
/// all payload features on.
pub fn wire_config(window: u32, family: CodeFamily) -> KernelConfig {
    KernelConfig { window, family, max_refs: 1, ..KernelConfig::default() }
}

/// Cluster sizes of a partition whose clusters are contiguous runs of the
/// vertex order, in run order. Errors when any cluster is interleaved with
/// another.
pub fn contiguous_cluster_sizes(part: &Partition) -> Result<Vec<u64>, CodeError> {
    let mut sizes: Vec<u64> = Vec::with_capacity(part.k() as usize);
    let mut prev = None;
    for v in 1..=part.len() {
        let c = part.cluster_of(v);
        match prev {
            Some(p) if c == p => *sizes.last_mut().expect("run open") += 1,
            Some(p) if c == p + 1 => sizes.push(1),
            None if c == 0 => sizes.push(1),
            _ => return Err(CodeError::Corrupt("clusters are not contiguous in vertex order")),
        }
        prev = Some(c);
    }
    Ok(sizes)
}

fn check_sizes(sizes: &[u64], n: u64) -> Result<(), CodeError> {
    if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
        return Err(CodeError::Corrupt("cluster sizes must be nonempty and positive"));
    }
    let mut total = 0u64;
    for &s in sizes {
        total = total
            .checked_add(s)
            .ok_or(CodeError::Corrupt("cluster sizes overflow"))?;
    }
    if total != n {
        return Err(CodeError::Corrupt("cluster sizes do not sum to the vertex count"));
    }
    Ok(())
}

/// Splits one global adjacency list around the cluster span
/// `[start, start + size - 1]`: in-cluster targets become local IDs, the
/// rest stay global.
fn split_list(list: &[u64], start: u64, size: u64) -> (Vec<u64>, Vec<u64>) {
    let mut intra = Vec::new();
    let mut extra = Vec::new();
    for &t in list {
        if t >= start && t < start + size {
            intra.push(t - start + 1);
        } else {
            extra.push(t);
        }
    }
    (intra, extra)
}

/// Coded form of the extra-cluster side list: first value is the zigzag
/// delta from the encoding vertex (shifted into the >= 1 code domain),
/// later values are plain ascending gaps.
fn code_extra(v: u64, extra: &[u64]) -> Vec<u64> {
    let mut coded = Vec::with_capacity(extra.len());
    for (i, &t) in extra.iter().enumerate() {
        if i == 0 {
            coded.push(zigzag(t as i64 - v as i64) + 1);
        } else {
            coded.push(t - extra[i - 1]);
        }
    }
    coded
}

/// Reads one extra-cluster side list back to global IDs, rejecting targets
/// inside the cluster span or outside `1..=n`.
pub(crate) fn read_extra(
    src: &mut BitSource<'_>,
    family: CodeFamily,
    v: u64,
    n: u64,
    span: (u64, u64),
) -> Result<Vec<u64>, CodeError> {
    let coded = read_stop_list(src, family)?;
    let mut extra = Vec::with_capacity(coded.len());
    let mut last = 0u64;
    for (i, &c) in coded.iter().enumerate() {
        let t = if i == 0 {
            let d = unzigzag(c - 1);
            let t = v.checked_add_signed(d).ok_or(CodeError::Corrupt("side target underflow"))?;
            if t == 0 {
                return Err(CodeError::Corrupt("side target underflow"));
            }
            t
        } else {
            last.checked_add(c).ok_or(CodeError::Corrupt("side target overflow"))?
        };
        if t > n || (t >= span.0 && t < span.0 + span.1) {
            return Err(CodeError::Corrupt("side target outside its allowed range"));
        }
        extra.push(t);
        last = t;
    }
    Ok(extra)
}

/// Merges a cluster-local list (shifted by `start - 1` back to global IDs)
/// with an already-global side list. Both inputs are ascending and their
/// ranges are disjoint, so this is a plain two-way merge.
pub(crate) fn merge_global(intra: &[u64], start: u64, extra: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(intra.len() + extra.len());
    let (mut i, mut j) = (0, 0);
    while i < intra.len() && j < extra.len() {
        let gi = intra[i] + start - 1;
        if gi < extra[j] {
            out.push(gi);
            i += 1;
        } else {
            out.push(extra[j]);
            j += 1;
        }
    }
    out.extend(intra[i..].iter().map(|&l| l + start - 1));
    out.extend_from_slice(&extra[j..]);
    out
}

/// Encodes `lists` under the cluster layout `sizes`. Returns the bit
/// offset of every vertex record within the written segment; the segment
/// opens with the cluster directory (K, then each size).
pub fn encode(
    lists: &[Vec<u64>],
    sizes: &[u64],
    cfg: &KernelConfig,
    sink: &mut BitSink,
) -> Result<Vec<u64>, CodeError> {
    let n = lists.len() as u64;
    if n == 0 {
        return Ok(Vec::new());
    }
    check_sizes(sizes, n)?;
    let base = sink.len_bits() as u64;
    let k = sizes.len() as u64;
    cfg.family.encode(sink, k)?;
    for &s in sizes {
        cfg.family.encode(sink, s)?;
    }
    let hdr = CgHeader { offset_width: offset_width(cfg.window) };
    let mut starts = Vec::with_capacity(lists.len());
    let mut start = 1u64;
    for &s in sizes {
        let mut intra: Vec<Vec<u64>> = Vec::with_capacity(s as usize);
        let mut extras: Vec<Vec<u64>> = Vec::with_capacity(s as usize);
        for local in 1..=s {
            let (a, b) = split_list(&lists[(start + local - 2) as usize], start, s);
            intra.push(a);
            extras.push(b);
        }
        for local in 1..=s {
            starts.push(sink.len_bits() as u64 - base);
            let plan = plan_vertex(local, &intra[(local - 1) as usize], &intra, cfg, &hdr);
            let before = sink.len_bits() as u64;
            hdr.write_header(sink, &plan)?;
            write_payload(&plan, local, cfg, sink)?;
            debug_assert_eq!(
                sink.len_bits() as u64 - before,
                plan.cost_bits,
                "planned cost must equal serialized record size"
            );
            if k > 1 {
                let v = start + local - 1;
                write_stop_list(sink, cfg.family, &code_extra(v, &extras[(local - 1) as usize]))?;
            }
        }
        start += s;
    }
    Ok(starts)
}

/// Sequential decode; `n` comes from the container header.
pub fn decode(
    src: &mut BitSource<'_>,
    n: u64,
    cfg: &KernelConfig,
) -> Result<Vec<Vec<u64>>, CodeError> {
    Ok(decode_with_sizes(src, n, cfg)?.0)
}

/// Sequential decode that also reports the cluster directory, for callers
/// that need the layout (index building, stats).
pub fn decode_with_sizes(
    src: &mut BitSource<'_>,
    n: u64,
    cfg: &KernelConfig,
) -> Result<(Vec<Vec<u64>>, Vec<u64>), CodeError> {
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let k = cfg.family.decode(src)?;
    if k > n {
        return Err(CodeError::Corrupt("more clusters than vertices"));
    }
    let mut sizes = Vec::with_capacity(super::bounded(k, src));
    for _ in 0..k {
        sizes.push(cfg.family.decode(src)?);
    }
    check_sizes(&sizes, n)?;
    let hdr = CgHeader { offset_width: offset_width(cfg.window) };
    let mut out: Vec<Vec<u64>> = Vec::with_capacity(super::bounded(n, src));
    let mut start = 1u64;
    for &s in &sizes {
        let mut intra: Vec<Vec<u64>> = Vec::with_capacity(super::bounded(s, src));
        for local in 1..=s {
            let (action, offsets) = hdr.read_header(src)?;
            let refs = super::checked_ref_lists(local, &offsets, cfg.window, &intra)?;
            // Local successors live in 1..=s; the payload reader enforces it.
            let list = read_payload(action, &refs, local, cfg, src, s)?;
            let extra = if k > 1 {
                read_extra(src, cfg.family, start + local - 1, n, (start, s))?
            } else {
                Vec::new()
            };
            out.push(merge_global(&list, start, &extra));
            intra.push(list);
        }
        start += s;
    }
    Ok((out, sizes))
}
