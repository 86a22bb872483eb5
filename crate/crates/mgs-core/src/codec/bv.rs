// SPDX-License-Identifier: Apache-2.0

//! The baseline codec: a fixed sequential pipeline per vertex. Outdegree
//! first (always), then an optional single reference with copy blocks,
//! then intervals over what the copy left behind, then gap-coded
//! residuals. Stages never reorder and the planner only chooses between
//! "use this reference" and "use none", which is exactly the rigidity the
//! kernel codecs remove.
//!
//! Record grammar (gamma unless stated):
//!   gamma(d + 1)
//!   if d > 0: gamma(offset + 1), 0 meaning no reference
//!   if offset > 0: gamma(B) gamma(b0 + 1) gamma(b1) .. gamma(b{B-1})
//!     where the runs alternate copy/skip starting with copy and a
//!     trailing skip run stays off the wire
//!   gamma(I + 1); per interval: first start gamma(zigzag(start - v) + 1),
//!     later starts gamma(start - prev_end); each extra gamma(len - MIL + 1)
//!   residuals (count implicit): zeta_k(r1) absolute, then zeta_k gaps

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{unzigzag, zigzag, BitSink, BitSource, CodeError, CodeFamily};
use crate::kernel::{detect_intervals, mask_to_runs};

use super::RecordRead;

/// Vertices below this outdegree skip the reference search entirely.
const MIN_SEARCH_DEGREE: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BvParams {
    pub window: u32,
    /// Longest allowed reference chain; a candidate whose own chain already
    /// has this length cannot be referenced again.
    pub max_chain: u32,
    pub mil: u8,
    pub zeta_k: u8,
}

impl Default for BvParams {
    fn default() -> Self {
        BvParams { window: 7, max_chain: 3, mil: 4, zeta_k: 3 }
    }
}

impl BvParams {
    fn residual_family(&self) -> CodeFamily {
        CodeFamily::Zeta(self.zeta_k)
    }
}

/// Bit budget by pipeline component; the five sum to the stream total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BvBudget {
    pub outdegrees: u64,
    pub references: u64,
    pub copy_blocks: u64,
    pub intervals: u64,
    pub residuals: u64,
}

impl BvBudget {
    pub fn total(&self) -> u64 {
        self.outdegrees + self.references + self.copy_blocks + self.intervals + self.residuals
    }
}

/// One decided record. `blocks` holds the full alternating copy/skip runs
/// (copy first); `intervals` holds (start, length - MIL) pairs; `residuals`
/// holds the absolute leftover values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BvRecord {
    pub offset: u32,
    pub blocks: Vec<u64>,
    pub intervals: Vec<(u64, u64)>,
    pub residuals: Vec<u64>,
}

impl BvRecord {
    /// Number of reference positions the copy mask selects.
    pub fn copied_count(&self) -> u64 {
        self.blocks.iter().step_by(2).sum()
    }

    /// The residual value sequence as it appears on the wire: first value
    /// absolute, the rest ascending gaps.
    pub fn residual_codes(&self) -> Vec<u64> {
        self.residuals
            .iter()
            .enumerate()
            .map(|(i, &r)| if i == 0 { r } else { r - self.residuals[i - 1] })
            .collect()
    }
}

fn wire_runs(full: &[u64]) -> &[u64] {
    if full.len() % 2 == 0 {
        &full[..full.len().saturating_sub(1)]
    } else {
        full
    }
}

/// Builds the record for one (vertex, reference) choice; `reference` is
/// `(offset, list)` or None for the pure interval/residual form.
fn build(neighbors: &[u64], reference: Option<(u32, &[u64])>, mil: u8) -> BvRecord {
    let (offset, blocks, rest) = match reference {
        Some((o, ref_list)) => {
            let mask: Vec<bool> = ref_list.iter().map(|t| neighbors.binary_search(t).is_ok()).collect();
            let rest: Vec<u64> = neighbors
                .iter()
                .copied()
                .filter(|t| ref_list.binary_search(t).is_err())
                .collect();
            (o, mask_to_runs(&mask), rest)
        }
        None => (0, Vec::new(), neighbors.to_vec()),
    };
    let (intervals, residuals) = detect_intervals(&rest, mil);
    BvRecord { offset, blocks, intervals, residuals }
}

fn write_record(
    rec: &BvRecord,
    v: u64,
    degree: u64,
    params: &BvParams,
    sink: &mut BitSink,
    budget: &mut BvBudget,
) -> Result<(), CodeError> {
    let gamma = CodeFamily::Gamma;
    let zeta = params.residual_family();
    let mut mark = sink.len_bits() as u64;
    let mut charge = |sink: &BitSink, slot: &mut u64| {
        *slot += sink.len_bits() as u64 - mark;
        mark = sink.len_bits() as u64;
    };

    gamma.encode(sink, degree + 1)?;
    charge(sink, &mut budget.outdegrees);
    if degree == 0 {
        return Ok(());
    }

    gamma.encode(sink, u64::from(rec.offset) + 1)?;
    charge(sink, &mut budget.references);

    if rec.offset > 0 {
        let runs = wire_runs(&rec.blocks);
        debug_assert!(runs.len() % 2 == 1, "wire runs end on a copy run");
        gamma.encode(sink, runs.len() as u64)?;
        gamma.encode(sink, runs[0] + 1)?;
        for &r in &runs[1..] {
            gamma.encode(sink, r)?;
        }
        charge(sink, &mut budget.copy_blocks);
    }

    gamma.encode(sink, rec.intervals.len() as u64 + 1)?;
    let mut prev_end = 0u64;
    for (i, &(start, extra)) in rec.intervals.iter().enumerate() {
        if i == 0 {
            gamma.encode(sink, zigzag(start as i64 - v as i64) + 1)?;
        } else {
            gamma.encode(sink, start - prev_end)?;
        }
        gamma.encode(sink, extra + 1)?;
        prev_end = start + extra + u64::from(params.mil);
    }
    charge(sink, &mut budget.intervals);

    for &code in &rec.residual_codes() {
        zeta.encode(sink, code)?;
    }
    charge(sink, &mut budget.residuals);
    Ok(())
}

fn record_bits(rec: &BvRecord, v: u64, degree: u64, params: &BvParams) -> u64 {
    let mut scratch = BitSink::new();
    let mut b = BvBudget::default();
    write_record(rec, v, degree, params, &mut scratch, &mut b).expect("plan serializes");
    scratch.len_bits() as u64
}

/// Chooses the record for vertex `v`: the cheapest admissible reference, or
/// no reference when none is strictly cheaper. `prev` holds the finalized
/// lists of vertices `1..v` and `chains` their reference chain lengths.
pub fn plan_record(
    v: u64,
    neighbors: &[u64],
    prev: &[Vec<u64>],
    chains: &[u32],
    params: &BvParams,
) -> BvRecord {
    let mut best = build(neighbors, None, params.mil);
    if neighbors.len() < MIN_SEARCH_DEGREE {
        return best;
    }
    let mut best_bits = record_bits(&best, v, neighbors.len() as u64, params);
    let reach = u64::from(params.window).min(v - 1);
    for o in 1..=reach {
        let u = (v - o - 1) as usize;
        if chains[u] >= params.max_chain {
            continue;
        }
        let ref_list = &prev[u];
        if ref_list.is_empty() || !ref_list.iter().any(|t| neighbors.binary_search(t).is_ok()) {
            continue;
        }
        let cand = build(neighbors, Some((o as u32, ref_list)), params.mil);
        let bits = record_bits(&cand, v, neighbors.len() as u64, params);
        if bits < best_bits {
            best_bits = bits;
            best = cand;
        }
    }
    best
}

/// Encodes all lists, returning per-record bit offsets within the written
/// segment and the component budget.
pub fn encode(
    lists: &[Vec<u64>],
    params: &BvParams,
    sink: &mut BitSink,
) -> Result<(Vec<u64>, BvBudget), CodeError> {
    let base = sink.len_bits() as u64;
    let mut budget = BvBudget::default();
    let mut starts = Vec::with_capacity(lists.len());
    let mut chains: Vec<u32> = Vec::with_capacity(lists.len());
    for (i, neighbors) in lists.iter().enumerate() {
        let v = (i + 1) as u64;
        starts.push(sink.len_bits() as u64 - base);
        let rec = plan_record(v, neighbors, lists, &chains, params);
        chains.push(if rec.offset > 0 { chains[i - rec.offset as usize] + 1 } else { 0 });
        write_record(&rec, v, neighbors.len() as u64, params, sink, &mut budget)?;
    }
    debug_assert_eq!(budget.total(), sink.len_bits() as u64 - base);
    Ok((starts, budget))
}

/// Reads one record body given the resolved reference list (None when the
/// record uses no reference).
fn read_body(
    src: &mut BitSource<'_>,
    v: u64,
    degree: u64,
    ref_list: Option<&[u64]>,
    params: &BvParams,
    limit: u64,
) -> Result<Vec<u64>, CodeError> {
    let gamma = CodeFamily::Gamma;
    let zeta = params.residual_family();
    let mut out: Vec<u64> = Vec::with_capacity(super::bounded(degree, src));

    if let Some(ref_list) = ref_list {
        let runs = gamma.decode(src)?;
        let mut pos = 0usize;
        for i in 0..runs {
            let len = if i == 0 { gamma.decode(src)? - 1 } else { gamma.decode(src)? } as usize;
            if pos + len > ref_list.len() {
                return Err(CodeError::Corrupt("copy runs overrun the reference list"));
            }
            if i % 2 == 0 {
                out.extend_from_slice(&ref_list[pos..pos + len]);
            }
            pos += len;
        }
        // Positions past the last wire run continue the alternation, which
        // always lands on a skip run.
    }

    let interval_count = gamma.decode(src)? - 1;
    let mut prev_end = 0u64;
    let mut interval_total = 0u64;
    for i in 0..interval_count {
        let start = if i == 0 {
            let z = gamma.decode(src)? - 1;
            v.checked_add_signed(unzigzag(z)).ok_or(CodeError::Corrupt("interval start underflow"))?
        } else {
            prev_end
                .checked_add(gamma.decode(src)?)
                .ok_or(CodeError::Corrupt("interval start overflow"))?
        };
        if start == 0 {
            return Err(CodeError::Corrupt("interval start underflow"));
        }
        let len = gamma
            .decode(src)?
            .checked_add(u64::from(params.mil) - 1)
            .ok_or(CodeError::Corrupt("interval length overflow"))?;
        let end = start.checked_add(len).ok_or(CodeError::Corrupt("interval end overflow"))?;
        if end - 1 > limit {
            return Err(CodeError::Corrupt("interval past the last vertex"));
        }
        out.extend(start..end);
        interval_total += len;
        prev_end = end;
    }

    let copied = out.len() as u64 - interval_total;
    let residual_count = degree
        .checked_sub(copied + interval_total)
        .ok_or(CodeError::Corrupt("record members exceed the outdegree"))?;
    let mut last = 0u64;
    for i in 0..residual_count {
        let code = zeta.decode(src)?;
        let r = if i == 0 {
            code
        } else {
            last.checked_add(code).ok_or(CodeError::Corrupt("residual overflow"))?
        };
        if r > limit {
            return Err(CodeError::Corrupt("residual past the last vertex"));
        }
        out.push(r);
        last = r;
    }

    out.sort_unstable();
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err(CodeError::Corrupt("record members collide"));
    }
    Ok(out)
}

pub fn decode(
    src: &mut BitSource<'_>,
    n: u64,
    params: &BvParams,
) -> Result<Vec<Vec<u64>>, CodeError> {
    let gamma = CodeFamily::Gamma;
    let mut lists: Vec<Vec<u64>> = Vec::with_capacity(super::bounded(n, src));
    for v in 1..=n {
        let degree = gamma.decode(src)? - 1;
        if degree == 0 {
            lists.push(Vec::new());
            continue;
        }
        let offset = gamma.decode(src)? - 1;
        let ref_list = if offset > 0 {
            if offset >= v {
                return Err(CodeError::Corrupt("reference offset outside window"));
            }
            Some(&lists[(v - offset - 1) as usize])
        } else {
            None
        };
        let list = read_body(src, v, degree, ref_list.map(|l| &l[..]), params, n)?;
        lists.push(list);
    }
    Ok(lists)
}

/// Decodes the record at the current position against a partial memo, for
/// random access; mirrors the kernel-codec `read_one` contract.
pub(crate) fn read_one(
    src: &mut BitSource<'_>,
    v: u64,
    params: &BvParams,
    memo: &alloc::collections::BTreeMap<u64, Vec<u64>>,
    limit: u64,
) -> Result<RecordRead, CodeError> {
    let gamma = CodeFamily::Gamma;
    let degree = gamma.decode(src)? - 1;
    if degree == 0 {
        return Ok(RecordRead::Done(Vec::new()));
    }
    let offset = gamma.decode(src)? - 1;
    let ref_list = if offset > 0 {
        if offset >= v || offset > u64::from(params.window) {
            return Err(CodeError::Corrupt("reference offset outside window"));
        }
        match memo.get(&(v - offset)) {
            Some(list) => Some(&list[..]),
            None => return Ok(RecordRead::Missing(vec![v - offset])),
        }
    } else {
        None
    };
    Ok(RecordRead::Done(read_body(src, v, degree, ref_list, params, limit)?))
}
