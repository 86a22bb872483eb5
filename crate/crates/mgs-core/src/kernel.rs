// SPDX-License-Identifier: Apache-2.0

//! Per-vertex encoding kernel: action space, reference search, copy
//! descriptors, residual transforms and the exact bit-cost planner.
//!
//! A vertex record decomposes its neighbor list into values copied from up
//! to two earlier lists, interval runs, and gap-coded residuals. The planner
//! enumerates candidate decompositions (28 actions crossed with shortlisted
//! references) and keeps the one whose serialized size, header included, is
//! minimal. Costs are computed from closed-form code lengths, never by trial
//! encoding, and are exact: the chosen plan serializes to exactly
//! `plan.cost_bits` bits.

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{
    unzigzag, zigzag, BitSink, BitSource, CodeError, CodeFamily,
};

/// Residual transform applied after reference copying. `Interval(mil)` and
/// `Rle(mil)` carry the minimum run length 2..=5.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Delta,
    Interval(u8),
    Rle(u8),
}

impl ResidualKind {
    fn index(self) -> u8 {
        match self {
            ResidualKind::Delta => 0,
            ResidualKind::Interval(mil) => mil - 1,
            ResidualKind::Rle(mil) => mil + 3,
        }
    }

    fn from_index(i: u8) -> Self {
        match i {
            0 => ResidualKind::Delta,
            1..=4 => ResidualKind::Interval(i + 1),
            _ => ResidualKind::Rle(i - 3),
        }
    }

    /// All nine kinds in stable index order.
    pub fn all() -> [ResidualKind; 9] {
        [
            ResidualKind::Delta,
            ResidualKind::Interval(2),
            ResidualKind::Interval(3),
            ResidualKind::Interval(4),
            ResidualKind::Interval(5),
            ResidualKind::Rle(2),
            ResidualKind::Rle(3),
            ResidualKind::Rle(4),
            ResidualKind::Rle(5),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefMode {
    None,
    Single,
    Multi,
}

impl RefMode {
    fn index(self) -> u8 {
        match self {
            RefMode::None => 0,
            RefMode::Single => 1,
            RefMode::Multi => 2,
        }
    }

    pub fn ref_count(self) -> usize {
        match self {
            RefMode::None => 0,
            RefMode::Single => 1,
            RefMode::Multi => 2,
        }
    }
}

/// One of the 28 encoding actions, as a stable id 0..=27. Ids 0..=26 are
/// `mode_index * 9 + kind_index`; id 27 is the distinguished empty action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionId(u8);

impl ActionId {
    pub const EMPTY: ActionId = ActionId(27);
    pub const COUNT: u8 = 28;

    pub fn new(mode: RefMode, kind: ResidualKind) -> Self {
        ActionId(mode.index() * 9 + kind.index())
    }

    pub fn from_index(i: u8) -> Option<Self> {
        (i < Self::COUNT).then_some(ActionId(i))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn is_empty_action(self) -> bool {
        self == Self::EMPTY
    }

    /// Mode and kind of a non-empty action.
    pub fn decompose(self) -> Option<(RefMode, ResidualKind)> {
        if self.is_empty_action() {
            return None;
        }
        let mode = match self.0 / 9 {
            0 => RefMode::None,
            1 => RefMode::Single,
            _ => RefMode::Multi,
        };
        Some((mode, ResidualKind::from_index(self.0 % 9)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostModel {
    /// Full shortlist, multi-reference pairs, exact costs.
    Exact,
    /// Shortlist truncated to 2 candidates, no multi-reference; costs stay
    /// exact for every candidate actually evaluated.
    Fast,
}

/// Knobs of the shared kernel. Codecs freeze most of these; the benchmark
/// harness toggles them individually.
#[derive(Debug, Clone)]
pub struct KernelConfig {
    /// Reference window w, a power of two >= 1.
    pub window: u32,
    /// Shortlist size T for the overlap pre-search.
    pub shortlist: u32,
    /// How many shortlist leaders may serve as the first of a pair.
    pub multi_top_k: u32,
    /// 0 = no references, 1 = single, 2 = single and pairs.
    pub max_refs: u8,
    /// Reference search runs only for vertices of at least this degree, and
    /// only candidates of at least this degree are considered.
    pub min_ref_degree: u32,
    /// Offer the left/right residual split alongside the plain stream.
    pub lr_split: bool,
    /// Interval starts relative to the vertex id instead of absolute.
    pub tight_intervals: bool,
    /// STOP-terminated lists instead of count-prefixed ones.
    pub stop_lists: bool,
    /// Choose per reference among copy-blocks, raw bitmap and
    /// complement-blocks (with a 1-2 bit selector) instead of blocks only.
    pub adaptive_copy: bool,
    pub cost_model: CostModel,
    pub family: CodeFamily,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            window: 64,
            shortlist: 8,
            multi_top_k: 5,
            max_refs: 2,
            min_ref_degree: 1,
            lr_split: true,
            tight_intervals: true,
            stop_lists: true,
            adaptive_copy: true,
            cost_model: CostModel::Exact,
            family: CodeFamily::Fibonacci,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), CodeError> {
        if !self.window.is_power_of_two() {
            return Err(CodeError::Corrupt("window must be a power of two"));
        }
        if self.shortlist == 0 || self.min_ref_degree == 0 || self.max_refs > 2 {
            return Err(CodeError::Corrupt("invalid kernel configuration"));
        }
        self.family.validated().map(|_| ())
    }
}

/// How the codec at hand prices the parts of a record header. The kernel
/// plans against these costs; the codec itself writes the header bits.
pub trait HeaderModel {
    /// Bits for the action selector, or None if this codec cannot express
    /// the action at all.
    fn action_bits(&self, action: ActionId) -> Option<u32>;
    /// Bits for one reference offset in 1..=window.
    fn offset_bits(&self, offset: u32) -> u32;
}

/// Copy-mask representation chosen for one reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Descriptor {
    Blocks,
    Bitmap,
    ComplementBlocks,
}

/// One reference in a plan: the window offset, the copy mask over the
/// reference's position space, and the chosen mask representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefPlan {
    pub offset: u32,
    pub mask: Vec<bool>,
    pub descriptor: Descriptor,
    /// Values the mask selects, ascending.
    pub copied: Vec<u64>,
}

impl RefPlan {
    /// Full alternating copy/skip runs of the mask, copy run first (the
    /// first run may be 0). The serialized form drops a trailing skip run.
    pub fn runs(&self) -> Vec<u64> {
        mask_to_runs(&self.mask)
    }
}

/// A fully decided vertex record. `residuals` holds the final gap-coded
/// values: everything for `Delta` and `Rle` kinds, the interval leftovers
/// for `Interval` kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub action: ActionId,
    pub refs: Vec<RefPlan>,
    /// (start, length - MIL) pairs, ascending by start.
    pub intervals: Vec<(u64, u64)>,
    pub residuals: Vec<u64>,
    /// Residual stream uses the left/right split form.
    pub lr: bool,
    /// Exact total record size: header, offsets and payload.
    pub cost_bits: u64,
}

impl Plan {
    pub fn empty(cost_bits: u64) -> Self {
        Plan {
            action: ActionId::EMPTY,
            refs: Vec::new(),
            intervals: Vec::new(),
            residuals: Vec::new(),
            lr: false,
            cost_bits,
        }
    }
}

/// Alternating copy/skip run lengths of a mask, starting with a copy run
/// (length 0 when the mask leads with skips).
pub fn mask_to_runs(mask: &[bool]) -> Vec<u64> {
    let mut runs = Vec::new();
    let mut want = true;
    let mut i = 0;
    while i < mask.len() {
        let mut len = 0u64;
        while i < mask.len() && mask[i] == want {
            len += 1;
            i += 1;
        }
        runs.push(len);
        want = !want;
    }
    // A leading skip needs an explicit zero-length copy run; interior runs
    // are maximal and never zero.
    if runs.is_empty() && !mask.is_empty() {
        runs.push(0);
    }
    runs
}

/// Values of `sorted` that also occur in `other` (both ascending).
pub fn intersect_sorted(sorted: &[u64], other: &[u64]) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < sorted.len() && j < other.len() {
        match sorted[i].cmp(&other[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                out.push(sorted[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Splits `values` (ascending) into maximal consecutive runs of length >=
/// `mil`, returned as (start, length - mil), and the remaining leftovers.
pub fn detect_intervals(values: &[u64], mil: u8) -> (Vec<(u64, u64)>, Vec<u64>) {
    let mil = u64::from(mil);
    let mut intervals = Vec::new();
    let mut leftovers = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && values[j] == values[j - 1] + 1 {
            j += 1;
        }
        let len = (j - i) as u64;
        if len >= mil {
            intervals.push((values[i], len - mil));
        } else {
            leftovers.extend_from_slice(&values[i..j]);
        }
        i = j;
    }
    (intervals, leftovers)
}

/// Distance halves of the left/right residual split: ascending distances
/// v - r for r < v and r - v for r > v, each as first-value-then-deltas.
/// Returns None when v itself occurs among the residuals.
pub fn lr_split(residuals: &[u64], v: u64) -> Option<(Vec<u64>, Vec<u64>)> {
    if residuals.binary_search(&v).is_ok() {
        return None;
    }
    let split = residuals.partition_point(|&r| r < v);
    // Left residuals ascend, so their distances v - r descend; reverse.
    let left_dist: Vec<u64> = residuals[..split].iter().rev().map(|&r| v - r).collect();
    let right_dist: Vec<u64> = residuals[split..].iter().map(|&r| r - v).collect();
    Some((to_deltas(&left_dist), to_deltas(&right_dist)))
}

/// Rebuilds the residual list from LR distance-delta halves.
pub fn lr_reconstruct(left: &[u64], right: &[u64], v: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut d = 0;
    for &x in left {
        d += x;
        out.push(v - d);
    }
    out.reverse();
    let mut d = 0;
    for &x in right {
        d += x;
        out.push(v + d);
    }
    out
}

fn to_deltas(ascending: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(ascending.len());
    let mut prev = 0;
    for &x in ascending {
        out.push(x - prev);
        prev = x;
    }
    out
}

/// (start, run length) pairs of the hybrid run-length form: maximal
/// consecutive runs of at least `mil` stay whole, shorter ones degrade to
/// per-value singletons.
pub fn rle_pairs(values: &[u64], mil: u8) -> Vec<(u64, u64)> {
    let mil = u64::from(mil);
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && values[j] == values[j - 1] + 1 {
            j += 1;
        }
        let len = (j - i) as u64;
        if len >= mil {
            pairs.push((values[i], len));
        } else {
            for &x in &values[i..j] {
                pairs.push((x, 1));
            }
        }
        i = j;
    }
    pairs
}

// ---------------------------------------------------------------------------
// Payload serialization and its closed-form cost mirror.
//
// Payload layout after the codec-written header (action + offsets):
//   per reference:      [selector (adaptive only)] descriptor
//   Interval kinds:     interval section
//   Delta/Interval:     [LR flag (lr_split only)] residual stream
//   Rle kinds:          pair stream
// ---------------------------------------------------------------------------

struct Streams<'a> {
    cfg: &'a KernelConfig,
}

impl<'a> Streams<'a> {
    fn enc(&self, sink: &mut BitSink, x: u64) -> Result<u32, CodeError> {
        self.cfg.family.encode(sink, x)
    }

    fn len(&self, x: u64) -> u64 {
        // Config families are validated up front; lengths never fail.
        u64::from(self.cfg.family.len(x).expect("validated family"))
    }

    fn dec(&self, src: &mut BitSource<'_>) -> Result<u64, CodeError> {
        self.cfg.family.decode(src)
    }
}

/// First residual code: the signed distance to v, shifted positive.
fn first_code(s1: u64, v: u64) -> u64 {
    zigzag(s1 as i64 - v as i64) + 1
}

fn first_value(code: u64, v: u64) -> Result<u64, CodeError> {
    let d = unzigzag(code - 1);
    let s = v as i128 + d as i128;
    if s < 1 || s > u64::MAX as i128 {
        return Err(CodeError::Corrupt("first residual outside the vertex range"));
    }
    Ok(s as u64)
}

fn blocks_bits(st: &Streams<'_>, runs: &[u64]) -> u64 {
    let wire = wire_runs(runs);
    let mut bits = st.len(wire.len() as u64) + st.len(wire[0] + 1);
    for &r in &wire[1..] {
        bits += st.len(r);
    }
    bits
}

/// Runs actually serialized: the trailing skip run is implicit.
fn wire_runs(runs: &[u64]) -> &[u64] {
    debug_assert!(!runs.is_empty());
    if runs.len() % 2 == 0 {
        &runs[..runs.len() - 1]
    } else {
        runs
    }
}

fn write_blocks(st: &Streams<'_>, sink: &mut BitSink, runs: &[u64]) -> Result<(), CodeError> {
    let wire = wire_runs(runs);
    st.enc(sink, wire.len() as u64)?;
    st.enc(sink, wire[0] + 1)?;
    for &r in &wire[1..] {
        st.enc(sink, r)?;
    }
    Ok(())
}

fn read_blocks_mask(
    st: &Streams<'_>,
    src: &mut BitSource<'_>,
    d_ref: usize,
) -> Result<Vec<bool>, CodeError> {
    let b = st.dec(src)? as usize;
    let mut mask = Vec::with_capacity(d_ref);
    let mut want = true;
    for i in 0..b {
        let run = if i == 0 { st.dec(src)? - 1 } else { st.dec(src)? };
        for _ in 0..run {
            if mask.len() == d_ref {
                return Err(CodeError::Corrupt("copy blocks exceed reference degree"));
            }
            mask.push(want);
        }
        want = !want;
    }
    // Everything past the explicit runs is skipped.
    mask.resize(d_ref, false);
    Ok(mask)
}

fn descriptor_bits(st: &Streams<'_>, rp: &RefPlan) -> u64 {
    let body = match rp.descriptor {
        Descriptor::Blocks => blocks_bits(st, &rp.runs()),
        Descriptor::Bitmap => rp.mask.len() as u64,
        Descriptor::ComplementBlocks => {
            let inv: Vec<bool> = rp.mask.iter().map(|&b| !b).collect();
            blocks_bits(st, &mask_to_runs(&inv))
        }
    };
    if st.cfg.adaptive_copy {
        let selector = if rp.descriptor == Descriptor::Blocks { 1 } else { 2 };
        selector + body
    } else {
        debug_assert_eq!(rp.descriptor, Descriptor::Blocks);
        body
    }
}

fn write_descriptor(st: &Streams<'_>, sink: &mut BitSink, rp: &RefPlan) -> Result<(), CodeError> {
    if st.cfg.adaptive_copy {
        match rp.descriptor {
            Descriptor::Blocks => sink.write_bit(false),
            Descriptor::Bitmap => {
                sink.write_bit(true);
                sink.write_bit(false);
            }
            Descriptor::ComplementBlocks => {
                sink.write_bit(true);
                sink.write_bit(true);
            }
        }
    }
    match rp.descriptor {
        Descriptor::Blocks => write_blocks(st, sink, &rp.runs()),
        Descriptor::Bitmap => {
            for &b in &rp.mask {
                sink.write_bit(b);
            }
            Ok(())
        }
        Descriptor::ComplementBlocks => {
            let inv: Vec<bool> = rp.mask.iter().map(|&b| !b).collect();
            write_blocks(st, sink, &mask_to_runs(&inv))
        }
    }
}

fn read_descriptor(
    st: &Streams<'_>,
    src: &mut BitSource<'_>,
    d_ref: usize,
) -> Result<Vec<bool>, CodeError> {
    let descriptor = if st.cfg.adaptive_copy {
        if !src.read_bit()? {
            Descriptor::Blocks
        } else if !src.read_bit()? {
            Descriptor::Bitmap
        } else {
            Descriptor::ComplementBlocks
        }
    } else {
        Descriptor::Blocks
    };
    match descriptor {
        Descriptor::Blocks => read_blocks_mask(st, src, d_ref),
        Descriptor::Bitmap => {
            let mut mask = Vec::with_capacity(d_ref);
            for _ in 0..d_ref {
                mask.push(src.read_bit()?);
            }
            Ok(mask)
        }
        Descriptor::ComplementBlocks => {
            let inv = read_blocks_mask(st, src, d_ref)?;
            Ok(inv.iter().map(|&b| !b).collect())
        }
    }
}

fn interval_start_code(st: &Streams<'_>, i: usize, start: u64, v: u64, prev_end: u64) -> u64 {
    if !st.cfg.tight_intervals {
        start
    } else if i == 0 {
        first_code(start, v)
    } else {
        start - prev_end
    }
}

fn interval_section_bits(st: &Streams<'_>, intervals: &[(u64, u64)], v: u64, mil: u8) -> u64 {
    let mut bits = 0;
    let mut prev_end = 0;
    for (i, &(start, extra)) in intervals.iter().enumerate() {
        bits += st.len(interval_start_code(st, i, start, v, prev_end)) + st.len(extra + 1);
        prev_end = start + u64::from(mil) + extra;
    }
    if st.cfg.stop_lists {
        bits + intervals.len() as u64 + 1
    } else {
        bits + st.len(intervals.len() as u64 + 1)
    }
}

fn write_interval_section(
    st: &Streams<'_>,
    sink: &mut BitSink,
    intervals: &[(u64, u64)],
    v: u64,
    mil: u8,
) -> Result<(), CodeError> {
    if !st.cfg.stop_lists {
        st.enc(sink, intervals.len() as u64 + 1)?;
    }
    let mut prev_end = 0;
    for (i, &(start, extra)) in intervals.iter().enumerate() {
        if st.cfg.stop_lists {
            sink.write_bit(true);
        }
        st.enc(sink, interval_start_code(st, i, start, v, prev_end))?;
        st.enc(sink, extra + 1)?;
        prev_end = start + u64::from(mil) + extra;
    }
    if st.cfg.stop_lists {
        sink.write_bit(false);
    }
    Ok(())
}

fn read_interval_section(
    st: &Streams<'_>,
    src: &mut BitSource<'_>,
    v: u64,
    mil: u8,
    limit: u64,
) -> Result<Vec<(u64, u64)>, CodeError> {
    let mut intervals = Vec::new();
    let count = if st.cfg.stop_lists { None } else { Some(st.dec(src)? - 1) };
    let mut prev_end = 0u64;
    let mut i = 0;
    loop {
        match count {
            Some(c) if i == c => break,
            None => {
                if !src.read_bit()? {
                    break;
                }
            }
            _ => {}
        }
        let code = st.dec(src)?;
        let start = if !st.cfg.tight_intervals {
            code
        } else if i == 0 {
            first_value(code, v)?
        } else {
            prev_end
                .checked_add(code)
                .ok_or(CodeError::Corrupt("interval start overflow"))?
        };
        let extra = st.dec(src)? - 1;
        if start <= prev_end && i > 0 {
            return Err(CodeError::Corrupt("interval starts not increasing"));
        }
        prev_end = start
            .checked_add(u64::from(mil))
            .and_then(|e| e.checked_add(extra))
            .ok_or(CodeError::Corrupt("interval end overflow"))?;
        if prev_end - 1 > limit {
            return Err(CodeError::Corrupt("interval past the last vertex"));
        }
        intervals.push((start, extra));
        i += 1;
    }
    Ok(intervals)
}

/// Gap codes of a plain ascending residual stream: signed first value
/// around v, then strictly positive gaps.
fn plain_codes(values: &[u64], v: u64) -> Vec<u64> {
    let mut codes = Vec::with_capacity(values.len());
    for (i, &s) in values.iter().enumerate() {
        codes.push(if i == 0 { first_code(s, v) } else { s - values[i - 1] });
    }
    codes
}

fn list_bits(st: &Streams<'_>, codes: &[u64], known_nonempty: bool) -> u64 {
    let payload: u64 = codes.iter().map(|&c| st.len(c)).sum();
    if st.cfg.stop_lists {
        if known_nonempty {
            payload + codes.len() as u64
        } else if codes.is_empty() {
            1
        } else {
            1 + payload + codes.len() as u64
        }
    } else {
        let count = codes.len() as u64;
        payload + if known_nonempty { st.len(count) } else { st.len(count + 1) }
    }
}

fn write_list(
    st: &Streams<'_>,
    sink: &mut BitSink,
    codes: &[u64],
    known_nonempty: bool,
) -> Result<(), CodeError> {
    if st.cfg.stop_lists {
        if !known_nonempty {
            sink.write_bit(!codes.is_empty());
            if codes.is_empty() {
                return Ok(());
            }
        }
        for (i, &c) in codes.iter().enumerate() {
            st.enc(sink, c)?;
            sink.write_bit(i + 1 < codes.len());
        }
        Ok(())
    } else {
        let count = codes.len() as u64;
        st.enc(sink, if known_nonempty { count } else { count + 1 })?;
        for &c in codes {
            st.enc(sink, c)?;
        }
        Ok(())
    }
}

fn read_list(
    st: &Streams<'_>,
    src: &mut BitSource<'_>,
    known_nonempty: bool,
) -> Result<Vec<u64>, CodeError> {
    let mut codes = Vec::new();
    if st.cfg.stop_lists {
        if !known_nonempty && !src.read_bit()? {
            return Ok(codes);
        }
        loop {
            codes.push(st.dec(src)?);
            if !src.read_bit()? {
                return Ok(codes);
            }
        }
    } else {
        let count = if known_nonempty { st.dec(src)? } else { st.dec(src)? - 1 };
        for _ in 0..count {
            codes.push(st.dec(src)?);
        }
        Ok(codes)
    }
}

/// Residual stream cost and the LR choice that attains it.
fn residual_stream_bits(
    st: &Streams<'_>,
    residuals: &[u64],
    v: u64,
    known_nonempty: bool,
) -> (u64, bool) {
    let plain = list_bits(st, &plain_codes(residuals, v), known_nonempty);
    if !st.cfg.lr_split {
        return (plain, false);
    }
    let lr = match lr_split(residuals, v) {
        Some((left, right)) if !residuals.is_empty() => {
            // Right half borrows the nonempty form when the left is empty,
            // so an empty residual set has no LR encoding at all.
            list_bits(st, &left, false) + list_bits(st, &right, left.is_empty())
        }
        _ => u64::MAX,
    };
    if lr < plain {
        (1 + lr, true)
    } else {
        (1 + plain, false)
    }
}

fn write_residual_stream(
    st: &Streams<'_>,
    sink: &mut BitSink,
    plan: &Plan,
    v: u64,
    known_nonempty: bool,
) -> Result<(), CodeError> {
    if st.cfg.lr_split {
        sink.write_bit(plan.lr);
    }
    if plan.lr {
        let (left, right) =
            lr_split(&plan.residuals, v).ok_or(CodeError::Corrupt("LR split with v present"))?;
        write_list(st, sink, &left, false)?;
        write_list(st, sink, &right, left.is_empty())
    } else {
        write_list(st, sink, &plain_codes(&plan.residuals, v), known_nonempty)
    }
}

fn read_residual_stream(
    st: &Streams<'_>,
    src: &mut BitSource<'_>,
    v: u64,
    known_nonempty: bool,
    limit: u64,
) -> Result<Vec<u64>, CodeError> {
    let lr = if st.cfg.lr_split { src.read_bit()? } else { false };
    let values = if lr {
        let left = read_list(st, src, false)?;
        let right = read_list(st, src, left.is_empty())?;
        let mut values = Vec::with_capacity(left.len() + right.len());
        let mut d = 0u64;
        for &x in &left {
            d = d.checked_add(x).ok_or(CodeError::Corrupt("left residual underflow"))?;
            let s = v.checked_sub(d).ok_or(CodeError::Corrupt("left residual underflow"))?;
            if s == 0 {
                return Err(CodeError::Corrupt("left residual underflow"));
            }
            values.push(s);
        }
        values.reverse();
        let mut d = 0u64;
        for &x in &right {
            d = d.checked_add(x).ok_or(CodeError::Corrupt("right residual overflow"))?;
            let s = v.checked_add(d).ok_or(CodeError::Corrupt("right residual overflow"))?;
            values.push(s);
        }
        values
    } else {
        let codes = read_list(st, src, known_nonempty)?;
        let mut values = Vec::with_capacity(codes.len());
        let mut prev = 0u64;
        for (i, &c) in codes.iter().enumerate() {
            let s = if i == 0 {
                first_value(c, v)?
            } else {
                prev.checked_add(c).ok_or(CodeError::Corrupt("residual overflow"))?
            };
            values.push(s);
            prev = s;
        }
        values
    };
    if values.last().is_some_and(|&s| s > limit) {
        return Err(CodeError::Corrupt("residual past the last vertex"));
    }
    Ok(values)
}

fn rle_bits(st: &Streams<'_>, pairs: &[(u64, u64)], v: u64) -> u64 {
    let mut bits = 0;
    let mut prev_last = 0;
    for (i, &(start, run)) in pairs.iter().enumerate() {
        let gap = if i == 0 { first_code(start, v) } else { start - prev_last };
        bits += st.len(gap) + st.len(run);
        prev_last = start + run - 1;
    }
    if st.cfg.stop_lists {
        bits + pairs.len() as u64 + 1
    } else {
        bits + st.len(pairs.len() as u64 + 1)
    }
}

fn write_rle(
    st: &Streams<'_>,
    sink: &mut BitSink,
    pairs: &[(u64, u64)],
    v: u64,
) -> Result<(), CodeError> {
    if !st.cfg.stop_lists {
        st.enc(sink, pairs.len() as u64 + 1)?;
    }
    let mut prev_last = 0;
    for (i, &(start, run)) in pairs.iter().enumerate() {
        if st.cfg.stop_lists {
            sink.write_bit(true);
        }
        let gap = if i == 0 { first_code(start, v) } else { start - prev_last };
        st.enc(sink, gap)?;
        st.enc(sink, run)?;
        prev_last = start + run - 1;
    }
    if st.cfg.stop_lists {
        sink.write_bit(false);
    }
    Ok(())
}

fn read_rle(
    st: &Streams<'_>,
    src: &mut BitSource<'_>,
    v: u64,
    limit: u64,
) -> Result<Vec<u64>, CodeError> {
    let mut values = Vec::new();
    let count = if st.cfg.stop_lists { None } else { Some(st.dec(src)? - 1) };
    let mut prev_last = 0u64;
    let mut i = 0u64;
    loop {
        match count {
            Some(c) if i == c => break,
            None => {
                if !src.read_bit()? {
                    break;
                }
            }
            _ => {}
        }
        let gap = st.dec(src)?;
        let start = if i == 0 {
            first_value(gap, v)?
        } else {
            prev_last.checked_add(gap).ok_or(CodeError::Corrupt("run start overflow"))?
        };
        let run = st.dec(src)?;
        let last = start
            .checked_add(run - 1)
            .ok_or(CodeError::Corrupt("run end overflow"))?;
        if last > limit {
            return Err(CodeError::Corrupt("run past the last vertex"));
        }
        values.extend(start..=last);
        prev_last = last;
        i += 1;
    }
    Ok(values)
}

fn known_nonempty_residuals(mode: RefMode, kind: ResidualKind) -> bool {
    mode == RefMode::None && kind == ResidualKind::Delta
}

/// Exact serialized payload size of a plan (everything after the header
/// and reference offsets), in bits.
pub fn payload_bits(plan: &Plan, v: u64, cfg: &KernelConfig) -> u64 {
    let st = Streams { cfg };
    let Some((mode, kind)) = plan.action.decompose() else {
        return 0;
    };
    let mut bits = 0;
    for rp in &plan.refs {
        bits += descriptor_bits(&st, rp);
    }
    match kind {
        ResidualKind::Delta => {
            let (b, lr) = residual_stream_bits(
                &st,
                &plan.residuals,
                v,
                known_nonempty_residuals(mode, kind),
            );
            debug_assert_eq!(lr, plan.lr);
            bits += b;
        }
        ResidualKind::Interval(mil) => {
            bits += interval_section_bits(&st, &plan.intervals, v, mil);
            let (b, lr) = residual_stream_bits(&st, &plan.residuals, v, false);
            debug_assert_eq!(lr, plan.lr);
            bits += b;
        }
        ResidualKind::Rle(mil) => {
            bits += rle_bits(&st, &rle_pairs(&plan.residuals, mil), v);
        }
    }
    bits
}

/// Serializes the payload; the codec must already have written the header
/// (action selector and reference offsets).
pub fn write_payload(
    plan: &Plan,
    v: u64,
    cfg: &KernelConfig,
    sink: &mut BitSink,
) -> Result<(), CodeError> {
    let st = Streams { cfg };
    let Some((mode, kind)) = plan.action.decompose() else {
        return Ok(());
    };
    for rp in &plan.refs {
        write_descriptor(&st, sink, rp)?;
    }
    match kind {
        ResidualKind::Delta => {
            write_residual_stream(&st, sink, plan, v, known_nonempty_residuals(mode, kind))
        }
        ResidualKind::Interval(mil) => {
            write_interval_section(&st, sink, &plan.intervals, v, mil)?;
            write_residual_stream(&st, sink, plan, v, false)
        }
        ResidualKind::Rle(mil) => write_rle(&st, sink, &rle_pairs(&plan.residuals, mil), v),
    }
}

/// Decodes a payload back into the neighbor list. `ref_lists` holds the
/// already-reconstructed list of each reference, in header order. Decoded
/// successors must stay within 1..=`limit` (the last valid vertex id);
/// anything outside marks the record as corrupt before it can expand.
pub fn read_payload(
    action: ActionId,
    ref_lists: &[&[u64]],
    v: u64,
    cfg: &KernelConfig,
    src: &mut BitSource<'_>,
    limit: u64,
) -> Result<Vec<u64>, CodeError> {
    let st = Streams { cfg };
    let Some((mode, kind)) = action.decompose() else {
        return Ok(Vec::new());
    };
    if ref_lists.len() != mode.ref_count() {
        return Err(CodeError::Corrupt("reference count does not match action"));
    }
    let mut copied: Vec<u64> = Vec::new();
    for (i, list) in ref_lists.iter().enumerate() {
        // The second reference's position space excludes already-copied
        // values, mirroring the encoder.
        let space: Vec<u64> = if i == 0 {
            list.to_vec()
        } else {
            list.iter().copied().filter(|x| !copied.contains(x)).collect()
        };
        let mask = read_descriptor(&st, src, space.len())?;
        for (j, &keep) in mask.iter().enumerate() {
            if keep {
                copied.push(space[j]);
            }
        }
    }
    copied.sort_unstable();
    let mut values = copied;
    match kind {
        ResidualKind::Delta => {
            values.extend(read_residual_stream(
                &st,
                src,
                v,
                known_nonempty_residuals(mode, kind),
                limit,
            )?);
        }
        ResidualKind::Interval(mil) => {
            for (start, extra) in read_interval_section(&st, src, v, mil, limit)? {
                for j in 0..u64::from(mil) + extra {
                    values.push(start + j);
                }
            }
            values.extend(read_residual_stream(&st, src, v, false, limit)?);
        }
        ResidualKind::Rle(_) => {
            values.extend(read_rle(&st, src, v, limit)?);
        }
    }
    values.sort_unstable();
    for w in values.windows(2) {
        if w[0] == w[1] {
            return Err(CodeError::Corrupt("duplicate neighbor in decoded record"));
        }
    }
    Ok(values)
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

/// One shortlisted reference candidate.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub offset: u32,
    pub overlap: usize,
}

/// Top-T window vertices by neighbor overlap with v; only candidates with
/// degree >= min_ref_degree and overlap >= 1 qualify (a zero-overlap
/// reference can never beat the matching no-reference plan). Ties go to the
/// smaller offset. The fast cost model truncates to 2 candidates.
pub fn find_reference_candidates(
    v: u64,
    neighbors: &[u64],
    lists: &dyn PrevLists,
    cfg: &KernelConfig,
) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::new();
    let reach = u64::from(cfg.window).min(v - 1);
    for offset in 1..=reach {
        let u = v - offset;
        let list = lists.successors_of(u);
        if (list.len() as u32) < cfg.min_ref_degree {
            continue;
        }
        let overlap = intersect_sorted(neighbors, list).len();
        if overlap == 0 {
            continue;
        }
        out.push(Candidate { offset: offset as u32, overlap });
    }
    out.sort_by(|a, b| b.overlap.cmp(&a.overlap).then(a.offset.cmp(&b.offset)));
    let cap = match cfg.cost_model {
        CostModel::Exact => cfg.shortlist as usize,
        CostModel::Fast => 2,
    };
    out.truncate(cap);
    out
}

/// Access to the finalized lists of the vertices before v.
pub trait PrevLists {
    fn successors_of(&self, u: u64) -> &[u64];
}

impl PrevLists for Vec<Vec<u64>> {
    /// Index i holds the list of vertex i + 1.
    fn successors_of(&self, u: u64) -> &[u64] {
        &self[(u - 1) as usize]
    }
}

fn build_ref(offset: u32, space: &[u64], wanted: &[u64], cfg: &KernelConfig) -> RefPlan {
    if space.is_empty() {
        // Nothing left to copy from; the caller discards such references.
        return RefPlan {
            offset,
            mask: Vec::new(),
            descriptor: Descriptor::Blocks,
            copied: Vec::new(),
        };
    }
    let copied = intersect_sorted(wanted, space);
    let mut mask = vec![false; space.len()];
    let mut k = 0;
    for (i, &x) in space.iter().enumerate() {
        if k < copied.len() && copied[k] == x {
            mask[i] = true;
            k += 1;
        }
    }
    let descriptor = if cfg.adaptive_copy {
        let st = Streams { cfg };
        let blocks = blocks_bits(&st, &mask_to_runs(&mask));
        let bitmap = mask.len() as u64;
        let inv: Vec<bool> = mask.iter().map(|&b| !b).collect();
        let complement = blocks_bits(&st, &mask_to_runs(&inv));
        // Selector prefix: blocks 1 bit, the others 2.
        let (mut best, mut best_cost) = (Descriptor::Blocks, 1 + blocks);
        if 2 + bitmap < best_cost {
            best = Descriptor::Bitmap;
            best_cost = 2 + bitmap;
        }
        if 2 + complement < best_cost {
            best = Descriptor::ComplementBlocks;
        }
        best
    } else {
        Descriptor::Blocks
    };
    RefPlan { offset, mask, descriptor, copied }
}

fn subtract_sorted(from: &[u64], remove: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(from.len());
    let mut j = 0;
    for &x in from {
        while j < remove.len() && remove[j] < x {
            j += 1;
        }
        if j < remove.len() && remove[j] == x {
            j += 1;
        } else {
            out.push(x);
        }
    }
    out
}

struct PartialPlan {
    refs: Vec<RefPlan>,
    offsets_bits: u64,
    leftover: Vec<u64>,
}

impl PartialPlan {
    fn none() -> Self {
        PartialPlan { refs: Vec::new(), offsets_bits: 0, leftover: Vec::new() }
    }
}

/// Chooses the cost-minimal plan for vertex v. `lists` must expose the
/// finalized lists of vertices v-window..v-1 (local numbering starts at 1).
pub fn plan_vertex<H: HeaderModel>(
    v: u64,
    neighbors: &[u64],
    lists: &dyn PrevLists,
    cfg: &KernelConfig,
    header: &H,
) -> Plan {
    if neighbors.is_empty() {
        let bits = header.action_bits(ActionId::EMPTY).expect("empty action always encodable");
        return Plan::empty(u64::from(bits));
    }
    let st = Streams { cfg };
    let mut best: Option<Plan> = None;

    consider_kinds(&st, header, v, neighbors, RefMode::None, &PartialPlan::none(), &mut best);

    if cfg.max_refs >= 1 && neighbors.len() as u32 >= cfg.min_ref_degree {
        let candidates = find_reference_candidates(v, neighbors, lists, cfg);
        for c in &candidates {
            let space = lists.successors_of(v - u64::from(c.offset));
            let rp = build_ref(c.offset, space, neighbors, cfg);
            let leftover = subtract_sorted(neighbors, &rp.copied);
            let partial = PartialPlan {
                offsets_bits: u64::from(header.offset_bits(c.offset)),
                refs: vec![rp],
                leftover,
            };
            consider_kinds(&st, header, v, neighbors, RefMode::Single, &partial, &mut best);
        }
        if cfg.max_refs >= 2 && cfg.cost_model == CostModel::Exact {
            let reach = u64::from(cfg.window).min(v - 1);
            for a in candidates.iter().take(cfg.multi_top_k as usize) {
                let space_a = lists.successors_of(v - u64::from(a.offset));
                let rp_a = build_ref(a.offset, space_a, neighbors, cfg);
                let after_a = subtract_sorted(neighbors, &rp_a.copied);
                for b_off in 1..=reach {
                    let b_off = b_off as u32;
                    if b_off == a.offset {
                        continue;
                    }
                    let list_b = lists.successors_of(v - u64::from(b_off));
                    if (list_b.len() as u32) < cfg.min_ref_degree {
                        continue;
                    }
                    let space_b = subtract_sorted(list_b, &rp_a.copied);
                    let rp_b = build_ref(b_off, &space_b, &after_a, cfg);
                    if rp_b.copied.is_empty() {
                        continue;
                    }
                    let leftover = subtract_sorted(&after_a, &rp_b.copied);
                    let partial = PartialPlan {
                        offsets_bits: u64::from(header.offset_bits(a.offset))
                            + u64::from(header.offset_bits(b_off)),
                        refs: vec![rp_a.clone(), rp_b],
                        leftover,
                    };
                    consider_kinds(&st, header, v, neighbors, RefMode::Multi, &partial, &mut best);
                }
            }
        }
    }

    best.expect("at least the none-mode plans are always representable")
}

/// Evaluates every residual kind of one reference mode against `best`,
/// keeping the winner under the (cost, action index, offsets) order.
fn consider_kinds<H: HeaderModel>(
    st: &Streams<'_>,
    header: &H,
    v: u64,
    neighbors: &[u64],
    mode: RefMode,
    partial: &PartialPlan,
    best: &mut Option<Plan>,
) {
    for kind in ResidualKind::all() {
        let action = ActionId::new(mode, kind);
        let Some(action_bits) = header.action_bits(action) else { continue };
        let base = u64::from(action_bits)
            + partial.offsets_bits
            + partial.refs.iter().map(|rp| descriptor_bits(st, rp)).sum::<u64>();
        let leftover: &[u64] = if mode == RefMode::None { neighbors } else { &partial.leftover };
        let (payload, intervals, residuals, lr) = match kind {
            ResidualKind::Delta => {
                let (b, lr) =
                    residual_stream_bits(st, leftover, v, known_nonempty_residuals(mode, kind));
                (b, Vec::new(), leftover.to_vec(), lr)
            }
            ResidualKind::Interval(mil) => {
                let (ivs, rest) = detect_intervals(leftover, mil);
                let b = interval_section_bits(st, &ivs, v, mil);
                let (rb, lr) = residual_stream_bits(st, &rest, v, false);
                (b + rb, ivs, rest, lr)
            }
            ResidualKind::Rle(mil) => {
                let b = rle_bits(st, &rle_pairs(leftover, mil), v);
                (b, Vec::new(), leftover.to_vec(), false)
            }
        };
        let cost = base + payload;
        let better = match best {
            None => true,
            Some(b) => {
                let key_new = (cost, action.index(), offsets_key(&partial.refs));
                let key_old = (b.cost_bits, b.action.index(), offsets_key(&b.refs));
                key_new < key_old
            }
        };
        if better {
            *best = Some(Plan {
                action,
                refs: partial.refs.clone(),
                intervals,
                residuals,
                lr,
                cost_bits: cost,
            });
        }
    }
}

/// Cost-minimal plan for one explicit choice of reference offsets (empty
/// slice = no reference), applying the same eligibility rules as the
/// search in `plan_vertex`. Returns None when an offset is out of range,
/// duplicated, under the degree floor, or copies nothing; dropping such a
/// reference always yields a strictly cheaper plan, so exhaustive callers
/// minimizing over every offset subset lose nothing.
pub fn best_plan_for_offsets<H: HeaderModel>(
    v: u64,
    neighbors: &[u64],
    offsets: &[u32],
    lists: &dyn PrevLists,
    cfg: &KernelConfig,
    header: &H,
) -> Option<Plan> {
    if neighbors.is_empty() {
        if !offsets.is_empty() {
            return None;
        }
        let bits = header.action_bits(ActionId::EMPTY).expect("empty action always encodable");
        return Some(Plan::empty(u64::from(bits)));
    }
    if !offsets.is_empty() && (neighbors.len() as u32) < cfg.min_ref_degree {
        return None;
    }
    for &o in offsets {
        if o == 0 || u64::from(o) >= v || o > cfg.window {
            return None;
        }
        if (lists.successors_of(v - u64::from(o)).len() as u32) < cfg.min_ref_degree {
            return None;
        }
    }
    let st = Streams { cfg };
    let mut best: Option<Plan> = None;
    match *offsets {
        [] => {
            consider_kinds(&st, header, v, neighbors, RefMode::None, &PartialPlan::none(), &mut best)
        }
        [o] => {
            let rp = build_ref(o, lists.successors_of(v - u64::from(o)), neighbors, cfg);
            if rp.copied.is_empty() {
                return None;
            }
            let leftover = subtract_sorted(neighbors, &rp.copied);
            let partial = PartialPlan {
                offsets_bits: u64::from(header.offset_bits(o)),
                refs: vec![rp],
                leftover,
            };
            consider_kinds(&st, header, v, neighbors, RefMode::Single, &partial, &mut best);
        }
        [a, b] => {
            if a == b || cfg.max_refs < 2 {
                return None;
            }
            let rp_a = build_ref(a, lists.successors_of(v - u64::from(a)), neighbors, cfg);
            if rp_a.copied.is_empty() {
                return None;
            }
            let after_a = subtract_sorted(neighbors, &rp_a.copied);
            let space_b = subtract_sorted(lists.successors_of(v - u64::from(b)), &rp_a.copied);
            let rp_b = build_ref(b, &space_b, &after_a, cfg);
            if rp_b.copied.is_empty() {
                return None;
            }
            let leftover = subtract_sorted(&after_a, &rp_b.copied);
            let partial = PartialPlan {
                offsets_bits: u64::from(header.offset_bits(a))
                    + u64::from(header.offset_bits(b)),
                refs: vec![rp_a, rp_b],
                leftover,
            };
            consider_kinds(&st, header, v, neighbors, RefMode::Multi, &partial, &mut best);
        }
        _ => return None,
    }
    best
}

fn offsets_key(refs: &[RefPlan]) -> (u32, u32) {
    let a = refs.first().map_or(0, |r| r.offset);
    let b = refs.get(1).map_or(0, |r| r.offset);
    (a, b)
}
