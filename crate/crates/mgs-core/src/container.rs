// SPDX-License-Identifier: Apache-2.0

//! The MGS file container: a 12-byte self-describing header, an optional
//! sampled-offset index section, then the codec's record bitstream. Files
//! decode with zero external configuration.
//!
//! Header layout (12 octets):
//!   0..4   magic "MGS3"
//!   4      version minor (2)
//!   5      codec id
//!   6      flags: bit0 index section present, bit1 code family
//!          (0 Fibonacci, 1 zeta-3), bits 2..7 reserved zero
//!   7      log2 of the reference window
//!   8..12  vertex count, unsigned 32-bit little-endian
//!
//! The index section (present only when flag bit0 is set and n > 0) holds
//! 64-bit little-endian entries and no stride field: for CG a directory of
//! K followed by K (absolute record-start bit, cluster size) pairs, then
//! for every codec ceil(n/k) sampled absolute bit positions. Sample i
//! anchors vertex ceil(i*n/count)+1, so consecutive anchors are never more
//! than k apart and the reader recovers the whole layout from offsets[0]
//! alone; the write-time stride never needs to be stored.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::bits::{BitSink, BitSource, CodeError, CodeFamily};
use crate::codec::{self, bg, bv, cg, cs, CodecId, RecordRead};
use crate::graph::{DirectedGraph, GraphError, Partition};
use crate::kernel::{CostModel, KernelConfig};

pub const HEADER_BYTES: usize = 12;
const HEADER_BITS: u64 = 8 * HEADER_BYTES as u64;
const MAGIC: [u8; 4] = *b"MGS3";
const VERSION_MINOR: u8 = 2;
const FLAG_INDEX: u8 = 0b01;
const FLAG_ZETA: u8 = 0b10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContainerError {
    TooShort,
    BadMagic,
    BadVersion(u8),
    UnknownCodec(u8),
    ReservedFlags(u8),
    /// Window is not a power of two (or too large for the header field).
    BadWindow(u32),
    BadStride,
    /// Containers record the code family in one bit: Fibonacci or zeta-3.
    BadFamily,
    /// The index section contradicts the header.
    Layout(&'static str),
    ClustersOnlyForCg,
    NotIndexed,
    VertexOutOfRange { v: u64, n: u64 },
    ZeroEdges,
    Code(CodeError),
    Graph(GraphError),
}

impl core::fmt::Display for ContainerError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ContainerError::TooShort => write!(f, "file shorter than the 12-byte header"),
            ContainerError::BadMagic => write!(f, "bad magic (expected MGS3)"),
            ContainerError::BadVersion(v) => write!(f, "unsupported version minor {v}"),
            ContainerError::UnknownCodec(c) => write!(f, "unknown codec id {c}"),
            ContainerError::ReservedFlags(b) => write!(f, "reserved flag bits set: {b:#04x}"),
            ContainerError::BadWindow(w) => write!(f, "window {w} is not an encodable power of two"),
            ContainerError::BadStride => write!(f, "index stride must be at least 1"),
            ContainerError::BadFamily => {
                write!(f, "containers support the Fibonacci and zeta-3 families only")
            }
            ContainerError::Layout(what) => write!(f, "inconsistent index section: {what}"),
            ContainerError::ClustersOnlyForCg => {
                write!(f, "cluster layouts apply to the cg codec only")
            }
            ContainerError::NotIndexed => write!(f, "random access needs an index-mode file"),
            ContainerError::VertexOutOfRange { v, n } => {
                write!(f, "vertex {v} outside 1..={n}")
            }
            ContainerError::ZeroEdges => write!(f, "bits per edge undefined for zero edges"),
            ContainerError::Code(e) => write!(f, "{e}"),
            ContainerError::Graph(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ContainerError {}

impl From<CodeError> for ContainerError {
    fn from(e: CodeError) -> Self {
        ContainerError::Code(e)
    }
}

impl From<GraphError> for ContainerError {
    fn from(e: GraphError) -> Self {
        ContainerError::Graph(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Header then records; sequential decode only.
    Children,
    /// Header, sampled-offset section, records; supports random access.
    Index,
}

#[derive(Debug, Clone)]
pub struct EncodeOptions {
    pub codec: CodecId,
    pub window: u32,
    pub family: CodeFamily,
    pub mode: Mode,
    /// Sampling stride k for index mode; ignored in children mode.
    pub stride: u32,
    pub cost_model: CostModel,
}

impl EncodeOptions {
    pub fn new(codec: CodecId) -> Self {
        EncodeOptions {
            codec,
            window: 64,
            family: CodeFamily::Fibonacci,
            mode: Mode::Children,
            stride: 64,
            cost_model: CostModel::Exact,
        }
    }
}

fn family_flag(family: CodeFamily) -> Result<u8, ContainerError> {
    match family {
        CodeFamily::Fibonacci => Ok(0),
        CodeFamily::Zeta(3) => Ok(FLAG_ZETA),
        _ => Err(ContainerError::BadFamily),
    }
}

fn sample_count(n: u64, stride: u64) -> u64 {
    n.div_ceil(stride)
}

/// First vertex of sample bucket `i` out of `count` over `1..=n`.
fn bucket_start(i: u64, count: u64, n: u64) -> u64 {
    ((u128::from(i) * u128::from(n)).div_ceil(u128::from(count)) + 1) as u64
}

/// Closed-form size of the index section in bits: the sampled offsets plus,
/// for CG, the cluster directory. Zero when n = 0.
pub fn index_overhead_bits(codec: CodecId, n: u64, stride: u64, clusters: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let dir = if codec == CodecId::Cg { 64 + 128 * clusters } else { 0 };
    dir + sample_count(n, stride) * 64
}

/// Bits per edge of a file: 8 * bytes / edges.
pub fn bpe(file_bytes: usize, m: u64) -> Result<f64, ContainerError> {
    if m == 0 {
        return Err(ContainerError::ZeroEdges);
    }
    Ok(8.0 * file_bytes as f64 / m as f64)
}

fn push_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn read_u64(bytes: &[u8], at: usize) -> Result<u64, ContainerError> {
    let end = at.checked_add(8).ok_or(ContainerError::TooShort)?;
    if end > bytes.len() {
        return Err(ContainerError::TooShort);
    }
    Ok(u64::from_le_bytes(bytes[at..end].try_into().expect("8 bytes")))
}

fn graph_lists(g: &DirectedGraph) -> Vec<Vec<u64>> {
    g.vertices().map(|v| g.successors(v).iter().map(|&t| u64::from(t)).collect()).collect()
}

/// Compresses a graph into a standalone file. `clusters` is the CG layout;
/// passing it with any other codec is an error, and omitting it for CG
/// encodes a single degenerate cluster.
pub fn compress(
    g: &DirectedGraph,
    opts: &EncodeOptions,
    clusters: Option<&Partition>,
) -> Result<Vec<u8>, ContainerError> {
    if !opts.window.is_power_of_two() {
        return Err(ContainerError::BadWindow(opts.window));
    }
    if opts.stride == 0 {
        return Err(ContainerError::BadStride);
    }
    if clusters.is_some() && opts.codec != CodecId::Cg {
        return Err(ContainerError::ClustersOnlyForCg);
    }
    let fam_flag = family_flag(opts.family)?;
    let n = u64::from(g.vertex_count());
    let lists = graph_lists(g);

    let mut sizes: Vec<u64> = Vec::new();
    let mut sink = BitSink::new();
    let starts = match opts.codec {
        CodecId::BvBaseline => {
            let params = BvParamsForFile::new(opts.window);
            bv::encode(&lists, &params.0, &mut sink)?.0
        }
        CodecId::Bg => {
            let mut cfg = bg::wire_config(opts.window, opts.family);
            cfg.cost_model = opts.cost_model;
            bg::encode(&lists, &cfg, &mut sink)?
        }
        CodecId::Cs => {
            let mut cfg = cs::wire_config(opts.window, opts.family);
            cfg.cost_model = opts.cost_model;
            cs::encode(&lists, &cfg, &mut sink)?
        }
        CodecId::Cg => {
            sizes = match clusters {
                Some(p) => {
                    if u64::from(p.len()) != n {
                        return Err(ContainerError::Graph(GraphError::LengthMismatch {
                            expected: n as usize,
                            got: p.len() as usize,
                        }));
                    }
                    cg::contiguous_cluster_sizes(p)?
                }
                None => vec![n],
            };
            let mut cfg = cg::wire_config(opts.window, opts.family);
            cfg.cost_model = opts.cost_model;
            if n == 0 {
                Vec::new()
            } else {
                cg::encode(&lists, &sizes, &cfg, &mut sink)?
            }
        }
    };
    if starts.len() as u64 != n {
        return Err(ContainerError::Layout("record count does not match the vertex count"));
    }

    let indexed = opts.mode == Mode::Index;
    let mut flags = fam_flag;
    if indexed {
        flags |= FLAG_INDEX;
    }
    let mut out = Vec::with_capacity(HEADER_BYTES + sink.len_bits() / 8 + 1);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION_MINOR);
    out.push(opts.codec.wire());
    out.push(flags);
    out.push(opts.window.trailing_zeros() as u8);
    out.extend_from_slice(&(n as u32).to_le_bytes());

    if indexed && n > 0 {
        let stride = u64::from(opts.stride);
        let count = sample_count(n, stride);
        let dir_bits = if opts.codec == CodecId::Cg { 64 + 128 * sizes.len() as u64 } else { 0 };
        let records_base = HEADER_BITS + dir_bits + count * 64;
        if opts.codec == CodecId::Cg {
            push_u64(&mut out, sizes.len() as u64);
            let mut first = 1u64;
            for &s in &sizes {
                push_u64(&mut out, records_base + starts[(first - 1) as usize]);
                push_u64(&mut out, s);
                first += s;
            }
        }
        for i in 0..count {
            let v = bucket_start(i, count, n);
            push_u64(&mut out, records_base + starts[(v - 1) as usize]);
        }
    }
    out.extend_from_slice(&sink.into_bytes());
    Ok(out)
}

/// BV file parameters: the window comes from the header, the rest are
/// format constants (chain bound 3, MIL 4, zeta-3 residuals).
struct BvParamsForFile(bv::BvParams);

impl BvParamsForFile {
    fn new(window: u32) -> Self {
        BvParamsForFile(bv::BvParams { window, ..bv::BvParams::default() })
    }
}

/// A parsed container plus the memo state for random access.
pub struct GraphReader<'a> {
    bytes: &'a [u8],
    codec: CodecId,
    window: u32,
    family: CodeFamily,
    n: u64,
    indexed: bool,
    /// Bit position where the records segment starts (byte-aligned).
    records_base: u64,
    /// Absolute bit positions of the sample anchors.
    samples: Vec<u64>,
    /// CG only: (absolute record-start bit, size) per cluster.
    dir: Vec<(u64, u64)>,
    /// CG only: first global vertex of each cluster.
    cluster_first: Vec<u64>,
    /// Known absolute record positions, seeded from the anchors.
    pos_cache: BTreeMap<u64, u64>,
    /// Final successor lists (global ids) of decoded vertices.
    memo: BTreeMap<u64, Vec<u64>>,
    /// CG only: per-cluster local intra lists for reference resolution.
    cg_local: BTreeMap<usize, BTreeMap<u64, Vec<u64>>>,
    decodes: u64,
}

impl<'a> GraphReader<'a> {
    pub fn open(bytes: &'a [u8]) -> Result<Self, ContainerError> {
        if bytes.len() < HEADER_BYTES {
            return Err(ContainerError::TooShort);
        }
        if bytes[0..4] != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        if bytes[4] != VERSION_MINOR {
            return Err(ContainerError::BadVersion(bytes[4]));
        }
        let codec = CodecId::from_wire(bytes[5]).ok_or(ContainerError::UnknownCodec(bytes[5]))?;
        let flags = bytes[6];
        if flags & !(FLAG_INDEX | FLAG_ZETA) != 0 {
            return Err(ContainerError::ReservedFlags(flags));
        }
        let indexed = flags & FLAG_INDEX != 0;
        let family = if flags & FLAG_ZETA != 0 { CodeFamily::Zeta(3) } else { CodeFamily::Fibonacci };
        if bytes[7] > 31 {
            return Err(ContainerError::BadWindow(u32::MAX));
        }
        let window = 1u32 << bytes[7];
        let n = u64::from(u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")));

        let mut reader = GraphReader {
            bytes,
            codec,
            window,
            family,
            n,
            indexed,
            records_base: HEADER_BITS,
            samples: Vec::new(),
            dir: Vec::new(),
            cluster_first: Vec::new(),
            pos_cache: BTreeMap::new(),
            memo: BTreeMap::new(),
            cg_local: BTreeMap::new(),
            decodes: 0,
        };
        if indexed && n > 0 {
            reader.parse_index()?;
        }
        Ok(reader)
    }

    fn parse_index(&mut self) -> Result<(), ContainerError> {
        let n = self.n;
        let mut at = HEADER_BYTES;
        let mut dir_bits = 0u64;
        let mut preamble_bits = 0u64;
        if self.codec == CodecId::Cg {
            let k = read_u64(self.bytes, at)?;
            at += 8;
            if k == 0 || k > n {
                return Err(ContainerError::Layout("cluster count outside 1..=n"));
            }
            preamble_bits = u64::from(self.family.len(k)?);
            let mut total = 0u64;
            for _ in 0..k {
                let start = read_u64(self.bytes, at)?;
                let size = read_u64(self.bytes, at + 8)?;
                at += 16;
                if size == 0 {
                    return Err(ContainerError::Layout("empty cluster in directory"));
                }
                if let Some(&(prev, _)) = self.dir.last() {
                    if start <= prev {
                        return Err(ContainerError::Layout("cluster starts not increasing"));
                    }
                }
                self.cluster_first.push(total + 1);
                total = total
                    .checked_add(size)
                    .ok_or(ContainerError::Layout("cluster sizes overflow"))?;
                preamble_bits += u64::from(self.family.len(size)?);
                self.dir.push((start, size));
            }
            if total != n {
                return Err(ContainerError::Layout("cluster sizes do not sum to n"));
            }
            dir_bits = 64 + 128 * k;
        }
        // offsets[0] anchors vertex 1; everything else derives from it.
        let first_sample = read_u64(self.bytes, at)?;
        let segment_base = first_sample
            .checked_sub(preamble_bits)
            .ok_or(ContainerError::Layout("first offset before the records segment"))?;
        let table_bits = segment_base
            .checked_sub(HEADER_BITS + dir_bits)
            .ok_or(ContainerError::Layout("records segment overlaps the header"))?;
        if table_bits % 64 != 0 {
            return Err(ContainerError::Layout("offset table is not whole 64-bit entries"));
        }
        let count = table_bits / 64;
        if count == 0 || count > n {
            return Err(ContainerError::Layout("sample count outside 1..=n"));
        }
        if segment_base % 8 != 0 || segment_base / 8 > self.bytes.len() as u64 {
            return Err(ContainerError::Layout("records segment out of bounds"));
        }
        for i in 0..count {
            let s = read_u64(self.bytes, at + 8 * i as usize)?;
            if let Some(&prev) = self.samples.last() {
                if s <= prev {
                    return Err(ContainerError::Layout("sampled offsets not increasing"));
                }
            }
            self.samples.push(s);
        }
        if self.codec == CodecId::Cg && self.dir[0].0 != self.samples[0] {
            return Err(ContainerError::Layout("directory and offsets disagree on record 1"));
        }
        self.records_base = segment_base;
        for (i, &s) in self.samples.iter().enumerate() {
            self.pos_cache.insert(bucket_start(i as u64, count, n), s);
        }
        for (c, &(start, _)) in self.dir.iter().enumerate() {
            self.pos_cache.insert(self.cluster_first[c], start);
        }
        Ok(())
    }

    pub fn codec(&self) -> CodecId {
        self.codec
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    pub fn vertex_count(&self) -> u64 {
        self.n
    }

    pub fn is_indexed(&self) -> bool {
        self.indexed
    }

    /// Number of sampled index entries (0 for children mode).
    pub fn sample_entries(&self) -> u64 {
        self.samples.len() as u64
    }

    /// CG cluster directory sizes, when present.
    pub fn cluster_sizes(&self) -> Vec<u64> {
        self.dir.iter().map(|&(_, s)| s).collect()
    }

    /// Records decoded so far by random access (memo hits excluded).
    pub fn decode_count(&self) -> u64 {
        self.decodes
    }

    fn kernel_config(&self) -> KernelConfig {
        match self.codec {
            CodecId::Bg => bg::wire_config(self.window, self.family),
            CodecId::Cs => cs::wire_config(self.window, self.family),
            CodecId::Cg => cg::wire_config(self.window, self.family),
            CodecId::BvBaseline => unreachable!("bv has its own parameter set"),
        }
    }

    fn bv_params(&self) -> bv::BvParams {
        BvParamsForFile::new(self.window).0
    }

    fn records_slice(&self) -> Result<&'a [u8], ContainerError> {
        let at = (self.records_base / 8) as usize;
        if at > self.bytes.len() {
            return Err(ContainerError::TooShort);
        }
        Ok(&self.bytes[at..])
    }

    /// Full sequential decode; works in both modes.
    pub fn decode_all(&self) -> Result<Vec<Vec<u64>>, ContainerError> {
        let slice = self.records_slice()?;
        let mut src = BitSource::new(slice);
        let lists = match self.codec {
            CodecId::BvBaseline => bv::decode(&mut src, self.n, &self.bv_params())?,
            CodecId::Bg => bg::decode(&mut src, self.n, &self.kernel_config())?,
            CodecId::Cs => cs::decode(&mut src, self.n, &self.kernel_config())?,
            CodecId::Cg => cg::decode(&mut src, self.n, &self.kernel_config())?,
        };
        Ok(lists)
    }

    fn cluster_of(&self, v: u64) -> usize {
        self.cluster_first.partition_point(|&f| f <= v) - 1
    }

    /// Random access to one successor list. Index mode only; decoded
    /// records are memoized across queries.
    pub fn successors(&mut self, v: u64) -> Result<Vec<u64>, ContainerError> {
        if !self.indexed {
            return Err(ContainerError::NotIndexed);
        }
        if v == 0 || v > self.n {
            return Err(ContainerError::VertexOutOfRange { v, n: self.n });
        }
        self.resolve(v)?;
        Ok(self.memo.get(&v).expect("resolved").clone())
    }

    fn resolve(&mut self, target: u64) -> Result<(), ContainerError> {
        let bytes: &'a [u8] = self.bytes;
        let is_cg = self.codec == CodecId::Cg && !self.dir.is_empty();
        let kcfg = if self.codec == CodecId::BvBaseline { None } else { Some(self.kernel_config()) };
        let bvp = if self.codec == CodecId::BvBaseline { Some(self.bv_params()) } else { None };

        let mut stack: Vec<u64> = vec![target];
        while let Some(&t) = stack.last() {
            if self.memo.contains_key(&t) {
                stack.pop();
                continue;
            }
            let (&anchor_v, &anchor_bits) = self
                .pos_cache
                .range(..=t)
                .next_back()
                .ok_or(ContainerError::Layout("no anchor at or before the target"))?;
            let mut src = BitSource::new(bytes);
            src.seek(anchor_bits as usize);
            let mut w = anchor_v;
            let mut blocked: Option<Vec<u64>> = None;
            while w <= t {
                self.pos_cache.insert(w, src.position() as u64);
                let read = if let Some(bvp) = &bvp {
                    bv::read_one(&mut src, w, bvp, &self.memo, self.n)?
                } else if is_cg {
                    let c = self.cluster_of(w);
                    let (first, size) = (self.cluster_first[c], self.dir[c].1);
                    let local = w - first + 1;
                    let hdr = cg::CgHeader { offset_width: cg::offset_width(self.window) };
                    let lmemo = self.cg_local.entry(c).or_default();
                    match codec::read_one(&mut src, local, kcfg.as_ref().expect("kernel"), &hdr, lmemo, size)? {
                        RecordRead::Done(locals) => {
                            let extra = if self.dir.len() > 1 {
                                cg::read_extra(&mut src, self.family, w, self.n, (first, size))?
                            } else {
                                Vec::new()
                            };
                            let merged = cg::merge_global(&locals, first, &extra);
                            self.cg_local.entry(c).or_default().insert(local, locals);
                            RecordRead::Done(merged)
                        }
                        RecordRead::Missing(ldeps) => {
                            RecordRead::Missing(ldeps.into_iter().map(|l| l + first - 1).collect())
                        }
                    }
                } else {
                    let cfg = kcfg.as_ref().expect("kernel");
                    match self.codec {
                        CodecId::Bg => {
                            let hdr = bg::BgHeader::new(bg::BgHeaderMode::Vlc, cfg.family);
                            codec::read_one(&mut src, w, cfg, &hdr, &self.memo, self.n)?
                        }
                        CodecId::Cs => {
                            let hdr = cs::CsHeader { family: cfg.family };
                            codec::read_one(&mut src, w, cfg, &hdr, &self.memo, self.n)?
                        }
                        _ => unreachable!("bv and cg handled above"),
                    }
                };
                match read {
                    RecordRead::Done(list) => {
                        self.decodes += 1;
                        self.memo.insert(w, list);
                        w += 1;
                    }
                    RecordRead::Missing(deps) => {
                        blocked = Some(deps);
                        break;
                    }
                }
            }
            if let Some(deps) = blocked {
                for d in deps {
                    if !self.memo.contains_key(&d) {
                        stack.push(d);
                    }
                }
            }
        }
        Ok(())
    }
}

/// One-call decode of a container file back to a graph.
pub fn decompress(bytes: &[u8]) -> Result<DirectedGraph, ContainerError> {
    let reader = GraphReader::open(bytes)?;
    let lists = reader.decode_all()?;
    let n = reader.vertex_count() as u32;
    let mut small: Vec<Vec<u32>> = Vec::with_capacity(lists.len());
    for list in lists {
        let mut l = Vec::with_capacity(list.len());
        for t in list {
            l.push(
                u32::try_from(t)
                    .map_err(|_| ContainerError::Code(CodeError::Corrupt("target overflow")))?,
            );
        }
        small.push(l);
    }
    Ok(DirectedGraph::from_lists(n, small)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn web_like(n: u32, seed: u64) -> DirectedGraph {
        // Local lists with heavy overlap between nearby vertices.
        let mut x = seed | 1;
        let mut step = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x
        };
        let mut lists: Vec<Vec<u32>> = Vec::new();
        for v in 1..=n {
            let d = (step() % 9) as u32;
            let mut l: Vec<u32> = Vec::new();
            for _ in 0..d {
                let span = 40.min(n - 1).max(1);
                let around = v.saturating_sub(span / 2).max(1);
                let t = around + (step() % u64::from(span)) as u32;
                l.push(t.min(n).max(1));
            }
            l.sort_unstable();
            l.dedup();
            lists.push(l);
        }
        DirectedGraph::from_lists(n, lists).unwrap()
    }

    fn all_codecs() -> [CodecId; 4] {
        [CodecId::BvBaseline, CodecId::Bg, CodecId::Cs, CodecId::Cg]
    }

    #[test]
    fn children_file_is_header_plus_padded_records() {
        let g = web_like(50, 7);
        for codec in all_codecs() {
            let opts = EncodeOptions { window: 8, ..EncodeOptions::new(codec) };
            let file = compress(&g, &opts, None).unwrap();
            assert_eq!(&file[0..4], b"MGS3");
            assert_eq!(file[4], 2);
            assert_eq!(file[5], codec.wire());
            assert_eq!(file[6], 0);
            assert_eq!(file[7], 3);
            assert_eq!(u32::from_le_bytes(file[8..12].try_into().unwrap()), 50);
            let back = decompress(&file).unwrap();
            assert_eq!(back.vertex_count(), 50);
            for v in 1..=50 {
                assert_eq!(back.successors(v), g.successors(v), "codec {codec} vertex {v}");
            }
        }
    }

    #[test]
    fn header_only_file_is_an_empty_graph() {
        let g = DirectedGraph::from_lists(0, Vec::new()).unwrap();
        for mode in [Mode::Children, Mode::Index] {
            for codec in all_codecs() {
                let opts = EncodeOptions { mode, ..EncodeOptions::new(codec) };
                let file = compress(&g, &opts, None).unwrap();
                assert_eq!(file.len(), HEADER_BYTES);
                let back = decompress(&file).unwrap();
                assert_eq!(back.vertex_count(), 0);
            }
        }
    }

    #[test]
    fn index_and_children_records_are_byte_identical() {
        let g = web_like(120, 9);
        for codec in all_codecs() {
            let children = compress(&g, &EncodeOptions::new(codec), None).unwrap();
            let opts = EncodeOptions { mode: Mode::Index, stride: 16, ..EncodeOptions::new(codec) };
            let indexed = compress(&g, &opts, None).unwrap();
            let overhead = index_overhead_bits(codec, 120, 16, 1);
            assert_eq!(overhead % 8, 0);
            assert_eq!(indexed.len(), children.len() + (overhead / 8) as usize);
            assert_eq!(indexed[HEADER_BYTES + (overhead / 8) as usize..], children[HEADER_BYTES..]);
            assert_eq!(decompress(&indexed).unwrap(), decompress(&children).unwrap());
        }
    }

    #[test]
    fn random_access_agrees_with_sequential_decode() {
        let g = web_like(300, 21);
        for codec in all_codecs() {
            let opts = EncodeOptions { mode: Mode::Index, stride: 7, window: 8, ..EncodeOptions::new(codec) };
            let file = compress(&g, &opts, None).unwrap();
            let mut reader = GraphReader::open(&file).unwrap();
            let sequential = reader.decode_all().unwrap();
            // Scrambled query order.
            let mut order: Vec<u64> = (1..=300).collect();
            let mut x = 0xabcdefu64;
            for i in (1..order.len()).rev() {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                order.swap(i, (x % (i as u64 + 1)) as usize);
            }
            for &v in &order {
                assert_eq!(
                    reader.successors(v).unwrap(),
                    sequential[(v - 1) as usize],
                    "codec {codec} vertex {v}"
                );
            }
        }
    }

    #[test]
    fn clustered_cg_random_access_merges_side_lists() {
        let g = web_like(200, 33);
        let labels: Vec<u32> = (0..200).map(|i| i / 50).collect();
        let part = Partition::from_labels(&labels);
        let opts = EncodeOptions {
            mode: Mode::Index,
            stride: 16,
            window: 8,
            ..EncodeOptions::new(CodecId::Cg)
        };
        let file = compress(&g, &opts, Some(&part)).unwrap();
        let mut reader = GraphReader::open(&file).unwrap();
        assert_eq!(reader.cluster_sizes(), vec![50, 50, 50, 50]);
        let sequential = reader.decode_all().unwrap();
        for v in (1..=200).rev() {
            assert_eq!(reader.successors(v).unwrap(), sequential[(v - 1) as usize]);
        }
        let children = compress(
            &g,
            &EncodeOptions { mode: Mode::Children, ..opts.clone() },
            Some(&part),
        )
        .unwrap();
        let overhead = index_overhead_bits(CodecId::Cg, 200, 16, 4);
        assert_eq!(file.len(), children.len() + (overhead / 8) as usize);
    }

    #[test]
    fn sample_anchored_queries_decode_one_record() {
        // Self-singleton lists share nothing, so no references exist and
        // the decode counter measures pure scan length.
        let n = 640u32;
        let lists: Vec<Vec<u32>> = (1..=n).map(|v| vec![v]).collect();
        let g = DirectedGraph::from_lists(n, lists).unwrap();
        let opts = EncodeOptions { mode: Mode::Index, stride: 64, ..EncodeOptions::new(CodecId::Bg) };
        let file = compress(&g, &opts, None).unwrap();

        let mut reader = GraphReader::open(&file).unwrap();
        assert_eq!(reader.sample_entries(), 10);
        assert_eq!(reader.successors(65).unwrap(), vec![65]);
        assert_eq!(reader.decode_count(), 1, "vertex 65 sits exactly on a sample");

        let mut reader = GraphReader::open(&file).unwrap();
        assert_eq!(reader.successors(128).unwrap(), vec![128]);
        assert_eq!(reader.decode_count(), 64, "sample + 63 walks the whole bucket");
    }

    #[test]
    fn truncation_errors_instead_of_panicking() {
        let g = web_like(60, 5);
        let file = compress(&g, &EncodeOptions::new(CodecId::Bg), None).unwrap();
        for cut in [0, 5, 11, 12, 13, file.len() / 2, file.len() - 1] {
            let short = &file[..cut];
            let outcome = GraphReader::open(short).and_then(|r| r.decode_all());
            assert!(outcome.is_err(), "cut at {cut} must error");
        }
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let g = web_like(20, 3);
        let file = compress(&g, &EncodeOptions::new(CodecId::Cs), None).unwrap();
        let mut bad = file.clone();
        bad[0] = b'X';
        assert!(matches!(GraphReader::open(&bad), Err(ContainerError::BadMagic)));
        let mut bad = file.clone();
        bad[4] = 9;
        assert!(matches!(GraphReader::open(&bad), Err(ContainerError::BadVersion(9))));
        let mut bad = file.clone();
        bad[5] = 77;
        assert!(matches!(GraphReader::open(&bad), Err(ContainerError::UnknownCodec(77))));
        let mut bad = file.clone();
        bad[6] |= 0b0100;
        assert!(matches!(GraphReader::open(&bad), Err(ContainerError::ReservedFlags(_))));
    }

    #[test]
    fn children_mode_rejects_random_access() {
        let g = web_like(20, 3);
        let file = compress(&g, &EncodeOptions::new(CodecId::Bg), None).unwrap();
        let mut reader = GraphReader::open(&file).unwrap();
        assert!(matches!(reader.successors(1), Err(ContainerError::NotIndexed)));
        let opts = EncodeOptions { mode: Mode::Index, ..EncodeOptions::new(CodecId::Bg) };
        let file = compress(&g, &opts, None).unwrap();
        let mut reader = GraphReader::open(&file).unwrap();
        assert!(matches!(
            reader.successors(21),
            Err(ContainerError::VertexOutOfRange { v: 21, n: 20 })
        ));
    }

    #[test]
    fn bpe_matches_hand_arithmetic() {
        assert_eq!(bpe(12, 96).unwrap(), 1.0);
        assert!(matches!(bpe(12, 0), Err(ContainerError::ZeroEdges)));
    }

    #[test]
    fn zeta_family_files_roundtrip() {
        let g = web_like(80, 11);
        for codec in [CodecId::Bg, CodecId::Cs, CodecId::Cg] {
            let opts = EncodeOptions {
                family: CodeFamily::Zeta(3),
                mode: Mode::Index,
                stride: 9,
                ..EncodeOptions::new(codec)
            };
            let file = compress(&g, &opts, None).unwrap();
            assert_eq!(file[6] & FLAG_ZETA, FLAG_ZETA);
            let mut reader = GraphReader::open(&file).unwrap();
            let sequential = reader.decode_all().unwrap();
            for v in 1..=80u64 {
                assert_eq!(reader.successors(v).unwrap(), sequential[(v - 1) as usize]);
            }
        }
        let opts = EncodeOptions { family: CodeFamily::Gamma, ..EncodeOptions::new(CodecId::Bg) };
        assert!(matches!(compress(&g, &opts, None), Err(ContainerError::BadFamily)));
    }

    #[test]
    fn window_must_be_a_power_of_two() {
        let g = web_like(20, 3);
        let opts = EncodeOptions { window: 7, ..EncodeOptions::new(CodecId::BvBaseline) };
        assert!(matches!(compress(&g, &opts, None), Err(ContainerError::BadWindow(7))));
    }
}
