// SPDX-License-Identifier: Apache-2.0

//! BG: the full-featured kernel encoder with a merged variable-length
//! header. One static prefix code covers all 28 actions, assigning the
//! shortest words to the actions that dominate locality-ordered graphs:
//! single-reference stop-delta gets 1 bit, plain stop-delta 2, the empty
//! vertex 3. Reference offsets follow the header as ordinary family codes.

use alloc::vec::Vec;

use crate::bits::{BitSink, BitSource, CodeError, CodeFamily};
use crate::kernel::{ActionId, HeaderModel, KernelConfig, Plan, RefMode, ResidualKind};

use super::RecordHeader;

/// Header form: the merged VLC table, or a flat 5-bit action id used as the
/// pre-VLC baseline in feature ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgHeaderMode {
    Vlc,
    Flat5,
}

/// Frozen code lengths in canonical rank order. The table is prefix-free
/// (Kraft sum 2043/2048) with lengths 1..=11.
const VLC_RANKING: [(RefMode, Option<ResidualKind>, u32); 28] = [
    (RefMode::Single, Some(ResidualKind::Delta), 1),
    (RefMode::None, Some(ResidualKind::Delta), 2),
    (RefMode::None, None, 3), // empty action
    (RefMode::None, Some(ResidualKind::Interval(4)), 5),
    (RefMode::Single, Some(ResidualKind::Interval(4)), 5),
    (RefMode::Multi, Some(ResidualKind::Delta), 6),
    (RefMode::None, Some(ResidualKind::Interval(2)), 7),
    (RefMode::Single, Some(ResidualKind::Interval(2)), 7),
    (RefMode::None, Some(ResidualKind::Interval(3)), 8),
    (RefMode::Single, Some(ResidualKind::Interval(3)), 8),
    (RefMode::None, Some(ResidualKind::Interval(5)), 8),
    (RefMode::Single, Some(ResidualKind::Interval(5)), 9),
    (RefMode::None, Some(ResidualKind::Rle(2)), 9),
    (RefMode::Single, Some(ResidualKind::Rle(2)), 9),
    (RefMode::None, Some(ResidualKind::Rle(3)), 9),
    (RefMode::Single, Some(ResidualKind::Rle(3)), 10),
    (RefMode::None, Some(ResidualKind::Rle(4)), 10),
    (RefMode::Single, Some(ResidualKind::Rle(4)), 10),
    (RefMode::None, Some(ResidualKind::Rle(5)), 10),
    (RefMode::Single, Some(ResidualKind::Rle(5)), 10),
    (RefMode::Multi, Some(ResidualKind::Interval(2)), 10),
    (RefMode::Multi, Some(ResidualKind::Interval(3)), 11),
    (RefMode::Multi, Some(ResidualKind::Interval(4)), 11),
    (RefMode::Multi, Some(ResidualKind::Interval(5)), 11),
    (RefMode::Multi, Some(ResidualKind::Rle(2)), 11),
    (RefMode::Multi, Some(ResidualKind::Rle(3)), 11),
    (RefMode::Multi, Some(ResidualKind::Rle(4)), 11),
    (RefMode::Multi, Some(ResidualKind::Rle(5)), 11),
];

fn ranking_action(mode: RefMode, kind: Option<ResidualKind>) -> ActionId {
    match kind {
        Some(k) => ActionId::new(mode, k),
        None => ActionId::EMPTY,
    }
}

/// The static action prefix code plus the offset code family.
pub struct BgHeader {
    pub mode: BgHeaderMode,
    pub family: CodeFamily,
    /// Codeword and length per action id, canonically assigned.
    codes: [(u64, u32); 28],
}

impl BgHeader {
    pub fn new(mode: BgHeaderMode, family: CodeFamily) -> Self {
        let mut codes = [(0u64, 0u32); 28];
        let mut next = 0u64;
        let mut prev_len = VLC_RANKING[0].2;
        for &(m, k, len) in VLC_RANKING.iter() {
            debug_assert!(len >= prev_len, "ranking must be sorted by length");
            next <<= len - prev_len;
            prev_len = len;
            codes[ranking_action(m, k).index() as usize] = (next, len);
            next += 1;
        }
        BgHeader { mode, family, codes }
    }

    pub fn action_code(&self, action: ActionId) -> (u64, u32) {
        self.codes[action.index() as usize]
    }
}

impl HeaderModel for BgHeader {
    fn action_bits(&self, action: ActionId) -> Option<u32> {
        match self.mode {
            BgHeaderMode::Vlc => Some(self.codes[action.index() as usize].1),
            BgHeaderMode::Flat5 => Some(5),
        }
    }

    fn offset_bits(&self, offset: u32) -> u32 {
        self.family.len(u64::from(offset)).expect("offset >= 1")
    }
}

impl RecordHeader for BgHeader {
    fn write_header(&self, sink: &mut BitSink, plan: &Plan) -> Result<(), CodeError> {
        match self.mode {
            BgHeaderMode::Vlc => {
                let (code, len) = self.codes[plan.action.index() as usize];
                sink.write_bits(code, len)?;
            }
            BgHeaderMode::Flat5 => {
                sink.write_bits(u64::from(plan.action.index()), 5)?;
            }
        }
        for rp in &plan.refs {
            self.family.encode(sink, u64::from(rp.offset))?;
        }
        Ok(())
    }

    fn read_header(&self, src: &mut BitSource<'_>) -> Result<(ActionId, Vec<u32>), CodeError> {
        let action = match self.mode {
            BgHeaderMode::Vlc => {
                let mut word = 0u64;
                let mut len = 0u32;
                'scan: loop {
                    word = word << 1 | u64::from(src.read_bit()?);
                    len += 1;
                    if len > 11 {
                        return Err(CodeError::Corrupt("unknown action codeword"));
                    }
                    for (id, &(c, l)) in self.codes.iter().enumerate() {
                        if l == len && c == word {
                            break 'scan ActionId::from_index(id as u8).unwrap();
                        }
                    }
                }
            }
            BgHeaderMode::Flat5 => {
                let id = src.read_bits(5)? as u8;
                ActionId::from_index(id).ok_or(CodeError::Corrupt("action id out of range"))?
            }
        };
        let refs = match action.decompose() {
            Some((mode, _)) => mode.ref_count(),
            None => 0,
        };
        let mut offsets = Vec::with_capacity(refs);
        for _ in 0..refs {
            let o = self.family.decode(src)?;
            offsets.push(u32::try_from(o).map_err(|_| CodeError::Corrupt("offset too large"))?);
        }
        Ok((action, offsets))
    }
}

/// Kernel configuration BG commits to on the wire; everything the decoder
/// must agree on is fixed, the rest (window, family, search effort) is
/// caller-chosen.
pub fn wire_config(window: u32, family: CodeFamily) -> KernelConfig {
    KernelConfig { window, family, ..KernelConfig::default() }
}

pub fn encode(
    lists: &[Vec<u64>],
    cfg: &KernelConfig,
    sink: &mut BitSink,
) -> Result<Vec<u64>, CodeError> {
    let hdr = BgHeader::new(BgHeaderMode::Vlc, cfg.family);
    super::encode_stream(lists, cfg, &hdr, sink)
}

pub fn decode(src: &mut BitSource<'_>, n: u64, cfg: &KernelConfig) -> Result<Vec<Vec<u64>>, CodeError> {
    let hdr = BgHeader::new(BgHeaderMode::Vlc, cfg.family);
    super::decode_stream(src, n, cfg, &hdr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vlc_table_is_prefix_free_and_within_kraft() {
        let hdr = BgHeader::new(BgHeaderMode::Vlc, CodeFamily::Fibonacci);
        let mut sum = 0u64; // Kraft numerators over 2^11
        for id in 0..28 {
            let (code, len) = hdr.codes[id];
            assert!((1..=11).contains(&len));
            sum += 1 << (11 - len);
            for other in 0..28 {
                if other == id {
                    continue;
                }
                let (c2, l2) = hdr.codes[other];
                let (short, long, sc, lc) =
                    if len <= l2 { (len, l2, code, c2) } else { (l2, len, c2, code) };
                assert_ne!(sc, lc >> (long - short), "codeword {id} prefixes {other}");
            }
        }
        assert_eq!(sum, 2043);
    }

    #[test]
    fn header_lengths_follow_action_frequency_design() {
        let hdr = BgHeader::new(BgHeaderMode::Vlc, CodeFamily::Fibonacci);
        let bits = |m, k| hdr.action_bits(ActionId::new(m, k)).unwrap();
        assert_eq!(bits(RefMode::Single, ResidualKind::Delta), 1);
        assert_eq!(bits(RefMode::None, ResidualKind::Delta), 2);
        assert_eq!(hdr.action_bits(ActionId::EMPTY).unwrap(), 3);
        assert_eq!(bits(RefMode::Multi, ResidualKind::Rle(5)), 11);
    }

    #[test]
    fn header_roundtrips_every_action() {
        let hdr = BgHeader::new(BgHeaderMode::Vlc, CodeFamily::Fibonacci);
        for id in 0..28 {
            let action = ActionId::from_index(id).unwrap();
            let refs = action.decompose().map_or(0, |(m, _)| m.ref_count());
            let plan = Plan {
                action,
                refs: (0..refs)
                    .map(|i| crate::kernel::RefPlan {
                        offset: 3 + i as u32,
                        mask: alloc::vec::Vec::new(),
                        descriptor: crate::kernel::Descriptor::Blocks,
                        copied: alloc::vec::Vec::new(),
                    })
                    .collect(),
                intervals: alloc::vec::Vec::new(),
                residuals: alloc::vec::Vec::new(),
                lr: false,
                cost_bits: 0,
            };
            let mut sink = BitSink::new();
            hdr.write_header(&mut sink, &plan).unwrap();
            let bytes = sink.into_bytes();
            let mut src = BitSource::new(&bytes);
            let (got, offsets) = hdr.read_header(&mut src).unwrap();
            assert_eq!(got, action);
            assert_eq!(offsets.len(), refs);
        }
    }
}
