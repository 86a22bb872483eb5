// SPDX-License-Identifier: Apache-2.0

//! CS: the simplified encoder. A fixed four-level prefix tree covers the
//! four dominant actions and the empty vertex; everything else pays a 4-bit
//! escape prefix plus a flat 5-bit action id. Multi-reference is not
//! offered, which is what keeps the tree this small.
//!
//! Tree: 0 = ref + delta, 10 = no-ref + delta, 1100 = no-ref + interval(4),
//! 1101 = ref + interval(4), 1110 = empty, 1111 + id = escape.

use alloc::vec::Vec;

use crate::bits::{BitSink, BitSource, CodeError, CodeFamily};
use crate::kernel::{ActionId, HeaderModel, KernelConfig, Plan, RefMode, ResidualKind};

use super::RecordHeader;

pub struct CsHeader {
    pub family: CodeFamily,
}

fn tree_code(action: ActionId) -> Option<(u64, u32)> {
    if action == ActionId::EMPTY {
        return Some((0b1110, 4));
    }
    match action.decompose() {
        Some((RefMode::Single, ResidualKind::Delta)) => Some((0b0, 1)),
        Some((RefMode::None, ResidualKind::Delta)) => Some((0b10, 2)),
        Some((RefMode::None, ResidualKind::Interval(4))) => Some((0b1100, 4)),
        Some((RefMode::Single, ResidualKind::Interval(4))) => Some((0b1101, 4)),
        _ => None,
    }
}

impl HeaderModel for CsHeader {
    fn action_bits(&self, action: ActionId) -> Option<u32> {
        if matches!(action.decompose(), Some((RefMode::Multi, _))) {
            return None;
        }
        Some(tree_code(action).map_or(9, |(_, len)| len))
    }

    fn offset_bits(&self, offset: u32) -> u32 {
        self.family.len(u64::from(offset)).expect("offset >= 1")
    }
}

impl RecordHeader for CsHeader {
    fn write_header(&self, sink: &mut BitSink, plan: &Plan) -> Result<(), CodeError> {
        match tree_code(plan.action) {
            Some((code, len)) => sink.write_bits(code, len)?,
            None => {
                sink.write_bits(0b1111, 4)?;
                sink.write_bits(u64::from(plan.action.index()), 5)?;
            }
        }
        for rp in &plan.refs {
            self.family.encode(sink, u64::from(rp.offset))?;
        }
        Ok(())
    }

    fn read_header(&self, src: &mut BitSource<'_>) -> Result<(ActionId, Vec<u32>), CodeError> {
        let action = if !src.read_bit()? {
            ActionId::new(RefMode::Single, ResidualKind::Delta)
        } else if !src.read_bit()? {
            ActionId::new(RefMode::None, ResidualKind::Delta)
        } else {
            match (src.read_bit()?, src.read_bit()?) {
                (false, false) => ActionId::new(RefMode::None, ResidualKind::Interval(4)),
                (false, true) => ActionId::new(RefMode::Single, ResidualKind::Interval(4)),
                (true, false) => ActionId::EMPTY,
                (true, true) => {
                    let id = src.read_bits(5)? as u8;
                    let action = ActionId::from_index(id)
                        .ok_or(CodeError::Corrupt("action id out of range"))?;
                    if matches!(action.decompose(), Some((RefMode::Multi, _))) {
                        return Err(CodeError::Corrupt("multi-reference action in this stream"));
                    }
                    action
                }
            }
        };
        let refs = action.decompose().map_or(0, |(m, _)| m.ref_count());
        let mut offsets = Vec::with_capacity(refs);
        for _ in 0..refs {
            let o = self.family.decode(src)?;
            offsets.push(u32::try_from(o).map_err(|_| CodeError::Corrupt("offset too large"))?);
        }
        Ok((action, offsets))
    }
}

/// Everything but window and family is hardcoded: single reference, STOP
/// lists, tight intervals, LR split and adaptive copy always on.
pub fn wire_config(window: u32, family: CodeFamily) -> KernelConfig {
    KernelConfig { window, family, max_refs: 1, ..KernelConfig::default() }
}

pub fn encode(
    lists: &[Vec<u64>],
    cfg: &KernelConfig,
    sink: &mut BitSink,
) -> Result<Vec<u64>, CodeError> {
    let hdr = CsHeader { family: cfg.family };
    super::encode_stream(lists, cfg, &hdr, sink)
}

pub fn decode(src: &mut BitSource<'_>, n: u64, cfg: &KernelConfig) -> Result<Vec<Vec<u64>>, CodeError> {
    let hdr = CsHeader { family: cfg.family };
    super::decode_stream(src, n, cfg, &hdr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_covers_the_stated_lengths() {
        let hdr = CsHeader { family: CodeFamily::Fibonacci };
        assert_eq!(hdr.action_bits(ActionId::new(RefMode::Single, ResidualKind::Delta)), Some(1));
        assert_eq!(hdr.action_bits(ActionId::new(RefMode::None, ResidualKind::Delta)), Some(2));
        assert_eq!(hdr.action_bits(ActionId::EMPTY), Some(4));
        assert_eq!(hdr.action_bits(ActionId::new(RefMode::Single, ResidualKind::Rle(5))), Some(9));
        assert_eq!(hdr.action_bits(ActionId::new(RefMode::Multi, ResidualKind::Delta)), None);
    }

    #[test]
    fn empty_vertex_is_the_four_bit_word() {
        let hdr = CsHeader { family: CodeFamily::Fibonacci };
        let mut sink = BitSink::new();
        hdr.write_header(&mut sink, &Plan::empty(4)).unwrap();
        assert_eq!(sink.len_bits(), 4);
        assert_eq!(sink.as_bytes(), &[0b1110_0000]);
    }

    #[test]
    fn escape_actions_roundtrip() {
        let hdr = CsHeader { family: CodeFamily::Fibonacci };
        for id in 0..28u8 {
            let action = ActionId::from_index(id).unwrap();
            if matches!(action.decompose(), Some((RefMode::Multi, _))) {
                continue;
            }
            let refs = action.decompose().map_or(0, |(m, _)| m.ref_count());
            let plan = Plan {
                action,
                refs: (0..refs)
                    .map(|i| crate::kernel::RefPlan {
                        offset: 2 + i as u32,
                        mask: Vec::new(),
                        descriptor: crate::kernel::Descriptor::Blocks,
                        copied: Vec::new(),
                    })
                    .collect(),
                intervals: Vec::new(),
                residuals: Vec::new(),
                lr: false,
                cost_bits: 0,
            };
            let mut sink = BitSink::new();
            hdr.write_header(&mut sink, &plan).unwrap();
            let expected = hdr.action_bits(action).unwrap()
                + plan.refs.iter().map(|r| hdr.offset_bits(r.offset)).sum::<u32>();
            assert_eq!(sink.len_bits() as u32, expected);
            let bytes = sink.into_bytes();
            let mut src = BitSource::new(&bytes);
            let (got, offs) = hdr.read_header(&mut src).unwrap();
            assert_eq!(got, action);
            assert_eq!(offs.len(), refs);
        }
    }
}
