// SPDX-License-Identifier: Apache-2.0

//! Planner optimality and payload serialization properties.
//!
//! The exhaustive checks force every legal reference choice through
//! `best_plan_for_offsets` and require `plan_vertex` to return the same
//! minimum under the same tie-break key. The serialization checks pin the
//! planner's analytic cost to the bits a record actually occupies and prove
//! the payload decodes back to the original list.

use mgs_core::bits::{BitSink, BitSource, CodeFamily};
use mgs_core::codec::bg::{BgHeader, BgHeaderMode};
use mgs_core::codec::cg::CgHeader;
use mgs_core::codec::cs::CsHeader;
use mgs_core::codec::RecordHeader;
use mgs_core::kernel::{
    best_plan_for_offsets, detect_intervals, lr_reconstruct, lr_split, plan_vertex, read_payload,
    rle_pairs, write_payload, CostModel, HeaderModel, KernelConfig, Plan,
};
use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeSet;

/// Web-like successor lists: vertex i + 1 owns `lists[i]`. Lists mix local
/// links with partial copies of the predecessor's list so that single and
/// paired references, intervals and empty records all occur.
fn web_lists(n: usize, seed: u64) -> Vec<Vec<u64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut lists: Vec<Vec<u64>> = Vec::with_capacity(n);
    for v in 1..=n as u64 {
        let mut set = BTreeSet::new();
        if v > 1 && rng.next_u64() % 4 != 0 {
            let back = 1 + rng.next_u64() % 4.min(v - 1);
            for &x in &lists[(v - 1 - back) as usize] {
                if rng.next_u64() % 3 != 0 {
                    set.insert(x);
                }
            }
        }
        let fresh = rng.next_u64() % 7;
        for _ in 0..fresh {
            let span = 20i64;
            let d = (rng.next_u64() % (2 * span as u64 + 1)) as i64 - span;
            let x = (v as i64 + d).clamp(1, n as i64) as u64;
            set.insert(x);
        }
        if rng.next_u64() % 5 == 0 {
            // Occasional consecutive run to exercise interval kinds.
            let start = 1 + rng.next_u64() % (n as u64 - 6);
            for x in start..start + 4 + rng.next_u64() % 3 {
                set.insert(x);
            }
        }
        if rng.next_u64() % 9 == 0 {
            set.clear();
        }
        lists.push(set.into_iter().collect());
    }
    lists
}

fn full_search_cfg(window: u32, min_ref_degree: u32) -> KernelConfig {
    KernelConfig {
        window,
        shortlist: window,
        multi_top_k: window,
        max_refs: 2,
        min_ref_degree,
        lr_split: true,
        tight_intervals: true,
        stop_lists: true,
        adaptive_copy: true,
        cost_model: CostModel::Exact,
        family: CodeFamily::Fibonacci,
    }
}

/// The planner's tie-break key: cost, then action index, then offsets.
fn key(p: &Plan) -> (u64, u8, u32, u32) {
    let a = p.refs.first().map_or(0, |r| r.offset);
    let b = p.refs.get(1).map_or(0, |r| r.offset);
    (p.cost_bits, p.action.index(), a, b)
}

/// Minimum over every reference choice: no references, each single offset,
/// and each ordered offset pair. Offsets that `best_plan_for_offsets`
/// rejects (degree floor, no copied values) can never beat a plan without
/// them, so skipping them leaves the minimum intact.
fn brute_force_plan<H: HeaderModel>(
    v: u64,
    neighbors: &[u64],
    lists: &Vec<Vec<u64>>,
    cfg: &KernelConfig,
    header: &H,
) -> Plan {
    let reach = u64::from(cfg.window).min(v - 1) as u32;
    let mut best =
        best_plan_for_offsets(v, neighbors, &[], lists, cfg, header).expect("no-reference plan");
    let mut consider = |p: Option<Plan>| {
        if let Some(p) = p {
            if key(&p) < key(&best) {
                best = p;
            }
        }
    };
    for a in 1..=reach {
        consider(best_plan_for_offsets(v, neighbors, &[a], lists, cfg, header));
    }
    if cfg.max_refs >= 2 {
        for a in 1..=reach {
            for b in 1..=reach {
                if a != b {
                    consider(best_plan_for_offsets(v, neighbors, &[a, b], lists, cfg, header));
                }
            }
        }
    }
    best
}

fn assert_planner_is_exhaustive<H: HeaderModel>(
    lists: &Vec<Vec<u64>>,
    cfg: &KernelConfig,
    header: &H,
    label: &str,
) {
    for (i, neighbors) in lists.iter().enumerate() {
        let v = i as u64 + 1;
        let chosen = plan_vertex(v, neighbors, lists, cfg, header);
        let forced = brute_force_plan(v, neighbors, lists, cfg, header);
        assert_eq!(
            key(&chosen),
            key(&forced),
            "{label}: vertex {v} planner {:?} vs exhaustive {:?}",
            (chosen.action, &chosen.refs.iter().map(|r| r.offset).collect::<Vec<_>>()),
            (forced.action, &forced.refs.iter().map(|r| r.offset).collect::<Vec<_>>()),
        );
    }
}

#[test]
fn planner_matches_exhaustive_reference_search() {
    let lists = web_lists(140, 7);
    let cfg = full_search_cfg(16, 1);
    assert_planner_is_exhaustive(&lists, &cfg, &BgHeader::new(BgHeaderMode::Vlc, cfg.family), "bg-vlc");
    assert_planner_is_exhaustive(
        &lists,
        &cfg,
        &BgHeader::new(BgHeaderMode::Flat5, cfg.family),
        "bg-flat5",
    );
    assert_planner_is_exhaustive(&lists, &cfg, &CsHeader { family: cfg.family }, "cs");
    assert_planner_is_exhaustive(&lists, &cfg, &CgHeader { offset_width: 4 }, "cg");
}

#[test]
fn planner_matches_exhaustive_search_under_degree_floor() {
    let lists = web_lists(120, 21);
    let cfg = full_search_cfg(8, 3);
    assert_planner_is_exhaustive(&lists, &cfg, &BgHeader::new(BgHeaderMode::Vlc, cfg.family), "bg-vlc");
    assert_planner_is_exhaustive(&lists, &cfg, &CgHeader { offset_width: 3 }, "cg");
}

fn assert_record_roundtrip<H: RecordHeader>(
    lists: &Vec<Vec<u64>>,
    cfg: &KernelConfig,
    header: &H,
    label: &str,
) {
    for (i, neighbors) in lists.iter().enumerate() {
        let v = i as u64 + 1;
        let plan = plan_vertex(v, neighbors, lists, cfg, header);

        let mut sink = BitSink::new();
        header.write_header(&mut sink, &plan).expect("header");
        write_payload(&plan, v, cfg, &mut sink).expect("payload");
        assert_eq!(
            sink.len_bits() as u64,
            plan.cost_bits,
            "{label}: vertex {v} action {:?} analytic cost vs serialized bits",
            plan.action,
        );

        let bytes = sink.into_bytes();
        let mut src = BitSource::new(&bytes);
        let (action, offsets) = header.read_header(&mut src).expect("read header");
        assert_eq!(action, plan.action, "{label}: vertex {v} action");
        let planned: Vec<u32> = plan.refs.iter().map(|r| r.offset).collect();
        assert_eq!(offsets, planned, "{label}: vertex {v} offsets");
        let ref_lists: Vec<&[u64]> =
            offsets.iter().map(|&o| lists[(v - 1 - u64::from(o)) as usize].as_slice()).collect();
        let n = lists.len() as u64;
        let decoded =
            read_payload(action, &ref_lists, v, cfg, &mut src, n).expect("read payload");
        assert_eq!(&decoded, neighbors, "{label}: vertex {v} list");
        assert_eq!(src.position() as u64, plan.cost_bits, "{label}: vertex {v} cursor");
    }
}

#[test]
fn analytic_cost_equals_serialized_bits_and_records_roundtrip() {
    let lists = web_lists(200, 3);
    let cfg = full_search_cfg(16, 1);
    assert_record_roundtrip(&lists, &cfg, &BgHeader::new(BgHeaderMode::Vlc, cfg.family), "bg-vlc");
    assert_record_roundtrip(
        &lists,
        &cfg,
        &BgHeader::new(BgHeaderMode::Flat5, cfg.family),
        "bg-flat5",
    );
    assert_record_roundtrip(&lists, &cfg, &CsHeader { family: cfg.family }, "cs");
    assert_record_roundtrip(&lists, &cfg, &CgHeader { offset_width: 4 }, "cg");
}

#[test]
fn stripped_down_configs_still_roundtrip() {
    // Every optional stream feature off, plus the zeta family, so the plain
    // count-prefixed forms and blocks-only descriptors get serialized too.
    let lists = web_lists(150, 9);
    let cfg = KernelConfig {
        window: 8,
        shortlist: 8,
        multi_top_k: 8,
        max_refs: 1,
        min_ref_degree: 3,
        lr_split: false,
        tight_intervals: false,
        stop_lists: false,
        adaptive_copy: false,
        cost_model: CostModel::Exact,
        family: CodeFamily::Zeta(3),
    };
    assert_record_roundtrip(&lists, &cfg, &BgHeader::new(BgHeaderMode::Vlc, cfg.family), "bg-vlc");
    assert_planner_is_exhaustive(&lists, &cfg, &BgHeader::new(BgHeaderMode::Vlc, cfg.family), "bg-vlc");
}

fn sorted_unique(values: Vec<u64>) -> Vec<u64> {
    let set: BTreeSet<u64> = values.into_iter().collect();
    set.into_iter().collect()
}

proptest! {
    #[test]
    fn interval_detection_partitions_the_list(
        values in proptest::collection::vec(1u64..400, 0..60),
        mil in 2u8..=5,
    ) {
        let values = sorted_unique(values);
        let (intervals, leftovers) = detect_intervals(&values, mil);

        // Expanding every interval and merging the leftovers rebuilds the
        // input exactly.
        let mut rebuilt: Vec<u64> = leftovers.clone();
        for &(start, extra) in &intervals {
            rebuilt.extend(start..start + extra + u64::from(mil));
        }
        rebuilt.sort_unstable();
        prop_assert_eq!(&rebuilt, &values);

        // Intervals are maximal runs; leftovers contain no run of `mil`.
        for &(start, extra) in &intervals {
            let end = start + extra + u64::from(mil);
            prop_assert!(start == 1 || values.binary_search(&(start - 1)).is_err());
            prop_assert!(values.binary_search(&end).is_err());
        }
        let mut run = 1;
        for w in leftovers.windows(2) {
            run = if w[1] == w[0] + 1 { run + 1 } else { 1 };
            prop_assert!(run < u64::from(mil));
        }
    }

    #[test]
    fn lr_split_inverts(
        values in proptest::collection::vec(1u64..2000, 0..50),
        v in 1u64..2000,
    ) {
        let values = sorted_unique(values);
        match lr_split(&values, v) {
            None => prop_assert!(values.binary_search(&v).is_ok()),
            Some((left, right)) => {
                prop_assert!(values.binary_search(&v).is_err());
                prop_assert_eq!(lr_reconstruct(&left, &right, v), values);
            }
        }
    }

    #[test]
    fn rle_pairs_expand_back(
        values in proptest::collection::vec(1u64..300, 0..60),
        mil in 2u8..=5,
    ) {
        let values = sorted_unique(values);
        let pairs = rle_pairs(&values, mil);
        let mut rebuilt = Vec::new();
        for &(start, len) in &pairs {
            prop_assert!(len == 1 || len >= u64::from(mil));
            rebuilt.extend(start..start + len);
        }
        prop_assert_eq!(rebuilt, values);
    }

    #[test]
    fn randomized_planner_matches_exhaustive_search(seed in 0u64..1 << 32) {
        let lists = web_lists(40, seed);
        let cfg = full_search_cfg(8, 1);
        let header = BgHeader::new(BgHeaderMode::Vlc, cfg.family);
        for (i, neighbors) in lists.iter().enumerate() {
            let v = i as u64 + 1;
            let chosen = plan_vertex(v, neighbors, &lists, &cfg, &header);
            let forced = brute_force_plan(v, neighbors, &lists, &cfg, &header);
            prop_assert_eq!(key(&chosen), key(&forced));
        }
    }
}
