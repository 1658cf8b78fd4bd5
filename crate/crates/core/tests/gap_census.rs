use std::collections::BTreeMap;

use jumpchamp_core::gap_census::{
    bonferroni_check, champions_of, pi_tuple_empirical, read_snapshot_csv, run_census,
    run_census_with, write_champions_csv, write_snapshot_csv, write_snapshot_json, CensusConfig,
    CensusScanner, CensusSnapshot, CensusState, TableMeta,
};
use jumpchamp_core::{AnchorConvention, CoreError, Exec, GapPattern};
use proptest::prelude::*;

fn trial_primes(limit: u64) -> Vec<u64> {
    (2..=limit)
        .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

/// Windows of k+1 consecutive primes, anchored per `conv`, counted directly.
fn naive(primes: &[u64], x: u64, k: usize, conv: AnchorConvention) -> BTreeMap<Vec<u64>, u64> {
    let mut counts = BTreeMap::new();
    for w in primes.windows(k + 1) {
        let anchor = match conv {
            AnchorConvention::LargestLeX => w[k],
            AnchorConvention::SmallestLeX => w[0],
        };
        if anchor <= x {
            *counts
                .entry(w[1..].iter().map(|p| p - w[0]).collect())
                .or_insert(0) += 1;
        }
    }
    counts
}

fn as_map(snap: &CensusSnapshot) -> BTreeMap<Vec<u64>, u64> {
    snap.counts
        .iter()
        .map(|(p, &c)| (p.diffs().to_vec(), c))
        .collect()
}

fn pat(d: &[u64]) -> GapPattern {
    GapPattern::new(d.to_vec()).unwrap()
}

fn meta() -> TableMeta {
    TableMeta {
        tool: "jumpchamp".into(),
        version: "0.1.0".into(),
        command: "test".into(),
        timestamp: "2024-01-01T00:00:00Z".into(),
    }
}

#[test]
fn census_examples() {
    let s = &run_census(&[50], 1, AnchorConvention::LargestLeX).unwrap()[0];
    let expect: BTreeMap<Vec<u64>, u64> =
        [(vec![1], 1), (vec![2], 6), (vec![4], 5), (vec![6], 2)].into();
    assert_eq!(as_map(s), expect);

    let s = &run_census(&[50], 2, AnchorConvention::LargestLeX).unwrap()[0];
    assert_eq!(s.total(), 13);
    assert_eq!(s.count(&pat(&[2, 6])), 4);
    assert_eq!(s.count(&pat(&[4, 6])), 3);

    let s = &run_census(&[3], 1, AnchorConvention::LargestLeX).unwrap()[0];
    assert_eq!(as_map(s), [(vec![1], 1)].into());
}

#[test]
fn census_rejects_bad_input() {
    assert!(matches!(
        run_census(&[50], 0, AnchorConvention::LargestLeX),
        Err(CoreError::Domain(_))
    ));
    assert!(matches!(
        run_census(&[50], 9, AnchorConvention::LargestLeX),
        Err(CoreError::Domain(_))
    ));
    assert!(run_census(&[], 1, AnchorConvention::LargestLeX).is_err());
    assert!(run_census(&[1], 1, AnchorConvention::LargestLeX).is_err());
    assert!(run_census(&[100, 50], 1, AnchorConvention::LargestLeX).is_err());
    assert!(run_census(&[u64::MAX], 1, AnchorConvention::LargestLeX).is_err());
}

#[test]
fn oracle_equality_to_1e5() {
    let primes = trial_primes(100_200);
    let cps = [2u64, 3, 10, 97, 1_000, 12_345, 65_536, 100_000];
    for conv in [AnchorConvention::LargestLeX, AnchorConvention::SmallestLeX] {
        for k in 1..=3 {
            for snap in run_census(&cps, k, conv).unwrap() {
                assert_eq!(
                    as_map(&snap),
                    naive(&primes, snap.x, k, conv),
                    "k={k} x={} {conv}",
                    snap.x
                );
            }
        }
    }
}

#[test]
fn window_total_is_pi_minus_k() {
    let primes = trial_primes(100_000);
    let cps: Vec<u64> = (1..=100).map(|i| i * 1_000).collect();
    for k in 1..=8 {
        for snap in run_census(&cps, k, AnchorConvention::LargestLeX).unwrap() {
            let pi = primes.partition_point(|&p| p <= snap.x) as u64;
            assert_eq!(
                snap.total(),
                pi.saturating_sub(k as u64),
                "k={k} x={}",
                snap.x
            );
        }
    }
}

#[test]
fn anchor_consistency_exhaustive() {
    let primes = trial_primes(3_000);
    let cps: Vec<u64> = (2..=2_000).collect();
    for k in 1..=3 {
        let large = run_census(&cps, k, AnchorConvention::LargestLeX).unwrap();
        let small = run_census(&cps, k, AnchorConvention::SmallestLeX).unwrap();
        for (l, s) in large.iter().zip(&small) {
            let x = l.x;
            for (p, &ns) in &s.counts {
                let nl = l.count(p);
                let dk = p.largest();
                let inside = primes
                    .windows(k + 1)
                    .filter(|w| w[0] + dk > x && w[0] <= x)
                    .filter(|w| {
                        w[1..]
                            .iter()
                            .map(|q| q - w[0])
                            .eq(p.diffs().iter().copied())
                    })
                    .count() as u64;
                assert!(ns - nl <= inside);
                assert_eq!(ns - nl, inside, "x={x} {p}");
            }
        }
    }
}

#[test]
fn sequential_parallel_and_segment_size_agree() {
    let cps = vec![10_000, 300_000, 2_000_000];
    let base = run_census(&cps, 2, AnchorConvention::LargestLeX).unwrap();
    for (seg, exec) in [
        (1u64 << 20, Exec::Sequential),
        (4_099, Exec::Parallel),
        (77, Exec::Sequential),
    ] {
        let cfg = CensusConfig::new(cps.clone(), 2, AnchorConvention::LargestLeX)
            .unwrap()
            .with_segment_size(seg)
            .unwrap()
            .with_exec(exec);
        assert_eq!(
            run_census_with(cfg).unwrap(),
            base,
            "segment {seg}, {exec:?}"
        );
    }
}

#[test]
fn champion_examples() {
    let s1 = &run_census(&[50], 1, AnchorConvention::LargestLeX).unwrap()[0];
    let c = champions_of(s1).unwrap();
    assert_eq!((c.champions.clone(), c.max_count), (vec![pat(&[2])], 6));

    let s2 = &run_census(&[50], 2, AnchorConvention::LargestLeX).unwrap()[0];
    let c = champions_of(s2).unwrap();
    assert_eq!(c.champions, vec![pat(&[2, 6])]);
    assert_eq!((c.max_count, c.gcds[&pat(&[2, 6])]), (4, 2));

    let single = CensusSnapshot {
        x: 10,
        k: 1,
        anchor_convention: AnchorConvention::LargestLeX,
        counts: [(pat(&[4]), 7)].into(),
    };
    assert_eq!(champions_of(&single).unwrap().champions, vec![pat(&[4])]);

    let empty = CensusSnapshot {
        counts: BTreeMap::new(),
        ..single.clone()
    };
    assert!(matches!(champions_of(&empty), Err(CoreError::Domain(_))));

    let tied = CensusSnapshot {
        counts: [(pat(&[2]), 3), (pat(&[4]), 3), (pat(&[6]), 1)].into(),
        ..single
    };
    assert_eq!(
        champions_of(&tied).unwrap().champions,
        vec![pat(&[2]), pat(&[4])]
    );
}

#[test]
fn pi_tuple_examples() {
    assert_eq!(pi_tuple_empirical(100, &[0, 2]).unwrap(), 8);
    assert_eq!(pi_tuple_empirical(100, &[0]).unwrap(), 25);
    assert_eq!(pi_tuple_empirical(10, &[0, 2, 4]).unwrap(), 1);
}

#[test]
fn bonferroni_examples() {
    let six = pat(&[6]);
    let r0 = bonferroni_check(10_000, &six, 0, 6).unwrap();
    assert_eq!(
        r0.upper,
        pi_tuple_empirical(10_000, &[0, 6]).unwrap() as i128
    );
    assert!(r0.upper >= r0.census as i128);
    let r1 = bonferroni_check(10_000, &six, 1, 6).unwrap();
    assert!(r1.holds());
    assert!(r0.lower <= r1.lower && r1.upper <= r0.upper);

    let two = pat(&[2]);
    for x in [10u64, 1_000, 100_000] {
        let r = bonferroni_check(x, &two, 1, 2).unwrap();
        let pairs = pi_tuple_empirical(x, &[0, 2]).unwrap();
        assert_eq!(
            (r.lower, r.census as i128, r.upper),
            (pairs as i128, pairs as i128, pairs as i128)
        );
    }
}

#[test]
fn bonferroni_refusals() {
    assert!(bonferroni_check(1_000, &pat(&[6]), 1, 7).is_err());
    assert!(bonferroni_check(1_000, &pat(&[6]), 1, 0).is_err());
    assert!(matches!(
        bonferroni_check(100_000_000, &pat(&[60]), 3, 60),
        Err(CoreError::Budget { .. })
    ));
}

#[test]
fn persistence_formats() {
    let snap = &run_census(&[50], 2, AnchorConvention::LargestLeX).unwrap()[0];
    let mut csv = Vec::new();
    write_snapshot_csv(snap, &meta(), &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("# jumpchamp 0.1.0, test, 2024-01-01T00:00:00Z")
    );
    assert_eq!(lines.next(), Some("x,k,pattern,count"));
    assert!(text.contains("\n50,2,2-6,4\n"));

    let mut json = Vec::new();
    write_snapshot_json(snap, &meta(), &mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["anchor_convention"], "largest_le_x");
    assert_eq!(v["rows"].as_array().unwrap().len(), snap.counts.len());
    assert!(v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["pattern"] == "2-6" && r["count"] == 4 && r["x"] == 50 && r["k"] == 2));

    let mut champs = Vec::new();
    write_champions_csv(&[champions_of(snap).unwrap()], &meta(), &mut champs).unwrap();
    let text = String::from_utf8(champs).unwrap();
    assert!(text.ends_with("x,k,pattern,count,gcd,gcd_squarefree\n50,2,2-6,4,2,true\n"));
}

#[test]
fn resume_rejects_garbage_state() {
    let cfg = CensusConfig::new(vec![1_000], 1, AnchorConvention::LargestLeX).unwrap();
    let mut scanner = CensusScanner::new(cfg).unwrap();
    scanner
        .advance(500, &mut |_s: CensusSnapshot| Ok(()))
        .unwrap();
    let mut state = scanner.state();
    state.open_window = vec![7, 5];
    assert!(CensusScanner::from_state(state).is_err());
    let mut state = scanner.state();
    state.version = 99;
    assert!(CensusScanner::from_state(state).is_err());
}

fn collect_snapshots(scanner: CensusScanner) -> Vec<CensusSnapshot> {
    let mut out = Vec::new();
    scanner
        .run(&mut |s: CensusSnapshot| {
            out.push(s);
            Ok(())
        })
        .unwrap();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_equality_random(x in 2u64..20_000, k in 1usize..=3, small in any::<bool>()) {
        let conv = if small { AnchorConvention::SmallestLeX } else { AnchorConvention::LargestLeX };
        let primes = trial_primes(x + 400);
        let snap = &run_census(&[x], k, conv).unwrap()[0];
        prop_assert_eq!(as_map(snap), naive(&primes, x, k, conv));
    }

    #[test]
    fn cumulative_counts(mut cps in prop::collection::btree_set(2u64..200_000, 2..6), k in 1usize..=4) {
        let cps: Vec<u64> = std::mem::take(&mut cps).into_iter().collect();
        let snaps = run_census(&cps, k, AnchorConvention::LargestLeX).unwrap();
        for w in snaps.windows(2) {
            for (p, &c) in &w[0].counts {
                prop_assert!(w[1].count(p) >= c);
            }
        }
    }

    #[test]
    fn resume_matches_uninterrupted(
        stop in 1u64..400_000,
        k in 1usize..=3,
        seg in 50u64..20_000,
        small in any::<bool>(),
    ) {
        let conv = if small { AnchorConvention::SmallestLeX } else { AnchorConvention::LargestLeX };
        let cps = vec![1_000, 50_000, 300_000];
        let cfg = CensusConfig::new(cps.clone(), k, conv).unwrap().with_segment_size(seg).unwrap();
        let whole = collect_snapshots(CensusScanner::new(cfg.clone()).unwrap());

        let mut first = Vec::new();
        let mut scanner = CensusScanner::new(cfg).unwrap();
        scanner
            .advance(stop, &mut |s: CensusSnapshot| {
                first.push(s);
                Ok(())
            })
            .unwrap();
        let text = serde_json::to_string(&scanner.state()).unwrap();
        let state: CensusState = serde_json::from_str(&text).unwrap();
        first.extend(collect_snapshots(CensusScanner::from_state(state).unwrap()));
        prop_assert_eq!(first, whole);
    }

    #[test]
    fn bonferroni_sandwich(
        x in 100u64..3_000,
        diffs in prop::collection::btree_set(1u64..=12, 1..=2),
        hsel in 0u64..12,
    ) {
        let pattern = GapPattern::new(diffs.into_iter().collect()).unwrap();
        let dk = pattern.largest();
        let h = 1 + hsel % dk;
        let reports: Vec<_> = (0..3).map(|i| bonferroni_check(x, &pattern, i, h).unwrap()).collect();
        for r in &reports {
            prop_assert!(r.holds(), "{:?}", r);
        }
        for w in reports.windows(2) {
            prop_assert!(w[0].lower <= w[1].lower && w[1].upper <= w[0].upper);
        }
    }

    #[test]
    fn csv_snapshot_round_trip(x in 2u64..5_000, k in 1usize..=3, small in any::<bool>()) {
        let conv = if small { AnchorConvention::SmallestLeX } else { AnchorConvention::LargestLeX };
        let snap = run_census(&[x], k, conv).unwrap().remove(0);
        prop_assume!(!snap.counts.is_empty());
        let mut buf = Vec::new();
        write_snapshot_csv(&snap, &meta(), &mut buf).unwrap();
        prop_assert_eq!(read_snapshot_csv(&buf[..], conv).unwrap(), snap);
    }

    #[test]
    fn pattern_text_round_trip(diffs in prop::collection::btree_set(1u64..10_000, 1..=8)) {
        let p = GapPattern::new(diffs.into_iter().collect()).unwrap();
        prop_assert_eq!(p.to_string().parse::<GapPattern>().unwrap(), p.clone());
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<GapPattern>(&json).unwrap(), p);
    }
}
