use std::collections::HashSet;

use blpsim::cache::{Cache, CacheConfig, Replacement};
use blpsim::policy::TrackerReset;
use blpsim::{AccessKind, BlpTracker, DramGeometry, PolicyChoice, RunConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tracker() -> BlpTracker {
    BlpTracker::new(&DramGeometry::default(), TrackerReset::PerSubchannel)
}

#[test]
fn tracker_storage_is_8_bytes_per_channel() {
    assert_eq!(tracker().to_bytes().len(), 8);
    assert_eq!(tracker().bytes_per_channel(), 8);
    let two = DramGeometry { channels: 2, ..Default::default() };
    assert_eq!(BlpTracker::new(&two, TrackerReset::PerSubchannel).to_bytes().len(), 16);
}

#[test]
fn tracker_resets_subchannel_on_32nd_distinct_mark() {
    let mut t = tracker();
    t.mark(0, 40);
    for b in 0..31 {
        t.mark(0, b);
        t.mark(0, b);
    }
    assert!((0..31).all(|b| t.pending(0, b)));
    t.mark(0, 31);
    assert!((0..32).all(|b| !t.pending(0, b)));
    // the other sub-channel keeps its bit
    assert!(t.pending(0, 40));
    assert_eq!(t.resets(), 1);
}

#[test]
fn whole_reset_waits_for_every_bank_of_the_channel() {
    let mut t = BlpTracker::new(&DramGeometry::default(), TrackerReset::Whole);
    for b in 0..32 {
        t.mark(0, b);
    }
    assert_eq!(t.word(0), u32::MAX as u64);
    for b in 32..63 {
        t.mark(0, b);
    }
    assert_eq!(t.word(0), u64::MAX >> 1);
    t.mark(0, 63);
    assert_eq!(t.word(0), 0);
}

#[test]
fn disabled_tracker_never_reports_pending() {
    let mut t = tracker().disabled();
    t.mark(0, 3);
    assert!(!t.pending(0, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]
    #[test]
    fn tracker_never_all_ones_after_mark(marks in prop::collection::vec(0usize..64, 1..200)) {
        let mut t = tracker();
        let mut model: [HashSet<usize>; 2] = Default::default();
        for &b in &marks {
            t.mark(0, b);
            let g = &mut model[b / 32];
            g.insert(b);
            if g.len() == 32 {
                g.clear();
            }
            prop_assert!(!t.has_full_group(0));
            prop_assert_ne!(t.word(0) as u32, u32::MAX);
            prop_assert_ne!((t.word(0) >> 32) as u32, u32::MAX);
            for q in 0..64 {
                prop_assert_eq!(t.pending(0, q), model[q / 32].contains(&q));
            }
        }
    }
}

fn shaped(sets: u64, ways: u32, repl: Replacement, policy: PolicyChoice) -> Cache {
    let cfg = RunConfig::default();
    let cc = CacheConfig { capacity: sets * ways as u64 * 64, ways, replacement: repl, ..Default::default() };
    Cache::new(cc, cfg.mapping().unwrap(), policy, BlpTracker::new(&cfg.geom, TrackerReset::PerSubchannel)).unwrap()
}

/// Hit/miss deviations of `policy` from the baseline. Sets where BARD-E
/// overrode an eviction are tainted and skipped from then on, so for
/// BARD-H this compares only the clean-victim path.
fn deviations(seed: u64, sets: u64, ways: u32, repl: Replacement, policy: PolicyChoice, n: usize) -> (u64, u64) {
    let mut base = shaped(sets, ways, repl, PolicyChoice::Baseline);
    let mut test = shaped(sets, ways, repl, policy);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines = sets * ways as u64 * 4;
    let mut tainted = vec![false; sets as usize];
    let (mut dev, mut compared) = (0, 0);
    for _ in 0..n {
        let addr = rng.random_range(0..lines) * 64;
        let kind = if rng.random_bool(0.5) { AccessKind::Write } else { AccessKind::Read };
        let s = base.set_index(addr);
        let a = base.access(addr, kind, 0, &|_, _| usize::MAX);
        let b = test.access(addr, kind, 0, &|_, _| usize::MAX);
        tainted[s] |= b.overridden;
        if tainted[s] {
            continue;
        }
        compared += 1;
        if a.hit != b.hit || a.victim.map(|v| v.0) != b.victim.map(|v| v.0) {
            dev += 1;
        }
    }
    (dev, compared)
}

#[test]
fn bard_c_never_changes_residency() {
    for repl in [Replacement::Lru, Replacement::Srrip, Replacement::Ship] {
        let (dev, compared) = deviations(1, 32, 8, repl, PolicyChoice::BardC, 20_000);
        assert_eq!(dev, 0, "{repl:?}");
        assert_eq!(compared, 20_000);
    }
}

#[test]
fn bard_h_clean_path_matches_baseline() {
    let (dev, compared) = deviations(2, 32, 8, Replacement::Lru, PolicyChoice::BardH, 20_000);
    assert_eq!(dev, 0);
    assert!(compared > 1000);
}

#[test]
fn bard_h_cleanses_more_than_it_overrides() {
    let mut c = shaped(64, 16, Replacement::Lru, PolicyChoice::BardH);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100_000 {
        let addr = rng.random_range(0..64 * 16 * 4u64) * 64;
        let kind = if rng.random_bool(0.5) { AccessKind::Write } else { AccessKind::Read };
        c.access(addr, kind, 0, &|_, _| usize::MAX);
    }
    let b = c.breakdown();
    assert!(b.cleanses > b.overrides, "{b:?}");
    assert!(b.overrides > 0);
}

#[test]
fn read_only_trace_makes_bard_inert() {
    for policy in [PolicyChoice::BardE, PolicyChoice::BardC, PolicyChoice::BardH] {
        let (dev, _) = deviations(3, 16, 4, Replacement::Lru, policy, 0);
        assert_eq!(dev, 0);
        let mut c = shaped(16, 4, Replacement::Lru, policy);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let r = c.access(rng.random_range(0..256u64) * 64, AccessKind::Read, 0, &|_, _| 1);
            assert!(r.writebacks.is_empty() && !r.overridden);
        }
        assert_eq!(c.breakdown().overrides + c.breakdown().cleanses, 0);
    }
}
