//! Bank-aware replacement decisions.
//!
//! All three hooks take the set, the base policy's scan order (LRU to MRU,
//! or highest to lowest RRPV), and the base victim. The tracker is read
//! only; marking happens when the caller issues the writeback.

use super::BlpTracker;
use crate::cache::CacheLine;

/// Victim and optional cleanse chosen for one miss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HookDecision {
    pub victim: usize,
    pub cleansed: Option<usize>,
}

fn low_cost_dirty(set: &[CacheLine], order: &[usize], skip: usize, tracker: &BlpTracker) -> Option<usize> {
    order.iter().copied().find(|&w| {
        let l = &set[w];
        w != skip && l.valid && l.dirty && !tracker.pending(l.channel as u32, l.bank as usize)
    })
}

/// Eviction override: when the dirty base victim's bank already has a
/// pending write, evict the first dirty line whose bank does not.
pub fn bard_e_select(set: &[CacheLine], order: &[usize], base: usize, tracker: &BlpTracker) -> usize {
    let v = &set[base];
    if !v.dirty || !tracker.pending(v.channel as u32, v.bank as usize) {
        return base;
    }
    low_cost_dirty(set, order, base, tracker).unwrap_or(base)
}

/// Cleansing: with a clean base victim, pick the first dirty line whose bank
/// has no pending write for a proactive writeback.
pub fn bard_c_cleanse(set: &[CacheLine], order: &[usize], base: usize, tracker: &BlpTracker) -> Option<usize> {
    if set[base].dirty {
        return None;
    }
    low_cost_dirty(set, order, base, tracker)
}

/// Override on a dirty victim, cleanse on a clean one.
pub fn bard_h_hook(set: &[CacheLine], order: &[usize], base: usize, tracker: &BlpTracker) -> HookDecision {
    if set[base].dirty {
        HookDecision { victim: bard_e_select(set, order, base, tracker), cleansed: None }
    } else {
        HookDecision { victim: base, cleansed: bard_c_cleanse(set, order, base, tracker) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DramGeometry;
    use crate::policy::TrackerReset;

    fn line(bank: u16, dirty: bool) -> CacheLine {
        CacheLine { valid: true, dirty, bank, ..Default::default() }
    }

    fn tracker(pending: &[usize]) -> BlpTracker {
        let mut t = BlpTracker::new(&DramGeometry::default(), TrackerReset::PerSubchannel);
        for &b in pending {
            t.mark(0, b);
        }
        t
    }

    // ways listed LRU first
    const ORDER: [usize; 4] = [0, 1, 2, 3];

    #[test]
    fn override_picks_first_low_cost_dirty() {
        let set = [line(1, true), line(2, true), line(3, true), line(4, false)];
        let t = tracker(&[1, 2]);
        assert_eq!(bard_e_select(&set, &ORDER, 0, &t), 2);
        let t = tracker(&[2]);
        assert_eq!(bard_e_select(&set, &ORDER, 0, &t), 0);
        let t = tracker(&[1, 2, 3]);
        assert_eq!(bard_e_select(&set, &ORDER, 0, &t), 0);
    }

    #[test]
    fn cleanse_skips_pending_banks() {
        let set = [line(1, false), line(2, true), line(3, true), line(4, true)];
        let t = tracker(&[2]);
        assert_eq!(bard_c_cleanse(&set, &ORDER, 0, &t), Some(2));
        let clean = [line(1, false), line(2, false), line(3, false), line(4, false)];
        assert_eq!(bard_c_cleanse(&clean, &ORDER, 0, &t), None);
        let t = tracker(&[2, 3, 4]);
        assert_eq!(bard_c_cleanse(&set, &ORDER, 0, &t), None);
    }

    #[test]
    fn hybrid_dispatches_on_victim_dirtiness() {
        let set = [line(1, true), line(2, true), line(3, false), line(4, true)];
        let t = tracker(&[1]);
        assert_eq!(bard_h_hook(&set, &ORDER, 0, &t), HookDecision { victim: 1, cleansed: None });
        assert_eq!(bard_h_hook(&set, &ORDER, 2, &t), HookDecision { victim: 2, cleansed: Some(1) });
    }
}
