//! Bank-unaware proactive writeback baselines: Eager Writeback and the
//! Virtual Write Queue.

use std::collections::HashMap;

use crate::cache::CacheLine;

/// Eager Writeback: after a hit or an eviction, the set's LRU line (first in
/// `order`) is cleansed if dirty. Never looks at the BLP tracker.
pub fn eager_writeback_pick(set: &[CacheLine], order: &[usize]) -> Option<usize> {
    let w = order.iter().copied().find(|&w| set[w].valid)?;
    set[w].dirty.then_some(w)
}

/// DRAM row identity used by the Virtual Write Queue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RowKey {
    pub channel: u8,
    /// Bank ordinal within the channel (includes the sub-channel).
    pub bank: u16,
    pub row: u32,
}

impl RowKey {
    pub fn of(line: &CacheLine) -> Self {
        RowKey { channel: line.channel, bank: line.bank, row: line.row }
    }
}

/// Index from DRAM row to the resident dirty lines mapping to it. Answers
/// the same question as a scan of the whole cache.
#[derive(Clone, Debug, Default)]
pub struct DirtyRowIndex {
    rows: HashMap<RowKey, Vec<u64>>,
}

impl DirtyRowIndex {
    pub fn insert(&mut self, key: RowKey, line: u64) {
        let v = self.rows.entry(key).or_default();
        if !v.contains(&line) {
            v.push(line);
        }
    }

    pub fn remove(&mut self, key: RowKey, line: u64) {
        if let Some(v) = self.rows.get_mut(&key) {
            v.retain(|&l| l != line);
            if v.is_empty() {
                self.rows.remove(&key);
            }
        }
    }

    /// Dirty lines in `key`'s row, oldest first.
    pub fn lines(&self, key: RowKey) -> &[u64] {
        self.rows.get(&key).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.rows.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Virtual Write Queue: after a dirty eviction from `key`'s row, up to
/// `budget` other dirty lines in the same row are written back.
pub fn vwq_same_row(index: &DirtyRowIndex, key: RowKey, evicted: u64, budget: usize) -> Vec<u64> {
    index
        .lines(key)
        .iter()
        .copied()
        .filter(|&l| l != evicted)
        .take(budget)
        .collect()
}
