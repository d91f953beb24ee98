use std::cell::Cell;

use crate::geometry::DramGeometry;

/// When a saturated tracker clears itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackerReset {
    /// Clear a sub-channel's group once all of its bits are set.
    PerSubchannel,
    /// Clear the whole channel once every bank bit is set.
    Whole,
}

impl TrackerReset {
    pub fn name(self) -> &'static str {
        match self {
            TrackerReset::PerSubchannel => "subchannel",
            TrackerReset::Whole => "whole",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "subchannel" => Some(TrackerReset::PerSubchannel),
            "whole" => Some(TrackerReset::Whole),
            _ => None,
        }
    }
}

/// One bit per DRAM bank per channel: set when the LLC writes back a line to
/// that bank, read to guess whether the bank already has a pending write.
#[derive(Clone, Debug)]
pub struct BlpTracker {
    /// `words_per_channel` words per channel, bank ordinal `b` at bit `b % 64`
    /// of word `b / 64`.
    bits: Vec<u64>,
    words_per_channel: usize,
    banks_per_channel: u32,
    banks_per_subchannel: u32,
    reset: TrackerReset,
    disabled: bool,
    queries: Cell<u64>,
    resets: u64,
}

impl BlpTracker {
    pub fn new(geom: &DramGeometry, reset: TrackerReset) -> Self {
        let banks = geom.banks_per_channel();
        let words = banks.div_ceil(64) as usize;
        BlpTracker {
            bits: vec![0; words * geom.channels as usize],
            words_per_channel: words,
            banks_per_channel: banks,
            banks_per_subchannel: geom.banks_per_subchannel(),
            reset,
            disabled: false,
            queries: Cell::new(0),
            resets: 0,
        }
    }

    /// A tracker whose bits always read zero.
    pub fn disabled(mut self) -> Self {
        self.disabled = true;
        self
    }

    pub fn is_disabled(&self) -> bool {
        self.disabled
    }

    fn slot(&self, channel: u32, bank: usize) -> (usize, u32) {
        assert!(
            (bank as u32) < self.banks_per_channel,
            "bank ordinal {bank} out of range"
        );
        (channel as usize * self.words_per_channel + bank / 64, (bank % 64) as u32)
    }

    /// Record a writeback to `bank`, then apply the self-reset.
    pub fn mark(&mut self, channel: u32, bank: usize) {
        if self.disabled {
            return;
        }
        let (w, b) = self.slot(channel, bank);
        self.bits[w] |= 1 << b;
        match self.reset {
            TrackerReset::PerSubchannel => {
                let sc = bank as u32 / self.banks_per_subchannel;
                let lo = sc * self.banks_per_subchannel;
                if self.range_full(channel, lo, self.banks_per_subchannel) {
                    self.clear_range(channel, lo, self.banks_per_subchannel);
                    self.resets += 1;
                }
            }
            TrackerReset::Whole => {
                if self.range_full(channel, 0, self.banks_per_channel) {
                    self.clear_range(channel, 0, self.banks_per_channel);
                    self.resets += 1;
                }
            }
        }
    }

    fn range_full(&self, channel: u32, lo: u32, n: u32) -> bool {
        (lo..lo + n).all(|b| self.raw(channel, b as usize))
    }

    fn clear_range(&mut self, channel: u32, lo: u32, n: u32) {
        for b in lo..lo + n {
            let (w, i) = self.slot(channel, b as usize);
            self.bits[w] &= !(1 << i);
        }
    }

    fn raw(&self, channel: u32, bank: usize) -> bool {
        let (w, b) = self.slot(channel, bank);
        self.bits[w] >> b & 1 == 1
    }

    /// Does `bank` presumably have a pending write?
    pub fn pending(&self, channel: u32, bank: usize) -> bool {
        self.queries.set(self.queries.get() + 1);
        !self.disabled && self.raw(channel, bank)
    }

    /// Bits of a channel's first word (all banks under the default geometry).
    pub fn word(&self, channel: u32) -> u64 {
        self.bits[channel as usize * self.words_per_channel]
    }

    /// Is any sub-channel group of `channel` entirely set?
    pub fn has_full_group(&self, channel: u32) -> bool {
        (0..self.banks_per_channel / self.banks_per_subchannel)
            .any(|sc| self.range_full(channel, sc * self.banks_per_subchannel, self.banks_per_subchannel))
    }

    /// Serialized state: exactly one bit per bank, little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let per_channel = self.banks_per_channel.div_ceil(8) as usize;
        let mut out = Vec::new();
        for ch in 0..self.bits.len() / self.words_per_channel {
            let words = &self.bits[ch * self.words_per_channel..(ch + 1) * self.words_per_channel];
            let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
            out.extend_from_slice(&bytes[..per_channel]);
        }
        out
    }

    /// Storage in bytes per channel.
    pub fn bytes_per_channel(&self) -> usize {
        self.banks_per_channel.div_ceil(8) as usize
    }

    /// Number of `pending` queries made so far.
    pub fn queries(&self) -> u64 {
        self.queries.get()
    }

    pub fn resets(&self) -> u64 {
        self.resets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh() -> BlpTracker {
        BlpTracker::new(&DramGeometry::default(), TrackerReset::PerSubchannel)
    }

    #[test]
    fn mark_and_query() {
        let mut t = fresh();
        assert!((0..64).all(|b| !t.pending(0, b)));
        t.mark(0, 5);
        assert_eq!(t.word(0), 1 << 5);
        t.mark(0, 5);
        assert_eq!(t.word(0), 1 << 5);
        t.mark(0, 3);
        assert!(t.pending(0, 3) && !t.pending(0, 4));
    }

    #[test]
    fn subchannel_group_self_resets() {
        let mut t = fresh();
        t.mark(0, 40);
        for b in 0..31 {
            t.mark(0, b);
        }
        assert_eq!(t.word(0), 0x7fff_ffff | 1 << 40);
        t.mark(0, 31);
        assert_eq!(t.word(0), 1 << 40);
        assert_eq!(t.resets(), 1);
    }

    #[test]
    fn whole_reset_waits_for_all_banks() {
        let mut t = BlpTracker::new(&DramGeometry::default(), TrackerReset::Whole);
        for b in 0..32 {
            t.mark(0, b);
        }
        assert_eq!(t.word(0), 0xffff_ffff);
        for b in 32..64 {
            t.mark(0, b);
        }
        assert_eq!(t.word(0), 0);
    }

    #[test]
    fn storage_is_eight_bytes_per_channel() {
        let t = fresh();
        assert_eq!(t.to_bytes().len(), 8);
        let g = DramGeometry { channels: 2, ..Default::default() };
        assert_eq!(BlpTracker::new(&g, TrackerReset::PerSubchannel).to_bytes().len(), 16);
    }

    #[test]
    fn disabled_reads_zero() {
        let mut t = fresh().disabled();
        t.mark(0, 1);
        assert!(!t.pending(0, 1));
    }
}
