//! Set-associative write-back, write-allocate LLC.
//!
//! The cache is functional: a missing line is installed at miss time, and
//! the engine separately tracks when its data arrives. Hit/miss outcomes
//! therefore depend only on the access sequence and the replacement
//! decisions, never on DRAM timing.

use crate::config::parse_size;
use crate::error::ConfigError;
use crate::geometry::{AddressMapping, LINE_OFFSET_BITS};
use crate::policy::{
    bard_c_cleanse, bard_e_select, bard_h_hook, eager_writeback_pick, vwq_same_row, BlpTracker,
    DecisionBreakdown, DirtyRowIndex, PolicyChoice, RowKey,
};
use crate::{AccessKind, Cycle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Replacement {
    Lru,
    Srrip,
    Ship,
}

impl Replacement {
    pub fn name(self) -> &'static str {
        match self {
            Replacement::Lru => "lru",
            Replacement::Srrip => "srrip",
            Replacement::Ship => "ship",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lru" => Some(Replacement::Lru),
            "srrip" => Some(Replacement::Srrip),
            "ship" => Some(Replacement::Ship),
            _ => None,
        }
    }

    fn is_rrip(self) -> bool {
        self != Replacement::Lru
    }
}

pub const RRPV_MAX: u8 = 3;
const SRRIP_INSERT: u8 = 2;
const SHIP_SIG_BITS: u32 = 14;
const SHIP_COUNTER_MAX: u8 = 3;
/// Initial SHiP outcome counter: weakly "reused", so cold signatures insert
/// like SRRIP.
const SHIP_COUNTER_INIT: u8 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheConfig {
    pub capacity: u64,
    pub ways: u32,
    pub replacement: Replacement,
    /// Minimum cycles from victim selection to fill.
    pub fill_delay: Cycle,
    pub hit_latency: Cycle,
    pub mshrs: usize,
    pub slices: u32,
}

impl Default for CacheConfig {
    fn default() -> Self {
        CacheConfig {
            capacity: parse_size("16MiB").unwrap(),
            ways: 16,
            replacement: Replacement::Lru,
            fill_delay: 100,
            hit_latency: 10,
            mshrs: 128,
            slices: 1,
        }
    }
}

impl CacheConfig {
    pub fn sets(&self) -> u64 {
        self.capacity / (self.ways as u64 * 64)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ways == 0 || self.ways > 255 {
            return Err(ConfigError::invalid("cache.ways", self.ways, "must be in 1..=255"));
        }
        let sets = self.sets();
        if sets == 0 || sets * self.ways as u64 * 64 != self.capacity || !sets.is_power_of_two() {
            return Err(ConfigError::inconsistent(
                "cache.capacity",
                "capacity / (ways * 64) must be a power-of-two set count",
            ));
        }
        if self.slices == 0 || !self.slices.is_power_of_two() || self.slices as u64 > sets {
            return Err(ConfigError::invalid("cache.slices", self.slices, "must be a power of two <= sets"));
        }
        if self.mshrs == 0 {
            return Err(ConfigError::invalid("cache.mshrs", self.mshrs, "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheLine {
    /// Line address (`addr >> 6`).
    pub line: u64,
    pub valid: bool,
    pub dirty: bool,
    /// LRU stack position, 0 = MRU.
    pub lru: u8,
    pub rrpv: u8,
    /// Hit at least once since insertion (SHiP training).
    pub reused: bool,
    pub signature: u16,
    pub channel: u8,
    /// Bank ordinal within the channel.
    pub bank: u16,
    pub row: u32,
}

impl CacheLine {
    pub fn addr(&self) -> u64 {
        self.line << LINE_OFFSET_BITS
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WritebackCause {
    Eviction,
    Cleanse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Writeback {
    pub addr: u64,
    pub cause: WritebackCause,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AccessResult {
    pub hit: bool,
    /// Evicted line address and whether it was dirty.
    pub victim: Option<(u64, bool)>,
    pub writebacks: Vec<Writeback>,
    /// Lines written back but kept resident.
    pub cleansed: Vec<u64>,
    /// BARD-E replaced the base victim on this access.
    pub overridden: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheCounters {
    pub reads: u64,
    pub writes: u64,
    pub hits: u64,
    pub misses: u64,
    pub full_set_misses: u64,
    pub dirty_evictions: u64,
    pub clean_evictions: u64,
    pub cleanses: u64,
    pub vwq_probes: u64,
    pub vwq_lines_examined: u64,
}

/// Order in which policy hooks scan a full set: LRU to MRU, or highest to
/// lowest RRPV with ties in way order.
pub fn scan_order(set: &[CacheLine], repl: Replacement, out: &mut Vec<usize>) {
    out.clear();
    out.extend(0..set.len());
    match repl {
        Replacement::Lru => out.sort_by_key(|&w| std::cmp::Reverse(set[w].lru)),
        _ => out.sort_by_key(|&w| std::cmp::Reverse(set[w].rrpv)),
    }
}

/// Base-policy victim of a full set. RRIP ages the set until a line
/// reaches the maximum RRPV and evicts the lowest such way.
pub fn base_select_victim(set: &mut [CacheLine], repl: Replacement) -> usize {
    if repl.is_rrip() {
        let max = set.iter().map(|l| l.rrpv).max().unwrap_or(RRPV_MAX);
        if max < RRPV_MAX {
            for l in set.iter_mut() {
                l.rrpv += RRPV_MAX - max;
            }
        }
        set.iter().position(|l| l.rrpv == RRPV_MAX).unwrap()
    } else {
        let bottom = set.len() as u8 - 1;
        set.iter().position(|l| l.lru == bottom).unwrap()
    }
}

fn promote(set: &mut [CacheLine], way: usize) {
    let pos = set[way].lru;
    for l in set.iter_mut() {
        if l.lru < pos {
            l.lru += 1;
        }
    }
    set[way].lru = 0;
}

pub fn ship_signature(line: u64, stream: u8) -> u16 {
    let page = line >> 6;
    let h = (page ^ ((stream as u64) << 40)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    (h >> (64 - SHIP_SIG_BITS)) as u16
}

pub struct Cache {
    cfg: CacheConfig,
    ways: usize,
    sets_per_slice: u64,
    lines: Vec<CacheLine>,
    mapping: AddressMapping,
    policy: PolicyChoice,
    tracker: BlpTracker,
    breakdown: DecisionBreakdown,
    ship: Vec<u8>,
    dirty_rows: Option<DirtyRowIndex>,
    counters: CacheCounters,
    order: Vec<usize>,
}

impl Cache {
    pub fn new(cfg: CacheConfig, mapping: AddressMapping, policy: PolicyChoice, tracker: BlpTracker) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let ways = cfg.ways as usize;
        let sets = cfg.sets();
        let mut lines = vec![CacheLine::default(); sets as usize * ways];
        for (i, l) in lines.iter_mut().enumerate() {
            l.lru = (i % ways) as u8;
            l.rrpv = RRPV_MAX;
        }
        Ok(Cache {
            ways,
            sets_per_slice: sets / cfg.slices as u64,
            lines,
            mapping,
            policy,
            tracker,
            breakdown: DecisionBreakdown::default(),
            ship: if cfg.replacement == Replacement::Ship {
                vec![SHIP_COUNTER_INIT; 1 << SHIP_SIG_BITS]
            } else {
                Vec::new()
            },
            dirty_rows: (policy == PolicyChoice::Vwq).then(DirtyRowIndex::default),
            counters: CacheCounters::default(),
            order: Vec::with_capacity(ways),
            cfg,
        })
    }

    pub fn config(&self) -> &CacheConfig {
        &self.cfg
    }

    pub fn policy(&self) -> PolicyChoice {
        self.policy
    }

    pub fn tracker(&self) -> &BlpTracker {
        &self.tracker
    }

    pub fn breakdown(&self) -> DecisionBreakdown {
        self.breakdown
    }

    pub fn counters(&self) -> CacheCounters {
        self.counters
    }

    pub fn set_index(&self, addr: u64) -> usize {
        let line = addr >> LINE_OFFSET_BITS;
        let slices = self.cfg.slices as u64;
        let slice = if slices > 1 {
            (line.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 32) & (slices - 1)
        } else {
            0
        };
        (slice * self.sets_per_slice + (line & (self.sets_per_slice - 1))) as usize
    }

    pub fn set(&self, set: usize) -> &[CacheLine] {
        &self.lines[set * self.ways..(set + 1) * self.ways]
    }

    pub fn lookup(&self, addr: u64) -> Option<&CacheLine> {
        self.find(addr >> LINE_OFFSET_BITS).map(|i| &self.lines[i])
    }

    fn find(&self, line: u64) -> Option<usize> {
        let base = self.set_index(line << LINE_OFFSET_BITS) * self.ways;
        (base..base + self.ways).find(|&i| self.lines[i].valid && self.lines[i].line == line)
    }

    pub fn dirty_resident(&self) -> u64 {
        self.lines.iter().filter(|l| l.valid && l.dirty).count() as u64
    }

    /// Brute-force search of the whole cache for dirty lines in `key`'s row.
    pub fn dirty_lines_in_row(&self, key: RowKey) -> Vec<u64> {
        self.lines
            .iter()
            .filter(|l| l.valid && l.dirty && RowKey::of(l) == key)
            .map(CacheLine::addr)
            .collect()
    }

    /// Perform one access. `wrq_free(channel, subchannel)` reports the
    /// write-queue room available to Virtual Write Queue cleansing.
    pub fn access(&mut self, addr: u64, kind: AccessKind, stream: u8, wrq_free: &dyn Fn(u8, u32) -> usize) -> AccessResult {
        let line = addr >> LINE_OFFSET_BITS;
        let set = self.set_index(addr);
        let base = set * self.ways;
        let mut res = AccessResult::default();
        match kind {
            AccessKind::Read => self.counters.reads += 1,
            AccessKind::Write => self.counters.writes += 1,
        }

        if let Some(w) = (0..self.ways).find(|&w| {
            let l = &self.lines[base + w];
            l.valid && l.line == line
        }) {
            res.hit = true;
            self.counters.hits += 1;
            self.touch(base, w);
            if kind == AccessKind::Write {
                self.make_dirty(base + w);
            }
            if self.policy == PolicyChoice::EagerWriteback {
                self.eager(base, &mut res);
            }
            return res;
        }

        self.counters.misses += 1;
        let repl = self.cfg.replacement;
        let way = match (0..self.ways).find(|&w| !self.lines[base + w].valid) {
            Some(w) => w,
            None => {
                self.counters.full_set_misses += 1;
                let set_lines = &mut self.lines[base..base + self.ways];
                let base_victim = base_select_victim(set_lines, repl);
                scan_order(set_lines, repl, &mut self.order);
                let set_lines = &self.lines[base..base + self.ways];
                let (victim, cleansed) = match self.policy {
                    PolicyChoice::BardE => (bard_e_select(set_lines, &self.order, base_victim, &self.tracker), None),
                    PolicyChoice::BardC => (base_victim, bard_c_cleanse(set_lines, &self.order, base_victim, &self.tracker)),
                    PolicyChoice::BardH => {
                        let d = bard_h_hook(set_lines, &self.order, base_victim, &self.tracker);
                        (d.victim, d.cleansed)
                    }
                    _ => (base_victim, None),
                };
                if victim != base_victim {
                    self.breakdown.overrides += 1;
                    res.overridden = true;
                } else if cleansed.is_some() {
                    self.breakdown.cleanses += 1;
                } else {
                    self.breakdown.lru_evictions += 1;
                }
                self.evict(base + victim, &mut res, wrq_free);
                if let Some(c) = cleansed {
                    self.cleanse(base + c, &mut res);
                }
                victim
            }
        };
        self.install(base, way, line, kind, stream);
        if self.policy == PolicyChoice::EagerWriteback && res.victim.is_some() {
            self.eager(base, &mut res);
        }
        res
    }

    fn touch(&mut self, base: usize, w: usize) {
        promote(&mut self.lines[base..base + self.ways], w);
        let l = &mut self.lines[base + w];
        l.rrpv = 0;
        if !l.reused {
            l.reused = true;
            if let Some(c) = self.ship.get_mut(l.signature as usize) {
                *c = (*c + 1).min(SHIP_COUNTER_MAX);
            }
        }
    }

    fn make_dirty(&mut self, i: usize) {
        let l = &mut self.lines[i];
        if !l.dirty {
            l.dirty = true;
            let key = RowKey::of(l);
            let line = l.line;
            if let Some(idx) = &mut self.dirty_rows {
                idx.insert(key, line);
            }
        }
    }

    fn mark(&mut self, i: usize) {
        if self.policy.uses_tracker() {
            let l = &self.lines[i];
            self.tracker.mark(l.channel as u32, l.bank as usize);
        }
    }

    fn evict(&mut self, i: usize, res: &mut AccessResult, wrq_free: &dyn Fn(u8, u32) -> usize) {
        let l = self.lines[i];
        res.victim = Some((l.addr(), l.dirty));
        if !l.reused {
            if let Some(c) = self.ship.get_mut(l.signature as usize) {
                *c = c.saturating_sub(1);
            }
        }
        self.lines[i].valid = false;
        self.lines[i].dirty = false;
        if !l.dirty {
            self.counters.clean_evictions += 1;
            return;
        }
        self.counters.dirty_evictions += 1;
        res.writebacks.push(Writeback { addr: l.addr(), cause: WritebackCause::Eviction });
        if self.policy.uses_tracker() {
            self.tracker.mark(l.channel as u32, l.bank as usize);
        }
        if let Some(idx) = &mut self.dirty_rows {
            let key = RowKey::of(&l);
            idx.remove(key, l.line);
            let banks_per_sc = self.mapping.geometry().banks_per_subchannel();
            let budget = wrq_free(l.channel, l.bank as u32 / banks_per_sc).saturating_sub(1);
            self.counters.vwq_probes += 1;
            self.counters.vwq_lines_examined += idx.lines(key).len() as u64;
            for m in vwq_same_row(idx, key, l.line, budget) {
                let j = self.find(m).expect("dirty-row index out of sync with cache");
                self.cleanse(j, res);
            }
        }
    }

    fn cleanse(&mut self, i: usize, res: &mut AccessResult) {
        debug_assert!(self.lines[i].valid && self.lines[i].dirty);
        self.lines[i].dirty = false;
        let l = self.lines[i];
        if let Some(idx) = &mut self.dirty_rows {
            idx.remove(RowKey::of(&l), l.line);
        }
        self.counters.cleanses += 1;
        res.writebacks.push(Writeback { addr: l.addr(), cause: WritebackCause::Cleanse });
        res.cleansed.push(l.addr());
        self.mark(i);
    }

    fn eager(&mut self, base: usize, res: &mut AccessResult) {
        scan_order(&self.lines[base..base + self.ways], self.cfg.replacement, &mut self.order);
        if let Some(w) = eager_writeback_pick(&self.lines[base..base + self.ways], &self.order) {
            self.cleanse(base + w, res);
        }
    }

    fn install(&mut self, base: usize, way: usize, line: u64, kind: AccessKind, stream: u8) {
        let coord = self.mapping.map_address(line << LINE_OFFSET_BITS);
        let geom = self.mapping.geometry();
        let signature = ship_signature(line, stream);
        let rrpv = match self.cfg.replacement {
            Replacement::Lru => RRPV_MAX,
            Replacement::Srrip => SRRIP_INSERT,
            Replacement::Ship => {
                if self.ship[signature as usize] == 0 {
                    RRPV_MAX
                } else {
                    SRRIP_INSERT
                }
            }
        };
        let i = base + way;
        let lru = self.lines[i].lru;
        self.lines[i] = CacheLine {
            line,
            valid: true,
            dirty: false,
            lru,
            rrpv,
            reused: false,
            signature,
            channel: coord.channel as u8,
            bank: geom.flat_bank_id(&coord) as u16,
            row: coord.row,
        };
        promote(&mut self.lines[base..base + self.ways], way);
        if kind == AccessKind::Write {
            self.make_dirty(i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DramGeometry;
    use crate::policy::TrackerReset;

    fn small(repl: Replacement, policy: PolicyChoice) -> Cache {
        let geom = DramGeometry::default();
        let cfg = CacheConfig { capacity: 4 * 4 * 64, ways: 4, replacement: repl, ..Default::default() };
        let tracker = BlpTracker::new(&geom, TrackerReset::PerSubchannel);
        Cache::new(cfg, AddressMapping::zen_pbpl(geom).unwrap(), policy, tracker).unwrap()
    }

    fn no_room(_: u8, _: u32) -> usize {
        usize::MAX
    }

    // addresses mapping to set 0 of a 4-set cache
    fn a(i: u64) -> u64 {
        i * 4 * 64
    }

    #[test]
    fn lru_hit_promotes_and_evicts_bottom() {
        let mut c = small(Replacement::Lru, PolicyChoice::Baseline);
        for i in 0..4 {
            assert!(!c.access(a(i), AccessKind::Read, 0, &no_room).hit);
        }
        assert!(c.access(a(0), AccessKind::Read, 0, &no_room).hit);
        let r = c.access(a(4), AccessKind::Read, 0, &no_room);
        assert_eq!(r.victim, Some((a(1), false)));
        assert!(r.writebacks.is_empty());
    }

    #[test]
    fn dirty_eviction_writes_back() {
        let mut c = small(Replacement::Lru, PolicyChoice::Baseline);
        c.access(a(0), AccessKind::Write, 0, &no_room);
        for i in 1..5 {
            c.access(a(i), AccessKind::Read, 0, &no_room);
        }
        assert_eq!(c.counters().dirty_evictions, 1);
    }

    #[test]
    fn rrip_ages_until_victim() {
        let mut set = vec![CacheLine { valid: true, ..Default::default() }; 4];
        for (l, r) in set.iter_mut().zip([2, 1, 0, 1]) {
            l.rrpv = r;
        }
        assert_eq!(base_select_victim(&mut set, Replacement::Srrip), 0);
        assert_eq!(set.iter().map(|l| l.rrpv).collect::<Vec<_>>(), vec![3, 2, 1, 2]);
        for (l, r) in set.iter_mut().zip([2, 3, 1, 3]) {
            l.rrpv = r;
        }
        assert_eq!(base_select_victim(&mut set, Replacement::Srrip), 1);
    }

    #[test]
    fn scan_order_by_rrpv_then_way() {
        let mut set = vec![CacheLine::default(); 4];
        for (l, r) in set.iter_mut().zip([1, 3, 1, 3]) {
            l.rrpv = r;
        }
        let mut o = Vec::new();
        scan_order(&set, Replacement::Srrip, &mut o);
        assert_eq!(o, vec![1, 3, 0, 2]);
    }

    #[test]
    fn eager_writeback_cleans_lru_line() {
        let mut c = small(Replacement::Lru, PolicyChoice::EagerWriteback);
        c.access(a(0), AccessKind::Write, 0, &no_room);
        for i in 1..4 {
            c.access(a(i), AccessKind::Read, 0, &no_room);
        }
        let r = c.access(a(3), AccessKind::Read, 0, &no_room);
        assert_eq!(r.cleansed, vec![a(0)]);
        assert!(c.lookup(a(0)).is_some_and(|l| !l.dirty));
        let r = c.access(a(3), AccessKind::Read, 0, &no_room);
        assert!(r.cleansed.is_empty());
        assert_eq!(c.tracker().queries(), 0);
    }
}
