//! Per-channel memory controller: read queue, per-sub-channel write queues,
//! FR-FCFS scheduling with read priority, watermark write drains and the
//! adaptive open-page policy.

use crate::error::{ConfigError, SimError};
use crate::geometry::{DramCoord, DramGeometry};
use crate::stats::{CommandLog, CommandRecord, EpisodeRecord, EpisodeTrigger, W2wStats};
use crate::timing::{commit_ideal_write, earliest_ideal_write, Command, DramSubchannel, TimingParams};
use crate::{AccessKind, Cycle};

/// Cycles without any issued command, while requests wait, before the
/// controller declares a livelock.
pub const WATCHDOG_CYCLES: Cycle = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControllerConfig {
    /// Read queue entries per channel.
    pub rq_capacity: usize,
    /// Write queue entries per sub-channel.
    pub wrq_capacity: usize,
    pub low_watermark: usize,
    pub high_watermark: usize,
    /// Drain writes whenever a sub-channel has no queued reads.
    pub opportunistic_drain: bool,
    /// Issue drain writes one burst apart, ignoring bank timing.
    pub ideal_write: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            rq_capacity: 64,
            wrq_capacity: 48,
            low_watermark: 8,
            high_watermark: 40,
            opportunistic_drain: true,
            ideal_write: false,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.rq_capacity == 0 {
            return Err(ConfigError::invalid("mc.rq_capacity", self.rq_capacity, "must be >= 1"));
        }
        if !(0 < self.low_watermark
            && self.low_watermark < self.high_watermark
            && self.high_watermark <= self.wrq_capacity)
        {
            return Err(ConfigError::inconsistent(
                "mc.high_watermark",
                format!(
                    "need 0 < low ({}) < high ({}) <= wrq_capacity ({})",
                    self.low_watermark, self.high_watermark, self.wrq_capacity
                ),
            ));
        }
        Ok(())
    }
}

/// Watermarks for a write queue of `capacity` entries, keeping the default
/// 8/40-of-48 proportions: low = capacity/6 rounded, high = capacity - low.
pub fn scaled_watermarks(capacity: usize) -> (usize, usize) {
    let low = ((capacity + 3) / 6).max(1);
    (low, capacity.saturating_sub(low).max(low + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Request {
    pub id: u64,
    pub addr: u64,
    pub coord: DramCoord,
    pub kind: AccessKind,
    pub arrival: Cycle,
    pub source_id: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Accepted,
    /// Write to an address already in the write queue.
    Merged,
    /// Read satisfied from the write queue.
    Forwarded,
    Backpressure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Read,
    Write,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PageDecision {
    KeepOpen,
    Precharge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReadCompletion {
    pub id: u64,
    pub addr: u64,
    pub ready_at: Cycle,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ControllerCounters {
    pub reads_issued: u64,
    pub writes_issued: u64,
    pub activates: u64,
    pub precharges: u64,
    pub forwarded_reads: u64,
    pub write_merges: u64,
}

/// Write-drain bookkeeping of one sub-channel.
#[derive(Clone, Debug)]
pub struct DrainState {
    pub mode: Mode,
    pub episode_id: u64,
    pub banks_written: Vec<bool>,
    pub unique_banks: u32,
    pub writes_this_episode: u64,
    trigger: EpisodeTrigger,
    started_at: Cycle,
    entry_occupancy: u32,
    last_write_at: Option<Cycle>,
    w2w_sum: u64,
    w2w_count: u64,
}

impl DrainState {
    fn new(banks: usize) -> Self {
        DrainState {
            mode: Mode::Read,
            episode_id: 0,
            banks_written: vec![false; banks],
            unique_banks: 0,
            writes_this_episode: 0,
            trigger: EpisodeTrigger::Watermark,
            started_at: 0,
            entry_occupancy: 0,
            last_write_at: None,
            w2w_sum: 0,
            w2w_count: 0,
        }
    }
}

struct Sub {
    dram: DramSubchannel,
    wrq: Vec<Request>,
    reads: usize,
    drain: DrainState,
    dirty: bool,
    next_wake: Option<Cycle>,
    /// Scratch: bank has a queued request to its open row (any queue).
    row_wanted: Vec<bool>,
    /// Scratch: bank has a request in the active queue hitting its open row.
    active_hit: Vec<bool>,
}

#[derive(Clone, Copy)]
struct Candidate {
    cmd: Command,
    coord: DramCoord,
    queue_index: Option<usize>,
    rank: (u8, usize),
}

pub struct MemoryController {
    channel: u32,
    geom: DramGeometry,
    tp: TimingParams,
    cfg: ControllerConfig,
    subs: Vec<Sub>,
    rq: Vec<Request>,
    completions: Vec<ReadCompletion>,
    episodes: Vec<EpisodeRecord>,
    next_episode_id: u64,
    write_mode_cycles: Cycle,
    w2w: W2wStats,
    log: CommandLog,
    flushing: bool,
    last_progress: Cycle,
    counters: ControllerCounters,
}

impl MemoryController {
    pub fn new(channel: u32, geom: &DramGeometry, tp: TimingParams, cfg: ControllerConfig, log: CommandLog) -> Self {
        let banks = geom.banks_per_subchannel() as usize;
        let subs = (0..geom.subchannels)
            .map(|_| Sub {
                dram: DramSubchannel::new(geom),
                wrq: Vec::with_capacity(cfg.wrq_capacity),
                reads: 0,
                drain: DrainState::new(banks),
                dirty: false,
                next_wake: None,
                row_wanted: vec![false; banks],
                active_hit: vec![false; banks],
            })
            .collect();
        MemoryController {
            channel,
            geom: geom.clone(),
            tp,
            rq: Vec::with_capacity(cfg.rq_capacity),
            cfg,
            subs,
            completions: Vec::new(),
            episodes: Vec::new(),
            next_episode_id: 0,
            write_mode_cycles: 0,
            w2w: W2wStats::default(),
            log,
            flushing: false,
            last_progress: 0,
            counters: ControllerCounters::default(),
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn mode(&self, subchannel: u32) -> Mode {
        self.subs[subchannel as usize].drain.mode
    }

    pub fn drain_state(&self, subchannel: u32) -> &DrainState {
        &self.subs[subchannel as usize].drain
    }

    pub fn wrq_len(&self, subchannel: u32) -> usize {
        self.subs[subchannel as usize].wrq.len()
    }

    pub fn wrq_free(&self, subchannel: u32) -> usize {
        self.cfg.wrq_capacity - self.wrq_len(subchannel)
    }

    pub fn rq_len(&self) -> usize {
        self.rq.len()
    }

    pub fn rq_full(&self) -> bool {
        self.rq.len() >= self.cfg.rq_capacity
    }

    pub fn is_idle(&self) -> bool {
        self.rq.is_empty() && self.subs.iter().all(|s| s.wrq.is_empty())
    }

    pub fn dram(&self, subchannel: u32) -> &DramSubchannel {
        &self.subs[subchannel as usize].dram
    }

    pub fn counters(&self) -> ControllerCounters {
        self.counters
    }

    pub fn episodes(&self) -> &[EpisodeRecord] {
        &self.episodes
    }

    pub fn w2w(&self) -> &W2wStats {
        &self.w2w
    }

    pub fn write_mode_cycles(&self) -> Cycle {
        self.write_mode_cycles
    }

    pub fn log(&self) -> &CommandLog {
        &self.log
    }

    pub fn log_mut(&mut self) -> &mut CommandLog {
        &mut self.log
    }

    /// Drain every remaining write even without reads (end of workload).
    pub fn set_flush(&mut self, on: bool) {
        self.flushing = on;
        for s in &mut self.subs {
            s.dirty = true;
        }
    }

    pub fn enqueue(&mut self, req: Request) -> EnqueueOutcome {
        if self.is_idle() {
            self.last_progress = self.last_progress.max(req.arrival);
        }
        let s = req.coord.subchannel as usize;
        let sub = &mut self.subs[s];
        match req.kind {
            AccessKind::Read => {
                if sub.wrq.iter().any(|w| w.addr == req.addr) {
                    self.counters.forwarded_reads += 1;
                    return EnqueueOutcome::Forwarded;
                }
                if self.rq.len() >= self.cfg.rq_capacity {
                    return EnqueueOutcome::Backpressure;
                }
                self.rq.push(req);
                sub.reads += 1;
            }
            AccessKind::Write => {
                if sub.wrq.iter().any(|w| w.addr == req.addr) {
                    self.counters.write_merges += 1;
                    return EnqueueOutcome::Merged;
                }
                if sub.wrq.len() >= self.cfg.wrq_capacity {
                    return EnqueueOutcome::Backpressure;
                }
                sub.wrq.push(req);
            }
        }
        sub.dirty = true;
        EnqueueOutcome::Accepted
    }

    /// Earliest cycle at which `tick` can do something, if any.
    pub fn next_event(&self) -> Option<Cycle> {
        self.subs.iter().filter_map(|s| if s.dirty { Some(0) } else { s.next_wake }).min()
    }

    pub fn take_completions(&mut self, out: &mut Vec<ReadCompletion>) {
        out.append(&mut self.completions);
    }

    /// Would the page policy close `coord`'s row after a column command?
    pub fn page_policy_after(&self, coord: &DramCoord) -> PageDecision {
        let s = &self.subs[coord.subchannel as usize];
        let same = |r: &Request| {
            r.coord.subchannel == coord.subchannel
                && r.coord.bankgroup == coord.bankgroup
                && r.coord.bank == coord.bank
                && r.coord.row == coord.row
        };
        if self.rq.iter().any(same) || s.wrq.iter().any(same) {
            PageDecision::KeepOpen
        } else {
            PageDecision::Precharge
        }
    }

    /// Issue every command that is legal at `now`.
    pub fn tick(&mut self, now: Cycle) -> Result<(), SimError> {
        if self.is_idle() {
            self.last_progress = now;
        } else if now > self.last_progress + WATCHDOG_CYCLES {
            return Err(SimError::Contract(format!(
                "channel {}: no command issued for {} cycles with {} reads and {} writes queued",
                self.channel,
                now - self.last_progress,
                self.rq.len(),
                self.subs.iter().map(|s| s.wrq.len()).sum::<usize>()
            )));
        }
        for s in 0..self.subs.len() {
            let sub = &self.subs[s];
            if sub.dirty || sub.next_wake.is_some_and(|t| t <= now) {
                self.tick_sub(s, now)?;
            }
        }
        Ok(())
    }

    fn tick_sub(&mut self, s: usize, now: Cycle) -> Result<(), SimError> {
        self.subs[s].dirty = false;
        self.update_mode(s, now);
        loop {
            let (ready, next) = self.best_candidate(s, now)?;
            match ready {
                Some(c) => {
                    self.issue(s, c, now)?;
                    self.last_progress = now;
                    self.update_mode(s, now);
                }
                None => {
                    let sub = &mut self.subs[s];
                    let must_move = match sub.drain.mode {
                        Mode::Read => sub.reads > 0,
                        Mode::Write => !sub.wrq.is_empty(),
                    };
                    if must_move && next.is_none() {
                        return Err(SimError::Contract(format!(
                            "channel {} sub-channel {s}: requests queued but no schedulable command",
                            self.channel
                        )));
                    }
                    sub.next_wake = next;
                    return Ok(());
                }
            }
        }
    }

    fn update_mode(&mut self, s: usize, now: Cycle) {
        let idle_drain = self.cfg.opportunistic_drain || self.flushing;
        let (low, high) = (self.cfg.low_watermark, self.cfg.high_watermark);
        let sub = &mut self.subs[s];
        let occ = sub.wrq.len();
        let has_reads = sub.reads > 0;
        match sub.drain.mode {
            Mode::Read => {
                let trigger = if occ >= high {
                    EpisodeTrigger::Watermark
                } else if idle_drain && !has_reads && occ > 0 {
                    if self.cfg.opportunistic_drain {
                        EpisodeTrigger::Idle
                    } else {
                        EpisodeTrigger::Flush
                    }
                } else {
                    return;
                };
                let d = &mut sub.drain;
                d.mode = Mode::Write;
                d.episode_id = self.next_episode_id;
                self.next_episode_id += 1;
                d.banks_written.iter_mut().for_each(|b| *b = false);
                d.unique_banks = 0;
                d.writes_this_episode = 0;
                d.trigger = trigger;
                d.started_at = now;
                d.entry_occupancy = occ as u32;
                d.last_write_at = None;
                d.w2w_sum = 0;
                d.w2w_count = 0;
            }
            Mode::Write => {
                if occ == 0 || (occ <= low && (has_reads || !idle_drain)) {
                    self.close_episode(s, now);
                }
            }
        }
    }

    fn close_episode(&mut self, s: usize, now: Cycle) {
        let sub = &mut self.subs[s];
        let d = &mut sub.drain;
        d.mode = Mode::Read;
        self.write_mode_cycles += now - d.started_at;
        self.episodes.push(EpisodeRecord {
            id: d.episode_id,
            channel: self.channel,
            subchannel: s as u32,
            trigger: d.trigger,
            start: d.started_at,
            end: now,
            writes: d.writes_this_episode,
            unique_banks: d.unique_banks,
            entry_occupancy: d.entry_occupancy,
            exit_occupancy: sub.wrq.len() as u32,
            w2w_sum: d.w2w_sum,
            w2w_count: d.w2w_count,
        });
    }

    /// Close any open episode at `now` (end of run).
    pub fn finalize(&mut self, now: Cycle) -> Result<(), SimError> {
        for s in 0..self.subs.len() {
            if self.subs[s].drain.mode == Mode::Write {
                self.close_episode(s, now);
            }
        }
        self.log.flush()?;
        Ok(())
    }

    fn next_command(sub: &Sub, coord: &DramCoord) -> (Command, usize) {
        let b = sub.dram.bank_index(coord);
        let cmd = match sub.dram.banks[b].open_row {
            None => Command::Act,
            Some(r) if r == coord.row => {
                if sub.drain.mode == Mode::Write {
                    Command::Wr
                } else {
                    Command::Rd
                }
            }
            Some(_) => Command::Pre,
        };
        (cmd, b)
    }

    /// Best command issuable at `now`, and the earliest future cycle at
    /// which some other candidate becomes legal.
    fn best_candidate(&mut self, s: usize, now: Cycle) -> Result<(Option<Candidate>, Option<Cycle>), SimError> {
        let ideal = self.cfg.ideal_write;
        let sub = &mut self.subs[s];
        let write_mode = sub.drain.mode == Mode::Write;
        sub.row_wanted.iter_mut().for_each(|b| *b = false);
        sub.active_hit.iter_mut().for_each(|b| *b = false);
        let sc = s as u32;
        for (r, active) in self
            .rq
            .iter()
            .filter(|r| r.coord.subchannel == sc)
            .map(|r| (r, !write_mode))
            .chain(sub.wrq.iter().map(|r| (r, write_mode)))
        {
            let b = sub.dram.bank_index(&r.coord);
            if sub.dram.banks[b].open_row == Some(r.coord.row) {
                sub.row_wanted[b] = true;
                sub.active_hit[b] |= active;
            }
        }

        let mut best: Option<Candidate> = None;
        let mut next: Option<Cycle> = None;
        let mut consider = |c: Candidate, at: Cycle| {
            if at == now {
                if best.is_none_or(|b| c.rank < b.rank) {
                    best = Some(c);
                }
            } else {
                next = Some(next.map_or(at, |n: Cycle| n.min(at)));
            }
        };

        if write_mode {
            for (i, e) in sub.wrq.iter().enumerate() {
                let c = |cmd| Candidate { cmd, coord: e.coord, queue_index: Some(i), rank: (0, i) };
                if ideal {
                    consider(c(Command::Wr), earliest_ideal_write(now, &sub.dram.bus, &self.tp));
                    continue;
                }
                let (cmd, b) = Self::next_command(sub, &e.coord);
                if cmd == Command::Pre && sub.active_hit[b] {
                    continue;
                }
                consider(c(cmd), sub.dram.earliest(cmd, &e.coord, now, &self.tp)?);
            }
        } else {
            for (i, e) in self.rq.iter().enumerate().filter(|(_, r)| r.coord.subchannel == sc) {
                let (cmd, b) = Self::next_command(sub, &e.coord);
                if cmd == Command::Pre && sub.active_hit[b] {
                    continue;
                }
                let class = if cmd == Command::Rd { 0 } else { 1 };
                let c = Candidate { cmd, coord: e.coord, queue_index: Some(i), rank: (class, i) };
                consider(c, sub.dram.earliest(cmd, &e.coord, now, &self.tp)?);
            }
        }

        for (b, bank) in sub.dram.banks.iter().enumerate() {
            let Some(row) = bank.open_row else { continue };
            if sub.row_wanted[b] {
                continue;
            }
            let (bankgroup, ba) = (b as u32 / self.geom.banks_per_bankgroup, b as u32 % self.geom.banks_per_bankgroup);
            let coord = DramCoord::new(self.channel, sc, bankgroup, ba, row, 0);
            let c = Candidate { cmd: Command::Pre, coord, queue_index: None, rank: (2, b) };
            consider(c, bank.pre_ok_at.max(now));
        }
        Ok((best, next))
    }

    fn issue(&mut self, s: usize, c: Candidate, now: Cycle) -> Result<(), SimError> {
        let ideal = self.cfg.ideal_write;
        let sub = &mut self.subs[s];
        let mut episode = None;
        let mut ideal_cmd = false;
        match c.cmd {
            Command::Act => {
                sub.dram.commit(c.cmd, &c.coord, now, &self.tp);
                self.counters.activates += 1;
            }
            Command::Pre => {
                sub.dram.commit(c.cmd, &c.coord, now, &self.tp);
                self.counters.precharges += 1;
            }
            Command::Rd => {
                let r = self.rq.remove(c.queue_index.expect("read without queue entry"));
                sub.reads -= 1;
                sub.dram.commit(c.cmd, &c.coord, now, &self.tp);
                self.completions.push(ReadCompletion { id: r.id, addr: r.addr, ready_at: now + self.tp.cl + self.tp.burst });
                self.counters.reads_issued += 1;
            }
            Command::Wr => {
                if sub.drain.mode != Mode::Write {
                    return Err(SimError::Contract(format!("WR to {} outside write mode", c.coord)));
                }
                sub.wrq.remove(c.queue_index.expect("write without queue entry"));
                if ideal {
                    commit_ideal_write(now, &mut sub.dram.bus, &self.tp);
                    ideal_cmd = true;
                } else {
                    sub.dram.commit(c.cmd, &c.coord, now, &self.tp);
                }
                let b = sub.dram.bank_index(&c.coord);
                let d = &mut sub.drain;
                if !d.banks_written[b] {
                    d.banks_written[b] = true;
                    d.unique_banks += 1;
                }
                d.writes_this_episode += 1;
                if let Some(t) = d.last_write_at {
                    let delta = now - t;
                    d.w2w_sum += delta;
                    d.w2w_count += 1;
                    self.w2w.record(delta);
                }
                d.last_write_at = Some(now);
                episode = Some(d.episode_id);
                self.counters.writes_issued += 1;
            }
        }
        self.log.push(CommandRecord { cycle: now, cmd: c.cmd, channel: self.channel, coord: c.coord, episode, ideal: ideal_cmd })?;
        Ok(())
    }
}
