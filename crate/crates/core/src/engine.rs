//! Event-skipping cycle loop: frontend → LLC → memory controllers → DRAM.
//!
//! Each iteration handles one cycle: due fills, pending writebacks, at most
//! one frontend access, then every controller issues what is legal. The
//! clock then jumps to the earliest cycle at which anything can happen.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::path::PathBuf;

use crate::cache::Cache;
use crate::config::RunConfig;
use crate::controller::{EnqueueOutcome, MemoryController, ReadCompletion, Request};
use crate::error::SimError;
use crate::geometry::{AddressMapping, LINE_OFFSET_BITS};
use crate::policy::PolicyChoice;
use crate::stats::{CommandLog, CommandRecord, StatsReport, W2wStats};
use crate::workload::{generate, read_trace_file, Frontend, TraceRecord, WorkloadKind};
use crate::{AccessKind, Cycle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    /// Miss data for a line arrives.
    Fill(u64),
    /// Hit data returns to a stream.
    ReadDone(u8),
}

struct Mshr {
    issued_at: Cycle,
    waiters: Vec<u8>,
}

pub struct Engine {
    cfg: RunConfig,
    mapping: AddressMapping,
    cache: Cache,
    mcs: Vec<MemoryController>,
    frontend: Frontend,
    now: Cycle,
    events: BinaryHeap<Reverse<(Cycle, u64, Event)>>,
    seq: u64,
    mshrs: HashMap<u64, Mshr>,
    writeback_buffer: VecDeque<u64>,
    next_request_id: u64,
    flushing: bool,
    stall_cycles: Cycle,
    completions: Vec<ReadCompletion>,
}

impl Engine {
    /// Build an engine for `cfg`, loading or generating its workload.
    pub fn new(cfg: RunConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let source: Box<dyn Iterator<Item = TraceRecord> + Send> = match cfg.workload.kind {
            WorkloadKind::Trace => {
                let path = cfg.trace.clone().expect("validated");
                Box::new(read_trace_file(&path)?.into_iter())
            }
            _ => generate(&cfg.workload),
        };
        Self::with_source(cfg, source)
    }

    /// Build an engine that replays `records` instead of `cfg`'s workload.
    pub fn from_records(cfg: RunConfig, records: Vec<TraceRecord>) -> Result<Self, SimError> {
        let mut cfg = cfg;
        if cfg.workload.kind == WorkloadKind::Trace {
            cfg.trace = None;
            cfg.workload.kind = WorkloadKind::UniformRandom;
        }
        cfg.validate()?;
        Self::with_source(cfg, Box::new(records.into_iter()))
    }

    fn with_source(cfg: RunConfig, source: Box<dyn Iterator<Item = TraceRecord> + Send>) -> Result<Self, SimError> {
        let mapping = cfg.mapping()?;
        let cache = Cache::new(cfg.cache.clone(), mapping.clone(), cfg.policy, cfg.tracker())?;
        let tp = cfg.effective_timing();
        let mut mcs = Vec::new();
        for ch in 0..cfg.geom.channels {
            let mut log = CommandLog::new(cfg.log_capacity);
            if let Some(p) = &cfg.log_commands {
                log.spill_to(&channel_log_path(p, ch, cfg.geom.channels))?;
            }
            mcs.push(MemoryController::new(ch, &cfg.geom, tp.clone(), cfg.controller_config(), log));
        }
        let frontend = Frontend::new(source, cfg.frontend.clone());
        Ok(Engine {
            mapping,
            cache,
            mcs,
            frontend,
            now: 0,
            events: BinaryHeap::new(),
            seq: 0,
            mshrs: HashMap::new(),
            writeback_buffer: VecDeque::new(),
            next_request_id: 0,
            flushing: false,
            stall_cycles: 0,
            completions: Vec::new(),
            cfg,
        })
    }

    /// Keep every DRAM command in memory for [`take_log`](Self::take_log).
    pub fn keep_full_log(mut self) -> Self {
        for mc in &mut self.mcs {
            mc.log_mut().set_keep_all();
        }
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn now(&self) -> Cycle {
        self.now
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    pub fn controller(&self, channel: u32) -> &MemoryController {
        &self.mcs[channel as usize]
    }

    fn schedule(&mut self, at: Cycle, ev: Event) {
        self.seq += 1;
        self.events.push(Reverse((at, self.seq, ev)));
    }

    /// Run until the workload is exhausted and every queue has drained.
    pub fn run_to_end(&mut self) -> Result<(), SimError> {
        loop {
            self.process_events();
            self.drain_writebacks();
            let issued = self.frontend_step()?;
            self.tick_controllers()?;
            if !self.flushing && self.writeback_buffer.is_empty() && self.frontend.exhausted() {
                self.flushing = true;
                for mc in &mut self.mcs {
                    mc.set_flush(true);
                }
                self.tick_controllers()?;
            }
            if self.finished() {
                break;
            }
            let mut next = Cycle::MAX;
            if let Some(Reverse((t, _, _))) = self.events.peek() {
                next = next.min(*t);
            }
            for mc in &self.mcs {
                if let Some(t) = mc.next_event() {
                    next = next.min(t.max(self.now + 1));
                }
            }
            let can_issue = self.frontend_ready();
            if can_issue || (issued && !self.frontend.exhausted()) {
                next = next.min(self.now + 1);
            }
            if next == Cycle::MAX {
                return Err(SimError::Contract(format!(
                    "deadlock at cycle {}: {} misses outstanding, {} writebacks buffered, nothing scheduled",
                    self.now,
                    self.mshrs.len(),
                    self.writeback_buffer.len()
                )));
            }
            if !can_issue && !self.frontend.exhausted() {
                self.stall_cycles += next - self.now;
            }
            self.now = next;
        }
        for mc in &mut self.mcs {
            mc.finalize(self.now)?;
        }
        Ok(())
    }

    fn finished(&mut self) -> bool {
        self.flushing
            && self.events.is_empty()
            && self.mshrs.is_empty()
            && self.writeback_buffer.is_empty()
            && self.frontend.exhausted()
            && self.mcs.iter().all(MemoryController::is_idle)
    }

    fn process_events(&mut self) {
        while let Some(Reverse((t, _, ev))) = self.events.peek().copied() {
            if t > self.now {
                break;
            }
            self.events.pop();
            match ev {
                Event::Fill(line) => {
                    let m = self.mshrs.remove(&line).expect("fill without MSHR");
                    for s in m.waiters {
                        self.frontend.read_done(s);
                    }
                }
                Event::ReadDone(s) => self.frontend.read_done(s),
            }
        }
    }

    fn write_request(&mut self, addr: u64) -> Request {
        self.next_request_id += 1;
        Request {
            id: self.next_request_id,
            addr,
            coord: self.mapping.map_address(addr),
            kind: AccessKind::Write,
            arrival: self.now,
            source_id: 0,
        }
    }

    fn drain_writebacks(&mut self) {
        while let Some(&addr) = self.writeback_buffer.front() {
            let req = self.write_request(addr);
            if self.mcs[req.coord.channel as usize].enqueue(req) == EnqueueOutcome::Backpressure {
                break;
            }
            self.writeback_buffer.pop_front();
        }
    }

    fn tick_controllers(&mut self) -> Result<(), SimError> {
        for mc in &mut self.mcs {
            mc.tick(self.now)?;
            mc.take_completions(&mut self.completions);
        }
        let fill_delay = self.cfg.cache.fill_delay;
        for c in std::mem::take(&mut self.completions) {
            let line = c.id;
            let issued = self.mshrs.get(&line).expect("read completion without MSHR").issued_at;
            self.schedule(c.ready_at.max(issued + fill_delay), Event::Fill(line));
        }
        Ok(())
    }

    /// Would the head access be accepted right now?
    fn frontend_ready(&mut self) -> bool {
        if !self.writeback_buffer.is_empty() {
            return false;
        }
        match self.frontend.eligible() {
            Some((_, r)) => self.resources_for(&r),
            None => false,
        }
    }

    fn resources_for(&self, r: &TraceRecord) -> bool {
        if r.kind == AccessKind::Write {
            return true;
        }
        let addr = r.line_addr();
        let line = addr >> LINE_OFFSET_BITS;
        if self.cache.lookup(addr).is_some() || self.mshrs.contains_key(&line) {
            return true;
        }
        let ch = self.mapping.map_address(addr).channel as usize;
        self.mshrs.len() < self.cfg.cache.mshrs && !self.mcs[ch].rq_full()
    }

    fn frontend_step(&mut self) -> Result<bool, SimError> {
        if !self.writeback_buffer.is_empty() {
            return Ok(false);
        }
        let Some((slot, rec)) = self.frontend.eligible() else {
            return Ok(false);
        };
        if !self.resources_for(&rec) {
            return Ok(false);
        }
        self.frontend.commit(slot);
        let addr = rec.line_addr();
        let line = addr >> LINE_OFFSET_BITS;
        let mcs = &self.mcs;
        let res = self
            .cache
            .access(addr, rec.kind, rec.stream_id, &|ch, sc| mcs[ch as usize].wrq_free(sc));
        for wb in res.writebacks {
            if self.writeback_buffer.is_empty() {
                let req = self.write_request(wb.addr);
                if self.mcs[req.coord.channel as usize].enqueue(req) != EnqueueOutcome::Backpressure {
                    continue;
                }
            }
            self.writeback_buffer.push_back(wb.addr);
        }
        if rec.kind == AccessKind::Write {
            return Ok(true);
        }
        if let Some(m) = self.mshrs.get_mut(&line) {
            m.waiters.push(rec.stream_id);
        } else if res.hit {
            self.schedule(self.now + self.cfg.cache.hit_latency, Event::ReadDone(rec.stream_id));
        } else {
            self.mshrs.insert(line, Mshr { issued_at: self.now, waiters: vec![rec.stream_id] });
            let req = Request {
                id: line,
                addr,
                coord: self.mapping.map_address(addr),
                kind: AccessKind::Read,
                arrival: self.now,
                source_id: rec.stream_id,
            };
            match self.mcs[req.coord.channel as usize].enqueue(req) {
                EnqueueOutcome::Accepted => {}
                EnqueueOutcome::Forwarded => {
                    self.schedule(self.now + self.cfg.cache.fill_delay, Event::Fill(line));
                }
                other => {
                    return Err(SimError::Contract(format!("read miss enqueue returned {other:?}")));
                }
            }
        }
        Ok(true)
    }

    /// Every retained DRAM command of all channels, in issue order.
    pub fn take_log(&mut self) -> Vec<CommandRecord> {
        let mut all: Vec<CommandRecord> = self.mcs.iter_mut().flat_map(|m| m.log_mut().take_all()).collect();
        all.sort_by_key(|r| r.cycle);
        all
    }

    pub fn report(&self) -> StatsReport {
        let cc = self.cache.counters();
        let mut episodes: Vec<_> = self.mcs.iter().flat_map(|m| m.episodes().iter().cloned()).collect();
        episodes.sort_by_key(|e| (e.start, e.channel, e.subchannel));
        let mut w2w = W2wStats::default();
        for m in &self.mcs {
            w2w.merge(m.w2w());
        }
        let sum = |f: fn(&MemoryController) -> u64| self.mcs.iter().map(f).sum::<u64>();
        StatsReport {
            policy: policy_label(self.cfg.policy, self.cfg.ideal_write),
            workload: self.cfg.workload_name(),
            seed: self.cfg.workload.seed,
            total_cycles: self.now,
            reads: cc.reads,
            writes: cc.writes,
            hits: cc.hits,
            misses: cc.misses,
            writebacks: cc.dirty_evictions + cc.cleanses,
            dirty_evictions: cc.dirty_evictions,
            cleanses: cc.cleanses,
            dram_reads: sum(|m| m.counters().reads_issued),
            dram_writes: sum(|m| m.counters().writes_issued),
            forwarded_reads: sum(|m| m.counters().forwarded_reads),
            wrq_merges: sum(|m| m.counters().write_merges),
            episodes,
            write_mode_cycles: sum(MemoryController::write_mode_cycles),
            subchannels: self.cfg.geom.channels * self.cfg.geom.subchannels,
            w2w,
            breakdown: self.cache.breakdown(),
            tracker_queries: self.cache.tracker().queries(),
            vwq_lines_scanned: cc.vwq_lines_examined,
            frontend_stall_cycles: self.stall_cycles,
            dirty_resident: self.cache.dirty_resident(),
        }
    }

    pub fn run(mut self) -> Result<StatsReport, SimError> {
        self.run_to_end()?;
        Ok(self.report())
    }
}

/// Name of a policy in reports; ideal-write runs are labelled apart.
pub fn policy_label(policy: PolicyChoice, ideal: bool) -> String {
    match (policy, ideal) {
        (_, false) => policy.name().to_string(),
        (PolicyChoice::Baseline, true) => "ideal".to_string(),
        (p, true) => format!("{}+ideal", p.name()),
    }
}

fn channel_log_path(base: &std::path::Path, ch: u32, channels: u32) -> PathBuf {
    if channels == 1 {
        return base.to_path_buf();
    }
    let mut s = base.as_os_str().to_owned();
    s.push(format!(".ch{ch}"));
    PathBuf::from(s)
}

/// Validate, build and run `cfg`.
pub fn run(cfg: &RunConfig) -> Result<StatsReport, SimError> {
    Engine::new(cfg.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        let mut c = RunConfig::default();
        c.cache.capacity = 64 << 10;
        c.workload.footprint = 1 << 20;
        c.workload.length = 20_000;
        c
    }

    #[test]
    fn empty_trace_runs_zero_cycles() {
        let r = Engine::from_records(small(), vec![]).unwrap().run().unwrap();
        assert_eq!((r.total_cycles, r.accesses(), r.dram_writes), (0, 0, 0));
    }

    #[test]
    fn all_hits_issue_one_per_cycle() {
        let recs: Vec<_> = (0..1000).map(|i| TraceRecord::read((i % 4) * 64, 0)).collect();
        let r = Engine::from_records(small(), recs).unwrap().run().unwrap();
        assert_eq!(r.misses, 4);
        assert!(r.total_cycles < 1200, "{}", r.total_cycles);
    }

    #[test]
    fn deterministic() {
        let a = run(&small()).unwrap();
        let b = run(&small()).unwrap();
        assert_eq!(a.csv_row(None, ""), b.csv_row(None, ""));
    }

    #[test]
    fn writes_drain_and_account() {
        let r = run(&small()).unwrap();
        assert_eq!(r.dram_writes + r.wrq_merges, r.writebacks);
        let spans: u64 = r.episodes.iter().map(|e| e.span()).sum();
        assert_eq!(spans, r.write_mode_cycles);
        assert!(r.write_mode_fraction() <= 1.0);
    }
}
