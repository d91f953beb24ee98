//! Measurement layer: command log, drain episodes, write-to-write delays,
//! and the per-run [`StatsReport`].

use std::collections::{BTreeMap, VecDeque};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::geometry::DramCoord;
use crate::policy::DecisionBreakdown;
use crate::timing::{cycles_to_ns, Command};
use crate::Cycle;

/// One issued DRAM command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommandRecord {
    pub cycle: Cycle,
    pub cmd: Command,
    pub channel: u32,
    pub coord: DramCoord,
    /// Drain episode of a WR issued in write mode.
    pub episode: Option<u64>,
    /// Issued under ideal-write timing (bank constraints bypassed).
    pub ideal: bool,
}

impl CommandRecord {
    fn to_line(self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.cycle,
            self.cmd.name(),
            self.channel,
            self.coord.subchannel,
            self.coord.bankgroup,
            self.coord.bank,
            self.coord.row,
            self.coord.column,
            self.episode.map_or(String::from("-"), |e| e.to_string()),
            u8::from(self.ideal)
        )
    }
}

/// Ring-buffered command log with optional full retention and spill file.
pub struct CommandLog {
    ring: VecDeque<CommandRecord>,
    capacity: usize,
    keep_all: bool,
    all: Vec<CommandRecord>,
    spill: Option<BufWriter<File>>,
    total: u64,
}

impl CommandLog {
    pub fn new(capacity: usize) -> Self {
        CommandLog {
            ring: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity,
            keep_all: false,
            all: Vec::new(),
            spill: None,
            total: 0,
        }
    }

    /// Retain every record in memory (used by oracle cross-checks).
    pub fn keep_all(mut self) -> Self {
        self.keep_all = true;
        self
    }

    pub fn set_keep_all(&mut self) {
        self.keep_all = true;
    }

    pub fn spill_to(&mut self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "cycle,cmd,channel,sc,bg,ba,row,col,episode,ideal")?;
        self.spill = Some(w);
        Ok(())
    }

    pub fn push(&mut self, rec: CommandRecord) -> io::Result<()> {
        self.total += 1;
        if self.capacity > 0 {
            if self.ring.len() == self.capacity {
                self.ring.pop_front();
            }
            self.ring.push_back(rec);
        }
        if self.keep_all {
            self.all.push(rec);
        }
        if let Some(w) = &mut self.spill {
            writeln!(w, "{}", rec.to_line())?;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        if let Some(w) = &mut self.spill {
            w.flush()?;
        }
        Ok(())
    }

    /// Most recent records (the ring).
    pub fn recent(&self) -> impl Iterator<Item = &CommandRecord> {
        self.ring.iter()
    }

    /// Every record, when constructed with [`keep_all`](Self::keep_all).
    pub fn all(&self) -> &[CommandRecord] {
        &self.all
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn take_all(&mut self) -> Vec<CommandRecord> {
        std::mem::take(&mut self.all)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EpisodeTrigger {
    /// WRQ occupancy reached the high watermark.
    Watermark,
    /// Opportunistic drain: no reads queued for the sub-channel.
    Idle,
    /// End-of-workload flush.
    Flush,
}

impl EpisodeTrigger {
    pub fn name(self) -> &'static str {
        match self {
            EpisodeTrigger::Watermark => "watermark",
            EpisodeTrigger::Idle => "idle",
            EpisodeTrigger::Flush => "flush",
        }
    }
}

/// A closed write-drain episode of one sub-channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpisodeRecord {
    pub id: u64,
    pub channel: u32,
    pub subchannel: u32,
    pub trigger: EpisodeTrigger,
    pub start: Cycle,
    pub end: Cycle,
    pub writes: u64,
    pub unique_banks: u32,
    /// WRQ occupancy when the episode began and when it ended.
    pub entry_occupancy: u32,
    pub exit_occupancy: u32,
    pub w2w_sum: u64,
    pub w2w_count: u64,
}

impl EpisodeRecord {
    pub fn span(&self) -> Cycle {
        self.end - self.start
    }

    pub fn w2w_mean(&self) -> Option<f64> {
        (self.w2w_count > 0).then(|| self.w2w_sum as f64 / self.w2w_count as f64)
    }
}

/// Write bank-level parallelism of a closed episode.
pub fn wblp_of_episode(ep: &EpisodeRecord) -> u32 {
    ep.unique_banks
}

/// Write-to-write delays recomputed from a raw command log: successive WR
/// issue deltas within one drain episode of one sub-channel.
pub fn w2w_delay_series(log: &[CommandRecord]) -> Vec<u64> {
    let mut last: BTreeMap<(u32, u32), (u64, Cycle)> = BTreeMap::new();
    let mut out = Vec::new();
    for r in log.iter().filter(|r| r.cmd == Command::Wr) {
        let Some(ep) = r.episode else { continue };
        let key = (r.channel, r.coord.subchannel);
        if let Some(&(e, t)) = last.get(&key) {
            if e == ep {
                out.push(r.cycle - t);
            }
        }
        last.insert(key, (ep, r.cycle));
    }
    out
}

/// Histogram of write-to-write delays in cycles.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct W2wStats {
    pub hist: BTreeMap<u64, u64>,
    pub count: u64,
    pub sum: u64,
    pub max: u64,
}

impl W2wStats {
    pub fn record(&mut self, delta: u64) {
        *self.hist.entry(delta).or_insert(0) += 1;
        self.count += 1;
        self.sum += delta;
        self.max = self.max.max(delta);
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum as f64 / self.count as f64
        }
    }

    pub fn merge(&mut self, other: &W2wStats) {
        for (&d, &n) in &other.hist {
            *self.hist.entry(d).or_insert(0) += n;
        }
        self.count += other.count;
        self.sum += other.sum;
        self.max = self.max.max(other.max);
    }
}

/// Per-run statistics.
#[derive(Clone, Debug, Default)]
pub struct StatsReport {
    pub policy: String,
    pub workload: String,
    pub seed: u64,
    pub total_cycles: Cycle,
    pub reads: u64,
    pub writes: u64,
    pub hits: u64,
    pub misses: u64,
    /// Dirty evictions plus cleanses.
    pub writebacks: u64,
    pub dirty_evictions: u64,
    pub cleanses: u64,
    pub dram_reads: u64,
    pub dram_writes: u64,
    pub forwarded_reads: u64,
    pub wrq_merges: u64,
    pub episodes: Vec<EpisodeRecord>,
    pub write_mode_cycles: Cycle,
    /// Number of sub-channels the write-mode time is spread over.
    pub subchannels: u32,
    pub w2w: W2wStats,
    pub breakdown: DecisionBreakdown,
    pub tracker_queries: u64,
    pub vwq_lines_scanned: u64,
    pub frontend_stall_cycles: Cycle,
    /// Dirty lines still resident at the end of the run.
    pub dirty_resident: u64,
}

impl StatsReport {
    pub fn accesses(&self) -> u64 {
        self.reads + self.writes
    }

    /// Misses per kilo-access.
    pub fn mpka(&self) -> f64 {
        per_kilo(self.misses, self.accesses())
    }

    /// Writebacks per kilo-access.
    pub fn wpka(&self) -> f64 {
        per_kilo(self.writebacks, self.accesses())
    }

    /// Mean write BLP over watermark-triggered drain episodes; falls back
    /// to all episodes when none were watermark-triggered.
    pub fn wblp_mean(&self) -> f64 {
        let wm: Vec<u32> = self
            .episodes
            .iter()
            .filter(|e| e.trigger == EpisodeTrigger::Watermark)
            .map(wblp_of_episode)
            .collect();
        if wm.is_empty() {
            self.wblp_mean_all()
        } else {
            mean_u32(&wm)
        }
    }

    pub fn wblp_mean_all(&self) -> f64 {
        let all: Vec<u32> = self.episodes.iter().map(wblp_of_episode).collect();
        mean_u32(&all)
    }

    pub fn write_mode_fraction(&self) -> f64 {
        if self.total_cycles == 0 || self.subchannels == 0 {
            return 0.0;
        }
        self.write_mode_cycles as f64 / (self.total_cycles as f64 * self.subchannels as f64)
    }

    pub fn w2w_mean_cycles(&self) -> f64 {
        self.w2w.mean()
    }

    pub fn w2w_mean_ns(&self) -> f64 {
        cycles_to_ns(self.w2w.mean())
    }

    /// Largest per-episode mean delay (the other reading of a "max" delay).
    pub fn w2w_max_episode_mean(&self) -> f64 {
        self.episodes
            .iter()
            .filter_map(EpisodeRecord::w2w_mean)
            .fold(0.0, f64::max)
    }

    /// Relative writeback increase over `baseline`.
    pub fn extra_writeback_ratio(&self, baseline: &StatsReport) -> f64 {
        ratio_delta(self.writebacks, baseline.writebacks)
    }

    /// Relative miss-count change over `baseline`.
    pub fn miss_delta(&self, baseline: &StatsReport) -> f64 {
        ratio_delta(self.misses, baseline.misses)
    }

    pub const CSV_COLUMNS: &'static [&'static str] = &[
        "policy",
        "seed",
        "workload",
        "wblp_mean",
        "write_mode_frac",
        "w2w_mean_cycles",
        "w2w_max_cycles",
        "mpka",
        "wpka",
        "total_cycles",
        "overrides",
        "cleanses",
        "lru_evictions",
        "extra_wb_ratio",
        "miss_delta",
        "wblp_mean_all",
        "w2w_mean_ns",
        "w2w_max_episode_mean_cycles",
        "episodes",
        "reads",
        "writes",
        "misses",
        "writebacks",
        "dram_writes",
        "config",
    ];

    /// One CSV row; `baseline` fills the relative columns, `config` is the
    /// `k=v;k=v` override list that regenerates the row from the header.
    pub fn csv_row(&self, baseline: Option<&StatsReport>, config: &str) -> String {
        let rel = |f: fn(&StatsReport, &StatsReport) -> f64| {
            baseline.map_or(String::new(), |b| format!("{:.6}", f(self, b)))
        };
        [
            self.policy.clone(),
            self.seed.to_string(),
            self.workload.clone(),
            format!("{:.4}", self.wblp_mean()),
            format!("{:.6}", self.write_mode_fraction()),
            format!("{:.4}", self.w2w_mean_cycles()),
            self.w2w.max.to_string(),
            format!("{:.4}", self.mpka()),
            format!("{:.4}", self.wpka()),
            self.total_cycles.to_string(),
            self.breakdown.overrides.to_string(),
            self.breakdown.cleanses.to_string(),
            self.breakdown.lru_evictions.to_string(),
            rel(StatsReport::extra_writeback_ratio),
            rel(StatsReport::miss_delta),
            format!("{:.4}", self.wblp_mean_all()),
            format!("{:.2}", self.w2w_mean_ns()),
            format!("{:.4}", self.w2w_max_episode_mean()),
            self.episodes.len().to_string(),
            self.reads.to_string(),
            self.writes.to_string(),
            self.misses.to_string(),
            self.writebacks.to_string(),
            self.dram_writes.to_string(),
            config.to_string(),
        ]
        .join(",")
    }

    pub fn csv_header() -> String {
        Self::CSV_COLUMNS.join(",")
    }

    pub fn write_episodes_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "episode_id,channel,subchannel,trigger,start,end,writes,unique_banks,w2w_mean_cycles")?;
        for e in &self.episodes {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                e.id,
                e.channel,
                e.subchannel,
                e.trigger.name(),
                e.start,
                e.end,
                e.writes,
                e.unique_banks,
                e.w2w_mean().map_or(String::new(), |m| format!("{m:.4}"))
            )?;
        }
        Ok(())
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        format!(
            "policy={} workload={} seed={} cycles={} mpka={:.2} wpka={:.2} wblp={:.2} \
             W%={:.1} w2w={:.2}cyc ({:.2}ns) max={} overrides={} cleanses={} lru={}",
            self.policy,
            self.workload,
            self.seed,
            self.total_cycles,
            self.mpka(),
            self.wpka(),
            self.wblp_mean(),
            100.0 * self.write_mode_fraction(),
            self.w2w_mean_cycles(),
            self.w2w_mean_ns(),
            self.w2w.max,
            self.breakdown.overrides,
            self.breakdown.cleanses,
            self.breakdown.lru_evictions,
        )
    }
}

fn per_kilo(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        1000.0 * n as f64 / d as f64
    }
}

fn ratio_delta(x: u64, base: u64) -> f64 {
    if base == 0 {
        if x == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        x as f64 / base as f64 - 1.0
    }
}

fn mean_u32(v: &[u32]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().map(|&x| x as f64).sum::<f64>() / v.len() as f64
    }
}
