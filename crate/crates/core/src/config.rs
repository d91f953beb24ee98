//! Flat `key=value` run configuration.
//!
//! Every key has a default; a config file only lists overrides. Lines are
//! `section.key = value`, `#` starts a comment. List-valued keys
//! (`map.layout`, `map.pbpl_row_bits`) take space-separated items. Sizes
//! accept `KiB`/`MiB`/`GiB` suffixes.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::cache::{CacheConfig, Replacement};
use crate::controller::{scaled_watermarks, ControllerConfig};
use crate::error::ConfigError;
use crate::geometry::{layout_to_string, parse_layout, AddressMapping, DramGeometry, Field};
use crate::policy::{BlpTracker, PolicyChoice, TrackerReset};
use crate::timing::{TimingParams, X8_TCCD_L_WR};
use crate::workload::{FrontendConfig, SyntheticSpec, WorkloadKind, MAX_STREAMS};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub geom: DramGeometry,
    /// Address layout; `None` selects the default for the geometry.
    pub layout: Option<Vec<Field>>,
    pub pbpl: bool,
    /// Row bits XORed into the bank index; `None` selects the lowest ones.
    pub pbpl_row_bits: Option<Vec<u32>>,
    pub timing: TimingParams,
    /// x8 devices: tCCD_L_WR = 24 regardless of `timing.tccd_l_wr`.
    pub x8: bool,
    pub ideal_write: bool,
    pub rq_capacity: usize,
    pub wrq_capacity: usize,
    /// `None`: derived from the write-queue capacity.
    pub low_watermark: Option<usize>,
    pub high_watermark: Option<usize>,
    pub opportunistic_drain: bool,
    pub cache: CacheConfig,
    pub policy: PolicyChoice,
    pub tracker_reset: TrackerReset,
    pub tracker_disabled: bool,
    pub workload: SyntheticSpec,
    pub trace: Option<PathBuf>,
    pub frontend: FrontendConfig,
    /// Spill every DRAM command to this file.
    pub log_commands: Option<PathBuf>,
    /// In-memory ring size of the command log.
    pub log_capacity: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mc = ControllerConfig::default();
        RunConfig {
            geom: DramGeometry::default(),
            layout: None,
            pbpl: true,
            pbpl_row_bits: None,
            timing: TimingParams::default(),
            x8: false,
            ideal_write: false,
            rq_capacity: mc.rq_capacity,
            wrq_capacity: mc.wrq_capacity,
            low_watermark: None,
            high_watermark: None,
            opportunistic_drain: mc.opportunistic_drain,
            cache: CacheConfig::default(),
            policy: PolicyChoice::Baseline,
            tracker_reset: TrackerReset::PerSubchannel,
            tracker_disabled: false,
            workload: SyntheticSpec::default(),
            trace: None,
            frontend: FrontendConfig::default(),
            log_commands: None,
            log_capacity: 4096,
        }
    }
}

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("geom.channels", "memory channels"),
    ("geom.subchannels", "sub-channels per channel"),
    ("geom.bankgroups", "bankgroups per sub-channel"),
    ("geom.banks_per_bankgroup", "banks per bankgroup"),
    ("geom.rows", "rows per bank"),
    ("geom.columns", "64-byte columns per row"),
    ("map.layout", "address bits above the line offset, e.g. `sc co bg:3 ba:2 co:6 row:16`, or `default`"),
    ("map.pbpl", "XOR bank index with row bits"),
    ("map.pbpl_row_bits", "row bits XORed into bankgroup||bank, LSB first, or `default`"),
    ("timing.cl", "read latency"),
    ("timing.cwl", "write latency"),
    ("timing.trcd", "ACT to column"),
    ("timing.trp", "PRE to ACT"),
    ("timing.tras", "ACT to PRE"),
    ("timing.twr", "write recovery, from the start of the write burst"),
    ("timing.trtp", "RD to PRE"),
    ("timing.burst", "data bus cycles per 64-byte transfer"),
    ("timing.tccd_s_wr", "WR to WR, different bankgroup"),
    ("timing.tccd_l_wr", "WR to WR, same bankgroup"),
    ("timing.tccd_s_rd", "RD to RD, different bankgroup"),
    ("timing.tccd_l_rd", "RD to RD, same bankgroup"),
    ("timing.rd_to_wr", "bus turnaround read to write"),
    ("timing.wr_to_rd", "bus turnaround write to read"),
    ("timing.x8", "x8 devices (tCCD_L_WR = 24)"),
    ("timing.ideal_write", "drain writes one burst apart ignoring bank timing"),
    ("mc.rq_capacity", "read queue entries per channel"),
    ("mc.wrq_capacity", "write queue entries per sub-channel"),
    ("mc.low_watermark", "drain exit occupancy, or `auto` (capacity/6)"),
    ("mc.high_watermark", "drain entry occupancy, or `auto` (capacity - low)"),
    ("mc.opportunistic_drain", "drain writes when no reads are queued"),
    ("cache.capacity", "LLC bytes"),
    ("cache.ways", "associativity"),
    ("cache.replacement", "lru | srrip | ship"),
    ("cache.fill_delay", "minimum miss-to-fill cycles"),
    ("cache.hit_latency", "hit latency in cycles"),
    ("cache.mshrs", "outstanding read misses"),
    ("cache.slices", "LLC slices sharing one BLP tracker"),
    ("policy.mode", "baseline | bard-e | bard-c | bard-h | ew | vwq"),
    ("policy.tracker_reset", "subchannel | whole"),
    ("policy.tracker_disabled", "tracker bits always read zero"),
    ("workload.kind", "stream_copy | stream_add | stream_scale | stream_triad | uniform_random | mixed | trace"),
    ("workload.trace", "trace file for kind=trace (.blpt or csv)"),
    ("workload.footprint", "bytes touched by synthetic generators"),
    ("workload.write_fraction", "write share of random accesses"),
    ("workload.length", "accesses to generate"),
    ("workload.streams", "streams of the mixed generator"),
    ("workload.seed", "generator seed"),
    ("frontend.max_outstanding_reads", "reads in flight per stream"),
    ("frontend.window", "lookahead records"),
    ("sim.log_commands", "spill the DRAM command log to this path, or `none`"),
    ("sim.log_capacity", "in-memory command log ring size"),
];

pub fn parse_size(s: &str) -> Option<u64> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let n: u64 = num.parse().ok()?;
    let mult = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "k" | "kb" | "kib" => 1 << 10,
        "m" | "mb" | "mib" => 1 << 20,
        "g" | "gb" | "gib" => 1 << 30,
        _ => return None,
    };
    n.checked_mul(mult)
}

pub fn format_size(n: u64) -> String {
    for (unit, shift) in [("GiB", 30), ("MiB", 20), ("KiB", 10)] {
        if n >= 1 << shift && n.is_multiple_of(1 << shift) {
            return format!("{}{unit}", n >> shift);
        }
    }
    n.to_string()
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::invalid(key, v, "expected true or false")),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::invalid(key, v, "expected a non-negative integer"))
}

/// Integer that may be written in scientific notation (`2e6`).
fn parse_count(key: &str, v: &str) -> Result<u64, ConfigError> {
    if let Ok(n) = v.parse() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 1e19 => Ok(f as u64),
        _ => Err(ConfigError::invalid(key, v, "expected a non-negative integer")),
    }
}

fn parse_opt_path(v: &str) -> Option<PathBuf> {
    match v {
        "" | "none" => None,
        p => Some(PathBuf::from(p)),
    }
}

/// `(line number, key, value)` for every assignment in a config text.
pub fn parse_kv(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            msg: format!("expected key=value, got `{line}`"),
        })?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (_, k, v) in parse_kv(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, kv: &[(String, String)]) -> Result<(), ConfigError> {
        for (k, v) in kv {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let v = v.trim();
        if let Some(f) = self.timing.field_mut(key) {
            *f = parse_num(key, v)?;
            return Ok(());
        }
        match key {
            "geom.channels" => self.geom.channels = parse_num(key, v)?,
            "geom.subchannels" => self.geom.subchannels = parse_num(key, v)?,
            "geom.bankgroups" => self.geom.bankgroups = parse_num(key, v)?,
            "geom.banks_per_bankgroup" => self.geom.banks_per_bankgroup = parse_num(key, v)?,
            "geom.rows" => self.geom.rows = parse_num(key, v)?,
            "geom.columns" => self.geom.columns = parse_num(key, v)?,
            "map.layout" => {
                self.layout = if v == "default" { None } else { Some(parse_layout(v)?) };
            }
            "map.pbpl" => self.pbpl = parse_bool(key, v)?,
            "map.pbpl_row_bits" => {
                self.pbpl_row_bits = if v == "default" {
                    None
                } else {
                    Some(v.split_whitespace().map(|b| parse_num(key, b)).collect::<Result<_, _>>()?)
                };
            }
            "timing.x8" => self.x8 = parse_bool(key, v)?,
            "timing.ideal_write" => self.ideal_write = parse_bool(key, v)?,
            "mc.rq_capacity" => self.rq_capacity = parse_num(key, v)?,
            "mc.wrq_capacity" => self.wrq_capacity = parse_num(key, v)?,
            "mc.low_watermark" => {
                self.low_watermark = if v == "auto" { None } else { Some(parse_num(key, v)?) }
            }
            "mc.high_watermark" => {
                self.high_watermark = if v == "auto" { None } else { Some(parse_num(key, v)?) }
            }
            "mc.opportunistic_drain" => self.opportunistic_drain = parse_bool(key, v)?,
            "cache.capacity" => {
                self.cache.capacity = parse_size(v).ok_or_else(|| ConfigError::invalid(key, v, "expected a size"))?
            }
            "cache.ways" => self.cache.ways = parse_num(key, v)?,
            "cache.replacement" => {
                self.cache.replacement =
                    Replacement::parse(v).ok_or_else(|| ConfigError::invalid(key, v, "expected lru, srrip or ship"))?
            }
            "cache.fill_delay" => self.cache.fill_delay = parse_num(key, v)?,
            "cache.hit_latency" => self.cache.hit_latency = parse_num(key, v)?,
            "cache.mshrs" => self.cache.mshrs = parse_num(key, v)?,
            "cache.slices" => self.cache.slices = parse_num(key, v)?,
            "policy.mode" => {
                self.policy = PolicyChoice::parse(v)
                    .ok_or_else(|| ConfigError::invalid(key, v, "expected baseline, bard-e, bard-c, bard-h, ew or vwq"))?
            }
            "policy.tracker_reset" => {
                self.tracker_reset =
                    TrackerReset::parse(v).ok_or_else(|| ConfigError::invalid(key, v, "expected subchannel or whole"))?
            }
            "policy.tracker_disabled" => self.tracker_disabled = parse_bool(key, v)?,
            "workload.kind" => {
                self.workload.kind =
                    WorkloadKind::parse(v).ok_or_else(|| ConfigError::invalid(key, v, "unknown workload"))?
            }
            "workload.trace" => self.trace = parse_opt_path(v),
            "workload.footprint" => {
                self.workload.footprint =
                    parse_size(v).ok_or_else(|| ConfigError::invalid(key, v, "expected a size"))?
            }
            "workload.write_fraction" => {
                self.workload.write_fraction =
                    v.parse().map_err(|_| ConfigError::invalid(key, v, "expected a number"))?
            }
            "workload.length" => self.workload.length = parse_count(key, v)?,
            "workload.streams" => self.workload.streams = parse_num(key, v)?,
            "workload.seed" => self.workload.seed = parse_count(key, v)?,
            "frontend.max_outstanding_reads" => self.frontend.max_outstanding_reads = parse_num(key, v)?,
            "frontend.window" => self.frontend.window = parse_num(key, v)?,
            "sim.log_commands" => self.log_commands = parse_opt_path(v),
            "sim.log_capacity" => self.log_capacity = parse_num(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Every key with its current value, in [`KEYS`] order. Feeding the
    /// result back through [`set`](Self::set) reproduces `self`.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt_path = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        let opt_num = |n: Option<usize>| n.map_or("auto".to_string(), |n| n.to_string());
        let timing: std::collections::HashMap<_, _> = self.timing.entries().into_iter().collect();
        KEYS.iter()
            .map(|&(k, _)| {
                let v = if let Some(t) = timing.get(k) {
                    t.to_string()
                } else {
                    match k {
                        "geom.channels" => self.geom.channels.to_string(),
                        "geom.subchannels" => self.geom.subchannels.to_string(),
                        "geom.bankgroups" => self.geom.bankgroups.to_string(),
                        "geom.banks_per_bankgroup" => self.geom.banks_per_bankgroup.to_string(),
                        "geom.rows" => self.geom.rows.to_string(),
                        "geom.columns" => self.geom.columns.to_string(),
                        "map.layout" => self.layout.as_ref().map_or("default".into(), |l| layout_to_string(l)),
                        "map.pbpl" => self.pbpl.to_string(),
                        "map.pbpl_row_bits" => self.pbpl_row_bits.as_ref().map_or("default".into(), |b| {
                            b.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
                        }),
                        "timing.x8" => self.x8.to_string(),
                        "timing.ideal_write" => self.ideal_write.to_string(),
                        "mc.rq_capacity" => self.rq_capacity.to_string(),
                        "mc.wrq_capacity" => self.wrq_capacity.to_string(),
                        "mc.low_watermark" => opt_num(self.low_watermark),
                        "mc.high_watermark" => opt_num(self.high_watermark),
                        "mc.opportunistic_drain" => self.opportunistic_drain.to_string(),
                        "cache.capacity" => format_size(self.cache.capacity),
                        "cache.ways" => self.cache.ways.to_string(),
                        "cache.replacement" => self.cache.replacement.name().into(),
                        "cache.fill_delay" => self.cache.fill_delay.to_string(),
                        "cache.hit_latency" => self.cache.hit_latency.to_string(),
                        "cache.mshrs" => self.cache.mshrs.to_string(),
                        "cache.slices" => self.cache.slices.to_string(),
                        "policy.mode" => self.policy.name().into(),
                        "policy.tracker_reset" => self.tracker_reset.name().into(),
                        "policy.tracker_disabled" => self.tracker_disabled.to_string(),
                        "workload.kind" => self.workload.kind.name().into(),
                        "workload.trace" => opt_path(&self.trace),
                        "workload.footprint" => format_size(self.workload.footprint),
                        "workload.write_fraction" => self.workload.write_fraction.to_string(),
                        "workload.length" => self.workload.length.to_string(),
                        "workload.streams" => self.workload.streams.to_string(),
                        "workload.seed" => self.workload.seed.to_string(),
                        "frontend.max_outstanding_reads" => self.frontend.max_outstanding_reads.to_string(),
                        "frontend.window" => self.frontend.window.to_string(),
                        "sim.log_commands" => opt_path(&self.log_commands),
                        "sim.log_capacity" => self.log_capacity.to_string(),
                        other => unreachable!("key {other} without serializer"),
                    }
                };
                (k, v)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn effective_timing(&self) -> TimingParams {
        let mut t = self.timing.clone();
        if self.x8 {
            t.t_ccd_l_wr = X8_TCCD_L_WR;
        }
        t
    }

    pub fn mapping(&self) -> Result<AddressMapping, ConfigError> {
        let g = self.geom.clone();
        g.validate()?;
        let bits = self.layout.clone().unwrap_or_else(|| AddressMapping::default_layout(&g));
        let bank_bits = g.field_bits(Field::Bankgroup) + g.field_bits(Field::Bank);
        let row_bits = self.pbpl_row_bits.clone().unwrap_or_else(|| (0..bank_bits).collect());
        AddressMapping::new(g, bits, self.pbpl, if self.pbpl { row_bits } else { Vec::new() })
    }

    pub fn controller_config(&self) -> ControllerConfig {
        let (low, high) = scaled_watermarks(self.wrq_capacity);
        ControllerConfig {
            rq_capacity: self.rq_capacity,
            wrq_capacity: self.wrq_capacity,
            low_watermark: self.low_watermark.unwrap_or(low),
            high_watermark: self.high_watermark.unwrap_or(high),
            opportunistic_drain: self.opportunistic_drain,
            ideal_write: self.ideal_write,
        }
    }

    pub fn tracker(&self) -> BlpTracker {
        let t = BlpTracker::new(&self.geom, self.tracker_reset);
        if self.tracker_disabled {
            t.disabled()
        } else {
            t
        }
    }

    /// Label used in the `workload` CSV column.
    pub fn workload_name(&self) -> String {
        match (&self.workload.kind, &self.trace) {
            (WorkloadKind::Trace, Some(p)) => {
                p.file_stem().map_or("trace".into(), |s| s.to_string_lossy().into_owned())
            }
            (k, _) => k.name().to_string(),
        }
    }

    /// Check every section; errors name the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.mapping()?;
        self.effective_timing().validate()?;
        self.controller_config().validate()?;
        self.cache.validate()?;
        let w = &self.workload;
        if !(0.0..=1.0).contains(&w.write_fraction) {
            return Err(ConfigError::invalid("workload.write_fraction", w.write_fraction, "must be in [0, 1]"));
        }
        if w.footprint < 64 {
            return Err(ConfigError::invalid("workload.footprint", w.footprint, "must be at least one line"));
        }
        if w.streams == 0 || w.streams as usize > MAX_STREAMS {
            return Err(ConfigError::invalid("workload.streams", w.streams, "must be in 1..=16"));
        }
        if w.kind == WorkloadKind::Trace {
            match &self.trace {
                None => return Err(ConfigError::inconsistent("workload.trace", "kind=trace needs a trace file")),
                Some(p) if !p.exists() => {
                    return Err(ConfigError::invalid("workload.trace", p.display(), "file not found"))
                }
                _ => {}
            }
        }
        if self.frontend.max_outstanding_reads == 0 {
            return Err(ConfigError::invalid("frontend.max_outstanding_reads", 0, "must be >= 1"));
        }
        if self.frontend.window == 0 {
            return Err(ConfigError::invalid("frontend.window", 0, "must be >= 1"));
        }
        Ok(())
    }
}

/// Cartesian sweep over config keys. One `key=v1,v2,...` per line; points
/// are produced with the first line varying slowest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sweep {
    pub axes: Vec<(String, Vec<String>)>,
}

impl Sweep {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut axes = Vec::new();
        for (line, k, v) in parse_kv(text)? {
            let vals: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            if vals.is_empty() {
                return Err(ConfigError::Syntax { line, msg: format!("no values for `{k}`") });
            }
            // reject unknown keys and bad values up front
            let mut probe = RunConfig::default();
            for val in &vals {
                probe.set(&k, val)?;
            }
            axes.push((k, vals));
        }
        Ok(Sweep { axes })
    }

    pub fn points(&self) -> Vec<Vec<(String, String)>> {
        let mut out: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for (k, vals) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((k.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        out
    }
}

/// `k=v;k=v` form used in the CSV `config` column.
pub fn overrides_to_string(kv: &[(String, String)]) -> String {
    kv.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

pub fn overrides_from_string(s: &str) -> Result<Vec<(String, String)>, ConfigError> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| ConfigError::Syntax { line: 0, msg: format!("bad override `{p}`") })
        })
        .collect()
}

/// `# ` comment lines carrying the full config, placed above CSV output.
pub fn provenance_header(cfg: &RunConfig) -> String {
    let mut s = format!("# blpsim {}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in cfg.entries() {
        let _ = writeln!(s, "# config: {k}={v}");
    }
    s
}

/// Rebuild the base config from a CSV's provenance header.
pub fn config_from_provenance(csv: &str) -> Result<RunConfig, ConfigError> {
    let mut c = RunConfig::default();
    for line in csv.lines() {
        if let Some(kv) = line.strip_prefix("# config: ") {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: 0, msg: format!("bad provenance line `{line}`") })?;
            c.set(k, v)?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_size("16MiB"), Some(16 << 20));
        assert_eq!(parse_size("64 MiB"), Some(64 << 20));
        assert_eq!(parse_size("4096"), Some(4096));
        assert_eq!(parse_size("1x"), None);
        assert_eq!(format_size(16 << 20), "16MiB");
        assert_eq!(format_size(1000), "1000");
    }

    #[test]
    fn defaults_validate_and_roundtrip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(RunConfig::from_text(&c.to_text()).unwrap(), c);
        let cc = c.controller_config();
        assert_eq!((cc.low_watermark, cc.high_watermark), (8, 40));
    }

    #[test]
    fn nondefault_roundtrip() {
        let text = "map.layout = sc co bg:3 ba:2 co:6 row:16\nmap.pbpl_row_bits = 4 3 2 1 0\n\
                    cache.replacement=ship\npolicy.mode=bard-h\nworkload.length=2e6\nmc.low_watermark=4\ntiming.x8=true\n";
        let c = RunConfig::from_text(text).unwrap();
        assert_eq!(c.workload.length, 2_000_000);
        assert_eq!(c.effective_timing().t_ccd_l_wr, 24);
        assert_eq!(RunConfig::from_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(RunConfig::from_text("cache.wayz=4").unwrap_err().key(), Some("cache.wayz"));
        assert_eq!(RunConfig::from_text("policy.mode=lru").unwrap_err().key(), Some("policy.mode"));
        let c = RunConfig::from_text("mc.high_watermark=60").unwrap();
        assert_eq!(c.validate().unwrap_err().key(), Some("mc.high_watermark"));
        assert!(matches!(RunConfig::from_text("junk"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn sweep_order() {
        let s = Sweep::parse("mc.wrq_capacity=32,48\npolicy.mode=baseline,bard-h\n").unwrap();
        let p = s.points();
        assert_eq!(p.len(), 4);
        assert_eq!(overrides_to_string(&p[1]), "mc.wrq_capacity=32;policy.mode=bard-h");
        assert_eq!(overrides_from_string(&overrides_to_string(&p[3])).unwrap(), p[3]);
    }
}
