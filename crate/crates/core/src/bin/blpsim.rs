use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use blpsim::config::{overrides_to_string, provenance_header, Sweep};
use blpsim::workload::{generate, write_binary, write_csv, WorkloadKind};
use blpsim::{ConfigError, Engine, RunConfig, SimError, StatsReport, TraceError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "blpsim", version, about = "LLC + DDR5 write bank-level-parallelism simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configuration and write a stats CSV row.
    Run(RunArgs),
    /// Run the cartesian product of a sweep file.
    Sweep(SweepArgs),
    /// Write the configured synthetic workload to a trace file.
    GenTrace(GenArgs),
    /// Check a configuration without running it.
    Validate(CommonArgs),
    /// Print the effective DRAM timing table.
    DumpTimings(CommonArgs),
    /// Print the address bit layout, optionally decoding addresses.
    DumpMapping(MappingArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Config file of key=value lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable).
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    workload: Option<String>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    length: Option<String>,
    /// Write-queue entries per sub-channel (watermarks scale along).
    #[arg(long)]
    wrq: Option<usize>,
    #[arg(long)]
    replacement: Option<String>,
    /// x8 devices: tCCD_L_WR = 24 cycles.
    #[arg(long)]
    x8: bool,
    /// Ideal write drain: one write per burst.
    #[arg(long)]
    ideal: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Stats CSV output (stdout when absent).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Per-episode CSV output.
    #[arg(long)]
    episodes: Option<PathBuf>,
    /// Spill every DRAM command to this file.
    #[arg(long)]
    log_commands: Option<PathBuf>,
    /// Also run the baseline policy to fill the relative columns.
    #[arg(long)]
    baseline: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep file: one `key=v1,v2,...` per line.
    sweep: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads (default: BLPSIM_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Binary,
    Csv,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(short, long)]
    out: PathBuf,
    /// Defaults to csv for `.csv` paths, binary otherwise.
    #[arg(long, value_enum)]
    format: Option<TraceFormat>,
}

#[derive(Args)]
struct MappingArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Addresses to decode (hex).
    #[arg(long = "addr")]
    addrs: Vec<String>,
}

enum Failure {
    Usage(String),
    Config(String),
    Contract(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Contract(_) => Failure::Contract(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<TraceError> for Failure {
    fn from(e: TraceError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn build_config(a: &CommonArgs) -> Result<RunConfig, Failure> {
    let mut c = RunConfig::default();
    if let Some(p) = &a.config {
        let text = fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
        c.apply_text(&text)?;
    }
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        c.set(k.trim(), v.trim())?;
    }
    let mut set = |k: &str, v: &str| c.set(k, v);
    if let Some(p) = &a.policy {
        set("policy.mode", p)?;
    }
    if let Some(w) = &a.workload {
        set("workload.kind", w)?;
    }
    if let Some(t) = &a.trace {
        set("workload.trace", &t.display().to_string())?;
        set("workload.kind", "trace")?;
    }
    if let Some(s) = a.seed {
        set("workload.seed", &s.to_string())?;
    }
    if let Some(l) = &a.length {
        set("workload.length", l)?;
    }
    if let Some(w) = a.wrq {
        set("mc.wrq_capacity", &w.to_string())?;
    }
    if let Some(r) = &a.replacement {
        set("cache.replacement", r)?;
    }
    if a.x8 {
        set("timing.x8", "true")?;
    }
    if a.ideal {
        set("timing.ideal_write", "true")?;
    }
    c.validate()?;
    Ok(c)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let mut cfg = build_config(&a.common)?;
    if let Some(p) = &a.log_commands {
        cfg.log_commands = Some(p.clone());
    }
    let t = cfg.effective_timing();
    eprintln!(
        "effective timing: tCCD_S_WR={} tCCD_L_WR={} conflict={} cycles",
        t.t_ccd_s_wr,
        t.t_ccd_l_wr,
        t.write_conflict_gap()
    );
    let stats = Engine::new(cfg.clone())?.run()?;
    eprintln!("{}", stats.summary());
    let base = if a.baseline && cfg.policy != blpsim::PolicyChoice::Baseline {
        let mut b = cfg.clone();
        b.policy = blpsim::PolicyChoice::Baseline;
        b.log_commands = None;
        Some(Engine::new(b)?.run()?)
    } else {
        None
    };
    let mut w = output(&a.out)?;
    write!(w, "{}", provenance_header(&cfg))?;
    writeln!(w, "{}", StatsReport::csv_header())?;
    if let Some(b) = &base {
        writeln!(w, "{}", b.csv_row(Some(b), "policy.mode=baseline"))?;
    }
    writeln!(w, "{}", stats.csv_row(base.as_ref(), ""))?;
    w.flush()?;
    if let Some(p) = &a.episodes {
        let mut f = BufWriter::new(File::create(p)?);
        stats.write_episodes_csv(&mut f)?;
        f.flush()?;
    }
    Ok(())
}

fn thread_count(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(n) = flag {
        return Ok(n.max(1));
    }
    match std::env::var("BLPSIM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|n| n.max(1))
            .map_err(|_| Failure::Usage(format!("BLPSIM_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let base = build_config(&a.common)?;
    let text = fs::read_to_string(&a.sweep).map_err(|e| Failure::Config(format!("{}: {e}", a.sweep.display())))?;
    let points = Sweep::parse(&text)?.points();
    let mut cfgs = Vec::new();
    for p in &points {
        let mut c = base.clone();
        c.apply_overrides(p)?;
        c.validate()?;
        cfgs.push(c);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(a.threads)?)
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let results: Vec<Result<StatsReport, SimError>> =
        pool.install(|| cfgs.par_iter().map(|c| Engine::new(c.clone())?.run()).collect());
    let mut stats = Vec::new();
    for r in results {
        stats.push(r?);
    }
    // baseline row for each point: same overrides apart from the policy
    let key = |p: &[(String, String)]| -> Vec<(String, String)> {
        p.iter().filter(|(k, _)| k != "policy.mode").cloned().collect()
    };
    let mut w = output(&a.out)?;
    write!(w, "{}", provenance_header(&base))?;
    writeln!(w, "{}", StatsReport::csv_header())?;
    for (i, s) in stats.iter().enumerate() {
        let b = (0..stats.len())
            .find(|&j| cfgs[j].policy == blpsim::PolicyChoice::Baseline && key(&points[j]) == key(&points[i]))
            .map(|j| &stats[j]);
        writeln!(w, "{}", s.csv_row(b, &overrides_to_string(&points[i])))?;
        eprintln!("{}", s.summary());
    }
    w.flush()?;
    Ok(())
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let cfg = build_config(&a.common)?;
    if cfg.workload.kind == WorkloadKind::Trace {
        return Err(Failure::Config("gen-trace needs a synthetic workload.kind".into()));
    }
    let records: Vec<_> = generate(&cfg.workload).collect();
    let csv = match a.format {
        Some(TraceFormat::Csv) => true,
        Some(TraceFormat::Binary) => false,
        None => a.out.extension().is_some_and(|e| e == "csv"),
    };
    let mut w = BufWriter::new(File::create(&a.out)?);
    if csv {
        write_csv(&mut w, &records)?;
    } else {
        write_binary(&mut w, &records)?;
    }
    w.flush()?;
    eprintln!("wrote {} records to {}", records.len(), a.out.display());
    Ok(())
}

fn cmd_validate(a: CommonArgs) -> Result<(), Failure> {
    let cfg = build_config(&a)?;
    println!("ok: {} keys, policy {}, workload {}", cfg.entries().len(), cfg.policy.name(), cfg.workload_name());
    Ok(())
}

fn cmd_dump_timings(a: CommonArgs) -> Result<(), Failure> {
    let cfg = build_config(&a)?;
    print!("{}", cfg.effective_timing().dump());
    Ok(())
}

fn parse_hex(s: &str) -> Result<u64, Failure> {
    let t = s.trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(t, 16).map_err(|_| Failure::Usage(format!("bad address `{s}`")))
}

fn cmd_dump_mapping(a: MappingArgs) -> Result<(), Failure> {
    let cfg = build_config(&a.common)?;
    let m = cfg.mapping()?;
    print!("{}", m.dump());
    for s in &a.addrs {
        let addr = parse_hex(s)?;
        println!("{addr:#x} -> {} (bank {})", m.map_address(addr), m.flat_bank_id(addr));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let r = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::GenTrace(a) => cmd_gen(a),
        Cmd::Validate(a) => cmd_validate(a),
        Cmd::DumpTimings(a) => cmd_dump_timings(a),
        Cmd::DumpMapping(a) => cmd_dump_mapping(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Contract(m)) => {
            eprintln!("{m}");
            ExitCode::from(3)
        }
    }
}
