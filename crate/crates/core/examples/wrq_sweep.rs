//! Sweep the write queue size for baseline and BARD-H with the same sweep
//! file format the CLI reads, and print total cycles per point. Uses a 2 MiB
//! LLC so short runs reach steady state.

use blpsim::config::Sweep;
use blpsim::workload::WorkloadKind;
use blpsim::RunConfig;

fn main() {
    let length = std::env::args().nth(1).unwrap_or_else(|| "200000".into());
    let sweep = Sweep::parse("policy.mode=baseline,bard-h\nmc.wrq_capacity=32,48,64,96,128\n").unwrap();
    for point in sweep.points() {
        let mut cfg = RunConfig::default();
        cfg.workload.kind = WorkloadKind::UniformRandom;
        cfg.cache.capacity = 2 << 20;
        cfg.workload.footprint = 4 * cfg.cache.capacity;
        cfg.set("workload.length", &length).unwrap();
        cfg.apply_overrides(&point).unwrap();
        let r = blpsim::run(&cfg).unwrap();
        let label: Vec<String> = point.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{:45} cycles {:10} wblp {:.2}", label.join(" "), r.total_cycles, r.wblp_mean());
    }
}
