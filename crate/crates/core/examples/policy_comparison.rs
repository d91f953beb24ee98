//! Run every policy on one synthetic workload and print the headline
//! metrics on a 2 MiB LLC. Pass an access count as the first argument
//! (default 300000).

use blpsim::workload::WorkloadKind;
use blpsim::{PolicyChoice, RunConfig};

fn main() {
    let length = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(300_000);
    let mut cfg = RunConfig::default();
    cfg.workload.kind = WorkloadKind::UniformRandom;
    cfg.cache.capacity = 2 << 20;
    cfg.workload.footprint = 4 * cfg.cache.capacity;
    cfg.workload.length = length;

    let base = blpsim::run(&cfg).unwrap();
    println!("{:9} {:>7} {:>7} {:>7} {:>9} {:>10}", "policy", "wblp", "wmode", "w2w", "extra-wb", "cycles");
    let policies = [
        PolicyChoice::Baseline,
        PolicyChoice::BardE,
        PolicyChoice::BardC,
        PolicyChoice::BardH,
        PolicyChoice::EagerWriteback,
        PolicyChoice::Vwq,
    ];
    for policy in policies {
        let mut c = cfg.clone();
        c.policy = policy;
        let r = if policy == PolicyChoice::Baseline { base.clone() } else { blpsim::run(&c).unwrap() };
        println!(
            "{:9} {:7.2} {:7.3} {:7.2} {:8.2}% {:10}",
            r.policy,
            r.wblp_mean(),
            r.write_mode_fraction(),
            r.w2w_mean_cycles(),
            100.0 * r.extra_writeback_ratio(&base),
            r.total_cycles
        );
    }
    let mut ideal = cfg.clone();
    ideal.ideal_write = true;
    let r = blpsim::run(&ideal).unwrap();
    println!("{:9} {:7.2} {:7.3} {:7.2}", r.policy, r.wblp_mean(), r.write_mode_fraction(), r.w2w_mean_cycles());
}
