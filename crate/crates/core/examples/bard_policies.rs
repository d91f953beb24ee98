//! Drive a small LLC directly with each BARD variant and print how often
//! it overrode the base victim or cleansed a dirty line.

use blpsim::cache::{Cache, CacheConfig};
use blpsim::{AccessKind, PolicyChoice, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let cfg = RunConfig::default();
    let cc = CacheConfig { capacity: 1 << 20, ..Default::default() };
    for policy in [PolicyChoice::Baseline, PolicyChoice::BardE, PolicyChoice::BardC, PolicyChoice::BardH] {
        let mut cache = Cache::new(cc.clone(), cfg.mapping().unwrap(), policy, cfg.tracker()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut misses, mut writebacks) = (0u64, 0u64);
        for _ in 0..200_000 {
            let addr = rng.random_range(0..(4u64 << 20) / 64) * 64;
            let kind = if rng.random_bool(0.5) { AccessKind::Write } else { AccessKind::Read };
            let r = cache.access(addr, kind, 0, &|_, _| usize::MAX);
            misses += !r.hit as u64;
            writebacks += r.writebacks.len() as u64;
        }
        let b = cache.breakdown();
        println!(
            "{:9} misses {misses:6} writebacks {writebacks:6} overrides {:6} cleanses {:6} tracker queries {}",
            policy.name(),
            b.overrides,
            b.cleanses,
            cache.tracker().queries()
        );
    }
}
