#![allow(dead_code)]

use blpsim::controller::{ControllerConfig, EnqueueOutcome, MemoryController, Mode, Request};
use blpsim::stats::{CommandLog, CommandRecord};
use blpsim::timing::Command;
use blpsim::{AccessKind, AddressMapping, Cycle, DramCoord, RunConfig, TimingParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn mapping() -> AddressMapping {
    RunConfig::default().mapping().unwrap()
}

pub fn controller(cfg: ControllerConfig, tp: TimingParams) -> MemoryController {
    let geom = RunConfig::default().geom;
    MemoryController::new(0, &geom, tp, cfg, CommandLog::new(0).keep_all())
}

pub fn request(m: &AddressMapping, id: u64, kind: AccessKind, coord: DramCoord, at: Cycle) -> Request {
    Request { id, addr: m.compose(&coord), coord, kind, arrival: at, source_id: 0 }
}

pub fn all_idle(m: &MemoryController) -> bool {
    m.is_idle() && (0..2).all(|s| m.mode(s) == Mode::Read)
}

/// Flush and tick until every queue is empty.
pub fn drain(m: &mut MemoryController, mut now: Cycle) -> Cycle {
    m.set_flush(true);
    while let Some(t) = m.next_event() {
        now = now.max(t);
        m.tick(now).unwrap();
        if all_idle(m) {
            break;
        }
    }
    now
}

pub fn write_cycles(log: &[CommandRecord]) -> Vec<Cycle> {
    log.iter().filter(|r| r.cmd == Command::Wr).map(|r| r.cycle).collect()
}

/// Drive a controller with a random mix of reads and writes until at least
/// `commands` DRAM commands have issued, then drain. Rows are drawn from a
/// small pool so hits, conflicts and bankgroup collisions all occur.
pub fn fuzz_log(seed: u64, commands: u64, cfg: ControllerConfig, tp: TimingParams) -> Vec<CommandRecord> {
    let map = mapping();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = controller(cfg, tp);
    let mut now: Cycle = 0;
    let mut id = 0;
    let mut pending: Option<Request> = None;
    let mut done = Vec::new();
    while m.log().total() < commands {
        let req = pending.take().unwrap_or_else(|| {
            id += 1;
            let kind = if rng.random_bool(0.5) { AccessKind::Write } else { AccessKind::Read };
            let coord = DramCoord::new(
                0,
                rng.random_range(0..2),
                rng.random_range(0..8),
                rng.random_range(0..4),
                rng.random_range(0..4),
                rng.random_range(0..128),
            );
            request(&map, id, kind, coord, now)
        });
        if m.enqueue(req) == EnqueueOutcome::Backpressure {
            pending = Some(req);
        }
        let gap = rng.random_range(0..12);
        for _ in 0..=gap {
            m.tick(now).unwrap();
            now += 1;
        }
        m.take_completions(&mut done);
    }
    drain(&mut m, now);
    m.log_mut().take_all()
}
