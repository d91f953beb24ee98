//! Issue three writes back to back and print the WR-to-WR gaps for the
//! three classic cases: different bankgroups, same bankgroup, same-bank
//! row conflict.

use blpsim::controller::{ControllerConfig, MemoryController, Request};
use blpsim::stats::CommandLog;
use blpsim::timing::Command;
use blpsim::{AccessKind, DramCoord, RunConfig, TimingParams};

fn gaps(writes: [DramCoord; 3], tp: &TimingParams) -> Vec<u64> {
    let cfg = RunConfig::default();
    let map = cfg.mapping().unwrap();
    let mc = ControllerConfig { opportunistic_drain: false, ..Default::default() };
    let mut m = MemoryController::new(0, &cfg.geom, tp.clone(), mc, CommandLog::new(0).keep_all());
    for (i, coord) in writes.into_iter().enumerate() {
        let req = Request { id: i as u64, addr: map.compose(&coord), coord, kind: AccessKind::Write, arrival: 0, source_id: 0 };
        m.enqueue(req);
    }
    m.set_flush(true);
    while let Some(t) = m.next_event() {
        m.tick(t).unwrap();
        if m.is_idle() {
            break;
        }
    }
    let wr: Vec<u64> = m.log().all().iter().filter(|r| r.cmd == Command::Wr).map(|r| r.cycle).collect();
    wr.windows(2).map(|w| w[1] - w[0]).collect()
}

fn main() {
    let tp = TimingParams::default();
    let c = DramCoord::new;
    println!("different bankgroups: {:?}", gaps([c(0, 0, 0, 0, 5, 0), c(0, 0, 1, 0, 5, 0), c(0, 0, 2, 0, 5, 0)], &tp));
    println!("same bankgroup:       {:?}", gaps([c(0, 0, 3, 0, 5, 0), c(0, 0, 3, 1, 5, 0), c(0, 0, 3, 2, 5, 0)], &tp));
    println!("row conflict:         {:?}", gaps([c(0, 1, 6, 3, 1, 0), c(0, 1, 6, 3, 2, 0), c(0, 1, 6, 3, 3, 0)], &tp));
    println!("x8 same bankgroup:    {:?}", gaps([c(0, 0, 3, 0, 5, 0), c(0, 0, 3, 1, 5, 0), c(0, 0, 3, 2, 5, 0)], &TimingParams::x8()));
    println!("conflict gap from parameters: {}", tp.write_conflict_gap());
}
