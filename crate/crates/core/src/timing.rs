//! DDR5 command timing.
//!
//! All values are controller command-clock cycles at 2400 MHz. The
//! write-to-precharge recovery is counted from the start of the write data
//! burst (`WR + CWL`), so a same-bank row conflict between two writes costs
//! `tWR + tRP + tRCD + CWL = 188` cycles with the default table.

use std::fmt::Write as _;

use crate::error::{ConfigError, SimError};
use crate::geometry::{DramCoord, DramGeometry};
use crate::Cycle;

/// Controller clock in MHz (DDR5-4800).
pub const CLOCK_MHZ: f64 = 2400.0;

pub fn cycles_to_ns(cycles: f64) -> f64 {
    cycles * 1000.0 / CLOCK_MHZ
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimingParams {
    pub cl: u64,
    pub cwl: u64,
    pub t_rcd: u64,
    pub t_rp: u64,
    pub t_ras: u64,
    pub t_wr: u64,
    /// Read-to-precharge.
    pub t_rtp: u64,
    /// Data-bus occupancy of one 64-byte transfer (BL/2).
    pub burst: u64,
    pub t_ccd_s_wr: u64,
    pub t_ccd_l_wr: u64,
    pub t_ccd_s_rd: u64,
    pub t_ccd_l_rd: u64,
    pub rd_to_wr: u64,
    pub wr_to_rd: u64,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            cl: 40,
            cwl: 38,
            t_rcd: 39,
            t_rp: 39,
            t_ras: 77,
            t_wr: 72,
            t_rtp: 18,
            burst: 8,
            t_ccd_s_wr: 8,
            t_ccd_l_wr: 48,
            t_ccd_s_rd: 8,
            t_ccd_l_rd: 16,
            // 22 ns rounded up
            rd_to_wr: 53,
            wr_to_rd: 53,
        }
    }
}

/// tCCD_L_WR for x8 devices (10 ns): no on-die-ECC read-modify-write.
pub const X8_TCCD_L_WR: u64 = 24;

impl TimingParams {
    pub fn x8() -> Self {
        TimingParams {
            t_ccd_l_wr: X8_TCCD_L_WR,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, v) in self.entries() {
            if v == 0 {
                return Err(ConfigError::invalid(key, v, "timing values must be positive"));
            }
        }
        if self.t_ccd_l_wr < self.t_ccd_s_wr {
            return Err(ConfigError::inconsistent("timing.tccd_l_wr", "must be >= tccd_s_wr"));
        }
        if self.t_ccd_l_rd < self.t_ccd_s_rd {
            return Err(ConfigError::inconsistent("timing.tccd_l_rd", "must be >= tccd_s_rd"));
        }
        if self.t_ras < self.t_rcd {
            return Err(ConfigError::inconsistent("timing.tras", "must be >= trcd"));
        }
        Ok(())
    }

    /// `(config key, value)` for every parameter, in table order.
    pub fn entries(&self) -> [(&'static str, u64); 14] {
        [
            ("timing.cl", self.cl),
            ("timing.cwl", self.cwl),
            ("timing.trcd", self.t_rcd),
            ("timing.trp", self.t_rp),
            ("timing.tras", self.t_ras),
            ("timing.twr", self.t_wr),
            ("timing.trtp", self.t_rtp),
            ("timing.burst", self.burst),
            ("timing.tccd_s_wr", self.t_ccd_s_wr),
            ("timing.tccd_l_wr", self.t_ccd_l_wr),
            ("timing.tccd_s_rd", self.t_ccd_s_rd),
            ("timing.tccd_l_rd", self.t_ccd_l_rd),
            ("timing.rd_to_wr", self.rd_to_wr),
            ("timing.wr_to_rd", self.wr_to_rd),
        ]
    }

    pub fn field_mut(&mut self, key: &str) -> Option<&mut u64> {
        Some(match key {
            "timing.cl" => &mut self.cl,
            "timing.cwl" => &mut self.cwl,
            "timing.trcd" => &mut self.t_rcd,
            "timing.trp" => &mut self.t_rp,
            "timing.tras" => &mut self.t_ras,
            "timing.twr" => &mut self.t_wr,
            "timing.trtp" => &mut self.t_rtp,
            "timing.burst" => &mut self.burst,
            "timing.tccd_s_wr" => &mut self.t_ccd_s_wr,
            "timing.tccd_l_wr" => &mut self.t_ccd_l_wr,
            "timing.tccd_s_rd" => &mut self.t_ccd_s_rd,
            "timing.tccd_l_rd" => &mut self.t_ccd_l_rd,
            "timing.rd_to_wr" => &mut self.rd_to_wr,
            "timing.wr_to_rd" => &mut self.wr_to_rd,
            _ => return None,
        })
    }

    /// Same-bank write row-conflict gap: WR, PRE, ACT, WR.
    pub fn write_conflict_gap(&self) -> u64 {
        self.cwl + self.t_wr + self.t_rp + self.t_rcd
    }

    /// Table of effective timings in cycles and nanoseconds.
    pub fn dump(&self) -> String {
        let mut s = String::from("parameter          cycles       ns\n");
        for (key, v) in self.entries() {
            let name = key.trim_start_matches("timing.");
            let _ = writeln!(s, "{name:<16} {v:>8} {:>8.1}", cycles_to_ns(v as f64));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Act,
    Pre,
    Rd,
    Wr,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Act => "ACT",
            Command::Pre => "PRE",
            Command::Rd => "RD",
            Command::Wr => "WR",
        }
    }

    pub fn is_column(self) -> bool {
        matches!(self, Command::Rd | Command::Wr)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BusDirection {
    Idle,
    Read,
    Write,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BankState {
    pub open_row: Option<u32>,
    pub act_ok_at: Cycle,
    pub pre_ok_at: Cycle,
    pub rd_ok_at: Cycle,
    pub wr_ok_at: Cycle,
    pub last_activate_at: Option<Cycle>,
    pub last_write_burst_end: Cycle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubchannelBusState {
    pub direction: BusDirection,
    /// Earliest issue cycle of the next column command in the current
    /// direction (last column issue + burst).
    pub bus_free_at: Cycle,
    pub last_write_issue: Option<Cycle>,
    pub last_write_issue_bg: Vec<Option<Cycle>>,
    pub last_read_issue: Option<Cycle>,
    pub last_read_issue_bg: Vec<Option<Cycle>>,
}

impl SubchannelBusState {
    pub fn new(bankgroups: usize) -> Self {
        SubchannelBusState {
            direction: BusDirection::Idle,
            bus_free_at: 0,
            last_write_issue: None,
            last_write_issue_bg: vec![None; bankgroups],
            last_read_issue: None,
            last_read_issue_bg: vec![None; bankgroups],
        }
    }
}

fn after(last: Option<Cycle>, gap: u64) -> Cycle {
    last.map_or(0, |t| t + gap)
}

fn bus_ready(bus: &SubchannelBusState, dir: BusDirection, tp: &TimingParams) -> Cycle {
    match (bus.direction, dir) {
        (BusDirection::Idle, _) => 0,
        (a, b) if a == b => bus.bus_free_at,
        (BusDirection::Read, _) => bus.bus_free_at + tp.rd_to_wr,
        _ => bus.bus_free_at + tp.wr_to_rd,
    }
}

/// Smallest cycle `>= now` at which `cmd` may legally issue to `coord`.
///
/// Fails with [`SimError::Contract`] when the command does not fit the
/// bank's row state (column command to a closed or different row, ACT to
/// an open bank, PRE to a closed bank).
pub fn earliest_issue(
    cmd: Command,
    coord: &DramCoord,
    now: Cycle,
    bank: &BankState,
    bus: &SubchannelBusState,
    tp: &TimingParams,
) -> Result<Cycle, SimError> {
    let bg = coord.bankgroup as usize;
    let t = match cmd {
        Command::Act => {
            if bank.open_row.is_some() {
                return Err(illegal(cmd, coord, bank));
            }
            bank.act_ok_at
        }
        Command::Pre => {
            if bank.open_row.is_none() {
                return Err(illegal(cmd, coord, bank));
            }
            bank.pre_ok_at
        }
        Command::Rd => {
            if bank.open_row != Some(coord.row) {
                return Err(illegal(cmd, coord, bank));
            }
            bank.rd_ok_at
                .max(after(bus.last_read_issue, tp.t_ccd_s_rd))
                .max(after(bus.last_read_issue_bg[bg], tp.t_ccd_l_rd))
                .max(bus_ready(bus, BusDirection::Read, tp))
        }
        Command::Wr => {
            if bank.open_row != Some(coord.row) {
                return Err(illegal(cmd, coord, bank));
            }
            bank.wr_ok_at
                .max(after(bus.last_write_issue, tp.t_ccd_s_wr))
                .max(after(bus.last_write_issue_bg[bg], tp.t_ccd_l_wr))
                .max(bus_ready(bus, BusDirection::Write, tp))
        }
    };
    Ok(t.max(now))
}

fn illegal(cmd: Command, coord: &DramCoord, bank: &BankState) -> SimError {
    SimError::Contract(format!(
        "{} to {coord} with bank row state {:?}",
        cmd.name(),
        bank.open_row
    ))
}

/// Apply the state transition of `cmd` issued at `at`.
pub fn commit_command(
    cmd: Command,
    coord: &DramCoord,
    at: Cycle,
    bank: &mut BankState,
    bus: &mut SubchannelBusState,
    tp: &TimingParams,
) {
    let bg = coord.bankgroup as usize;
    match cmd {
        Command::Act => {
            bank.open_row = Some(coord.row);
            bank.last_activate_at = Some(at);
            bank.rd_ok_at = at + tp.t_rcd;
            bank.wr_ok_at = at + tp.t_rcd;
            bank.pre_ok_at = bank.pre_ok_at.max(at + tp.t_ras);
        }
        Command::Pre => {
            bank.open_row = None;
            bank.act_ok_at = at + tp.t_rp;
        }
        Command::Rd => {
            bank.pre_ok_at = bank.pre_ok_at.max(at + tp.t_rtp);
            bus.direction = BusDirection::Read;
            bus.bus_free_at = at + tp.burst;
            bus.last_read_issue = Some(at);
            bus.last_read_issue_bg[bg] = Some(at);
        }
        Command::Wr => {
            bank.pre_ok_at = bank.pre_ok_at.max(at + tp.cwl + tp.t_wr);
            bank.last_write_burst_end = at + tp.cwl + tp.burst;
            bus.direction = BusDirection::Write;
            bus.bus_free_at = at + tp.burst;
            bus.last_write_issue = Some(at);
            bus.last_write_issue_bg[bg] = Some(at);
        }
    }
}

/// Ideal-write mode: a WR needs only the data bus, one burst after the
/// previous write.
pub fn earliest_ideal_write(now: Cycle, bus: &SubchannelBusState, tp: &TimingParams) -> Cycle {
    after(bus.last_write_issue, tp.burst)
        .max(bus_ready(bus, BusDirection::Write, tp))
        .max(now)
}

pub fn commit_ideal_write(at: Cycle, bus: &mut SubchannelBusState, tp: &TimingParams) {
    bus.direction = BusDirection::Write;
    bus.bus_free_at = at + tp.burst;
    bus.last_write_issue = Some(at);
}

/// Banks and data bus of one sub-channel.
#[derive(Clone, Debug)]
pub struct DramSubchannel {
    pub banks: Vec<BankState>,
    pub bus: SubchannelBusState,
    banks_per_bankgroup: u32,
}

impl DramSubchannel {
    pub fn new(geom: &DramGeometry) -> Self {
        DramSubchannel {
            banks: vec![BankState::default(); geom.banks_per_subchannel() as usize],
            bus: SubchannelBusState::new(geom.bankgroups as usize),
            banks_per_bankgroup: geom.banks_per_bankgroup,
        }
    }

    pub fn bank_index(&self, coord: &DramCoord) -> usize {
        (coord.bankgroup * self.banks_per_bankgroup + coord.bank) as usize
    }

    pub fn bank(&self, coord: &DramCoord) -> &BankState {
        &self.banks[self.bank_index(coord)]
    }

    pub fn earliest(&self, cmd: Command, coord: &DramCoord, now: Cycle, tp: &TimingParams) -> Result<Cycle, SimError> {
        earliest_issue(cmd, coord, now, self.bank(coord), &self.bus, tp)
    }

    pub fn commit(&mut self, cmd: Command, coord: &DramCoord, at: Cycle, tp: &TimingParams) {
        let i = self.bank_index(coord);
        commit_command(cmd, coord, at, &mut self.banks[i], &mut self.bus, tp);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(bg: u32, ba: u32, row: u32) -> DramCoord {
        DramCoord { bankgroup: bg, bank: ba, row, ..Default::default() }
    }

    /// Sub-channel with the given banks opened long ago.
    fn warm(open: &[DramCoord]) -> (DramSubchannel, TimingParams) {
        let tp = TimingParams::default();
        let mut sc = DramSubchannel::new(&DramGeometry::default());
        for c in open {
            sc.commit(Command::Act, c, 0, &tp);
        }
        (sc, tp)
    }

    fn wr(sc: &mut DramSubchannel, c: &DramCoord, now: Cycle, tp: &TimingParams) -> Cycle {
        let t = sc.earliest(Command::Wr, c, now, tp).unwrap();
        sc.commit(Command::Wr, c, t, tp);
        t
    }

    #[test]
    fn default_table_values() {
        let tp = TimingParams::default();
        assert_eq!((tp.cl, tp.cwl, tp.t_rcd, tp.t_rp, tp.t_ras, tp.t_wr), (40, 38, 39, 39, 77, 72));
        assert_eq!((tp.burst, tp.t_ccd_s_wr, tp.t_ccd_l_wr), (8, 8, 48));
        assert_eq!(tp.t_ccd_l_wr / tp.t_ccd_s_wr, 6);
        assert_eq!(tp.write_conflict_gap(), 188);
        assert_eq!(tp.write_conflict_gap() as f64 / tp.t_ccd_s_wr as f64, 23.5);
        assert_eq!(TimingParams::x8().t_ccd_l_wr, 24);
    }

    #[test]
    fn write_gap_different_bankgroups() {
        let (a, b) = (coord(0, 0, 1), coord(1, 0, 1));
        let (mut sc, tp) = warm(&[a, b]);
        let t0 = wr(&mut sc, &a, 1000, &tp);
        let t1 = wr(&mut sc, &b, t0, &tp);
        assert_eq!(t1 - t0, 8);
    }

    #[test]
    fn write_gap_same_bankgroup_and_row_hit() {
        let (a, b) = (coord(2, 0, 1), coord(2, 3, 1));
        let (mut sc, tp) = warm(&[a, b]);
        let t0 = wr(&mut sc, &a, 1000, &tp);
        assert_eq!(wr(&mut sc, &b, t0, &tp) - t0, 48);
        let t2 = wr(&mut sc, &b, 0, &tp);
        let t3 = wr(&mut sc, &b, t2, &tp);
        assert_eq!(t3 - t2, 48);
    }

    #[test]
    fn write_gap_row_conflict() {
        let a = coord(5, 1, 7);
        let b = coord(5, 1, 9);
        let (mut sc, tp) = warm(&[a]);
        let t0 = wr(&mut sc, &a, 1000, &tp);
        let pre = sc.earliest(Command::Pre, &a, t0, &tp).unwrap();
        sc.commit(Command::Pre, &a, pre, &tp);
        let act = sc.earliest(Command::Act, &b, pre, &tp).unwrap();
        sc.commit(Command::Act, &b, act, &tp);
        let t1 = wr(&mut sc, &b, act, &tp);
        assert_eq!(t1 - t0, 188);
    }

    #[test]
    fn activate_then_column_and_precharge() {
        let tp = TimingParams::default();
        let mut sc = DramSubchannel::new(&DramGeometry::default());
        let c = coord(0, 0, 3);
        sc.commit(Command::Act, &c, 0, &tp);
        assert_eq!(sc.earliest(Command::Wr, &c, 0, &tp).unwrap(), 39);
        assert_eq!(sc.earliest(Command::Rd, &c, 0, &tp).unwrap(), 39);
        assert_eq!(sc.earliest(Command::Pre, &c, 0, &tp).unwrap(), 77);
    }

    #[test]
    fn illegal_pairings_are_contract_errors() {
        let tp = TimingParams::default();
        let mut sc = DramSubchannel::new(&DramGeometry::default());
        let c = coord(0, 0, 3);
        assert!(matches!(sc.earliest(Command::Wr, &c, 0, &tp), Err(SimError::Contract(_))));
        assert!(sc.earliest(Command::Pre, &c, 0, &tp).is_err());
        sc.commit(Command::Act, &c, 0, &tp);
        assert!(sc.earliest(Command::Act, &c, 0, &tp).is_err());
        assert!(sc.earliest(Command::Rd, &coord(0, 0, 4), 0, &tp).is_err());
    }

    #[test]
    fn round_robin_32_banks_at_burst_spacing() {
        let mut order = Vec::new();
        for ba in 0..4 {
            for bg in 0..8 {
                order.push(coord(bg, ba, 1));
            }
        }
        let (mut sc, tp) = warm(&order);
        let mut now = 1000;
        let first = wr(&mut sc, &order[0], now, &tp);
        now = first;
        let mut last = first;
        for c in &order[1..] {
            let t = wr(&mut sc, c, now, &tp);
            assert_eq!(t - last, 8);
            last = t;
            now = t;
        }
        assert_eq!(last - first, 31 * 8);
    }

    #[test]
    fn bus_turnaround_applies_once_per_direction_change() {
        let (a, b) = (coord(0, 0, 1), coord(1, 0, 1));
        let (mut sc, tp) = warm(&[a, b]);
        let r = sc.earliest(Command::Rd, &a, 1000, &tp).unwrap();
        sc.commit(Command::Rd, &a, r, &tp);
        let w = wr(&mut sc, &b, r, &tp);
        assert_eq!(w - r, tp.burst + tp.rd_to_wr);
        let w2 = wr(&mut sc, &a, w, &tp);
        assert_eq!(w2 - w, 8);
    }

    #[test]
    fn idle_fast_path() {
        let a = coord(3, 2, 1);
        let (mut sc, tp) = warm(&[a]);
        let t0 = wr(&mut sc, &a, 1000, &tp);
        let later = t0 + 10_000;
        assert_eq!(sc.earliest(Command::Wr, &a, later, &tp).unwrap(), later.max(sc.bus.bus_free_at));
    }

    #[test]
    fn ideal_write_spacing() {
        let tp = TimingParams::default();
        let mut bus = SubchannelBusState::new(8);
        let t0 = earliest_ideal_write(100, &bus, &tp);
        commit_ideal_write(t0, &mut bus, &tp);
        assert_eq!(earliest_ideal_write(t0, &bus, &tp), t0 + 8);
    }
}
