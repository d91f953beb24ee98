//! Independent legality checker for a command log.
//!
//! Replays the log with a bank row-state machine and checks every pair of
//! commands that fall within the largest timing window. It shares no code
//! with the scheduler's earliest-issue computation.

use std::collections::HashMap;

use crate::stats::CommandRecord;
use crate::timing::{Command, TimingParams};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending (later) command in the log.
    pub index: usize,
    pub rule: String,
}

type BankKey = (u32, u32, u32, u32);

fn bank_key(r: &CommandRecord) -> BankKey {
    (r.channel, r.coord.subchannel, r.coord.bankgroup, r.coord.bank)
}

/// Minimum spacing required between an earlier command `a` and a later
/// command `b` on the same sub-channel, with the rule name.
fn pair_rules(a: &CommandRecord, b: &CommandRecord, tp: &TimingParams) -> Vec<(u64, &'static str)> {
    let same_bank = bank_key(a) == bank_key(b);
    let same_bg = a.coord.bankgroup == b.coord.bankgroup;
    let mut rules = Vec::new();
    use Command::*;
    match (a.cmd, b.cmd) {
        (Act, Rd) | (Act, Wr) if same_bank => rules.push((tp.t_rcd, "tRCD")),
        (Act, Pre) if same_bank => rules.push((tp.t_ras, "tRAS")),
        (Pre, Act) if same_bank => rules.push((tp.t_rp, "tRP")),
        (Wr, Pre) if same_bank => rules.push((tp.cwl + tp.t_wr, "tWR")),
        (Rd, Pre) if same_bank => rules.push((tp.t_rtp, "tRTP")),
        _ => {}
    }
    match (a.cmd, b.cmd) {
        (Wr, Wr) => {
            rules.push((tp.t_ccd_s_wr.max(tp.burst), "tCCD_S_WR"));
            if same_bg {
                rules.push((tp.t_ccd_l_wr, "tCCD_L_WR"));
            }
        }
        (Rd, Rd) => {
            rules.push((tp.t_ccd_s_rd.max(tp.burst), "tCCD_S_RD"));
            if same_bg {
                rules.push((tp.t_ccd_l_rd, "tCCD_L_RD"));
            }
        }
        (Rd, Wr) => rules.push((tp.burst + tp.rd_to_wr, "RD->WR turnaround")),
        (Wr, Rd) => rules.push((tp.burst + tp.wr_to_rd, "WR->RD turnaround")),
        _ => {}
    }
    rules
}

fn max_window(tp: &TimingParams) -> u64 {
    [
        tp.t_rcd,
        tp.t_ras,
        tp.t_rp,
        tp.cwl + tp.t_wr,
        tp.t_rtp,
        tp.t_ccd_s_wr,
        tp.t_ccd_l_wr,
        tp.t_ccd_s_rd,
        tp.t_ccd_l_rd,
        tp.burst + tp.rd_to_wr,
        tp.burst + tp.wr_to_rd,
    ]
    .into_iter()
    .max()
    .unwrap_or(0)
}

/// Check `log` (in issue order) against `tp`. Records flagged `ideal` are
/// skipped. Returns every violation found.
pub fn check_log(log: &[CommandRecord], tp: &TimingParams) -> Vec<Violation> {
    let mut out = Vec::new();
    let window = max_window(tp);
    let mut open: HashMap<BankKey, u32> = HashMap::new();
    let mut recent: Vec<usize> = Vec::new();
    for (i, b) in log.iter().enumerate() {
        if b.ideal {
            continue;
        }
        if let Some(&j) = recent.last() {
            if log[j].cycle > b.cycle {
                out.push(Violation { index: i, rule: "log not in issue order".into() });
            }
        }
        let key = bank_key(b);
        match b.cmd {
            Command::Act => {
                if open.insert(key, b.coord.row).is_some() {
                    out.push(Violation { index: i, rule: "ACT to open bank".into() });
                }
            }
            Command::Pre => {
                if open.remove(&key).is_none() {
                    out.push(Violation { index: i, rule: "PRE to closed bank".into() });
                }
            }
            Command::Rd | Command::Wr => {
                if open.get(&key) != Some(&b.coord.row) {
                    out.push(Violation { index: i, rule: format!("{} to a row that is not open", b.cmd.name()) });
                }
            }
        }
        recent.retain(|&j| log[j].cycle + window > b.cycle);
        for &j in &recent {
            let a = &log[j];
            if a.channel != b.channel || a.coord.subchannel != b.coord.subchannel {
                continue;
            }
            let gap = b.cycle - a.cycle.min(b.cycle);
            for (need, rule) in pair_rules(a, b, tp) {
                if gap < need {
                    out.push(Violation {
                        index: i,
                        rule: format!("{rule}: {} at {} after {} at {}, need {need}", b.cmd.name(), b.cycle, a.cmd.name(), a.cycle),
                    });
                }
            }
        }
        recent.push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DramCoord;

    fn rec(cycle: u64, cmd: Command, bg: u32, ba: u32, row: u32) -> CommandRecord {
        CommandRecord {
            cycle,
            cmd,
            channel: 0,
            coord: DramCoord { bankgroup: bg, bank: ba, row, ..Default::default() },
            episode: None,
            ideal: false,
        }
    }

    #[test]
    fn legal_sequence_passes() {
        let tp = TimingParams::default();
        let log = [
            rec(0, Command::Act, 0, 0, 1),
            rec(1, Command::Act, 1, 0, 1),
            rec(39, Command::Wr, 0, 0, 1),
            rec(47, Command::Wr, 1, 0, 1),
            rec(149, Command::Pre, 0, 0, 1),
            rec(188, Command::Act, 0, 0, 2),
            rec(227, Command::Wr, 0, 0, 2),
        ];
        assert!(check_log(&log, &tp).is_empty());
    }

    #[test]
    fn catches_each_kind() {
        let tp = TimingParams::default();
        let log = [
            rec(0, Command::Act, 0, 0, 1),
            rec(38, Command::Wr, 0, 0, 1),
        ];
        assert!(check_log(&log, &tp)[0].rule.starts_with("tRCD"));
        let log = [
            rec(0, Command::Act, 0, 0, 1),
            rec(0, Command::Act, 0, 1, 1),
            rec(100, Command::Wr, 0, 0, 1),
            rec(120, Command::Wr, 0, 1, 1),
        ];
        assert!(check_log(&log, &tp)[0].rule.starts_with("tCCD_L_WR"));
        let log = [rec(0, Command::Wr, 0, 0, 1)];
        assert_eq!(check_log(&log, &tp).len(), 1);
    }
}
