//! Write policies: the BLP-Tracker, bank-aware replacement (BARD-E/C/H) and
//! the Eager Writeback / Virtual Write Queue baselines.

mod bard;
mod proactive;
mod tracker;

pub use bard::{bard_c_cleanse, bard_e_select, bard_h_hook, HookDecision};
pub use proactive::{eager_writeback_pick, vwq_same_row, DirtyRowIndex, RowKey};
pub use tracker::{BlpTracker, TrackerReset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyChoice {
    Baseline,
    BardE,
    BardC,
    BardH,
    EagerWriteback,
    Vwq,
}

impl PolicyChoice {
    pub const ALL: [PolicyChoice; 6] = [
        PolicyChoice::Baseline,
        PolicyChoice::BardE,
        PolicyChoice::BardC,
        PolicyChoice::BardH,
        PolicyChoice::EagerWriteback,
        PolicyChoice::Vwq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyChoice::Baseline => "baseline",
            PolicyChoice::BardE => "bard-e",
            PolicyChoice::BardC => "bard-c",
            PolicyChoice::BardH => "bard-h",
            PolicyChoice::EagerWriteback => "ew",
            PolicyChoice::Vwq => "vwq",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        match s.as_str() {
            "eager-writeback" => Some(PolicyChoice::EagerWriteback),
            _ => Self::ALL.into_iter().find(|p| p.name() == s),
        }
    }

    /// Does this mode consult and mark the BLP tracker?
    pub fn uses_tracker(self) -> bool {
        matches!(self, PolicyChoice::BardE | PolicyChoice::BardC | PolicyChoice::BardH)
    }

    pub fn overrides(self) -> bool {
        matches!(self, PolicyChoice::BardE | PolicyChoice::BardH)
    }

    pub fn cleanses(self) -> bool {
        matches!(self, PolicyChoice::BardC | PolicyChoice::BardH)
    }
}

/// How replacements in full sets were decided under a BARD mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecisionBreakdown {
    /// Base victim evicted, no cleanse.
    pub lru_evictions: u64,
    /// BARD-E replaced the base victim.
    pub overrides: u64,
    /// Base victim evicted and another line cleansed.
    pub cleanses: u64,
}

impl DecisionBreakdown {
    pub fn total(&self) -> u64 {
        self.lru_evictions + self.overrides + self.cleanses
    }
}
