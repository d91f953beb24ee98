//! Trace-driven simulator of a last-level cache in front of a DDR5 memory
//! subsystem.
//!
//! The crate models the path from an LLC-level access stream down to DRAM
//! commands:
//!
//! * [`geometry`] decodes physical addresses into DRAM coordinates.
//! * [`timing`] answers "earliest legal issue cycle" for ACT/PRE/RD/WR.
//! * [`controller`] queues requests and schedules them (FR-FCFS, watermark
//!   write drains, adaptive open page).
//! * [`cache`] is a set-associative LLC with LRU / SRRIP / SHiP replacement.
//! * [`policy`] holds the bank-aware replacement and cleansing hooks, the
//!   BLP-Tracker, and the Eager Writeback / Virtual Write Queue baselines.
//! * [`workload`] produces access streams and the bounded-reads frontend.
//! * [`engine`] binds everything into a cycle loop and [`stats`] measures it.
//! * [`config`] is the flat key/value run configuration used by the CLI.

pub mod audit;
pub mod cache;
pub mod config;
pub mod controller;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod policy;
pub mod stats;
pub mod timing;
pub mod workload;

/// Controller command-clock cycle (2400 MHz for DDR5-4800).
pub type Cycle = u64;

/// Direction of a memory access as seen by the LLC and the controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccessKind {
    Read,
    Write,
}

pub use config::RunConfig;
pub use engine::{run, Engine};
pub use error::{ConfigError, SimError, TraceError};
pub use geometry::{AddressMapping, DramCoord, DramGeometry};
pub use policy::{BlpTracker, PolicyChoice};
pub use stats::StatsReport;
pub use timing::TimingParams;
