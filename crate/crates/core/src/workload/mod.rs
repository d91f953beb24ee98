//! LLC-level access streams: trace files, synthetic generators and the
//! bounded-outstanding-reads frontend.

mod frontend;
mod synth;
mod trace;

pub use frontend::{Frontend, FrontendConfig};
pub use synth::{generate, Mixed, StreamKernel, UniformRandom};
pub use trace::{read_binary, read_csv, read_trace_file, write_binary, write_csv, BinaryTraceReader, TRACE_MAGIC};

use crate::AccessKind;

/// One LLC access.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TraceRecord {
    pub kind: AccessKind,
    pub addr: u64,
    /// Source stream, 0..16.
    pub stream_id: u8,
}

impl TraceRecord {
    pub fn read(addr: u64, stream_id: u8) -> Self {
        TraceRecord { kind: AccessKind::Read, addr, stream_id }
    }

    pub fn write(addr: u64, stream_id: u8) -> Self {
        TraceRecord { kind: AccessKind::Write, addr, stream_id }
    }

    pub fn line_addr(&self) -> u64 {
        self.addr & !63
    }
}

/// Largest stream id representable in the binary trace type byte.
pub const MAX_STREAMS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WorkloadKind {
    StreamCopy,
    StreamAdd,
    StreamScale,
    StreamTriad,
    UniformRandom,
    Mixed,
    /// Replay of `workload.trace`.
    Trace,
}

impl WorkloadKind {
    pub const SYNTHETIC: [WorkloadKind; 6] = [
        WorkloadKind::StreamCopy,
        WorkloadKind::StreamAdd,
        WorkloadKind::StreamScale,
        WorkloadKind::StreamTriad,
        WorkloadKind::UniformRandom,
        WorkloadKind::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorkloadKind::StreamCopy => "stream_copy",
            WorkloadKind::StreamAdd => "stream_add",
            WorkloadKind::StreamScale => "stream_scale",
            WorkloadKind::StreamTriad => "stream_triad",
            WorkloadKind::UniformRandom => "uniform_random",
            WorkloadKind::Mixed => "mixed",
            WorkloadKind::Trace => "trace",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        Self::SYNTHETIC
            .into_iter()
            .chain([WorkloadKind::Trace])
            .find(|k| k.name() == s)
    }
}

/// Parameters of a synthetic workload.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub kind: WorkloadKind,
    pub footprint: u64,
    pub write_fraction: f64,
    pub length: u64,
    pub streams: u32,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            kind: WorkloadKind::UniformRandom,
            footprint: 64 << 20,
            write_fraction: 0.5,
            length: 1_000_000,
            streams: 4,
            seed: 0,
        }
    }
}
