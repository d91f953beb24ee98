//! Deterministic synthetic generators. Every access touches one 64-byte
//! line; array "elements" are lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SyntheticSpec, TraceRecord, WorkloadKind, MAX_STREAMS};
use crate::AccessKind;

const LINE: u64 = 64;

/// STREAM-style kernel over three line arrays `a`, `b`, `c` laid out back
/// to back. Per element:
///
/// | kernel | accesses                 |
/// |--------|--------------------------|
/// | copy   | read a, write b          |
/// | scale  | read b, write c          |
/// | add    | read a, read b, write c  |
/// | triad  | read b, read c, write a  |
///
/// Arrays are streams 0, 1, 2. The kernel wraps around until `length`
/// accesses have been produced.
pub struct StreamKernel {
    pattern: &'static [(u64, AccessKind)],
    elements: u64,
    i: u64,
    step: usize,
    left: u64,
}

impl StreamKernel {
    pub fn new(kind: WorkloadKind, footprint: u64, length: u64) -> Self {
        use AccessKind::{Read as R, Write as W};
        let pattern: &'static [(u64, AccessKind)] = match kind {
            WorkloadKind::StreamCopy => &[(0, R), (1, W)],
            WorkloadKind::StreamScale => &[(1, R), (2, W)],
            WorkloadKind::StreamAdd => &[(0, R), (1, R), (2, W)],
            WorkloadKind::StreamTriad => &[(1, R), (2, R), (0, W)],
            other => panic!("{} is not a stream kernel", other.name()),
        };
        StreamKernel {
            pattern,
            elements: (footprint / (3 * LINE)).max(1),
            i: 0,
            step: 0,
            left: length,
        }
    }
}

impl Iterator for StreamKernel {
    type Item = TraceRecord;

    fn next(&mut self) -> Option<TraceRecord> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        let (array, kind) = self.pattern[self.step];
        let addr = (array * self.elements + self.i) * LINE;
        self.step += 1;
        if self.step == self.pattern.len() {
            self.step = 0;
            self.i = (self.i + 1) % self.elements;
        }
        Some(TraceRecord { kind, addr, stream_id: array as u8 })
    }
}

/// Uniformly random lines over the footprint; each access is a write with
/// probability `write_fraction`.
pub struct UniformRandom {
    rng: ChaCha8Rng,
    lines: u64,
    write_fraction: f64,
    left: u64,
}

impl UniformRandom {
    pub fn new(footprint: u64, write_fraction: f64, length: u64, seed: u64) -> Self {
        UniformRandom {
            rng: ChaCha8Rng::seed_from_u64(seed),
            lines: (footprint / LINE).max(1),
            write_fraction,
            left: length,
        }
    }
}

impl Iterator for UniformRandom {
    type Item = TraceRecord;

    fn next(&mut self) -> Option<TraceRecord> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        let addr = self.rng.random_range(0..self.lines) * LINE;
        let kind = if self.rng.random::<f64>() < self.write_fraction {
            AccessKind::Write
        } else {
            AccessKind::Read
        };
        Some(TraceRecord { kind, addr, stream_id: 0 })
    }
}

/// Several streams over disjoint regions, interleaved at random. Stream
/// `k` is random read/write (`k % 3 == 0`), a sequential read scan
/// (`k % 3 == 1`) or a sequential write scan (`k % 3 == 2`).
pub struct Mixed {
    rng: ChaCha8Rng,
    region_lines: u64,
    cursors: Vec<u64>,
    write_fraction: f64,
    left: u64,
}

impl Mixed {
    pub fn new(footprint: u64, write_fraction: f64, length: u64, streams: u32, seed: u64) -> Self {
        let n = (streams as usize).clamp(1, MAX_STREAMS);
        Mixed {
            rng: ChaCha8Rng::seed_from_u64(seed),
            region_lines: (footprint / LINE / n as u64).max(1),
            cursors: vec![0; n],
            write_fraction,
            left: length,
        }
    }
}

impl Iterator for Mixed {
    type Item = TraceRecord;

    fn next(&mut self) -> Option<TraceRecord> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        let k = self.rng.random_range(0..self.cursors.len());
        let base = k as u64 * self.region_lines;
        let (line, kind) = match k % 3 {
            0 => {
                let line = self.rng.random_range(0..self.region_lines);
                let kind = if self.rng.random::<f64>() < self.write_fraction {
                    AccessKind::Write
                } else {
                    AccessKind::Read
                };
                (line, kind)
            }
            r => {
                let line = self.cursors[k];
                self.cursors[k] = (line + 1) % self.region_lines;
                (line, if r == 1 { AccessKind::Read } else { AccessKind::Write })
            }
        };
        Some(TraceRecord { kind, addr: (base + line) * LINE, stream_id: k as u8 })
    }
}

/// Generator for a synthetic spec. Panics on [`WorkloadKind::Trace`].
pub fn generate(spec: &SyntheticSpec) -> Box<dyn Iterator<Item = TraceRecord> + Send> {
    match spec.kind {
        WorkloadKind::StreamCopy | WorkloadKind::StreamAdd | WorkloadKind::StreamScale | WorkloadKind::StreamTriad => {
            Box::new(StreamKernel::new(spec.kind, spec.footprint, spec.length))
        }
        WorkloadKind::UniformRandom => {
            Box::new(UniformRandom::new(spec.footprint, spec.write_fraction, spec.length, spec.seed))
        }
        WorkloadKind::Mixed => Box::new(Mixed::new(
            spec.footprint,
            spec.write_fraction,
            spec.length,
            spec.streams,
            spec.seed,
        )),
        WorkloadKind::Trace => panic!("trace workloads are read from a file"),
    }
}
