use std::collections::VecDeque;

use super::{TraceRecord, MAX_STREAMS};
use crate::AccessKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontendConfig {
    /// Reads in flight per stream before that stream stalls.
    pub max_outstanding_reads: usize,
    /// Lookahead: younger records of other streams may issue past a stalled
    /// stream within this many records.
    pub window: usize,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        FrontendConfig { max_outstanding_reads: 16, window: 32 }
    }
}

/// Feeds the access stream to the cache, one record per cycle, holding back
/// reads of a stream whose outstanding-read budget is used up. Writes are
/// posted and never wait for completion. Order within a stream is kept.
pub struct Frontend {
    source: Box<dyn Iterator<Item = TraceRecord> + Send>,
    source_done: bool,
    window: VecDeque<TraceRecord>,
    outstanding: [usize; MAX_STREAMS],
    cfg: FrontendConfig,
    issued: u64,
}

impl Frontend {
    pub fn new(source: Box<dyn Iterator<Item = TraceRecord> + Send>, cfg: FrontendConfig) -> Self {
        Frontend {
            source,
            source_done: false,
            window: VecDeque::with_capacity(cfg.window),
            outstanding: [0; MAX_STREAMS],
            cfg,
            issued: 0,
        }
    }

    fn refill(&mut self) {
        while !self.source_done && self.window.len() < self.cfg.window.max(1) {
            match self.source.next() {
                Some(r) => self.window.push_back(r),
                None => self.source_done = true,
            }
        }
    }

    /// First record in the window allowed to issue now.
    pub fn eligible(&mut self) -> Option<(usize, TraceRecord)> {
        self.refill();
        let mut blocked = 0u32;
        for (i, r) in self.window.iter().enumerate() {
            let s = r.stream_id as usize % MAX_STREAMS;
            if blocked & (1 << s) != 0 {
                continue;
            }
            if r.kind == AccessKind::Read && self.outstanding[s] >= self.cfg.max_outstanding_reads {
                blocked |= 1 << s;
                continue;
            }
            return Some((i, *r));
        }
        None
    }

    /// Remove the record at window slot `i` after the engine accepted it.
    pub fn commit(&mut self, i: usize) {
        let r = self.window.remove(i).expect("commit of empty slot");
        if r.kind == AccessKind::Read {
            self.outstanding[r.stream_id as usize % MAX_STREAMS] += 1;
        }
        self.issued += 1;
    }

    pub fn read_done(&mut self, stream: u8) {
        let s = &mut self.outstanding[stream as usize % MAX_STREAMS];
        *s = s.checked_sub(1).expect("read completion without outstanding read");
    }

    pub fn outstanding_reads(&self) -> usize {
        self.outstanding.iter().sum()
    }

    pub fn issued(&self) -> u64 {
        self.issued
    }

    /// No records left to issue.
    pub fn exhausted(&mut self) -> bool {
        self.refill();
        self.window.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_blocks_only_that_stream() {
        let recs = vec![
            TraceRecord::read(0, 0),
            TraceRecord::read(64, 0),
            TraceRecord::write(128, 0),
            TraceRecord::read(192, 1),
        ];
        let mut f = Frontend::new(Box::new(recs.into_iter()), FrontendConfig { max_outstanding_reads: 1, window: 8 });
        assert_eq!(f.eligible().unwrap().0, 0);
        f.commit(0);
        let (i, r) = f.eligible().unwrap();
        assert_eq!((i, r.addr), (2, 192));
        f.commit(i);
        assert!(f.eligible().is_none());
        f.read_done(0);
        assert_eq!(f.eligible().unwrap().1.addr, 64);
    }
}
