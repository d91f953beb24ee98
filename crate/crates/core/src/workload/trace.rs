//! Trace file formats.
//!
//! Binary (`.blpt`): magic `BLP1`, little-endian `u32` record count, then
//! 9-byte records: a type byte (low nibble 0 = read, 1 = write; high nibble
//! = stream id) followed by the little-endian `u64` address.
//!
//! Text: one `kind,addr_hex,stream` record per line, `kind` being `R`/`W`
//! (or `read`/`write`). Blank lines, `#` comments and a `kind,...` header
//! are skipped.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{TraceRecord, MAX_STREAMS};
use crate::error::TraceError;
use crate::AccessKind;

pub const TRACE_MAGIC: &[u8; 4] = b"BLP1";
const RECORD_BYTES: u64 = 9;

fn parse_err(offset: u64, msg: impl Into<String>) -> TraceError {
    TraceError::Parse { offset, msg: msg.into() }
}

pub fn write_binary(w: &mut impl Write, records: &[TraceRecord]) -> Result<(), TraceError> {
    let count = u32::try_from(records.len()).map_err(|_| parse_err(4, "more than u32::MAX records"))?;
    w.write_all(TRACE_MAGIC)?;
    w.write_all(&count.to_le_bytes())?;
    for r in records {
        if r.stream_id as usize >= MAX_STREAMS {
            return Err(parse_err(0, format!("stream id {} does not fit the type byte", r.stream_id)));
        }
        let kind = match r.kind {
            AccessKind::Read => 0u8,
            AccessKind::Write => 1,
        };
        w.write_all(&[kind | (r.stream_id << 4)])?;
        w.write_all(&r.addr.to_le_bytes())?;
    }
    Ok(())
}

/// Streaming reader over a binary trace.
pub struct BinaryTraceReader<R> {
    inner: R,
    remaining: u32,
    offset: u64,
}

impl<R: Read> BinaryTraceReader<R> {
    pub fn new(mut inner: R) -> Result<Self, TraceError> {
        let mut head = [0u8; 8];
        read_exact_at(&mut inner, &mut head, 0, "header")?;
        if &head[..4] != TRACE_MAGIC {
            return Err(parse_err(0, "bad magic, expected BLP1"));
        }
        let remaining = u32::from_le_bytes(head[4..].try_into().unwrap());
        Ok(BinaryTraceReader { inner, remaining, offset: 8 })
    }

    pub fn remaining(&self) -> u32 {
        self.remaining
    }
}

fn read_exact_at(r: &mut impl Read, buf: &mut [u8], offset: u64, what: &str) -> Result<(), TraceError> {
    match r.read_exact(buf) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Err(parse_err(offset, format!("truncated {what}"))),
        Err(e) => Err(e.into()),
    }
}

impl<R: Read> Iterator for BinaryTraceReader<R> {
    type Item = Result<TraceRecord, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let at = self.offset;
        let mut buf = [0u8; RECORD_BYTES as usize];
        if let Err(e) = read_exact_at(&mut self.inner, &mut buf, at, "record") {
            self.remaining = 0;
            return Some(Err(e));
        }
        self.offset += RECORD_BYTES;
        self.remaining -= 1;
        let kind = match buf[0] & 0x0f {
            0 => AccessKind::Read,
            1 => AccessKind::Write,
            k => {
                self.remaining = 0;
                return Some(Err(parse_err(at, format!("unknown access type {k}"))));
            }
        };
        Some(Ok(TraceRecord {
            kind,
            addr: u64::from_le_bytes(buf[1..].try_into().unwrap()),
            stream_id: buf[0] >> 4,
        }))
    }
}

pub fn read_binary(r: impl Read) -> Result<Vec<TraceRecord>, TraceError> {
    BinaryTraceReader::new(r)?.collect()
}

pub fn write_csv(w: &mut impl Write, records: &[TraceRecord]) -> Result<(), TraceError> {
    writeln!(w, "kind,addr_hex,stream")?;
    for r in records {
        let k = match r.kind {
            AccessKind::Read => 'R',
            AccessKind::Write => 'W',
        };
        writeln!(w, "{k},{:#x},{}", r.addr, r.stream_id)?;
    }
    Ok(())
}

pub fn read_csv(r: impl BufRead) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in r.split(b'\n') {
        let raw = line?;
        let at = offset;
        offset += raw.len() as u64 + 1;
        let text = std::str::from_utf8(&raw).map_err(|_| parse_err(at, "not UTF-8"))?.trim();
        if text.is_empty() || text.starts_with('#') || text.starts_with("kind") {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(at, format!("expected 3 fields, got {}", fields.len())));
        }
        let kind = match fields[0].to_ascii_lowercase().as_str() {
            "r" | "read" => AccessKind::Read,
            "w" | "write" => AccessKind::Write,
            k => return Err(parse_err(at, format!("unknown access kind `{k}`"))),
        };
        let hex = fields[1].trim_start_matches("0x").trim_start_matches("0X");
        let addr = u64::from_str_radix(hex, 16).map_err(|_| parse_err(at, format!("bad address `{}`", fields[1])))?;
        let stream_id: u8 = fields[2]
            .parse()
            .ok()
            .filter(|&s: &u8| (s as usize) < MAX_STREAMS)
            .ok_or_else(|| parse_err(at, format!("bad stream id `{}`", fields[2])))?;
        out.push(TraceRecord { kind, addr, stream_id });
    }
    Ok(out)
}

/// Load a trace, choosing the format by content: binary if it starts with
/// the magic, text otherwise.
pub fn read_trace_file(path: &Path) -> Result<Vec<TraceRecord>, TraceError> {
    let mut f = BufReader::new(File::open(path)?);
    let is_binary = f.fill_buf()?.starts_with(TRACE_MAGIC);
    if is_binary {
        read_binary(f)
    } else {
        read_csv(f)
    }
}
