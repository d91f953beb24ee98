//! Generate a synthetic trace, write it in both file formats, read it back
//! and replay it through the engine.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use blpsim::workload::{generate, read_binary, read_csv, write_binary, write_csv, TraceRecord, WorkloadKind};
use blpsim::{Engine, RunConfig};

fn main() {
    let mut cfg = RunConfig::default();
    cfg.cache.capacity = 1 << 20;
    cfg.workload.kind = WorkloadKind::StreamTriad;
    cfg.workload.footprint = 8 << 20;
    cfg.workload.length = 50_000;
    let records: Vec<TraceRecord> = generate(&cfg.workload).collect();

    let dir = std::env::temp_dir();
    let bin = dir.join("blpsim_example.trace");
    let csv = dir.join("blpsim_example.csv");
    write_binary(&mut BufWriter::new(File::create(&bin).unwrap()), &records).unwrap();
    write_csv(&mut BufWriter::new(File::create(&csv).unwrap()), &records).unwrap();
    let from_bin = read_binary(BufReader::new(File::open(&bin).unwrap())).unwrap();
    let from_csv = read_csv(BufReader::new(File::open(&csv).unwrap())).unwrap();
    assert_eq!(from_bin, records);
    assert_eq!(from_csv, records);
    println!("{} records, binary {} bytes", records.len(), std::fs::metadata(&bin).unwrap().len());

    let replayed = Engine::from_records(cfg.clone(), from_bin).unwrap().run().unwrap();
    let direct = blpsim::run(&cfg).unwrap();
    assert_eq!(replayed.total_cycles, direct.total_cycles);
    println!("{}", replayed.summary());
    let _ = std::fs::remove_file(bin);
    let _ = std::fs::remove_file(csv);
}
