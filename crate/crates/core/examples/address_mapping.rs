//! Decode a few addresses with the default layout and show how the
//! page-interleaving XOR spreads one cache set across banks.

use std::collections::BTreeSet;

use blpsim::RunConfig;

fn main() {
    let map = RunConfig::default().mapping().unwrap();
    print!("{}", map.dump());
    println!();
    for addr in [0x0u64, 0x40, 0x80, 0x2000, 0x8_0000, 0x8_0040, 0xdead_bec0] {
        let c = map.map_address(addr);
        println!("{addr:#012x} -> {c:?} bank {}", map.flat_bank_id(addr));
        assert_eq!(map.compose(&c), addr & !63);
    }

    // lines 1 MiB apart land in the same LLC set under a 16-way 16 MiB cache
    let banks: BTreeSet<usize> = (0..16u64).map(|i| map.flat_bank_id(i << 20)).collect();
    println!("16 lines of one set touch {} distinct banks", banks.len());
}
