use blpsim::geometry::{AddressMapping, DramCoord, DramGeometry};
use blpsim::RunConfig;
use proptest::prelude::*;

// (addr, sc, bg, ba, row, col, flat bank), from a standalone bit-extraction
// script over the default layout with PBPL on row bits 0..4.
const ORACLE: &[(u64, u32, u32, u32, u32, u32, usize)] = &[
    (0x000000000, 0, 0, 0, 0, 0, 0),
    (0x000000040, 1, 0, 0, 0, 0, 32),
    (0x000000080, 0, 0, 0, 0, 1, 0),
    (0x000080000, 0, 0, 1, 1, 0, 1),
    (0x7ffffffc0, 1, 0, 0, 65535, 127, 32),
    (0x74be4be00, 0, 1, 3, 59772, 74, 7),
    (0x12c97bf80, 0, 3, 1, 9618, 123, 13),
    (0x386bfc740, 1, 2, 3, 28887, 124, 43),
    (0x487b8d140, 1, 4, 1, 37111, 12, 49),
    (0x20d960480, 0, 0, 2, 16818, 97, 2),
    (0x578db4c00, 0, 2, 2, 44827, 52, 10),
    (0x6903a5840, 1, 1, 0, 53767, 36, 36),
    (0x764f75840, 1, 7, 1, 60574, 116, 61),
    (0x61ed99500, 0, 3, 1, 50139, 24, 13),
    (0x6a2fda800, 0, 7, 2, 54367, 90, 30),
    (0x058e4b880, 0, 7, 3, 2844, 75, 31),
    (0x0b4900440, 1, 0, 2, 5778, 0, 34),
    (0x379952ec0, 1, 2, 3, 28466, 83, 43),
    (0x2c2531680, 0, 4, 0, 22602, 49, 16),
    (0x2c3a24500, 0, 0, 0, 22644, 36, 0),
    (0x28a11ddc0, 1, 5, 1, 20802, 29, 53),
    (0x1c95c8880, 0, 2, 2, 14635, 73, 10),
    (0x767170b00, 0, 3, 3, 60642, 112, 15),
    (0x1796d8d40, 1, 6, 0, 12077, 88, 56),
    (0x21f371e00, 0, 7, 1, 17382, 112, 29),
    (0x4c32a33c0, 1, 2, 3, 39013, 35, 43),
    (0x5a16efc00, 0, 7, 2, 46125, 110, 30),
    (0x1a0f6cf00, 0, 0, 3, 13342, 108, 3),
    (0x57700c5c0, 1, 5, 0, 44768, 13, 52),
    (0x0a09b9f80, 0, 3, 0, 5139, 57, 12),
    (0x1e214ac00, 0, 4, 3, 15426, 74, 19),
    (0x51768cdc0, 1, 6, 0, 41709, 13, 56),
    (0x610c21580, 0, 3, 2, 49688, 33, 14),
    (0x1b1398000, 0, 1, 3, 13863, 24, 7),
    (0x620bbfbc0, 1, 6, 0, 50199, 63, 56),
    (0x42f4a4a40, 1, 0, 0, 34281, 36, 32),
    (0x39dcab940, 1, 7, 2, 29625, 42, 62),
    (0x5512c6600, 0, 7, 1, 43557, 70, 29),
    (0x170b451c0, 1, 4, 0, 11798, 69, 48),
    (0x798e4f640, 1, 1, 2, 62236, 78, 38),
    (0x59bd42dc0, 1, 3, 3, 45946, 67, 47),
    (0x706871680, 0, 2, 2, 57552, 113, 10),
    (0x6105af440, 1, 6, 1, 49675, 46, 57),
    (0x6ca21f580, 0, 4, 2, 55620, 31, 18),
    (0x6ff6d8a40, 1, 1, 0, 57325, 88, 36),
    (0x1ea650500, 0, 6, 0, 15692, 80, 24),
    (0x6674364c0, 1, 6, 0, 52456, 55, 56),
    (0x3bf3c85c0, 1, 4, 3, 30695, 73, 51),
    (0x0d919a700, 0, 7, 3, 6947, 26, 31),
    (0x33e6b1800, 0, 3, 2, 26573, 48, 14),
];

fn default_mapping() -> AddressMapping {
    RunConfig::default().mapping().unwrap()
}

#[test]
fn default_mapping_matches_oracle_table() {
    let m = default_mapping();
    assert_eq!(m.layout_string(), "sc co bg:3 ba:2 co:6 row:16");
    for &(addr, sc, bg, ba, row, col, flat) in ORACLE {
        let c = m.map_address(addr);
        assert_eq!(
            (c.channel, c.subchannel, c.bankgroup, c.bank, c.row, c.column),
            (0, sc, bg, ba, row, col),
            "addr {addr:#x}"
        );
        assert_eq!(m.flat_bank_id(addr), flat, "addr {addr:#x}");
    }
}

#[test]
fn page_touches_32_banks_two_lines_each() {
    let m = default_mapping();
    for page in [0u64, 7, 12345] {
        let mut count = [0u32; 64];
        for line in 0..64 {
            count[m.flat_bank_id(page * 4096 + line * 64)] += 1;
        }
        assert_eq!(count.iter().filter(|&&n| n == 2).count(), 32);
        assert_eq!(count.iter().filter(|&&n| n == 0).count(), 32);
    }
}

#[test]
fn no_pbpl_mapping_is_plain_extraction() {
    let geom = DramGeometry::default();
    let m = AddressMapping::new(geom.clone(), AddressMapping::default_layout(&geom), false, vec![]).unwrap();
    for &(addr, ..) in ORACLE {
        let c = m.map_address(addr);
        let bank5 = ((((addr >> 8) & 7) << 2) | ((addr >> 11) & 3)) as u32;
        assert_eq!((c.bankgroup << 2) | c.bank, bank5);
        assert_eq!(c.row, ((addr >> 19) & 0xffff) as u32);
    }
}

proptest! {
    #[test]
    fn compose_inverts_map(addr in 0u64..(1 << 35)) {
        let m = default_mapping();
        let line = addr & !63;
        prop_assert_eq!(m.compose(&m.map_address(line)), line);
    }

    #[test]
    fn map_inverts_compose(sc in 0u32..2, bg in 0u32..8, ba in 0u32..4, row in 0u32..65536, col in 0u32..128) {
        let m = default_mapping();
        let c = DramCoord::new(0, sc, bg, ba, row, col);
        prop_assert_eq!(m.map_address(m.compose(&c)), c);
    }

    // Lines of one LLC set (stride = 16 MiB / 16 ways = 1 MiB) spread over
    // banks. Row bit 0 is a set-index bit, so 16 consecutive members of a
    // set differ in row bits 1..4 and hit 16 distinct banks.
    #[test]
    fn pbpl_spreads_set_members(set in 0u64..16384, start in 0u64..1024) {
        let m = default_mapping();
        let mut seen = [false; 64];
        for k in 0..16 {
            let addr = set * 64 + ((start * 16 + k) << 20);
            seen[m.flat_bank_id(addr)] = true;
        }
        prop_assert_eq!(seen.iter().filter(|&&b| b).count(), 16);
    }
}
