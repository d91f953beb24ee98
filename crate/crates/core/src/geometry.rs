//! DRAM organization and physical-address decoding.
//!
//! An [`AddressMapping`] assigns every physical-address bit above the 64-byte
//! line offset to one DRAM field. The default layout, from bit 6 upward, is
//!
//! ```text
//! sc  co  bg bg bg  ba ba  co co co co co co  row x16
//! 6   7   8  9  10  11 12  13 ...         18  19 ... 34
//! ```
//!
//! so one 4 KiB page (bits 6..12) touches 32 distinct banks across both
//! sub-channels with two lines per bank. This is a reconstruction of the
//! AMD Zen layout; the exact Zen bit positions are published only as a
//! figure, so treat the default as documented-but-approximate and override
//! it through `map.layout` when a precise layout is known.
//!
//! With permutation-based page interleaving (PBPL) enabled, the 5-bit
//! `bankgroup‖bank` index is XORed with the low row bits after extraction,
//! which spreads lines of one LLC set over many banks.

use std::fmt;

use crate::error::ConfigError;

pub const LINE_BYTES: u64 = 64;
pub const LINE_OFFSET_BITS: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DramGeometry {
    pub channels: u32,
    pub subchannels: u32,
    pub bankgroups: u32,
    pub banks_per_bankgroup: u32,
    pub rows: u32,
    /// Columns per row, in 64-byte line units.
    pub columns: u32,
}

impl Default for DramGeometry {
    fn default() -> Self {
        DramGeometry {
            channels: 1,
            subchannels: 2,
            bankgroups: 8,
            banks_per_bankgroup: 4,
            rows: 1 << 16,
            columns: 128,
        }
    }
}

impl DramGeometry {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let dims = [
            ("geom.channels", self.channels),
            ("geom.subchannels", self.subchannels),
            ("geom.bankgroups", self.bankgroups),
            ("geom.banks_per_bankgroup", self.banks_per_bankgroup),
            ("geom.rows", self.rows),
            ("geom.columns", self.columns),
        ];
        for (key, v) in dims {
            if v == 0 || !v.is_power_of_two() {
                return Err(ConfigError::invalid(key, v, "must be a power of two >= 1"));
            }
        }
        if self.banks_per_channel() > 256 {
            return Err(ConfigError::inconsistent(
                "geom.bankgroups",
                "more than 256 banks per channel is not supported",
            ));
        }
        Ok(())
    }

    pub fn banks_per_subchannel(&self) -> u32 {
        self.bankgroups * self.banks_per_bankgroup
    }

    pub fn banks_per_channel(&self) -> u32 {
        self.subchannels * self.banks_per_subchannel()
    }

    pub fn field_bits(&self, field: Field) -> u32 {
        let n = match field {
            Field::Channel => self.channels,
            Field::Subchannel => self.subchannels,
            Field::Bankgroup => self.bankgroups,
            Field::Bank => self.banks_per_bankgroup,
            Field::Row => self.rows,
            Field::Column => self.columns,
        };
        n.trailing_zeros()
    }

    /// Addressable bytes covered by this geometry.
    pub fn capacity_bytes(&self) -> u64 {
        LINE_BYTES
            * self.channels as u64
            * self.banks_per_channel() as u64
            * self.rows as u64
            * self.columns as u64
    }

    /// Bank ordinal within a channel: sub-channel major, then bankgroup,
    /// then bank. Range `[0, banks_per_channel)`.
    pub fn flat_bank_id(&self, coord: &DramCoord) -> usize {
        ((coord.subchannel * self.bankgroups + coord.bankgroup) * self.banks_per_bankgroup
            + coord.bank) as usize
    }

    /// Bank ordinal within a sub-channel: bankgroup major.
    pub fn bank_in_subchannel(&self, coord: &DramCoord) -> usize {
        (coord.bankgroup * self.banks_per_bankgroup + coord.bank) as usize
    }

    /// Inverse of [`flat_bank_id`](Self::flat_bank_id) for the
    /// (sub-channel, bankgroup, bank) part.
    pub fn split_bank_id(&self, id: usize) -> (u32, u32, u32) {
        let id = id as u32;
        let ba = id % self.banks_per_bankgroup;
        let bg = (id / self.banks_per_bankgroup) % self.bankgroups;
        let sc = id / self.banks_per_subchannel();
        (sc, bg, ba)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Channel,
    Subchannel,
    Bankgroup,
    Bank,
    Row,
    Column,
}

impl Field {
    pub const ALL: [Field; 6] = [
        Field::Channel,
        Field::Subchannel,
        Field::Bankgroup,
        Field::Bank,
        Field::Row,
        Field::Column,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Field::Channel => "ch",
            Field::Subchannel => "sc",
            Field::Bankgroup => "bg",
            Field::Bank => "ba",
            Field::Row => "row",
            Field::Column => "co",
        }
    }

    pub fn parse(s: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.short_name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Decoded physical address.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct DramCoord {
    pub channel: u32,
    pub subchannel: u32,
    pub bankgroup: u32,
    pub bank: u32,
    pub row: u32,
    pub column: u32,
}

impl DramCoord {
    pub fn new(channel: u32, subchannel: u32, bankgroup: u32, bank: u32, row: u32, column: u32) -> Self {
        DramCoord {
            channel,
            subchannel,
            bankgroup,
            bank,
            row,
            column,
        }
    }

    fn get(&self, f: Field) -> u32 {
        match f {
            Field::Channel => self.channel,
            Field::Subchannel => self.subchannel,
            Field::Bankgroup => self.bankgroup,
            Field::Bank => self.bank,
            Field::Row => self.row,
            Field::Column => self.column,
        }
    }

    fn set(&mut self, f: Field, v: u32) {
        match f {
            Field::Channel => self.channel = v,
            Field::Subchannel => self.subchannel = v,
            Field::Bankgroup => self.bankgroup = v,
            Field::Bank => self.bank = v,
            Field::Row => self.row = v,
            Field::Column => self.column = v,
        }
    }
}

impl fmt::Display for DramCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ch{} sc{} bg{} ba{} row{:#x} col{}",
            self.channel, self.subchannel, self.bankgroup, self.bank, self.row, self.column
        )
    }
}

/// Bit-slice address mapping with optional PBPL bank swizzling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddressMapping {
    geom: DramGeometry,
    /// `bits[i]` is the field fed by physical-address bit `6 + i`; each
    /// field receives its bits LSB first in address order.
    bits: Vec<Field>,
    pbpl: bool,
    /// Row-bit indices XORed into the `bankgroup‖bank` index, LSB first.
    pbpl_row_bits: Vec<u32>,
}

impl AddressMapping {
    pub fn new(
        geom: DramGeometry,
        bits: Vec<Field>,
        pbpl: bool,
        pbpl_row_bits: Vec<u32>,
    ) -> Result<Self, ConfigError> {
        geom.validate()?;
        for f in Field::ALL {
            let have = bits.iter().filter(|&&b| b == f).count() as u32;
            let want = geom.field_bits(f);
            if have != want {
                return Err(ConfigError::inconsistent(
                    "map.layout",
                    format!(
                        "field `{}` has {have} bits, geometry needs {want}",
                        f.short_name()
                    ),
                ));
            }
        }
        if bits.len() as u32 + LINE_OFFSET_BITS > 64 {
            return Err(ConfigError::inconsistent("map.layout", "layout exceeds 64 address bits"));
        }
        if pbpl {
            let bank_bits = geom.field_bits(Field::Bankgroup) + geom.field_bits(Field::Bank);
            if pbpl_row_bits.len() as u32 != bank_bits {
                return Err(ConfigError::inconsistent(
                    "map.pbpl_row_bits",
                    format!("need exactly {bank_bits} row bits to XOR with the bank index"),
                ));
            }
            let row_bits = geom.field_bits(Field::Row);
            for (i, &rb) in pbpl_row_bits.iter().enumerate() {
                if rb >= row_bits {
                    return Err(ConfigError::invalid(
                        "map.pbpl_row_bits",
                        rb,
                        format!("row field has only {row_bits} bits"),
                    ));
                }
                if pbpl_row_bits[..i].contains(&rb) {
                    return Err(ConfigError::invalid("map.pbpl_row_bits", rb, "duplicate row bit"));
                }
            }
        }
        Ok(AddressMapping {
            geom,
            bits,
            pbpl,
            pbpl_row_bits,
        })
    }

    /// Zen-like default layout (see module docs) for the given geometry.
    pub fn default_layout(geom: &DramGeometry) -> Vec<Field> {
        let col = geom.field_bits(Field::Column);
        let low_col = col.min(1);
        let mut bits = Vec::new();
        let mut push = |f: Field, n: u32| bits.extend(std::iter::repeat_n(f, n as usize));
        push(Field::Subchannel, geom.field_bits(Field::Subchannel));
        push(Field::Channel, geom.field_bits(Field::Channel));
        push(Field::Column, low_col);
        push(Field::Bankgroup, geom.field_bits(Field::Bankgroup));
        push(Field::Bank, geom.field_bits(Field::Bank));
        push(Field::Column, col - low_col);
        push(Field::Row, geom.field_bits(Field::Row));
        bits
    }

    /// Default mapping: Zen-like layout with PBPL over the lowest row bits.
    pub fn zen_pbpl(geom: DramGeometry) -> Result<Self, ConfigError> {
        let bits = Self::default_layout(&geom);
        let bank_bits = geom.field_bits(Field::Bankgroup) + geom.field_bits(Field::Bank);
        AddressMapping::new(geom, bits, true, (0..bank_bits).collect())
    }

    pub fn geometry(&self) -> &DramGeometry {
        &self.geom
    }

    pub fn layout(&self) -> &[Field] {
        &self.bits
    }

    pub fn pbpl_enabled(&self) -> bool {
        self.pbpl
    }

    pub fn pbpl_row_bits(&self) -> &[u32] {
        &self.pbpl_row_bits
    }

    /// `(field, physical bit index)` pairs in address order.
    pub fn field_bit_positions(&self) -> Vec<(Field, u32)> {
        self.bits
            .iter()
            .enumerate()
            .map(|(i, &f)| (f, i as u32 + LINE_OFFSET_BITS))
            .collect()
    }

    fn pbpl_mask(&self, row: u32) -> u32 {
        self.pbpl_row_bits
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &rb)| acc | (((row >> rb) & 1) << k))
    }

    /// Decode `addr`. Offset bits and bits above the layout are ignored.
    pub fn map_address(&self, addr: u64) -> DramCoord {
        let mut vals = [0u32; 6];
        let mut widths = [0u32; 6];
        for (i, &f) in self.bits.iter().enumerate() {
            let b = ((addr >> (i as u32 + LINE_OFFSET_BITS)) & 1) as u32;
            let k = f.index();
            vals[k] |= b << widths[k];
            widths[k] += 1;
        }
        let mut c = DramCoord::default();
        for f in Field::ALL {
            c.set(f, vals[f.index()]);
        }
        if self.pbpl {
            self.swizzle(&mut c);
        }
        c
    }

    fn swizzle(&self, c: &mut DramCoord) {
        let ba_bits = self.geom.field_bits(Field::Bank);
        let bank = (c.bankgroup << ba_bits) | c.bank;
        let bank = bank ^ self.pbpl_mask(c.row);
        c.bankgroup = bank >> ba_bits;
        c.bank = bank & ((1 << ba_bits) - 1);
    }

    /// Line-aligned physical address that decodes to `coord`.
    pub fn compose(&self, coord: &DramCoord) -> u64 {
        let mut c = *coord;
        if self.pbpl {
            // the swizzle is an involution for a fixed row
            self.swizzle(&mut c);
        }
        let mut used = [0u32; 6];
        let mut addr = 0u64;
        for (i, &f) in self.bits.iter().enumerate() {
            let k = f.index();
            let b = (c.get(f) >> used[k]) & 1;
            used[k] += 1;
            addr |= (b as u64) << (i as u32 + LINE_OFFSET_BITS);
        }
        addr
    }

    pub fn flat_bank_id(&self, addr: u64) -> usize {
        self.geom.flat_bank_id(&self.map_address(addr))
    }

    /// Space-separated run-length layout, e.g. `sc co bg:3 ba:2 co:6 row:16`.
    pub fn layout_string(&self) -> String {
        layout_to_string(&self.bits)
    }

    /// Human-readable bit table for `dump-mapping`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} channel(s), {} sub-channel(s), {} bankgroups x {} banks, {} rows, {} columns\n",
            self.geom.channels,
            self.geom.subchannels,
            self.geom.bankgroups,
            self.geom.banks_per_bankgroup,
            self.geom.rows,
            self.geom.columns
        ));
        out.push_str("bits 0-5: line offset\n");
        let mut seen = [0u32; 6];
        for (f, bit) in self.field_bit_positions() {
            let k = f.index();
            out.push_str(&format!("bit {bit:2}: {}[{}]\n", f.short_name(), seen[k]));
            seen[k] += 1;
        }
        if self.pbpl {
            let rb: Vec<String> = self.pbpl_row_bits.iter().map(|b| format!("row[{b}]")).collect();
            out.push_str(&format!("pbpl: (bg||ba) ^= {}\n", rb.join(" ")));
        } else {
            out.push_str("pbpl: off\n");
        }
        out
    }
}

pub fn layout_to_string(bits: &[Field]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < bits.len() {
        let f = bits[i];
        let mut n = 1;
        while i + n < bits.len() && bits[i + n] == f {
            n += 1;
        }
        if n == 1 {
            parts.push(f.short_name().to_string());
        } else {
            parts.push(format!("{}:{n}", f.short_name()));
        }
        i += n;
    }
    parts.join(" ")
}

pub fn parse_layout(s: &str) -> Result<Vec<Field>, ConfigError> {
    let mut bits = Vec::new();
    for tok in s.split_whitespace() {
        let (name, count) = match tok.split_once(':') {
            Some((n, c)) => {
                let c: usize = c
                    .parse()
                    .map_err(|_| ConfigError::invalid("map.layout", tok, "bad bit count"))?;
                (n, c)
            }
            None => (tok, 1),
        };
        let f = Field::parse(name)
            .ok_or_else(|| ConfigError::invalid("map.layout", tok, "unknown field (ch sc bg ba row co)"))?;
        bits.extend(std::iter::repeat_n(f, count));
    }
    Ok(bits)
}
