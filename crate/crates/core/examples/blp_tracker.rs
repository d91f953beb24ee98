//! Mark banks in the BLP-Tracker and watch a sub-channel group reset once
//! all of its 32 banks have been written back.

use blpsim::policy::TrackerReset;
use blpsim::{BlpTracker, DramGeometry};

fn main() {
    let mut t = BlpTracker::new(&DramGeometry::default(), TrackerReset::PerSubchannel);
    println!("storage per channel: {} bytes", t.bytes_per_channel());
    for bank in [3, 3, 17, 40] {
        t.mark(0, bank);
        println!("mark {bank:2} -> word {:#018x}", t.word(0));
    }
    for bank in 0..32 {
        t.mark(0, bank);
    }
    println!("after marking banks 0..32 -> word {:#018x}, resets {}", t.word(0), t.resets());
    println!("bank 40 still pending: {}", t.pending(0, 40));
}
