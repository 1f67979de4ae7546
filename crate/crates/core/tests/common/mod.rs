//! Published per-pair tallies at about 30 dB of loss, four sessions of three
//! simultaneous pairs each, and the values derived from them.
#![allow(dead_code)]

pub mod planted;

use qnet_core::{GainTally, IntensityProtocol, Tag, TallyEntry};

pub const PAIRS: [&str; 12] = ["AB", "AC", "AD", "AB", "BC", "BD", "AC", "BC", "CD", "AD", "BD", "CD"];
pub const SESSIONS: [u8; 12] = [1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4];
pub const LOSS_DB: [f64; 12] = [30.6, 30.9, 30.3, 30.7, 30.9, 30.5, 30.9, 30.0, 29.3, 30.8, 30.4, 30.1];
pub const ZZ: [u64; 12] = [
    87788209, 89582267, 92829111, 84866989, 81718178, 97819037, 80927353, 99865391, 118650729, 90536935, 99600084,
    96763342,
];
pub const ZZ_ERR: [u64; 12] =
    [256301, 128966, 224336, 310263, 276488, 197830, 131921, 301716, 408261, 350307, 162378, 165474];
pub const YY: [u64; 12] = [48055, 50688, 44783, 44076, 41118, 48831, 37498, 46322, 58217, 51288, 54175, 53694];
pub const XX: [u64; 12] = [88556, 90639, 89536, 97554, 88367, 103289, 88997, 97974, 110892, 84991, 108011, 95910];
pub const XX_ERR: [u64; 12] = [24926, 25492, 23222, 26980, 24187, 26444, 27602, 28441, 31205, 23070, 30985, 27781];
pub const YO_OY: [u64; 12] = [13375, 16899, 14250, 12694, 10924, 16540, 12120, 14847, 21649, 17511, 17504, 17622];
pub const XO_OX: [u64; 12] = [5923, 4992, 5888, 6387, 5210, 5119, 4756, 6098, 6739, 5642, 5651, 6277];
pub const S11: [f64; 12] =
    [1.02e-4, 1.54e-4, 1.23e-4, 1.38e-4, 1.41e-4, 2.15e-4, 1.78e-4, 1.53e-4, 1.81e-4, 1.02e-4, 2.04e-4, 1.24e-4];
pub const E11: [f64; 12] =
    [0.1455, 0.1941, 0.0734, 0.1149, 0.1565, 0.1469, 0.2291, 0.1651, 0.1463, 0.1160, 0.2005, 0.1648];
pub const RATE: [f64; 12] =
    [1.64e-6, 2.32e-6, 4.02e-6, 3.17e-6, 2.34e-6, 4.07e-6, 2.01e-6, 2.33e-6, 3.13e-6, 1.89e-6, 2.95e-6, 2.13e-6];

pub fn protocol() -> IntensityProtocol {
    IntensityProtocol::baseline()
}

/// Column `i` as a tally. Mirrored sums are split into ceil/floor halves.
pub fn tally(i: usize) -> GainTally {
    let p = protocol();
    let mut t = GainTally::new();
    let mut put = |l, r, success, error| {
        t.insert(l, r, TallyEntry::new(p.sent(l, r), success, error)).unwrap();
    };
    put(Tag::Z, Tag::Z, ZZ[i], Some(ZZ_ERR[i]));
    put(Tag::Y, Tag::Y, YY[i], None);
    put(Tag::X, Tag::X, XX[i], Some(XX_ERR[i]));
    put(Tag::O, Tag::O, 0, None);
    put(Tag::Y, Tag::O, YO_OY[i].div_ceil(2), None);
    put(Tag::O, Tag::Y, YO_OY[i] / 2, None);
    put(Tag::X, Tag::O, XO_OX[i].div_ceil(2), None);
    put(Tag::O, Tag::X, XO_OX[i] / 2, None);
    t
}
