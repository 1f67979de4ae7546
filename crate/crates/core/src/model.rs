//! Domain types shared by the simulator, the finite-key analysis and the
//! network planner: intensity classes, time-bin qubits, link parameters and
//! gain tallies.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, check_range, Error, Result};

/// Tolerance on the sum of the four emission probabilities.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

/// Intensity class of the four-intensity decoy protocol.
///
/// `Z` is the signal class (key generation, Z basis); `Y`, `X` and the vacuum
/// `O` are decoys sent in the X basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Z,
    Y,
    X,
    O,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::Z, Tag::Y, Tag::X, Tag::O];
    pub const DECOYS: [Tag; 3] = [Tag::Y, Tag::X, Tag::O];

    pub fn basis(self) -> Basis {
        match self {
            Tag::Z => Basis::Z,
            Tag::Y | Tag::X | Tag::O => Basis::X,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Tag::Z => 'z',
            Tag::Y => 'y',
            Tag::X => 'x',
            Tag::O => 'o',
        }
    }

    pub fn from_char(c: char) -> Option<Tag> {
        match c.to_ascii_lowercase() {
            'z' => Some(Tag::Z),
            'y' => Some(Tag::Y),
            'x' => Some(Tag::X),
            'o' => Some(Tag::O),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            Tag::Z => 0,
            Tag::Y => 1,
            Tag::X => 2,
            Tag::O => 3,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// All sifted intensity combinations: `(z,z)` and the nine X-basis pairs.
pub fn same_basis_pairs() -> impl Iterator<Item = (Tag, Tag)> {
    std::iter::once((Tag::Z, Tag::Z))
        .chain(Tag::DECOYS.into_iter().flat_map(|l| Tag::DECOYS.into_iter().map(move |r| (l, r))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn from_bool(one: bool) -> Bit {
        if one {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityClass {
    pub tag: Tag,
    /// Mean photon number per qubit.
    pub mu: f64,
    /// Emission probability.
    pub probability: f64,
}

impl IntensityClass {
    pub fn basis(&self) -> Basis {
        self.tag.basis()
    }

    pub fn encode(&self, bit: Bit) -> TimeBinQubit {
        let mut q = encode(self.basis(), bit, self.mu).expect("class mu validated at construction");
        q.tag = Some(self.tag);
        q
    }
}

/// The six free parameters of the four-intensity protocol. The vacuum
/// probability is whatever remains: `p_o = 1 - p_z - p_y - p_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub z: f64,
    pub y: f64,
    pub x: f64,
    pub p_z: f64,
    pub p_y: f64,
    pub p_x: f64,
}

impl ProtocolParams {
    /// Intensities and probabilities optimized for about 30 dB of loss per
    /// user pair.
    pub const BASELINE_30DB: ProtocolParams =
        ProtocolParams { z: 0.636, y: 0.204, x: 0.054, p_z: 0.754, p_y: 0.036, p_x: 0.188 };

    pub fn to_vec(&self) -> [f64; 6] {
        [self.z, self.y, self.x, self.p_z, self.p_y, self.p_x]
    }

    pub fn from_slice(v: &[f64]) -> ProtocolParams {
        ProtocolParams { z: v[0], y: v[1], x: v[2], p_z: v[3], p_y: v[4], p_x: v[5] }
    }

    pub fn p_o(&self) -> f64 {
        1.0 - self.p_z - self.p_y - self.p_x
    }
}

/// Four intensity classes plus session-level timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityProtocol {
    classes: [IntensityClass; 4],
    pub clock_hz: f64,
    /// Total qubit pairs sent in the session.
    pub n_pulses: u64,
}

impl IntensityProtocol {
    pub fn new(classes: [IntensityClass; 4], clock_hz: f64, n_pulses: u64) -> Result<Self> {
        let mut ordered = classes;
        ordered.sort_by_key(|c| c.tag.index());
        for (i, c) in ordered.iter().enumerate() {
            if c.tag.index() != i {
                return Err(Error::InvalidProtocol("exactly one class per tag {z, y, x, o} is required".into()));
            }
            if !(c.mu >= 0.0 && c.mu.is_finite()) {
                return Err(Error::InvalidProtocol(format!("mu({}) = {} must be >= 0", c.tag, c.mu)));
            }
            if !(0.0..=1.0).contains(&c.probability) {
                return Err(Error::InvalidProtocol(format!("p({}) = {} must lie in [0, 1]", c.tag, c.probability)));
            }
        }
        let [z, y, x, o] = ordered;
        if o.mu != 0.0 {
            return Err(Error::InvalidProtocol("mu(o) must be exactly 0".into()));
        }
        if !(z.mu > y.mu && y.mu > x.mu) {
            return Err(Error::InvalidProtocol(format!(
                "intensities must satisfy z > y > x >= 0 (got {}, {}, {})",
                z.mu, y.mu, x.mu
            )));
        }
        let total: f64 = ordered.iter().map(|c| c.probability).sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::InvalidProtocol(format!("probabilities sum to {total}, expected 1")));
        }
        if !(clock_hz > 0.0 && clock_hz.is_finite()) {
            return Err(Error::InvalidProtocol("clock_hz must be > 0".into()));
        }
        if n_pulses == 0 {
            return Err(Error::InvalidProtocol("n_pulses must be > 0".into()));
        }
        Ok(IntensityProtocol { classes: ordered, clock_hz, n_pulses })
    }

    /// Builds a protocol from the six free parameters. `p_o` absorbs the
    /// remaining probability mass; a small negative remainder from rounding
    /// is rejected like any other invalid probability.
    pub fn from_params(params: ProtocolParams, clock_hz: f64, n_pulses: u64) -> Result<Self> {
        let p_o = params.p_o();
        let p_o = if p_o.abs() < PROBABILITY_SUM_TOL { 0.0 } else { p_o };
        IntensityProtocol::new(
            [
                IntensityClass { tag: Tag::Z, mu: params.z, probability: params.p_z },
                IntensityClass { tag: Tag::Y, mu: params.y, probability: params.p_y },
                IntensityClass { tag: Tag::X, mu: params.x, probability: params.p_x },
                IntensityClass { tag: Tag::O, mu: 0.0, probability: p_o },
            ],
            clock_hz,
            n_pulses,
        )
    }

    /// The 30 dB operating point: 3e12 pulse pairs at 100 MHz.
    pub fn baseline() -> Self {
        IntensityProtocol::from_params(ProtocolParams::BASELINE_30DB, 100e6, 3_000_000_000_000)
            .expect("baseline parameters are valid")
    }

    pub fn class(&self, tag: Tag) -> &IntensityClass {
        &self.classes[tag.index()]
    }

    pub fn classes(&self) -> &[IntensityClass; 4] {
        &self.classes
    }

    pub fn mu(&self, tag: Tag) -> f64 {
        self.class(tag).mu
    }

    pub fn probability(&self, tag: Tag) -> f64 {
        self.class(tag).probability
    }

    pub fn params(&self) -> ProtocolParams {
        ProtocolParams {
            z: self.mu(Tag::Z),
            y: self.mu(Tag::Y),
            x: self.mu(Tag::X),
            p_z: self.probability(Tag::Z),
            p_y: self.probability(Tag::Y),
            p_x: self.probability(Tag::X),
        }
    }

    /// Expected number of pulse pairs sent with intensities `(l, r)`,
    /// `N·p_l·p_r`, rounded to the nearest count.
    pub fn sent(&self, l: Tag, r: Tag) -> u64 {
        self.sent_for(self.n_pulses, l, r)
    }

    pub fn sent_for(&self, n_pulses: u64, l: Tag, r: Tag) -> u64 {
        (n_pulses as f64 * self.probability(l) * self.probability(r)).round() as u64
    }

    pub fn with_n_pulses(&self, n_pulses: u64) -> Result<Self> {
        IntensityProtocol::new(self.classes, self.clock_hz, n_pulses)
    }
}

/// Channel transmittance for an attenuation in dB: `10^(-loss/10)`.
pub fn transmittance(loss_db: f64) -> Result<f64> {
    check_range("loss_db", loss_db, loss_db >= 0.0 && loss_db.is_finite(), ">= 0")?;
    Ok(10f64.powf(-loss_db / 10.0))
}

/// Frequency in THz of a channel on the ITU 100 GHz DWDM grid.
pub fn itu_channel_frequency(channel: u32) -> Result<f64> {
    if !(1..=72).contains(&channel) {
        return Err(Error::OutOfRange {
            name: "channel",
            value: channel as f64,
            expected: "ITU 100 GHz grid index in [1, 72]",
        });
    }
    Ok(190.0 + 0.1 * channel as f64)
}

/// One weak coherent time-bin pulse. Amplitudes are those of the coherent
/// state in each bin, so `|early|^2 + |late|^2` is the mean photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBinQubit {
    pub basis: Basis,
    pub bit: Bit,
    pub tag: Option<Tag>,
    pub amp_early: Complex64,
    pub amp_late: Complex64,
}

impl TimeBinQubit {
    pub fn mean_photon_number(&self) -> f64 {
        self.amp_early.norm_sqr() + self.amp_late.norm_sqr()
    }

    /// Amplitude in bin 0 (early) or 1 (late).
    pub fn amp(&self, bin: usize) -> Complex64 {
        if bin == 0 {
            self.amp_early
        } else {
            self.amp_late
        }
    }
}

/// Prepares a time-bin pulse: Z puts all light in the early (bit 0) or late
/// (bit 1) bin; X splits it evenly with relative phase 0 or π.
pub fn encode(basis: Basis, bit: Bit, mu: f64) -> Result<TimeBinQubit> {
    check_range("mu", mu, mu >= 0.0 && mu.is_finite(), ">= 0")?;
    let (amp_early, amp_late) = match (basis, bit) {
        (Basis::Z, Bit::Zero) => (Complex64::new(mu.sqrt(), 0.0), Complex64::new(0.0, 0.0)),
        (Basis::Z, Bit::One) => (Complex64::new(0.0, 0.0), Complex64::new(mu.sqrt(), 0.0)),
        (Basis::X, bit) => {
            let a = (mu / 2.0).sqrt();
            let late = if bit == Bit::Zero { a } else { -a };
            (Complex64::new(a, 0.0), Complex64::new(late, 0.0))
        }
    };
    Ok(TimeBinQubit { basis, bit, tag: None, amp_early, amp_late })
}

/// Per-user-pair channel and relay parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub loss_db_left: f64,
    pub loss_db_right: f64,
    /// Folded into each arm's transmittance.
    pub detector_efficiency: f64,
    /// Dark-click probability per detector per time bin.
    pub dark_prob: f64,
    /// Fraction of interfering field amplitude, ζ.
    pub mode_overlap: f64,
    /// First-order coherence across the bin separation, g1.
    pub coherence_factor: f64,
    pub coincidence_window_s: f64,
    pub bin_separation_s: f64,
    pub pulse_width_s: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel {
            loss_db_left: 15.0,
            loss_db_right: 15.0,
            detector_efficiency: 0.7,
            dark_prob: 1e-6,
            mode_overlap: 1.0,
            coherence_factor: 1.0,
            coincidence_window_s: 1e-9,
            bin_separation_s: 10e-9,
            pulse_width_s: 0.8e-9,
        }
    }
}

impl LinkModel {
    /// Splits `total_loss_db` evenly between the two arms.
    pub fn symmetric(total_loss_db: f64) -> Self {
        LinkModel { loss_db_left: total_loss_db / 2.0, loss_db_right: total_loss_db / 2.0, ..LinkModel::default() }
    }

    pub fn with_total_loss(mut self, total_loss_db: f64) -> Self {
        self.loss_db_left = total_loss_db / 2.0;
        self.loss_db_right = total_loss_db / 2.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("loss_db_left", self.loss_db_left), ("loss_db_right", self.loss_db_right)] {
            check_range(name, v, v >= 0.0 && v.is_finite(), ">= 0")?;
        }
        check_probability("detector_efficiency", self.detector_efficiency)?;
        check_probability("dark_prob", self.dark_prob)?;
        check_probability("mode_overlap", self.mode_overlap)?;
        check_probability("coherence_factor", self.coherence_factor)?;
        for (name, v) in [
            ("coincidence_window_s", self.coincidence_window_s),
            ("bin_separation_s", self.bin_separation_s),
            ("pulse_width_s", self.pulse_width_s),
        ] {
            check_range(name, v, v > 0.0 && v.is_finite(), "> 0")?;
        }
        Ok(())
    }

    pub fn total_loss_db(&self) -> f64 {
        self.loss_db_left + self.loss_db_right
    }

    pub fn transmittance_left(&self) -> f64 {
        10f64.powf(-self.loss_db_left / 10.0) * self.detector_efficiency
    }

    pub fn transmittance_right(&self) -> f64 {
        10f64.powf(-self.loss_db_right / 10.0) * self.detector_efficiency
    }

    /// Interference contrast κ = ζ·g1.
    pub fn kappa(&self) -> f64 {
        self.mode_overlap * self.coherence_factor
    }
}

/// Counts for one intensity combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TallyEntry {
    pub sent: u64,
    /// Ψ⁻ announcements.
    pub success: u64,
    /// Ψ⁻ announcements with the wrong bit correlation. `None` when the
    /// source data did not record error counts for this combination.
    pub error: Option<u64>,
}

impl TallyEntry {
    pub fn new(sent: u64, success: u64, error: Option<u64>) -> Self {
        TallyEntry { sent, success, error }
    }

    pub fn gain(&self) -> f64 {
        if self.sent == 0 {
            0.0
        } else {
            self.success as f64 / self.sent as f64
        }
    }

    pub fn error_rate(&self) -> Option<f64> {
        self.error.map(|e| if self.success == 0 { 0.0 } else { e as f64 / self.success as f64 })
    }

    fn check(&self) -> std::result::Result<(), String> {
        if self.success > self.sent {
            return Err(format!("success {} > sent {}", self.success, self.sent));
        }
        if let Some(e) = self.error {
            if e > self.success {
                return Err(format!("error {} > success {}", e, self.success));
            }
        }
        Ok(())
    }

    fn merged(&self, other: &TallyEntry) -> TallyEntry {
        TallyEntry {
            sent: self.sent + other.sent,
            success: self.success + other.success,
            error: match (self.error, other.error) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        }
    }
}

/// Per-(l, r) counts for the sifted intensity combinations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GainTally {
    entries: BTreeMap<(Tag, Tag), TallyEntry>,
}

impl GainTally {
    pub fn new() -> Self {
        GainTally::default()
    }

    pub fn insert(&mut self, l: Tag, r: Tag, entry: TallyEntry) -> Result<()> {
        if l.basis() != r.basis() {
            return Err(Error::CrossBasis(l, r));
        }
        entry.check().map_err(|detail| Error::InvalidTally { l, r, detail })?;
        self.entries.insert((l, r), entry);
        Ok(())
    }

    pub fn get(&self, l: Tag, r: Tag) -> Option<&TallyEntry> {
        self.entries.get(&(l, r))
    }

    pub fn require(&self, l: Tag, r: Tag) -> Result<&TallyEntry> {
        self.get(l, r).ok_or(Error::MissingEntry(l, r))
    }

    pub fn iter(&self) -> impl Iterator<Item = ((Tag, Tag), &TallyEntry)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Component-wise sum. Error counts stay known only where both sides
    /// know them.
    pub fn merge(&self, other: &GainTally) -> GainTally {
        let mut entries = self.entries.clone();
        for (k, v) in &other.entries {
            entries.entry(*k).and_modify(|e| *e = e.merged(v)).or_insert(*v);
        }
        GainTally { entries }
    }

    pub(crate) fn add_round(&mut self, l: Tag, r: Tag, success: bool, error: bool) {
        let e = self.entries.entry((l, r)).or_insert(TallyEntry { sent: 0, success: 0, error: Some(0) });
        e.sent += 1;
        if success {
            e.success += 1;
            if error {
                *e.error.as_mut().expect("simulated entries track errors") += 1;
            }
        }
    }
}
