use crate::model::Tag;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scalar argument was outside the range the operation accepts.
    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange { name: &'static str, value: f64, expected: &'static str },

    #[error("invalid intensity protocol: {0}")]
    InvalidProtocol(String),

    #[error("invalid link model: {0}")]
    InvalidLink(String),

    /// A pair of intensity classes from different bases was used where a
    /// sifted (same-basis) combination is required.
    #[error("({0}, {1}) is not a same-basis combination")]
    CrossBasis(Tag, Tag),

    #[error("tally entry ({l}, {r}) violates 0 <= error <= success <= sent: {detail}")]
    InvalidTally { l: Tag, r: Tag, detail: String },

    #[error("tally is missing the ({0}, {1}) entry")]
    MissingEntry(Tag, Tag),

    #[error("empty tally")]
    EmptyTally,

    /// The decoy linear program has no feasible point: the observed counts
    /// cannot be produced by any yield model at the requested confidence.
    #[error("decoy-state linear program is infeasible: {0}")]
    InfeasibleLp(String),

    #[error("linear program solver failed: {0}")]
    Solver(String),

    #[error("stream lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, ok: bool, expected: &'static str) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, expected })
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    check_range(name, value, (0.0..=1.0).contains(&value), "[0, 1]")
}
