use core::fmt;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptySequence,
    DimensionMismatch {
        expected: (u32, u32),
        found: (u32, u32),
    },
    /// Frame indices must be strictly increasing.
    UnorderedFrames {
        position: usize,
    },
    InvalidFrame(&'static str),
    InvalidRoi {
        frame: usize,
        reason: &'static str,
    },
    ZeroBins,
    LengthMismatch {
        expected: usize,
        found: usize,
    },
    EmptyProfile,
    InfeasibleBounds {
        f_max: u32,
        f_d: u32,
    },
    TooFewMatches(usize),
    DegenerateConfiguration,
    IllConditioned,
    ZeroTarget,
    BinMismatch,
    Unreachable,
    BranchFailure,
    AlignmentFailure,
    NoCandidates,
    TooShort {
        frames: usize,
        buffer: usize,
    },
    EmptyOutput,
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySequence => write!(f, "frame sequence is empty"),
            Error::DimensionMismatch { expected, found } => write!(
                f,
                "frame size {}x{} does not match sequence size {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Error::UnorderedFrames { position } => {
                write!(f, "frame indices not strictly increasing at position {position}")
            }
            Error::InvalidFrame(why) => write!(f, "invalid frame: {why}"),
            Error::InvalidRoi { frame, reason } => write!(f, "invalid ROI in frame {frame}: {reason}"),
            Error::ZeroBins => write!(f, "histogram bin count must be positive"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} entries, found {found}")
            }
            Error::EmptyProfile => write!(f, "semantic profile is empty"),
            Error::InfeasibleBounds { f_max, f_d } => {
                write!(f, "speed-up ceiling {f_max} is below the desired rate {f_d}")
            }
            Error::TooFewMatches(n) => write!(f, "need at least 4 matches, got {n}"),
            Error::DegenerateConfiguration => write!(f, "every minimal sample was degenerate"),
            Error::IllConditioned => write!(f, "flow field is ill-conditioned for FOE estimation"),
            Error::ZeroTarget => write!(f, "target flow magnitude must be positive"),
            Error::BinMismatch => write!(f, "histograms have different shapes"),
            Error::Unreachable => write!(f, "sink is unreachable from source"),
            Error::BranchFailure => write!(f, "homography has an eigenvalue on the closed negative real axis"),
            Error::AlignmentFailure => write!(f, "could not align donor frame"),
            Error::NoCandidates => write!(f, "no replacement candidates"),
            Error::TooShort { frames, buffer } => {
                write!(f, "sequence of {frames} frames is shorter than buffer size {buffer}")
            }
            Error::EmptyOutput => write!(f, "output sequence is empty"),
            Error::InvalidConfig(why) => write!(f, "invalid configuration: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
