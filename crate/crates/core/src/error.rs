use crate::lie::GroupKind;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("frame vectors are not orthonormal (|t| = {t_norm}, |n| = {n_norm}, <t,n> = {dot})")]
    NonOrthonormalInput { t_norm: f64, n_norm: f64, dot: f64 },

    #[error("point lies on or beyond the cut locus of the identity (angle {angle})")]
    CutLocus { angle: f64 },

    #[error("group points belong to different groups ({left:?} vs {right:?})")]
    KindMismatch { left: GroupKind, right: GroupKind },

    #[error("series do not share one grid: {0}")]
    GridMismatch(String),

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("unknown curve family `{0}`")]
    UnknownFamily(String),

    #[error("bad CSV input: {0}")]
    BadCsv(String),

    #[error("curve is not regular: speed {speed:e} at sample {index}")]
    IrregularCurve { index: usize, speed: f64 },

    #[error("curvature vanishes at every retained sample (curve is a geodesic)")]
    EverywhereDegenerate,

    #[error("Bertrand mate is degenerate: {0}")]
    DegenerateMate(String),

    #[error("mate mode {mode} is not available for group {kind:?}")]
    ModeUnsupported { mode: &'static str, kind: GroupKind },

    #[error("invalid curve specification: {0}")]
    InvalidSpec(String),

    #[error("{0} has not been computed for this curve")]
    MissingStage(&'static str),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonOrthonormalInput { .. } => "NonOrthonormalInput",
            Error::CutLocus { .. } => "CutLocus",
            Error::KindMismatch { .. } => "KindMismatch",
            Error::GridMismatch(_) => "GridMismatch",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::UnknownFamily(_) => "UnknownFamily",
            Error::BadCsv(_) => "BadCsv",
            Error::IrregularCurve { .. } => "IrregularCurve",
            Error::EverywhereDegenerate => "EverywhereDegenerate",
            Error::DegenerateMate(_) => "DegenerateMate",
            Error::ModeUnsupported { .. } => "ModeUnsupported",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::MissingStage(_) => "MissingStage",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
