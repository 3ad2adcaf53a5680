use alloc::string::String;
use core::fmt;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Requested Galerkin dimension below the smallest supported one.
    InvalidDimension { n: usize, min: usize },
    /// A scalar argument left its mathematical domain.
    Domain(&'static str),
    /// A coupling matrix failed the skew-adjointness contract.
    NotSkewAdjoint { row: usize, col: usize, defect: f64 },
    /// Initial state is not on the unit sphere (no silent renormalization).
    NotNormalized { norm: f64 },
    /// An amplitude became NaN during propagation.
    NanAmplitude { t: f64 },
    /// Control period is incommensurate with the transition period.
    PeriodMismatch {
        control_period: f64,
        transition_period: f64,
    },
    /// Efficiency is undefined for a control with zero L¹ norm.
    ZeroL1Norm,
    /// Transition (j,k) has no direct coupling entry.
    NoDirectCoupling { j: usize, k: usize },
    /// The drive-frequency Fourier coefficient vanishes.
    ZeroEfficiency { j: usize, k: usize },
    /// λ_j = λ_k: the drive gap is degenerate.
    DegenerateGap { j: usize, k: usize },
    /// No local population maximum found before the horizon.
    HorizonExceeded {
        horizon: f64,
        running_max: f64,
        at: f64,
    },
    /// Level index outside 1..=N.
    IndexOutOfRange { index: usize, dim: usize },
    QuadratureDidNotConverge,
    EigenDidNotConverge,
    /// Shape-grammar parse failure; carries the offending field.
    Parse { field: String, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension { n, min } => {
                write!(f, "invalid dimension N={n}: need N >= {min}")
            }
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::NotSkewAdjoint { row, col, defect } => write!(
                f,
                "coupling matrix is not skew-adjoint at ({row},{col}): defect {defect:e}"
            ),
            Error::NotNormalized { norm } => {
                write!(f, "initial state norm {norm} is not 1")
            }
            Error::NanAmplitude { t } => write!(f, "NaN amplitude at t={t}"),
            Error::PeriodMismatch {
                control_period,
                transition_period,
            } => write!(
                f,
                "control period {control_period} incommensurate with transition period {transition_period}"
            ),
            Error::ZeroL1Norm => write!(f, "control has zero L1 norm: efficiency undefined"),
            Error::NoDirectCoupling { j, k } => {
                write!(f, "no direct coupling between levels {j} and {k}")
            }
            Error::ZeroEfficiency { j, k } => write!(
                f,
                "drive-frequency Fourier coefficient vanishes for transition ({j},{k})"
            ),
            Error::DegenerateGap { j, k } => {
                write!(f, "degenerate drive gap: lambda_{j} = lambda_{k}")
            }
            Error::HorizonExceeded {
                horizon,
                running_max,
                at,
            } => write!(
                f,
                "no population maximum within horizon {horizon} (running max {running_max} at t={at})"
            ),
            Error::IndexOutOfRange { index, dim } => {
                write!(f, "level index {index} out of range 1..={dim}")
            }
            Error::QuadratureDidNotConverge => write!(f, "adaptive quadrature did not converge"),
            Error::EigenDidNotConverge => write!(f, "eigensolver did not converge"),
            Error::Parse { field, message } => {
                write!(f, "shape spec: field `{field}`: {message}")
            }
        }
    }
}

#[cfg(test)]
impl std::error::Error for Error {}
