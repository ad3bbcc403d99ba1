//! Crate-wide error type.

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong when assembling or running an experiment.
///
/// Variants carry the offending value so callers can report actionable
/// messages without string matching.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Time horizon must be finite and positive.
    InvalidHorizon(f64),
    /// A grid needs at least one step.
    EmptyGrid,
    /// Fractional kernel exponent outside (0, 1].
    InvalidAlpha(f64),
    /// Fractional kernel shift must be nonnegative and finite.
    InvalidEpsilon(f64),
    /// Tabulated kernel needs at least two nodes, strictly increasing from 0.
    InvalidTable,
    /// Kernel evaluated where it has no finite value (e.g. `a(0)` for a
    /// weakly singular kernel).
    KernelUndefinedAt(f64),
    /// Kernel derivative requested where it does not exist.
    DerivativeUndefinedAt(f64),
    /// The tabulated kernel does not cover the requested time.
    OutsideTable(f64),
    /// `1 + mu * w_0 = 0` at the given step: the discrete Volterra equation
    /// is singular and cannot be advanced.
    SingularStep(usize),
    /// Volterra coupling constant must be nonnegative and finite.
    InvalidMu(f64),
    /// Complete-positivity check needs at least one coupling constant.
    EmptyMuList,
    /// A path or vector does not match the expected length.
    LengthMismatch { expected: usize, got: usize },
    /// Two objects were built on different grids.
    GridMismatch,
    /// Spectral operator needs at least one eigenvalue.
    EmptySpectrum,
    /// Eigenvalues must be strictly positive, finite and nondecreasing.
    InvalidSpectrum(f64),
    /// Mode index out of range.
    ModeOutOfRange { mode: usize, modes: usize },
    /// Grid node index out of range.
    NodeOutOfRange { node: usize, nodes: usize },
    /// Yosida parameter must be positive.
    InvalidYosidaParameter(f64),
    /// Scalar resolvent parameter of `R(lambda, A)` must be positive.
    InvalidResolventParameter(f64),
    /// Fractional power exponent outside the open interval (0, 1).
    InvalidGamma(f64),
    /// Covariance eigenvalues must be nonnegative and finite.
    InvalidCovariance(f64),
    /// Ensemble statistics need a minimum number of samples.
    EnsembleTooSmall { got: usize, min: usize },
    /// Operation requires an operator flagged as bounded (a Yosida
    /// approximation), not the unbounded generator itself.
    OperatorNotBounded,
    /// `a(0) = 0`: the semigroup reformulation of the stochastic convolution
    /// is unavailable; only the implicit convolution identity holds, so use
    /// the direct method instead.
    KernelVanishesAtZero,
    /// Refinement studies need at least two levels.
    TooFewLevels(usize),
    /// Paths in a refinement family must halve the step between levels.
    NotARefinement,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidHorizon(t) => write!(f, "time horizon must be finite and positive, got {t}"),
            Error::EmptyGrid => write!(f, "time grid needs at least one step"),
            Error::InvalidAlpha(a) => write!(f, "fractional exponent must lie in (0, 1], got {a}"),
            Error::InvalidEpsilon(e) => write!(f, "fractional shift must be nonnegative and finite, got {e}"),
            Error::InvalidTable => write!(f, "kernel table needs >= 2 strictly increasing nodes starting at 0"),
            Error::KernelUndefinedAt(t) => write!(f, "kernel value undefined at t = {t} (a(0) unbounded)"),
            Error::DerivativeUndefinedAt(t) => write!(f, "kernel derivative undefined at t = {t}"),
            Error::OutsideTable(t) => write!(f, "t = {t} outside the tabulated kernel range"),
            Error::SingularStep(i) => write!(f, "discrete Volterra equation singular at step {i}"),
            Error::InvalidMu(mu) => write!(f, "coupling constant must be nonnegative and finite, got {mu}"),
            Error::EmptyMuList => write!(f, "need at least one coupling constant"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            Error::GridMismatch => write!(f, "objects live on different time grids"),
            Error::EmptySpectrum => write!(f, "operator needs at least one eigenvalue"),
            Error::InvalidSpectrum(v) => {
                write!(f, "eigenvalues must be positive, finite and nondecreasing, offending value {v}")
            }
            Error::NodeOutOfRange { node, nodes } => {
                write!(f, "grid node {node} out of range (grid has {nodes} nodes)")
            }
            Error::ModeOutOfRange { mode, modes } => {
                write!(f, "mode {mode} out of range for {modes} modes")
            }
            Error::InvalidYosidaParameter(n) => write!(f, "Yosida parameter must be positive, got {n}"),
            Error::InvalidResolventParameter(l) => {
                write!(f, "resolvent parameter must be positive, got {l}")
            }
            Error::InvalidGamma(g) => write!(f, "fractional exponent must lie in (0, 1), got {g}"),
            Error::InvalidCovariance(q) => {
                write!(f, "covariance eigenvalues must be nonnegative and finite, got {q}")
            }
            Error::EnsembleTooSmall { got, min } => {
                write!(f, "ensemble of {got} too small, need at least {min}")
            }
            Error::OperatorNotBounded => {
                write!(f, "operation needs a bounded (Yosida) operator, not the generator")
            }
            Error::KernelVanishesAtZero => write!(
                f,
                "a(0) = 0: semigroup reformulation unavailable (only the implicit identity holds), use the direct method"
            ),
            Error::TooFewLevels(n) => write!(f, "refinement study needs >= 2 levels, got {n}"),
            Error::NotARefinement => write!(f, "refinement levels must halve the time step"),
        }
    }
}

impl core::error::Error for Error {}
