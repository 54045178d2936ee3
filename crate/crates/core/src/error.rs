use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation point within exclusion radius of lattice point (z = {z})")]
    LatticePointSingularity { z: Complex64 },

    #[error("z = {z} is a pole of G")]
    PoleOfG { z: Complex64 },

    #[error("z = {z} is a pole of H")]
    PoleOfH { z: Complex64 },

    #[error("z = {z} is a pole of F")]
    PoleOfF { z: Complex64 },

    #[error("region holds about {count} poles, exceeding the cap {cap}")]
    RegionTooLarge { count: u64, cap: u64 },

    #[error("point {z} is not in the open lower half-plane")]
    OutOfDomain { z: Complex64 },

    #[error("conformal map self-test reached accuracy {achieved:.3e}, target {target:.3e}")]
    AccuracyNotMet { achieved: f64, target: f64 },

    #[error("derivative argument spread {spread:.3} rad; modified exponential not injective on the strip")]
    InjectivityCheckFailed { spread: f64 },

    #[error("width-deficit integral still growing over the probe range (tail/head ratio {ratio:.3})")]
    HypothesisFailed { ratio: f64 },

    #[error("Newton polish failed for pole seed at target {target}")]
    RootPolishFailed { target: Complex64 },

    #[error("pole of modulus within {dist:.3e} of the unit circle")]
    ModulusOnePole { dist: f64 },

    #[error("atlas contains a pole at the origin")]
    PoleAtOrigin,

    #[error("only {have} nonempty dyadic blocks; at least {need} required")]
    InsufficientBlocks { have: usize, need: usize },

    #[error("fitted block-decay exponent not nondecreasing in t (t = {t:.4})")]
    NonMonotone { t: f64 },

    #[error("radius {r:.3e} outside the certified evaluation range {max:.3e}")]
    EvaluationRangeExceeded { r: f64, max: f64 },

    #[error("growth curves do not overlap enough to compare")]
    IncompatibleRanges,

    #[error("log-power exponent p = {p:.3} fails the requirement p > {bound:.3}")]
    HypothesisViolated { p: f64, bound: f64 },

    #[error("radius {r:.3e} below the covering-sum precondition {min:.3e}")]
    PreconditionRadius { r: f64, min: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
