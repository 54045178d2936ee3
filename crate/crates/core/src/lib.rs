//! Numerical toolkit for Speiser-class meromorphic functions built from an
//! elliptic core, comb-domain conformal maps, and arcsin/exponential
//! compositions, together with pole atlases and the series criterion that
//! pins the Hausdorff dimension of the escaping set at 2 M rho / (2 + M rho).

pub mod atlas;
pub mod comb;
pub mod conformal;
pub mod dimension;
pub mod elliptic;
pub mod error;
pub mod growth;
pub mod io;
pub mod numeric;
pub mod speiser;
pub mod verify;

pub use atlas::{PoleAtlas, PoleRecord};
pub use comb::{CombSpec, ModifiedExp};
pub use conformal::{warschawski_shift, BuildOptions, ConformalMap, WarschawskiReport};
pub use dimension::{
    covering_sum_bound, critical_exponent, dyadic_blocks, exp_family_lattice_sums,
    log_power_diagnostics, series_term, theoretical_bound, DimensionEstimate, ExponentOptions,
    Method,
};
pub use elliptic::{
    critical_values, eval_g, eval_h, poles_of_h, wp, wp_prime, CriticalValueTriple,
    EllipticConfig, Rect,
};
pub use error::{Error, Result};
pub use growth::{composite_growth_bounds, growth_curve, GrowthCurve, GrowthTarget};
pub use speiser::{
    affine_rescale, compose_f_poles, critical_point_x, eval_f, exp_poles, poles_of_f,
    power_trick, scaled_family, ComposeOptions, FunctionHandle, SECTOR_DELTA,
};
