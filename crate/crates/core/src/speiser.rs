//! The meromorphic function families: F = H(arcsin z), the composition
//! f = F(g(z)) with the comb entire function g, the elliptic-exponential
//! family H(e^z), the power trick f0(z^N), and the scaled/affine variants.
//! Each family exposes its pole atlas with exact leading-coefficient
//! propagation.

use crate::atlas::{PoleAtlas, PoleRecord};
use crate::conformal::ConformalMap;
use crate::elliptic::{poles_of_g_fundamental, EllipticConfig};
use crate::error::{Error, Result};
use crate::numeric::{log_cos, log_sin, principal_log_branch};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Critical points of F on the real line: x_k = cosh(k pi / 2) for k >= 0,
/// with x_{-k} = -x_k. Note that the comb construction uses the companion
/// convention x_0 = 0 (see `crate::comb::cosh_tooth_x`); both are exposed
/// because F is even and 0 is a critical point of the even square root.
pub fn critical_point_x(k: i64) -> f64 {
    let v = (k.unsigned_abs() as f64 * PI / 2.0).cosh();
    if k < 0 {
        -v
    } else {
        v
    }
}

/// arcsin evaluated on a numerically stable branch; any branch is equivalent
/// under H (even and pi-periodic). The textbook form -i log(iz + sqrt(1-z^2))
/// cancels catastrophically on one side of the cut once |z| is large, so pick
/// whichever of iz +- sqrt(1-z^2) is the big root (their product is -1).
fn arcsin_stable(z: Complex64) -> Complex64 {
    let n = z.norm();
    if n > 1e8 {
        // arcsin z = -i log(2iz) + O(1/z^2)
        let corr = 1.0 / (4.0 * z * z);
        -I * ((2.0 * I * z).ln() - corr)
    } else if n > 16.0 {
        let s = (Complex64::new(1.0, 0.0) - z * z).sqrt();
        let t1 = I * z + s;
        let t2 = I * z - s;
        if t1.norm() >= t2.norm() {
            -I * t1.ln()
        } else {
            // iz + s = -1/(iz - s); the branch offset is absorbed by H
            I * (-t2).ln()
        }
    } else {
        z.asin()
    }
}

/// F(z) = H(arcsin z). Requires kappa = 1: branch independence of the arcsin
/// needs H to be even and pi-periodic, which the rescaled H_kappa is not.
/// (The rescaled family of the scaled construction enters at the atlas level
/// through `scaled_family`.)
pub fn eval_f(z: Complex64, cfg: &EllipticConfig) -> Result<Complex64> {
    if cfg.kappa != 1.0 {
        return Err(Error::InvalidConfig(
            "the arcsin composition is single-valued only for kappa = 1".into(),
        ));
    }
    let w = arcsin_stable(z);
    crate::elliptic::eval_h(w, cfg).map_err(|e| match e {
        Error::PoleOfH { .. } => Error::PoleOfF { z },
        other => other,
    })
}

/// Tower description of the poles of F: fundamental pole P of G, vertical
/// index n, and sign. The pole is A = eps * sin(P_eff + i n pi / kappa)
/// with P_eff = P / kappa, and the Laurent coefficient is
/// B = eps_res * beta * cos(P_eff + i n pi / kappa) / kappa.
#[derive(Debug, Clone, Copy)]
pub struct FPole {
    pub log_a: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    /// log of the coefficient, usable when a and b overflow
    pub log_b: Complex64,
}

fn f_pole_towers(cfg: &EllipticConfig, n_max: i64) -> Result<Vec<FPole>> {
    if cfg.kappa != 1.0 {
        return Err(Error::InvalidConfig(
            "pole towers of the arcsin composition require kappa = 1".into(),
        ));
    }
    let fundamental = poles_of_g_fundamental(cfg)?;
    let mut out = Vec::new();
    for (p, beta) in &fundamental {
        for n in -n_max..=n_max {
            let p_eff = p + Complex64::new(0.0, n as f64 * PI);
            let ls = log_sin(p_eff);
            let lc = log_cos(p_eff);
            for &eps in &[1.0f64, -1.0] {
                // A = eps sin(p_eff); res(G, -P) = -res(G, P) and cos is even
                let log_a = principal_log_branch(if eps > 0.0 {
                    ls
                } else {
                    ls + Complex64::new(0.0, PI)
                });
                let beta_signed = if eps > 0.0 { *beta } else { -*beta };
                let log_b = beta_signed.ln() + lc;
                let a = if log_a.re < 300.0 {
                    log_a.exp()
                } else {
                    Complex64::new(f64::INFINITY, 0.0)
                };
                let b = if log_b.re.abs() < 300.0 {
                    log_b.exp()
                } else {
                    Complex64::new(f64::NAN, 0.0)
                };
                out.push(FPole { log_a, a, b, log_b });
            }
        }
    }
    Ok(out)
}

/// Atlas of the poles A_j of F with |A_j| <= radius and coefficients B_j.
/// Also reports the empirical constant C with |B_j| >= C |A_j|.
pub fn poles_of_f(radius: f64, cfg: &EllipticConfig) -> Result<(PoleAtlas, f64)> {
    if radius < 2.0 {
        return Err(Error::InvalidConfig("radius must be at least 2".into()));
    }
    let n_max = ((2.0 * radius).ln() * cfg.kappa / PI).ceil() as i64 + 1;
    let towers = f_pole_towers(cfg, n_max)?;
    let mut records = Vec::new();
    let mut c_const = f64::INFINITY;
    for t in &towers {
        if t.a.is_finite() && t.a.norm() <= radius {
            records.push(PoleRecord::new(t.a, cfg.m, t.b));
            c_const = c_const.min(t.b.norm() / t.a.norm());
        }
    }
    let atlas = PoleAtlas::new(cfg.m, radius, None, "arcsin_elliptic", records);
    Ok((atlas, c_const))
}

// --- f = F o g --------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct ComposeOptions {
    /// angular window for the atlas; None enumerates the full disk
    pub sector: Option<(f64, f64)>,
    /// abort when a well-interior seed fails to polish
    pub strict: bool,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        ComposeOptions { sector: Some(SECTOR_DELTA), strict: true }
    }
}

/// The angular window Delta = { -3 pi/4 < arg z < -pi/4 }.
pub const SECTOR_DELTA: (f64, f64) = (-3.0 * PI / 4.0, -PI / 4.0);

/// Pole atlas of f = F o g in |z| <= radius: solutions of g(a) = A_k with
/// coefficients b = B_k / g'(a), seeded from the log-lattice preimages
/// u = Log A_k + 2 pi i m and Newton-polished on phi(z) = u.
pub fn compose_f_poles(
    map: &ConformalMap,
    cfg: &EllipticConfig,
    radius: f64,
    opts: &ComposeOptions,
) -> Result<PoleAtlas> {
    let alpha = map.spec.geometry_alpha();
    // largest image modulus over |z| <= radius
    let img_max = map.phi_axis(radius) + map.image_shift.abs() + 2.0 * PI;
    let n_max = (img_max / PI).ceil() as i64 + 2;
    let towers = f_pole_towers(cfg, n_max)?;
    let mut targets: Vec<(Complex64, Complex64)> = Vec::new(); // (u, log_b of F-pole)
    for t in &towers {
        if t.log_a.re > img_max {
            continue;
        }
        let m_span = (img_max / (2.0 * PI)).ceil() as i64 + 1;
        for m in -m_span..=m_span {
            let u = t.log_a + Complex64::new(0.0, 2.0 * PI * m as f64);
            let us = u + map.image_shift;
            if us.norm() > img_max {
                continue;
            }
            if let Some((lo, hi)) = opts.sector {
                // arg z ~ -pi/2 + arg(u)/alpha; prefilter with margin
                let arg_z = -PI / 2.0 + us.arg() / alpha;
                let margin = 0.35 / alpha / us.norm().max(2.0).ln() + 0.15;
                if arg_z < lo - margin || arg_z > hi + margin {
                    continue;
                }
            }
            targets.push((u, t.log_b));
        }
    }
    let results: Vec<Result<Option<PoleRecord>>> = targets
        .par_iter()
        .map(|&(u, log_b_f)| {
            let z = match map.invert_phi(u) {
                Ok(z) => z,
                Err(_) => {
                    // interior failures are fatal in strict mode; fringe seeds
                    // (expected beyond the radius) are dropped
                    let expect = map.seed_radius_for_image((u + map.image_shift).norm());
                    if opts.strict && expect < 0.98 * radius {
                        return Err(Error::RootPolishFailed { target: u });
                    }
                    return Ok(None);
                }
            };
            if z.norm() > radius {
                return Ok(None);
            }
            if let Some((lo, hi)) = opts.sector {
                let arg = z.arg();
                if arg < lo || arg > hi {
                    return Ok(None);
                }
            }
            // b = B / g'(a), in log space: log g' = log phi' + phi
            let phip = map.phi_prime_unchecked(z);
            let log_b = log_b_f - phip.ln() - u;
            Ok(Some(PoleRecord::new(z, cfg.m, log_b.exp())))
        })
        .collect();
    let mut records = Vec::new();
    for r in results {
        if let Some(rec) = r? {
            records.push(rec);
        }
    }
    Ok(PoleAtlas::new(
        cfg.m,
        radius,
        opts.sector,
        "composed_arcsin_elliptic",
        records,
    ))
}

// --- f = H o exp -------------------------------------------------------------

/// Pole atlas of f = H(e^z): poles log p + 2 pi i k over the lattice of poles
/// p of H, with coefficients beta / p. Rejects lattices with a pole too close
/// to the unit circle. Also returns delta = min |log |p||.
pub fn exp_poles(radius: f64, cfg: &EllipticConfig, cap: u64) -> Result<(PoleAtlas, f64)> {
    let fundamental = poles_of_g_fundamental(cfg)?;
    let p_max = radius.exp();
    let span = (p_max / PI).ceil() as i64 + 1;
    let est = (2 * span + 1).pow(2) as u64 * 4;
    if est > cap * 8 {
        return Err(Error::RegionTooLarge { count: est, cap });
    }
    let mut records = Vec::new();
    let mut delta = f64::INFINITY;
    for (p0, beta) in &fundamental {
        for mm in -span..=span {
            for nn in -span..=span {
                let p = p0 + Complex64::new(mm as f64 * PI, nn as f64 * PI);
                let np = p.norm();
                if np > p_max || np < 1e-12 {
                    continue;
                }
                let u = np.ln();
                let dist = u.abs();
                if dist < 1e-3 {
                    return Err(Error::ModulusOnePole { dist });
                }
                delta = delta.min(dist);
                let v = p.arg();
                let k_span = ((radius + PI) / (2.0 * PI)).ceil() as i64;
                for k in -k_span..=k_span {
                    let a = Complex64::new(u, v + 2.0 * PI * k as f64);
                    if a.norm() <= radius {
                        records.push(PoleRecord::new(a, cfg.m, beta / p));
                    }
                }
            }
        }
    }
    if records.len() as u64 > cap {
        return Err(Error::RegionTooLarge { count: records.len() as u64, cap });
    }
    let atlas = PoleAtlas::new(cfg.m, radius, None, "elliptic_exp", records);
    Ok((atlas, delta))
}

// --- atlas transforms --------------------------------------------------------

/// Power trick: f(z) = f0(z^N) has, for each pole A of f0 with coefficient B,
/// the N poles z0 with z0^N = A and coefficients B / (N z0^{N-1}).
pub fn power_trick(atlas0: &PoleAtlas, n: u32) -> Result<PoleAtlas> {
    if n == 0 {
        return Err(Error::InvalidConfig("N must be >= 1".into()));
    }
    if atlas0.min_modulus().is_some_and(|r| r < 1e-12) {
        return Err(Error::PoleAtOrigin);
    }
    if n == 1 {
        return Ok(atlas0.clone());
    }
    let nf = n as f64;
    let mut records = Vec::with_capacity(atlas0.len() * n as usize);
    for rec in atlas0.records() {
        let r = rec.location.norm().powf(1.0 / nf);
        let base_arg = rec.location.arg() / nf;
        for j in 0..n {
            let z0 = Complex64::from_polar(r, base_arg + 2.0 * PI * j as f64 / nf);
            let coeff = rec.coefficient / (nf * z0.powi(n as i32 - 1));
            records.push(PoleRecord::new(z0, rec.multiplicity, coeff));
        }
    }
    Ok(PoleAtlas::new(
        atlas0.m,
        atlas0.radius.powf(1.0 / nf),
        None,
        format!("power_trick({}, N={})", atlas0.provenance, n),
        records,
    ))
}

/// Scaled family f_lambda(z) = f(lambda z): poles a/lambda, coefficients
/// b/lambda (exact local computation), multiplicities unchanged.
pub fn scaled_family(atlas: &PoleAtlas, lambda: f64) -> Result<PoleAtlas> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidConfig("lambda must lie in (0, 1]".into()));
    }
    if lambda == 1.0 {
        return Ok(atlas.clone());
    }
    let records: Vec<PoleRecord> = atlas
        .records()
        .iter()
        .map(|r| PoleRecord::new(r.location / lambda, r.multiplicity, r.coefficient / lambda))
        .collect();
    Ok(PoleAtlas::new(
        atlas.m,
        atlas.radius / lambda,
        atlas.sector,
        format!("scaled({}, lambda={})", atlas.provenance, lambda),
        records,
    ))
}

// --- function handles --------------------------------------------------------

/// Evaluatable handle for the constructed families.
#[derive(Debug, Clone)]
pub enum FunctionHandle {
    /// F = H(arcsin z)
    Arcsin { cfg: EllipticConfig },
    /// f = F(g(z)) for the comb entire function g
    ComposedArcsin { cfg: EllipticConfig, map: Arc<ConformalMap> },
    /// f = H(e^z)
    EllipticExp { cfg: EllipticConfig },
    /// f(z) = inner(z^N)
    Power { inner: Box<FunctionHandle>, n: u32 },
    /// f(z) = inner(lambda z)
    Scaled { inner: Box<FunctionHandle>, lambda: f64 },
    /// f(z) = alpha * inner(z) + beta
    Affine { inner: Box<FunctionHandle>, alpha: Complex64, beta: Complex64 },
}

impl FunctionHandle {
    pub fn kind_name(&self) -> &'static str {
        match self {
            FunctionHandle::Arcsin { .. } => "F_arcsin",
            FunctionHandle::ComposedArcsin { .. } => "composed_f",
            FunctionHandle::EllipticExp { .. } => "elliptic_exp",
            FunctionHandle::Power { .. } => "power_trick",
            FunctionHandle::Scaled { .. } => "scaled",
            FunctionHandle::Affine { .. } => "affine",
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        match self {
            FunctionHandle::Arcsin { cfg } => eval_f(z, cfg),
            FunctionHandle::ComposedArcsin { cfg, map } => eval_f_of_g(map, cfg, z),
            FunctionHandle::EllipticExp { cfg } => {
                if z.re > 700.0 {
                    return Err(Error::EvaluationRangeExceeded { r: z.re, max: 700.0 });
                }
                crate::elliptic::eval_h(z.exp(), cfg)
            }
            FunctionHandle::Power { inner, n } => inner.eval(z.powi(*n as i32)),
            FunctionHandle::Scaled { inner, lambda } => inner.eval(*lambda * z),
            FunctionHandle::Affine { inner, alpha, beta } => {
                Ok(alpha * inner.eval(z)? + beta)
            }
        }
    }

    /// ln |f(z)| with large finite guards at poles (for circle quadratures).
    pub fn log_abs(&self, z: Complex64) -> f64 {
        match self {
            FunctionHandle::ComposedArcsin { cfg, map } => log_abs_f_of_g(map, cfg, z),
            FunctionHandle::Power { inner, n } => inner.log_abs(z.powi(*n as i32)),
            FunctionHandle::Scaled { inner, lambda } => inner.log_abs(*lambda * z),
            _ => match self.eval(z) {
                Ok(v) => {
                    let n = v.norm();
                    if n == 0.0 {
                        -700.0
                    } else {
                        n.ln()
                    }
                }
                Err(_) => 700.0,
            },
        }
    }
}

/// F(g(z)) evaluated without overflow: once Re phi is large, switch to the
/// asymptotic arcsin of the exponential, arcsin(g) = -i(log 2i + phi) + o(1),
/// and use the periodicity of H.
fn eval_f_of_g(map: &ConformalMap, cfg: &EllipticConfig, z: Complex64) -> Result<Complex64> {
    let phi = if z.im <= 0.0 {
        map.phi_unchecked(z)
    } else {
        map.phi_unchecked(z.conj()).conj()
    };
    if phi.re <= 30.0 {
        eval_f(phi.exp(), cfg)
    } else {
        let w = -I * (phi + Complex64::new(2.0f64.ln(), PI / 2.0));
        crate::elliptic::eval_h(w, cfg).map_err(|e| match e {
            Error::PoleOfH { .. } => Error::PoleOfF { z },
            other => other,
        })
    }
}

fn log_abs_f_of_g(map: &ConformalMap, cfg: &EllipticConfig, z: Complex64) -> f64 {
    match eval_f_of_g(map, cfg, z) {
        Ok(v) => {
            let n = v.norm();
            if n == 0.0 {
                -700.0
            } else {
                n.ln()
            }
        }
        Err(_) => 700.0,
    }
}

/// Affine rescale (a2 - a1) f + a1 with a1, a2 the two smallest poles: the
/// finite critical values 0, 1 map onto the poles a1, a2, so every critical
/// value of the rescaled function is a pole (the Julia set is the whole
/// plane; recorded as metadata, not verified dynamically).
pub fn affine_rescale(handle: FunctionHandle, atlas: &PoleAtlas) -> Result<FunctionHandle> {
    if atlas.len() < 2 {
        return Err(Error::InvalidConfig("need at least two poles".into()));
    }
    let a1 = atlas.records()[0].location;
    let a2 = atlas.records()[1].location;
    Ok(FunctionHandle::Affine { inner: Box::new(handle), alpha: a2 - a1, beta: a1 })
}

/// Laurent-coefficient self check: fit |b| from the function values on a
/// small circle around the pole and compare against the atlas entry.
pub fn laurent_consistency(
    handle: &FunctionHandle,
    rec: &PoleRecord,
    rel_radius: f64,
) -> Result<f64> {
    let a = rec.location;
    let m = rec.multiplicity;
    let r = rel_radius * a.norm().max(1.0);
    let mut acc = 0.0;
    let mut cnt = 0;
    for k in 0..16 {
        let th = 2.0 * PI * (k as f64 + 0.37) / 16.0;
        let z = a + Complex64::from_polar(r, th);
        let v = handle.eval(z)?;
        // |f| ~ (|b| / r)^M  =>  |b| ~ r |f|^{1/M}
        let est = r * v.norm().powf(1.0 / m as f64);
        acc += est;
        cnt += 1;
    }
    let fitted = acc / cnt as f64;
    Ok((fitted - rec.coefficient.norm()).abs() / rec.coefficient.norm())
}
