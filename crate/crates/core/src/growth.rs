//! Nevanlinna-style growth data: counting functions n(r), N(r), the
//! characteristic T(r) = m(r) + N(r) with the proximity term from circle
//! quadrature, maximum modulus for entire factors, and the fitted growth
//! exponents.

use crate::atlas::PoleAtlas;
use crate::conformal::ConformalMap;
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, pairwise_sum};
use crate::speiser::FunctionHandle;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
pub struct GrowthSample {
    pub r: f64,
    pub n_r: u64,
    pub nn_r: f64,
    pub t_r: f64,
    pub log_m_r: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GrowthCurve {
    pub samples: Vec<GrowthSample>,
    /// slope of log T against log r over the top half of the samples
    pub order_fit: f64,
    /// slope of log T against log log r over the top half
    pub loglog_density: f64,
    /// log-power correction exponent against the r^rho / (log r)^p template
    pub p_fit: Option<f64>,
}

/// N(r) = integral of n(t)/t: exactly sum over atlas poles of log(r / |a_j|).
pub fn counting_integral(atlas: &PoleAtlas, r: f64) -> f64 {
    let terms: Vec<f64> = atlas
        .records()
        .iter()
        .map(|p| p.location.norm())
        .filter(|&m| m <= r && m > 0.0)
        .map(|m| (r / m).ln())
        .collect();
    pairwise_sum(&terms)
}

/// N(r) by explicit quadrature of the step function n(t)/t on a fine log
/// grid; the independent route for the Jensen-style identity check.
pub fn counting_integral_quadrature(atlas: &PoleAtlas, r: f64) -> f64 {
    let mut radii: Vec<f64> = atlas
        .records()
        .iter()
        .map(|p| p.location.norm())
        .filter(|&m| m <= r)
        .collect();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // integral of n(t)/t dt = sum over gaps of n * (ln t_{i+1} - ln t_i)
    let mut acc = 0.0;
    for (i, window) in radii.windows(2).enumerate() {
        acc += (i + 1) as f64 * (window[1].ln() - window[0].ln());
    }
    if let Some(&last) = radii.last() {
        acc += radii.len() as f64 * (r.ln() - last.ln());
    }
    acc
}

/// Proximity term m(r) = (1/2 pi) integral of log+ |f| on the circle |z| = r,
/// by trapezoid quadrature with node doubling.
pub fn proximity_term(f: &FunctionHandle, r: f64) -> f64 {
    let mut n = 256usize;
    let mut prev = f64::NAN;
    loop {
        let vals: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let th = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                let la = f.log_abs(num_complex::Complex64::from_polar(r, th));
                la.max(0.0).min(690.0)
            })
            .collect();
        let m = pairwise_sum(&vals) / n as f64;
        if (m - prev).abs() < 1e-3 * m.abs().max(1.0) || n >= 8192 {
            return m;
        }
        prev = m;
        n *= 2;
    }
}

#[derive(Debug, Clone, Copy)]
pub enum GrowthTarget<'a> {
    /// meromorphic: T = m + N from the handle and its pole atlas
    Meromorphic { f: &'a FunctionHandle, atlas: &'a PoleAtlas },
    /// entire comb function: log M from the symmetry axis, T ~ log M
    Entire { map: &'a ConformalMap },
}

/// Growth curve over the given radii, with fitted exponents.
pub fn growth_curve(target: &GrowthTarget, radii: &[f64]) -> Result<GrowthCurve> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("radii must be increasing".into()));
    }
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        let s = match target {
            GrowthTarget::Meromorphic { f, atlas } => {
                if r > atlas.radius * (1.0 + 1e-9) {
                    return Err(Error::EvaluationRangeExceeded { r, max: atlas.radius });
                }
                let n_r = atlas.count_within(r);
                let nn_r = counting_integral(atlas, r);
                let m_r = proximity_term(f, r);
                GrowthSample { r, n_r, nn_r, t_r: m_r + nn_r, log_m_r: None }
            }
            GrowthTarget::Entire { map } => {
                if r > map.covered_radius * (1.0 + 1e-9) {
                    return Err(Error::EvaluationRangeExceeded { r, max: map.covered_radius });
                }
                // the comb map attains its maximum modulus on the symmetry axis
                let log_m = map.phi_axis(r);
                GrowthSample { r, n_r: 0, nn_r: 0.0, t_r: log_m, log_m_r: Some(log_m) }
            }
        };
        samples.push(s);
    }
    let usable: Vec<&GrowthSample> = samples.iter().filter(|s| s.t_r > 0.0).collect();
    if usable.len() < 4 {
        return Err(Error::Numerical("too few positive T samples".into()));
    }
    let start = usable.len() / 2;
    let xs: Vec<f64> = usable[start..].iter().map(|s| s.r.ln()).collect();
    let ys: Vec<f64> = usable[start..].iter().map(|s| s.t_r.ln()).collect();
    let order_fit = linear_fit(&xs, &ys).slope;
    let xs2: Vec<f64> = usable[start..].iter().map(|s| s.r.ln().ln()).collect();
    let loglog_density = linear_fit(&xs2, &ys).slope;
    // residual against T ~ r^rho / (log r)^p using the fitted order
    let p_fit = if usable.len() >= 6 {
        let res: Vec<f64> = usable[start..]
            .iter()
            .map(|s| s.t_r.ln() - order_fit * s.r.ln())
            .collect();
        Some(-linear_fit(&xs2, &res).slope)
    } else {
        None
    };
    Ok(GrowthCurve { samples, order_fit, loglog_density, p_fit })
}

#[derive(Debug, Clone)]
pub struct CompositeGrowthReport {
    /// rho(g) * liminf and limsup of log T(r, f) / log log r
    pub lower: f64,
    pub upper: f64,
    pub rho_fg: f64,
    pub bounds_hold: bool,
    /// margins (1 + eps) T(M(r, g) + 2|g(0)|, f) - T(r, f o g) at overlapping radii
    pub chain_margins: Vec<(f64, f64)>,
    pub chain_holds: bool,
}

/// Check the two-sided order relation for compositions and the chain bound
/// T(r, f o g) <= (1 + eps) T(M(r, g) + 2 |g(0)|, f) on overlapping samples.
/// `curve_f` must extend to the image scale M(r, g); `g0_abs` is |g(0)|.
pub fn composite_growth_bounds(
    curve_f: &GrowthCurve,
    curve_g: &GrowthCurve,
    curve_fg: &GrowthCurve,
    g0_abs: f64,
    eps: f64,
) -> Result<CompositeGrowthReport> {
    // fitted quantities
    let rho_g = curve_g.order_fit;
    let rho_fg = curve_fg.order_fit;
    // liminf/limsup proxy: min/max of windowed loglog slopes of T(r, f)
    let pts: Vec<(f64, f64)> = curve_f
        .samples
        .iter()
        .filter(|s| s.t_r > 0.0 && s.r > 3.0)
        .map(|s| (s.r.ln().ln(), s.t_r.ln()))
        .collect();
    if pts.len() < 6 {
        return Err(Error::IncompatibleRanges);
    }
    let mut smin = f64::INFINITY;
    let mut smax = f64::NEG_INFINITY;
    let w = pts.len() / 3;
    for chunk_start in [pts.len() - 2 * w, pts.len() - w] {
        let xs: Vec<f64> = pts[chunk_start..(chunk_start + w).min(pts.len())]
            .iter()
            .map(|p| p.0)
            .collect();
        let ys: Vec<f64> = pts[chunk_start..(chunk_start + w).min(pts.len())]
            .iter()
            .map(|p| p.1)
            .collect();
        if xs.len() >= 3 {
            let s = linear_fit(&xs, &ys).slope;
            smin = smin.min(s);
            smax = smax.max(s);
        }
    }
    let lower = rho_g * smin;
    let upper = rho_g * smax;
    let tol = 0.2 * rho_fg.abs().max(0.5);
    let bounds_hold = rho_fg >= lower - tol && rho_fg <= upper + tol;

    // chain bound on overlapping radii
    let interp_t = |curve: &GrowthCurve, r: f64| -> Option<f64> {
        let s = &curve.samples;
        if r < s.first()?.r || r > s.last()?.r {
            return None;
        }
        let i = s.partition_point(|p| p.r < r).min(s.len() - 1).max(1);
        let (a, b) = (&s[i - 1], &s[i]);
        let t = (r.ln() - a.r.ln()) / (b.r.ln() - a.r.ln());
        Some(a.t_r + t * (b.t_r - a.t_r))
    };
    let mut chain_margins = Vec::new();
    let mut chain_holds = true;
    for (sg, sfg) in curve_g.samples.iter().zip(&curve_fg.samples) {
        let big_r = sg.log_m_r.map(|lm| lm.exp()).unwrap_or(f64::INFINITY) + 2.0 * g0_abs;
        // T(R, f) at the image scale: extend by the fitted log^2 law when the
        // f-curve is logarithmic in r (order-zero factors)
        let t_f = if big_r.is_finite() && big_r.ln() <= curve_f.samples.last().unwrap().r.ln() {
            interp_t(curve_f, big_r)
        } else {
            // order-zero template T ~ c (log r)^2 fitted on the top half
            let top: Vec<&GrowthSample> =
                curve_f.samples.iter().filter(|s| s.t_r > 0.0).collect();
            let start = top.len() / 2;
            let xs: Vec<f64> = top[start..].iter().map(|s| s.r.ln().powi(2)).collect();
            let ys: Vec<f64> = top[start..].iter().map(|s| s.t_r).collect();
            let fit = linear_fit(&xs, &ys);
            let lr = sg.log_m_r.unwrap_or(f64::NAN);
            Some(fit.intercept + fit.slope * lr * lr)
        };
        if let Some(tf) = t_f {
            let margin = (1.0 + eps) * tf - sfg.t_r;
            if margin < 0.0 {
                chain_holds = false;
            }
            chain_margins.push((sg.r, margin));
        }
    }
    if chain_margins.is_empty() {
        return Err(Error::IncompatibleRanges);
    }
    Ok(CompositeGrowthReport { lower, upper, rho_fg, bounds_hold, chain_margins, chain_holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::PoleRecord;
    use num_complex::Complex64;

    #[test]
    fn counting_routes_agree() {
        let records: Vec<PoleRecord> = (1..=2000)
            .map(|j| {
                PoleRecord::new(
                    Complex64::from_polar((j as f64).sqrt() * 1.1, 0.7 * j as f64),
                    1,
                    Complex64::new(1.0, 0.0),
                )
            })
            .collect();
        let atlas = PoleAtlas::new(1, 60.0, None, "synthetic", records);
        for &r in &[5.0, 17.0, 49.0] {
            let a = counting_integral(&atlas, r);
            let b = counting_integral_quadrature(&atlas, r);
            assert!(
                (a - b).abs() <= 1e-6 * a.max(1.0),
                "r = {r}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn synthetic_counting_bound_chain() {
        // n(r) <= N(e r) for counting measures: check on a synthetic atlas
        let records: Vec<PoleRecord> = (1..=4000)
            .map(|j| {
                PoleRecord::new(
                    Complex64::from_polar(j as f64, 2.4 * j as f64),
                    1,
                    Complex64::new(1.0, 0.0),
                )
            })
            .collect();
        let atlas = PoleAtlas::new(1, 4000.0, None, "synthetic", records);
        for &r in &[50.0, 300.0, 1200.0] {
            let n_r = atlas.count_within(r) as f64;
            let nn_er = counting_integral(&atlas, std::f64::consts::E * r);
            assert!(n_r <= nn_er + 1e-9, "n({r}) = {n_r} > N(er) = {nn_er}");
        }
    }
}
