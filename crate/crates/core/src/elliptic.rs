//! Weierstrass P on the square lattice with periods pi and i*pi, the derived
//! elliptic functions G = L(P^2) and H = G^M, and their pole data.
//!
//! The lattice is fixed, so the Laurent coefficients of P around the origin
//! are global constants. Evaluation reduces the argument to the fundamental
//! cell by periodicity and sums the Laurent series; the cell corner has
//! |z| <= pi/sqrt(2) < pi, so the series converges geometrically with ratio
//! at most 1/2 per coefficient pair.

use crate::atlas::PoleRecord;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Points closer than this to a lattice point are reported as singular
/// rather than extrapolated.
pub const EXCLUSION_RADIUS: f64 = 1e-6;

const COEFF_LEN: usize = 88;

/// g2 invariant of the lattice pi*Z + i*pi*Z (g3 = 0 for the square lattice).
/// Computed from the weight-4 Eisenstein series at the square-lattice modulus,
/// q = exp(-2 pi): g2 = (4/3) * (1 + 240 sum sigma3(n) q^n).
pub fn lattice_g2() -> f64 {
    static G2: OnceLock<f64> = OnceLock::new();
    *G2.get_or_init(|| {
        let q = (-2.0 * PI).exp();
        let mut e4 = 1.0;
        for n in 1..=24u64 {
            let mut s3 = 0u64;
            for d in 1..=n {
                if n % d == 0 {
                    s3 += d * d * d;
                }
            }
            e4 += 240.0 * s3 as f64 * q.powi(n as i32);
        }
        4.0 / 3.0 * e4
    })
}

/// Laurent coefficients c_k of P(z) = 1/z^2 + sum_{k>=1} c_k z^{2k}.
/// c_1 = g2/20, c_2 = g3/28 = 0, and for k >= 3
/// c_k = 3 / ((2k+3)(k-2)) * sum_{m=1}^{k-2} c_m c_{k-1-m}.
fn laurent_coeffs() -> &'static [f64] {
    static CS: OnceLock<Vec<f64>> = OnceLock::new();
    CS.get_or_init(|| {
        let mut cs = vec![0.0; COEFF_LEN + 1];
        cs[1] = lattice_g2() / 20.0;
        cs[2] = 0.0;
        for k in 3..=COEFF_LEN {
            let mut s = 0.0;
            for m in 1..=k - 2 {
                s += cs[m] * cs[k - 1 - m];
            }
            cs[k] = 3.0 / ((2 * k + 3) as f64 * (k - 2) as f64) * s;
        }
        cs
    })
}

/// Reduce z modulo the lattice to the centered cell [-pi/2, pi/2]^2.
fn reduce(z: Complex64) -> Complex64 {
    Complex64::new(z.re - PI * (z.re / PI).round(), z.im - PI * (z.im / PI).round())
}

/// Configuration for the elliptic constructions: the third critical value a,
/// the pole multiplicity M of H = G^M, the rescaling kappa of H_kappa(z) = H(kappa z),
/// and the target evaluation tolerance.
#[derive(Debug, Clone, Copy)]
pub struct EllipticConfig {
    pub a: Complex64,
    pub m: u32,
    pub kappa: f64,
    pub tolerance: f64,
}

impl EllipticConfig {
    /// Canonical configuration: a = exp(2 pi i / M) for M >= 2, and a = -1
    /// for M = 1 (keeps the construction real-symmetric).
    pub fn new(m: u32) -> Result<Self> {
        let a = match m {
            0 => return Err(Error::InvalidConfig("M must be >= 1".into())),
            1 | 2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::from_polar(1.0, 2.0 * PI / m as f64),
        };
        Self::with_a(m, a)
    }

    /// Configuration with an explicit third critical value (only free for M = 1).
    pub fn with_a(m: u32, a: Complex64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("M must be >= 1".into()));
        }
        if (a - Complex64::new(0.0, 0.0)).norm() < 1e-12
            || (a - Complex64::new(1.0, 0.0)).norm() < 1e-12
        {
            return Err(Error::InvalidConfig("a must avoid 0 and 1".into()));
        }
        if m >= 2 {
            let want = if m == 2 {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, 2.0 * PI / m as f64)
            };
            if (a - want).norm() > 1e-12 {
                return Err(Error::InvalidConfig(
                    "for M >= 2 the third critical value must be exp(2 pi i / M)".into(),
                ));
            }
        }
        Ok(EllipticConfig { a, m, kappa: 1.0, tolerance: 1e-12 })
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::InvalidConfig("kappa must lie in (0, 1]".into()));
        }
        self.kappa = kappa;
        Ok(self)
    }

    /// Coefficient c of the fractional linear map L(w) = 1 / (1 + c w), which
    /// satisfies L(inf) = 0, L(0) = 1 and L(e1^2) = a.
    pub fn mobius_c(&self) -> Complex64 {
        let e1 = critical_values(self).e1;
        (Complex64::new(1.0, 0.0) - self.a) / (self.a * e1 * e1)
    }
}

/// Finite critical values of P on the square lattice.
#[derive(Debug, Clone, Copy)]
pub struct CriticalValueTriple {
    pub e1: Complex64,
    pub e2: Complex64,
    pub e3: Complex64,
}

/// Weierstrass P with periods pi and i*pi, to absolute accuracy near
/// `config.tolerance` away from the lattice (relative near the poles).
pub fn wp(z: Complex64, config: &EllipticConfig) -> Result<Complex64> {
    let w = reduce(z);
    if w.norm() < EXCLUSION_RADIUS {
        return Err(Error::LatticePointSingularity { z });
    }
    let cs = laurent_coeffs();
    let w2 = w * w;
    let mut sum = w2.inv();
    let mut pow = w2;
    let target = 0.01 * config.tolerance;
    // c_k vanishes for even k on the square lattice, so track the two most
    // recent nonzero terms before stopping
    let mut prev_mag = f64::INFINITY;
    for k in 1..=COEFF_LEN {
        if cs[k] != 0.0 {
            let term = cs[k] * pow;
            sum += term;
            let mag = term.norm();
            if k >= 5 && mag < target && prev_mag < target {
                break;
            }
            prev_mag = mag;
        }
        pow *= w2;
    }
    Ok(sum)
}

/// Derivative P'(z); satisfies (P')^2 = 4 P^3 - g2 P.
pub fn wp_prime(z: Complex64, config: &EllipticConfig) -> Result<Complex64> {
    let w = reduce(z);
    if w.norm() < EXCLUSION_RADIUS {
        return Err(Error::LatticePointSingularity { z });
    }
    let cs = laurent_coeffs();
    let w2 = w * w;
    let mut sum = -2.0 * (w * w2).inv();
    let mut pow = w;
    let target = 0.01 * config.tolerance;
    let mut prev_mag = f64::INFINITY;
    for k in 1..=COEFF_LEN {
        if cs[k] != 0.0 {
            let term = (2 * k) as f64 * cs[k] * pow;
            sum += term;
            let mag = term.norm();
            if k >= 5 && mag < target && prev_mag < target {
                break;
            }
            prev_mag = mag;
        }
        pow *= w2;
    }
    Ok(sum)
}

/// (e1, e2, e3) = (P(pi/2), P((pi + i pi)/2), P(i pi/2)).
pub fn critical_values(config: &EllipticConfig) -> CriticalValueTriple {
    static E: OnceLock<(Complex64, Complex64, Complex64)> = OnceLock::new();
    let (e1, e2, e3) = *E.get_or_init(|| {
        let cfg = EllipticConfig { a: Complex64::new(-1.0, 0.0), m: 1, kappa: 1.0, tolerance: 1e-14 };
        let e1 = wp(Complex64::new(PI / 2.0, 0.0), &cfg).expect("half-period");
        let e2 = wp(Complex64::new(PI / 2.0, PI / 2.0), &cfg).expect("half-period");
        let e3 = wp(Complex64::new(0.0, PI / 2.0), &cfg).expect("half-period");
        (e1, e2, e3)
    });
    let _ = config;
    CriticalValueTriple { e1, e2, e3 }
}

/// G = L(P^2): even elliptic with periods pi, i*pi and critical values {0, 1, a}.
/// Lattice points are regular points (zeros of order 4).
pub fn eval_g(z: Complex64, config: &EllipticConfig) -> Result<Complex64> {
    let c = config.mobius_c();
    let w = reduce(z);
    if w.norm() < EXCLUSION_RADIUS {
        // P ~ 1/z^2, so G = 1/(1 + c P^2) ~ z^4 / c
        let w4 = w * w * w * w;
        return Ok(w4 / (c + w4));
    }
    let p = wp(z, config)?;
    let denom = Complex64::new(1.0, 0.0) + c * p * p;
    if denom.norm() < 1e-12 * (c * p * p).norm().max(1.0) {
        return Err(Error::PoleOfG { z });
    }
    Ok(denom.inv())
}

/// Derivative G'(z) = -2 c P P' / (1 + c P^2)^2.
pub fn eval_g_prime(z: Complex64, config: &EllipticConfig) -> Result<Complex64> {
    let c = config.mobius_c();
    let w = reduce(z);
    if w.norm() < EXCLUSION_RADIUS {
        // G ~ z^4/c
        let w3 = w * w * w;
        return Ok(4.0 * w3 / c);
    }
    let p = wp(z, config)?;
    let dp = wp_prime(z, config)?;
    let denom = Complex64::new(1.0, 0.0) + c * p * p;
    if denom.norm() < 1e-12 * (c * p * p).norm().max(1.0) {
        return Err(Error::PoleOfG { z });
    }
    Ok(-2.0 * c * p * dp / (denom * denom))
}

/// H_kappa(z) = G(kappa z)^M.
pub fn eval_h(z: Complex64, config: &EllipticConfig) -> Result<Complex64> {
    let g = eval_g(config.kappa * z, config).map_err(|e| match e {
        Error::PoleOfG { .. } => Error::PoleOfH { z },
        other => other,
    })?;
    Ok(g.powi(config.m as i32))
}

/// log |H(z)|, finite guard value near poles (used by growth quadratures).
pub fn eval_h_log_abs(z: Complex64, config: &EllipticConfig) -> f64 {
    match eval_g(config.kappa * z, config) {
        Ok(g) => {
            let n = g.norm();
            if n == 0.0 {
                -1e30
            } else {
                config.m as f64 * n.ln()
            }
        }
        Err(_) => 1e30,
    }
}

/// Poles of G in the fundamental cell [0, pi) x [0, pi), with residues.
/// G has exactly four simple poles per cell (it has degree 4 and a single
/// zero of order 4 at the lattice).
pub fn poles_of_g_fundamental(config: &EllipticConfig) -> Result<Vec<(Complex64, Complex64)>> {
    let c = config.mobius_c();
    // P^2 = -1/c at the poles
    let v2 = -c.inv();
    let v = v2.sqrt();
    let mut found: Vec<Complex64> = Vec::new();
    for &target in &[v, -v] {
        for gi in 0..14 {
            for gj in 0..14 {
                let z0 = Complex64::new(
                    0.12 + (PI - 0.24) * gi as f64 / 13.0,
                    0.12 + (PI - 0.24) * gj as f64 / 13.0,
                );
                if let Some(root) = newton_wp(z0, target, config) {
                    let mut r = reduce(root);
                    // map to [0, pi) x [0, pi)
                    if r.re < -1e-9 {
                        r.re += PI;
                    }
                    if r.im < -1e-9 {
                        r.im += PI;
                    }
                    r.re = r.re.rem_euclid(PI);
                    r.im = r.im.rem_euclid(PI);
                    if !found.iter().any(|f| {
                        let d = *f - r;
                        let dre = d.re - PI * (d.re / PI).round();
                        let dim = d.im - PI * (d.im / PI).round();
                        (dre * dre + dim * dim).sqrt() < 1e-7
                    }) {
                        found.push(r);
                    }
                }
            }
        }
    }
    if found.len() != 4 {
        return Err(Error::Numerical(format!(
            "expected 4 poles of G in the fundamental cell, found {}",
            found.len()
        )));
    }
    found.sort_by(|p, q| {
        p.norm()
            .partial_cmp(&q.norm())
            .unwrap()
            .then(p.arg().partial_cmp(&q.arg()).unwrap())
    });
    found.iter().map(|&p| Ok((p, residue_of_g(p, config)?))).collect()
}

fn newton_wp(z0: Complex64, target: Complex64, config: &EllipticConfig) -> Option<Complex64> {
    let mut z = z0;
    for _ in 0..60 {
        let p = wp(z, config).ok()?;
        let dp = wp_prime(z, config).ok()?;
        if dp.norm() < 1e-14 {
            return None;
        }
        let step = (p - target) / dp;
        z -= step;
        if step.norm() < 1e-13 {
            let p = wp(z, config).ok()?;
            if (p - target).norm() < 1e-9 * target.norm().max(1.0) {
                return Some(z);
            }
            return None;
        }
    }
    None
}

/// Residue of G at a simple pole, by trapezoid contour quadrature on a small
/// circle (64 nodes, radius 1e-3). Spectrally accurate for the analytic
/// integrand; cross-checked against the closed form in tests.
pub fn residue_of_g(pole: Complex64, config: &EllipticConfig) -> Result<Complex64> {
    const NODES: usize = 64;
    const RADIUS: f64 = 1e-3;
    let mut vals = Vec::with_capacity(NODES);
    for k in 0..NODES {
        let th = 2.0 * PI * k as f64 / NODES as f64;
        let dz = Complex64::from_polar(RADIUS, th);
        let g = eval_g(pole + dz, config)?;
        vals.push(g * dz);
    }
    let sum: Complex64 = vals.iter().sum();
    Ok(sum / NODES as f64)
}

/// Closed form for the residue: G = 1/(1 + c P^2) has res = 1 / (2 c P P')
/// at a simple pole. Kept as the independent second route for the quadrature.
pub fn residue_of_g_closed_form(pole: Complex64, config: &EllipticConfig) -> Result<Complex64> {
    let c = config.mobius_c();
    let p = wp(pole, config)?;
    let dp = wp_prime(pole, config)?;
    Ok((2.0 * c * p * dp).inv())
}

/// Axis-aligned rectangle in the plane.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re < self.re_max && z.im >= self.im_min && z.im < self.im_max
    }
}

#[derive(Debug, Clone)]
pub struct PolesOfH {
    pub records: Vec<PoleRecord>,
    /// Lower bound actually attained by the |beta_j|: min over the fundamental residues.
    pub c0: f64,
}

/// All poles of H_kappa in `region`, each of multiplicity M with coefficient
/// beta = res(G, p) / kappa, where p is the underlying fundamental pole of G.
pub fn poles_of_h(region: Rect, config: &EllipticConfig, cap: u64) -> Result<PolesOfH> {
    let fundamental = poles_of_g_fundamental(config)?;
    let k = config.kappa;
    // lattice translate ranges covering region * kappa
    let mlo = ((region.re_min * k) / PI).floor() as i64 - 1;
    let mhi = ((region.re_max * k) / PI).ceil() as i64 + 1;
    let nlo = ((region.im_min * k) / PI).floor() as i64 - 1;
    let nhi = ((region.im_max * k) / PI).ceil() as i64 + 1;
    let est = (mhi - mlo).max(0) as u64 * (nhi - nlo).max(0) as u64 * 4;
    if est > cap {
        return Err(Error::RegionTooLarge { count: est, cap });
    }
    let mut records = Vec::new();
    for (p, res) in &fundamental {
        for m in mlo..=mhi {
            for n in nlo..=nhi {
                let loc = (p + Complex64::new(m as f64 * PI, n as f64 * PI)) / k;
                if region.contains(loc) {
                    records.push(PoleRecord::new(loc, config.m, res / k));
                }
            }
        }
    }
    if records.len() as u64 > cap {
        return Err(Error::RegionTooLarge { count: records.len() as u64, cap });
    }
    crate::atlas::canonical_sort(&mut records);
    let c0 = fundamental.iter().map(|(_, r)| r.norm()).fold(f64::INFINITY, f64::min) / k;
    Ok(PolesOfH { records, c0 })
}

/// A kappa for which H_kappa(D(0, rho)) is contained in the unit disk,
/// found by sampling |G| on circles and shrinking until the sup is below 1.
pub fn kappa_for_contract(config: &EllipticConfig, rho: f64) -> f64 {
    let sup_on_disk = |r: f64| -> f64 {
        let mut sup: f64 = 0.0;
        for i in 1..=40 {
            let rr = r * i as f64 / 40.0;
            for j in 0..256 {
                let th = 2.0 * PI * j as f64 / 256.0;
                let z = Complex64::from_polar(rr, th);
                if let Ok(g) = eval_g(z, config) {
                    sup = sup.max(g.norm());
                } else {
                    return f64::INFINITY;
                }
            }
        }
        sup
    };
    let mut kappa = 1.0f64.min(1.4 / rho);
    for _ in 0..60 {
        if sup_on_disk(kappa * rho) < 0.98 {
            break;
        }
        kappa *= 0.85;
    }
    kappa
}

/// Fit the local Laurent exponent of f at a pole: slope of mean log |f| on
/// small circles against -log radius.
pub fn fit_laurent_exponent<F>(f: F, pole: Complex64, radii: &[f64]) -> f64
where
    F: Fn(Complex64) -> Option<Complex64>,
{
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let mut acc = 0.0;
        let mut cnt = 0;
        for k in 0..32 {
            let th = 2.0 * PI * k as f64 / 32.0;
            if let Some(v) = f(pole + Complex64::from_polar(r, th)) {
                let n = v.norm();
                if n > 0.0 && n.is_finite() {
                    acc += n.ln();
                    cnt += 1;
                }
            }
        }
        if cnt > 0 {
            xs.push(-r.ln());
            ys.push(acc / cnt as f64);
        }
    }
    crate::numeric::linear_fit(&xs, &ys).slope
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> EllipticConfig {
        EllipticConfig::new(1).unwrap()
    }

    /// Direct Eisenstein lattice sum for P, truncated at |m|, |n| <= 200 with
    /// a quartic tail correction. Independent of the Laurent-series path.
    fn wp_lattice_sum_oracle(z: Complex64) -> Complex64 {
        const N: i64 = 200;
        let mut terms: Vec<Complex64> = Vec::with_capacity((2 * N as usize + 1).pow(2));
        for m in -N..=N {
            for n in -N..=N {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = Complex64::new(m as f64 * PI, n as f64 * PI);
                terms.push((z - w).inv().powi(2) - w.inv().powi(2));
            }
        }
        let sum: Complex64 = terms.iter().sum();
        // tail: pairs outside the box contribute 6 z^2 / w^4 + O(z^4/w^6); the
        // lattice sum of 1/(m+in)^4 outside the box is 1/(3 (N+1/2)^2) + O(N^-3)
        let l = N as f64 + 0.5;
        let s4_out = 1.0 / (3.0 * l * l) / (PI * PI * PI * PI);
        let tail = 3.0 * z * z * s4_out;
        z.inv().powi(2) + sum + tail
    }

    #[test]
    fn wp_matches_lattice_sum_oracle() {
        let c = cfg();
        let e1 = wp(Complex64::new(PI / 2.0, 0.0), &c).unwrap();
        let oracle = wp_lattice_sum_oracle(Complex64::new(PI / 2.0, 0.0));
        assert!((e1 - oracle).norm() < 5e-6, "e1 {} vs oracle {}", e1, oracle);
        let z = Complex64::new(0.7, 0.4);
        let direct = wp(z, &c).unwrap();
        let oracle = wp_lattice_sum_oracle(z);
        assert!((direct - oracle).norm() < 5e-6);
    }

    #[test]
    fn critical_value_structure() {
        let c = cfg();
        let cv = critical_values(&c);
        assert!(cv.e1.im.abs() < 1e-12 && cv.e1.re > 0.0);
        assert!(cv.e2.norm() < 1e-10, "e2 = {}", cv.e2);
        assert!((cv.e1 + cv.e3).norm() < 1e-10);
        // frozen reference: e1 = (lemniscate constant / pi)^2
        assert_relative_eq!(cv.e1.re, 0.696601964842838, epsilon = 1e-12);
    }

    #[test]
    fn periodicity_and_evenness() {
        let c = cfg();
        let z = Complex64::new(0.3, 0.4);
        let a = wp(z, &c).unwrap();
        let b = wp(z + PI, &c).unwrap();
        assert!((a - b).norm() < 1e-12);
        let z = Complex64::new(1.1, 0.2);
        assert!((wp(z, &c).unwrap() - wp(-z, &c).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn differential_equation_residual() {
        let c = cfg();
        let g2 = lattice_g2();
        let z = Complex64::new(0.4, 0.3);
        let p = wp(z, &c).unwrap();
        let dp = wp_prime(z, &c).unwrap();
        let res = dp * dp - (4.0 * p * p * p - g2 * p);
        assert!(res.norm() < 1e-9, "residual {}", res.norm());
    }

    #[test]
    fn wp_prime_oddness_and_half_period_zero() {
        let c = cfg();
        let z = Complex64::new(0.7, 0.5);
        assert!((wp_prime(z, &c).unwrap() + wp_prime(-z, &c).unwrap()).norm() < 1e-12);
        assert!(wp_prime(Complex64::new(PI / 2.0, 0.0), &c).unwrap().norm() < 1e-10);
    }

    #[test]
    fn lattice_exclusion() {
        let c = cfg();
        assert!(matches!(
            wp(Complex64::new(PI, 1e-8), &c),
            Err(Error::LatticePointSingularity { .. })
        ));
    }

    #[test]
    fn g_interpolates_critical_values() {
        let c = cfg();
        let g0 = eval_g(Complex64::new(0.0, 0.0), &c).unwrap();
        assert!(g0.norm() < 1e-20);
        let ga = eval_g(Complex64::new(PI / 2.0, 0.0), &c).unwrap();
        assert!((ga - c.a).norm() < 1e-10);
        let g1 = eval_g(Complex64::new(PI / 2.0, PI / 2.0), &c).unwrap();
        assert!((g1 - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    /// Critical structure of G = L(P^2): every half-period is critical
    /// (G' = 0). The a-points pi/2 and i pi/2 have multiplicity exactly 2
    /// (G'' != 0); the 1-point (pi + i pi)/2 and the 0-point at the lattice
    /// are order 4, because P^2 squares the critical behavior there.
    #[test]
    fn g_critical_points_second_derivative_test() {
        let c = cfg();
        let h = 1e-5;
        for &zc in &[
            Complex64::new(PI / 2.0, 0.0),
            Complex64::new(PI / 2.0, PI / 2.0),
            Complex64::new(0.0, PI / 2.0),
        ] {
            let gp = eval_g_prime(zc, &c).unwrap();
            assert!(gp.norm() < 1e-8, "G' at half-period = {}", gp.norm());
        }
        for &zc in &[Complex64::new(PI / 2.0, 0.0), Complex64::new(0.0, PI / 2.0)] {
            let g2nd = (eval_g(zc + h, &c).unwrap() - 2.0 * eval_g(zc, &c).unwrap()
                + eval_g(zc - h, &c).unwrap())
                / (h * h);
            assert!(g2nd.norm() > 1e-3, "a-point not of multiplicity 2");
        }
        // the 1-point: local exponent of G - 1 is 4
        let center = Complex64::new(PI / 2.0, PI / 2.0);
        let fitted = fit_laurent_exponent(
            |z| eval_g(z, &c).ok().map(|g| g - Complex64::new(1.0, 0.0)),
            center,
            &[1e-3, 3e-3, 1e-2],
        );
        assert!((fitted + 4.0).abs() < 0.01, "exponent at the 1-point: {fitted}");
    }

    #[test]
    fn four_simple_poles_per_cell_with_matching_residue_routes() {
        let c = cfg();
        let poles = poles_of_g_fundamental(&c).unwrap();
        assert_eq!(poles.len(), 4);
        for (p, res) in &poles {
            let closed = residue_of_g_closed_form(*p, &c).unwrap();
            assert!(
                (res - closed).norm() < 1e-10,
                "contour {} vs closed form {}",
                res,
                closed
            );
            // frozen reference for a = -1: |res| = 0.3562092229796... at every pole
            assert_relative_eq!(res.norm(), 0.356209222979649, epsilon = 1e-9);
        }
        // the two poles closest to the origin sit at (pi/2, 0.497765...) and
        // its diagonal mirror, both of modulus 1.6477776515...
        assert_relative_eq!(poles[0].0.norm(), 1.647777651513173, epsilon = 1e-9);
        assert_relative_eq!(poles[1].0.norm(), 1.647777651513173, epsilon = 1e-9);
    }

    /// Winding of G along the cell boundary is zero (elliptic: as many zeros
    /// as poles); combined with the known zero of order 4 at the lattice this
    /// pins the pole count at 4. Argument-principle check of the enumeration.
    #[test]
    fn argument_principle_pole_count() {
        let c = cfg();
        let shift = Complex64::new(-0.31, -0.27);
        let corners = [
            shift,
            shift + PI,
            shift + Complex64::new(PI, PI),
            shift + Complex64::new(0.0, PI),
        ];
        let mut winding = 0.0;
        let n = 1600;
        let mut prev_arg: Option<f64> = None;
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            for i in 0..n {
                let z = a + (b - a) * (i as f64 / n as f64);
                let g = eval_g(z, &c).unwrap();
                let arg = g.arg();
                if let Some(pa) = prev_arg {
                    let mut d = arg - pa;
                    while d > PI {
                        d -= 2.0 * PI;
                    }
                    while d < -PI {
                        d += 2.0 * PI;
                    }
                    winding += d;
                }
                prev_arg = Some(arg);
            }
        }
        let turns = winding / (2.0 * PI);
        assert!(turns.abs() < 0.01, "winding = {turns}");
        // zeros(order 4 at lattice) - poles = winding = 0  =>  4 poles
    }

    #[test]
    fn poles_of_h_translates_and_partition() {
        let c = EllipticConfig::new(2).unwrap();
        let whole = Rect { re_min: -4.0, re_max: 4.0, im_min: -4.0, im_max: 4.0 };
        let all = poles_of_h(whole, &c, 100_000).unwrap();
        assert!(all.c0 > 0.3);
        // lattice translates have equal coefficient modulus
        for r in &all.records {
            let shifted = r.location + PI;
            if whole.contains(shifted) {
                let other = all
                    .records
                    .iter()
                    .find(|s| (s.location - shifted).norm() < 1e-8)
                    .expect("translate present");
                assert_relative_eq!(
                    other.coefficient.norm(),
                    r.coefficient.norm(),
                    epsilon = 1e-10
                );
            }
        }
        // partition invariance
        let left = Rect { re_min: -4.0, re_max: 0.0, im_min: -4.0, im_max: 4.0 };
        let right = Rect { re_min: 0.0, re_max: 4.0, im_min: -4.0, im_max: 4.0 };
        let mut merged = poles_of_h(left, &c, 100_000).unwrap().records;
        merged.extend(poles_of_h(right, &c, 100_000).unwrap().records);
        crate::atlas::canonical_sort(&mut merged);
        assert_eq!(merged.len(), all.records.len());
        for (a, b) in merged.iter().zip(&all.records) {
            assert!((a.location - b.location).norm() < 1e-12);
        }
    }

    #[test]
    fn poles_of_h_multiplicity_fit() {
        for m in [1u32, 3] {
            let c = EllipticConfig::new(m).unwrap();
            let region = Rect { re_min: 0.0, re_max: PI, im_min: 0.0, im_max: PI };
            let ph = poles_of_h(region, &c, 1000).unwrap();
            assert_eq!(ph.records.len(), 4);
            let p = ph.records[0];
            let fitted = fit_laurent_exponent(
                |z| eval_h(z, &c).ok(),
                p.location,
                &[1e-4, 3e-4, 1e-3],
            );
            assert!(
                (fitted - m as f64).abs() < 0.01,
                "fitted exponent {fitted} for M = {m}"
            );
        }
    }

    #[test]
    fn region_cap_enforced() {
        let c = cfg();
        let big = Rect { re_min: -300.0, re_max: 300.0, im_min: -300.0, im_max: 300.0 };
        assert!(matches!(
            poles_of_h(big, &c, 1000),
            Err(Error::RegionTooLarge { .. })
        ));
    }

    #[test]
    fn h_kappa_contracts_disk() {
        let c2 = EllipticConfig::new(2).unwrap();
        let kappa = kappa_for_contract(&c2, 4.0);
        let c2 = c2.with_kappa(kappa).unwrap();
        let mut sup: f64 = 0.0;
        for i in 1..=30 {
            let r = 4.0 * i as f64 / 30.0;
            for j in 0..128 {
                let th = 2.0 * PI * j as f64 / 128.0;
                let z = Complex64::from_polar(r, th);
                sup = sup.max(eval_h(z, &c2).unwrap().norm());
            }
        }
        assert!(sup < 1.0, "sup |H_kappa| on |z|<=4 is {sup}");
        // and eval_h with kappa = 1 keeps the critical-value normalization
        let c1 = EllipticConfig::new(2).unwrap();
        let v = eval_h(Complex64::new(PI / 2.0, 0.0), &c1).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }
}
