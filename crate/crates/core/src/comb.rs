//! Comb domains: the plane minus horizontal half-line teeth at heights n*pi
//! with endpoints log|c_n|, built either from a sector (tooth endpoints track
//! the boundary of W_alpha = {|arg z| < alpha pi / 2}) or from the modified
//! exponential E*_alpha(z) = e^{alpha z} / (z^2 + c^2)^q.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Parameters of the modified exponential E*_alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModifiedExp {
    pub c: f64,
    pub q: u32,
}

#[derive(Clone)]
enum CombKind {
    /// All teeth of length 0 (the cosine comb). Effective order 1.
    Uniform,
    /// Teeth track the sector W_alpha via the canonical cosh tooth sequence.
    Sector,
    /// Sector comb from a caller-supplied strictly increasing sequence x_n.
    SectorCustom(Arc<dyn Fn(u32) -> f64 + Send + Sync>),
    /// Teeth |k| <= core forced to length 0, sector law beyond.
    UniformCore { core: u32 },
    /// Teeth track W*_alpha = E*_alpha(S).
    Modified(ModifiedExp),
    /// Sector comb with all tooth lengths scaled by `factor` (perturbation
    /// helper for negative controls).
    ScaledSector { factor: f64 },
}

impl std::fmt::Debug for CombKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CombKind::Uniform => write!(f, "Uniform"),
            CombKind::Sector => write!(f, "Sector"),
            CombKind::SectorCustom(_) => write!(f, "SectorCustom"),
            CombKind::UniformCore { core } => write!(f, "UniformCore({core})"),
            CombKind::Modified(m) => write!(f, "Modified({m:?})"),
            CombKind::ScaledSector { factor } => write!(f, "ScaledSector({factor})"),
        }
    }
}

/// Tooth data for a real-symmetric comb domain. Tooth k sits at height k*pi
/// and occupies {x + i k pi : x <= tooth_length(k)}; length -inf means the
/// tooth is absent.
#[derive(Debug, Clone)]
pub struct CombSpec {
    pub alpha: f64,
    pub truncation_n: u32,
    pub uniform_core_n: u32,
    pub modified_exp: Option<ModifiedExp>,
    kind: CombKind,
}

/// Canonical tooth sequence: x_0 = 0 and x_n = cosh(n pi / 2) for n >= 1.
pub fn cosh_tooth_x(n: u32) -> f64 {
    if n == 0 {
        0.0
    } else {
        (n as f64 * PI / 2.0).cosh()
    }
}

/// log x_n for the canonical sequence, stable for large n.
fn log_cosh_x(n: u32) -> f64 {
    if n == 0 {
        f64::NEG_INFINITY
    } else {
        let y = n as f64 * PI / 2.0;
        y - std::f64::consts::LN_2 + (-2.0 * y).exp().ln_1p()
    }
}

impl CombSpec {
    pub fn uniform(truncation_n: u32) -> Self {
        CombSpec {
            alpha: 1.0,
            truncation_n,
            uniform_core_n: truncation_n,
            modified_exp: None,
            kind: CombKind::Uniform,
        }
    }

    /// Comb whose tooth endpoints track the sector W_alpha: tooth length
    /// log x_{j(k)} with j(k) = max{ n : log x_n <= pi |k| cot(alpha pi / 2) },
    /// for the canonical cosh sequence.
    pub fn sector(alpha: f64, truncation_n: u32) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(CombSpec {
            alpha,
            truncation_n,
            uniform_core_n: 0,
            modified_exp: None,
            kind: CombKind::Sector,
        })
    }

    /// Sector comb for a custom strictly increasing tooth sequence.
    pub fn sector_with_provider<F>(alpha: f64, provider: F, truncation_n: u32) -> Result<Self>
    where
        F: Fn(u32) -> f64 + Send + Sync + 'static,
    {
        check_alpha(alpha)?;
        Ok(CombSpec {
            alpha,
            truncation_n,
            uniform_core_n: 0,
            modified_exp: None,
            kind: CombKind::SectorCustom(Arc::new(provider)),
        })
    }

    /// Teeth |k| <= core_n forced to length 0, sector law beyond.
    pub fn uniform_core(alpha: f64, core_n: u32, truncation_n: u32) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(CombSpec {
            alpha,
            truncation_n,
            uniform_core_n: core_n,
            modified_exp: None,
            kind: CombKind::UniformCore { core: core_n },
        })
    }

    /// Comb for the modified exponential: tooth k is the longest half-line at
    /// height k pi with endpoint log x_j disjoint from W*_alpha = E*_alpha(S).
    /// Fails when E*_alpha is not numerically injective on the strip.
    pub fn modified_exp(alpha: f64, c: f64, q: u32, truncation_n: u32) -> Result<Self> {
        check_alpha(alpha)?;
        if c <= 0.0 {
            return Err(Error::InvalidConfig("c must be positive".into()));
        }
        let me = ModifiedExp { c, q };
        if q > 0 {
            let spread = estar_derivative_arg_spread(alpha, &me);
            if spread >= 0.98 * PI {
                return Err(Error::InjectivityCheckFailed { spread });
            }
        }
        Ok(CombSpec {
            alpha,
            truncation_n,
            uniform_core_n: 0,
            modified_exp: Some(me),
            kind: CombKind::Modified(me),
        })
    }

    /// Copy with all tooth lengths multiplied by `factor` (negative control).
    pub fn scaled_lengths(&self, factor: f64) -> Result<Self> {
        match self.kind {
            CombKind::Sector => Ok(CombSpec {
                alpha: self.alpha,
                truncation_n: self.truncation_n,
                uniform_core_n: 0,
                modified_exp: None,
                kind: CombKind::ScaledSector { factor },
            }),
            _ => Err(Error::InvalidConfig(
                "length scaling is only defined for sector combs".into(),
            )),
        }
    }

    /// Tooth length at height k pi (k >= 0), -inf when the tooth is absent.
    pub fn tooth_length(&self, k: u32) -> f64 {
        match &self.kind {
            CombKind::Uniform => 0.0,
            CombKind::Sector => {
                if k == 0 {
                    f64::NEG_INFINITY
                } else {
                    let j = self.j_of_k(k);
                    log_cosh_x(j)
                }
            }
            CombKind::SectorCustom(provider) => {
                if k == 0 {
                    f64::NEG_INFINITY
                } else {
                    let thr = k as f64 * PI * cot_half(self.alpha);
                    let j = max_index_below(|n| provider(n).ln(), thr);
                    if j == 0 {
                        let x0 = provider(0);
                        if x0 > 0.0 {
                            x0.ln()
                        } else {
                            f64::NEG_INFINITY
                        }
                    } else {
                        provider(j).ln()
                    }
                }
            }
            CombKind::UniformCore { core } => {
                if k <= *core {
                    0.0
                } else {
                    let j = self.j_of_k(k);
                    log_cosh_x(j)
                }
            }
            CombKind::Modified(me) => {
                if k == 0 {
                    f64::NEG_INFINITY
                } else {
                    let cutoff = wstar_cutoff(self.alpha, me, k);
                    let j = max_index_below(log_cosh_x_f, cutoff);
                    log_cosh_x(j)
                }
            }
            CombKind::ScaledSector { factor } => {
                if k == 0 {
                    f64::NEG_INFINITY
                } else {
                    factor * log_cosh_x(self.j_of_k(k))
                }
            }
        }
    }

    /// Symmetric accessor.
    pub fn tooth_length_signed(&self, k: i64) -> f64 {
        self.tooth_length(k.unsigned_abs() as u32)
    }

    /// j(k) for the canonical sequence.
    pub fn j_of_k(&self, k: u32) -> u32 {
        let thr = k as f64 * PI * cot_half(self.alpha);
        max_index_below(log_cosh_x_f, thr)
    }

    /// Smallest positive k with a present tooth.
    pub fn first_present(&self) -> u32 {
        for k in 1..10_000 {
            if self.tooth_length(k).is_finite() {
                return k;
            }
        }
        panic!("comb has no present teeth");
    }

    pub fn tooth0_present(&self) -> bool {
        self.tooth_length(0).is_finite()
    }

    /// The exponent governing the comb's own asymptotic opening. Differs from
    /// `alpha` only for perturbed combs (scaled tooth lengths).
    pub fn geometry_alpha(&self) -> f64 {
        match self.kind {
            CombKind::Uniform => 1.0,
            CombKind::ScaledSector { factor } => {
                let cot = cot_half(self.alpha) * factor;
                2.0 / PI * (1.0 / cot).atan()
            }
            _ => self.alpha,
        }
    }

    /// Image radius of the asymptotic tooth-tip law at continuous height
    /// index kappa (in units of pi): the radius near which the tooth at
    /// height kappa*pi ends. Drives the tail slot law of the conformal map.
    pub fn law_radius(&self, kappa: f64) -> f64 {
        let beta = self.geometry_alpha() * PI / 2.0;
        kappa * PI / beta.sin()
    }

    /// Forward law: nominal continuous height index of the comb boundary at
    /// half-plane radius zeta. The boundary of the asymptotic image at
    /// parameter u = ln zeta is Gamma(u) = E(u + i pi/2), whose height counts
    /// the teeth passed; for plain combs this reduces to
    /// zeta^alpha sin(alpha pi/2) / pi.
    pub fn law_index_of_zeta(&self, zeta_abs: f64) -> f64 {
        let a = self.geometry_alpha();
        let beta = a * PI / 2.0;
        match &self.kind {
            CombKind::Modified(me) => {
                let u = zeta_abs.max(1e-12).ln();
                let turn = 2.0 * me.q as f64 / a + me.c;
                if u <= turn {
                    // below the monotone branch: fall back to the modulus law
                    let img = a * u - me.q as f64 * (u * u + me.c * me.c).ln();
                    return img.exp() * beta.sin() / PI;
                }
                estar(Complex64::new(u, PI / 2.0), a, me).im / PI
            }
            _ => zeta_abs.powf(a) * beta.sin() / PI,
        }
    }

    /// Inverse of `law_index_of_zeta`: the zeta-axis radius whose boundary
    /// height index is kappa.
    pub fn law_zeta_of_index(&self, kappa: f64) -> f64 {
        let a = self.geometry_alpha();
        let beta = a * PI / 2.0;
        match &self.kind {
            CombKind::Modified(me) => {
                let target = kappa * PI;
                let bdry = |u: f64| estar(Complex64::new(u, PI / 2.0), a, me).im;
                let mut lo = 2.0 * me.q as f64 / a + me.c;
                if bdry(lo) >= target {
                    // below the monotone branch: modulus-law fallback
                    let lt = (target / beta.sin()).ln();
                    let mut u = (lt + me.q as f64 * ((lt / a).powi(2) + me.c * me.c).ln()) / a;
                    for _ in 0..60 {
                        let f = a * u - me.q as f64 * (u * u + me.c * me.c).ln() - lt;
                        let d = a - 2.0 * me.q as f64 * u / (u * u + me.c * me.c);
                        let step = f / d;
                        u -= step;
                        if step.abs() < 1e-14 * u.abs().max(1.0) {
                            break;
                        }
                    }
                    return u.exp();
                }
                let mut hi = lo + 1.0;
                while bdry(hi) < target {
                    hi += (hi - lo).max(1.0);
                    if hi > 1e6 {
                        break;
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if bdry(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-13 * hi.abs().max(1.0) {
                        break;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
            _ => (kappa * PI / beta.sin()).powf(1.0 / a),
        }
    }

    /// Angular measure of {|z| = r} intersected with the comb domain
    /// (the arc through the positive real direction).
    pub fn psi(&self, r: f64) -> f64 {
        let kmax = (r / PI).floor() as u32;
        // tooth 0, when present, always blocks the circle at angle pi
        let mut half = PI;
        let mut blocked = self.tooth0_present();
        for k in 1..=kmax {
            let t = self.tooth_length(k);
            if !t.is_finite() {
                continue;
            }
            let h = k as f64 * PI;
            let x = (r * r - h * h).max(0.0).sqrt();
            if t >= x {
                // right crossing covered: arc stops at asin(h/r)
                half = half.min((h / r).asin());
                blocked = true;
            } else if t >= -x {
                // left crossing covered
                half = half.min(PI - (h / r).asin());
                blocked = true;
            }
        }
        if blocked {
            2.0 * half
        } else {
            2.0 * PI
        }
    }

    /// Width profile theta(x) = psi(e^{alpha x}) / alpha of the strip preimage.
    pub fn theta_profile(&self, x: f64) -> f64 {
        match &self.kind {
            CombKind::Modified(me) => {
                // local conformal factor of E*: |E*| / |E*'| along the axis
                let a = self.alpha;
                let e = estar(Complex64::new(x, 0.0), a, me);
                let de = estar_prime(Complex64::new(x, 0.0), a, me);
                let scale = e.norm() / de.norm();
                self.psi(e.norm()) * scale
            }
            _ => self.psi((self.geometry_alpha() * x).exp()) / self.geometry_alpha(),
        }
    }

    pub fn serializable(&self) -> bool {
        !matches!(self.kind, CombKind::SectorCustom(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            CombKind::Uniform => "uniform",
            CombKind::Sector | CombKind::SectorCustom(_) => "sector",
            CombKind::UniformCore { .. } => "uniform_core",
            CombKind::Modified(_) => "modified",
            CombKind::ScaledSector { .. } => "scaled_sector",
        }
    }

    /// True when the point w avoids every tooth by at least `margin`.
    pub fn contains(&self, w: Complex64, margin: f64) -> bool {
        let k = (w.im / PI).round();
        if (w.im - k * PI).abs() > margin {
            return true;
        }
        let t = self.tooth_length_signed(k as i64);
        !t.is_finite() || w.re > t + margin
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig("alpha must lie in (0, 1]".into()))
    }
}

fn cot_half(alpha: f64) -> f64 {
    1.0 / (alpha * PI / 2.0).tan()
}

fn log_cosh_x_f(n: u32) -> f64 {
    log_cosh_x(n)
}

/// Largest n with f(n) <= threshold, assuming f is increasing; 0 if none.
fn max_index_below<F: Fn(u32) -> f64>(f: F, threshold: f64) -> u32 {
    if !threshold.is_finite() || f(1) > threshold {
        return 0;
    }
    let mut hi = 2u32;
    while f(hi) <= threshold {
        hi = hi.saturating_mul(2);
        if hi > 1 << 28 {
            break;
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid) <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub(crate) fn estar(z: Complex64, alpha: f64, me: &ModifiedExp) -> Complex64 {
    (alpha * z).exp() / (z * z + me.c * me.c).powi(me.q as i32)
}

pub(crate) fn estar_prime(z: Complex64, alpha: f64, me: &ModifiedExp) -> Complex64 {
    estar(z, alpha, me) * (alpha - 2.0 * me.q as f64 * z / (z * z + me.c * me.c))
}

/// Spread of arg (E*)' over the strip |Im z| <= pi/2; injectivity needs < pi.
fn estar_derivative_arg_spread(alpha: f64, me: &ModifiedExp) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let xmax = 6.0 * me.c.max(4.0);
    let mut prev: Option<f64> = None;
    let mut offset = 0.0;
    for i in 0..=400 {
        let x = -xmax + 2.0 * xmax * i as f64 / 400.0;
        for j in 0..=8 {
            let y = -PI / 2.0 + PI * j as f64 / 8.0;
            let d = estar_prime(Complex64::new(x, y), alpha, me);
            let mut arg = d.arg() + offset;
            if let Some(p) = prev {
                // unwrap across the branch cut while scanning
                while arg - p > PI {
                    arg -= 2.0 * PI;
                    offset -= 2.0 * PI;
                }
                while arg - p < -PI {
                    arg += 2.0 * PI;
                    offset += 2.0 * PI;
                }
            }
            prev = Some(arg);
            lo = lo.min(arg);
            hi = hi.max(arg);
        }
    }
    hi - lo
}

/// Re-extent of W*_alpha at height k pi: the boundary point of E*_alpha(S)
/// whose imaginary part is k pi. A tooth at height k pi avoids W* exactly
/// when its endpoint stays left of this cutoff.
fn wstar_cutoff(alpha: f64, me: &ModifiedExp, k: u32) -> f64 {
    let target = k as f64 * PI;
    let bdry = |x: f64| estar(Complex64::new(x, PI / 2.0), alpha, me);
    // bracket Im = target on the upper boundary curve, beyond the turning point
    let mut xlo = 2.0 * me.q as f64 / alpha + me.c;
    while bdry(xlo).im > target {
        xlo -= 0.5;
        if xlo < -50.0 * me.c {
            return f64::NEG_INFINITY;
        }
    }
    let mut xhi = xlo.max(1.0);
    while bdry(xhi).im < target {
        xhi *= 1.5;
        if xhi > 1e9 {
            return f64::NEG_INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (xlo + xhi);
        if bdry(mid).im < target {
            xlo = mid;
        } else {
            xhi = mid;
        }
        if xhi - xlo < 1e-13 * xhi.abs().max(1.0) {
            break;
        }
    }
    bdry(0.5 * (xlo + xhi)).re
}

// --- serialization ---------------------------------------------------------

impl CombSpec {
    /// JSON document with the teeth materialized up to truncation_n.
    pub fn to_json(&self) -> Result<String> {
        if !self.serializable() {
            return Err(Error::InvalidConfig(
                "custom-provider combs cannot be serialized".into(),
            ));
        }
        let mut teeth = String::new();
        for k in -(self.truncation_n as i64)..=(self.truncation_n as i64) {
            if !teeth.is_empty() {
                teeth.push(',');
            }
            let t = self.tooth_length_signed(k);
            if t.is_finite() {
                teeth.push_str(&format!(
                    "{{\"n\":{},\"log_len\":{}}}",
                    k,
                    crate::io::fmt_f64(t)
                ));
            } else {
                teeth.push_str(&format!("{{\"n\":{},\"log_len\":null}}", k));
            }
        }
        let me = match &self.modified_exp {
            Some(m) => format!("{{\"c\":{},\"q\":{}}}", crate::io::fmt_f64(m.c), m.q),
            None => "null".into(),
        };
        Ok(format!(
            "{{\"alpha\":{},\"kind\":\"{}\",\"teeth\":[{}],\"uniform_core_N\":{},\"modified_exp\":{},\"truncation_N\":{}}}",
            crate::io::fmt_f64(self.alpha),
            self.kind_name(),
            teeth,
            self.uniform_core_n,
            me,
            self.truncation_n
        ))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let alpha = v["alpha"]
            .as_f64()
            .ok_or_else(|| Error::InvalidConfig("missing alpha".into()))?;
        let trunc = v["truncation_N"]
            .as_u64()
            .ok_or_else(|| Error::InvalidConfig("missing truncation_N".into()))? as u32;
        let kind = v["kind"].as_str().unwrap_or("sector");
        match kind {
            "uniform" => Ok(CombSpec::uniform(trunc)),
            "sector" => CombSpec::sector(alpha, trunc),
            "uniform_core" => {
                let core = v["uniform_core_N"].as_u64().unwrap_or(0) as u32;
                CombSpec::uniform_core(alpha, core, trunc)
            }
            "modified" => {
                let me = &v["modified_exp"];
                let c = me["c"]
                    .as_f64()
                    .ok_or_else(|| Error::InvalidConfig("missing modified_exp.c".into()))?;
                let q = me["q"].as_u64().unwrap_or(0) as u32;
                CombSpec::modified_exp(alpha, c, q, trunc)
            }
            other => Err(Error::InvalidConfig(format!("unknown comb kind {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn j_of_one_for_half() {
        // alpha = 1/2: log cosh(pi) = 2.450... <= pi while log cosh(3 pi/2) = 4.019... > pi
        let spec = CombSpec::sector(0.5, 64).unwrap();
        assert_eq!(spec.j_of_k(1), 2);
        assert_relative_eq!(spec.tooth_length(1), (PI).cosh().ln(), epsilon = 1e-12);
        assert!(!spec.tooth_length(0).is_finite());
    }

    #[test]
    fn tooth_endpoints_near_sector_boundary() {
        for &alpha in &[0.5, 0.75, 0.3] {
            let spec = CombSpec::sector(alpha, 64).unwrap();
            let beta = alpha * PI / 2.0;
            for k in 1..=50u32 {
                let t = spec.tooth_length(k);
                assert!(t.is_finite());
                let h = k as f64 * PI;
                // distance from (t, k pi) to the line arg z = beta
                let d = (h * beta.cos() - t * beta.sin()).abs();
                assert!(d <= PI / 2.0 + 1e-9, "alpha={alpha} k={k} d={d}");
                // and the tooth must stay outside the open sector
                assert!(t <= h * cot_half(alpha) + 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_lengths() {
        let spec = CombSpec::sector(0.5, 64).unwrap();
        for k in 1..=50i64 {
            assert_eq!(spec.tooth_length_signed(k), spec.tooth_length_signed(-k));
        }
    }

    #[test]
    fn modified_exp_q0_degenerates_to_sector() {
        let sector = CombSpec::sector(0.5, 64).unwrap();
        let modified = CombSpec::modified_exp(0.5, 10.0, 0, 64).unwrap();
        for k in 1..=40 {
            assert_eq!(sector.tooth_length(k), modified.tooth_length(k), "k={k}");
        }
    }

    #[test]
    fn modified_exp_teeth_longer_than_sector() {
        let sector = CombSpec::sector(0.5, 64).unwrap();
        let modified = CombSpec::modified_exp(0.5, 10.0, 2, 64).unwrap();
        let mut longer = 0;
        for k in 10..=60 {
            assert!(
                modified.tooth_length(k) >= sector.tooth_length(k) - 1e-9,
                "k={k}"
            );
            if modified.tooth_length(k) > sector.tooth_length(k) + 1e-9 {
                longer += 1;
            }
        }
        assert!(longer > 30, "modified teeth should eventually be longer");
    }

    #[test]
    fn modified_exp_injectivity_guard() {
        // tiny c with large q should fail the derivative half-plane test
        assert!(matches!(
            CombSpec::modified_exp(0.5, 0.05, 6, 16),
            Err(Error::InjectivityCheckFailed { .. })
        ));
    }

    #[test]
    fn psi_bounds_for_sector() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let apofa = 0.5 * PI;
        for i in 0..60 {
            let r = 20.0 * 1.2f64.powi(i);
            let psi = spec.psi(r);
            assert!(psi >= apofa - 1e-12, "psi(r) below alpha pi at r = {r}");
            assert!(
                psi <= apofa + 10.0 / r,
                "psi - alpha pi = {} at r = {r}",
                psi - apofa
            );
        }
    }

    #[test]
    fn theta_profile_uniform_floor() {
        let spec = CombSpec::uniform(64);
        // theta >= pi always; equality is attained at tooth-tip radii e^x = k pi
        let mut min_theta = f64::INFINITY;
        for i in 0..400 {
            let x = 1.5 + 3.0 * i as f64 / 400.0;
            let th = spec.theta_profile(x);
            assert!(th >= PI - 1e-9);
            min_theta = min_theta.min(th);
        }
        assert!(min_theta < PI + 0.2, "theta floor {min_theta}");
        let x_tip = (7.0 * PI).ln();
        assert!(spec.theta_profile(x_tip + 1e-9) - PI < 2e-3);
    }

    #[test]
    fn theta_profile_sector_tends_to_pi() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let th = spec.theta_profile(16.0);
        assert!(th >= PI - 1e-12 && th - PI < 2e-2, "theta(16) = {th}");
        let th = spec.theta_profile(24.0);
        assert!(th >= PI - 1e-12 && th - PI < 2e-4, "theta(24) = {th}");
    }

    #[test]
    fn scaled_sector_geometry_alpha() {
        let spec = CombSpec::sector(0.5, 64).unwrap().scaled_lengths(0.5).unwrap();
        // cot(beta') = cot(pi/4)/2 = 1/2  =>  alpha' = (2/pi) atan 2
        assert_relative_eq!(
            spec.geometry_alpha(),
            2.0 / PI * 2.0f64.atan(),
            epsilon = 1e-12
        );
        assert_relative_eq!(spec.tooth_length(3), 0.5 * CombSpec::sector(0.5, 64).unwrap().tooth_length(3));
    }

    #[test]
    fn json_round_trip() {
        let spec = CombSpec::modified_exp(0.5, 10.0, 2, 32).unwrap();
        let s = spec.to_json().unwrap();
        let back = CombSpec::from_json(&s).unwrap();
        assert_eq!(back.kind_name(), "modified");
        for k in 0..=32 {
            let (a, b) = (spec.tooth_length(k), back.tooth_length(k));
            if a.is_finite() {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            } else {
                assert!(!b.is_finite());
            }
        }
    }
}
