//! Numerical conformal map from the lower half-plane onto a comb domain.
//!
//! The map is represented through its derivative
//!
//!     phi'(z) = R_c / z + sum_j R_j * 2 z / (z^2 - s_j^2),
//!
//! a sum of simple poles with positive integer residues at real "slot"
//! points +-s_j (the preimages of the left infinities between consecutive
//! teeth) plus an optional central slot at 0 (present when tooth 0 is
//! absent, residue = twice the first present tooth index). Any such sum has
//! Im phi' > 0 on the lower half-plane, so phi is automatically univalent
//! (Noshiro-Warschawski) and its boundary imaginary part is a step function
//! taking the values k pi: the image is a comb with teeth at the right
//! heights for every slot configuration. Solving places the slots so that
//! the tooth tips phi(tau_k), tau_k the zero of phi' in each boundary gap,
//! land at the prescribed tooth lengths.
//!
//! Slots are solved for teeth up to a working index K and continued beyond
//! by the asymptotic slot law of the comb (fitted offset g0), with the far
//! tail summed as an integral. Increasing K certifies accuracy on a fixed
//! reference grid.

use crate::comb::CombSpec;
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, linear_fit, solve_dense};
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// |z| range in the half-plane over which the map will be evaluated.
    pub eval_radius: f64,
    /// Target for the truncation-stability test on the reference grid.
    pub target_accuracy: f64,
    /// Hard cap on the number of solved teeth per side.
    pub max_solved: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { eval_radius: 1e4, target_accuracy: 1e-6, max_solved: 6000 }
    }
}

#[derive(Debug, Clone)]
struct SlotModel {
    /// c0; Re phi at the tooth-0 tip when tooth 0 is present, otherwise solved.
    anchor: f64,
    /// residue of the central slot at 0 (0 when tooth 0 is present).
    central: f64,
    /// positive-side slots, ascending; solved entries first, then law tail.
    slots: Vec<f64>,
    res: Vec<f64>,
    /// far-tail quadrature: (position, weight * residue-density)
    tail_nodes: Vec<(f64, f64)>,
}

/// Evaluatable conformal map handle with normalization metadata.
#[derive(Debug, Clone)]
pub struct ConformalMap {
    pub spec: CombSpec,
    model: SlotModel,
    half_model: SlotModel,
    /// tooth index; both models share the comb but differ in solved count.
    n_solved: usize,
    /// pre-scale factor applied in the half-plane: phi(z) = phi_raw(prescale * z).
    pub prescale: f64,
    /// own pre-scale of the half-resolution model (the comparison is between
    /// the normalized maps, which is the Caratheodory-kernel sense).
    half_prescale: f64,
    /// the Warschawski constant estimate removed by the pre-scale
    /// (the handle's additive normalization in strip coordinates).
    pub normalization_shift: f64,
    /// additive image-plane shift that cancels the first-order axis drift;
    /// used by the asymptotic diagnostics, not by g itself.
    pub image_shift: f64,
    /// certified sup-difference between the full and half-resolution models
    /// on the reference grid.
    pub accuracy: f64,
    /// |z| range over which slot coverage is guaranteed.
    pub covered_radius: f64,
}

struct CombTeeth {
    tooth0: Option<f64>,
    first_k: u32,
}

impl CombTeeth {
    fn from_spec(spec: &CombSpec) -> Self {
        let t0 = spec.tooth_length(0);
        let tooth0 = t0.is_finite().then_some(t0);
        let first_k = spec.first_present();
        CombTeeth { tooth0, first_k }
    }

    /// Tooth index of the i-th present positive tooth (i >= 1).
    fn index(&self, i: usize) -> u32 {
        self.first_k + (i as u32) - 1
    }
}

/// ln(1 - z/s) + ln(1 + z/s) for z in the closed lower half-plane. Both
/// factors stay off the negative reals for Im z < 0, so their principal logs
/// add without winding; far slots (|z/s| small) use the series of ln(1 - w),
/// w = (z/s)^2, avoiding the transcendental call entirely.
#[inline]
fn pair_log(z: Complex64, s: f64) -> Complex64 {
    let q = z / s;
    let w = q * q;
    if w.norm_sqr() < 4.0e-4 {
        // |w| < 0.02: ln(1-w) to machine precision with seven terms
        let mut acc = Complex64::new(-1.0 / 7.0, 0.0);
        for k in (1..=6).rev() {
            acc = acc * w - 1.0 / k as f64;
        }
        acc * w
    } else if z.im < 0.0 {
        ((1.0 - q) * (1.0 + q)).ln()
    } else {
        (1.0 - q).ln() + (1.0 + q).ln()
    }
}

impl SlotModel {
    fn phi(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(self.anchor, 0.0);
        if self.central != 0.0 {
            acc += self.central * (I * z).ln();
        }
        for (&s, &r) in self.slots.iter().zip(&self.res) {
            acc += r * pair_log(z, s);
        }
        for &(s, w) in &self.tail_nodes {
            acc += w * pair_log(z, s);
        }
        acc
    }

    fn phi_prime(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        if self.central != 0.0 {
            acc += self.central / z;
        }
        for (&s, &r) in self.slots.iter().zip(&self.res) {
            acc += r * 2.0 * z / (z * z - s * s);
        }
        for &(s, w) in &self.tail_nodes {
            acc += w * 2.0 * z / (z * z - s * s);
        }
        acc
    }

    /// Re phi on the real axis (principal values across the slots).
    fn re_phi_real(&self, x: f64) -> f64 {
        let mut acc = self.anchor;
        if self.central != 0.0 {
            acc += self.central * x.abs().ln();
        }
        for (&s, &r) in self.slots.iter().zip(&self.res) {
            acc += r * ((1.0 - x / s).abs().ln() + (1.0 + x / s).abs().ln());
        }
        for &(s, w) in &self.tail_nodes {
            acc += w * ((1.0 - x / s).abs().ln() + (1.0 + x / s).abs().ln());
        }
        acc
    }

    fn dphi_real(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        if self.central != 0.0 {
            acc += self.central / x;
        }
        for (&s, &r) in self.slots.iter().zip(&self.res) {
            acc += r * 2.0 * x / (x * x - s * s);
        }
        for &(s, w) in &self.tail_nodes {
            acc += w * 2.0 * x / (x * x - s * s);
        }
        acc
    }
}

/// Asymptotic slot law with a fitted offset and first-order correction:
/// the slot above the i-th present tooth sits near the law height
/// (k + 1/2 + g0 + g1/i), k the tooth index.
#[derive(Debug, Clone, Copy, Default)]
struct TailFit {
    g0: f64,
    g1: f64,
}

fn law_slot_at(spec: &CombSpec, teeth: &CombTeeth, j: f64, fit: &TailFit) -> f64 {
    let k = teeth.first_k as f64 + j - 1.0;
    spec.law_zeta_of_index(k + 0.5 + fit.g0 + fit.g1 / j)
}

fn law_slot(spec: &CombSpec, teeth: &CombTeeth, i: usize, fit: &TailFit) -> f64 {
    law_slot_at(spec, teeth, i as f64, fit)
}

fn extend_model(
    spec: &CombSpec,
    teeth: &CombTeeth,
    solved: &[f64],
    anchor: f64,
    fit: &TailFit,
    explicit_factor: usize,
) -> SlotModel {
    let n_solved = solved.len();
    let j_out = (explicit_factor * n_solved).max(n_solved + 256);
    let mut slots = solved.to_vec();
    let mut res = vec![0.0; n_solved];
    // residues of the solved slots: gaps between consecutive present teeth
    for i in 1..=n_solved {
        res[i - 1] = slot_residue(teeth, i);
    }
    for i in n_solved + 1..=j_out {
        slots.push(law_slot(spec, teeth, i, fit));
        res.push(1.0);
    }
    // far tail as a midpoint-consistent integral over the slot index
    let (gx, gw) = gauss_legendre(64);
    let j0 = j_out as f64 + 0.5;
    let mut tail_nodes = Vec::with_capacity(64);
    for (x, w) in gx.iter().zip(&gw) {
        // v in (0, 1], j = j0 / v, dj = j0 / v^2 dv
        let v = 0.5 * (x + 1.0);
        let wv = 0.5 * w;
        if v <= 1e-9 {
            continue;
        }
        let j = j0 / v;
        let s = law_slot_at(spec, teeth, j, fit);
        tail_nodes.push((s, wv * j0 / (v * v)));
    }
    let central = if teeth.tooth0.is_some() { 0.0 } else { 2.0 * teeth.first_k as f64 };
    SlotModel { anchor, central, slots, res, tail_nodes }
}

/// Residue of the i-th positive slot: the height gap it spans.
fn slot_residue(teeth: &CombTeeth, i: usize) -> f64 {
    if teeth.tooth0.is_some() && i == 1 {
        teeth.first_k as f64
    } else {
        1.0
    }
}

/// Zero of phi' in (lo, hi); phi' decreases from +inf to -inf across the gap.
fn tau_in_gap(model: &SlotModel, lo: f64, hi: f64, warm: Option<f64>) -> f64 {
    let mut a = lo + 1e-13 * (hi - lo);
    let mut b = hi - 1e-13 * (hi - lo);
    if let Some(t) = warm {
        if t > a && t < b {
            // try a couple of Newton steps from the warm start
            let mut x = t;
            let mut ok = true;
            for _ in 0..3 {
                let f = model.dphi_real(x);
                // numerical derivative of phi' is cheap enough here
                let h = 1e-7 * (hi - lo);
                let d = (model.dphi_real(x + h) - model.dphi_real(x - h)) / (2.0 * h);
                if d >= 0.0 {
                    ok = false;
                    break;
                }
                let nx = x - f / d;
                if !(nx > a && nx < b) {
                    ok = false;
                    break;
                }
                if (nx - x).abs() < 1e-13 * x.abs().max(1.0) {
                    return nx;
                }
                x = nx;
            }
            if ok && model.dphi_real(x).abs() < 1e-8 {
                return x;
            }
        }
    }
    for _ in 0..75 {
        let m = 0.5 * (a + b);
        if model.dphi_real(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-14 * b.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

struct SolveState {
    solved: Vec<f64>,
    anchor: f64,
    fit: TailFit,
    taus: Vec<f64>,
}

/// Newton solve of the tip conditions at fixed solved count.
fn newton_solve(
    spec: &CombSpec,
    teeth: &CombTeeth,
    state: &mut SolveState,
    tol: f64,
) -> Result<f64> {
    let k = state.solved.len();
    let has_center = teeth.tooth0.is_none();
    let ncond = if has_center { k + 1 } else { k };
    let tips: Vec<f64> = (1..=ncond)
        .map(|i| spec.tooth_length(teeth.index(i)))
        .collect();
    if tips.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidConfig("non-contiguous present teeth".into()));
    }
    let anchor_known = teeth.tooth0;
    let tip_scale = tips.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    let tol = tol * tip_scale;
    let mut last_res = f64::INFINITY;
    // the tail depends only on the fixed law fit; build it once per call
    let mut model = extend_model(spec, teeth, &state.solved, state.anchor, &state.fit, 4);
    for _iter in 0..60 {
        model.slots[..k].copy_from_slice(&state.solved);
        model.anchor = state.anchor;
        // gaps for the tip preimages
        let mut gaps: Vec<(f64, f64)> = Vec::with_capacity(ncond);
        if has_center {
            gaps.push((1e-300f64.max(model.slots[0] * 1e-12), model.slots[0]));
            for i in 0..k {
                gaps.push((model.slots[i], model.slots[i + 1]));
            }
        } else {
            for i in 0..k {
                gaps.push((model.slots[i], model.slots[i + 1]));
            }
        }
        if state.taus.len() != ncond {
            state.taus = vec![0.0; ncond];
            for (i, &(lo, hi)) in gaps.iter().enumerate() {
                state.taus[i] = tau_in_gap(&model, lo, hi, None);
            }
        } else {
            for (i, &(lo, hi)) in gaps.iter().enumerate() {
                state.taus[i] = tau_in_gap(&model, lo, hi, Some(state.taus[i]));
            }
        }
        let f: Vec<f64> = (0..ncond)
            .map(|i| model.re_phi_real(state.taus[i]) - tips[i])
            .collect();
        let resid = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if std::env::var("ESCAPEDIM_SOLVER_TRACE").is_ok() {
            eprintln!(
                "  newton iter {_iter}: K={k} resid {resid:.3e} g0 {:.6} g1 {:.4} anchor {:.6}",
                state.fit.g0, state.fit.g1, state.anchor
            );
        }
        if resid < tol {
            return Ok(resid);
        }
        // assemble the Jacobian in log-slot variables (+ anchor column if unknown)
        let nun = if anchor_known.is_none() { k + 1 } else { k };
        debug_assert_eq!(nun, ncond);
        let mut jac = vec![0.0; nun * nun];
        let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        for i in 0..ncond {
            let tau = state.taus[i];
            let mut col = 0;
            if anchor_known.is_none() {
                jac[i * nun] = 1.0;
                col = 1;
            }
            for m in 0..k {
                let s = model.slots[m];
                let r = model.res[m];
                jac[i * nun + col + m] = 2.0 * r * tau * tau / (s * s - tau * tau);
            }
        }
        if solve_dense(&mut jac, &mut rhs, nun).is_none() {
            return Err(Error::Numerical("singular Jacobian in slot solve".into()));
        }
        // damped update preserving slot ordering
        let mut step = 1.0;
        let base = state.solved.clone();
        let base_anchor = state.anchor;
        loop {
            let mut ok = true;
            let off = if anchor_known.is_none() {
                state.anchor = base_anchor + step * rhs[0].clamp(-3.0, 3.0);
                1
            } else {
                0
            };
            for m in 0..k {
                state.solved[m] = base[m] * (step * rhs[off + m].clamp(-0.5, 0.5)).exp();
            }
            for m in 1..k {
                if state.solved[m] <= state.solved[m - 1] {
                    ok = false;
                    break;
                }
            }
            if ok && state.solved[0] > 0.0 {
                break;
            }
            step *= 0.5;
            if step < 1e-4 {
                return Err(Error::Numerical("slot ordering collapse in Newton step".into()));
            }
        }
        if resid > 0.999 * last_res && resid < 1e-8 * tip_scale {
            return Ok(resid); // stagnation at round-off level
        }
        last_res = resid;
    }
    Err(Error::Numerical("slot Newton failed to converge".into()))
}

/// Height offset of the i-th solved slot against the bare law.
fn slot_offset(spec: &CombSpec, teeth: &CombTeeth, solved: &[f64], i: usize) -> f64 {
    let idx = teeth.index(i + 1) as f64;
    spec.law_index_of_zeta(solved[i]) - (idx + 0.5)
}

/// Windowed mean offset over [K/4, K/2] (inner transient and the
/// seam-contaminated outer quartile excluded): the g0 estimate.
fn fit_g0(spec: &CombSpec, teeth: &CombTeeth, solved: &[f64], fit: &TailFit) -> f64 {
    let k = solved.len();
    let lo = k / 4;
    let hi = (k / 2).max(lo + 1);
    let mut acc = 0.0;
    for i in lo..hi {
        acc += slot_offset(spec, teeth, solved, i) - fit.g1 / (i + 1) as f64;
    }
    acc / (hi - lo) as f64
}

/// Joint refinement once g0 has settled: least squares of the residual
/// offsets against 1/j over the inner half.
fn fit_tail(spec: &CombSpec, teeth: &CombTeeth, solved: &[f64]) -> TailFit {
    let k = solved.len();
    let lo = k / 8;
    let hi = (k / 2).max(lo + 2);
    let mut xs = Vec::with_capacity(hi - lo);
    let mut ys = Vec::with_capacity(hi - lo);
    for i in lo..hi.min(k) {
        xs.push(1.0 / (i + 1) as f64);
        ys.push(slot_offset(spec, teeth, solved, i));
    }
    let f = crate::numeric::linear_fit(&xs, &ys);
    TailFit { g0: f.intercept.clamp(-6.0, 6.0), g1: f.slope.clamp(-30.0, 30.0) }
}

fn solve_at(
    spec: &CombSpec,
    teeth: &CombTeeth,
    k_target: usize,
    warm: Option<&SolveState>,
) -> Result<SolveState> {
    let mut stages = vec![k_target];
    let mut k = k_target;
    let start = warm.map(|w| w.solved.len()).unwrap_or(48);
    while k / 2 >= start.max(48) {
        k /= 2;
        stages.push(k);
    }
    stages.reverse();
    let mut state = match warm {
        Some(w) => SolveState {
            solved: w.solved.clone(),
            anchor: w.anchor,
            fit: w.fit,
            taus: Vec::new(),
        },
        None => SolveState {
            solved: Vec::new(),
            anchor: teeth.tooth0.unwrap_or(0.0),
            fit: TailFit::default(),
            taus: Vec::new(),
        },
    };
    for &k_stage in &stages {
        // extend the solved set by the law
        while state.solved.len() < k_stage {
            let i = state.solved.len() + 1;
            let s = law_slot(spec, teeth, i, &state.fit);
            let s = if let Some(&last) = state.solved.last() {
                s.max(last * 1.0001)
            } else {
                s
            };
            state.solved.push(s);
        }
        state.taus.clear();
        newton_solve(spec, teeth, &mut state, 2e-9)?;
        // phase 1: settle the constant offset g0, accelerating by the
        // measured contraction ratio of the fixed-point iteration
        let mut prev_delta: Option<f64> = None;
        for _round in 0..24 {
            let g0 = fit_g0(spec, teeth, &state.solved, &state.fit);
            let raw = g0 - state.fit.g0;
            let mut d0 = raw;
            if raw.abs() < 1e-7 {
                state.fit.g0 = g0;
                break;
            }
            if let Some(pd) = prev_delta {
                let ratio: f64 = (raw / pd).clamp(0.0, 0.85);
                d0 /= 1.0 - ratio;
            }
            prev_delta = Some(raw);
            state.fit.g0 = (state.fit.g0 + d0).clamp(-6.0, 6.0);
            newton_solve(spec, teeth, &mut state, 2e-9)?;
        }
        // phase 2: pick up the 1/j correction with damped joint updates
        for _round in 0..6 {
            let fit = fit_tail(spec, teeth, &state.solved);
            let d0 = fit.g0 - state.fit.g0;
            let d1 = fit.g1 - state.fit.g1;
            if d0.abs() + d1.abs() / (k_stage as f64) < 1e-7 {
                state.fit = fit;
                break;
            }
            state.fit.g0 += 0.7 * d0;
            state.fit.g1 += 0.7 * d1;
            newton_solve(spec, teeth, &mut state, 2e-9)?;
        }
    }
    Ok(state)
}

/// Reference grid fixed by the accuracy contract: 200 points on the
/// semicircles |z| in {5, 50}, arguments excluding 0.05 of the real axis.
pub fn reference_grid() -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(200);
    for &r in &[5.0, 50.0] {
        for i in 0..100 {
            let th = -PI + 0.05 + (PI - 0.10) * (i as f64 + 0.5) / 100.0;
            pts.push(Complex64::from_polar(r, th));
        }
    }
    pts
}

/// Lower end of the axis-fit window: past the first slot for modified combs
/// (the power regime only sets in beyond the teeth).
fn axis_window_lo(spec: &CombSpec, r_hi: f64) -> f64 {
    let base = match spec.modified_exp {
        Some(_) => spec.law_zeta_of_index(1.5),
        None => 20.0,
    };
    (r_hi / 1e3).max(base).min(r_hi / 4.0)
}

/// Axis law of the comb: ln of the asymptotic value of phi(-ir).
fn ln_axis_law(spec: &CombSpec, r: f64) -> f64 {
    let a = spec.geometry_alpha();
    match spec.modified_exp {
        Some(me) => {
            let lr = r.ln();
            a * lr - me.q as f64 * (lr * lr + me.c * me.c).ln()
        }
        None => a * r.ln(),
    }
}

/// Inverse of the axis law: zeta-radius whose asymptotic image modulus is R.
fn axis_zeta_of_image(spec: &CombSpec, image: f64) -> f64 {
    let a = spec.geometry_alpha();
    let lt = image.max(1e-12).ln();
    match spec.modified_exp {
        Some(me) => {
            let mut u = (lt + me.q as f64 * ((lt / a).abs().powi(2) + me.c * me.c).ln()) / a;
            for _ in 0..60 {
                let f = a * u - me.q as f64 * (u * u + me.c * me.c).ln() - lt;
                let d = a - 2.0 * me.q as f64 * u / (u * u + me.c * me.c);
                if d.abs() < 1e-12 {
                    break;
                }
                let step = f / d;
                u -= step;
                if step.abs() < 1e-14 * u.abs().max(1.0) {
                    break;
                }
            }
            u.exp()
        }
        None => (lt / a).exp(),
    }
}

/// Pre-scale normalizing an axis function so that phi(-ir) follows the comb's
/// asymptotic law with unit leading constant: iterated fit of
/// (ln law - ln phi)/a against [1, 1/phi, 1/phi^2, 1/phi^3] over a log window.
fn fit_prescale<F: Fn(f64) -> f64>(
    axis: F,
    spec: &CombSpec,
    r_lo: f64,
    r_hi: f64,
) -> f64 {
    let ga = spec.geometry_alpha();
    let n = 32;
    let mut c = 1.0f64;
    for _pass in 0..3 {
        let mut ata = [0.0f64; 16];
        let mut atb = [0.0f64; 4];
        for i in 0..n {
            let r = r_lo * (r_hi / r_lo).powf(i as f64 / (n - 1) as f64);
            let v = axis(c * r);
            if v <= 0.0 {
                continue;
            }
            let y = (ln_axis_law(spec, r) - v.ln()) / ga;
            let u = 1.0 / v;
            let row = [1.0, u, u * u, u * u * u];
            for p in 0..4 {
                for q in 0..4 {
                    ata[p * 4 + q] += row[p] * row[q];
                }
                atb[p] += row[p] * y;
            }
        }
        if solve_dense(&mut ata, &mut atb, 4).is_none() {
            break;
        }
        let lambda = atb[0];
        c *= lambda.exp();
        if lambda.abs() < 1e-12 {
            break;
        }
    }
    c
}

impl ConformalMap {
    /// Construct the conformal map for `spec`.
    pub fn build(spec: &CombSpec, opts: &BuildOptions) -> Result<ConformalMap> {
        let teeth = CombTeeth::from_spec(spec);
        // needed tooth coverage: comb radius ~ 2x the image of eval_radius
        let needed_index = spec.law_index_of_zeta(opts.eval_radius * 2.0).ceil() as usize;
        let mut k_target = needed_index.max(96).min(opts.max_solved);
        let mut state = solve_at(spec, &teeth, k_target, None)?;
        let mut half = solve_at(spec, &teeth, k_target / 2, None)?;
        let grid = reference_grid();
        let mut accuracy;
        let mut cf;
        let mut ch;
        loop {
            let full_model = extend_model(spec, &teeth, &state.solved, state.anchor, &state.fit, 4);
            let half_model = extend_model(spec, &teeth, &half.solved, half.anchor, &half.fit, 4);
            // compare the normalized maps (Caratheodory-kernel sense): fit
            // each model's own pre-scale over a shared axis window
            let covered_half =
                spec.law_zeta_of_index(teeth.index(half.solved.len()) as f64) / 2.0;
            let r_hi = covered_half * 0.8;
            let r_lo = axis_window_lo(spec, r_hi);
            cf = fit_prescale(|r| full_model.re_phi_real_axis(r), spec, r_lo, r_hi);
            ch = fit_prescale(|r| half_model.re_phi_real_axis(r), spec, r_lo, r_hi);
            accuracy = grid
                .iter()
                .map(|&z| (full_model.phi(cf * z) - half_model.phi(ch * z)).norm())
                .fold(0.0f64, f64::max);
            if std::env::var("ESCAPEDIM_SOLVER_TRACE").is_ok() {
                eprintln!("  certify K={k_target}: accuracy {accuracy:.3e} cf {cf:.8} ch {ch:.8}");
            }
            if accuracy <= opts.target_accuracy || k_target >= opts.max_solved {
                break;
            }
            let next = (2 * k_target).min(opts.max_solved);
            half = state;
            state = solve_at(spec, &teeth, next, Some(&half))?;
            k_target = next;
        }
        if accuracy > opts.target_accuracy {
            return Err(Error::AccuracyNotMet { achieved: accuracy, target: opts.target_accuracy });
        }
        let model = extend_model(spec, &teeth, &state.solved, state.anchor, &state.fit, 4);
        let half_model = extend_model(spec, &teeth, &half.solved, half.anchor, &half.fit, 4);
        let covered = spec.law_zeta_of_index(teeth.index(state.solved.len()) as f64) / 2.0;
        let mut map = ConformalMap {
            spec: spec.clone(),
            model,
            half_model,
            n_solved: state.solved.len(),
            prescale: cf,
            half_prescale: ch,
            normalization_shift: cf.ln(),
            image_shift: 0.0,
            accuracy,
            covered_radius: covered.min(opts.eval_radius.max(100.0) * 2.0),
        };
        map.normalize();
        Ok(map)
    }

    /// Warschawski normalization: refine the pre-scale on the full covered
    /// window, then record the image-plane shift cancelling the first-order
    /// axis drift.
    fn normalize(&mut self) {
        let r_hi = self.covered_radius * 0.8;
        let r_lo = axis_window_lo(&self.spec, r_hi);
        let start = self.prescale;
        let refine =
            fit_prescale(|r| self.model.re_phi_real_axis(start * r), &self.spec, r_lo, r_hi);
        self.prescale = start * refine;
        // the refinement is a window effect common to both resolutions
        self.half_prescale *= refine;
        self.normalization_shift = self.prescale.ln();
        let n = 32;
        // second-order: phi(-ir) ~ law(r) + D + E/law(r); strip D for the
        // asymptotic probes
        let lo = (r_hi / 16.0).max(r_lo);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let r = lo * (r_hi / lo).powf(i as f64 / (n - 1) as f64);
            let v = self.phi_axis(r);
            let law = ln_axis_law(&self.spec, r).exp();
            xs.push(1.0 / law);
            ys.push(v - law);
        }
        self.image_shift = -linear_fit(&xs, &ys).intercept;
    }

    /// Re phi(-ir) on the symmetry axis (real by construction).
    pub fn phi_axis(&self, r: f64) -> f64 {
        self.model.re_phi_real_axis(self.prescale * r)
    }

    /// phi at a point of the open lower half-plane.
    pub fn phi(&self, z: Complex64) -> Result<Complex64> {
        if z.im >= 0.0 {
            return Err(Error::OutOfDomain { z });
        }
        Ok(self.model.phi(self.prescale * z))
    }

    /// phi and phi' without the domain check (boundary evaluation allowed).
    pub fn phi_unchecked(&self, z: Complex64) -> Complex64 {
        self.model.phi(self.prescale * z)
    }

    pub fn phi_prime(&self, z: Complex64) -> Result<Complex64> {
        if z.im >= 0.0 {
            return Err(Error::OutOfDomain { z });
        }
        Ok(self.prescale * self.model.phi_prime(self.prescale * z))
    }

    pub fn phi_prime_unchecked(&self, z: Complex64) -> Complex64 {
        self.prescale * self.model.phi_prime(self.prescale * z)
    }

    /// phi + image shift: the asymptotically normalized map, phi_n(-ir) ~ r^alpha.
    pub fn phi_normalized(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.phi(z)? + self.image_shift)
    }

    /// The entire function g = exp(phi) extended by Schwarz reflection.
    /// Near the real axis the two one-sided evaluations are averaged.
    pub fn g(&self, z: Complex64) -> Complex64 {
        let seam = 1e-9 * z.norm().max(1.0);
        if z.im < -seam {
            self.phi_unchecked(z).exp()
        } else if z.im > seam {
            self.phi_unchecked(z.conj()).exp().conj()
        } else {
            let a = self.phi_unchecked(z).exp();
            let b = self.phi_unchecked(z.conj()).exp().conj();
            0.5 * (a + b)
        }
    }

    /// g'(z) = phi'(z) g(z), extended by reflection.
    pub fn g_prime(&self, z: Complex64) -> Complex64 {
        let seam = 1e-9 * z.norm().max(1.0);
        if z.im < -seam {
            self.phi_prime_unchecked(z) * self.phi_unchecked(z).exp()
        } else if z.im > seam {
            (self.phi_prime_unchecked(z.conj()) * self.phi_unchecked(z.conj()).exp()).conj()
        } else {
            let a = self.phi_prime_unchecked(z) * self.phi_unchecked(z).exp();
            let b = (self.phi_prime_unchecked(z.conj()) * self.phi_unchecked(z.conj()).exp()).conj();
            0.5 * (a + b)
        }
    }

    /// log g on the closed lower half-plane: phi itself.
    pub fn log_g_lower(&self, z: Complex64) -> Complex64 {
        self.phi_unchecked(z)
    }

    /// Solve phi(z) = u by damped Newton from the asymptotic seed.
    pub fn invert_phi(&self, u: Complex64) -> Result<Complex64> {
        let a = self.spec.geometry_alpha();
        let us = u + self.image_shift;
        let r0 = axis_zeta_of_image(&self.spec, us.norm());
        let arg = -PI / 2.0 + us.arg() / a;
        let mut z = Complex64::from_polar(r0.max(1e-6), arg.clamp(-PI + 1e-6, -1e-6));
        let mut best = f64::INFINITY;
        for _ in 0..60 {
            let f = self.phi_unchecked(z) - u;
            let fp = self.prescale * self.model.phi_prime(self.prescale * z);
            if fp.norm() == 0.0 {
                break;
            }
            let mut step = f / fp;
            // keep iterates in the open lower half-plane
            let mut damp = 1.0;
            loop {
                let nz = z - damp * step;
                if nz.im < 0.0 {
                    step = damp * step;
                    break;
                }
                damp *= 0.5;
                if damp < 1e-6 {
                    step = Complex64::new(0.0, 0.5 * z.im.abs().max(1e-9));
                    break;
                }
            }
            z -= step;
            let resid = (self.phi_unchecked(z) - u).norm();
            if resid < 1e-10 * (1.0 + u.norm()) {
                return Ok(z);
            }
            if resid > 1e4 * best.max(1.0) {
                break;
            }
            best = best.min(resid);
        }
        let resid = (self.phi_unchecked(z) - u).norm();
        if resid < 1e-8 * (1.0 + u.norm()) {
            Ok(z)
        } else {
            Err(Error::RootPolishFailed { target: u })
        }
    }

    /// Inverse along the symmetry axis: r > 0 with phi(-ir) = target.
    pub fn invert_phi_axis(&self, target: f64) -> Result<f64> {
        let mut lo = 1e-9;
        let mut hi = self.covered_radius * 2.0;
        if self.phi_axis(hi) < target {
            return Err(Error::EvaluationRangeExceeded { r: target, max: self.phi_axis(hi) });
        }
        while self.phi_axis(lo) > target {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::Numerical("axis inversion underflow".into()));
            }
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if self.phi_axis(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo - 1.0 < 1e-14 {
                break;
            }
        }
        Ok((lo * hi).sqrt())
    }

    /// Half-resolution evaluation (own normalization) for the
    /// truncation-stability diagnostics.
    pub fn phi_half_resolution(&self, z: Complex64) -> Complex64 {
        self.half_model.phi(self.half_prescale * z)
    }

    pub fn n_solved(&self) -> usize {
        self.n_solved
    }
}

impl SlotModel {
    /// phi(-ir) restricted to the axis, where the pair logs are real:
    /// ln(1 + r^2/s^2) per pair and central contribution R_c ln r.
    fn re_phi_real_axis(&self, r: f64) -> f64 {
        let mut acc = self.anchor;
        if self.central != 0.0 {
            acc += self.central * r.ln();
        }
        for (&s, &res) in self.slots.iter().zip(&self.res) {
            acc += res * (r / s * (r / s)).ln_1p();
        }
        for &(s, w) in &self.tail_nodes {
            acc += w * (r / s * (r / s)).ln_1p();
        }
        acc
    }
}

impl ConformalMap {
    /// zeta-radius at which the asymptotic image modulus reaches `image`
    /// (seed scale for preimage searches).
    pub fn seed_radius_for_image(&self, image: f64) -> f64 {
        axis_zeta_of_image(&self.spec, image)
    }
}

// --- Warschawski diagnostics ------------------------------------------------

#[derive(Debug, Clone)]
pub struct WarschawskiReport {
    /// residual angular-derivative constant after normalization
    pub lambda: f64,
    /// max - min of h(w) - w over the probe range
    pub oscillation: f64,
    /// ratio of the width-deficit integral over the second half of the probe
    /// range to the first half (hypothesis check: must be decaying)
    pub tail_head_ratio: f64,
    /// envelope constant K with theta(x) - pi <= K exp(-alpha x) over the probe
    pub theta_envelope: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Estimate the Warschawski constant of h(w) = log(i phi^{-1}(E(w))) along the
/// real axis of the strip, where E is the comb's asymptotic scale map, and
/// report the oscillation of h(w) - w over the probe range.
pub fn warschawski_shift(
    map: &ConformalMap,
    probe: (f64, f64),
    n_samples: usize,
) -> Result<WarschawskiReport> {
    let spec = &map.spec;
    let a = spec.geometry_alpha();
    // hypothesis: integral of (theta - pi) must be settling over the probe range
    let (w_lo, w_hi) = probe;
    let mid = 0.5 * (w_lo + w_hi);
    let quad = |lo: f64, hi: f64| -> f64 {
        let n = 160;
        let mut s = 0.0;
        for i in 0..n {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            s += (spec.theta_profile(x) - PI).max(0.0);
        }
        s * (hi - lo) / n as f64
    };
    let head = quad(w_lo, mid);
    let tail = quad(mid, w_hi);
    let ratio = if head > 0.0 { tail / head } else { 0.0 };
    if ratio > 0.9 {
        return Err(Error::HypothesisFailed { ratio });
    }
    let mut theta_env: f64 = 0.0;
    for i in 0..80 {
        let x = w_lo + (w_hi - w_lo) * i as f64 / 79.0;
        theta_env = theta_env.max((spec.theta_profile(x) - PI) * (a * x).exp());
    }

    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let w = w_lo + (w_hi - w_lo) * i as f64 / (n_samples - 1) as f64;
        // image-plane target at strip coordinate w, shifted back to raw phi
        let img = ln_axis_law(spec, w.exp()).exp();
        let target = img - map.image_shift;
        let r = map.invert_phi_axis(target)?;
        samples.push((w, r.ln() - w));
    }
    let lambda = samples[samples.len() - 1].1;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(_, y) in &samples {
        lo = lo.min(y);
        hi = hi.max(y);
    }
    Ok(WarschawskiReport {
        lambda,
        oscillation: hi - lo,
        tail_head_ratio: ratio,
        theta_envelope: theta_env,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform_map() -> ConformalMap {
        let spec = CombSpec::uniform(4096);
        ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 100.0, target_accuracy: 1e-7, max_solved: 1024 },
        )
        .unwrap()
    }

    #[test]
    fn uniform_comb_matches_log_cos() {
        let map = uniform_map();
        // the normalized uniform comb map is log cos(z) (A = 1 gauge);
        // compare phi directly where the principal branch applies
        for &z in &[
            Complex64::new(0.0, -0.5),
            Complex64::new(1.0, -1.3),
            Complex64::new(2.5, -0.2),
        ] {
            let exact = z.cos().ln();
            let got = map.phi(z).unwrap();
            assert!(
                (got - exact).norm() < 5e-7,
                "z = {z}: got {got}, exact {exact}"
            );
        }
        // deeper points: compare through exp to dodge branch bookkeeping
        for &z in &[Complex64::new(-12.0, -7.0), Complex64::new(30.0, -4.0)] {
            let got = map.phi(z).unwrap().exp();
            let exact = z.cos();
            assert!(
                (got - exact).norm() < 1e-5 * exact.norm(),
                "z = {z}: got {got}, exact {exact}"
            );
        }
        assert!(map.prescale > 0.9 && map.prescale < 1.1);
    }

    #[test]
    fn uniform_comb_cosine_invariant() {
        let map = uniform_map();
        // fit a in (g')^2 + a^2 g^2 = a^2 and check the residual
        let z0 = Complex64::new(0.4, -0.6);
        let g = map.g(z0);
        let gp = map.g_prime(z0);
        let a2 = gp * gp / (Complex64::new(1.0, 0.0) - g * g);
        let a = a2.re.sqrt();
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            let z = Complex64::new(-2.0 + 4.0 * (i as f64) / 49.0, -1.5 + (i as f64 % 7.0) / 3.0);
            let g = map.g(z);
            let gp = map.g_prime(z);
            let res = (gp * gp + a2 * g * g - a2).norm();
            worst = worst.max(res);
        }
        assert!(worst <= 1e-3, "cosine invariant residual {worst}");
        assert_relative_eq!(a, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn axis_is_real_and_increasing() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 1e3, target_accuracy: 1e-5, max_solved: 1024 },
        )
        .unwrap();
        for &t in &[1.0, 5.0, 25.0] {
            let v = map.phi(Complex64::new(0.0, -t)).unwrap();
            assert!(v.im.abs() < 1e-10, "phi(-it) not real: {v}");
        }
        assert!(map.phi_axis(10.0) < map.phi_axis(20.0));
    }

    #[test]
    fn reflection_and_seam_consistency() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 100.0, target_accuracy: 1e-5, max_solved: 512 },
        )
        .unwrap();
        let z = Complex64::new(2.0, -3.0);
        let g1 = map.g(z.conj());
        let g2 = map.g(z).conj();
        assert!((g1 - g2).norm() < 1e-12 * g1.norm());
        // one-sided limits agree across the seam
        let x = 3.7;
        let above = map.g(Complex64::new(x, 1e-9));
        let below = map.g(Complex64::new(x, -1e-9));
        assert!((above - below).norm() < 1e-6 * above.norm().max(1.0));
    }

    #[test]
    fn critical_values_are_generating_sequence() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 100.0, target_accuracy: 1e-5, max_solved: 512 },
        )
        .unwrap();
        // tau_k are the positive critical points; g(tau_k) = (-1)^k x_{j(k)}
        let model = &map.model;
        let mut lo = 1e-9;
        for k in 1..=6usize {
            let hi = model.slots[k - 1];
            let tau = tau_in_gap(model, lo, hi, None);
            let g = map.g(Complex64::new(tau / map.prescale, 0.0));
            let expect = (if k % 2 == 0 { 1.0 } else { -1.0 }) * spec.tooth_length(k as u32).exp();
            assert!(
                (g.re - expect).abs() < 2e-4 * expect.abs(),
                "k={k} g={g} expect={expect}"
            );
            assert!(g.im.abs() < 1e-6 * expect.abs());
            lo = hi;
        }
    }

    #[test]
    fn sector_axis_asymptotics_with_shift() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 2e4, target_accuracy: 1e-5, max_solved: 2048 },
        )
        .unwrap();
        for &r in &[100.0, 1000.0, 1e4] {
            let v = map.phi_axis(r) + map.image_shift;
            let ratio = v / r.sqrt();
            assert!(
                (ratio - 1.0).abs() <= 0.1,
                "phi(-ir)/sqrt(r) = {ratio} at r = {r}"
            );
        }
    }

    #[test]
    fn winding_number_one_on_rectangles() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 100.0, target_accuracy: 1e-5, max_solved: 512 },
        )
        .unwrap();
        let corners = [
            Complex64::new(-3.0, -6.0),
            Complex64::new(4.0, -6.0),
            Complex64::new(4.0, -1.0),
            Complex64::new(-3.0, -1.0),
        ];
        let center = Complex64::new(0.5, -3.0);
        let w0 = map.phi(center).unwrap();
        let mut winding = 0.0;
        let mut prev: Option<f64> = None;
        let n = 600;
        for e in 0..4 {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            for i in 0..n {
                let z = a + (b - a) * (i as f64 / n as f64);
                let arg = (map.phi(z).unwrap() - w0).arg();
                if let Some(p) = prev {
                    let mut d = arg - p;
                    while d > PI {
                        d -= 2.0 * PI;
                    }
                    while d < -PI {
                        d += 2.0 * PI;
                    }
                    winding += d;
                }
                prev = Some(arg);
            }
        }
        let turns = winding / (2.0 * PI);
        assert!((turns - 1.0).abs() < 0.01, "winding {turns}");
    }

    #[test]
    fn image_contained_in_comb() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 200.0, target_accuracy: 1e-5, max_solved: 512 },
        )
        .unwrap();
        for i in 0..200 {
            let th = -PI + 0.05 + (PI - 0.1) * i as f64 / 199.0;
            let z = Complex64::from_polar(40.0, th);
            let w = map.phi(z).unwrap();
            assert!(map.spec.contains(w, 1e-9), "phi({z}) = {w} hit a tooth");
        }
    }

    #[test]
    fn cauchy_riemann_residual() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 100.0, target_accuracy: 1e-5, max_solved: 512 },
        )
        .unwrap();
        // residual bound: ten times the certified accuracy
        let bound = (10.0 * map.accuracy).max(1e-6);
        let h = 1e-4;
        for &z in &[Complex64::new(1.0, -2.0), Complex64::new(-4.0, -7.5)] {
            let dx = (map.phi(z + h).unwrap() - map.phi(z - h).unwrap()) / (2.0 * h);
            let dy = (map.phi(z + Complex64::new(0.0, h)).unwrap()
                - map.phi(z - Complex64::new(0.0, h)).unwrap())
                / Complex64::new(0.0, 2.0 * h);
            assert!((dx - dy).norm() < bound * dx.norm().max(1.0));
            let dp = map.phi_prime(z).unwrap();
            assert!((dx - dp).norm() < bound * dp.norm().max(1.0));
        }
    }

    #[test]
    fn truncation_stability_certified() {
        let spec = CombSpec::sector(0.75, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 1e3, target_accuracy: 1e-5, max_solved: 2048 },
        )
        .unwrap();
        assert!(map.accuracy <= 1e-5);
        let mut worst: f64 = 0.0;
        for z in reference_grid() {
            worst = worst.max((map.phi(z).unwrap() - map.phi_half_resolution(z)).norm());
        }
        assert!(worst <= 1e-5, "stability {worst}");
    }

    #[test]
    fn invert_phi_round_trip() {
        let spec = CombSpec::sector(0.5, 4096).unwrap();
        let map = ConformalMap::build(
            &spec,
            &BuildOptions { eval_radius: 1e4, target_accuracy: 1e-5, max_solved: 2048 },
        )
        .unwrap();
        for &u in &[
            Complex64::new(20.0, 3.0),
            Complex64::new(55.0, -14.0),
            Complex64::new(31.4, 12.56),
        ] {
            let z = map.invert_phi(u).unwrap();
            assert!(z.im < 0.0);
            let back = map.phi(z).unwrap();
            assert!((back - u).norm() < 1e-8 * (1.0 + u.norm()));
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        let map = uniform_map();
        assert!(matches!(
            map.phi(Complex64::new(0.3, 0.2)),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn warschawski_identity_like_for_uniform() {
        let map = uniform_map();
        let rep = warschawski_shift(&map, (2.0, 4.0), 41).unwrap();
        // exact drift of the cosine comb at w: ln(1 + (log 2) e^{-w}) - shift corrections
        assert!(rep.lambda.abs() < 1e-3, "lambda {}", rep.lambda);
        assert!(rep.oscillation < 5e-2, "oscillation {}", rep.oscillation);
    }
}
