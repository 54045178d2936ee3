//! Small numerical building blocks: deterministic summation, least squares,
//! a dense LU solve and Gauss-Legendre nodes.

use num_complex::Complex64;

/// Pairwise (tree) summation. Deterministic for a fixed slice, independent of
/// any thread count used to produce the slice, and accurate to O(eps log n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares y = intercept + slope * x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(xs.len() >= 2, "linear_fit needs at least two points");
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit { slope, intercept, r2 }
}

/// Solve A x = b in place by LU with partial pivoting. `a` is row-major n x n.
/// Returns None if the matrix is numerically singular.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            a[r * n + col] = 0.0;
            for c in col + 1..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col * n + c] * b[c];
        }
        b[col] = s / a[col * n + col];
    }
    Some(())
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Stable log(sin w) for arbitrary imaginary part, on some branch.
/// Uses the dominant exponential of sin w = (e^{iw} - e^{-iw}) / 2i.
pub fn log_sin(w: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if w.im <= 0.0 {
        // e^{iw} dominates: sin w = e^{iw} (1 - e^{-2iw}) / 2i
        let r = (-2.0 * i * w).exp();
        i * w - (2.0 * i).ln() + (1.0 - r).ln()
    } else {
        // e^{-iw} dominates: sin w = (i/2) e^{-iw} (1 - e^{2iw})
        let r = (2.0 * i * w).exp();
        -i * w + (i / 2.0).ln() + (1.0 - r).ln()
    }
}

/// Stable log(cos w): cos w = (e^{iw} + e^{-iw}) / 2.
pub fn log_cos(w: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if w.im <= 0.0 {
        let r = (-2.0 * i * w).exp();
        i * w - Complex64::new(2.0f64.ln(), 0.0) + (1.0 + r).ln()
    } else {
        let r = (2.0 * i * w).exp();
        -i * w - Complex64::new(2.0f64.ln(), 0.0) + (1.0 + r).ln()
    }
}

/// Reduce the imaginary part of a logarithm to the principal range (-pi, pi].
pub fn principal_log_branch(w: Complex64) -> Complex64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut im = w.im;
    if im.is_finite() {
        im -= two_pi * (im / two_pi).round();
        if im <= -std::f64::consts::PI {
            im += two_pi;
        }
        if im > std::f64::consts::PI {
            im -= two_pi;
        }
    }
    Complex64::new(w.re, im)
}
