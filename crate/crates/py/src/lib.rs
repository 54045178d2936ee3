//! Python bindings: the elliptic core, comb conformal maps, pole atlases and
//! the dimension estimators, exposed with plain Python types (complex, lists,
//! dicts).

use escapedim::comb::CombSpec;
use escapedim::conformal::{warschawski_shift, BuildOptions, ConformalMap};
use escapedim::dimension::{critical_exponent, ExponentOptions, Method};
use escapedim::elliptic::{self, EllipticConfig, Rect};
use escapedim::speiser::{self, ComposeOptions};
use escapedim::PoleAtlas;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::sync::Arc;

fn err(e: escapedim::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Elliptic core on the square lattice with periods pi and i*pi.
#[pyclass]
struct Elliptic {
    cfg: EllipticConfig,
}

#[pymethods]
impl Elliptic {
    #[new]
    #[pyo3(signature = (m, kappa = 1.0))]
    fn new(m: u32, kappa: f64) -> PyResult<Self> {
        let cfg = EllipticConfig::new(m)
            .and_then(|c| c.with_kappa(kappa))
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Elliptic { cfg })
    }

    /// Weierstrass P.
    fn wp(&self, z: Complex64) -> PyResult<Complex64> {
        elliptic::wp(z, &self.cfg).map_err(err)
    }

    fn wp_prime(&self, z: Complex64) -> PyResult<Complex64> {
        elliptic::wp_prime(z, &self.cfg).map_err(err)
    }

    /// (e1, e2, e3).
    fn critical_values(&self) -> (Complex64, Complex64, Complex64) {
        let cv = elliptic::critical_values(&self.cfg);
        (cv.e1, cv.e2, cv.e3)
    }

    /// G = L(P^2) with critical values {0, 1, a}.
    fn g(&self, z: Complex64) -> PyResult<Complex64> {
        elliptic::eval_g(z, &self.cfg).map_err(err)
    }

    /// H_kappa = G(kappa z)^M.
    fn h(&self, z: Complex64) -> PyResult<Complex64> {
        elliptic::eval_h(z, &self.cfg).map_err(err)
    }

    /// F = H(arcsin z).
    fn f(&self, z: Complex64) -> PyResult<Complex64> {
        speiser::eval_f(z, &self.cfg).map_err(err)
    }

    /// Poles of H in the rectangle, as (location, multiplicity, coefficient).
    #[pyo3(signature = (re_min, re_max, im_min, im_max, cap = 100_000))]
    fn poles_of_h(
        &self,
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        cap: u64,
    ) -> PyResult<Vec<(Complex64, u32, Complex64)>> {
        let region = Rect { re_min, re_max, im_min, im_max };
        let ph = elliptic::poles_of_h(region, &self.cfg, cap).map_err(err)?;
        Ok(ph
            .records
            .iter()
            .map(|r| (r.location, r.multiplicity, r.coefficient))
            .collect())
    }
}

/// Comb domain data: teeth at heights k*pi with endpoints log x_{j(k)}.
#[pyclass]
#[derive(Clone)]
struct Comb {
    spec: CombSpec,
}

#[pymethods]
impl Comb {
    /// Sector comb for order alpha in (0, 1).
    #[staticmethod]
    #[pyo3(signature = (alpha, truncation_n = 16384))]
    fn sector(alpha: f64, truncation_n: u32) -> PyResult<Self> {
        Ok(Comb { spec: CombSpec::sector(alpha, truncation_n).map_err(err)? })
    }

    /// All teeth of length 0 (the cosine comb).
    #[staticmethod]
    #[pyo3(signature = (truncation_n = 4096))]
    fn uniform(truncation_n: u32) -> Self {
        Comb { spec: CombSpec::uniform(truncation_n) }
    }

    /// Comb of the modified exponential e^{alpha z} / (z^2 + c^2)^q.
    #[staticmethod]
    #[pyo3(signature = (alpha, c, q, truncation_n = 16384))]
    fn modified_exp(alpha: f64, c: f64, q: u32, truncation_n: u32) -> PyResult<Self> {
        Ok(Comb { spec: CombSpec::modified_exp(alpha, c, q, truncation_n).map_err(err)? })
    }

    fn tooth_length(&self, k: i64) -> Option<f64> {
        let t = self.spec.tooth_length_signed(k);
        t.is_finite().then_some(t)
    }

    fn theta_profile(&self, x: f64) -> f64 {
        self.spec.theta_profile(x)
    }

    fn to_json(&self) -> PyResult<String> {
        self.spec.to_json().map_err(err)
    }
}

/// Conformal map from the lower half-plane onto a comb domain, with the
/// entire function g = exp(phi) by reflection.
#[pyclass]
struct Map {
    map: Arc<ConformalMap>,
}

#[pymethods]
impl Map {
    #[new]
    #[pyo3(signature = (comb, eval_radius = 1e4, target_accuracy = 1e-5, max_solved = 3000))]
    fn new(comb: &Comb, eval_radius: f64, target_accuracy: f64, max_solved: usize) -> PyResult<Self> {
        let map = ConformalMap::build(
            &comb.spec,
            &BuildOptions { eval_radius, target_accuracy, max_solved },
        )
        .map_err(err)?;
        Ok(Map { map: Arc::new(map) })
    }

    fn phi(&self, z: Complex64) -> PyResult<Complex64> {
        self.map.phi(z).map_err(err)
    }

    fn g(&self, z: Complex64) -> Complex64 {
        self.map.g(z)
    }

    fn g_prime(&self, z: Complex64) -> Complex64 {
        self.map.g_prime(z)
    }

    #[getter]
    fn accuracy(&self) -> f64 {
        self.map.accuracy
    }

    #[getter]
    fn normalization_shift(&self) -> f64 {
        self.map.normalization_shift
    }

    #[getter]
    fn image_shift(&self) -> f64 {
        self.map.image_shift
    }

    /// Estimated angular-derivative constant and the oscillation of
    /// h(w) - w over the probe range.
    fn warschawski(&self, w_lo: f64, w_hi: f64) -> PyResult<(f64, f64)> {
        let rep = warschawski_shift(&self.map, (w_lo, w_hi), 61).map_err(err)?;
        Ok((rep.lambda, rep.oscillation))
    }
}

/// Pole atlas as a Python-visible collection.
#[pyclass]
struct Atlas {
    atlas: PoleAtlas,
}

#[pymethods]
impl Atlas {
    #[getter]
    fn m(&self) -> u32 {
        self.atlas.m
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.atlas.radius
    }

    fn __len__(&self) -> usize {
        self.atlas.len()
    }

    /// (location, multiplicity, coefficient) triples.
    fn records(&self) -> Vec<(Complex64, u32, Complex64)> {
        self.atlas
            .records()
            .iter()
            .map(|r| (r.location, r.multiplicity, r.coefficient))
            .collect()
    }

    fn to_json(&self) -> String {
        escapedim::io::atlas_to_json(&self.atlas)
    }

    /// Dimension estimate: dict with t_star, bracket, blocks and the
    /// theoretical bound when rho is given.
    #[pyo3(signature = (rho = None, method = "block_decay_fit", min_blocks = 8))]
    fn critical_exponent<'py>(
        &self,
        py: Python<'py>,
        rho: Option<f64>,
        method: &str,
        min_blocks: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let method = match method {
            "block_decay_fit" => Method::BlockDecayFit,
            "partial_sum_bisection" => Method::PartialSumBisection,
            other => return Err(PyValueError::new_err(format!("unknown method {other}"))),
        };
        let est = critical_exponent(
            &self.atlas,
            &ExponentOptions { method, rho, min_blocks, ..Default::default() },
        )
        .map_err(err)?;
        let d = PyDict::new_bound(py);
        d.set_item("t_star", est.t_star)?;
        d.set_item("t_low", est.t_low)?;
        d.set_item("t_high", est.t_high)?;
        d.set_item("theoretical", est.theoretical)?;
        d.set_item("M", est.m)?;
        d.set_item("rho", est.rho)?;
        d.set_item("method", est.method.name())?;
        d.set_item("blocks", est.block_sums.clone())?;
        Ok(d)
    }

    /// Poles and coefficients of f0(z^N).
    fn power_trick(&self, n: u32) -> PyResult<Atlas> {
        Ok(Atlas { atlas: speiser::power_trick(&self.atlas, n).map_err(err)? })
    }

    /// Poles and coefficients of f(lambda z).
    fn scaled(&self, lambda: f64) -> PyResult<Atlas> {
        Ok(Atlas { atlas: speiser::scaled_family(&self.atlas, lambda).map_err(err)? })
    }
}

/// Pole atlas of F = H(arcsin z) within the radius.
#[pyfunction]
fn poles_of_f(elliptic: &Elliptic, radius: f64) -> PyResult<Atlas> {
    let (atlas, _) = speiser::poles_of_f(radius, &elliptic.cfg).map_err(err)?;
    Ok(Atlas { atlas })
}

/// Pole atlas of f = F(g(z)) in the sector window, seeded from the
/// logarithmic lattice and Newton-polished.
#[pyfunction]
#[pyo3(signature = (map, elliptic, radius, full_disk = false))]
fn compose_poles(map: &Map, elliptic: &Elliptic, radius: f64, full_disk: bool) -> PyResult<Atlas> {
    let opts = ComposeOptions {
        sector: if full_disk { None } else { Some(speiser::SECTOR_DELTA) },
        strict: !full_disk,
    };
    let atlas = speiser::compose_f_poles(&map.map, &elliptic.cfg, radius, &opts).map_err(err)?;
    Ok(Atlas { atlas })
}

/// Pole atlas of f = H(e^z) within the radius.
#[pyfunction]
#[pyo3(signature = (elliptic, radius, cap = 2_000_000))]
fn exp_poles(elliptic: &Elliptic, radius: f64, cap: u64) -> PyResult<Atlas> {
    let (atlas, _) = speiser::exp_poles(radius, &elliptic.cfg, cap).map_err(err)?;
    Ok(Atlas { atlas })
}

/// Synthetic atlas from explicit (location, multiplicity, coefficient) triples.
#[pyfunction]
fn atlas_from_records(
    m: u32,
    radius: f64,
    records: Vec<(Complex64, u32, Complex64)>,
) -> PyResult<Atlas> {
    let recs = records
        .into_iter()
        .map(|(a, mult, b)| escapedim::PoleRecord::new(a, mult, b))
        .collect();
    let atlas = PoleAtlas::new(m, radius, None, "python", recs);
    atlas.check_invariants().map_err(err)?;
    Ok(Atlas { atlas })
}

/// The sharp bound 2 M rho / (2 + M rho).
#[pyfunction]
fn theoretical_bound(m: u32, rho: f64) -> f64 {
    escapedim::dimension::theoretical_bound(m, rho)
}

/// Critical points x_k = cosh(k pi / 2) of the arcsin composition.
#[pyfunction]
fn critical_point_x(k: i64) -> f64 {
    speiser::critical_point_x(k)
}

#[pymodule]
fn escapedim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Elliptic>()?;
    m.add_class::<Comb>()?;
    m.add_class::<Map>()?;
    m.add_class::<Atlas>()?;
    m.add_function(wrap_pyfunction!(poles_of_f, m)?)?;
    m.add_function(wrap_pyfunction!(compose_poles, m)?)?;
    m.add_function(wrap_pyfunction!(exp_poles, m)?)?;
    m.add_function(wrap_pyfunction!(atlas_from_records, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(critical_point_x, m)?)?;
    Ok(())
}
