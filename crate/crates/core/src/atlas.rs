//! Pole records and region-tagged pole atlases.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// A pole together with its multiplicity and leading Laurent coefficient b,
/// in the normal form f(z) ~ (b / (z - a))^m as z -> a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleRecord {
    pub location: Complex64,
    pub multiplicity: u32,
    pub coefficient: Complex64,
}

impl PoleRecord {
    pub fn new(location: Complex64, multiplicity: u32, coefficient: Complex64) -> Self {
        debug_assert!(multiplicity >= 1);
        debug_assert!(coefficient.norm() > 0.0);
        PoleRecord { location, multiplicity, coefficient }
    }

    /// The term (|b| / |a|^{1+1/M})^t of the dimension series.
    pub fn series_term(&self, t: f64, m: u32) -> f64 {
        crate::dimension::series_term(self, t, m)
    }
}

/// A collection of poles, complete within `radius` (all poles with |a| <= radius
/// and, when `sector` is set, with arg a in the sector, are present).
#[derive(Debug, Clone)]
pub struct PoleAtlas {
    pub m: u32,
    pub radius: f64,
    /// Optional angular window (lo, hi) restricting the completeness claim.
    pub sector: Option<(f64, f64)>,
    pub provenance: String,
    records: Vec<PoleRecord>,
}

impl PoleAtlas {
    pub fn new(
        m: u32,
        radius: f64,
        sector: Option<(f64, f64)>,
        provenance: impl Into<String>,
        mut records: Vec<PoleRecord>,
    ) -> Self {
        canonical_sort(&mut records);
        dedupe(&mut records);
        PoleAtlas { m, radius, sector, provenance: provenance.into(), records }
    }

    pub fn records(&self) -> &[PoleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of poles with |a| <= r.
    pub fn count_within(&self, r: f64) -> u64 {
        // records are sorted by modulus
        self.records.partition_point(|p| p.location.norm() <= r) as u64
    }

    pub fn min_modulus(&self) -> Option<f64> {
        self.records.first().map(|p| p.location.norm())
    }

    pub fn max_modulus(&self) -> Option<f64> {
        self.records.last().map(|p| p.location.norm())
    }

    /// Check the structural invariants: canonical order, no duplicates,
    /// uniform multiplicity, nonzero coefficients.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.records.windows(2) {
            let (p, q) = (&w[0], &w[1]);
            let (rp, rq) = (p.location.norm(), q.location.norm());
            if rp > rq + 1e-12 * rq.max(1.0) {
                return Err(Error::Numerical("atlas not sorted by modulus".into()));
            }
            if (q.location - p.location).norm() <= 1e-8 * rp.max(1.0) {
                return Err(Error::Numerical("duplicate pole locations".into()));
            }
        }
        for p in &self.records {
            if p.multiplicity != self.m {
                return Err(Error::Numerical("non-uniform multiplicity".into()));
            }
            if p.coefficient.norm() == 0.0 {
                return Err(Error::Numerical("zero Laurent coefficient".into()));
            }
        }
        Ok(())
    }
}

/// Sort by |location| ascending, ties broken by argument.
pub fn canonical_sort(records: &mut [PoleRecord]) {
    records.sort_by(|p, q| {
        let (rp, rq) = (p.location.norm(), q.location.norm());
        rp.partial_cmp(&rq)
            .unwrap()
            .then(p.location.arg().partial_cmp(&q.location.arg()).unwrap())
    });
}

fn dedupe(records: &mut Vec<PoleRecord>) {
    let mut out: Vec<PoleRecord> = Vec::with_capacity(records.len());
    'outer: for r in records.drain(..) {
        let rr = r.location.norm();
        // sorted by modulus; only nearby moduli can collide
        for prev in out.iter().rev() {
            let rp = prev.location.norm();
            if rr - rp > 1e-7 * rr.max(1.0) {
                break;
            }
            if (r.location - prev.location).norm() < 1e-8 * rr.max(1.0) {
                continue 'outer;
            }
        }
        out.push(r);
    }
    *records = out;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(re: f64, im: f64) -> PoleRecord {
        PoleRecord::new(Complex64::new(re, im), 1, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn sorted_and_deduped() {
        let atlas = PoleAtlas::new(
            1,
            10.0,
            None,
            "test",
            vec![rec(3.0, 0.0), rec(1.0, 1.0), rec(1.0, 1.0), rec(-2.0, 0.1)],
        );
        assert_eq!(atlas.len(), 3);
        atlas.check_invariants().unwrap();
        assert!(atlas.records()[0].location.norm() <= atlas.records()[1].location.norm());
        assert_eq!(atlas.count_within(1.5), 1);
        assert_eq!(atlas.count_within(2.5), 2);
    }
}
