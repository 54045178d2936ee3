//! Artifact serialization: JSON and CSV writers with fixed 17-significant-digit
//! float formatting (exact round trip), and atomic file writes.

use crate::atlas::{PoleAtlas, PoleRecord};
use crate::dimension::DimensionEstimate;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

/// 17 significant digits; round-trips any finite f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "null".into()
    } else if x > 0.0 {
        "1e999".into()
    } else {
        "-1e999".into()
    }
}

/// Write-temp-then-rename so partially written artifacts are never observed.
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn atlas_to_json(atlas: &PoleAtlas) -> String {
    let mut poles = String::new();
    for r in atlas.records() {
        if !poles.is_empty() {
            poles.push(',');
        }
        poles.push_str(&format!(
            "{{\"re\":{},\"im\":{},\"mult\":{},\"b_re\":{},\"b_im\":{}}}",
            fmt_f64(r.location.re),
            fmt_f64(r.location.im),
            r.multiplicity,
            fmt_f64(r.coefficient.re),
            fmt_f64(r.coefficient.im)
        ));
    }
    let sector = match atlas.sector {
        Some((lo, hi)) => format!("[{},{}]", fmt_f64(lo), fmt_f64(hi)),
        None => "null".into(),
    };
    format!(
        "{{\"M\":{},\"radius\":{},\"sector\":{},\"provenance\":\"{}\",\"poles\":[{}]}}",
        atlas.m,
        fmt_f64(atlas.radius),
        sector,
        atlas.provenance,
        poles
    )
}

pub fn atlas_from_json(s: &str) -> Result<PoleAtlas> {
    let v: serde_json::Value =
        serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let m = v["M"].as_u64().ok_or_else(|| Error::InvalidConfig("missing M".into()))? as u32;
    let radius = v["radius"]
        .as_f64()
        .ok_or_else(|| Error::InvalidConfig("missing radius".into()))?;
    let sector = v["sector"].as_array().map(|a| {
        (
            a[0].as_f64().unwrap_or(f64::NEG_INFINITY),
            a[1].as_f64().unwrap_or(f64::INFINITY),
        )
    });
    let provenance = v["provenance"].as_str().unwrap_or("").to_string();
    let mut records = Vec::new();
    for p in v["poles"].as_array().into_iter().flatten() {
        records.push(PoleRecord::new(
            Complex64::new(p["re"].as_f64().unwrap(), p["im"].as_f64().unwrap()),
            p["mult"].as_u64().unwrap() as u32,
            Complex64::new(p["b_re"].as_f64().unwrap(), p["b_im"].as_f64().unwrap()),
        ));
    }
    Ok(PoleAtlas::new(m, radius, sector, provenance, records))
}

/// CSV columns (abs_a, arg_a, abs_b, mult).
pub fn atlas_to_csv(atlas: &PoleAtlas) -> String {
    let mut out = String::from("abs_a,arg_a,abs_b,mult\n");
    for r in atlas.records() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(r.location.norm()),
            fmt_f64(r.location.arg()),
            fmt_f64(r.coefficient.norm()),
            r.multiplicity
        ));
    }
    out
}

pub fn estimate_to_json(e: &DimensionEstimate) -> String {
    let mut blocks = String::new();
    for (l, s) in &e.block_sums {
        if !blocks.is_empty() {
            blocks.push(',');
        }
        blocks.push_str(&format!("[{},{}]", l, fmt_f64(*s)));
    }
    let theo = match e.theoretical {
        Some(t) => fmt_f64(t),
        None => "null".into(),
    };
    let rho = match e.rho {
        Some(r) => fmt_f64(r),
        None => "null".into(),
    };
    format!(
        "{{\"t_star\":{},\"t_low\":{},\"t_high\":{},\"theoretical\":{},\"M\":{},\"rho\":{},\"blocks\":[{}],\"method\":\"{}\"}}",
        fmt_f64(e.t_star),
        fmt_f64(e.t_low),
        fmt_f64(e.t_high),
        theo,
        e.m,
        rho,
        blocks,
        e.method.name()
    )
}

/// One comparison row: t*, theoretical, |gap|.
pub fn estimate_csv_row(e: &DimensionEstimate) -> String {
    let theo = e.theoretical.unwrap_or(f64::NAN);
    format!(
        "{},{},{}\n",
        fmt_f64(e.t_star),
        fmt_f64(theo),
        fmt_f64((e.t_star - theo).abs())
    )
}

pub fn estimate_blocks_csv(e: &DimensionEstimate) -> String {
    let mut out = String::from("l,S_l\n");
    for (l, s) in &e.block_sums {
        out.push_str(&format!("{},{}\n", l, fmt_f64(*s)));
    }
    out
}
