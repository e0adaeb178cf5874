//! CSV, JSON and SVG output. Floats are written with 17 significant digits
//! so that every value round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levelset::CheckReport;
use crate::operator::ScalarField;
use crate::positivity::{DomainSummary, GammaScanResult};

/// `x` in `d.dddddddddddddddde±x` form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

#[derive(Serialize)]
struct FieldHeader<'a> {
    name: &'a str,
    domain: DomainSummary,
    columns: Vec<&'static str>,
    min: f64,
    max: f64,
    integral: f64,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    meta: serde_json::Value,
}

/// Writes `u` as one row per cell (lattice index, coordinates, value) and a
/// JSON header next to it with the same stem.
pub fn write_field(dir: &Path, name: &str, u: &ScalarField, meta: serde_json::Value) -> Result<(String, String)> {
    let mask = u.mask();
    let dim = mask.dim();
    let axes = ["x", "y", "z"];
    let idx = ["i", "j", "k"];
    let mut columns: Vec<&'static str> = idx[..dim].to_vec();
    columns.extend_from_slice(&axes[..dim]);
    columns.push("value");

    let csv_name = format!("{name}.csv");
    let mut w = csv::Writer::from_path(dir.join(&csv_name))?;
    w.write_record(&columns)?;
    for c in 0..u.len() {
        let g = mask.cell_node(c);
        let li = mask.lattice_index(g);
        let x = mask.cell_point(c);
        let mut rec: Vec<String> = li[..dim].iter().map(|v| v.to_string()).collect();
        rec.extend(x[..dim].iter().map(|&v| fmt_f64(v)));
        rec.push(fmt_f64(u.value(c)));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let json_name = format!("{name}.json");
    write_json(
        &dir.join(&json_name),
        &FieldHeader {
            name,
            domain: DomainSummary::from(mask),
            columns,
            min: u.min(),
            max: u.max(),
            integral: u.integral(),
            meta,
        },
    )?;
    Ok((csv_name, json_name))
}

/// Reads the `value` column of a field CSV.
pub fn read_field_values(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let col = r
        .headers()?
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| Error::Precondition(format!("{} has no value column", path.display())))?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            rec[col]
                .parse::<f64>()
                .map_err(|e| Error::Precondition(format!("bad number {:?}: {e}", &rec[col])))
        })
        .collect()
}

pub const CHECK_COLUMNS: [&str; 14] = [
    "kind",
    "center_x",
    "center_y",
    "center_z",
    "r",
    "rho",
    "k",
    "l",
    "p_norm",
    "h",
    "lhs",
    "rhs_unit",
    "implied_constant",
    "passes",
];

/// One row per report; `c` decides the `passes` column.
pub fn write_checks_csv(path: &Path, reports: &[CheckReport], c: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CHECK_COLUMNS)?;
    for r in reports {
        let x = &r.context;
        w.write_record([
            r.kind.as_str().to_string(),
            fmt_f64(x.center[0]),
            fmt_f64(x.center[1]),
            fmt_f64(x.center[2]),
            fmt_f64(x.r),
            opt(x.rho),
            opt(x.k),
            opt(x.l),
            opt(x.p_norm),
            fmt_f64(x.h),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs_unit),
            fmt_f64(r.implied_constant),
            r.passes(c).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scan_csv(path: &Path, scan: &GammaScanResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["gamma", "min_u", "max_u", "energy", "iterations", "residual", "converged"])?;
    for p in &scan.points {
        w.write_record([
            fmt_f64(p.gamma),
            fmt_f64(p.min_u),
            fmt_f64(p.max_u),
            fmt_f64(p.energy),
            p.iterations.to_string(),
            fmt_f64(p.residual),
            p.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Linear blue-white-red map of `t ∈ [0, 1]`.
fn color(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
    if t < 0.5 {
        let s = 2.0 * t;
        (lerp(49.0, 247.0, s), lerp(54.0, 247.0, s), lerp(149.0, 247.0, s))
    } else {
        let s = 2.0 * t - 1.0;
        (lerp(247.0, 165.0, s), lerp(247.0, 0.0, s), lerp(247.0, 38.0, s))
    }
}

/// A heatmap of a planar field, one square per cell, with min and max noted
/// under the plot. Three-dimensional fields show the slice nearest `z = 0`.
pub fn svg_heatmap(u: &ScalarField, title: &str) -> String {
    let mask = u.mask();
    let px = 6.0;
    let ext = mask.extents();
    let origin = mask.origin();
    let (lo, hi) = (u.min(), u.max());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let z_slice = if mask.dim() == 3 { Some(-origin[2]) } else { None };
    let w = ext[0] as f64 * px;
    let h = ext[1] as f64 * px;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{}" viewBox="0 0 {w} {}">"#,
        h + 40.0,
        h + 40.0
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r##"<rect width="{w}" height="{h}" fill="#dddddd"/>"##);
    for c in 0..u.len() {
        let li = mask.lattice_index(mask.cell_node(c));
        if let Some(z) = z_slice {
            if li[2] != z {
                continue;
            }
        }
        let i = (li[0] - origin[0]) as f64;
        let j = (li[1] - origin[1]) as f64;
        let (r, g, b) = color((u.value(c) - lo) / span);
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{px}" height="{px}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
            i * px,
            h - (j + 1.0) * px
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="4" y="{}" font-family="monospace" font-size="12">min {} max {}</text>"#,
        h + 16.0,
        fmt_f64(lo),
        fmt_f64(hi)
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
