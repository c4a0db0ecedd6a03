//! Result files. Numbers are written with the shortest representation that parses back
//! to the same `f64`, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use feec_core::derham::{FemField, FieldValue};
use feec_core::linalg::eigen::EigenResult;
use feec_core::solvers::TimeSeries;
use feec_core::verify::Check;

use crate::config::Format;
use crate::error::{CliError, Result};

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Formats a float for a table cell; non-finite values become `nan`, `inf` or `-inf`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

/// Values of `field` on an `n × n` logical grid of patch `k`, including the patch boundary.
pub fn sample_patch(field: &FemField, k: usize, n: usize) -> Result<Vec<([f64; 2], FieldValue)>> {
    let mapping = &field.spaces.topology.patches[k].mapping;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (s, t) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            out.push((mapping.map(s, t), field.eval_patch(k, s, t)?));
        }
    }
    Ok(out)
}

fn patch_csv(samples: &[([f64; 2], FieldValue)]) -> String {
    let mut s = String::new();
    match samples.first().map(|p| &p.1) {
        Some(FieldValue::Vector(_)) => s.push_str("x,y,v0,v1\n"),
        _ => s.push_str("x,y,v\n"),
    }
    for (x, v) in samples {
        let _ = match v {
            FieldValue::Scalar(a) => writeln!(s, "{},{},{}", num(x[0]), num(x[1]), num(*a)),
            FieldValue::Vector([a, b]) => writeln!(s, "{},{},{},{}", num(x[0]), num(x[1]), num(*a), num(*b)),
        };
    }
    s
}

/// Legacy VTK structured grid with the field as point data.
fn patch_vtk(samples: &[([f64; 2], FieldValue)], n: usize, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {n} {n} 1\nPOINTS {} double", n * n);
    for (x, _) in samples {
        let _ = writeln!(s, "{} {} 0", num(x[0]), num(x[1]));
    }
    let _ = writeln!(s, "POINT_DATA {}", n * n);
    match samples.first().map(|p| &p.1) {
        Some(FieldValue::Vector(_)) => s.push_str("VECTORS field double\n"),
        _ => s.push_str("SCALARS field double 1\nLOOKUP_TABLE default\n"),
    }
    for (_, v) in samples {
        let _ = match v {
            FieldValue::Scalar(a) => writeln!(s, "{}", num(*a)),
            FieldValue::Vector([a, b]) => writeln!(s, "{} {} 0", num(*a), num(*b)),
        };
    }
    s
}

/// Writes `{stem}_patch{k}.{csv,vtk}` for every patch and returns the paths.
pub fn write_field(dir: &Path, stem: &str, field: &FemField, n: usize, format: Format) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for k in 0..field.spaces.num_patches() {
        let samples = sample_patch(field, k, n)?;
        let (text, ext) = match format {
            Format::Csv => (patch_csv(&samples), "csv"),
            Format::Vtk => (patch_vtk(&samples, n, &format!("{stem} patch {k}")), "vtk"),
        };
        let path = dir.join(format!("{stem}_patch{k}.{ext}"));
        write_file(&path, &text)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn time_series_csv(ts: &TimeSeries) -> String {
    let mut s = String::from("time,energy,jump");
    for name in &ts.region_names {
        let _ = write!(s, ",amplitude_{name}");
    }
    s.push('\n');
    for (i, t) in ts.times.iter().enumerate() {
        let _ = write!(s, "{},{},{}", num(*t), num(ts.energy[i]), num(ts.jump[i]));
        for a in &ts.amplitudes[i] {
            let _ = write!(s, ",{}", num(*a));
        }
        s.push('\n');
    }
    s
}

pub fn eigen_csv(res: &EigenResult) -> String {
    let mut s = String::from("index,eigenvalue,residual\n");
    for (i, (l, r)) in res.eigenvalues.iter().zip(&res.residuals).enumerate() {
        let _ = writeln!(s, "{i},{},{}", num(*l), num(*r));
    }
    s
}

/// `key,value` rows.
pub fn report_csv(rows: &[(&str, String)]) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub degree: usize,
    pub order: usize,
    pub level: u32,
    pub h: f64,
    pub dof: usize,
    /// The error, or the failure message of the solve.
    pub error: std::result::Result<f64, String>,
    pub observed_order: Option<f64>,
}

/// Fills `observed_order` from consecutive rows of the same degree and order.
pub fn fill_observed_orders(rows: &mut [ConvergenceRow]) {
    for i in 1..rows.len() {
        let (prev, cur) = (&rows[i - 1], &rows[i]);
        if prev.degree != cur.degree || prev.order != cur.order {
            continue;
        }
        if let (Ok(e0), Ok(e1)) = (&prev.error, &cur.error) {
            let q = (e0 / e1).ln() / (prev.h / cur.h).ln();
            rows[i].observed_order = q.is_finite().then_some(q);
        }
    }
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("degree,order,level,h,dof,error,observed_order,status\n");
    for r in rows {
        let (err, status) = match &r.error {
            Ok(e) => (num(*e), "ok".to_string()),
            Err(m) => ("nan".to_string(), m.replace([',', '\n'], ";")),
        };
        let q = r.observed_order.map(num).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{},{err},{q},{status}", r.degree, r.order, r.level, num(r.h), r.dof);
    }
    s
}

pub fn checks_csv(rows: &[(usize, Check)]) -> String {
    let mut s = String::from("order,check,level,value,tolerance,status\n");
    for (r, c) in rows {
        let status = if c.passed() { "pass" } else { "FAIL" };
        let _ = writeln!(s, "{r},{},{},{},{},{status}", c.name, c.level, num(c.value), num(c.tolerance));
    }
    s
}
