//! File formats: paths as JSON, measures as CSV.
//!
//! Path JSON is `{"kind": "step" | "pl", "horizon": T, "knots": [...],
//! "values": [...]}` with every number written to 17 significant digits; an
//! infinite horizon is `null`. Tapered paths nest their base:
//! `{"kind": "tapered", "m": m, "base": {...}}`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::paths::{Path, PlPath, StepPath, TaperedPath};
use crate::processes::csv_error;
use crate::prokhorov::DiscreteMeasure;

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

fn list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| num(x)).collect();
    format!("[{}]", parts.join(","))
}

pub fn path_to_json(path: &Path) -> String {
    let mut s = String::new();
    match path {
        Path::Step(p) => write!(
            s,
            r#"{{"kind":"step","horizon":{},"knots":{},"values":{}}}"#,
            num(p.horizon()),
            list(p.knots()),
            list(p.values())
        ),
        Path::Linear(p) => write!(
            s,
            r#"{{"kind":"pl","horizon":{},"knots":{},"values":{}}}"#,
            num(p.horizon()),
            list(p.knots()),
            list(p.values())
        ),
        Path::Tapered(p) => write!(s, r#"{{"kind":"tapered","m":{},"base":{}}}"#, p.m(), path_to_json(p.base())),
    }
    .expect("writing to a String");
    s
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn floats(v: &Value, field: &str) -> Result<Vec<f64>> {
    v.get(field)
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err(format!("missing array {field:?}")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| parse_err(format!("non-numeric entry in {field:?}"))))
        .collect()
}

pub fn path_from_value(v: &Value) -> Result<Path> {
    let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| parse_err("missing \"kind\""))?;
    match kind {
        "step" => {
            let horizon = match v.get("horizon") {
                None | Some(Value::Null) => f64::INFINITY,
                Some(h) => h.as_f64().ok_or_else(|| parse_err("non-numeric horizon"))?,
            };
            Ok(StepPath::new(floats(v, "knots")?, floats(v, "values")?, horizon)?.into())
        }
        "pl" => {
            let p = PlPath::new(floats(v, "knots")?, floats(v, "values")?)?;
            if let Some(h) = v.get("horizon").and_then(Value::as_f64) {
                if h != p.horizon() {
                    return Err(parse_err(format!("horizon {h} differs from the last knot {}", p.horizon())));
                }
            }
            Ok(p.into())
        }
        "tapered" => {
            let m = v.get("m").and_then(Value::as_u64).ok_or_else(|| parse_err("missing integer \"m\""))?;
            let base = path_from_value(v.get("base").ok_or_else(|| parse_err("missing \"base\""))?)?;
            let m = u32::try_from(m).map_err(|_| parse_err("taper index too large"))?;
            Ok(Path::Tapered(TaperedPath::new(base.restrict(m as f64)?, m)))
        }
        other => Err(parse_err(format!("unknown path kind {other:?}"))),
    }
}

pub fn path_from_json(text: &str) -> Result<Path> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    path_from_value(&v)
}

pub fn read_path(file: &FsPath) -> Result<Path> {
    let text = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    path_from_json(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", file.display())),
        other => other,
    })
}

pub fn write_path(file: &FsPath, path: &Path) -> Result<()> {
    fs::write(file, path_to_json(path) + "\n").map_err(|e| Error::io(file, e))
}

/// Measure CSV: header `w,x1,…,xk`, one atom per row.
pub fn read_measure(file: &FsPath) -> Result<DiscreteMeasure> {
    let mut r = csv::Reader::from_path(file).map_err(|e| csv_error(file, e))?;
    let header = r.headers().map_err(|e| csv_error(file, e))?.clone();
    if header.get(0).map(str::trim) != Some("w") || header.len() < 2 {
        return Err(parse_err(format!("{}: expected header w,x1,...,xk", file.display())));
    }
    let dim = header.len() - 1;
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(file, e))?;
        let mut row = rec.iter().map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(format!("{}: bad number {f:?}", file.display())))
        });
        weights.push(row.next().unwrap()?);
        atoms.push(row.collect::<Result<Vec<f64>>>()?);
    }
    DiscreteMeasure::new(dim, atoms, weights)
}

pub fn write_measure(file: &FsPath, mu: &DiscreteMeasure) -> Result<()> {
    let mut w = csv::Writer::from_path(file).map_err(|e| csv_error(file, e))?;
    let mut header = vec!["w".to_string()];
    header.extend((1..=mu.dim()).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(|e| csv_error(file, e))?;
    for (i, atom) in mu.atoms().enumerate() {
        let mut rec = vec![num(mu.weights()[i])];
        rec.extend(atom.iter().map(|&x| num(x)));
        w.write_record(&rec).map_err(|e| csv_error(file, e))?;
    }
    w.flush().map_err(|e| Error::io(file, e))
}
