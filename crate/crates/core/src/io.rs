//! File formats: step functions as `h,value` CSV and generator sets as JSON.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! back a written file reproduces the in-memory values exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::WeightedPoint;
use crate::numeric::ExtReal;
use crate::process::{GeneratorSet, Window};
use crate::stepfn::StepCdf;

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.context(path.display().to_string()))
}

pub fn write_step_csv<W: Write>(f: &StepCdf, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["h", "value"])?;
    for (h, v) in f.points() {
        w.write_record([h.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_step_csv<R: Read>(input: R) -> Result<StepCdf> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "h" || &headers[1] != "value" {
        return Err(Error::invalid(format!(
            "expected header `h,value`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut pts = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("row {}: `{s}` is not a number", line + 2)))
        };
        pts.push((parse(&rec[0])?, parse(&rec[1])?));
    }
    if pts.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::invalid("rows must be ascending in h"));
    }
    StepCdf::new(pts)
}

pub fn save_step(f: &StepCdf, path: &Path) -> Result<()> {
    with_path(path, File::create(path).map_err(Error::from).and_then(|file| write_step_csv(f, BufWriter::new(file))))
}

pub fn load_step(path: &Path) -> Result<StepCdf> {
    with_path(path, File::open(path).map_err(Error::from).and_then(|file| read_step_csv(BufReader::new(file))))
}

/// Writes `(z, value)` rows, with `inf` for infinite values.
pub fn write_curve_csv<W: Write>(rows: &[(f64, ExtReal)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z", "value"])?;
    for (z, v) in rows {
        w.write_record([z.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GensJson {
    d: usize,
    window: Vec<f64>,
    guard: f64,
    points: Vec<WeightedPoint>,
}

pub fn write_gens_json<W: Write>(g: &GeneratorSet, out: W) -> Result<()> {
    let doc = GensJson {
        d: g.d,
        window: g.window.to_flat(),
        guard: g.guard,
        points: g.points.clone(),
    };
    serde_json::to_writer(out, &doc)?;
    Ok(())
}

pub fn read_gens_json<R: Read>(input: R) -> Result<GeneratorSet> {
    let doc: GensJson = serde_json::from_reader(input)?;
    let g = GeneratorSet {
        d: doc.d,
        window: Window::from_flat(&doc.window)?,
        guard: doc.guard,
        points: doc.points,
    };
    g.validate()?;
    Ok(g)
}

pub fn save_gens(g: &GeneratorSet, path: &Path) -> Result<()> {
    with_path(path, File::create(path).map_err(Error::from).and_then(|file| {
        let mut w = BufWriter::new(file);
        write_gens_json(g, &mut w)?;
        w.flush()?;
        Ok(())
    }))
}

pub fn load_gens(path: &Path) -> Result<GeneratorSet> {
    with_path(path, File::open(path).map_err(Error::from).and_then(|file| read_gens_json(BufReader::new(file))))
}
