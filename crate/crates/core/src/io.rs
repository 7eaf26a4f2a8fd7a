//! Curve and patch files, and tidy CSV for plotting.
//!
//! Curve JSON is `{"dim": n, "components": [[[x, ...], ...], ...]}`. Curve CSV
//! has one vertex per row and a blank row between components; the dimension
//! is the column count.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{build_curve, CurveError, DiscreteCurve};
use crate::patch::{GraphPatch, PatchError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Patch(#[from] PatchError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFile {
    pub dim: usize,
    pub components: Vec<Vec<Vec<f64>>>,
}

impl From<&DiscreteCurve> for CurveFile {
    fn from(c: &DiscreteCurve) -> CurveFile {
        CurveFile {
            dim: c.dim(),
            components: c.components(),
        }
    }
}

impl CurveFile {
    pub fn build(self) -> Result<DiscreteCurve, CurveError> {
        build_curve(self.components, self.dim)
    }
}

pub fn curve_to_json(curve: &DiscreteCurve) -> String {
    serde_json::to_string(&CurveFile::from(curve)).expect("curves serialize")
}

pub fn curve_from_json(text: &str) -> Result<DiscreteCurve, IoError> {
    let file: CurveFile = serde_json::from_str(text)?;
    Ok(file.build()?)
}

pub fn curve_to_csv(curve: &DiscreteCurve) -> String {
    let mut out = String::new();
    for (c, comp) in curve.components().iter().enumerate() {
        if c > 0 {
            out.push('\n');
        }
        for p in comp {
            let row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn curve_from_csv(text: &str) -> Result<DiscreteCurve, IoError> {
    let mut comps: Vec<Vec<Vec<f64>>> = vec![Vec::new()];
    let mut dim = None;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            if !comps.last().unwrap().is_empty() {
                comps.push(Vec::new());
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| IoError::Csv {
                line: k + 1,
                message: e.to_string(),
            })?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(IoError::Csv {
                    line: k + 1,
                    message: format!("expected {d} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        comps.last_mut().unwrap().push(row);
    }
    if comps.last().is_some_and(|c| c.is_empty()) {
        comps.pop();
    }
    let dim = dim.ok_or(IoError::Csv {
        line: 0,
        message: "no vertices".into(),
    })?;
    Ok(build_curve(comps, dim)?)
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads JSON, or CSV when the extension is `.csv`.
pub fn read_curve(path: &Path) -> Result<DiscreteCurve, IoError> {
    let text = read(path)?;
    if is_csv(path) {
        curve_from_csv(&text)
    } else {
        curve_from_json(&text)
    }
}

pub fn write_curve(path: &Path, curve: &DiscreteCurve) -> Result<(), IoError> {
    let text = if is_csv(path) {
        curve_to_csv(curve)
    } else {
        curve_to_json(curve)
    };
    write_text(path, &text)
}

pub fn read_patch(path: &Path) -> Result<GraphPatch, IoError> {
    let patch: GraphPatch = serde_json::from_str(&read(path)?)?;
    patch.validate()?;
    Ok(patch)
}

/// Long-format table: a header row then one observation per row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TidyTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TidyTable {
    pub fn new(columns: &[&str]) -> TidyTable {
        TidyTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        let row: Vec<String> = row.into_iter().collect();
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }
}

/// Per-vertex table `component,vertex,x0..,curvature`.
pub fn curve_table(curve: &DiscreteCurve) -> TidyTable {
    let mut cols = vec!["component".to_string(), "vertex".to_string()];
    cols.extend((0..curve.dim()).map(|d| format!("x{d}")));
    cols.push("curvature".into());
    let mut t = TidyTable {
        columns: cols,
        rows: Vec::new(),
    };
    let kappa = crate::curve::vertex_curvatures(curve);
    for (c, ring) in curve.rings().iter().enumerate() {
        for i in 0..ring.len() {
            let mut row = vec![c.to_string(), i.to_string()];
            row.extend(ring.vertex(i).iter().map(|x| x.to_string()));
            row.push(kappa[c][i].to_string());
            t.push(row);
        }
    }
    t
}
