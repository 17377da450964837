//! CSV artifacts. Numbers are written with 17 significant digits so that a
//! value read back is bit-identical.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use lma_core::obstacle::FreeBoundary;
use lma_core::{Grid, ScalarField, TensorField};

use crate::error::LabError;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV file under construction.
pub struct Table {
    path: PathBuf,
    w: csv::Writer<File>,
}

impl Table {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, LabError> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| LabError::io(&path, e))?;
        let mut t = Self {
            w: csv::Writer::from_writer(file),
            path,
        };
        t.row(header.iter().map(|s| s.to_string()))?;
        Ok(t)
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), LabError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w
            .write_record(fields)
            .map_err(|e| csv_err(&self.path, e))
    }

    /// A row of numbers.
    pub fn nums(&mut self, values: &[f64]) -> Result<(), LabError> {
        self.row(values.iter().map(|v| num(*v)))
    }

    pub fn finish(mut self) -> Result<(), LabError> {
        self.w.flush().map_err(|e| LabError::io(&self.path, e))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> LabError {
    LabError::Data(format!("{}: {e}", path.display()))
}

/// `x,y,value,tag`: interior and boundary nodes in lattice order, then the
/// boundary crossings of the stencil arms tagged `arm`.
pub fn write_scalar(dir: &Path, name: &str, u: &ScalarField) -> Result<(), LabError> {
    let g = u.grid();
    let mut t = Table::create(dir, name, &["x", "y", "value", "tag"])?;
    for i in (0..g.len()).filter(|&i| g.has_value(i)) {
        let p = g.pos(i);
        t.row([
            num(p.x),
            num(p.y),
            num(u.value(i)),
            g.tag(i).as_str().into(),
        ])?;
    }
    for (arm, v) in g.all_arms().iter().zip(u.arm_values()) {
        t.row([num(arm.point.x), num(arm.point.y), num(*v), "arm".into()])?;
    }
    t.finish()
}

/// `x,y,W11,W12,W22` at nodes where the tensor is defined.
pub fn write_tensor(dir: &Path, name: &str, w: &TensorField) -> Result<(), LabError> {
    let g = w.grid();
    let mut t = Table::create(dir, name, &["x", "y", "W11", "W12", "W22"])?;
    for i in 0..g.len() {
        if let Some(m) = w.get(i) {
            let p = g.pos(i);
            t.nums(&[p.x, p.y, m.a11, m.a12, m.a22])?;
        }
    }
    t.finish()
}

/// `x,y,contact` over interior nodes, `contact` 0 or 1.
pub fn write_contact(dir: &Path, g: &Grid, contact: &[bool]) -> Result<(), LabError> {
    let mut t = Table::create(dir, "contact_mask.csv", &["x", "y", "contact"])?;
    for i in g.interior_nodes() {
        let p = g.pos(i);
        t.row([num(p.x), num(p.y), u8::from(contact[i]).to_string()])?;
    }
    t.finish()
}

/// `x,y,piece`, one row per contour vertex.
pub fn write_free_boundary(dir: &Path, fb: Option<&FreeBoundary>) -> Result<(), LabError> {
    let mut t = Table::create(dir, "free_boundary.csv", &["x", "y", "piece"])?;
    for (k, piece) in fb.into_iter().flat_map(|f| f.pieces.iter()).enumerate() {
        for p in &piece.points {
            t.row([num(p.x), num(p.y), k.to_string()])?;
        }
    }
    t.finish()
}

/// Reads a field written by [`write_scalar`] back onto `grid`, which must be
/// the grid it was written from.
pub fn read_scalar(path: &Path, grid: &Arc<Grid>) -> Result<ScalarField, LabError> {
    let bad = |msg: String| LabError::Data(format!("{}: {msg}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut values = vec![f64::NAN; grid.len()];
    let mut arm_values = Vec::with_capacity(grid.all_arms().len());
    let mut nodes = (0..grid.len()).filter(|&i| grid.has_value(i));
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let field = |k: usize| -> Result<f64, LabError> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("row {}: column {k} is not a number", line + 2)))
        };
        let (x, y, v) = (field(0)?, field(1)?, field(2)?);
        let (expect, slot) = if rec.get(3) == Some("arm") {
            let k = arm_values.len();
            let arm = grid
                .all_arms()
                .get(k)
                .ok_or_else(|| bad("more arm rows than the grid has crossings".into()))?;
            arm_values.push(v);
            (arm.point, None)
        } else {
            let i = nodes
                .next()
                .ok_or_else(|| bad("more node rows than the grid has nodes".into()))?;
            (grid.pos(i), Some(i))
        };
        let tol = 1e-9 * grid.spacing();
        if (expect.x - x).abs() > tol || (expect.y - y).abs() > tol {
            return Err(bad(format!(
                "row {} at ({x}, {y}) does not match the grid",
                line + 2
            )));
        }
        if let Some(i) = slot {
            values[i] = v;
        }
    }
    if nodes.next().is_some() || arm_values.len() != grid.all_arms().len() {
        return Err(bad("file covers fewer points than the grid".into()));
    }
    ScalarField::new(grid.clone(), values, arm_values).map_err(|e| bad(e.to_string()))
}
