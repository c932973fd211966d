//! Snapshot files: per-node CSV and SVG drawings of the curve.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{NodalScalarField, NodalVectorField, PeriodicMesh, Point};
use crate::stepper::StepState;

pub const SNAPSHOT_HEADER: &str = "rho,x,y,w";

/// CSV with one row per node plus a closing row repeating node 0 at
/// `rho = 1`. Values carry 17 significant digits.
pub fn snapshot_csv(mesh: &PeriodicMesh, state: &StepState) -> String {
    let mut out = String::with_capacity(80 * (mesh.len() + 2));
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    let x = state.positions.values();
    let w = state.concentration.values();
    for i in 0..=mesh.len() {
        let node = i % mesh.len();
        let rho = if i == mesh.len() { 1.0 } else { mesh.node(i) };
        let _ = writeln!(
            out,
            "{rho:.16e},{:.16e},{:.16e},{:.16e}",
            x[node].x, x[node].y, w[node]
        );
    }
    out
}

pub fn write_snapshot_csv(path: &Path, mesh: &PeriodicMesh, state: &StepState) -> Result<()> {
    fs::write(path, snapshot_csv(mesh, state)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    /// Parameter coordinates of the stored nodes.
    pub rho: Vec<f64>,
    pub positions: NodalVectorField,
    pub concentration: NodalScalarField,
}

/// Reads a snapshot written by [`write_snapshot_csv`], dropping the closing row.
pub fn read_snapshot_csv(path: &Path) -> Result<Snapshot> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_snapshot(&text).map_err(|reason| Error::Snapshot {
        path: path.to_path_buf(),
        reason,
    })
}

fn parse_snapshot(text: &str) -> std::result::Result<Snapshot, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SNAPSHOT_HEADER => {}
        other => {
            return Err(format!(
                "expected header '{SNAPSHOT_HEADER}', found {other:?}"
            ))
        }
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format!("row {}: {e}", k + 1))?;
        if cells.len() != 4 {
            return Err(format!(
                "row {}: expected 4 columns, found {}",
                k + 1,
                cells.len()
            ));
        }
        rows.push([cells[0], cells[1], cells[2], cells[3]]);
    }
    if rows.len() < 4 {
        return Err(format!("expected at least 4 rows, found {}", rows.len()));
    }
    let closing = rows.pop().unwrap_or_default();
    if closing[1..] != rows[0][1..] {
        return Err("closing row does not repeat the first node".into());
    }
    Ok(Snapshot {
        rho: rows.iter().map(|r| r[0]).collect(),
        positions: NodalVectorField(rows.iter().map(|r| Point::new(r[1], r[2])).collect()),
        concentration: NodalScalarField(rows.iter().map(|r| r[3]).collect()),
    })
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn of(points: &[Point]) -> Self {
        let mut bb = BoundingBox {
            min: Point::repeat(f64::INFINITY),
            max: Point::repeat(f64::NEG_INFINITY),
        };
        bb.extend(points);
        bb
    }

    pub fn extend(&mut self, points: &[Point]) {
        for p in points {
            self.min = self.min.inf(p);
            self.max = self.max.sup(p);
        }
    }
}

pub const SVG_SIZE: f64 = 600.0;
const SVG_MARGIN: f64 = 20.0;

pub struct SvgCurve<'a> {
    pub points: &'a [Point],
    pub stroke: &'a str,
}

/// SVG 1.1 document drawing closed polylines in a fixed square canvas with
/// equal-aspect scaling of `view`.
pub fn svg_document(view: &BoundingBox, curves: &[SvgCurve<'_>], title: &str) -> String {
    let extent = (view.max - view.min).max().max(f64::MIN_POSITIVE);
    let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / extent;
    let centre = (view.min + view.max) * 0.5;
    let map = |p: &Point| {
        (
            SVG_SIZE / 2.0 + (p.x - centre.x) * scale,
            SVG_SIZE / 2.0 - (p.y - centre.y) * scale,
        )
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">"#
    );
    let _ = writeln!(out, "  <title>{}</title>", escape(title));
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    for curve in curves {
        let mut d = String::new();
        for (k, p) in curve.points.iter().enumerate() {
            let (x, y) = map(p);
            let _ = write!(d, "{}{x:.3} {y:.3} ", if k == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(
            out,
            r#"  <path d="{d}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            curve.stroke
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
