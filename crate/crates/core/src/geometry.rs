//! Periodic parameter mesh, nodal piecewise-linear fields and the
//! element-wise geometry (length element, tangent, normal) of a polygon.
//!
//! Element `e` spans `[rho_e, rho_{e+1}]` and joins node `e` to node
//! `(e + 1) % J`. Node `J` is identified with node `0` and never stored, so
//! node `i` is the right end of element `i - 1` and the left end of element
//! `i` (indices mod `J`).

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Relative chord length below which an element counts as collapsed.
pub const DEGENERACY_TOLERANCE: f64 = 1e-14;

/// Counter-clockwise rotation by a quarter turn.
#[inline]
pub fn perp(v: &Point) -> Point {
    Point::new(-v.y, v.x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMesh {
    breakpoints: Vec<f64>,
    lengths: Vec<f64>,
}

impl PeriodicMesh {
    pub fn uniform(elements: usize) -> Result<Self> {
        if elements < 3 {
            return Err(Error::InvalidMesh(format!(
                "a closed polygon needs at least 3 elements, got {elements}"
            )));
        }
        let h = 1.0 / elements as f64;
        let breakpoints = (0..=elements).map(|j| j as f64 / elements as f64).collect();
        Ok(Self {
            breakpoints,
            lengths: vec![h; elements],
        })
    }

    /// Builds a mesh from `rho_0 = 0 < rho_1 < ... < rho_J = 1`.
    pub fn from_breakpoints(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 4 {
            return Err(Error::InvalidMesh(format!(
                "a closed polygon needs at least 3 elements, got {}",
                breakpoints.len().saturating_sub(1)
            )));
        }
        let first = breakpoints[0];
        let last = breakpoints[breakpoints.len() - 1];
        if first != 0.0 || (last - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidMesh(format!(
                "breakpoints must run from 0 to 1, got [{first}, {last}]"
            )));
        }
        let lengths: Vec<f64> = breakpoints.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(e) = lengths.iter().position(|&h| !(h > 0.0)) {
            return Err(Error::InvalidMesh(format!(
                "element {e} has non-positive length {}",
                lengths[e]
            )));
        }
        Ok(Self {
            breakpoints,
            lengths,
        })
    }

    /// Number of elements, which equals the number of stored nodes.
    #[inline]
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    #[inline]
    pub fn h(&self, element: usize) -> f64 {
        self.lengths[element]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn max_h(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }

    /// Parameter coordinate of a stored node.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.breakpoints[i]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Nodes `(left, right)` of an element.
    #[inline]
    pub fn element_nodes(&self, element: usize) -> (usize, usize) {
        (element, (element + 1) % self.len())
    }

    /// Elements `(left, right)` of a node: the node is the right end of the
    /// first and the left end of the second.
    #[inline]
    pub fn node_elements(&self, node: usize) -> (usize, usize) {
        ((node + self.len() - 1) % self.len(), node)
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

/// A closed curve in `[V_h]^2`, stored by its nodal positions.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalVectorField(pub Vec<Point>);

/// A scalar in `V_h`, stored by its nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalScalarField(pub Vec<f64>);

impl NodalVectorField {
    /// Lagrange interpolant of a periodic map.
    pub fn interpolate(mesh: &PeriodicMesh, map: impl Fn(f64) -> Point) -> Self {
        Self((0..mesh.len()).map(|i| map(mesh.node(i))).collect())
    }

    pub fn values(&self) -> &[Point] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of the piecewise-linear interpolant at `rho` (taken mod 1).
    pub fn eval(&self, mesh: &PeriodicMesh, rho: f64) -> Point {
        let (e, s) = locate(mesh, rho);
        let (a, b) = mesh.element_nodes(e);
        self.0[a] * (1.0 - s) + self.0[b] * s
    }
}

impl NodalScalarField {
    pub fn interpolate(mesh: &PeriodicMesh, map: impl Fn(f64) -> f64) -> Self {
        Self((0..mesh.len()).map(|i| map(mesh.node(i))).collect())
    }

    pub fn constant(mesh: &PeriodicMesh, value: f64) -> Self {
        Self(vec![value; mesh.len()])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, mesh: &PeriodicMesh, rho: f64) -> f64 {
        let (e, s) = locate(mesh, rho);
        let (a, b) = mesh.element_nodes(e);
        self.0[a] * (1.0 - s) + self.0[b] * s
    }
}

/// Containing element and local coordinate in `[0, 1]`.
fn locate(mesh: &PeriodicMesh, rho: f64) -> (usize, f64) {
    let rho = rho.rem_euclid(1.0);
    let bp = mesh.breakpoints();
    let e = match bp.partition_point(|&r| r <= rho) {
        0 => 0,
        k => (k - 1).min(mesh.len() - 1),
    };
    (e, ((rho - bp[e]) / mesh.h(e)).clamp(0.0, 1.0))
}

/// Piecewise-constant geometry of a polygon: `q_e = |X_rho|`, unit tangent
/// and unit normal (tangent turned counter-clockwise) on each element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementFrame {
    pub length_element: Vec<f64>,
    pub tangent: Vec<Point>,
    pub normal: Vec<Point>,
}

impl ElementFrame {
    pub fn len(&self) -> usize {
        self.length_element.len()
    }

    pub fn is_empty(&self) -> bool {
        self.length_element.is_empty()
    }

    /// Total polygon length `sum_e h_e q_e`.
    pub fn polygon_length(&self, mesh: &PeriodicMesh) -> f64 {
        self.length_element
            .iter()
            .zip(mesh.lengths())
            .map(|(q, h)| q * h)
            .sum()
    }
}

pub fn element_frame(mesh: &PeriodicMesh, x: &NodalVectorField) -> Result<ElementFrame> {
    mesh.check_len(x.len())?;
    let n = mesh.len();
    let chords: Vec<Point> = (0..n)
        .map(|e| {
            let (a, b) = mesh.element_nodes(e);
            x.0[b] - x.0[a]
        })
        .collect();
    let norms: Vec<f64> = chords.iter().map(|c| c.norm()).collect();
    let threshold = DEGENERACY_TOLERANCE * norms.iter().sum::<f64>() / n as f64;

    let mut frame = ElementFrame {
        length_element: Vec::with_capacity(n),
        tangent: Vec::with_capacity(n),
        normal: Vec::with_capacity(n),
    };
    for (e, (chord, &len)) in chords.iter().zip(&norms).enumerate() {
        if !(len > threshold) {
            return Err(Error::DegenerateElement {
                element: e,
                length: len,
                threshold,
            });
        }
        let tangent = chord / len;
        frame.length_element.push(len / mesh.h(e));
        frame.normal.push(perp(&tangent));
        frame.tangent.push(tangent);
    }
    Ok(frame)
}

/// Ratio of the longest to the shortest polygon edge.
pub fn mesh_ratio(mesh: &PeriodicMesh, x: &NodalVectorField) -> Result<f64> {
    let frame = element_frame(mesh, x)?;
    let (lo, hi) = frame
        .length_element
        .iter()
        .zip(mesh.lengths())
        .map(|(q, h)| q * h)
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), c| {
            (lo.min(c), hi.max(c))
        });
    Ok(hi / lo)
}
