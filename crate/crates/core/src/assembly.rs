//! Lumped mass, stiffness, transport and load assembly for the two linear
//! systems solved per time step.
//!
//! Lumped integrals are taken element by element: every element-constant
//! factor (`q_e`, the normal, the endpoint velocities) comes from inside the
//! element, and nodal values of piecewise-constant data are never averaged
//! across neighbouring elements.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::geometry::{ElementFrame, NodalScalarField, NodalVectorField, PeriodicMesh, Point};

/// Row `i` reads `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1]` with
/// indices taken mod `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

/// Same layout as [`CyclicTridiagonal`] with 2x2 blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCyclicTridiagonal {
    pub sub: Vec<Matrix2<f64>>,
    pub diag: Vec<Matrix2<f64>>,
    pub sup: Vec<Matrix2<f64>>,
}

impl CyclicTridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diag: vec![1.0; n],
            ..Self::zeros(n)
        }
    }

    pub fn from_diagonal(diag: Vec<f64>) -> Self {
        let n = diag.len();
        Self {
            sub: vec![0.0; n],
            diag,
            sup: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.sub[i] * x[(i + n - 1) % n]
                    + self.diag[i] * x[i]
                    + self.sup[i] * x[(i + 1) % n]
            })
            .collect()
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &CyclicTridiagonal, scale: f64) {
        for (a, b) in [
            (&mut self.sub, &other.sub),
            (&mut self.diag, &other.diag),
            (&mut self.sup, &other.sup),
        ] {
            a.iter_mut().zip(b).for_each(|(a, b)| *a += scale * b);
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][(i + n - 1) % n] += self.sub[i];
            dense[i][i] += self.diag[i];
            dense[i][(i + 1) % n] += self.sup[i];
        }
        dense
    }

    /// Infinity norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| self.sub[i].abs() + self.diag[i].abs() + self.sup[i].abs())
            .fold(0.0, f64::max)
    }
}

impl BlockCyclicTridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            sub: vec![Matrix2::zeros(); n],
            diag: vec![Matrix2::zeros(); n],
            sup: vec![Matrix2::zeros(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            diag: vec![Matrix2::identity(); n],
            ..Self::zeros(n)
        }
    }

    /// `scalar ⊗ I_2`.
    pub fn from_scalar(scalar: &CyclicTridiagonal) -> Self {
        let lift = |v: &Vec<f64>| v.iter().map(|&a| Matrix2::identity() * a).collect();
        Self {
            sub: lift(&scalar.sub),
            diag: lift(&scalar.diag),
            sup: lift(&scalar.sup),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[Point]) -> Vec<Point> {
        let n = self.len();
        (0..n)
            .map(|i| {
                self.sub[i] * x[(i + n - 1) % n]
                    + self.diag[i] * x[i]
                    + self.sup[i] * x[(i + 1) % n]
            })
            .collect()
    }

    /// Dense `2n x 2n` matrix with unknowns ordered `(x_0, y_0, x_1, y_1, ...)`.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut dense = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for (col, block) in [
                ((i + n - 1) % n, &self.sub[i]),
                (i, &self.diag[i]),
                ((i + 1) % n, &self.sup[i]),
            ] {
                for r in 0..2 {
                    for c in 0..2 {
                        dense[2 * i + r][2 * col + c] += block[(r, c)];
                    }
                }
            }
        }
        dense
    }

    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        let mut norm = 0.0_f64;
        for i in 0..n {
            for r in 0..2 {
                let row: f64 = [&self.sub[i], &self.diag[i], &self.sup[i]]
                    .iter()
                    .map(|b| b[(r, 0)].abs() + b[(r, 1)].abs())
                    .sum();
                norm = norm.max(row);
            }
        }
        norm
    }
}

/// Diagonal of the lumped form `(q eta, chi)^h`.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedScalarMass(pub Vec<f64>);

impl LumpedScalarMass {
    pub fn new(mesh: &PeriodicMesh, frame: &ElementFrame) -> Self {
        Self(node_weights(mesh, |e| frame.length_element[e]))
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `sum_i m_i w_i`, the lumped integral `(q, w)^h`.
    pub fn integrate(&self, w: &NodalScalarField) -> f64 {
        self.0.iter().zip(w.values()).map(|(m, w)| m * w).sum()
    }
}

/// Nodal 2x2 blocks of `(q^2 [alpha u + (1 - alpha)(u . nu) nu], xi)^h`.
#[derive(Debug, Clone, PartialEq)]
pub struct LumpedBlockMass(pub Vec<Matrix2<f64>>);

impl LumpedBlockMass {
    pub fn new(mesh: &PeriodicMesh, frame: &ElementFrame, alpha: f64) -> Self {
        let element_block = |e: usize| {
            let q = frame.length_element[e];
            let nu = frame.normal[e];
            (Matrix2::identity() * alpha + nu * nu.transpose() * (1.0 - alpha))
                * (0.5 * mesh.h(e) * q * q)
        };
        Self(
            (0..mesh.len())
                .map(|i| {
                    let (l, r) = mesh.node_elements(i);
                    element_block(l) + element_block(r)
                })
                .collect(),
        )
    }
}

/// `sum_{e adjacent to i} (h_e / 2) weight(e)` for every node `i`.
pub fn node_weights(mesh: &PeriodicMesh, weight: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..mesh.len())
        .map(|i| {
            let (l, r) = mesh.node_elements(i);
            0.5 * (mesh.h(l) * weight(l) + mesh.h(r) * weight(r))
        })
        .collect()
}

/// `(w a, b)^h` for an element-constant weight `w`.
pub fn lumped_inner_product(
    mesh: &PeriodicMesh,
    element_weight: &[f64],
    a: &NodalScalarField,
    b: &NodalScalarField,
) -> Result<f64> {
    mesh.check_len(element_weight.len())?;
    mesh.check_len(a.len())?;
    mesh.check_len(b.len())?;
    Ok((0..mesh.len())
        .map(|e| {
            let (l, r) = mesh.element_nodes(e);
            element_weight[e] * 0.5 * mesh.h(e) * (a.0[l] * b.0[l] + a.0[r] * b.0[r])
        })
        .sum())
}

/// The unweighted periodic stiffness `(X_rho, xi_rho)` as a scalar matrix.
pub fn curve_stiffness_build(mesh: &PeriodicMesh) -> CyclicTridiagonal {
    stiffness_with(mesh, |_| 1.0)
}

/// Applies `(X_rho, xi_rho)` row by row.
pub fn curve_stiffness_apply(
    mesh: &PeriodicMesh,
    x: &NodalVectorField,
) -> Result<NodalVectorField> {
    mesh.check_len(x.len())?;
    let n = mesh.len();
    Ok(NodalVectorField(
        (0..n)
            .map(|i| {
                let (l, r) = mesh.node_elements(i);
                let prev = x.0[(i + n - 1) % n];
                let next = x.0[(i + 1) % n];
                (x.0[i] - prev) / mesh.h(l) - (next - x.0[i]) / mesh.h(r)
            })
            .collect(),
    ))
}

/// `(W_rho / q, eta_rho)`. The diffusivity is applied by the caller.
pub fn scalar_stiffness_build(mesh: &PeriodicMesh, frame: &ElementFrame) -> CyclicTridiagonal {
    stiffness_with(mesh, |e| 1.0 / frame.length_element[e])
}

fn stiffness_with(mesh: &PeriodicMesh, coefficient: impl Fn(usize) -> f64) -> CyclicTridiagonal {
    let n = mesh.len();
    let mut a = CyclicTridiagonal::zeros(n);
    for e in 0..n {
        let (l, r) = mesh.element_nodes(e);
        let k = coefficient(e) / mesh.h(e);
        a.diag[l] += k;
        a.diag[r] += k;
        a.sup[l] -= k;
        a.sub[r] -= k;
    }
    a
}

/// `(Psi W, eta_rho)^h` where `psi[e] = [value at left node, value at right
/// node]` is evaluated inside element `e`.
pub fn transport_build(mesh: &PeriodicMesh, psi: &[[f64; 2]]) -> Result<CyclicTridiagonal> {
    mesh.check_len(psi.len())?;
    let n = mesh.len();
    let mut a = CyclicTridiagonal::zeros(n);
    for (e, &[psi_l, psi_r]) in psi.iter().enumerate() {
        let (l, r) = mesh.element_nodes(e);
        // eta_rho = -1/h_e for the left node, +1/h_e for the right node; the
        // h_e cancels against the trapezoid weight.
        a.diag[l] -= 0.5 * psi_l;
        a.sup[l] -= 0.5 * psi_r;
        a.sub[r] += 0.5 * psi_l;
        a.diag[r] += 0.5 * psi_r;
    }
    Ok(a)
}

/// Forcing part of the curve equation:
/// `(q^2 [f(W) nu + S], xi)^h` with lagged geometry.
pub fn curve_rhs(
    mesh: &PeriodicMesh,
    frame_old: &ElementFrame,
    w_old: &NodalScalarField,
    forcing: &dyn Fn(f64) -> f64,
    source: Option<&[Point]>,
) -> Result<Vec<Point>> {
    mesh.check_len(frame_old.len())?;
    mesh.check_len(w_old.len())?;
    if let Some(s) = source {
        mesh.check_len(s.len())?;
    }
    Ok((0..mesh.len())
        .map(|i| {
            let (l, r) = mesh.node_elements(i);
            let fw = forcing(w_old.0[i]);
            let s = source.map_or(Point::zeros(), |s| s[i]);
            [l, r]
                .iter()
                .map(|&e| {
                    let q = frame_old.length_element[e];
                    (frame_old.normal[e] * fw + s) * (0.5 * mesh.h(e) * q * q)
                })
                .sum()
        })
        .collect())
}

/// Right-hand side of the concentration system: the old lumped mass term
/// `(q^{n-1} W^{n-1}, eta)^h / dt` plus `(q^n [g(V^n, W^{n-1}) + S_w], eta)^h`.
///
/// `normal_velocity[e]` holds the endpoint values of `V^n` inside element `e`.
#[allow(clippy::too_many_arguments)]
pub fn scalar_rhs(
    mesh: &PeriodicMesh,
    frame_new: &ElementFrame,
    frame_old: &ElementFrame,
    w_old: &NodalScalarField,
    normal_velocity: &[[f64; 2]],
    reaction: &dyn Fn(f64, f64) -> f64,
    source: Option<&[f64]>,
    dt: f64,
) -> Result<Vec<f64>> {
    for len in [
        frame_new.len(),
        frame_old.len(),
        w_old.len(),
        normal_velocity.len(),
    ] {
        mesh.check_len(len)?;
    }
    if let Some(s) = source {
        mesh.check_len(s.len())?;
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let old_mass = LumpedScalarMass::new(mesh, frame_old);
    Ok((0..mesh.len())
        .map(|i| {
            let (l, r) = mesh.node_elements(i);
            let w = w_old.0[i];
            let s = source.map_or(0.0, |s| s[i]);
            // node i is the right end of l and the left end of r
            let from_left = 0.5
                * mesh.h(l)
                * frame_new.length_element[l]
                * (reaction(normal_velocity[l][1], w) + s);
            let from_right = 0.5
                * mesh.h(r)
                * frame_new.length_element[r]
                * (reaction(normal_velocity[r][0], w) + s);
            old_mass.0[i] * w / dt + from_left + from_right
        })
        .collect())
}
