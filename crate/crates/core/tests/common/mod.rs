#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use curveflow::geometry::{NodalScalarField, NodalVectorField, PeriodicMesh, Point};
use curveflow::manufactured::ExactSolution;
use rand::Rng;

pub type Dense = Vec<Vec<f64>>;

/// Non-uniform mesh with element lengths drawn from `[0.5, 1.5]` before
/// normalisation.
pub fn random_mesh<R: Rng>(rng: &mut R, elements: usize) -> PeriodicMesh {
    let lengths: Vec<f64> = (0..elements).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = lengths.iter().sum();
    let mut breakpoints = vec![0.0];
    let mut acc = 0.0;
    for l in &lengths[..elements - 1] {
        acc += l / total;
        breakpoints.push(acc);
    }
    breakpoints.push(1.0);
    PeriodicMesh::from_breakpoints(breakpoints).unwrap()
}

/// Star-shaped polygon: unit circle with radial and angular jitter.
pub fn random_curve<R: Rng>(rng: &mut R, mesh: &PeriodicMesh) -> NodalVectorField {
    NodalVectorField(
        (0..mesh.len())
            .map(|i| {
                let theta = 2.0 * PI * (mesh.node(i) + rng.gen_range(-0.1..0.1) * mesh.h(i));
                let r = rng.gen_range(0.7..1.3);
                Point::new(r * theta.cos(), r * theta.sin())
            })
            .collect(),
    )
}

pub fn random_scalars<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Geometry of element `e` computed directly from the two end positions:
/// `(q, tangent, normal)`.
pub fn element_geometry(mesh: &PeriodicMesh, x: &[Point], e: usize) -> (f64, Point, Point) {
    let n = mesh.len();
    let chord = x[(e + 1) % n] - x[e];
    let len = chord.norm();
    let tau = chord / len;
    (len / mesh.h(e), tau, Point::new(-tau.y, tau.x))
}

/// Hat function `chi_i` restricted to element `e`: values at the left and
/// right ends and the slope.
pub fn hat(mesh: &PeriodicMesh, i: usize, e: usize) -> (f64, f64, f64) {
    let n = mesh.len();
    let left = if e == i { 1.0 } else { 0.0 };
    let right = if (e + 1) % n == i { 1.0 } else { 0.0 };
    (left, right, (right - left) / mesh.h(e))
}

/// `a[i][j] = sum_e c_e int chi_j' chi_i'`.
pub fn dense_stiffness(mesh: &PeriodicMesh, coef: impl Fn(usize) -> f64) -> Dense {
    let n = mesh.len();
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            for e in 0..n {
                let si = hat(mesh, i, e).2;
                let sj = hat(mesh, j, e).2;
                *entry += coef(e) * mesh.h(e) * si * sj;
            }
        }
    }
    a
}

/// `a[i][j] = (w chi_j, chi_i)^h` by the elementwise trapezoid.
pub fn dense_lumped_mass(mesh: &PeriodicMesh, weight: impl Fn(usize) -> f64) -> Dense {
    let n = mesh.len();
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            for e in 0..n {
                let (il, ir, _) = hat(mesh, i, e);
                let (jl, jr, _) = hat(mesh, j, e);
                *entry += weight(e) * 0.5 * mesh.h(e) * (il * jl + ir * jr);
            }
        }
    }
    a
}

/// `a[i][j] = (Psi chi_j, chi_i')^h` with element-endpoint values of `Psi`.
pub fn dense_transport(mesh: &PeriodicMesh, psi: &[[f64; 2]]) -> Dense {
    let n = mesh.len();
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            for (e, p) in psi.iter().enumerate() {
                let si = hat(mesh, i, e).2;
                let (jl, jr, _) = hat(mesh, j, e);
                *entry += si * 0.5 * mesh.h(e) * (p[0] * jl + p[1] * jr);
            }
        }
    }
    a
}

/// `(q^2 [alpha u + (1 - alpha)(u . nu) nu], xi)^h` over unknowns ordered
/// `x0, y0, x1, y1, ...`.
pub fn dense_block_mass(mesh: &PeriodicMesh, x: &[Point], alpha: f64) -> Dense {
    let n = mesh.len();
    let mut a = vec![vec![0.0; 2 * n]; 2 * n];
    for e in 0..n {
        let (q, _, nu) = element_geometry(mesh, x, e);
        for i in 0..n {
            for j in 0..n {
                let (il, ir, _) = hat(mesh, i, e);
                let (jl, jr, _) = hat(mesh, j, e);
                let trap = 0.5 * mesh.h(e) * (il * jl + ir * jr) * q * q;
                for c in 0..2 {
                    for d in 0..2 {
                        let delta = if c == d { 1.0 } else { 0.0 };
                        a[2 * i + c][2 * j + d] +=
                            trap * (alpha * delta + (1.0 - alpha) * nu[c] * nu[d]);
                    }
                }
            }
        }
    }
    a
}

/// Kronecker product with the 2x2 identity, same unknown ordering.
pub fn kron_identity(a: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            out[2 * i][2 * j] = a[i][j];
            out[2 * i + 1][2 * j + 1] = a[i][j];
        }
    }
    out
}

pub fn add_scaled(a: &mut Dense, b: &Dense, s: f64) {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (x, y) in ra.iter_mut().zip(rb) {
            *x += s * y;
        }
    }
}

pub fn diagonal(d: &[f64]) -> Dense {
    let n = d.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = d[i];
    }
    a
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// `max |a - b| / max(1, max |b|)`.
pub fn relative_gap(a: &Dense, b: &Dense) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut gap: f64 = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        assert_eq!(ra.len(), rb.len());
        for (x, y) in ra.iter().zip(rb) {
            gap = gap.max((x - y).abs());
        }
    }
    gap / max_abs(b).max(1.0)
}

pub fn vector_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

pub fn flatten(points: &[Point]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y]).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_lu_solve(mut a: Dense, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Step used by the fourth-order difference quotients below.
pub const FD_STEP: f64 = 2.5e-4;

pub fn d1<T>(f: impl Fn(f64) -> T, at: f64) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let h = FD_STEP;
    ((f(at + h) - f(at - h)) * 8.0 - (f(at + 2.0 * h) - f(at - 2.0 * h))) * (1.0 / (12.0 * h))
}

pub fn d2<T>(f: impl Fn(f64) -> T, at: f64) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let h = FD_STEP;
    ((f(at + h) + f(at - h)) * 16.0 - (f(at + 2.0 * h) + f(at - 2.0 * h)) - f(at) * 30.0)
        * (1.0 / (12.0 * h * h))
}

/// Residual of the curve equation for `exact`, with every derivative taken
/// by finite differences of `exact.x` and `exact.w` only.
pub fn curve_residual_fd(
    exact: &dyn ExactSolution,
    alpha: f64,
    forcing: &dyn Fn(f64) -> f64,
    rho: f64,
    t: f64,
) -> Point {
    let x_t = d1(|s| exact.x(rho, s), t);
    let x_r = d1(|r| exact.x(r, t), rho);
    let x_rr = d2(|r| exact.x(r, t), rho);
    let tau = x_r / x_r.norm();
    let nu = Point::new(-tau.y, tau.x);
    x_t * alpha + nu * ((1.0 - alpha) * x_t.dot(&nu))
        - x_rr / x_r.norm_squared()
        - nu * forcing(exact.w(rho, t))
}

/// Residual of the concentration equation in parametrised form, by finite
/// differences of the base maps.
pub fn scalar_residual_fd(
    exact: &dyn ExactSolution,
    diffusivity: f64,
    reaction: &dyn Fn(f64, f64) -> f64,
    rho: f64,
    t: f64,
) -> f64 {
    let x_t = d1(|s| exact.x(rho, s), t);
    let x_r = d1(|r| exact.x(r, t), rho);
    let x_rr = d2(|r| exact.x(r, t), rho);
    let len = x_r.norm();
    let tau = x_r / len;
    let nu = Point::new(-tau.y, tau.x);
    let v = x_t.dot(&nu);
    let psi = x_t.dot(&tau);
    let kappa = x_rr.dot(&nu) / (len * len);
    let w = exact.w(rho, t);
    let w_t = d1(|s| exact.w(rho, s), t);
    let w_r = d1(|r| exact.w(r, t), rho);
    let flux = |r: f64| d1(|q| exact.w(q, t), r) / d1(|q| exact.x(q, t), r).norm();
    let diffusion = diffusivity / len * d1(flux, rho);
    w_t - psi * w_r / len - diffusion - kappa * v * w - reaction(v, w)
}

pub fn constant_field(mesh: &PeriodicMesh, value: f64) -> NodalScalarField {
    NodalScalarField(vec![value; mesh.len()])
}

/// Largest relative gaps between library output and the dense oracles for
/// one random instance.
#[derive(Debug, Default, Clone, Copy)]
pub struct OracleGaps {
    pub matrices: f64,
    pub right_hand_sides: f64,
    pub solves: f64,
}

impl OracleGaps {
    pub fn max(&self) -> f64 {
        self.matrices.max(self.right_hand_sides).max(self.solves)
    }
}

pub fn oracle_instance<R: Rng>(rng: &mut R) -> OracleGaps {
    use curveflow::assembly::{
        curve_stiffness_build, scalar_stiffness_build, transport_build, LumpedScalarMass,
    };
    use curveflow::geometry::element_frame;
    use curveflow::linsolve::{solve_block_cyclic, solve_cyclic_tridiag};
    use curveflow::stepper::{curve_system, scalar_system, velocities, SchemeParams, StepState};
    use std::sync::Arc;

    let n = rng.gen_range(3..=8);
    let mesh = random_mesh(rng, n);
    let x_old = random_curve(rng, &mesh);
    let x_new = random_curve(rng, &mesh);
    let w_old = NodalScalarField(random_scalars(rng, n, -1.0, 1.0));
    let alpha = rng.gen_range(0.05..=1.0);
    let d = rng.gen_range(0.1..2.0);
    let dt = 10f64.powf(rng.gen_range(-4.0..-1.0));
    let (a, b, c) = (
        rng.gen_range(0.0..6.0),
        rng.gen_range(0.0..6.0),
        rng.gen_range(0.0..6.0),
    );
    let curve_source = move |r: f64, _t: f64| Point::new((7.0 * r + a).sin(), (5.0 * r + b).cos());
    let scalar_source = move |r: f64, _t: f64| (3.0 * r + c).sin();

    let old = StepState::new(&mesh, 0, 0.0, x_old.clone(), w_old.clone()).unwrap();
    let frame_new = element_frame(&mesh, &x_new).unwrap();
    let vel = velocities(&mesh, &x_new, &x_old, dt, &frame_new).unwrap();
    let xo = x_old.values();
    let xn = x_new.values();
    let q_old = |e: usize| element_geometry(&mesh, xo, e).0;
    let q_new = |e: usize| element_geometry(&mesh, xn, e).0;

    let mut gaps = OracleGaps::default();
    let mut mat = |a: &Dense, b: &Dense| gaps.matrices = gaps.matrices.max(relative_gap(a, b));

    // individual operators
    mat(
        &curve_stiffness_build(&mesh).to_dense(),
        &dense_stiffness(&mesh, |_| 1.0),
    );
    let frame_old = &old.frame;
    mat(
        &scalar_stiffness_build(&mesh, frame_old).to_dense(),
        &dense_stiffness(&mesh, |e| 1.0 / q_old(e)),
    );
    mat(
        &diagonal(&LumpedScalarMass::new(&mesh, frame_old).0),
        &dense_lumped_mass(&mesh, q_old),
    );
    let psi: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)])
        .collect();
    mat(
        &transport_build(&mesh, &psi).unwrap().to_dense(),
        &dense_transport(&mesh, &psi),
    );

    // full systems
    let params = SchemeParams::new(alpha, d)
        .unwrap()
        .with_forcing(|w| 0.5 * w * w - w)
        .with_reaction(|v, w| v * w - (1.0 - w))
        .with_sources(Some(Arc::new(curve_source)), Some(Arc::new(scalar_source)));
    let (curve_matrix, curve_b) = curve_system(&mesh, &old, &params, dt, dt).unwrap();
    let mut curve_dense = dense_block_mass(&mesh, xo, alpha);
    for row in curve_dense.iter_mut() {
        for v in row.iter_mut() {
            *v /= dt;
        }
    }
    add_scaled(
        &mut curve_dense,
        &kron_identity(&dense_stiffness(&mesh, |_| 1.0)),
        1.0,
    );
    mat(&curve_matrix.to_dense(), &curve_dense);

    let (scalar_matrix, scalar_b) =
        scalar_system(&mesh, &old, &frame_new, &vel, &params, dt, dt).unwrap();
    let mut scalar_dense = dense_lumped_mass(&mesh, |e| q_new(e) / dt);
    add_scaled(
        &mut scalar_dense,
        &dense_stiffness(&mesh, |e| 1.0 / q_new(e)),
        d,
    );
    add_scaled(
        &mut scalar_dense,
        &dense_transport(&mesh, &vel.tangential),
        1.0,
    );
    mat(&scalar_matrix.to_dense(), &scalar_dense);

    // right-hand sides by elementwise trapezoid over hat functions
    let forcing = |w: f64| 0.5 * w * w - w;
    let reaction = |v: f64, w: f64| v * w - (1.0 - w);
    let mass_old = dense_block_mass(&mesh, xo, alpha);
    let mut curve_oracle = vec![0.0; 2 * n];
    let mut scalar_oracle = vec![0.0; n];
    for i in 0..n {
        for e in 0..n {
            let (il, ir, _) = hat(&mesh, i, e);
            let (l, r) = (e, (e + 1) % n);
            let (q, _, nu) = element_geometry(&mesh, xo, e);
            let at = |k: usize| nu * forcing(w_old.0[k]) + curve_source(mesh.node(k), dt);
            let c = (at(l) * il + at(r) * ir) * (0.5 * mesh.h(e) * q * q);
            curve_oracle[2 * i] += c.x;
            curve_oracle[2 * i + 1] += c.y;

            let (qn, _, nun) = element_geometry(&mesh, xn, e);
            let v = |k: usize| ((xn[k] - xo[k]) / dt).dot(&nun);
            let g = |k: usize| reaction(v(k), w_old.0[k]) + scalar_source(mesh.node(k), dt);
            scalar_oracle[i] += 0.5 * mesh.h(e) * qn * (g(l) * il + g(r) * ir);
            scalar_oracle[i] += 0.5 * mesh.h(e) * q_old(e) * w_old.0[i] * (il + ir) / dt;
        }
        for j in 0..n {
            curve_oracle[2 * i] +=
                (mass_old[2 * i][2 * j] * xo[j].x + mass_old[2 * i][2 * j + 1] * xo[j].y) / dt;
            curve_oracle[2 * i + 1] += (mass_old[2 * i + 1][2 * j] * xo[j].x
                + mass_old[2 * i + 1][2 * j + 1] * xo[j].y)
                / dt;
        }
    }
    gaps.right_hand_sides =
        vector_gap(&flatten(&curve_b), &curve_oracle).max(vector_gap(&scalar_b, &scalar_oracle));

    // solvers against dense LU
    let x = solve_block_cyclic(&curve_matrix, &curve_b).unwrap();
    let x_lu = dense_lu_solve(curve_matrix.to_dense(), flatten(&curve_b));
    let w = solve_cyclic_tridiag(&scalar_matrix, &scalar_b).unwrap();
    let w_lu = dense_lu_solve(scalar_matrix.to_dense(), scalar_b.clone());
    gaps.solves = vector_gap(&flatten(&x), &x_lu).max(vector_gap(&w, &w_lu));
    gaps
}
