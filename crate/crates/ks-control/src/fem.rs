//! Piecewise-linear finite elements on a uniform 1D mesh over (-L, L).
//!
//! Assembles the mass and stiffness matrices, quadratic transport vectors,
//! load vectors and weighted norms used by the evolution and adjoint solvers.
//! All element integrals of piecewise polynomials up to degree 3 use 2-point
//! Gauss quadrature (exact); general loads use 3-point Gauss.

use crate::linalg::{solve_banded, BandedMatrix, LinalgError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid subdomain: [{a}, {b}] not contained in [-{l}, {l}] or empty")]
    InvalidSubdomain { a: f64, b: f64, l: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Uniform mesh on (-L, L) with `n_elems` elements and `n_elems + 1` nodes.
#[derive(Debug, Clone)]
pub struct Mesh1D {
    half_length: f64,
    n_elems: usize,
    h: f64,
    nodes: Vec<f64>,
}

/// Build a uniform mesh over (-half_length, half_length).
pub fn build_mesh(half_length: f64, n_elems: usize) -> Result<Mesh1D, FemError> {
    if !(half_length.is_finite() && half_length > 0.0) {
        return Err(FemError::InvalidMesh(format!("half length {half_length} must be positive")));
    }
    if n_elems < 2 {
        return Err(FemError::InvalidMesh(format!("need at least 2 elements, got {n_elems}")));
    }
    let h = 2.0 * half_length / n_elems as f64;
    let nodes = (0..=n_elems).map(|i| -half_length + i as f64 * h).collect();
    Ok(Mesh1D { half_length, n_elems, h, nodes })
}

impl Mesh1D {
    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elems + 1
    }

    /// Uniform element length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }
}

/// Nodal values of a piecewise-linear function on a [`Mesh1D`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(mesh: &Mesh1D) -> Self {
        NodalField { values: vec![0.0; mesh.n_nodes()] }
    }

    /// Interpolate `f` at the mesh nodes.
    pub fn from_fn(mesh: &Mesh1D, f: impl Fn(f64) -> f64) -> Self {
        NodalField { values: mesh.nodes().iter().map(|&x| f(x)).collect() }
    }

    /// Wrap an existing value vector; length must match the mesh.
    pub fn from_values(mesh: &Mesh1D, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), mesh.n_nodes(), "nodal vector length mismatch");
        NodalField { values }
    }

    /// Wrap a vector whose length is correct by construction (solver output).
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        NodalField { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// self += c * other
    pub fn axpy(&mut self, c: f64, other: &NodalField) {
        assert_eq!(self.len(), other.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in &mut self.values {
            *a *= c;
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.values.iter()
    }
}

impl std::ops::Index<usize> for NodalField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for NodalField {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Closed interval [a, b] inside the computational domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subdomain {
    pub a: f64,
    pub b: f64,
}

impl Subdomain {
    /// Validate [a, b] against the mesh domain.
    pub fn new(mesh: &Mesh1D, a: f64, b: f64) -> Result<Self, FemError> {
        let l = mesh.half_length();
        if !(a.is_finite() && b.is_finite()) || a >= b || a < -l || b > l {
            return Err(FemError::InvalidSubdomain { a, b, l });
        }
        Ok(Subdomain { a, b })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    /// Whole computational domain.
    pub fn full(mesh: &Mesh1D) -> Self {
        Subdomain { a: -mesh.half_length(), b: mesh.half_length() }
    }
}

// 2-point Gauss rule on [0, 1]: exact for polynomials up to degree 3.
const GAUSS2: [(f64, f64); 2] = [
    (0.211324865405187117745425609748, 0.5),
    (0.788675134594812882254574390252, 0.5),
];

// 3-point Gauss rule on [0, 1]: exact for polynomials up to degree 5.
const GAUSS3: [(f64, f64); 3] = [
    (0.112701665379258311482073460022, 0.277777777777777777777777777778),
    (0.5, 0.444444444444444444444444444444),
    (0.887298334620741688517926539978, 0.277777777777777777777777777778),
];

/// Tridiagonal mass matrix, no boundary modification:
/// interior row (h/6, 2h/3, h/6).
pub fn assemble_mass(mesh: &Mesh1D) -> BandedMatrix {
    let n = mesh.n_nodes();
    let h = mesh.h();
    let mut m = BandedMatrix::zeros(n, 1, 1);
    for e in 0..mesh.n_elems() {
        m.add(e, e, h / 3.0);
        m.add(e, e + 1, h / 6.0);
        m.add(e + 1, e, h / 6.0);
        m.add(e + 1, e + 1, h / 3.0);
    }
    m
}

/// Tridiagonal stiffness matrix for -d2/dx2, no boundary modification:
/// interior row (-1/h, 2/h, -1/h).
pub fn assemble_stiffness(mesh: &Mesh1D) -> BandedMatrix {
    let n = mesh.n_nodes();
    let h = mesh.h();
    let mut k = BandedMatrix::zeros(n, 1, 1);
    for e in 0..mesh.n_elems() {
        k.add(e, e, 1.0 / h);
        k.add(e, e + 1, -1.0 / h);
        k.add(e + 1, e, -1.0 / h);
        k.add(e + 1, e + 1, 1.0 / h);
    }
    k
}

/// Transport vector N(u)_i = (u u_x, phi_i), assembled element by element with
/// 2-point Gauss (the integrand is piecewise quadratic, so this is exact).
pub fn assemble_nonlinear(mesh: &Mesh1D, u: &NodalField) -> Vec<f64> {
    assert_eq!(u.len(), mesh.n_nodes());
    let h = mesh.h();
    let mut out = vec![0.0; mesh.n_nodes()];
    for e in 0..mesh.n_elems() {
        let (ua, ub) = (u[e], u[e + 1]);
        let du = (ub - ua) / h; // du/dx, constant on the element
        for (s, w) in GAUSS2 {
            let uval = ua + (ub - ua) * s;
            let common = w * h * uval * du;
            out[e] += common * (1.0 - s);
            out[e + 1] += common * s;
        }
    }
    out
}

/// Advection vector (a g_x, phi_i) for nodal coefficient `a` and nodal `g`.
/// Exact by 2-point Gauss (piecewise quadratic integrand).
pub fn assemble_advection(mesh: &Mesh1D, a: &NodalField, g: &NodalField) -> Vec<f64> {
    assert_eq!(a.len(), mesh.n_nodes());
    assert_eq!(g.len(), mesh.n_nodes());
    let h = mesh.h();
    let mut out = vec![0.0; mesh.n_nodes()];
    for e in 0..mesh.n_elems() {
        let dg = (g[e + 1] - g[e]) / h;
        for (s, w) in GAUSS2 {
            let aval = a[e] + (a[e + 1] - a[e]) * s;
            let common = w * h * aval * dg;
            out[e] += common * (1.0 - s);
            out[e + 1] += common * s;
        }
    }
    out
}

/// Conservative transport vector ((a g)_x, phi_i), assembled weakly as
/// -(a g, dphi_i/dx); the boundary terms vanish on the clamped space.
/// Exact by 2-point Gauss (piecewise cubic against a constant).
pub fn assemble_conservative_advection(mesh: &Mesh1D, a: &NodalField, g: &NodalField) -> Vec<f64> {
    assert_eq!(a.len(), mesh.n_nodes());
    assert_eq!(g.len(), mesh.n_nodes());
    let h = mesh.h();
    let mut out = vec![0.0; mesh.n_nodes()];
    for e in 0..mesh.n_elems() {
        // dphi_e/dx = -1/h, dphi_{e+1}/dx = 1/h on this element.
        let mut integral = 0.0;
        for (s, w) in GAUSS2 {
            let aval = a[e] + (a[e + 1] - a[e]) * s;
            let gval = g[e] + (g[e + 1] - g[e]) * s;
            integral += w * h * aval * gval;
        }
        out[e] += integral / h;
        out[e + 1] -= integral / h;
    }
    out
}

/// Product load vector (p q, phi_i) for two nodal fields.
/// Exact by 2-point Gauss (piecewise cubic integrand).
pub fn assemble_product_load(mesh: &Mesh1D, p: &NodalField, q: &NodalField) -> Vec<f64> {
    assert_eq!(p.len(), mesh.n_nodes());
    assert_eq!(q.len(), mesh.n_nodes());
    let h = mesh.h();
    let mut out = vec![0.0; mesh.n_nodes()];
    for e in 0..mesh.n_elems() {
        for (s, w) in GAUSS2 {
            let pv = p[e] + (p[e + 1] - p[e]) * s;
            let qv = q[e] + (q[e + 1] - q[e]) * s;
            let common = w * h * pv * qv;
            out[e] += common * (1.0 - s);
            out[e + 1] += common * s;
        }
    }
    out
}

/// Load vector (f, phi_i) for a pointwise function, 3-point Gauss per element.
pub fn assemble_load(mesh: &Mesh1D, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = mesh.h();
    let mut out = vec![0.0; mesh.n_nodes()];
    for e in 0..mesh.n_elems() {
        let xa = mesh.node(e);
        for (s, w) in GAUSS3 {
            let fval = f(xa + s * h);
            out[e] += w * h * fval * (1.0 - s);
            out[e + 1] += w * h * fval * s;
        }
    }
    out
}

/// Nodal restriction to a subdomain: values at nodes outside [a, b] are
/// zeroed. Idempotent and linear.
pub fn restrict_indicator(mesh: &Mesh1D, sub: &Subdomain, g: &NodalField) -> NodalField {
    let mut out = g.clone();
    for (i, &x) in mesh.nodes().iter().enumerate() {
        if !sub.contains(x) {
            out[i] = 0.0;
        }
    }
    out
}

/// (max |g_i|, sqrt(g' M g)): discrete max norm and L2 norm of the
/// piecewise-linear interpolant.
pub fn norms(mesh: &Mesh1D, g: &NodalField) -> (f64, f64) {
    assert_eq!(g.len(), mesh.n_nodes());
    let linf = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let m = assemble_mass(mesh);
    let mg = m.matvec(g.as_slice());
    let sq: f64 = g.iter().zip(&mg).map(|(a, b)| a * b).sum();
    (linf, sq.max(0.0).sqrt())
}

/// L2 inner product (p, q) via the mass matrix.
pub fn mass_inner(mass: &BandedMatrix, p: &NodalField, q: &NodalField) -> f64 {
    let mq = mass.matvec(q.as_slice());
    p.iter().zip(&mq).map(|(a, b)| a * b).sum()
}

/// Project the elementwise-constant derivative of `g` back to a nodal field
/// by solving M q = (g_x, phi_i).
pub fn derivative_projection(mesh: &Mesh1D, g: &NodalField) -> Result<NodalField, FemError> {
    assert_eq!(g.len(), mesh.n_nodes());
    let h = mesh.h();
    let mut rhs = vec![0.0; mesh.n_nodes()];
    for e in 0..mesh.n_elems() {
        // (g_x, phi) over the element: g_x constant, phi integrates to h/2.
        let dg = (g[e + 1] - g[e]) / h;
        rhs[e] += dg * h / 2.0;
        rhs[e + 1] += dg * h / 2.0;
    }
    let m = assemble_mass(mesh);
    let q = solve_banded(&m, &rhs)?;
    Ok(NodalField::from_values(mesh, q))
}
