//! Independent dense reference implementations used by the integration
//! tests: quadrature-based assembly (hat functions evaluated pointwise, no
//! element formulas shared with the library) and dense LU linear algebra.

#![allow(dead_code)]

use ks_control::fem::Mesh1D;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 5-point Gauss-Legendre nodes/weights on [-1, 1]; exact to degree 9,
/// far past any P1 integrand appearing in the assemblies.
const GAUSS5: [(f64, f64); 5] = [
    (-0.906179845938663992797626878299, 0.236926885056189087514264040720),
    (-0.538469310105683091036314420700, 0.478628670499366468041291514836),
    (0.0, 0.568888888888888888888888888889),
    (0.538469310105683091036314420700, 0.478628670499366468041291514836),
    (0.906179845938663992797626878299, 0.236926885056189087514264040720),
];

/// Hat function of node `i` evaluated at `x`.
pub fn hat(mesh: &Mesh1D, i: usize, x: f64) -> f64 {
    let h = mesh.h();
    let xi = mesh.node(i);
    let d = (x - xi).abs();
    if d >= h {
        0.0
    } else {
        1.0 - d / h
    }
}

/// Derivative of the hat function of node `i` at `x` (taken one-sided at the
/// node itself; quadrature points never land on nodes).
pub fn hat_dx(mesh: &Mesh1D, i: usize, x: f64) -> f64 {
    let h = mesh.h();
    let xi = mesh.node(i);
    if x <= xi - h || x >= xi + h {
        0.0
    } else if x < xi {
        1.0 / h
    } else {
        -1.0 / h
    }
}

/// Piecewise-linear interpolant of nodal values at `x`.
pub fn interp(mesh: &Mesh1D, values: &[f64], x: f64) -> f64 {
    values.iter().enumerate().map(|(i, &v)| v * hat(mesh, i, x)).sum()
}

/// Derivative of the interpolant at `x`.
pub fn interp_dx(mesh: &Mesh1D, values: &[f64], x: f64) -> f64 {
    values.iter().enumerate().map(|(i, &v)| v * hat_dx(mesh, i, x)).sum()
}

/// Integrate `f` over the mesh with 5-point Gauss per element.
pub fn integrate(mesh: &Mesh1D, f: impl Fn(f64) -> f64) -> f64 {
    let h = mesh.h();
    let mut total = 0.0;
    for e in 0..mesh.n_elems() {
        let mid = mesh.node(e) + h / 2.0;
        for (t, w) in GAUSS5 {
            total += w * h / 2.0 * f(mid + t * h / 2.0);
        }
    }
    total
}

/// Dense Galerkin matrix with entries integral of `kernel(i, j, x)`.
pub fn dense_matrix(mesh: &Mesh1D, kernel: impl Fn(usize, usize, f64) -> f64) -> Vec<Vec<f64>> {
    let n = mesh.n_nodes();
    (0..n)
        .map(|i| (0..n).map(|j| integrate(mesh, |x| kernel(i, j, x))).collect())
        .collect()
}

pub fn dense_mass(mesh: &Mesh1D) -> Vec<Vec<f64>> {
    dense_matrix(mesh, |i, j, x| hat(mesh, i, x) * hat(mesh, j, x))
}

pub fn dense_stiffness(mesh: &Mesh1D) -> Vec<Vec<f64>> {
    dense_matrix(mesh, |i, j, x| hat_dx(mesh, i, x) * hat_dx(mesh, j, x))
}

/// Dense load vector with entries integral of `density(x) * phi_i(x)`.
pub fn dense_vector(mesh: &Mesh1D, density: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..mesh.n_nodes())
        .map(|i| integrate(mesh, |x| density(x) * hat(mesh, i, x)))
        .collect()
}

// ---------------------------------------------------------------------------
// Dense linear algebra.

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            for j in 0..m {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = a[0].len();
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

/// Solve A x = b by dense LU with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&p, &q| m[p][k].abs().partial_cmp(&m[q][k].abs()).unwrap())
            .unwrap();
        assert!(m[piv][k].abs() > 1e-300, "dense oracle hit a singular matrix");
        m.swap(k, piv);
        x.swap(k, piv);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (x[i] - s) / m[i][i];
    }
    x
}

pub fn dense_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(dense_solve(a, &e));
    }
    transpose(&cols)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs_diff_mat(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(r, s)| max_abs_diff(r, s))
        .fold(0.0, f64::max)
}

pub fn random_values(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-amp..amp)).collect()
}

// ---------------------------------------------------------------------------
// Dense one-step reference for the interleaved scheme.

/// Advance (u_n, w_n) one step of the theta scheme with a pre-extrapolated
/// transport vector, solving the full 2n x 2n system densely:
///
/// ```text
/// [ M         dt theta B ] [u]   [ M u_n + dt(theta-1) B w_n - dt expl + dt load ]
/// [ K         M          ] [w] = [ 0                                             ]
/// ```
///
/// with B = M - K and Dirichlet row replacement (u = 0, w = w_bc) at both
/// boundary nodes.
pub fn dense_tab2_step(
    mesh: &Mesh1D,
    dt: f64,
    theta: f64,
    u_n: &[f64],
    w_n: &[f64],
    expl: &[f64],
    load: &[f64],
    w_bc: (f64, f64),
) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.n_nodes();
    let mass = dense_mass(mesh);
    let stiff = dense_stiffness(mesh);
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| mass[i][j] - stiff[i][j]).collect())
        .collect();

    let mut sys = vec![vec![0.0; 2 * n]; 2 * n];
    let mut rhs = vec![0.0; 2 * n];
    let mu = matvec(&mass, u_n);
    let bw = matvec(&b, w_n);
    for i in 0..n {
        for j in 0..n {
            sys[i][j] = mass[i][j];
            sys[i][n + j] = dt * theta * b[i][j];
            sys[n + i][j] = stiff[i][j];
            sys[n + i][n + j] = mass[i][j];
        }
        rhs[i] = mu[i] + dt * (theta - 1.0) * bw[i] - dt * expl[i] + dt * load[i];
    }
    for bnode in [0, n - 1] {
        for j in 0..2 * n {
            sys[bnode][j] = 0.0;
            sys[n + bnode][j] = 0.0;
        }
        sys[bnode][bnode] = 1.0;
        sys[n + bnode][n + bnode] = 1.0;
        rhs[bnode] = 0.0;
    }
    rhs[n] = w_bc.0;
    rhs[2 * n - 1] = w_bc.1;

    let sol = dense_solve(&sys, &rhs);
    (sol[..n].to_vec(), sol[n..].to_vec())
}

/// Dense reference for the consistent initialization M w = -K u0 with
/// Dirichlet rows carrying the prescribed boundary values.
pub fn dense_initial_w(mesh: &Mesh1D, u0: &[f64], w_bc: (f64, f64)) -> Vec<f64> {
    let n = mesh.n_nodes();
    let mut mass = dense_mass(mesh);
    let stiff = dense_stiffness(mesh);
    let mut rhs: Vec<f64> = matvec(&stiff, u0).iter().map(|v| -v).collect();
    for bnode in [0, n - 1] {
        for j in 0..n {
            mass[bnode][j] = 0.0;
        }
        mass[bnode][bnode] = 1.0;
    }
    rhs[0] = w_bc.0;
    rhs[n - 1] = w_bc.1;
    dense_solve(&mass, &rhs)
}
