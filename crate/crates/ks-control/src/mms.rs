//! Manufactured-solution error studies.
//!
//! Given a smooth exact solution u(x, t), the matching forcing
//! f = u_t + u_xxxx + u_xx + u u_x is derived numerically with high-order
//! centered difference stencils, the forward solver is run against it, and
//! the terminal error is reported in the max and L2 norms.

use crate::fem::{assemble_load, build_mesh, norms, NodalField};
use crate::forward::{forward_sweep, ForwardProblem, TimeGrid, WBoundary};
use crate::SolveError;
use std::sync::Arc;

/// Exact solution of a manufactured problem on (-L, L) x (0, T).
#[derive(Clone)]
pub struct ManufacturedCase {
    pub half_length: f64,
    pub t_final: f64,
    /// u(x, t); must satisfy u = u_x = 0 at x = +-L and be smooth in a
    /// neighborhood of the closed domain (the stencils sample past the ends).
    pub u: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    /// Impose the exact curvature of `u` as boundary data for the auxiliary
    /// variable w = u_xx instead of the homogeneous default.
    pub exact_w_boundary: bool,
}

impl ManufacturedCase {
    /// The reference case: u(x, t) = (1 + t) sin^2(pi x / L), which grows
    /// linearly in time and satisfies the clamped boundary conditions.
    pub fn growing_sine_squared(half_length: f64, t_final: f64) -> Self {
        let k = std::f64::consts::PI / half_length;
        ManufacturedCase {
            half_length,
            t_final,
            u: Arc::new(move |x, t| (1.0 + t) * (k * x).sin().powi(2)),
            exact_w_boundary: true,
        }
    }
}

// Stencil half-widths: 13 points in space (order >= 8 for the fourth
// derivative), 9 points in time (order 8 for the first derivative).
const SPACE_HALF: usize = 6;
const TIME_HALF: usize = 4;
// Steps chosen to balance truncation against f64 roundoff in the fourth
// derivative (eps / hx^4 grows quickly as hx shrinks).
const SPACE_STEP: f64 = 0.1;
const TIME_STEP: f64 = 0.05;

/// Finite-difference weights (Fornberg recurrence): returns `w[k][j]` such
/// that the k-th derivative at `x0` is approximated by sum_j w[k][j] f(xs[j]).
pub fn fd_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    assert!(n > max_order, "need more points than the derivative order");
    let mut c = vec![vec![0.0f64; max_order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    // Transpose to weights-per-order.
    (0..=max_order).map(|k| (0..n).map(|j| c[j][k]).collect()).collect()
}

/// Derived forcing f = u_t + u_xxxx + u_xx + u u_x, evaluated pointwise with
/// centered stencils on the smooth extension of `u`.
pub struct DerivedForcing {
    case: ManufacturedCase,
    wx: Vec<Vec<f64>>,
    wt: Vec<Vec<f64>>,
}

/// Build the forcing evaluator for a manufactured case.
pub fn derive_forcing(case: &ManufacturedCase) -> DerivedForcing {
    let xs: Vec<f64> =
        (0..=2 * SPACE_HALF).map(|j| (j as f64 - SPACE_HALF as f64) * SPACE_STEP).collect();
    let ts: Vec<f64> =
        (0..=2 * TIME_HALF).map(|j| (j as f64 - TIME_HALF as f64) * TIME_STEP).collect();
    DerivedForcing { case: case.clone(), wx: fd_weights(0.0, &xs, 4), wt: fd_weights(0.0, &ts, 1) }
}

impl DerivedForcing {
    /// (u, u_x, u_xx, u_xxxx) at (x, t).
    fn space_derivs(&self, x: f64, t: f64) -> (f64, f64, f64, f64) {
        let u = &self.case.u;
        let mut d = [0.0f64; 5];
        for j in 0..=2 * SPACE_HALF {
            let val = u(x + (j as f64 - SPACE_HALF as f64) * SPACE_STEP, t);
            d[0] += self.wx[0][j] * val;
            d[1] += self.wx[1][j] * val;
            d[2] += self.wx[2][j] * val;
            d[4] += self.wx[4][j] * val;
        }
        (d[0], d[1], d[2], d[4])
    }

    fn u_t(&self, x: f64, t: f64) -> f64 {
        let u = &self.case.u;
        (0..=2 * TIME_HALF)
            .map(|j| self.wt[1][j] * u(x, t + (j as f64 - TIME_HALF as f64) * TIME_STEP))
            .sum()
    }

    /// Exact curvature u_xx at (x, t), used for the w boundary data.
    pub fn u_xx(&self, x: f64, t: f64) -> f64 {
        self.space_derivs(x, t).2
    }

    /// f(x, t) such that the manufactured u solves the equation.
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let (u, ux, uxx, uxxxx) = self.space_derivs(x, t);
        self.u_t(x, t) + uxxxx + uxx + u * ux
    }
}

/// Terminal-time errors of one run.
#[derive(Debug, Clone, Copy)]
pub struct ErrorRow {
    pub dt: f64,
    pub n_elems: usize,
    pub linf_error: f64,
    pub l2_error: f64,
    pub l2_error_squared: f64,
}

/// Run one manufactured case and report the terminal error norms.
pub fn run_case(
    case: &ManufacturedCase,
    n_elems: usize,
    dt: f64,
    theta: f64,
) -> Result<ErrorRow, SolveError> {
    let mesh = build_mesh(case.half_length, n_elems)?;
    let n_steps = (case.t_final / dt).round().max(1.0) as usize;
    let grid = TimeGrid::new(case.t_final, n_steps)?;
    let forcing = derive_forcing(case);
    let u0 = NodalField::from_fn(&mesh, |x| (case.u)(x, 0.0));
    let mut prob = ForwardProblem::new(&mesh, grid, theta, u0);
    if case.exact_w_boundary {
        let l = case.half_length;
        let fxx = derive_forcing(case);
        prob.w_bc = WBoundary::Prescribed(Box::new(move |t| (fxx.u_xx(-l, t), fxx.u_xx(l, t))));
    }
    // Stream the sweep: only the terminal level is needed.
    let mut terminal = NodalField::zeros(&mesh);
    let n_levels = grid.n_levels();
    forward_sweep(
        &prob,
        |n| assemble_load(&mesh, |x| forcing.eval(x, grid.time(n))),
        |n, u, _| {
            if n + 1 == n_levels {
                terminal = u.clone();
            }
        },
    )?;
    let exact = NodalField::from_fn(&mesh, |x| (case.u)(x, case.t_final));
    let mut err = terminal;
    err.axpy(-1.0, &exact);
    let (linf, l2) = norms(&mesh, &err);
    Ok(ErrorRow { dt: grid.dt(), n_elems, linf_error: linf, l2_error: l2, l2_error_squared: l2 * l2 })
}

/// One entry of a convergence sweep; failures are carried, not propagated.
#[derive(Debug)]
pub struct SweepEntry {
    pub dt: f64,
    pub n_elems: usize,
    pub outcome: Result<ErrorRow, SolveError>,
}

/// Cross-product sweep over time steps and mesh sizes. Individual run
/// failures are recorded in the entry instead of aborting the sweep.
pub fn convergence_table(
    case: &ManufacturedCase,
    dt_list: &[f64],
    n_elems_list: &[usize],
    theta: f64,
) -> Vec<SweepEntry> {
    let mut rows = Vec::with_capacity(dt_list.len() * n_elems_list.len());
    for &dt in dt_list {
        for &n in n_elems_list {
            rows.push(SweepEntry { dt, n_elems: n, outcome: run_case(case, n, dt, theta) });
        }
    }
    rows
}
