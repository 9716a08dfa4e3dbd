//! Outer leader loop: steer the terminal state toward a target trajectory.
//!
//! The leader control `h` acts on a region `omega` and is chosen to minimize
//! the penalized functional
//!
//! ```text
//! G(h) = beta/2 * ||u(T) - ubar(T)||^2  +  1/2 * ||h||^2_{L2(omega x (0,T))}
//! ```
//!
//! where `u = u(h)` is the state of the coupled system of [`crate::adjoint`]:
//! for each `h` the follower control and the worst-case disturbance are
//! already substituted by their saddle characterization through the
//! multiplier `z`, so the inner game never has to be iterated here. One outer
//! iteration solves the coupled state, solves the adjoint pair `(phi1, phi2)`
//! seeded with the terminal misfit, forms the gradient `(h - phi1) 1_omega`,
//! and takes a backtracking step along its negative.

use crate::adjoint::{solve_adjoint_pair, solve_coupled_uz, CoupledConfig, Domains};
use crate::fem::{mass_inner, restrict_indicator, Mesh1D, NodalField, Subdomain};
use crate::forward::{Discretization, SpaceTimeField};
use crate::SolveError;

/// Armijo sufficient-decrease factor of the leader line search.
const ARMIJO_C: f64 = 1e-4;
/// Halvings tried before the leader line search reports a stall.
const MAX_HALVINGS: usize = 30;

/// Parameters of the outer leader iteration.
#[derive(Debug, Clone, Copy)]
pub struct RscConfig {
    /// Weight of the terminal penalty in the functional.
    pub beta: f64,
    /// Relative gradient tolerance: stop once the gradient norm has dropped
    /// to `tol` times its value at the starting leader control.
    pub tol: f64,
    /// Cap on outer iterations; `0` evaluates the starting control only.
    pub max_outer: usize,
    /// Re-run twice with a tenfold penalty, warm-starting from the previous
    /// leader control. Helps when a small `beta` leaves the terminal term
    /// too weak to shape the early iterates.
    pub beta_continuation: bool,
}

impl Default for RscConfig {
    fn default() -> Self {
        RscConfig { beta: 1e-7, tol: 1e-3, max_outer: 100, beta_continuation: false }
    }
}

/// Final iterate of the outer loop with the fields used to produce it.
#[derive(Debug, Clone)]
pub struct RscState {
    /// Leader control, zero outside its support region.
    pub h: SpaceTimeField,
    /// Coupled state and multiplier at this leader control.
    pub u: SpaceTimeField,
    pub z: SpaceTimeField,
    /// Adjoint pair of the outer gradient.
    pub phi1: SpaceTimeField,
    pub phi2: SpaceTimeField,
    /// ||u(T) - ubar(T)|| in the spatial L2 norm.
    pub terminal_error: f64,
}

/// Trace of one outer iterate (recorded before the update that leaves it).
#[derive(Debug, Clone, Copy)]
pub struct RscIteration {
    pub k: usize,
    /// Penalized functional at the iterate.
    pub g_value: f64,
    /// Space-time norm of the outer gradient.
    pub grad_norm: f64,
    pub terminal_error: f64,
    /// Accepted step of the line search leaving this iterate; zero when the
    /// iterate is terminal (converged, stalled or out of budget).
    pub alpha: f64,
    /// Fixed-point iterations of the coupled state solve at this iterate.
    pub picard_iters: usize,
    /// Penalty in force at this iterate (varies under continuation).
    pub beta: f64,
}

/// Outcome of the outer loop: final iterate, per-iteration trace, and
/// whether the gradient tolerance was met within the budget.
#[derive(Debug, Clone)]
pub struct RscRun {
    pub state: RscState,
    pub iterations: Vec<RscIteration>,
    pub converged: bool,
}

/// Penalized functional: terminal misfit plus the leader's quadratic cost.
/// `u` must be the coupled state solved at this `h`.
pub fn eval_g(
    disc: &Discretization,
    h: &SpaceTimeField,
    u: &SpaceTimeField,
    ubar: &SpaceTimeField,
    beta: f64,
    omega: &Subdomain,
) -> f64 {
    let mut e = u.terminal().clone();
    e.axpy(-1.0, ubar.terminal());
    let masked = mask_to(disc.mesh(), omega, h);
    let cost = disc.l2q(&masked);
    0.5 * beta * mass_inner(disc.mass(), &e, &e) + 0.5 * cost * cost
}

/// Spatial L2 distance between the terminal state and the target's.
pub fn terminal_error(disc: &Discretization, u: &SpaceTimeField, ubar: &SpaceTimeField) -> f64 {
    let mut e = u.terminal().clone();
    e.axpy(-1.0, ubar.terminal());
    mass_inner(disc.mass(), &e, &e).sqrt()
}

/// Outer gradient `(h - phi1)` restricted to the leader region. The initial
/// level carries no state coupling in the discrete scheme, so only the
/// quadratic cost contributes there.
pub fn grad_g(
    mesh: &Mesh1D,
    h: &SpaceTimeField,
    phi1: &SpaceTimeField,
    omega: &Subdomain,
) -> SpaceTimeField {
    let levels = (0..h.n_levels())
        .map(|n| {
            let mut g = h.level(n).clone();
            if n > 0 {
                g.axpy(-1.0, phi1.level(n));
            }
            restrict_indicator(mesh, omega, &g)
        })
        .collect();
    SpaceTimeField::from_levels(levels)
}

/// Backtracking line search along the negative gradient. Starting from a
/// unit step, the step is halved until the trial functional satisfies the
/// sufficient-decrease bound `g(alpha) <= g0 - c * alpha * |grad|^2`, for at
/// most [`MAX_HALVINGS`] halvings. Returns the accepted step and the trial
/// payload, `(0.0, None)` when no step is acceptable, and `(1.0, None)` for
/// a zero direction (the caller should have terminated already). Trial
/// evaluations that blow up or fail to settle only disqualify that step.
pub fn line_search_alpha<P>(
    g0: f64,
    grad_norm_sq: f64,
    mut eval: impl FnMut(f64) -> Result<(f64, P), SolveError>,
) -> Result<(f64, Option<P>), SolveError> {
    if grad_norm_sq == 0.0 {
        return Ok((1.0, None));
    }
    let mut alpha = 1.0;
    for _ in 0..=MAX_HALVINGS {
        match eval(alpha) {
            Ok((g, payload)) => {
                if g <= g0 - ARMIJO_C * alpha * grad_norm_sq {
                    return Ok((alpha, Some(payload)));
                }
            }
            // A step that destabilizes the state or the fixed point is
            // disqualified, not fatal; a shorter one may still settle.
            Err(SolveError::NonFinite { .. }) | Err(SolveError::PicardDiverged { .. }) => {}
            Err(e) => return Err(e),
        }
        alpha *= 0.5;
    }
    Ok((0.0, None))
}

fn mask_to(mesh: &Mesh1D, omega: &Subdomain, f: &SpaceTimeField) -> SpaceTimeField {
    SpaceTimeField::from_levels(
        (0..f.n_levels()).map(|n| restrict_indicator(mesh, omega, f.level(n))).collect(),
    )
}

/// Run the outer leader iteration from `h = 0`.
///
/// `ubar` is the target trajectory; `u_d` is the tracked trajectory of the
/// inner game and defaults to `ubar` (its restriction to the observation
/// region is applied by the solvers). Termination is relative: the loop
/// stops once the gradient norm falls below `tol` times its starting value,
/// so the criterion is meaningful for any penalty scale. With
/// `max_outer = 0` the run reports the uncontrolled coupled solve.
pub fn run_rsc(
    disc: &Discretization,
    u0: &NodalField,
    ubar: &SpaceTimeField,
    u_d: Option<&SpaceTimeField>,
    domains: &Domains,
    cfg: &CoupledConfig,
    rsc: &RscConfig,
) -> Result<RscRun, SolveError> {
    let u_d = u_d.unwrap_or(ubar);
    let h0 = SpaceTimeField::zeros(disc.mesh(), disc.grid());
    if !rsc.beta_continuation {
        return run_stage(disc, u0, h0, ubar, u_d, domains, cfg, rsc.beta, rsc, 0);
    }
    let mut run = run_stage(disc, u0, h0, ubar, u_d, domains, cfg, rsc.beta, rsc, 0)?;
    for scale in [10.0, 100.0] {
        let offset = run.iterations.last().map_or(0, |it| it.k + 1);
        let stage = run_stage(
            disc,
            u0,
            run.state.h,
            ubar,
            u_d,
            domains,
            cfg,
            rsc.beta * scale,
            rsc,
            offset,
        )?;
        run.state = stage.state;
        run.iterations.extend(stage.iterations);
        run.converged = stage.converged;
    }
    Ok(run)
}

#[allow(clippy::too_many_arguments)]
fn run_stage(
    disc: &Discretization,
    u0: &NodalField,
    h0: SpaceTimeField,
    ubar: &SpaceTimeField,
    u_d: &SpaceTimeField,
    domains: &Domains,
    cfg: &CoupledConfig,
    beta: f64,
    rsc: &RscConfig,
    k_offset: usize,
) -> Result<RscRun, SolveError> {
    let mesh = disc.mesh();
    let omega = domains.omega.as_ref().expect("outer loop needs a leader region");

    let solve_at = |h: &SpaceTimeField| -> Result<(SpaceTimeField, SpaceTimeField, usize, f64), SolveError> {
        let (u, z, iters) = solve_coupled_uz(disc, u0, Some(h), u_d, domains, cfg)?;
        let g_val = eval_g(disc, h, &u, ubar, beta, omega);
        Ok((u, z, iters, g_val))
    };
    let pair_at = |u: &SpaceTimeField,
                   z: &SpaceTimeField|
     -> Result<(SpaceTimeField, SpaceTimeField), SolveError> {
        let mut terminal = u.terminal().clone();
        terminal.axpy(-1.0, ubar.terminal());
        terminal.scale(-beta);
        let (p1, p2, _) = solve_adjoint_pair(disc, u, z, &terminal, domains, cfg)?;
        Ok((p1, p2))
    };

    let mut h = mask_to(mesh, omega, &h0);
    let (mut u, mut z, mut picard_iters, mut g_val) = solve_at(&h)?;
    let (mut phi1, mut phi2) = pair_at(&u, &z)?;
    let mut grad = grad_g(mesh, &h, &phi1, omega);
    let mut grad_norm = disc.l2q(&grad);
    let g0_norm = grad_norm;

    let mut iterations = Vec::new();
    let mut converged = false;
    for k in 0..=rsc.max_outer {
        let mut row = RscIteration {
            k: k_offset + k,
            g_value: g_val,
            grad_norm,
            terminal_error: terminal_error(disc, &u, ubar),
            alpha: 0.0,
            picard_iters,
            beta,
        };
        if grad_norm <= rsc.tol * g0_norm {
            converged = true;
            iterations.push(row);
            break;
        }
        if k == rsc.max_outer {
            iterations.push(row);
            break;
        }

        let (alpha, payload) = line_search_alpha(g_val, grad_norm * grad_norm, |a| {
            let mut trial = h.clone();
            trial.axpy(-a, &grad);
            let solved = solve_at(&trial)?;
            Ok((solved.3, (trial, solved)))
        })?;
        let Some((trial, solved)) = payload else {
            // Stalled: no step produced sufficient decrease.
            iterations.push(row);
            break;
        };
        row.alpha = alpha;
        iterations.push(row);

        h = trial;
        (u, z, picard_iters, g_val) = solved;
        (phi1, phi2) = pair_at(&u, &z)?;
        grad = grad_g(mesh, &h, &phi1, omega);
        grad_norm = disc.l2q(&grad);
    }

    let terminal_err = terminal_error(disc, &u, ubar);
    Ok(RscRun {
        state: RscState { h, u, z, phi1, phi2, terminal_error: terminal_err },
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_mesh;
    use crate::forward::TimeGrid;

    fn setup(n_elems: usize, n_steps: usize, t_final: f64) -> (Mesh1D, TimeGrid) {
        let mesh = build_mesh(30.0, n_elems).unwrap();
        let grid = TimeGrid::new(t_final, n_steps).unwrap();
        (mesh, grid)
    }

    fn leader_domains(mesh: &Mesh1D) -> Domains {
        Domains {
            omega: Some(Subdomain::new(mesh, -3.0, 1.0).unwrap()),
            control: Subdomain::new(mesh, 2.0, 5.0).unwrap(),
            track: Subdomain::full(mesh),
        }
    }

    #[test]
    fn functional_balances_terminal_and_cost_terms() {
        let (mesh, grid) = setup(12, 4, 1.0);
        let disc = Discretization::new(&mesh, grid, 0.75).unwrap();
        let omega = Subdomain::new(&mesh, -3.0, 1.0).unwrap();
        let ubar = SpaceTimeField::zeros(&mesh, &grid);
        let u = SpaceTimeField::from_fn(&mesh, &grid, |x, t| t * (0.1 * x).sin());
        let h = SpaceTimeField::from_fn(&mesh, &grid, |x, _| if x.abs() < 3.0 { 1.0 } else { 0.0 });
        let beta = 0.5;

        let mut e = u.terminal().clone();
        e.axpy(-1.0, ubar.terminal());
        let masked = mask_to(&mesh, &omega, &h);
        let expected =
            0.5 * beta * mass_inner(disc.mass(), &e, &e) + 0.5 * disc.l2q(&masked).powi(2);
        let got = eval_g(&disc, &h, &u, &ubar, beta, &omega);
        assert!((got - expected).abs() <= 1e-15 * expected.abs());
        assert!(got > 0.0);
    }

    #[test]
    fn gradient_reduces_to_h_without_adjoint_and_vanishes_at_stationarity() {
        let (mesh, grid) = setup(12, 4, 1.0);
        let omega = Subdomain::new(&mesh, -3.0, 1.0).unwrap();
        let h = SpaceTimeField::from_fn(&mesh, &grid, |x, t| (0.2 * x).cos() + t);
        let zero = SpaceTimeField::zeros(&mesh, &grid);

        let g = grad_g(&mesh, &h, &zero, &omega);
        for n in 0..grid.n_levels() {
            let want = restrict_indicator(&mesh, &omega, h.level(n));
            for (a, b) in g.level(n).iter().zip(want.iter()) {
                assert!((a - b).abs() < 1e-15);
            }
        }

        // h equal to the adjoint on omega (past the initial level) is a
        // stationary point of the penalized functional.
        let phi1 = SpaceTimeField::from_fn(&mesh, &grid, |x, t| (0.3 * x).sin() * (1.0 + t));
        let levels = (0..grid.n_levels())
            .map(|n| {
                if n == 0 {
                    NodalField::zeros(&mesh)
                } else {
                    restrict_indicator(&mesh, &omega, phi1.level(n))
                }
            })
            .collect();
        let stat = SpaceTimeField::from_levels(levels);
        let g = grad_g(&mesh, &stat, &phi1, &omega);
        assert!(g.max_abs() < 1e-15);
    }

    #[test]
    fn line_search_accepts_half_for_a_quadratic_with_minimizer_at_0_3() {
        // g(alpha) = g0 - d*alpha + d*alpha^2/0.6 has its minimum at 0.3;
        // the unit step increases g, the first halving satisfies the bound.
        let g0 = 2.0;
        let d = 0.7;
        let (alpha, payload) =
            line_search_alpha(g0, d, |a| Ok::<_, SolveError>((g0 - d * a + d * a * a / 0.6, ())))
                .unwrap();
        assert_eq!(alpha, 0.5);
        assert!(payload.is_some());
    }

    #[test]
    fn line_search_reports_stall_and_zero_direction() {
        // Ascent direction: every trial increases the functional.
        let (alpha, payload) =
            line_search_alpha(1.0, 1.0, |a| Ok::<_, SolveError>((1.0 + a, ()))).unwrap();
        assert_eq!(alpha, 0.0);
        assert!(payload.is_none());

        let (alpha, payload) =
            line_search_alpha(1.0, 0.0, |_| Ok::<_, SolveError>((1.0, ()))).unwrap();
        assert_eq!(alpha, 1.0);
        assert!(payload.is_none());
    }

    #[test]
    fn run_terminates_immediately_when_the_target_is_already_met() {
        let (mesh, grid) = setup(16, 6, 0.5);
        let disc = Discretization::new(&mesh, grid, 0.75).unwrap();
        let domains = leader_domains(&mesh);
        let u0 = NodalField::zeros(&mesh);
        let ubar = SpaceTimeField::zeros(&mesh, &grid);
        let run = run_rsc(
            &disc,
            &u0,
            &ubar,
            None,
            &domains,
            &CoupledConfig::default(),
            &RscConfig::default(),
        )
        .unwrap();
        assert!(run.converged);
        assert_eq!(run.iterations.len(), 1);
        assert!(run.state.h.max_abs() == 0.0);
        assert!(run.state.terminal_error < 1e-14);
    }

    #[test]
    fn zero_budget_reproduces_the_uncontrolled_coupled_solve() {
        let (mesh, grid) = setup(16, 8, 0.5);
        let disc = Discretization::new(&mesh, grid, 0.75).unwrap();
        let domains = leader_domains(&mesh);
        let u0 = NodalField::from_fn(&mesh, |x| 1e-3 * (-x * x).exp());
        let ubar = SpaceTimeField::zeros(&mesh, &grid);
        let cfg = CoupledConfig::default();
        let rsc = RscConfig { max_outer: 0, ..RscConfig::default() };
        let run = run_rsc(&disc, &u0, &ubar, None, &domains, &cfg, &rsc).unwrap();
        let (u_ref, z_ref, _) =
            solve_coupled_uz(&disc, &u0, None, &ubar, &domains, &cfg).unwrap();
        assert!(run.state.h.max_abs() == 0.0);
        for n in 0..grid.n_levels() {
            for (a, b) in run.state.u.level(n).iter().zip(u_ref.level(n).iter()) {
                assert_eq!(a, b);
            }
            for (a, b) in run.state.z.level(n).iter().zip(z_ref.level(n).iter()) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn leader_descends_the_functional_and_tightens_the_terminal_state() {
        let (mesh, grid) = setup(24, 10, 0.5);
        let disc = Discretization::new(&mesh, grid, 0.75).unwrap();
        let domains = leader_domains(&mesh);
        let u0 = NodalField::from_fn(&mesh, |x| 0.5 * (-x * x).exp());
        let ubar = SpaceTimeField::zeros(&mesh, &grid);
        let cfg = CoupledConfig::default();
        let rsc = RscConfig { beta: 1e-2, tol: 1e-2, max_outer: 25, ..RscConfig::default() };
        let run = run_rsc(&disc, &u0, &ubar, None, &domains, &cfg, &rsc).unwrap();

        let baseline = {
            let zero = RscConfig { max_outer: 0, ..rsc };
            run_rsc(&disc, &u0, &ubar, None, &domains, &cfg, &zero).unwrap().state.terminal_error
        };
        assert!(run.iterations.len() > 1, "no step was taken");
        for w in run.iterations.windows(2) {
            assert!(w[1].g_value <= w[0].g_value + 1e-15);
        }
        assert!(run.state.terminal_error < baseline);
        // The leader never acts outside its region.
        for n in 0..grid.n_levels() {
            for (i, &x) in mesh.nodes().iter().enumerate() {
                if !(-3.0..=1.0).contains(&x) {
                    assert_eq!(run.state.h.level(n).as_slice()[i], 0.0);
                }
            }
        }
    }
}
