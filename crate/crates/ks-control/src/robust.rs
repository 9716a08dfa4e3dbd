//! Saddle-point iteration for the robust control layer.
//!
//! For a frozen leader field h the follower control v (supported on the
//! control region) and the worst-case disturbance psi (acting everywhere)
//! play the saddle-point problem of
//!
//! ```text
//! J_r(v, psi) = 1/2 iint_Od |u - u_d|^2 + ell^2/2 iint_O |v|^2
//!             - gamma^2/2 iint_Q |psi|^2,
//! ```
//!
//! subject to u_t + u_xxxx + u_xx + u u_x = h 1_omega + v 1_O + psi with
//! clamped boundary values. [`run_robust`] alternates an ascent step in psi
//! with a descent step in v; each iteration costs one state solve and one
//! adjoint solve, plus the line probes used to pick safe step sizes.
//!
//! Gradients come from the adjoint state z of the tracking term:
//! grad_v = (ell^2 v + z) 1_O and grad_psi = z - gamma^2 psi, so the
//! stationary pair is v = -z/ell^2 on the control region and
//! psi = z/gamma^2.

use crate::adjoint::{solve_adjoint_z, CoupledConfig, Domains};
use crate::fem::{
    assemble_nonlinear, mass_inner, restrict_indicator, Mesh1D, NodalField, Subdomain,
};
use crate::forward::{Discretization, SpaceTimeField, WBoundary};
use crate::SolveError;

/// Smallest admissible step size of either line.
pub const STEP_MIN: f64 = 1e-6;
/// Largest admissible step size of either line.
pub const STEP_MAX: f64 = 1.0;
/// Relative evaluation noise assumed when judging a merit decrease.
const NOISE_REL: f64 = 1e-13;
/// Fallback halvings before a line is declared stalled.
const MAX_HALVINGS: usize = 30;

/// The three pieces of the robust functional and their signed sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalBreakdown {
    /// 1/2 iint_Od |u - u_d|^2.
    pub tracking: f64,
    /// ell^2/2 iint_O |v|^2.
    pub control_cost: f64,
    /// gamma^2/2 iint_Q |psi|^2.
    pub disturbance_gain: f64,
    /// tracking + control_cost - disturbance_gain.
    pub total: f64,
}

impl FunctionalBreakdown {
    pub fn zero() -> Self {
        FunctionalBreakdown { tracking: 0.0, control_cost: 0.0, disturbance_gain: 0.0, total: 0.0 }
    }
}

/// Evaluate the robust functional with mass-matrix inner products in space
/// (fields restricted by the nodal indicators) and trapezoid weights in time.
pub fn eval_jr(
    disc: &Discretization,
    u: &SpaceTimeField,
    v: &SpaceTimeField,
    psi: &SpaceTimeField,
    u_d: &SpaceTimeField,
    domains: &Domains,
    cfg: &CoupledConfig,
) -> FunctionalBreakdown {
    let mesh = disc.mesh();
    let mass = disc.mass();
    let weights = disc.grid().trapezoid_weights();
    let mut tracking = 0.0;
    let mut control = 0.0;
    let mut gain = 0.0;
    for (n, wn) in weights.iter().enumerate() {
        let mut e = u.level(n).clone();
        e.axpy(-1.0, u_d.level(n));
        let de = restrict_indicator(mesh, &domains.track, &e);
        tracking += wn * mass_inner(mass, &de, &de);
        let dv = restrict_indicator(mesh, &domains.control, v.level(n));
        control += wn * mass_inner(mass, &dv, &dv);
        gain += wn * mass_inner(mass, psi.level(n), psi.level(n));
    }
    let tracking = 0.5 * tracking;
    let control_cost = 0.5 * cfg.ell * cfg.ell * control;
    let disturbance_gain = 0.5 * cfg.gamma * cfg.gamma * gain;
    FunctionalBreakdown {
        tracking,
        control_cost,
        disturbance_gain,
        total: tracking + control_cost - disturbance_gain,
    }
}

/// Gradient of J_r in the control: (ell^2 v + z) restricted to the control
/// region, so the stationary control is v = -z/ell^2 there. The initial
/// level carries no state coupling in the discrete scheme (loads arrive at
/// levels 1..=N), so its chain term vanishes and the stationary control is
/// plain zero there.
pub fn grad_v(
    mesh: &Mesh1D,
    z: &SpaceTimeField,
    v: &SpaceTimeField,
    ell: f64,
    control: &Subdomain,
) -> SpaceTimeField {
    let levels = (0..z.n_levels())
        .map(|n| {
            let mut g = v.level(n).clone();
            g.scale(ell * ell);
            if n > 0 {
                g.axpy(1.0, z.level(n));
            }
            restrict_indicator(mesh, control, &g)
        })
        .collect();
    SpaceTimeField::from_levels(levels)
}

/// Gradient of J_r in the disturbance: z - gamma^2 psi, so the stationary
/// disturbance is psi = z/gamma^2. As with [`grad_v`], the chain term
/// vanishes at the initial level.
pub fn grad_psi(z: &SpaceTimeField, psi: &SpaceTimeField, gamma: f64) -> SpaceTimeField {
    let mut g = z.clone();
    for val in g.level_mut(0).as_mut_slice() {
        *val = 0.0;
    }
    g.axpy(-(gamma * gamma), psi);
    g
}

/// Preconditioned scalar step update: the directional derivative is divided
/// by the gradient norm when the latter exceeds one, and the result is kept
/// inside (`STEP_MIN`, `STEP_MAX`).
pub fn step_size_update(prev: f64, grad_norm: f64, directional_derivative: f64) -> f64 {
    let raw = if grad_norm > 1.0 {
        prev - directional_derivative / grad_norm
    } else {
        prev - directional_derivative
    };
    raw.clamp(STEP_MIN, STEP_MAX)
}

/// Current iterate of the saddle-point iteration.
#[derive(Debug, Clone)]
pub struct RobustState {
    /// Follower control, zero outside the control region at every level.
    pub v: SpaceTimeField,
    /// Disturbance on the whole domain.
    pub psi: SpaceTimeField,
    /// State trajectory driven by (h, v, psi).
    pub u: SpaceTimeField,
    /// Adjoint of the tracking term along `u`.
    pub z: SpaceTimeField,
    /// Current disturbance step size.
    pub alpha: f64,
    /// Current control step size.
    pub beta_step: f64,
    /// Iteration index of this iterate.
    pub k: usize,
}

/// Per-iteration trace of [`run_robust`].
#[derive(Debug, Clone, Copy)]
pub struct RobustIteration {
    pub k: usize,
    /// J_r at the iterate the gradients were formed on.
    pub jr_before: f64,
    /// J_r after the disturbance ascent step.
    pub jr_after_psi: f64,
    /// Functional pieces after the control descent step.
    pub breakdown: FunctionalBreakdown,
    pub grad_v_norm: f64,
    pub grad_psi_norm: f64,
    /// Accepted disturbance step (0 when the line stalled).
    pub alpha_used: f64,
    /// Accepted control step (0 when the line stalled).
    pub beta_used: f64,
}

/// Outcome of a robust solve: final iterate, per-iteration trace and the
/// termination flag (`false` means the iteration budget ran out or both
/// line searches stalled at the evaluation noise floor).
#[derive(Debug, Clone)]
pub struct RobustRun {
    pub state: RobustState,
    pub iterations: Vec<RobustIteration>,
    pub converged: bool,
}

/// Iteration controls of [`run_robust`].
#[derive(Debug, Clone, Copy)]
pub struct RobustOptions {
    /// Termination threshold on ||grad_psi|| + ||grad_v|| in L2(Q).
    pub tol: f64,
    pub max_iter: usize,
    /// Initial disturbance step size.
    pub alpha0: f64,
    /// Initial control step size.
    pub beta0: f64,
}

impl Default for RobustOptions {
    fn default() -> Self {
        RobustOptions { tol: 1e-6, max_iter: 100, alpha0: 0.5, beta0: 0.5 }
    }
}

/// What a line search handed back.
struct LineOutcome<P> {
    /// Step applied to the iterate (0 when stalled).
    step: f64,
    /// Warm start for the next pass over this line.
    warm: f64,
    /// Cached evaluation at the accepted step.
    payload: Option<P>,
    stalled: bool,
}

/// Pick a step along one line of the saddle iteration.
///
/// `m0` is the merit at step zero, `g2` the squared gradient norm (the merit
/// slope at zero is -g2) and `merit(s)` evaluates a candidate, returning the
/// merit value and a payload to reuse on acceptance. Candidates are the warm
/// start, the minimizer of the quadratic model fitted through the warm probe,
/// and the preconditioned update seeded with a secant slope; the best one is
/// taken if it clears the evaluation noise floor. Near the saddle the merit
/// improvement sinks to within a few orders of the floor while the quadratic
/// model stays accurate, so a near-noise predicted gain is accepted on the
/// model alone; that keeps the gradient shrinking when individual merit
/// probes can no longer resolve the decrease.
/// Otherwise the warm step is halved until something improves; a line with
/// no acceptable step reports a stall and leaves the iterate unchanged.
fn pick_step<P>(
    m0: f64,
    g2: f64,
    grad_norm: f64,
    warm: f64,
    mut merit: impl FnMut(f64) -> Result<(f64, P), SolveError>,
) -> Result<LineOutcome<P>, SolveError> {
    let mut try_merit = |s: f64| match merit(s) {
        Ok(pair) => Ok(Some(pair)),
        // A probe that blows up just disqualifies the candidate.
        Err(SolveError::NonFinite { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let noise = NOISE_REL * (1.0 + m0.abs());
    let s1 = warm.clamp(STEP_MIN, STEP_MAX);
    let mut cands: Vec<(f64, f64, P)> = Vec::new();
    let mut quad: Option<(f64, f64)> = None;
    if let Some((m1, p1)) = try_merit(s1)? {
        let hess = 2.0 * (m1 - m0 + g2 * s1) / (s1 * s1);
        let f_prime = (m1 - m0) / s1;
        cands.push((s1, m1, p1));
        if hess > 0.0 && g2 > 0.0 {
            let s_q = (g2 / hess).clamp(STEP_MIN, STEP_MAX);
            if s_q.is_finite() {
                let predicted = g2 * s_q - 0.5 * hess * s_q * s_q;
                quad = Some((s_q, predicted));
            }
        }
        let s_u = step_size_update(s1, grad_norm, f_prime);
        let extra: Vec<f64> = quad.iter().map(|q| q.0).chain(std::iter::once(s_u)).collect();
        for s in extra {
            if cands.iter().all(|c| (c.0 - s).abs() > 1e-9 * c.0.max(s)) {
                if let Some((m, p)) = try_merit(s)? {
                    cands.push((s, m, p));
                }
            }
        }
    }

    let best = cands
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, c)| (i, c.1));
    if let Some((i, m)) = best {
        if m < m0 - noise {
            let (s, _, p) = cands.swap_remove(i);
            return Ok(LineOutcome { step: s, warm: s, payload: Some(p), stalled: false });
        }
    }

    if let Some((s_q, predicted)) = quad {
        if predicted > 0.0 && predicted <= 1e3 * noise {
            if let Some(i) =
                cands.iter().position(|c| (c.0 - s_q).abs() <= 1e-9 * c.0.max(s_q))
            {
                let (s, _, p) = cands.swap_remove(i);
                return Ok(LineOutcome { step: s, warm: s, payload: Some(p), stalled: false });
            }
        }
    }

    let mut s = 0.5 * s1;
    for _ in 0..MAX_HALVINGS {
        if s < STEP_MIN {
            break;
        }
        if let Some((m, p)) = try_merit(s)? {
            if m < m0 - noise {
                return Ok(LineOutcome { step: s, warm: s, payload: Some(p), stalled: false });
            }
        }
        s *= 0.5;
    }
    Ok(LineOutcome { step: 0.0, warm, payload: None, stalled: true })
}

/// Run the alternating saddle-point iteration from v = psi = 0.
///
/// Each iteration solves the state for the current pair, solves the tracking
/// adjoint, forms both gradients and — unless their L2(Q) norms already sum
/// below `opts.tol` — takes an ascent step in psi followed by a descent step
/// in v, with step sizes picked by the safeguarded line search. When the
/// budget runs out (or both lines stall) the best iterate seen, measured by
/// the gradient norm sum, is returned with `converged = false`.
pub fn run_robust(
    disc: &Discretization,
    u0: &NodalField,
    h: Option<&SpaceTimeField>,
    u_d: &SpaceTimeField,
    domains: &Domains,
    cfg: &CoupledConfig,
    opts: &RobustOptions,
) -> Result<RobustRun, SolveError> {
    let mesh = disc.mesh();
    let grid = *disc.grid();
    let h_masked: Option<SpaceTimeField> = h.map(|field| {
        let omega = domains.omega.expect("leader field given without its support");
        let levels = (0..field.n_levels())
            .map(|n| restrict_indicator(mesh, &omega, field.level(n)))
            .collect();
        SpaceTimeField::from_levels(levels)
    });

    let solve_state = |v: &SpaceTimeField, psi: &SpaceTimeField| {
        let mut levels = Vec::with_capacity(grid.n_levels());
        disc.sweep(
            u0,
            &WBoundary::Homogeneous,
            |_, y| assemble_nonlinear(mesh, y),
            |n| {
                // g = h 1_omega + v 1_O + psi, load = M g.
                let mut g = restrict_indicator(mesh, &domains.control, v.level(n));
                g.axpy(1.0, psi.level(n));
                if let Some(hm) = &h_masked {
                    g.axpy(1.0, hm.level(n));
                }
                disc.mass().matvec(g.as_slice())
            },
            |_, y, _| levels.push(y.clone()),
        )?;
        Ok::<_, SolveError>(SpaceTimeField::from_levels(levels))
    };
    let evaluate = |v: &SpaceTimeField, psi: &SpaceTimeField| {
        let u = solve_state(v, psi)?;
        let b = eval_jr(disc, &u, v, psi, u_d, domains, cfg);
        Ok::<_, SolveError>((u, b))
    };

    let mut v = SpaceTimeField::zeros(mesh, &grid);
    let mut psi = SpaceTimeField::zeros(mesh, &grid);
    let (mut u, mut breakdown) = evaluate(&v, &psi)?;
    let mut alpha = opts.alpha0.clamp(STEP_MIN, STEP_MAX);
    let mut beta_step = opts.beta0.clamp(STEP_MIN, STEP_MAX);
    let mut iterations = Vec::new();
    let mut best: Option<(f64, RobustState)> = None;

    for k in 0..=opts.max_iter {
        let z = solve_adjoint_z(disc, &u, u_d, &domains.track)?;
        let gv = grad_v(mesh, &z, &v, cfg.ell, &domains.control);
        let gpsi = grad_psi(&z, &psi, cfg.gamma);
        let gv_norm = disc.l2q(&gv);
        let gpsi_norm = disc.l2q(&gpsi);
        let grad_sum = gv_norm + gpsi_norm;

        if best.as_ref().map_or(true, |(s, _)| grad_sum < *s) {
            let snapshot = RobustState {
                v: v.clone(),
                psi: psi.clone(),
                u: u.clone(),
                z: z.clone(),
                alpha,
                beta_step,
                k,
            };
            best = Some((grad_sum, snapshot));
        }
        if grad_sum < opts.tol {
            let state =
                RobustState { v, psi, u, z, alpha, beta_step, k };
            return Ok(RobustRun { state, iterations, converged: true });
        }
        if k == opts.max_iter {
            break;
        }

        let jr_before = breakdown.total;

        // Ascent in psi: maximize J_r along psi + s * gpsi.
        let psi_line = pick_step(
            -breakdown.total,
            gpsi_norm * gpsi_norm,
            gpsi_norm,
            alpha,
            |s| {
                let mut cand = psi.clone();
                cand.axpy(s, &gpsi);
                let (u_c, b_c) = evaluate(&v, &cand)?;
                Ok((-b_c.total, (cand, u_c, b_c)))
            },
        )?;
        alpha = psi_line.warm;
        if let Some((cand, u_c, b_c)) = psi_line.payload {
            psi = cand;
            u = u_c;
            breakdown = b_c;
        }
        let jr_after_psi = breakdown.total;

        // Descent in v: minimize J_r along v - s * gv at the updated psi.
        let v_line = pick_step(
            breakdown.total,
            gv_norm * gv_norm,
            gv_norm,
            beta_step,
            |s| {
                let mut cand = v.clone();
                cand.axpy(-s, &gv);
                let (u_c, b_c) = evaluate(&cand, &psi)?;
                Ok((b_c.total, (cand, u_c, b_c)))
            },
        )?;
        beta_step = v_line.warm;
        if let Some((cand, u_c, b_c)) = v_line.payload {
            v = cand;
            u = u_c;
            breakdown = b_c;
        }

        iterations.push(RobustIteration {
            k,
            jr_before,
            jr_after_psi,
            breakdown,
            grad_v_norm: gv_norm,
            grad_psi_norm: gpsi_norm,
            alpha_used: psi_line.step,
            beta_used: v_line.step,
        });

        if psi_line.stalled && v_line.stalled {
            break;
        }
    }

    let (_, state) = best.expect("at least one iterate is always recorded");
    Ok(RobustRun { state, iterations, converged: false })
}
