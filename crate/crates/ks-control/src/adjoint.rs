//! Backward (adjoint) solvers and the coupled fixed-point systems.
//!
//! The adjoint state z of the tracking functional solves, backward in time,
//!
//! ```text
//! -z_t + z_xxxx + z_xx - u z_x = (u - u_d) 1_Od,   z(T) = 0,
//! ```
//!
//! which after the reversal tau = T - t is integrated with the *same* step
//! matrix as the forward problem; only the transport term and the sources
//! change. The u-Schur complement of the step block and its history operator
//! are symmetric, so stepping the reversed equation with the transposed
//! transport weave reproduces the exact discrete adjoint of the linearized
//! forward scheme: gradients assembled from these sweeps match finite
//! differences of the discrete functionals to rounding.
//!
//! Source terms arriving at level m carry the trapezoid weight of that level
//! (interior 1, the initial level 1/2); the terminal level's weighted source
//! is lifted into the recursion seed, while the stored terminal level keeps
//! the value that gradient reads pair with the full weight.

use crate::fem::{
    assemble_advection, assemble_conservative_advection, restrict_indicator, Mesh1D, NodalField,
    Subdomain,
};
use crate::forward::{Discretization, SpaceTimeField, WBoundary};
use crate::linalg::BandedMatrix;
use crate::SolveError;

/// Control geometry: the leader's support, the follower's support and the
/// observation region of the tracking term.
#[derive(Debug, Clone, Copy)]
pub struct Domains {
    /// Support of the leader control h (None when no leader acts).
    pub omega: Option<Subdomain>,
    /// Support of the follower control v.
    pub control: Subdomain,
    /// Observation region of the tracking term.
    pub track: Subdomain,
}

/// Weights and fixed-point controls shared by the coupled solvers.
#[derive(Debug, Clone, Copy)]
pub struct CoupledConfig {
    /// Follower control weight (the cost carries ell^2).
    pub ell: f64,
    /// Disturbance weight (the gain carries gamma^2).
    pub gamma: f64,
    /// Relative change threshold of the fixed-point iteration.
    pub picard_tol: f64,
    pub picard_max: usize,
    /// Damping of the fixed-point update; halved once if the residual grows.
    pub relaxation: f64,
}

impl Default for CoupledConfig {
    fn default() -> Self {
        CoupledConfig { ell: 40.0, gamma: 40.0, picard_tol: 1e-8, picard_max: 200, relaxation: 1.0 }
    }
}

/// Restriction followed by mass pairing followed by restriction:
/// the load vector of a tracking-type source supported on `sub`.
pub fn masked_mass_load(
    mesh: &Mesh1D,
    mass: &BandedMatrix,
    sub: &Subdomain,
    g: &NodalField,
) -> Vec<f64> {
    let inner = restrict_indicator(mesh, sub, g);
    let mut out = mass.matvec(inner.as_slice());
    for (i, &x) in mesh.nodes().iter().enumerate() {
        if !sub.contains(x) {
            out[i] = 0.0;
        }
    }
    out
}

/// Integrate a backward advected problem
///
/// ```text
/// -y_t + y_xxxx + y_xx - a y_x = s,    y(T) = terminal,
/// ```
///
/// where `a` is a frozen coefficient trajectory in real time and
/// `source_at(m)` is the assembled load of s arriving at real level
/// m = n_steps-1 .. 0, weighted by the caller with the trapezoid share of
/// that level. The recursion starts from `seed` (the exact adjoint value at
/// the terminal level: the lift of a terminal functional density, or half
/// the lifted terminal source of a distributed one) while the stored
/// terminal level keeps `stored_terminal`, the value gradient reads pair
/// with the full trapezoid weight.
///
/// The transport weave is the exact transpose of the forward driver's: the
/// forward scheme sends (3/2) N(u^n) - (1/2) N(u^{n-1}) into level n+1, so
/// the level-m backward equation receives the transposed transport
/// (3/2) T(m) y^{m+1} - (1/2) T(m) y^{m+2} with the coefficient frozen at
/// the *target* level and y^{N+1} = 0 (no bootstrap special case). With
/// that pairing and seeding, the sweep is the exact discrete adjoint of the
/// linearized forward map, so gradients built from it are exact up to
/// rounding everywhere the forward map actually couples (levels 1..=N).
pub fn backward_advected_sweep(
    disc: &Discretization,
    coeff: &SpaceTimeField,
    seed: &NodalField,
    stored_terminal: &NodalField,
    mut source_at: impl FnMut(usize) -> Vec<f64>,
) -> Result<SpaceTimeField, SolveError> {
    let n_steps = disc.grid().n_steps();
    let n_levels = disc.grid().n_levels();
    assert_eq!(coeff.n_levels(), n_levels, "coefficient trajectory level mismatch");
    let mesh = disc.mesh();
    let stepper = disc.stepper();
    let transport = |a: &NodalField, p: &NodalField| {
        let mut e = assemble_advection(mesh, a, p);
        for v in &mut e {
            *v = -*v;
        }
        e
    };
    let seed = seed.clone();
    let mut levels = vec![NodalField::zeros(mesh); n_levels];
    levels[n_steps] = stored_terminal.clone();
    let mut y = seed; // y^{m+1} while computing level m
    let mut q = stepper.initial_w(&y, (0.0, 0.0));
    let mut y_far: Option<NodalField> = None; // y^{m+2}
    for s in 1..=n_steps {
        let m = n_steps - s;
        let near = transport(coeff.level(m), &y);
        let mut ex: Vec<f64> = near.iter().map(|v| 1.5 * v).collect();
        if let Some(far) = &y_far {
            let t2 = transport(coeff.level(m), far);
            for (a, b) in ex.iter_mut().zip(&t2) {
                *a -= 0.5 * b;
            }
        }
        let load = source_at(m);
        let (y1, q1) = stepper.step(&y, &q, &ex, &load, (0.0, 0.0));
        if !y1.iter().all(|v| v.is_finite()) {
            return Err(SolveError::NonFinite { step: s });
        }
        y_far = Some(std::mem::replace(&mut y, y1));
        q = q1;
        levels[m] = y.clone();
    }
    Ok(SpaceTimeField::from_levels(levels))
}

/// Adjoint state of the tracking functional for a frozen state trajectory:
/// backward problem with source (u - u_d) restricted to the observation
/// region and homogeneous terminal value.
///
/// The terminal level's half trapezoid weight is carried by the recursion
/// seed, and the stored terminal level holds the lifted terminal source with
/// its full weight — the value gradient reads and the saddle feedback pair
/// with at that level.
pub fn solve_adjoint_z(
    disc: &Discretization,
    u: &SpaceTimeField,
    u_d: &SpaceTimeField,
    track: &Subdomain,
) -> Result<SpaceTimeField, SolveError> {
    let n_steps = disc.grid().n_steps();
    let mesh = disc.mesh();
    let mass = disc.mass();
    let misfit_load = |n: usize| {
        let mut e = u.level(n).clone();
        e.axpy(-1.0, u_d.level(n));
        masked_mass_load(mesh, mass, track, &e)
    };
    let mut stored = disc.stepper().lift_load(&misfit_load(n_steps));
    stored.scale(disc.grid().dt());
    let mut seed = stored.clone();
    seed.scale(0.5);
    let source_at = |n: usize| {
        let mut s = misfit_load(n);
        if n == 0 {
            for v in &mut s {
                *v *= 0.5;
            }
        }
        s
    };
    backward_advected_sweep(disc, u, &seed, &stored, source_at)
}

/// Solve the coupled state/adjoint system of the robust problem at its
/// saddle point: the state is forced by h 1_omega - ell^{-2} z 1_O
/// + gamma^{-2} z while z solves the tracking adjoint of that state.
///
/// Fixed-point iteration in z with damping (halved once if the residual
/// grows); the state is always the exact response to the current z, so the
/// returned pair satisfies the state equation exactly and the adjoint
/// equation to the fixed-point tolerance. Returns (u, z, iterations).
pub fn solve_coupled_uz(
    disc: &Discretization,
    u0: &NodalField,
    h: Option<&SpaceTimeField>,
    u_d: &SpaceTimeField,
    domains: &Domains,
    cfg: &CoupledConfig,
) -> Result<(SpaceTimeField, SpaceTimeField, usize), SolveError> {
    let mesh = disc.mesh();
    let grid = *disc.grid();
    let mass = disc.mass().clone();
    let inv_ell2 = 1.0 / (cfg.ell * cfg.ell);
    let inv_gamma2 = 1.0 / (cfg.gamma * cfg.gamma);
    let h_masked: Option<SpaceTimeField> = h.map(|field| {
        let omega = domains.omega.expect("leader field given without its support");
        let levels = (0..field.n_levels())
            .map(|n| restrict_indicator(mesh, &omega, field.level(n)))
            .collect();
        SpaceTimeField::from_levels(levels)
    });

    let forced_state = |z: &SpaceTimeField| -> Result<SpaceTimeField, SolveError> {
        let mut levels = Vec::with_capacity(grid.n_levels());
        disc.sweep(
            u0,
            &WBoundary::Homogeneous,
            |_, y| crate::fem::assemble_nonlinear(mesh, y),
            |n| {
                // g = h 1_omega - ell^{-2} z 1_O + gamma^{-2} z, load = M g.
                let mut g = restrict_indicator(mesh, &domains.control, z.level(n));
                g.scale(-inv_ell2);
                g.axpy(inv_gamma2, z.level(n));
                if let Some(hm) = &h_masked {
                    g.axpy(1.0, hm.level(n));
                }
                mass.matvec(g.as_slice())
            },
            |_, y, _| levels.push(y.clone()),
        )?;
        Ok(SpaceTimeField::from_levels(levels))
    };

    let mut z = SpaceTimeField::zeros(mesh, &grid);
    let mut u = forced_state(&z)?;
    let mut relax = cfg.relaxation;
    let mut prev_residual = f64::INFINITY;
    for it in 1..=cfg.picard_max {
        let z_raw = solve_adjoint_z(disc, &u, u_d, &domains.track)?;
        let mut z_next = z.clone();
        z_next.scale(1.0 - relax);
        z_next.axpy(relax, &z_raw);
        let u_next = forced_state(&z_next)?;
        let mut du = u_next.clone();
        du.axpy(-1.0, &u);
        let mut dz = z_next.clone();
        dz.axpy(-1.0, &z);
        let residual = (disc.l2q(&du) + disc.l2q(&dz))
            / (1.0 + disc.l2q(&u_next) + disc.l2q(&z_next));
        u = u_next;
        z = z_next;
        if residual < cfg.picard_tol {
            return Ok((u, z, it));
        }
        if residual >= prev_residual {
            relax = (0.5f64).min(relax);
        }
        prev_residual = residual;
    }
    Err(SolveError::PicardDiverged { iters: cfg.picard_max, residual: prev_residual })
}

/// Adjoint pair of the leader's functional around a frozen robust
/// equilibrium (u, z):
///
/// ```text
/// -p1_t + p1_xxxx + p1_xx - u p1_x = -p2 1_Od - z_x p2,   p1(T) = terminal,
///  p2_t + p2_xxxx + p2_xx + (u p2)_x = ell^{-2} p1 1_O - gamma^{-2} p1,
///  p2(0) = 0.
/// ```
///
/// The signs follow from pairing the linearized equilibrium system: the
/// cross sources of p1 are the transposes of the misfit source and of the
/// transport coefficient dependence of the z equation, and (z_x p2, phi_j)
/// with elementwise-constant z_x is that exact transpose.
///
/// The recursion is seeded with the lift of `terminal` while the stored
/// terminal level carries twice that value — the representation leader
/// gradient reads pair with the terminal trapezoid weight.
///
/// Fixed-point iteration in the (weak, weight-suppressed) cross coupling;
/// returns (p1, p2, iterations).
pub fn solve_adjoint_pair(
    disc: &Discretization,
    u: &SpaceTimeField,
    z: &SpaceTimeField,
    terminal: &NodalField,
    domains: &Domains,
    cfg: &CoupledConfig,
) -> Result<(SpaceTimeField, SpaceTimeField, usize), SolveError> {
    let mesh = disc.mesh();
    let grid = *disc.grid();
    let mass = disc.mass().clone();
    let n_steps = grid.n_steps();
    let inv_ell2 = 1.0 / (cfg.ell * cfg.ell);
    let inv_gamma2 = 1.0 / (cfg.gamma * cfg.gamma);

    let seed = disc.stepper().lift(terminal);
    let mut stored_terminal = seed.clone();
    stored_terminal.scale(2.0);

    let solve_p1 = |p2: &SpaceTimeField| -> Result<SpaceTimeField, SolveError> {
        let source_at = |n: usize| {
            // -(p2 1_Od + z_x p2), trapezoid-weighted on arrival. The z_x
            // pairing reuses the advection assembly with the roles swapped:
            // (z_x p2, phi_j) = (coefficient p2) * (gradient of z).
            let mut s = masked_mass_load(mesh, &mass, &domains.track, p2.level(n));
            let prod = assemble_advection(mesh, p2.level(n), z.level(n));
            for (a, b) in s.iter_mut().zip(&prod) {
                *a = -(*a + b);
            }
            if n == 0 {
                for v in &mut s {
                    *v *= 0.5;
                }
            }
            s
        };
        backward_advected_sweep(disc, u, &seed, &stored_terminal, source_at)
    };

    let solve_p2 = |p1: &SpaceTimeField| -> Result<SpaceTimeField, SolveError> {
        let mut levels = Vec::with_capacity(grid.n_levels());
        disc.sweep(
            &NodalField::zeros(mesh),
            &WBoundary::Homogeneous,
            |n, y| assemble_conservative_advection(mesh, u.level(n), y),
            |n| {
                // ell^{-2} (M p1) masked to O minus gamma^{-2} M p1. The
                // stored terminal level carries the doubled gradient-read
                // value; the equation pairs the plain adjoint value there.
                let weight = if n == n_steps { 0.5 } else { 1.0 };
                let mp1 = mass.matvec(p1.level(n).as_slice());
                let mut out = vec![0.0; mesh.n_nodes()];
                for (i, &x) in mesh.nodes().iter().enumerate() {
                    let masked = if domains.control.contains(x) { mp1[i] } else { 0.0 };
                    out[i] = weight * (inv_ell2 * masked - inv_gamma2 * mp1[i]);
                }
                out
            },
            |_, y, _| levels.push(y.clone()),
        )?;
        Ok(SpaceTimeField::from_levels(levels))
    };

    let mut p2 = SpaceTimeField::zeros(mesh, &grid);
    let mut p1 = SpaceTimeField::zeros(mesh, &grid);
    let mut relax = cfg.relaxation;
    let mut prev_residual = f64::INFINITY;
    for it in 1..=cfg.picard_max {
        let p1_new = solve_p1(&p2)?;
        let p2_new = solve_p2(&p1_new)?;
        let mut d1 = p1_new.clone();
        d1.axpy(-1.0, &p1);
        let mut d2 = p2_new.clone();
        d2.axpy(-1.0, &p2);
        let residual = (disc.l2q(&d1) + disc.l2q(&d2))
            / (1.0 + disc.l2q(&p1_new) + disc.l2q(&p2_new));
        if residual < cfg.picard_tol {
            return Ok((p1_new, p2_new, it));
        }
        if residual >= prev_residual {
            relax = (0.5f64).min(relax);
        }
        prev_residual = residual;
        p1.scale(1.0 - relax);
        p1.axpy(relax, &p1_new);
        p2.scale(1.0 - relax);
        p2.axpy(relax, &p2_new);
    }
    Err(SolveError::PicardDiverged { iters: cfg.picard_max, residual: prev_residual })
}
