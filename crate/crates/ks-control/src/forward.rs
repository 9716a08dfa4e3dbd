//! Forward solver for the fourth-order evolution equation
//!
//! ```text
//! u_t + u_xxxx + u_xx + u u_x = f           in (-L, L) x (0, T),
//! u = u_x = 0                               on the boundary,
//! u(., 0) = u0,
//! ```
//!
//! discretized with the mixed formulation w = u_xx so that both unknowns live
//! in the piecewise-linear space. Each time step treats the linear operator
//! w_xx + w with a theta weighting and extrapolates the transport term
//! explicitly with the two-step Adams-Bashforth rule; the first step uses a
//! one-level bootstrap. The step matrix
//!
//! ```text
//! [ M            dt*theta*(M - K) ] [u]   [F]
//! [ K            M                ] [w] = [0]
//! ```
//!
//! is time independent, so it is factored once per run and reused.

use crate::fem::{assemble_mass, assemble_nonlinear, assemble_stiffness, Mesh1D, NodalField};
use crate::linalg::{BandedLu, BandedMatrix, BlockLu};
use crate::SolveError;

/// Uniform partition of [0, t_final] into `n_steps` steps.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    t_final: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self, SolveError> {
        if !(t_final.is_finite() && t_final > 0.0) || n_steps == 0 {
            return Err(SolveError::InvalidGrid(format!(
                "need t_final > 0 and n_steps >= 1, got t_final={t_final}, n_steps={n_steps}"
            )));
        }
        Ok(TimeGrid { t_final, n_steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of stored time levels (n_steps + 1).
    pub fn n_levels(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    /// Time of level `n`, computed as a fraction of t_final to avoid drift.
    pub fn time(&self, n: usize) -> f64 {
        self.t_final * n as f64 / self.n_steps as f64
    }

    /// Trapezoidal quadrature weights over the levels:
    /// dt * (1/2, 1, ..., 1, 1/2).
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.n_levels()];
        w[0] = 0.5 * dt;
        w[self.n_steps] = 0.5 * dt;
        w
    }
}

/// Nodal values over all time levels of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    levels: Vec<NodalField>,
}

impl SpaceTimeField {
    pub fn zeros(mesh: &Mesh1D, grid: &TimeGrid) -> Self {
        SpaceTimeField { levels: vec![NodalField::zeros(mesh); grid.n_levels()] }
    }

    /// Sample `f(x, t)` on the space-time grid.
    pub fn from_fn(mesh: &Mesh1D, grid: &TimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let levels = (0..grid.n_levels())
            .map(|n| {
                let t = grid.time(n);
                NodalField::from_fn(mesh, |x| f(x, t))
            })
            .collect();
        SpaceTimeField { levels }
    }

    pub fn from_levels(levels: Vec<NodalField>) -> Self {
        assert!(!levels.is_empty());
        SpaceTimeField { levels }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> &NodalField {
        &self.levels[n]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut NodalField {
        &mut self.levels[n]
    }

    pub fn levels(&self) -> &[NodalField] {
        &self.levels
    }

    /// Last stored level (the terminal state).
    pub fn terminal(&self) -> &NodalField {
        self.levels.last().unwrap()
    }

    /// self += c * other, level by level.
    pub fn axpy(&mut self, c: f64, other: &SpaceTimeField) {
        assert_eq!(self.n_levels(), other.n_levels());
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            a.axpy(c, b);
        }
    }

    pub fn scale(&mut self, c: f64) {
        for l in &mut self.levels {
            l.scale(c);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.levels.iter().flat_map(|l| l.iter()).fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Space-time L2 norm: trapezoid in time of the mass-weighted nodal norm.
pub fn space_time_l2(mass: &BandedMatrix, grid: &TimeGrid, f: &SpaceTimeField) -> f64 {
    assert_eq!(grid.n_levels(), f.n_levels());
    let w = grid.trapezoid_weights();
    let mut acc = 0.0;
    for (n, wn) in w.iter().enumerate() {
        let g = f.level(n);
        let mg = mass.matvec(g.as_slice());
        let sq: f64 = g.iter().zip(&mg).map(|(a, b)| a * b).sum();
        acc += wn * sq;
    }
    acc.max(0.0).sqrt()
}

/// Space-time L2 inner product with trapezoid weights in time.
pub fn space_time_inner(
    mass: &BandedMatrix,
    grid: &TimeGrid,
    f: &SpaceTimeField,
    g: &SpaceTimeField,
) -> f64 {
    assert_eq!(grid.n_levels(), f.n_levels());
    assert_eq!(grid.n_levels(), g.n_levels());
    let w = grid.trapezoid_weights();
    let mut acc = 0.0;
    for (n, wn) in w.iter().enumerate() {
        let mg = mass.matvec(g.level(n).as_slice());
        let dot: f64 = f.level(n).iter().zip(&mg).map(|(a, b)| a * b).sum();
        acc += wn * dot;
    }
    acc
}

/// Boundary values for the auxiliary variable w = u_xx.
pub enum WBoundary {
    /// w = 0 at both ends (the default discrete space).
    Homogeneous,
    /// Prescribed values (w(-L, t), w(L, t)), used by manufactured cases whose
    /// exact solution has nonzero curvature at the boundary.
    Prescribed(Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
}

impl WBoundary {
    fn values(&self, t: f64) -> (f64, f64) {
        match self {
            WBoundary::Homogeneous => (0.0, 0.0),
            WBoundary::Prescribed(f) => f(t),
        }
    }
}

/// One forward evolution problem on a borrowed mesh.
pub struct ForwardProblem<'m> {
    pub mesh: &'m Mesh1D,
    pub grid: TimeGrid,
    /// Implicitness weight for the linear operator; 3/4 in all shipped runs.
    pub theta: f64,
    pub u0: NodalField,
    /// Disable to integrate only the linear part (testing hook).
    pub nonlinear: bool,
    pub w_bc: WBoundary,
}

impl<'m> ForwardProblem<'m> {
    /// Problem with homogeneous boundary data and the transport term on.
    pub fn new(mesh: &'m Mesh1D, grid: TimeGrid, theta: f64, u0: NodalField) -> Self {
        ForwardProblem { mesh, grid, theta, u0, nonlinear: true, w_bc: WBoundary::Homogeneous }
    }
}

/// Assembled operators and the factored step matrix for one (mesh, dt, theta).
pub struct Stepper {
    n_nodes: usize,
    dt: f64,
    theta: f64,
    mass: BandedMatrix,
    stiffness: BandedMatrix,
    /// B = M - K, the weak form of w -> w_xx + w against the test space.
    b: BandedMatrix,
    block: BlockLu,
    /// M with unit boundary rows, for the w(0) solve.
    mass_bc_lu: BandedLu,
}

impl Stepper {
    pub fn new(mesh: &Mesh1D, dt: f64, theta: f64) -> Result<Self, SolveError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SolveError::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(theta.is_finite() && (0.0..=1.0).contains(&theta)) {
            return Err(SolveError::InvalidGrid(format!("theta must lie in [0, 1], got {theta}")));
        }
        let n = mesh.n_nodes();
        let mass = assemble_mass(mesh);
        let stiffness = assemble_stiffness(mesh);
        let mut b = BandedMatrix::zeros(n, 1, 1);
        for i in 0..n {
            for j in i.saturating_sub(1)..=(i + 1).min(n - 1) {
                b.set(i, j, mass.get(i, j) - stiffness.get(i, j));
            }
        }
        // Block rows: (u-eq, w-eq) per node, Dirichlet rows at both ends.
        let mut a11 = mass.clone();
        let mut a12 = b.clone();
        let mut a21 = stiffness.clone();
        let mut a22 = mass.clone();
        for i in 0..n {
            for j in i.saturating_sub(1)..=(i + 1).min(n - 1) {
                a12.set(i, j, dt * theta * a12.get(i, j));
            }
        }
        for bnode in [0, n - 1] {
            a11.set_unit_row(bnode);
            a12.zero_row(bnode);
            a21.zero_row(bnode);
            a22.set_unit_row(bnode);
        }
        let block = BlockLu::factor(&a11, &a12, &a21, &a22)?;
        let mut mass_bc = mass.clone();
        mass_bc.set_unit_row(0);
        mass_bc.set_unit_row(n - 1);
        let mass_bc_lu = BandedLu::factor(&mass_bc)?;
        Ok(Stepper { n_nodes: n, dt, theta, mass, stiffness, b, block, mass_bc_lu })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn mass(&self) -> &BandedMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &BandedMatrix {
        &self.stiffness
    }

    /// Consistent initialization of the auxiliary variable: M w = -K u0 with
    /// Dirichlet rows carrying the prescribed boundary values.
    pub fn initial_w(&self, u0: &NodalField, w_bc: (f64, f64)) -> NodalField {
        let mut rhs = self.stiffness.matvec(u0.as_slice());
        for v in &mut rhs {
            *v = -*v;
        }
        rhs[0] = w_bc.0;
        rhs[self.n_nodes - 1] = w_bc.1;
        nodal_from(self.mass_bc_lu.solve(&rhs))
    }

    /// Advance one step given the already-extrapolated explicit transport
    /// vector and the assembled load (f(., t_{n+1}), phi_i).
    ///
    /// Right-hand side of the u-equation row:
    /// F = M u_n + dt (theta - 1) B w_n - dt expl + dt load.
    pub fn step(
        &self,
        u_n: &NodalField,
        w_n: &NodalField,
        expl: &[f64],
        load: &[f64],
        w_bc: (f64, f64),
    ) -> (NodalField, NodalField) {
        let n = self.n_nodes;
        assert_eq!(u_n.len(), n);
        assert_eq!(w_n.len(), n);
        assert_eq!(expl.len(), n);
        assert_eq!(load.len(), n);
        let mu = self.mass.matvec(u_n.as_slice());
        let bw = self.b.matvec(w_n.as_slice());
        let mut rhs1 = vec![0.0; n];
        for i in 0..n {
            rhs1[i] = mu[i] + self.dt * (self.theta - 1.0) * bw[i] - self.dt * expl[i]
                + self.dt * load[i];
        }
        rhs1[0] = 0.0;
        rhs1[n - 1] = 0.0;
        let mut rhs2 = vec![0.0; n];
        rhs2[0] = w_bc.0;
        rhs2[n - 1] = w_bc.1;
        let (u, w) = self.block.solve(&rhs1, &rhs2);
        (nodal_from(u), nodal_from(w))
    }

    /// Solve the implicit block with right-hand side (M y, 0): the discrete
    /// lift that turns a terminal functional density into the consistent
    /// starting value of a backward sweep.
    pub fn lift(&self, y: &NodalField) -> NodalField {
        let mut rhs1 = self.mass.matvec(y.as_slice());
        rhs1[0] = 0.0;
        rhs1[self.n_nodes - 1] = 0.0;
        self.lift_raw(rhs1)
    }

    /// Solve the implicit block with right-hand side (load, 0): the inverse
    /// of the u-Schur complement applied to an assembled load, used to seed
    /// backward sweeps whose terminal level carries a weighted source.
    pub fn lift_load(&self, load: &[f64]) -> NodalField {
        let mut rhs1 = load.to_vec();
        rhs1[0] = 0.0;
        rhs1[self.n_nodes - 1] = 0.0;
        self.lift_raw(rhs1)
    }

    fn lift_raw(&self, rhs1: Vec<f64>) -> NodalField {
        assert_eq!(rhs1.len(), self.n_nodes);
        let rhs2 = vec![0.0; self.n_nodes];
        let (u, _) = self.block.solve(&rhs1, &rhs2);
        nodal_from(u)
    }
}

// NodalField keeps its constructor mesh-checked; steppers produce vectors of
// the right length by construction.
fn nodal_from(values: Vec<f64>) -> NodalField {
    NodalField::from_raw(values)
}

/// Shared discretization context: one factored stepper per (mesh, dt, theta),
/// reused by the forward solver and every backward/adjoint sweep (they all
/// share the same time-independent step matrix).
pub struct Discretization<'m> {
    mesh: &'m Mesh1D,
    grid: TimeGrid,
    stepper: Stepper,
    /// Plain mass LU (no boundary rows), for L2 projections.
    mass_plain_lu: BandedLu,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m Mesh1D, grid: TimeGrid, theta: f64) -> Result<Self, SolveError> {
        let stepper = Stepper::new(mesh, grid.dt(), theta)?;
        let mass_plain_lu = BandedLu::factor(stepper.mass()).map_err(SolveError::from)?;
        Ok(Discretization { mesh, grid, stepper, mass_plain_lu })
    }

    pub fn mesh(&self) -> &Mesh1D {
        self.mesh
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn theta(&self) -> f64 {
        self.stepper.theta()
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn mass(&self) -> &BandedMatrix {
        self.stepper.mass()
    }

    /// Space-time L2 norm with this discretization's mass and grid weights.
    pub fn l2q(&self, f: &SpaceTimeField) -> f64 {
        space_time_l2(self.mass(), &self.grid, f)
    }

    /// Project the elementwise derivative of `g` to a nodal field via the
    /// (unconstrained) mass matrix.
    pub fn project_derivative(&self, g: &NodalField) -> NodalField {
        let h = self.mesh.h();
        let mut rhs = vec![0.0; self.mesh.n_nodes()];
        for e in 0..self.mesh.n_elems() {
            let dg = (g[e + 1] - g[e]) / h;
            rhs[e] += dg * h / 2.0;
            rhs[e + 1] += dg * h / 2.0;
        }
        nodal_from(self.mass_plain_lu.solve(&rhs))
    }

    /// Drive the theta/Adams-Bashforth scheme across the grid.
    ///
    /// `expl_at(n, y)` assembles the transport vector at level n for state y
    /// (the driver forms the two-level extrapolation and the bootstrap);
    /// `load_at(n)` returns the assembled source arriving at level n >= 1.
    /// Levels 0..=n_steps are handed to `on_level` in order.
    pub fn sweep(
        &self,
        y0: &NodalField,
        w_bc: &WBoundary,
        mut expl_at: impl FnMut(usize, &NodalField) -> Vec<f64>,
        mut load_at: impl FnMut(usize) -> Vec<f64>,
        mut on_level: impl FnMut(usize, &NodalField, &NodalField),
    ) -> Result<(), SolveError> {
        let mut y = y0.clone();
        let mut q = self.stepper.initial_w(&y, w_bc.values(0.0));
        on_level(0, &y, &q);
        let mut e_prev = expl_at(0, &y);
        for n in 0..self.grid.n_steps() {
            let load = load_at(n + 1);
            let bc = w_bc.values(self.grid.time(n + 1));
            let (y1, q1) = if n == 0 {
                self.stepper.step(&y, &q, &e_prev, &load, bc)
            } else {
                let e_n = expl_at(n, &y);
                let ex: Vec<f64> =
                    e_n.iter().zip(&e_prev).map(|(a, b)| 1.5 * a - 0.5 * b).collect();
                let out = self.stepper.step(&y, &q, &ex, &load, bc);
                e_prev = e_n;
                out
            };
            y = y1;
            q = q1;
            if !y.iter().all(|v| v.is_finite()) {
                return Err(SolveError::NonFinite { step: n + 1 });
            }
            on_level(n + 1, &y, &q);
        }
        Ok(())
    }
}

/// One interior step of the two-level scheme: transport extrapolated as
/// (3/2) N(u_n) - (1/2) N(u_nm1).
pub fn tab2_step(
    stepper: &Stepper,
    mesh: &Mesh1D,
    u_n: &NodalField,
    u_nm1: &NodalField,
    w_n: &NodalField,
    load_np1: &[f64],
) -> (NodalField, NodalField) {
    let e_n = assemble_nonlinear(mesh, u_n);
    let e_nm1 = assemble_nonlinear(mesh, u_nm1);
    let expl: Vec<f64> = e_n.iter().zip(&e_nm1).map(|(a, b)| 1.5 * a - 0.5 * b).collect();
    stepper.step(u_n, w_n, &expl, load_np1, (0.0, 0.0))
}

/// First step: no history yet, so the transport term is taken at level 0.
pub fn bootstrap_step(
    stepper: &Stepper,
    mesh: &Mesh1D,
    u_0: &NodalField,
    w_0: &NodalField,
    load_1: &[f64],
) -> (NodalField, NodalField) {
    let e_0 = assemble_nonlinear(mesh, u_0);
    stepper.step(u_0, w_0, &e_0, load_1, (0.0, 0.0))
}

/// Drive the scheme across the whole grid, handing each new level to
/// `observer`; levels 0..=n_steps are reported exactly once, in order.
pub fn forward_sweep(
    prob: &ForwardProblem,
    load_at: impl FnMut(usize) -> Vec<f64>,
    observer: impl FnMut(usize, &NodalField, &NodalField),
) -> Result<(), SolveError> {
    let disc = Discretization::new(prob.mesh, prob.grid, prob.theta)?;
    let mesh = prob.mesh;
    let nonlinear = prob.nonlinear;
    disc.sweep(
        &prob.u0,
        &prob.w_bc,
        |_, y| {
            if nonlinear {
                assemble_nonlinear(mesh, y)
            } else {
                vec![0.0; mesh.n_nodes()]
            }
        },
        load_at,
        observer,
    )
}

/// Solve the forward problem, returning (u, w) on the full space-time grid.
/// `load_at(n)` must return the assembled load at level n >= 1.
pub fn solve_forward(
    prob: &ForwardProblem,
    load_at: impl FnMut(usize) -> Vec<f64>,
) -> Result<(SpaceTimeField, SpaceTimeField), SolveError> {
    let mut u_levels = Vec::with_capacity(prob.grid.n_levels());
    let mut w_levels = Vec::with_capacity(prob.grid.n_levels());
    forward_sweep(prob, load_at, |_, u, w| {
        u_levels.push(u.clone());
        w_levels.push(w.clone());
    })?;
    Ok((SpaceTimeField::from_levels(u_levels), SpaceTimeField::from_levels(w_levels)))
}

/// Zero load provider for unforced runs.
pub fn no_forcing(n_nodes: usize) -> impl FnMut(usize) -> Vec<f64> {
    move |_| vec![0.0; n_nodes]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_mesh;

    #[test]
    fn time_grid_basics() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert!((g.dt() - 0.25).abs() < 1e-16);
        assert!((g.time(4) - 1.0).abs() < 1e-16);
        let w = g.trapezoid_weights();
        assert_eq!(w.len(), 5);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn initial_w_recovers_curvature_of_quadratic() {
        // u0 = L^2 - x^2 has u0'' = -2; with prescribed boundary values the
        // projection is exact for this quadratic.
        let mesh = build_mesh(2.0, 16).unwrap();
        let stepper = Stepper::new(&mesh, 0.1, 0.75).unwrap();
        let u0 = NodalField::from_fn(&mesh, |x| 4.0 - x * x);
        let w = stepper.initial_w(&u0, (-2.0, -2.0));
        for i in 0..mesh.n_nodes() {
            assert!((w[i] + 2.0).abs() < 1e-10, "node {i}: {}", w[i]);
        }
    }

    #[test]
    fn zero_state_is_preserved() {
        let mesh = build_mesh(30.0, 24).unwrap();
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let prob = ForwardProblem::new(&mesh, grid, 0.75, NodalField::zeros(&mesh));
        let (u, w) = solve_forward(&prob, no_forcing(mesh.n_nodes())).unwrap();
        assert_eq!(u.n_levels(), 21);
        assert!(u.max_abs() == 0.0);
        assert!(w.max_abs() == 0.0);
    }

    #[test]
    fn w_satisfies_the_constraint_row_each_level() {
        // Second block row: (M w + K u)_i = 0 at interior nodes, every level.
        let mesh = build_mesh(10.0, 20).unwrap();
        let grid = TimeGrid::new(0.5, 10).unwrap();
        let u0 = NodalField::from_fn(&mesh, |x| 0.5 * (std::f64::consts::PI * x / 10.0).sin());
        let prob = ForwardProblem::new(&mesh, grid, 0.75, u0);
        let (u, w) = solve_forward(&prob, no_forcing(mesh.n_nodes())).unwrap();
        let m = assemble_mass(&mesh);
        let k = assemble_stiffness(&mesh);
        for n in 0..u.n_levels() {
            let mw = m.matvec(w.level(n).as_slice());
            let ku = k.matvec(u.level(n).as_slice());
            for i in 1..mesh.n_nodes() - 1 {
                assert!((mw[i] + ku[i]).abs() < 1e-11, "level {n} node {i}");
            }
        }
    }

    #[test]
    fn step_map_is_linear_without_transport() {
        let mesh = build_mesh(5.0, 12).unwrap();
        let grid = TimeGrid::new(0.2, 2).unwrap();
        let mk_prob = |u0: NodalField| {
            let mut p = ForwardProblem::new(&mesh, grid, 0.75, u0);
            p.nonlinear = false;
            p
        };
        let ua = NodalField::from_fn(&mesh, |x| (0.7 * x).sin());
        let ub = NodalField::from_fn(&mesh, |x| 1.0 / (1.0 + x * x));
        let (sa, _) = solve_forward(&mk_prob(ua.clone()), no_forcing(mesh.n_nodes())).unwrap();
        let (sb, _) = solve_forward(&mk_prob(ub.clone()), no_forcing(mesh.n_nodes())).unwrap();
        let mut combo = ua.clone();
        combo.scale(2.0);
        combo.axpy(-3.0, &ub);
        let (sc, _) = solve_forward(&mk_prob(combo), no_forcing(mesh.n_nodes())).unwrap();
        for n in 0..sc.n_levels() {
            for i in 0..mesh.n_nodes() {
                let lin = 2.0 * sa.level(n)[i] - 3.0 * sb.level(n)[i];
                assert!((sc.level(n)[i] - lin).abs() < 1e-12, "level {n} node {i}");
            }
        }
    }

    #[test]
    fn blowup_is_reported_as_non_finite() {
        // Large state, long explicit steps: the transport term must blow up.
        let mesh = build_mesh(30.0, 16).unwrap();
        let grid = TimeGrid::new(10000.0, 2000).unwrap();
        let u0 = NodalField::from_fn(&mesh, |x| 50.0 * (std::f64::consts::PI * x / 30.0).sin());
        let prob = ForwardProblem::new(&mesh, grid, 0.75, u0);
        match solve_forward(&prob, no_forcing(mesh.n_nodes())) {
            Err(SolveError::NonFinite { step }) => assert!(step >= 1),
            other => panic!("expected NonFinite, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn discrete_steady_state_is_reproduced_for_any_dt() {
        // On a short domain the linear operator is strictly dissipative, so a
        // forced run settles to the discrete steady state; restarting from it
        // must keep it fixed regardless of dt.
        let mesh = build_mesh(1.0, 24).unwrap();
        let f = |x: f64| 0.1 * (std::f64::consts::PI * x / 2.0).cos();
        let load = crate::fem::assemble_load(&mesh, f);
        let settle_grid = TimeGrid::new(80.0, 4000).unwrap();
        let prob = ForwardProblem::new(&mesh, settle_grid, 0.75, NodalField::zeros(&mesh));
        let (u, _) = solve_forward(&prob, |_| load.clone()).unwrap();
        let steady = u.terminal().clone();
        assert!(steady.iter().fold(0.0f64, |m, v| m.max(v.abs())) > 1e-3);
        for n_steps in [2usize, 200] {
            let grid = TimeGrid::new(1.0, n_steps).unwrap();
            let prob = ForwardProblem::new(&mesh, grid, 0.75, steady.clone());
            let (u, _) = solve_forward(&prob, |_| load.clone()).unwrap();
            for i in 0..mesh.n_nodes() {
                assert!(
                    (u.terminal()[i] - steady[i]).abs() < 1e-9,
                    "dt = {}: node {i} moved by {}",
                    grid.dt(),
                    (u.terminal()[i] - steady[i]).abs()
                );
            }
        }
    }
}
