//! Collision-avoiding MPC solved with three-block ADMM.
//!
//! Each iteration
//! 1. re-solves every cell's dual QP for `(lambda, mu, gamma)` with states
//!    and ADMM multipliers frozen (one LCP per cell, batched),
//! 2. takes one SQP step on states and controls: dynamics and pose are
//!    linearized about the current iterate, states are condensed onto the
//!    controls, and the resulting box-constrained QP is solved through the
//!    same QP-to-LCP path; the new controls are then rolled through the
//!    nonlinear model so the dynamics hold exactly,
//! 3. adds the translation / rotation residuals to the multipliers
//!    `(zeta, xi)`.
//!
//! Collision cells cover steps `1..=T`; the current state at `t = 0` is
//! fixed and carries no constraint.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::batch::{parallel_map, Backend};
use crate::collision_lp::{rotation_residual, translation_residual, DualCertificate};
use crate::dual_subproblem::{build_subproblem, solve_cell, CellTag, NonnegQp};
use crate::dynamics::DynamicsModel;
use crate::geometry::{ObstacleSet, RobotGeometry};
use crate::lemke::LemkeOptions;
use crate::linalg::symmetrize;
use crate::{lit, Error, Real, Result};

/// One MPC solve: horizon, weights, bounds, reference and world.
#[derive(Debug, Clone)]
pub struct MpcProblem<T: Real> {
    pub horizon: usize,
    pub dt: T,
    pub q_s: DMatrix<T>,
    pub q_u: DMatrix<T>,
    /// State bounds; entries may be infinite.
    pub s_min: DVector<T>,
    pub s_max: DVector<T>,
    /// Control bounds; must be finite.
    pub u_min: DVector<T>,
    pub u_max: DVector<T>,
    /// `horizon + 1` reference states.
    pub reference: Vec<DVector<T>>,
    pub initial_state: DVector<T>,
    pub robot: RobotGeometry<T>,
    pub obstacles: ObstacleSet<T>,
    /// Indices into `obstacles` that take part in this solve.
    pub active_obstacles: Vec<usize>,
    pub model: Arc<dyn DynamicsModel<T>>,
}

impl<T: Real> MpcProblem<T> {
    pub fn n_s(&self) -> usize {
        self.model.n_s()
    }

    pub fn n_u(&self) -> usize {
        self.model.n_u()
    }

    /// Cell tags in table order: part-major, then obstacle, then step.
    pub fn cells(&self) -> Vec<CellTag> {
        let mut out = Vec::with_capacity(self.robot.parts().len() * self.active_obstacles.len() * self.horizon);
        for i in 0..self.robot.parts().len() {
            for &j in &self.active_obstacles {
                for t in 1..=self.horizon {
                    out.push(CellTag::new(i, j, t));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let n_s = self.n_s();
        let n_u = self.n_u();
        let bad = |m: String| Err(Error::InvalidProblem(m));
        if self.horizon == 0 {
            return bad("horizon must be positive".into());
        }
        if self.dt <= T::zero() {
            return bad("dt must be positive".into());
        }
        if self.reference.len() != self.horizon + 1 {
            return bad(format!(
                "reference has {} states, expected {}",
                self.reference.len(),
                self.horizon + 1
            ));
        }
        for (name, v, n) in [
            ("s_min", &self.s_min, n_s),
            ("s_max", &self.s_max, n_s),
            ("u_min", &self.u_min, n_u),
            ("u_max", &self.u_max, n_u),
            ("initial_state", &self.initial_state, n_s),
        ] {
            if v.len() != n {
                return bad(format!("{name} has length {}, expected {n}", v.len()));
            }
        }
        if self.reference.iter().any(|r| r.len() != n_s) {
            return bad("reference state has wrong length".into());
        }
        if self.s_min.iter().zip(self.s_max.iter()).any(|(a, b)| a >= b)
            || self.u_min.iter().zip(self.u_max.iter()).any(|(a, b)| a >= b)
        {
            return bad("bounds must satisfy min < max".into());
        }
        let big = lit::<T>(1e300);
        if self.u_min.iter().chain(self.u_max.iter()).any(|v| v.abs() >= big) {
            return bad("control bounds must be finite".into());
        }
        for (name, q, n) in [("q_s", &self.q_s, n_s), ("q_u", &self.q_u, n_u)] {
            if q.shape() != (n, n) {
                return bad(format!("{name} must be {n}x{n}"));
            }
            if (q - q.transpose()).amax() > lit::<T>(1e-12) * (T::one() + q.amax()) {
                return bad(format!("{name} must be symmetric"));
            }
            if nalgebra::SymmetricEigen::new(q.clone()).eigenvalues.min() <= T::zero() {
                return bad(format!("{name} must be positive definite"));
            }
        }
        if self.robot.dim() != self.model.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim(),
                found: self.robot.dim(),
            });
        }
        if let Some(&j) = self.active_obstacles.iter().find(|&&j| j >= self.obstacles.len()) {
            return bad(format!("active obstacle {j} out of range"));
        }
        Ok(())
    }

    fn clip_state(&self, s: &DVector<T>) -> DVector<T> {
        DVector::from_fn(s.len(), |k, _| s[k].max(self.s_min[k]).min(self.s_max[k]))
    }

    /// `sum_t ||s_t - ref_t||^2_{Q_s} + ||u_t||^2_{Q_u}`.
    pub fn cost_of(&self, states: &[DVector<T>], controls: &[DVector<T>]) -> T {
        let mut total = T::zero();
        for (s, r) in states.iter().zip(&self.reference) {
            let e = self.model.state_error(s, r);
            total += e.dot(&(&self.q_s * &e));
        }
        for u in controls {
            total += u.dot(&(&self.q_u * u));
        }
        total
    }
}

#[derive(Debug, Clone)]
pub struct AdmmParams<T: Real> {
    pub sigma: T,
    /// `None` selects `1e-3 * N * M * (T + 1)`.
    pub eps_pri: Option<T>,
    pub eps_dual: Option<T>,
    pub max_iters: usize,
    pub backend: Backend,
    /// Use the freshly updated certificates in the state step (default).
    /// `false` reproduces the literal reading that uses the previous ones.
    pub gauss_seidel: bool,
    pub lemke: LemkeOptions<T>,
}

impl<T: Real> Default for AdmmParams<T> {
    fn default() -> Self {
        Self {
            sigma: lit(300.0),
            eps_pri: None,
            eps_dual: None,
            max_iters: 100,
            backend: Backend::Serial,
            gauss_seidel: true,
            lemke: LemkeOptions::default(),
        }
    }
}

impl<T: Real> AdmmParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.sigma <= T::zero() {
            return Err(Error::InvalidProblem("sigma must be positive".into()));
        }
        for e in [self.eps_pri, self.eps_dual].into_iter().flatten() {
            if e <= T::zero() {
                return Err(Error::InvalidProblem("stopping tolerances must be positive".into()));
            }
        }
        self.backend.validate()
    }

    /// Stopping thresholds for a problem.
    pub fn thresholds(&self, prob: &MpcProblem<T>) -> (T, T) {
        let cells = prob.robot.parts().len() * prob.active_obstacles.len() * (prob.horizon + 1);
        let default = lit::<T>(1e-3) * lit::<T>(cells.max(1) as f64);
        (self.eps_pri.unwrap_or(default), self.eps_dual.unwrap_or(default))
    }
}

/// Dual certificate and ADMM multipliers of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState<T: Real> {
    pub tag: CellTag,
    pub cert: DualCertificate<T>,
    pub zeta: T,
    pub xi: DVector<T>,
}

impl<T: Real> CellState<T> {
    fn cold(prob: &MpcProblem<T>, tag: CellTag) -> Self {
        let part = &prob.robot.parts()[tag.part];
        let n_o = prob.obstacles.get(tag.obstacle).n_rows();
        Self {
            tag,
            cert: DualCertificate::uniform(part, n_o),
            zeta: T::zero(),
            xi: DVector::zeros(prob.robot.dim()),
        }
    }
}

/// States, controls and per-cell dual variables of one ADMM iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryIterate<T: Real> {
    /// `T + 1` states, `states[0]` is the current state.
    pub states: Vec<DVector<T>>,
    /// `T` controls.
    pub controls: Vec<DVector<T>>,
    /// One entry per tag of [`MpcProblem::cells`], same order.
    pub cells: Vec<CellState<T>>,
    pub iteration: usize,
}

impl<T: Real> TrajectoryIterate<T> {
    /// Reference clipped to the bounds, zero controls, uniform `lambda`
    /// with `b^T lambda = 1`, and zero `mu`, `gamma`, `zeta`, `xi`.
    pub fn cold_start(prob: &MpcProblem<T>) -> Self {
        let mut states: Vec<_> = prob.reference.iter().map(|r| prob.clip_state(r)).collect();
        states[0] = prob.initial_state.clone();
        Self {
            states,
            controls: vec![DVector::zeros(prob.n_u()); prob.horizon],
            cells: prob.cells().into_iter().map(|tag| CellState::cold(prob, tag)).collect(),
            iteration: 0,
        }
    }

    /// Advances the iterate by one step for the next receding-horizon solve:
    /// everything moves one step earlier, the last entry is repeated, the
    /// first state becomes `prob.initial_state`, and cells are matched to
    /// `prob`'s active obstacles (new ones start cold).
    pub fn shifted(&self, prob: &MpcProblem<T>) -> Self {
        let horizon = prob.horizon;
        let pick = |v: &[DVector<T>], t: usize| v[(t + 1).min(v.len() - 1)].clone();
        let mut states: Vec<_> = (0..=horizon).map(|t| pick(&self.states, t)).collect();
        states[0] = prob.initial_state.clone();
        let controls: Vec<_> = (0..horizon).map(|t| pick(&self.controls, t)).collect();
        let cells = prob
            .cells()
            .into_iter()
            .map(|tag| {
                let from = CellTag::new(tag.part, tag.obstacle, (tag.step + 1).min(horizon));
                self.cells
                    .iter()
                    .find(|c| c.tag == from)
                    .map(|c| CellState { tag, ..c.clone() })
                    .unwrap_or_else(|| CellState::cold(prob, tag))
            })
            .collect();
        Self {
            states,
            controls,
            cells,
            iteration: 0,
        }
    }

    /// Makes the iterate structurally match `prob` (horizon, first state,
    /// cell table) without shifting.
    pub fn reconciled(&self, prob: &MpcProblem<T>) -> Self {
        if self.states.len() != prob.horizon + 1 || self.controls.len() != prob.horizon {
            return Self::cold_start(prob);
        }
        let mut out = self.clone();
        out.states[0] = prob.initial_state.clone();
        out.cells = prob
            .cells()
            .into_iter()
            .map(|tag| {
                self.cells
                    .iter()
                    .find(|c| c.tag == tag)
                    .cloned()
                    .unwrap_or_else(|| CellState::cold(prob, tag))
            })
            .collect();
        out
    }

    pub fn certificates(&self) -> Vec<DualCertificate<T>> {
        self.cells.iter().map(|c| c.cert.clone()).collect()
    }
}

/// Sum of squared changes used by the stopping test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCheck<T: Real> {
    /// `sum ||zeta+ - zeta||^2 + ||xi+ - xi||^2`.
    pub primal: T,
    /// `sum ||lambda+ - lambda||^2 + ||mu+ - mu||^2`.
    pub dual: T,
    pub stop: bool,
}

/// Compares consecutive iterates; stops iff both sums are `<=` their
/// thresholds.
pub fn check_stopping<T: Real>(
    prev: &TrajectoryIterate<T>,
    next: &TrajectoryIterate<T>,
    eps_pri: T,
    eps_dual: T,
) -> StopCheck<T> {
    let mut primal = T::zero();
    let mut dual = T::zero();
    for (a, b) in prev.cells.iter().zip(&next.cells) {
        let dz = b.zeta - a.zeta;
        primal += dz * dz + (&b.xi - &a.xi).norm_squared();
        dual += (&b.cert.lambda - &a.cert.lambda).norm_squared() + (&b.cert.mu - &a.cert.mu).norm_squared();
    }
    StopCheck {
        primal,
        dual,
        stop: primal <= eps_pri && dual <= eps_dual,
    }
}

/// `sum_t ||s_t - ref_t||^2_{Q_s} + ||u_t||^2_{Q_u}` over the iterate.
pub fn evaluate_cost<T: Real>(traj: &TrajectoryIterate<T>, prob: &MpcProblem<T>) -> T {
    prob.cost_of(&traj.states, &traj.controls)
}

/// Result of a dual update: one certificate per cell, previous values kept
/// for cells whose solve failed.
#[derive(Debug, Clone)]
pub struct DualUpdate<T: Real> {
    pub certificates: Vec<DualCertificate<T>>,
    pub failures: Vec<(CellTag, Error)>,
}

/// Re-solves every cell's dual QP at the iterate's states and multipliers.
///
/// The penalty weight does not enter: scaling a quadratic objective by a
/// positive constant leaves its minimiser unchanged.
pub fn dual_update<T: Real>(
    traj: &TrajectoryIterate<T>,
    prob: &MpcProblem<T>,
    backend: Backend,
    lemke: &LemkeOptions<T>,
) -> DualUpdate<T> {
    let parts = prob.robot.parts();
    let poses: Vec<_> = traj.states.iter().map(|s| prob.model.pose_of(s)).collect();
    let results = parallel_map(backend, &traj.cells, |cell| {
        let tag = cell.tag;
        build_subproblem(
            &parts[tag.part],
            prob.obstacles.get(tag.obstacle),
            &poses[tag.step],
            cell.zeta,
            &cell.xi,
        )
        .and_then(|sub| solve_cell(&sub.with_tag(tag), lemke))
    });
    let mut failures = Vec::new();
    let certificates = results
        .into_iter()
        .zip(&traj.cells)
        .map(|(r, cell)| match r {
            Ok(c) => c,
            Err(e) => {
                log::warn!("dual update failed for cell {:?}: {e}", cell.tag);
                failures.push((cell.tag, e));
                cell.cert.clone()
            }
        })
        .collect();
    DualUpdate {
        certificates,
        failures,
    }
}

/// Linearized `(T, R)` residual of one cell about state `s_bar`:
/// `r(s) ~ r0 + J (s - s_bar)`.
fn linearized_residual<T: Real>(
    prob: &MpcProblem<T>,
    tag: CellTag,
    cert: &DualCertificate<T>,
    s_bar: &DVector<T>,
) -> (DVector<T>, DMatrix<T>) {
    let d = prob.robot.dim();
    let n_s = prob.n_s();
    let part = &prob.robot.parts()[tag.part];
    let obs = prob.obstacles.get(tag.obstacle);
    let lp = prob.model.linearize_pose(s_bar);
    let ctm = obs.a().tr_mul(&cert.mu);
    let mut r0 = DVector::<T>::zeros(1 + d);
    r0[0] = T::one() + obs.b().dot(&cert.mu) - lp.trans0.dot(&ctm) + cert.gamma;
    let rot = part.poly().a().tr_mul(&cert.lambda) + lp.rot0.tr_mul(&ctm);
    r0.rows_mut(1, d).copy_from(&rot);
    let mut jac = DMatrix::<T>::zeros(1 + d, n_s);
    let dt_row = -(lp.trans_jac.tr_mul(&ctm));
    for k in 0..n_s {
        jac[(0, k)] = dt_row[k];
        let col = lp.rot_jac[k].tr_mul(&ctm);
        jac.view_mut((1, k), (d, 1)).copy_from(&col);
    }
    (r0, jac)
}

/// One SQP step on states and controls with the given certificates.
///
/// Returns new dynamically feasible `(states, controls)`.
pub fn state_update<T: Real>(
    traj: &TrajectoryIterate<T>,
    certs: &[DualCertificate<T>],
    prob: &MpcProblem<T>,
    sigma: T,
    lemke: &LemkeOptions<T>,
) -> Result<(Vec<DVector<T>>, Vec<DVector<T>>)> {
    let horizon = prob.horizon;
    let n_s = prob.n_s();
    let n_u = prob.n_u();
    let nv = horizon * n_u;
    let two = lit::<T>(2.0);

    // Condensed states s_t = phi_mat[t] U + phi_vec[t].
    let mut phi_mat = vec![DMatrix::<T>::zeros(n_s, nv)];
    let mut phi_vec = vec![prob.initial_state.clone()];
    for t in 0..horizon {
        let lin = prob.model.linearize(&traj.states[t], &traj.controls[t], prob.dt);
        let mut next = &lin.a_jac * &phi_mat[t];
        let mut blk = next.view_mut((0, t * n_u), (n_s, n_u));
        blk += &lin.b_jac;
        let next_vec = &lin.a_jac * &phi_vec[t] + &lin.c_const;
        phi_mat.push(next);
        phi_vec.push(next_vec);
    }

    // Per-step quadratic 1/2 s^T W s + v^T s.
    let mut w_step: Vec<DMatrix<T>> = vec![&prob.q_s * two; horizon + 1];
    let mut v_step: Vec<DVector<T>> = (0..=horizon)
        .map(|t| {
            let s_bar = &traj.states[t];
            let target = s_bar - prob.model.state_error(s_bar, &prob.reference[t]);
            -(&prob.q_s * target) * two
        })
        .collect();
    if sigma > T::zero() {
        for (cell, cert) in traj.cells.iter().zip(certs) {
            let t = cell.tag.step;
            let s_bar = &traj.states[t];
            let (r0, jac) = linearized_residual(prob, cell.tag, cert, s_bar);
            let mut offset = r0 - &jac * s_bar;
            offset[0] += cell.zeta;
            let d = cell.xi.len();
            let mut rows = offset.rows_mut(1, d);
            rows += &cell.xi;
            w_step[t] += jac.tr_mul(&jac) * sigma;
            v_step[t] += jac.tr_mul(&offset) * sigma;
        }
    }

    let mut hessian = DMatrix::<T>::zeros(nv, nv);
    let mut linear = DVector::<T>::zeros(nv);
    for t in 1..=horizon {
        let wp = &w_step[t] * &phi_mat[t];
        hessian += phi_mat[t].tr_mul(&wp);
        linear += phi_mat[t].tr_mul(&(&w_step[t] * &phi_vec[t] + &v_step[t]));
    }
    for t in 0..horizon {
        let mut blk = hessian.view_mut((t * n_u, t * n_u), (n_u, n_u));
        blk += &prob.q_u * two;
    }
    let hessian = symmetrize(&hessian);

    // Shift to x = U - u_min >= 0; remaining bounds become G x <= h.
    let u_lo = DVector::from_fn(nv, |k, _| prob.u_min[k % n_u]);
    let u_hi = DVector::from_fn(nv, |k, _| prob.u_max[k % n_u]);
    let big = lit::<T>(1e300);
    let mut g_rows: Vec<DVector<T>> = Vec::new();
    let mut h_vals: Vec<T> = Vec::new();
    for k in 0..nv {
        let mut row = DVector::zeros(nv);
        row[k] = T::one();
        g_rows.push(row);
        h_vals.push(u_hi[k] - u_lo[k]);
    }
    for t in 1..=horizon {
        let base = &phi_mat[t] * &u_lo + &phi_vec[t];
        for c in 0..n_s {
            let row = phi_mat[t].row(c).transpose();
            if prob.s_max[c] < big {
                h_vals.push(prob.s_max[c] - base[c]);
                g_rows.push(row.clone());
            }
            if prob.s_min[c] > -big {
                h_vals.push(base[c] - prob.s_min[c]);
                g_rows.push(-row);
            }
        }
    }
    let ineq = DMatrix::from_fn(g_rows.len(), nv, |r, c| g_rows[r][c]);
    let qp = NonnegQp {
        linear: &linear + &hessian * &u_lo,
        hessian,
        ineq,
        ineq_rhs: DVector::from_vec(h_vals),
    };
    let (x, _) = qp.solve(lemke)?;
    let u_all = (x + &u_lo).zip_zip_map(&u_lo, &u_hi, |u, lo, hi| u.max(lo).min(hi));

    let controls: Vec<DVector<T>> = (0..horizon).map(|t| u_all.rows(t * n_u, n_u).into_owned()).collect();
    Ok((rollout(prob, &controls), controls))
}

/// Integrates the nonlinear model from the problem's initial state.
pub fn rollout<T: Real>(prob: &MpcProblem<T>, controls: &[DVector<T>]) -> Vec<DVector<T>> {
    let mut states = Vec::with_capacity(controls.len() + 1);
    states.push(prob.initial_state.clone());
    for u in controls {
        let next = prob.model.step(states.last().expect("nonempty"), u, prob.dt);
        states.push(next);
    }
    states
}

/// `(T, R)` residuals of every cell at the iterate's states and certificates.
pub fn cell_residuals<T: Real>(traj: &TrajectoryIterate<T>, prob: &MpcProblem<T>) -> Vec<(T, DVector<T>)> {
    let poses: Vec<_> = traj.states.iter().map(|s| prob.model.pose_of(s)).collect();
    traj.cells
        .iter()
        .map(|c| {
            let part = &prob.robot.parts()[c.tag.part];
            let obs = prob.obstacles.get(c.tag.obstacle);
            let pose = &poses[c.tag.step];
            (
                translation_residual(&c.cert, obs, pose),
                rotation_residual(&c.cert, part, obs, pose),
            )
        })
        .collect()
}

/// `zeta += T`, `xi += R`, evaluated at the iterate's (new) states and
/// certificates.
pub fn multiplier_update<T: Real>(traj: &mut TrajectoryIterate<T>, prob: &MpcProblem<T>) {
    let res = cell_residuals(traj, prob);
    for (cell, (t_res, r_res)) in traj.cells.iter_mut().zip(res) {
        cell.zeta += t_res;
        cell.xi += r_res;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageTimes {
    pub dual: Duration,
    pub state: Duration,
    pub multiplier: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmReport<T: Real> {
    pub iterations_run: usize,
    pub primal_residual_history: Vec<T>,
    pub dual_residual_history: Vec<T>,
    pub converged: bool,
    pub stage_times: StageTimes,
    /// Iterations whose state QP failed and kept the previous trajectory.
    pub state_failures: usize,
    /// Cell solves that failed across all iterations.
    pub dual_failures: usize,
}

/// Runs ADMM until the stopping test passes or `max_iters` is reached.
///
/// Without convergence, the iterate with the smallest primal change is
/// returned.
pub fn solve_mpc<T: Real>(
    prob: &MpcProblem<T>,
    params: &AdmmParams<T>,
    warm_start: Option<&TrajectoryIterate<T>>,
) -> Result<(TrajectoryIterate<T>, AdmmReport<T>)> {
    prob.validate()?;
    params.validate()?;
    let (eps_pri, eps_dual) = params.thresholds(prob);
    let mut iterate = match warm_start {
        Some(w) => w.reconciled(prob),
        None => TrajectoryIterate::cold_start(prob),
    };
    let mut report = AdmmReport {
        iterations_run: 0,
        primal_residual_history: Vec::new(),
        dual_residual_history: Vec::new(),
        converged: false,
        stage_times: StageTimes::default(),
        state_failures: 0,
        dual_failures: 0,
    };
    let mut best: Option<(T, TrajectoryIterate<T>)> = None;

    for k in 0..params.max_iters {
        let t0 = Instant::now();
        let du = dual_update(&iterate, prob, params.backend, &params.lemke);
        report.dual_failures += du.failures.len();
        let t1 = Instant::now();

        let previous = iterate.certificates();
        let certs_for_state = if params.gauss_seidel { &du.certificates } else { &previous };
        let mut next = iterate.clone();
        match state_update(&iterate, certs_for_state, prob, params.sigma, &params.lemke) {
            Ok((states, controls)) => {
                next.states = states;
                next.controls = controls;
            }
            Err(e) => {
                log::warn!("state update failed at iteration {k}: {e}");
                report.state_failures += 1;
            }
        }
        let t2 = Instant::now();
        for (cell, cert) in next.cells.iter_mut().zip(du.certificates) {
            cell.cert = cert;
        }
        multiplier_update(&mut next, prob);
        next.iteration = k + 1;
        let t3 = Instant::now();
        report.stage_times.dual += t1 - t0;
        report.stage_times.state += t2 - t1;
        report.stage_times.multiplier += t3 - t2;

        let check = check_stopping(&iterate, &next, eps_pri, eps_dual);
        report.primal_residual_history.push(check.primal);
        report.dual_residual_history.push(check.dual);
        report.iterations_run = k + 1;
        iterate = next;
        if check.stop {
            report.converged = true;
            return Ok((iterate, report));
        }
        if best.as_ref().is_none_or(|(p, _)| check.primal < *p) {
            best = Some((check.primal, iterate.clone()));
        }
    }
    let out = best.map(|(_, it)| it).unwrap_or(iterate);
    Ok((out, report))
}
