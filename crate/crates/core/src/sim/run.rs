//! Receding-horizon simulation loop.

use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::admm::{solve_mpc, AdmmParams, MpcProblem, TrajectoryIterate};
use crate::batch::Backend;
use crate::collision_lp::min_scale_posed;
use crate::sim::scenario::Scenario;
use crate::sim::trace::{Trace, TraceRow};
use crate::Result;

/// A pair counts as colliding below this scale.
pub const COLLISION_THRESHOLD: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GoalReached,
    Collision { step: usize },
    Timeout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub success: bool,
    pub termination: Termination,
    /// Simulated seconds until termination.
    pub navigation_time: f64,
    /// Accumulated tracking plus control cost of the executed motion.
    pub navigation_cost: f64,
    /// Smallest scale over every pair and every visited state.
    pub min_scale_overall: f64,
    pub per_step_solve_times: Vec<Duration>,
    /// Steps where ADMM stopped at its iteration limit.
    pub unconverged_steps: usize,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub metrics: RunMetrics,
    pub trace: Trace,
}

/// Smallest scale of any robot part against any obstacle at `state`;
/// `+inf` without obstacles.
pub fn min_scale_at(scn: &Scenario, state: &DVector<f64>) -> Result<f64> {
    let pose = scn.model.pose_of(state);
    let mut best = f64::INFINITY;
    for part in scn.robot.parts() {
        for obs in scn.obstacles.iter() {
            best = best.min(min_scale_posed(part, &pose, obs)?.alpha_star);
        }
    }
    Ok(best)
}

/// MPC problem for the current `state` at simulated `time`.
pub fn build_problem(scn: &Scenario, state: &DVector<f64>, time: f64) -> MpcProblem<f64> {
    let position = scn.model.position(state);
    let mut reference: Vec<DVector<f64>> = (0..=scn.horizon)
        .map(|t| scn.reference_state(time + t as f64 * scn.dt))
        .collect();
    // Keep angles on the branch nearest the current state.
    let mut anchor = state.clone();
    for r in reference.iter_mut() {
        *r = &anchor - scn.model.state_error(&anchor, r);
        anchor = r.clone();
    }
    MpcProblem {
        horizon: scn.horizon,
        dt: scn.dt,
        q_s: scn.q_s.clone(),
        q_u: scn.q_u.clone(),
        s_min: scn.s_min.clone(),
        s_max: scn.s_max.clone(),
        u_min: scn.u_min.clone(),
        u_max: scn.u_max.clone(),
        reference,
        initial_state: state.clone(),
        robot: scn.planning_robot(),
        obstacles: scn.obstacles.clone(),
        active_obstacles: scn.sensed_obstacles(&position),
        model: scn.model.clone(),
    }
}

pub fn admm_params(scn: &Scenario, backend: Backend) -> AdmmParams<f64> {
    AdmmParams {
        sigma: scn.sigma,
        eps_pri: scn.eps_pri,
        eps_dual: scn.eps_dual,
        max_iters: scn.max_iters,
        backend,
        ..AdmmParams::default()
    }
}

fn stage_cost(scn: &Scenario, state: &DVector<f64>, control: &DVector<f64>, time: f64) -> f64 {
    let e = scn.model.state_error(state, &scn.reference_state(time));
    e.dot(&(&scn.q_s * &e)) + control.dot(&(&scn.q_u * control))
}

/// Runs the closed loop until the goal is reached, a collision occurs at a
/// true state, or the step limit is hit.
pub fn run_simulation(scn: &Scenario, backend: Backend) -> Result<SimOutput> {
    let mut trace = Trace::new(scn.n_s(), scn.n_u());
    let params = admm_params(scn, backend);
    let mut state = scn.initial_state.clone();
    let mut warm: Option<TrajectoryIterate<f64>> = None;
    let mut solve_times = Vec::new();
    let mut unconverged = 0;
    let mut min_overall = f64::INFINITY;
    let mut cost = 0.0;
    let zero_u = DVector::zeros(scn.n_u());

    let mut step = 0;
    let termination = loop {
        let time = step as f64 * scn.dt;
        let scale = min_scale_at(scn, &state)?;
        min_overall = min_overall.min(scale);
        let terminal = |reason| (reason, stage_cost(scn, &state, &zero_u, time));
        let done = if scale < COLLISION_THRESHOLD {
            Some(terminal(Termination::Collision { step }))
        } else if (scn.model.position(&state) - scn.goal()).norm() <= scn.goal_tolerance {
            Some(terminal(Termination::GoalReached))
        } else if step >= scn.max_steps {
            Some(terminal(Termination::Timeout))
        } else {
            None
        };
        if let Some((reason, c)) = done {
            cost += c;
            trace.rows.push(TraceRow {
                step,
                time,
                state: state.iter().copied().collect(),
                control: vec![0.0; scn.n_u()],
                cost: c,
                min_scale: scale,
                admm_iters: 0,
                solve_us: 0,
                converged: true,
            });
            break reason;
        }

        let prob = build_problem(scn, &state, time);
        let start_iterate = warm.as_ref().map(|w| w.shifted(&prob));
        let t0 = Instant::now();
        let (iterate, report) = solve_mpc(&prob, &params, start_iterate.as_ref())?;
        let elapsed = t0.elapsed();
        solve_times.push(elapsed);
        if !report.converged {
            unconverged += 1;
            log::debug!("step {step}: ADMM stopped after {} iterations", report.iterations_run);
        }
        let u = iterate.controls[0].clone();
        let c = stage_cost(scn, &state, &u, time);
        cost += c;
        trace.rows.push(TraceRow {
            step,
            time,
            state: state.iter().copied().collect(),
            control: u.iter().copied().collect(),
            cost: c,
            min_scale: scale,
            admm_iters: report.iterations_run,
            solve_us: elapsed.as_micros() as u64,
            converged: report.converged,
        });
        state = scn.model.step(&state, &u, scn.dt);
        warm = Some(iterate);
        step += 1;
    };

    let metrics = RunMetrics {
        success: termination == Termination::GoalReached,
        termination,
        navigation_time: step as f64 * scn.dt,
        navigation_cost: cost,
        min_scale_overall: min_overall,
        per_step_solve_times: solve_times,
        unconverged_steps: unconverged,
    };
    Ok(SimOutput { metrics, trace })
}
