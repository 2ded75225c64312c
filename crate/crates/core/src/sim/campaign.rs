//! Seeded random planar scenarios for success-rate campaigns.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use std::f64::consts::PI;

use crate::sim::scenario::{Scenario, ScenarioFile, ShapeSpec};
use crate::Result;

/// Start-to-goal distance along x.
const LENGTH: f64 = 12.0;
/// Obstacles keep this clearance from the start and the goal.
const CLEARANCE: f64 = 1.5;

/// Box with half extents `h` centred at `c`, rotated by `angle`.
fn rotated_box(c: [f64; 2], h: [f64; 2], angle: f64) -> ShapeSpec {
    let mut a = Vec::with_capacity(4);
    let mut b = Vec::with_capacity(4);
    for k in 0..4 {
        let theta = angle + k as f64 * PI / 2.0;
        let n = [theta.cos(), theta.sin()];
        a.push(n.to_vec());
        b.push(n[0] * c[0] + n[1] * c[1] + h[k % 2]);
    }
    ShapeSpec {
        center: None,
        half_extents: None,
        a: Some(a),
        b: Some(b),
    }
}

/// A double-integrator scenario from `(0, 0)` to `(12, 0)` through three
/// random waypoints, with `n_obstacles` randomly placed and oriented boxes.
pub fn random_scenario_file(seed: u64, n_obstacles: usize) -> ScenarioFile {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut waypoints = vec![vec![0.0, 0.0]];
    for k in 1..4 {
        waypoints.push(vec![LENGTH * k as f64 / 4.0, rng.gen_range(-1.5..1.5)]);
    }
    waypoints.push(vec![LENGTH, 0.0]);
    let length: f64 = waypoints
        .windows(2)
        .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
        .sum();

    let mut obstacle = Vec::with_capacity(n_obstacles);
    while obstacle.len() < n_obstacles {
        let c = [rng.gen_range(1.5..LENGTH - 1.5), rng.gen_range(-3.5..3.5)];
        let h: [f64; 2] = [rng.gen_range(0.25..0.6), rng.gen_range(0.25..0.6)];
        let reach = (h[0] * h[0] + h[1] * h[1]).sqrt() + CLEARANCE;
        let near = |p: [f64; 2]| ((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)).sqrt() < reach;
        if near([0.0, 0.0]) || near([LENGTH, 0.0]) {
            continue;
        }
        obstacle.push(rotated_box(c, h, rng.gen_range(-PI..PI)));
    }

    ScenarioFile {
        name: format!("random-{seed}"),
        dimension: 2,
        model: "double_integrator".into(),
        dt: 0.1,
        horizon: 16,
        duration: length / 1.5,
        goal_tolerance: 0.3,
        sensing_radius: 5.0,
        sigma: 300.0,
        eps_pri: Some(1e-4),
        eps_dual: Some(1e-4),
        max_iters: 100,
        seed,
        inflation: 1.1,
        max_steps: None,
        q_state: vec![1.0, 1.0, 0.1, 0.1],
        q_control: vec![0.05, 0.05],
        initial_state: vec![0.0, 0.0, 0.0, 0.0],
        waypoints,
        state_min: Some(vec![f64::NEG_INFINITY, f64::NEG_INFINITY, -3.0, -3.0]),
        state_max: Some(vec![f64::INFINITY, f64::INFINITY, 3.0, 3.0]),
        control_min: vec![-4.0, -4.0],
        control_max: vec![4.0, 4.0],
        robot: vec![ShapeSpec::from_box(&[0.0, 0.0], &[0.25, 0.15])],
        obstacle,
    }
}

pub fn random_scenario(seed: u64, n_obstacles: usize) -> Result<Scenario> {
    Scenario::from_file(random_scenario_file(seed, n_obstacles))
}
