//! Scenario files (TOML) and the reference trajectory built from them.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::dynamics::{model_from_name, DynamicsModel};
use crate::geometry::{make_box, BodyPolytope, HalfspacePolytope, ObstacleSet, RobotGeometry};
use crate::{Error, Result};

/// A polytope given either as an axis-aligned box or as raw halfspaces.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub center: Option<Vec<f64>>,
    pub half_extents: Option<Vec<f64>>,
    pub a: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<f64>>,
}

impl ShapeSpec {
    pub fn from_box(center: &[f64], half_extents: &[f64]) -> Self {
        Self {
            center: Some(center.to_vec()),
            half_extents: Some(half_extents.to_vec()),
            a: None,
            b: None,
        }
    }

    fn build(&self, dim: usize) -> Result<HalfspacePolytope<f64>> {
        let poly = match (&self.center, &self.half_extents, &self.a, &self.b) {
            (Some(c), Some(h), None, None) => {
                if c.len() != dim || h.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: c.len().max(h.len()),
                    });
                }
                make_box(&DVector::from_column_slice(c), &DVector::from_column_slice(h))?
            }
            (None, None, Some(a), Some(b)) => {
                if a.iter().any(|row| row.len() != dim) {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: a.iter().map(Vec::len).find(|&l| l != dim).unwrap_or(0),
                    });
                }
                let flat: Vec<f64> = a.iter().flatten().copied().collect();
                HalfspacePolytope::new(
                    DMatrix::from_row_slice(a.len(), dim, &flat),
                    DVector::from_column_slice(b),
                )?
            }
            _ => {
                return Err(Error::InvalidPolytope(
                    "give either center + half_extents or a + b".into(),
                ))
            }
        };
        poly.validate()?;
        Ok(poly)
    }
}

fn default_goal_tolerance() -> f64 {
    0.3
}
fn default_sigma() -> f64 {
    300.0
}
fn default_max_iters() -> usize {
    100
}
fn default_inflation() -> f64 {
    1.0
}
fn default_radius() -> f64 {
    f64::INFINITY
}

/// On-disk layout of a scenario.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub dimension: usize,
    pub model: String,
    pub dt: f64,
    pub horizon: usize,
    /// Time allotted to traverse the waypoints.
    pub duration: f64,
    #[serde(default = "default_goal_tolerance")]
    pub goal_tolerance: f64,
    #[serde(default = "default_radius")]
    pub sensing_radius: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub eps_pri: Option<f64>,
    pub eps_dual: Option<f64>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub seed: u64,
    /// Robot parts are enlarged by this factor inside the planner only.
    #[serde(default = "default_inflation")]
    pub inflation: f64,
    /// Simulation step limit; defaults to 1.5x the duration plus a horizon.
    pub max_steps: Option<usize>,
    pub q_state: Vec<f64>,
    pub q_control: Vec<f64>,
    pub initial_state: Vec<f64>,
    pub waypoints: Vec<Vec<f64>>,
    pub state_min: Option<Vec<f64>>,
    pub state_max: Option<Vec<f64>>,
    pub control_min: Vec<f64>,
    pub control_max: Vec<f64>,
    pub robot: Vec<ShapeSpec>,
    #[serde(default)]
    pub obstacle: Vec<ShapeSpec>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub model: Arc<dyn DynamicsModel<f64>>,
    pub dt: f64,
    pub horizon: usize,
    pub duration: f64,
    pub goal_tolerance: f64,
    pub sensing_radius: f64,
    pub sigma: f64,
    pub eps_pri: Option<f64>,
    pub eps_dual: Option<f64>,
    pub max_iters: usize,
    pub seed: u64,
    pub inflation: f64,
    pub max_steps: usize,
    pub q_s: DMatrix<f64>,
    pub q_u: DMatrix<f64>,
    pub initial_state: DVector<f64>,
    pub waypoints: Vec<DVector<f64>>,
    pub s_min: DVector<f64>,
    pub s_max: DVector<f64>,
    pub u_min: DVector<f64>,
    pub u_max: DVector<f64>,
    pub robot: RobotGeometry<f64>,
    pub obstacles: ObstacleSet<f64>,
    /// Bounding sphere `(center, radius)` of each obstacle, for sensing.
    pub obstacle_spheres: Vec<(DVector<f64>, f64)>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse {
        path: "<string>".into(),
        message: e.to_string(),
    })?;
    Scenario::from_file(file)
}

fn check_len(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Validation(format!("{name} has length {}, expected {n}", v.len())));
    }
    Ok(())
}

impl Scenario {
    pub fn from_file(f: ScenarioFile) -> Result<Self> {
        let invalid = |m: &str| Err(Error::Validation(m.to_string()));
        let model: Arc<dyn DynamicsModel<f64>> = Arc::from(model_from_name::<f64>(&f.model)?);
        if model.dim() != f.dimension {
            return invalid(&format!(
                "model {} is {}-dimensional but dimension = {}",
                f.model,
                model.dim(),
                f.dimension
            ));
        }
        if !(f.dt > 0.0) {
            return invalid("dt must be positive");
        }
        if f.horizon == 0 {
            return invalid("horizon must be positive");
        }
        if !(f.duration > 0.0) {
            return invalid("duration must be positive");
        }
        if !(f.goal_tolerance > 0.0) || !(f.sensing_radius > 0.0) || !(f.inflation > 0.0) {
            return invalid("goal_tolerance, sensing_radius and inflation must be positive");
        }
        if !(f.sigma > 0.0) {
            return invalid("sigma must be positive");
        }
        let (n_s, n_u, d) = (model.n_s(), model.n_u(), f.dimension);
        check_len("q_state", &f.q_state, n_s)?;
        check_len("q_control", &f.q_control, n_u)?;
        check_len("initial_state", &f.initial_state, n_s)?;
        check_len("control_min", &f.control_min, n_u)?;
        check_len("control_max", &f.control_max, n_u)?;
        if f.q_state.iter().chain(&f.q_control).any(|q| !(*q > 0.0)) {
            return invalid("weights must be positive");
        }
        let s_min = f.state_min.clone().unwrap_or_else(|| vec![f64::NEG_INFINITY; n_s]);
        let s_max = f.state_max.clone().unwrap_or_else(|| vec![f64::INFINITY; n_s]);
        check_len("state_min", &s_min, n_s)?;
        check_len("state_max", &s_max, n_s)?;
        if f.waypoints.len() < 2 {
            return invalid("at least two waypoints are required");
        }
        for w in &f.waypoints {
            check_len("waypoint", w, d)?;
        }
        let mut parts = Vec::with_capacity(f.robot.len());
        for (i, spec) in f.robot.iter().enumerate() {
            let poly = spec
                .build(d)
                .map_err(|e| Error::Validation(format!("robot part {i}: {e}")))?;
            parts.push(BodyPolytope::new(poly).map_err(|e| Error::Validation(format!("robot part {i}: {e}")))?);
        }
        let robot = RobotGeometry::new(parts)?;
        let mut obstacles = Vec::with_capacity(f.obstacle.len());
        for (j, spec) in f.obstacle.iter().enumerate() {
            obstacles.push(
                spec.build(d)
                    .map_err(|e| Error::Validation(format!("obstacle {j}: {e}")))?,
            );
        }
        let obstacle_spheres = obstacles
            .iter()
            .map(|o| {
                let verts = o.vertices();
                let c = verts.iter().fold(DVector::zeros(d), |acc, v| acc + v) / verts.len() as f64;
                let r = verts.iter().map(|v| (v - &c).norm()).fold(0.0, f64::max);
                (c, r)
            })
            .collect();
        let obstacles = ObstacleSet::new(obstacles)?;
        let max_steps = f
            .max_steps
            .unwrap_or_else(|| (1.5 * f.duration / f.dt).ceil() as usize + f.horizon);
        let scn = Scenario {
            name: f.name,
            dim: d,
            model,
            dt: f.dt,
            horizon: f.horizon,
            duration: f.duration,
            goal_tolerance: f.goal_tolerance,
            sensing_radius: f.sensing_radius,
            sigma: f.sigma,
            eps_pri: f.eps_pri,
            eps_dual: f.eps_dual,
            max_iters: f.max_iters,
            seed: f.seed,
            inflation: f.inflation,
            max_steps,
            q_s: DMatrix::from_diagonal(&DVector::from_vec(f.q_state)),
            q_u: DMatrix::from_diagonal(&DVector::from_vec(f.q_control)),
            initial_state: DVector::from_vec(f.initial_state),
            waypoints: f.waypoints.iter().map(|w| DVector::from_column_slice(w)).collect(),
            s_min: DVector::from_vec(s_min),
            s_max: DVector::from_vec(s_max),
            u_min: DVector::from_vec(f.control_min),
            u_max: DVector::from_vec(f.control_max),
            robot,
            obstacles,
            obstacle_spheres,
        };
        if scn.s_min.iter().zip(scn.s_max.iter()).any(|(a, b)| a >= b)
            || scn.u_min.iter().zip(scn.u_max.iter()).any(|(a, b)| a >= b)
        {
            return invalid("bounds must satisfy min < max");
        }
        if scn.u_min.iter().chain(scn.u_max.iter()).any(|u| !u.is_finite()) {
            return invalid("control bounds must be finite");
        }
        if scn.path_length() <= 0.0 {
            return invalid("waypoints must not all coincide");
        }
        Ok(scn)
    }

    pub fn n_s(&self) -> usize {
        self.model.n_s()
    }

    pub fn n_u(&self) -> usize {
        self.model.n_u()
    }

    pub fn goal(&self) -> &DVector<f64> {
        self.waypoints.last().expect("at least two waypoints")
    }

    pub fn path_length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
    }

    /// Position and unit heading on the waypoint path at `time`, traversed at
    /// constant speed over `duration`, plus that speed (zero once finished).
    pub fn reference_point(&self, time: f64) -> (DVector<f64>, DVector<f64>, f64) {
        let total = self.path_length();
        let speed = total / self.duration;
        let mut remaining = (time.max(0.0) * speed).min(total);
        let moving = time < self.duration;
        let mut last_dir = DVector::zeros(self.dim);
        for w in self.waypoints.windows(2) {
            let seg = &w[1] - &w[0];
            let len = seg.norm();
            if len == 0.0 {
                continue;
            }
            let dir = seg / len;
            if remaining <= len {
                return (&w[0] + &dir * remaining, dir, if moving { speed } else { 0.0 });
            }
            remaining -= len;
            last_dir = dir;
        }
        (self.goal().clone(), last_dir, 0.0)
    }

    pub fn reference_state(&self, time: f64) -> DVector<f64> {
        let (p, dir, speed) = self.reference_point(time);
        self.model.reference_state(&p, &dir, speed)
    }

    /// Indices of obstacles whose bounding sphere comes within the sensing
    /// radius of `position`.
    pub fn sensed_obstacles(&self, position: &DVector<f64>) -> Vec<usize> {
        self.obstacle_spheres
            .iter()
            .enumerate()
            .filter(|(_, (c, r))| (position - c).norm() - r <= self.sensing_radius)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn planning_robot(&self) -> RobotGeometry<f64> {
        if self.inflation == 1.0 {
            return self.robot.clone();
        }
        let parts = self.robot.parts().iter().map(|p| p.inflated(self.inflation)).collect();
        RobotGeometry::new(parts).expect("inflation keeps dimensions")
    }
}
