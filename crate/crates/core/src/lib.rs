//! Polytope collision avoidance for model predictive control.
//!
//! Robot parts and obstacles are convex polytopes in halfspace form. A pair
//! is collision free when the smallest scale of the robot part that touches
//! the obstacle is at least one; by LP duality that condition becomes a set
//! of linear constraints on dual multipliers. The MPC problem is split with
//! ADMM into one small QP per (part, obstacle, step) cell, each of which is
//! turned into an LCP and solved with Lemke's method, plus one condensed QP
//! over the controls per iteration.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`); the
//! aliases at the bottom of this file fix it to `f64`, which is what the
//! simulation layer uses.

pub mod admm;
pub mod batch;
pub mod collision_lp;
pub mod dual_subproblem;
pub mod dynamics;
mod error;
pub mod geometry;
pub mod lemke;
pub mod linalg;
pub mod sim;
pub mod simplex;

pub use error::{Error, Result};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable by every solver in the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// A tolerance that is `x` in double precision and never tighter than a
/// small multiple of the machine epsilon of `T`.
#[inline]
pub fn tol<T: Real>(x: f64) -> T {
    let floor = T::default_epsilon() * lit::<T>(100.0);
    let v = lit::<T>(x);
    if v > floor {
        v
    } else {
        floor
    }
}

pub use admm::{AdmmParams, AdmmReport, MpcProblem, TrajectoryIterate};
pub use batch::{Backend, BatchRequest, BatchResult};
pub use collision_lp::{DualCertificate, ScaleResult, ScaleStatus};
pub use dual_subproblem::{NonnegQp, ReducedQp, SubproblemData};
pub use dynamics::{DoubleIntegrator2d, DynamicsModel, LinearizedPose, LinearizedStep, Unicycle};
pub use geometry::{BodyPolytope, HalfspacePolytope, ObstacleSet, Pose, RobotGeometry};
pub use lemke::{LcpProblem, LcpSolution, LcpStatus, LemkeOptions};

pub type Polytope = HalfspacePolytope<f64>;
pub type Body = BodyPolytope<f64>;
pub type Pose64 = Pose<f64>;
pub type Robot = RobotGeometry<f64>;
pub type Obstacles = ObstacleSet<f64>;
pub type Certificate = DualCertificate<f64>;
pub type Lcp = LcpProblem<f64>;
pub type LcpSolution64 = LcpSolution<f64>;
pub type Subproblem = SubproblemData<f64>;
pub type Problem = MpcProblem<f64>;
pub type Params = AdmmParams<f64>;
pub type Iterate = TrajectoryIterate<f64>;
