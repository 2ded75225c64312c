//! Scale-based collision detection and its dual certificates.
//!
//! `min_scale` finds the smallest uniform scale `alpha` of the robot polytope
//! (about its own origin) at which it touches the obstacle:
//!
//! ```text
//! min alpha  s.t.  A x <= alpha b,  C x <= d,  alpha >= 0
//! ```
//!
//! `alpha < 1` means the bodies overlap. The dual of this LP is
//!
//! ```text
//! max -d^T mu  s.t.  b^T lambda = 1,  A^T lambda + C^T mu = 0,  lambda, mu >= 0
//! ```
//!
//! and any dual-feasible pair with `-d^T mu >= 1` certifies separation.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{to_body_frame, BodyPolytope, HalfspacePolytope, Pose};
use crate::simplex::{LinearProgram, LpStatus, RowSense, VarKind};
use crate::{lit, Error, Real, Result};

/// Pivot budget for the collision LPs.
const LP_MAX_PIVOTS: usize = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleStatus {
    Optimal,
    /// The obstacle is empty; `alpha_star` is `+inf`.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleResult<T: Real> {
    pub alpha_star: T,
    /// A point of the scaled robot that touches the obstacle (world frame).
    pub witness_point: DVector<T>,
    pub status: ScaleStatus,
}

impl<T: Real> ScaleResult<T> {
    pub fn is_collision(&self) -> bool {
        self.status == ScaleStatus::Optimal && self.alpha_star < T::one()
    }
}

/// Dual multipliers `(lambda, mu)` plus the slack `gamma` of
/// `-(d - C rho)^T mu = 1 + gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate<T: Real> {
    pub lambda: DVector<T>,
    pub mu: DVector<T>,
    pub gamma: T,
}

impl<T: Real> DualCertificate<T> {
    pub fn zeros(n_r: usize, n_o: usize) -> Self {
        Self {
            lambda: DVector::zeros(n_r),
            mu: DVector::zeros(n_o),
            gamma: T::zero(),
        }
    }

    /// `lambda = 1 / sum(b)` in every entry, so `b^T lambda = 1`; `mu = 0`.
    pub fn uniform(body: &BodyPolytope<T>, n_o: usize) -> Self {
        let total = body.poly().b().sum();
        Self {
            lambda: DVector::from_element(body.n_rows(), T::one() / total),
            mu: DVector::zeros(n_o),
            gamma: T::zero(),
        }
    }

    /// Dual objective `-d^T mu` for an obstacle given in the robot frame.
    pub fn dual_objective(&self, d: &DVector<T>) -> T {
        -d.dot(&self.mu)
    }

    /// Stacked `(lambda, mu, gamma)`.
    pub fn stacked(&self) -> DVector<T> {
        let n_r = self.lambda.len();
        let n_o = self.mu.len();
        let mut y = DVector::zeros(n_r + n_o + 1);
        y.rows_mut(0, n_r).copy_from(&self.lambda);
        y.rows_mut(n_r, n_o).copy_from(&self.mu);
        y[n_r + n_o] = self.gamma;
        y
    }

    pub fn from_stacked(y: &DVector<T>, n_r: usize, n_o: usize) -> Self {
        assert_eq!(y.len(), n_r + n_o + 1, "stacked certificate length");
        Self {
            lambda: y.rows(0, n_r).into_owned(),
            mu: y.rows(n_r, n_o).into_owned(),
            gamma: y[n_r + n_o],
        }
    }

    pub fn min_entry(&self) -> T {
        self.lambda
            .iter()
            .chain(self.mu.iter())
            .copied()
            .fold(self.gamma, |a, b| a.min(b))
    }
}

/// Solves the scale LP with the robot polytope scaled about the origin of
/// the frame the polytopes are expressed in.
pub fn min_scale<T: Real>(
    robot: &HalfspacePolytope<T>,
    obstacle: &HalfspacePolytope<T>,
) -> Result<ScaleResult<T>> {
    let d = robot.dim();
    if obstacle.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: obstacle.dim(),
        });
    }
    let n_r = robot.n_rows();
    let n_o = obstacle.n_rows();
    let mut rows = DMatrix::<T>::zeros(n_r + n_o, 1 + d);
    for i in 0..n_r {
        rows[(i, 0)] = -robot.b()[i];
        for k in 0..d {
            rows[(i, 1 + k)] = robot.a()[(i, k)];
        }
    }
    for i in 0..n_o {
        for k in 0..d {
            rows[(n_r + i, 1 + k)] = obstacle.a()[(i, k)];
        }
    }
    let mut rhs = DVector::<T>::zeros(n_r + n_o);
    rhs.rows_mut(n_r, n_o).copy_from(obstacle.b());
    let mut c = DVector::<T>::zeros(1 + d);
    c[0] = T::one();
    let mut vars = vec![VarKind::Free; 1 + d];
    vars[0] = VarKind::NonNegative;
    let lp = LinearProgram::new(c, rows, rhs).with_vars(vars);
    let sol = crate::simplex::solve_lp(&lp, LP_MAX_PIVOTS);
    match sol.status {
        LpStatus::Optimal => Ok(ScaleResult {
            alpha_star: sol.x[0].max(T::zero()),
            witness_point: sol.x.rows(1, d).into_owned(),
            status: ScaleStatus::Optimal,
        }),
        LpStatus::Infeasible => Ok(ScaleResult {
            alpha_star: lit(f64::INFINITY),
            witness_point: DVector::zeros(d),
            status: ScaleStatus::Infeasible,
        }),
        // alpha >= 0 bounds the objective below
        LpStatus::Unbounded => Err(Error::LpUnbounded),
        LpStatus::IterationLimit => Err(Error::IterationLimit(LP_MAX_PIVOTS)),
    }
}

/// Scale of a posed robot part against a world obstacle, scaling about the
/// body origin. The witness is returned in world coordinates.
pub fn min_scale_posed<T: Real>(
    body: &BodyPolytope<T>,
    pose: &Pose<T>,
    obstacle: &HalfspacePolytope<T>,
) -> Result<ScaleResult<T>> {
    let local = to_body_frame(obstacle, pose)?;
    let mut res = min_scale(body.poly(), &local)?;
    if res.status == ScaleStatus::Optimal {
        res.witness_point = pose.apply(&res.witness_point);
    }
    Ok(res)
}

/// Solves the dual of the scale LP directly.
pub fn solve_dual<T: Real>(
    robot: &HalfspacePolytope<T>,
    obstacle: &HalfspacePolytope<T>,
) -> Result<DualCertificate<T>> {
    let d = robot.dim();
    if obstacle.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: obstacle.dim(),
        });
    }
    let n_r = robot.n_rows();
    let n_o = obstacle.n_rows();
    let mut rows = DMatrix::<T>::zeros(1 + d, n_r + n_o);
    for i in 0..n_r {
        rows[(0, i)] = robot.b()[i];
        for k in 0..d {
            rows[(1 + k, i)] = robot.a()[(i, k)];
        }
    }
    for i in 0..n_o {
        for k in 0..d {
            rows[(1 + k, n_r + i)] = obstacle.a()[(i, k)];
        }
    }
    let mut rhs = DVector::<T>::zeros(1 + d);
    rhs[0] = T::one();
    let mut c = DVector::<T>::zeros(n_r + n_o);
    c.rows_mut(n_r, n_o).copy_from(obstacle.b());
    let lp = LinearProgram::new(c, rows, rhs).with_senses(vec![RowSense::Eq; 1 + d]);
    let sol = crate::simplex::solve_lp(&lp, LP_MAX_PIVOTS);
    match sol.status {
        LpStatus::Optimal => {
            let lambda = sol.x.rows(0, n_r).map(|v| v.max(T::zero()));
            let mu = sol.x.rows(n_r, n_o).map(|v| v.max(T::zero()));
            let value = -obstacle.b().dot(&mu);
            Ok(DualCertificate {
                lambda,
                mu,
                gamma: (value - T::one()).max(T::zero()),
            })
        }
        LpStatus::Unbounded => Err(Error::DualUnbounded),
        LpStatus::Infeasible => Err(Error::LpInfeasible),
        LpStatus::IterationLimit => Err(Error::IterationLimit(LP_MAX_PIVOTS)),
    }
}

/// Dual certificate for a posed robot part, in the variables used by the
/// MPC constraints (body-frame `lambda`, world obstacle `mu`).
pub fn solve_dual_posed<T: Real>(
    body: &BodyPolytope<T>,
    pose: &Pose<T>,
    obstacle: &HalfspacePolytope<T>,
) -> Result<DualCertificate<T>> {
    let local = to_body_frame(obstacle, pose)?;
    solve_dual(body.poly(), &local)
}

/// Translation residual `1 + (d - C rho)^T mu + gamma`.
pub fn translation_residual<T: Real>(
    cert: &DualCertificate<T>,
    obstacle: &HalfspacePolytope<T>,
    pose: &Pose<T>,
) -> T {
    let shifted = obstacle.b() - obstacle.a() * pose.translation();
    T::one() + shifted.dot(&cert.mu) + cert.gamma
}

/// Rotation residual `A^T lambda + (C R)^T mu`.
pub fn rotation_residual<T: Real>(
    cert: &DualCertificate<T>,
    body: &BodyPolytope<T>,
    obstacle: &HalfspacePolytope<T>,
    pose: &Pose<T>,
) -> DVector<T> {
    let cr = obstacle.a() * pose.rotation();
    body.poly().a().tr_mul(&cert.lambda) + cr.tr_mul(&cert.mu)
}

/// `true` iff the certificate proves the posed part clear of the obstacle
/// within `tol`: nonnegativity, `b^T lambda = 1`, and both residuals zero.
pub fn check_certificate<T: Real>(
    cert: &DualCertificate<T>,
    body: &BodyPolytope<T>,
    obstacle: &HalfspacePolytope<T>,
    pose: &Pose<T>,
    tol: T,
) -> bool {
    if cert.lambda.len() != body.n_rows() || cert.mu.len() != obstacle.n_rows() {
        return false;
    }
    if cert.min_entry() < -tol {
        return false;
    }
    if (body.poly().b().dot(&cert.lambda) - T::one()).abs() > tol {
        return false;
    }
    if translation_residual(cert, obstacle, pose).abs() > tol {
        return false;
    }
    rotation_residual(cert, body, obstacle, pose).norm() <= tol
}
