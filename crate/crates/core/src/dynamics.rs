//! Discrete-time robot models `s_{t+1} = s_t + f(s_t, u_t)` (forward Euler)
//! with the Jacobians and pose linearizations used by the SQP step.

use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};

use crate::geometry::Pose;
use crate::linalg::{rotation2, rotation2_derivative, wrap_angle};
use crate::{Error, Real, Result};

/// Affine model `s' = a_jac s + b_jac u + c_const` of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedStep<T: Real> {
    pub a_jac: DMatrix<T>,
    pub b_jac: DMatrix<T>,
    pub c_const: DVector<T>,
}

impl<T: Real> LinearizedStep<T> {
    pub fn apply(&self, s: &DVector<T>, u: &DVector<T>) -> DVector<T> {
        &self.a_jac * s + &self.b_jac * u + &self.c_const
    }
}

/// First-order expansion of `R(s)` and `rho(s)` about a state.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedPose<T: Real> {
    pub rot0: DMatrix<T>,
    /// `rot_jac[k] = dR / ds_k`, one `d x d` matrix per state component.
    pub rot_jac: Vec<DMatrix<T>>,
    pub trans0: DVector<T>,
    /// `d x n_s`.
    pub trans_jac: DMatrix<T>,
}

pub trait DynamicsModel<T: Real>: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn n_s(&self) -> usize;
    fn n_u(&self) -> usize;
    /// Spatial dimension of the pose.
    fn dim(&self) -> usize;

    fn step(&self, s: &DVector<T>, u: &DVector<T>, dt: T) -> DVector<T>;
    fn linearize(&self, s: &DVector<T>, u: &DVector<T>, dt: T) -> LinearizedStep<T>;
    fn pose_of(&self, s: &DVector<T>) -> Pose<T>;
    fn linearize_pose(&self, s: &DVector<T>) -> LinearizedPose<T>;

    /// Tracking error `s - reference`; angles use the shortest difference.
    fn state_error(&self, s: &DVector<T>, reference: &DVector<T>) -> DVector<T> {
        s - reference
    }

    /// Reference state at `position` moving along unit `direction` at `speed`.
    fn reference_state(&self, position: &DVector<T>, direction: &DVector<T>, speed: T) -> DVector<T>;

    fn position(&self, s: &DVector<T>) -> DVector<T> {
        self.pose_of(s).translation().clone()
    }
}

/// Builds `c_const` so the affine model is exact at `(s, u)`.
fn anchored<T: Real>(
    model: &dyn DynamicsModel<T>,
    s: &DVector<T>,
    u: &DVector<T>,
    dt: T,
    a_jac: DMatrix<T>,
    b_jac: DMatrix<T>,
) -> LinearizedStep<T> {
    let next = model.step(s, u, dt);
    let c_const = next - &a_jac * s - &b_jac * u;
    LinearizedStep { a_jac, b_jac, c_const }
}

/// Planar point mass: `s = (px, py, vx, vy)`, `u = (ax, ay)`; rotation fixed
/// to the identity.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleIntegrator2d;

impl<T: Real> DynamicsModel<T> for DoubleIntegrator2d {
    fn name(&self) -> &'static str {
        "double_integrator"
    }

    fn n_s(&self) -> usize {
        4
    }

    fn n_u(&self) -> usize {
        2
    }

    fn dim(&self) -> usize {
        2
    }

    fn step(&self, s: &DVector<T>, u: &DVector<T>, dt: T) -> DVector<T> {
        DVector::from_vec(vec![
            s[0] + s[2] * dt,
            s[1] + s[3] * dt,
            s[2] + u[0] * dt,
            s[3] + u[1] * dt,
        ])
    }

    fn linearize(&self, s: &DVector<T>, u: &DVector<T>, dt: T) -> LinearizedStep<T> {
        let mut a = DMatrix::<T>::identity(4, 4);
        a[(0, 2)] = dt;
        a[(1, 3)] = dt;
        let mut b = DMatrix::<T>::zeros(4, 2);
        b[(2, 0)] = dt;
        b[(3, 1)] = dt;
        anchored(self, s, u, dt, a, b)
    }

    fn pose_of(&self, s: &DVector<T>) -> Pose<T> {
        Pose::from_translation(DVector::from_vec(vec![s[0], s[1]]))
    }

    fn linearize_pose(&self, s: &DVector<T>) -> LinearizedPose<T> {
        let mut trans_jac = DMatrix::<T>::zeros(2, 4);
        trans_jac[(0, 0)] = T::one();
        trans_jac[(1, 1)] = T::one();
        LinearizedPose {
            rot0: DMatrix::identity(2, 2),
            rot_jac: vec![DMatrix::zeros(2, 2); 4],
            trans0: DVector::from_vec(vec![s[0], s[1]]),
            trans_jac,
        }
    }

    fn reference_state(&self, position: &DVector<T>, direction: &DVector<T>, speed: T) -> DVector<T> {
        DVector::from_vec(vec![
            position[0],
            position[1],
            direction[0] * speed,
            direction[1] * speed,
        ])
    }
}

/// Planar unicycle: `s = (x, y, theta)`, `u = (v, omega)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Unicycle;

impl<T: Real> DynamicsModel<T> for Unicycle {
    fn name(&self) -> &'static str {
        "unicycle"
    }

    fn n_s(&self) -> usize {
        3
    }

    fn n_u(&self) -> usize {
        2
    }

    fn dim(&self) -> usize {
        2
    }

    fn step(&self, s: &DVector<T>, u: &DVector<T>, dt: T) -> DVector<T> {
        let (sin, cos) = s[2].sin_cos();
        DVector::from_vec(vec![
            s[0] + u[0] * cos * dt,
            s[1] + u[0] * sin * dt,
            s[2] + u[1] * dt,
        ])
    }

    fn linearize(&self, s: &DVector<T>, u: &DVector<T>, dt: T) -> LinearizedStep<T> {
        let (sin, cos) = s[2].sin_cos();
        let mut a = DMatrix::<T>::identity(3, 3);
        a[(0, 2)] = -u[0] * sin * dt;
        a[(1, 2)] = u[0] * cos * dt;
        let mut b = DMatrix::<T>::zeros(3, 2);
        b[(0, 0)] = cos * dt;
        b[(1, 0)] = sin * dt;
        b[(2, 1)] = dt;
        anchored(self, s, u, dt, a, b)
    }

    fn pose_of(&self, s: &DVector<T>) -> Pose<T> {
        Pose::new(rotation2(s[2]), DVector::from_vec(vec![s[0], s[1]]))
            .expect("planar rotation is orthogonal")
    }

    fn linearize_pose(&self, s: &DVector<T>) -> LinearizedPose<T> {
        let mut trans_jac = DMatrix::<T>::zeros(2, 3);
        trans_jac[(0, 0)] = T::one();
        trans_jac[(1, 1)] = T::one();
        LinearizedPose {
            rot0: rotation2(s[2]),
            rot_jac: vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2), rotation2_derivative(s[2])],
            trans0: DVector::from_vec(vec![s[0], s[1]]),
            trans_jac,
        }
    }

    fn state_error(&self, s: &DVector<T>, reference: &DVector<T>) -> DVector<T> {
        let mut e = s - reference;
        e[2] = wrap_angle(e[2]);
        e
    }

    fn reference_state(&self, position: &DVector<T>, direction: &DVector<T>, _speed: T) -> DVector<T> {
        DVector::from_vec(vec![position[0], position[1], direction[1].atan2(direction[0])])
    }
}

/// Model lookup by the names used in scenario files.
pub fn model_from_name<T: Real>(name: &str) -> Result<Box<dyn DynamicsModel<T>>> {
    match name {
        "double_integrator" => Ok(Box::new(DoubleIntegrator2d)),
        "unicycle" => Ok(Box::new(Unicycle)),
        other => Err(Error::InvalidProblem(format!(
            "unknown dynamics model {other:?} (expected \"double_integrator\" or \"unicycle\")"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn double_integrator_step() {
        let s = DynamicsModel::<f64>::step(&DoubleIntegrator2d, &v(&[0.0, 0.0, 1.0, 0.0]), &v(&[0.0, 0.0]), 0.1);
        assert_eq!(s, v(&[0.1, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn unicycle_steps() {
        let m = Unicycle;
        let s = DynamicsModel::<f64>::step(&m, &v(&[0.0, 0.0, 0.0]), &v(&[1.0, 0.0]), 0.1);
        assert_eq!(s, v(&[0.1, 0.0, 0.0]));
        let s = DynamicsModel::<f64>::step(&m, &v(&[0.0, 0.0, FRAC_PI_2]), &v(&[1.0, 0.0]), 0.1);
        assert!((s - v(&[0.0, 0.1, FRAC_PI_2])).amax() < 1e-15);
    }

    #[test]
    fn unicycle_heading_jacobian() {
        let lin = DynamicsModel::<f64>::linearize(&Unicycle, &v(&[0.0, 0.0, 0.0]), &v(&[1.0, 0.0]), 0.1);
        assert_eq!(lin.a_jac[(0, 2)], 0.0);
        assert!((lin.a_jac[(1, 2)] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn linearization_exact_at_anchor() {
        let s = v(&[0.3, -0.2, 1.1]);
        let u = v(&[0.7, -0.4]);
        let lin = DynamicsModel::<f64>::linearize(&Unicycle, &s, &u, 0.1);
        let exact = DynamicsModel::<f64>::step(&Unicycle, &s, &u, 0.1);
        assert!((lin.apply(&s, &u) - exact).amax() < 1e-15);
    }

    #[test]
    fn poses() {
        let p = DynamicsModel::<f64>::pose_of(&Unicycle, &v(&[1.0, 2.0, 0.0]));
        assert_eq!(p.rotation(), &DMatrix::identity(2, 2));
        assert_eq!(p.translation(), &v(&[1.0, 2.0]));
        let p = DynamicsModel::<f64>::pose_of(&Unicycle, &v(&[0.0, 0.0, FRAC_PI_2]));
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((p.rotation() - expected).amax() < 1e-15);
        let lp = DynamicsModel::<f64>::linearize_pose(&Unicycle, &v(&[0.0, 0.0, 0.0]));
        assert!((&lp.rot_jac[2] - DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).amax() < 1e-15);
        let q = DynamicsModel::<f64>::pose_of(&DoubleIntegrator2d, &v(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(q.rotation(), &DMatrix::identity(2, 2));
        assert_eq!(q.translation(), &v(&[1.0, 2.0]));
    }

    #[test]
    fn angle_error_wraps() {
        let e = DynamicsModel::<f64>::state_error(&Unicycle, &v(&[0.0, 0.0, 3.1]), &v(&[0.0, 0.0, -3.1]));
        assert!((e[2] - (6.2 - std::f64::consts::TAU)).abs() < 1e-12);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(model_from_name::<f64>("unicycle").unwrap().n_s(), 3);
        assert_eq!(model_from_name::<f64>("double_integrator").unwrap().n_s(), 4);
        assert!(model_from_name::<f64>("quadrotor").is_err());
    }
}
