//! Small dense linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::{lit, Real};

/// Solves `a x = b` with partial-pivot LU. `None` if `a` is singular.
pub fn solve<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Option<DVector<T>> {
    if a.nrows() == 0 {
        return Some(DVector::zeros(0));
    }
    a.clone().lu().solve(b)
}

/// Infinity norm of a vector (0 for empty vectors).
pub fn norm_inf<T: Real>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Smallest entry (`+inf`-like large value is not used; empty returns 0).
pub fn min_entry<T: Real>(v: &DVector<T>) -> T {
    v.iter().copied().reduce(|a, b| a.min(b)).unwrap_or_else(T::zero)
}

/// Planar rotation by `theta`.
pub fn rotation2<T: Real>(theta: T) -> DMatrix<T> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Derivative of [`rotation2`] with respect to `theta`.
pub fn rotation2_derivative<T: Real>(theta: T) -> DMatrix<T> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[-s, -c, c, -s])
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut r = a % two_pi;
    if r > T::pi() {
        r -= two_pi;
    } else if r <= -T::pi() {
        r += two_pi;
    }
    r
}

/// `true` if `r` is orthogonal with determinant `+1` within `tol`.
pub fn is_rotation<T: Real>(r: &DMatrix<T>, tol: T) -> bool {
    if !r.is_square() {
        return false;
    }
    let n = r.nrows();
    let gram = r.transpose() * r;
    let ortho = (gram - DMatrix::<T>::identity(n, n)).iter().all(|x| x.abs() <= tol);
    ortho && (r.determinant() - T::one()).abs() <= tol
}

/// Symmetric part `(m + m^T) / 2`.
pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * lit::<T>(0.5)
}
