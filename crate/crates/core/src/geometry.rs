//! Halfspace polytopes, rigid poses and the robot / obstacle world model.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{is_rotation, solve};
use crate::simplex::{LinearProgram, LpStatus, VarKind};
use crate::{lit, tol, Error, Real, Result};

/// Membership tolerance used by [`HalfspacePolytope::contains`].
pub const CONTAINS_TOL: f64 = 1e-9;

/// Convex polytope `{x : A x <= b}` in `d` dimensions.
///
/// Rows are stored as given. Boundedness and nonemptiness are checked by
/// [`HalfspacePolytope::validate`], not on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspacePolytope<T: Real> {
    a: DMatrix<T>,
    b: DVector<T>,
}

impl<T: Real> HalfspacePolytope<T> {
    pub fn new(a: DMatrix<T>, b: DVector<T>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        if a.ncols() == 0 {
            return Err(Error::InvalidPolytope("zero-dimensional polytope".into()));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &DVector<T> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.a.nrows()
    }

    /// `true` iff `A p <= b + 1e-9` row-wise.
    pub fn contains(&self, point: &DVector<T>) -> bool {
        assert_eq!(point.len(), self.dim(), "point dimension");
        let slack = &self.a * point - &self.b;
        let eps = lit::<T>(CONTAINS_TOL);
        slack.iter().all(|s| *s <= eps)
    }

    /// Checks the row count, nonemptiness and boundedness.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.n_rows() < d + 1 {
            return Err(Error::InvalidPolytope(format!(
                "{} halfspaces cannot bound a polytope in {} dimensions",
                self.n_rows(),
                d
            )));
        }
        if !self.is_nonempty() {
            return Err(Error::InvalidPolytope("polytope is empty".into()));
        }
        if !self.is_bounded() {
            return Err(Error::InvalidPolytope("polytope is unbounded".into()));
        }
        Ok(())
    }

    /// Phase-one feasibility of `A x <= b`.
    pub fn is_nonempty(&self) -> bool {
        let lp = LinearProgram::new(DVector::zeros(self.dim()), self.a.clone(), self.b.clone())
            .with_vars(vec![VarKind::Free; self.dim()]);
        lp.solve().status == LpStatus::Optimal
    }

    /// `true` iff the recession cone `{x : A x <= 0}` is `{0}`.
    ///
    /// Each coordinate is maximised and minimised over the cone intersected
    /// with the unit box; a nonzero optimum exposes a recession direction.
    pub fn is_bounded(&self) -> bool {
        let d = self.dim();
        let mut rows = DMatrix::<T>::zeros(self.n_rows() + 2 * d, d);
        rows.view_mut((0, 0), (self.n_rows(), d)).copy_from(&self.a);
        let mut rhs = DVector::<T>::zeros(self.n_rows() + 2 * d);
        for k in 0..d {
            rows[(self.n_rows() + 2 * k, k)] = T::one();
            rows[(self.n_rows() + 2 * k + 1, k)] = -T::one();
            rhs[self.n_rows() + 2 * k] = T::one();
            rhs[self.n_rows() + 2 * k + 1] = T::one();
        }
        for k in 0..d {
            for sign in [T::one(), -T::one()] {
                let mut c = DVector::<T>::zeros(d);
                c[k] = -sign;
                let lp = LinearProgram::new(c, rows.clone(), rhs.clone())
                    .with_vars(vec![VarKind::Free; d]);
                let sol = lp.solve();
                if sol.status != LpStatus::Optimal || -sol.objective > tol::<T>(1e-9) {
                    return false;
                }
            }
        }
        true
    }

    /// Vertices by brute-force intersection of every `d`-subset of rows.
    ///
    /// Intended for small polytopes (plotting, tests). Duplicates within
    /// `1e-9` are merged.
    pub fn vertices(&self) -> Vec<DVector<T>> {
        let d = self.dim();
        let m = self.n_rows();
        let mut out: Vec<DVector<T>> = Vec::new();
        let mut idx: Vec<usize> = (0..d).collect();
        if m < d {
            return out;
        }
        let eps = lit::<T>(1e-9);
        loop {
            let sub = DMatrix::from_fn(d, d, |r, c| self.a[(idx[r], c)]);
            let rhs = DVector::from_fn(d, |r, _| self.b[idx[r]]);
            if sub.determinant().abs() > lit::<T>(1e-12) {
                if let Some(v) = solve(&sub, &rhs) {
                    let slack = &self.a * &v - &self.b;
                    if slack.iter().all(|s| *s <= eps * lit::<T>(1e3))
                        && !out.iter().any(|w| (w - &v).amax() <= eps)
                    {
                        out.push(v);
                    }
                }
            }
            // next combination
            let mut k = d;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if idx[k] < m - d + k {
                    idx[k] += 1;
                    for l in k + 1..d {
                        idx[l] = idx[l - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    /// Translates the polytope by `offset`.
    pub fn translated(&self, offset: &DVector<T>) -> Self {
        Self {
            a: self.a.clone(),
            b: &self.b + &self.a * offset,
        }
    }
}

/// Axis-aligned box as a polytope with `2 d` rows `(+e_1, -e_1, +e_2, ...)`.
pub fn make_box<T: Real>(center: &DVector<T>, half_extents: &DVector<T>) -> Result<HalfspacePolytope<T>> {
    let d = center.len();
    if half_extents.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: half_extents.len(),
        });
    }
    if half_extents.iter().any(|h| *h <= T::zero()) {
        return Err(Error::NonPositiveExtent);
    }
    let mut a = DMatrix::<T>::zeros(2 * d, d);
    let mut b = DVector::<T>::zeros(2 * d);
    for k in 0..d {
        a[(2 * k, k)] = T::one();
        a[(2 * k + 1, k)] = -T::one();
        b[2 * k] = center[k] + half_extents[k];
        b[2 * k + 1] = -center[k] + half_extents[k];
    }
    HalfspacePolytope::new(a, b)
}

/// Robot part in its body frame; the body origin lies strictly inside.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyPolytope<T: Real> {
    poly: HalfspacePolytope<T>,
}

impl<T: Real> BodyPolytope<T> {
    pub fn new(poly: HalfspacePolytope<T>) -> Result<Self> {
        if poly.b().iter().any(|v| *v <= T::zero()) {
            return Err(Error::InvalidPolytope(
                "body polytope must contain its origin strictly (b > 0)".into(),
            ));
        }
        Ok(Self { poly })
    }

    pub fn poly(&self) -> &HalfspacePolytope<T> {
        &self.poly
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn n_rows(&self) -> usize {
        self.poly.n_rows()
    }

    /// Uniformly enlarged copy (`b` scaled by `factor > 0`).
    pub fn inflated(&self, factor: T) -> Self {
        Self {
            poly: HalfspacePolytope {
                a: self.poly.a.clone(),
                b: &self.poly.b * factor,
            },
        }
    }
}

/// Rigid transform `y = R x + rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose<T: Real> {
    rotation: DMatrix<T>,
    translation: DVector<T>,
}

impl<T: Real> Pose<T> {
    pub fn new(rotation: DMatrix<T>, translation: DVector<T>) -> Result<Self> {
        if rotation.nrows() != translation.len() {
            return Err(Error::DimensionMismatch {
                expected: translation.len(),
                found: rotation.nrows(),
            });
        }
        if !is_rotation(&rotation, lit::<T>(1e-9).max(T::default_epsilon() * lit(1e3))) {
            return Err(Error::InvalidPose("rotation is not in SO(d)".into()));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            rotation: DMatrix::identity(d, d),
            translation: DVector::zeros(d),
        }
    }

    pub fn from_translation(translation: DVector<T>) -> Self {
        let d = translation.len();
        Self {
            rotation: DMatrix::identity(d, d),
            translation,
        }
    }

    pub fn rotation(&self) -> &DMatrix<T> {
        &self.rotation
    }

    pub fn translation(&self) -> &DVector<T> {
        &self.translation
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        let t = -(&rt * &self.translation);
        Self {
            rotation: rt,
            translation: t,
        }
    }

    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        &self.rotation * x + &self.translation
    }
}

/// World-frame image of a body polytope:
/// `{y : (A R^T) y <= b + A R^T rho}`.
pub fn transform_polytope<T: Real>(
    body: &HalfspacePolytope<T>,
    pose: &Pose<T>,
) -> Result<HalfspacePolytope<T>> {
    if body.dim() != pose.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            found: pose.dim(),
        });
    }
    let art = body.a() * pose.rotation().transpose();
    let b = body.b() + &art * pose.translation();
    HalfspacePolytope::new(art, b)
}

/// Expresses a world-frame polytope in the frame of `pose`:
/// `{x : (C R) x <= d - C rho}`.
pub fn to_body_frame<T: Real>(
    world: &HalfspacePolytope<T>,
    pose: &Pose<T>,
) -> Result<HalfspacePolytope<T>> {
    transform_polytope(world, &pose.inverse())
}

/// A robot made of `N >= 1` convex parts sharing one pose.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotGeometry<T: Real> {
    parts: Vec<BodyPolytope<T>>,
}

impl<T: Real> RobotGeometry<T> {
    pub fn new(parts: Vec<BodyPolytope<T>>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidProblem("robot needs at least one part".into()));
        };
        let d = first.dim();
        if let Some(p) = parts.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[BodyPolytope<T>] {
        &self.parts
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.parts.iter().enumerate() {
            p.poly()
                .validate()
                .map_err(|e| Error::Validation(format!("robot part {i}: {e}")))?;
        }
        Ok(())
    }
}

/// World obstacles, possibly empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSet<T: Real> {
    obstacles: Vec<HalfspacePolytope<T>>,
}

impl<T: Real> ObstacleSet<T> {
    pub fn new(obstacles: Vec<HalfspacePolytope<T>>) -> Result<Self> {
        if let Some(first) = obstacles.first() {
            let d = first.dim();
            if let Some(o) = obstacles.iter().find(|o| o.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: o.dim(),
                });
            }
        }
        Ok(Self { obstacles })
    }

    pub fn empty() -> Self {
        Self { obstacles: vec![] }
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    pub fn get(&self, j: usize) -> &HalfspacePolytope<T> {
        &self.obstacles[j]
    }

    pub fn iter(&self) -> impl Iterator<Item = &HalfspacePolytope<T>> {
        self.obstacles.iter()
    }

    /// Obstacles must be nonempty and bounded.
    pub fn validate(&self) -> Result<()> {
        for (j, o) in self.obstacles.iter().enumerate() {
            o.validate()
                .map_err(|e| Error::Validation(format!("obstacle {j}: {e}")))?;
        }
        Ok(())
    }
}
