//! Per-cell dual update QPs and their conversion to LCPs.
//!
//! For one (part `i`, obstacle `j`, step `t`) cell the dual update is
//!
//! ```text
//! min_y 1/2 ||K^T y + b||^2   s.t.  kappa^T y = eta,  y >= 0
//! ```
//!
//! with `y = (lambda, mu, gamma)`. The equality is removed by solving it for
//! one component `y_e`, leaving an inequality-constrained QP in the rest,
//! whose KKT system is an LCP.

use nalgebra::{DMatrix, DVector};

use crate::collision_lp::DualCertificate;
use crate::geometry::{BodyPolytope, HalfspacePolytope, Pose};
use crate::lemke::{lemke_solve, LcpProblem, LcpSolution, LcpStatus, LemkeOptions};
use crate::{lit, Error, Real, Result};

/// Identifies a (part, obstacle, step) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellTag {
    pub part: usize,
    pub obstacle: usize,
    pub step: usize,
}

impl CellTag {
    pub fn new(part: usize, obstacle: usize, step: usize) -> Self {
        Self { part, obstacle, step }
    }
}

/// Least-squares form of one cell's dual update.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemData<T: Real> {
    /// `(n_r + n_o + 1) x (1 + d)`, rows `[0 | A_i]`, `[d_j - C_j rho | C_j R]`, `[1 | 0]`.
    pub k_matrix: DMatrix<T>,
    /// `(1 + zeta, xi)`.
    pub b_vec: DVector<T>,
    /// `(b_i, 0, 0)`.
    pub kappa: DVector<T>,
    pub eta: T,
    pub n_r: usize,
    pub n_o: usize,
    pub tag: CellTag,
}

impl<T: Real> SubproblemData<T> {
    pub fn dim(&self) -> usize {
        self.k_matrix.nrows()
    }

    pub fn with_tag(mut self, tag: CellTag) -> Self {
        self.tag = tag;
        self
    }

    /// `1/2 ||K^T y + b||^2`.
    pub fn objective(&self, y: &DVector<T>) -> T {
        let r = self.k_matrix.tr_mul(y) + &self.b_vec;
        r.norm_squared() * lit::<T>(0.5)
    }
}

/// Assembles the cell QP for `part` at `pose` against `obstacle`.
pub fn build_subproblem<T: Real>(
    part: &BodyPolytope<T>,
    obstacle: &HalfspacePolytope<T>,
    pose: &Pose<T>,
    zeta: T,
    xi: &DVector<T>,
) -> Result<SubproblemData<T>> {
    let d = part.dim();
    for found in [obstacle.dim(), pose.dim(), xi.len()] {
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
    }
    let n_r = part.n_rows();
    let n_o = obstacle.n_rows();
    let mut k = DMatrix::<T>::zeros(n_r + n_o + 1, 1 + d);
    k.view_mut((0, 1), (n_r, d)).copy_from(part.poly().a());
    let shifted = obstacle.b() - obstacle.a() * pose.translation();
    k.view_mut((n_r, 0), (n_o, 1)).copy_from(&shifted);
    let cr = obstacle.a() * pose.rotation();
    k.view_mut((n_r, 1), (n_o, d)).copy_from(&cr);
    k[(n_r + n_o, 0)] = T::one();

    let mut b = DVector::<T>::zeros(1 + d);
    b[0] = T::one() + zeta;
    b.rows_mut(1, d).copy_from(xi);

    let mut kappa = DVector::<T>::zeros(n_r + n_o + 1);
    kappa.rows_mut(0, n_r).copy_from(part.poly().b());

    Ok(SubproblemData {
        k_matrix: k,
        b_vec: b,
        kappa,
        eta: T::one(),
        n_r,
        n_o,
        tag: CellTag::new(0, 0, 0),
    })
}

/// Cell QP after eliminating the equality constraint:
///
/// ```text
/// min 1/2 ||K~^T y_u + b~||^2  s.t.  kappa~^T y_u <= eta~,  y_u >= 0
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedQp<T: Real> {
    pub k_tilde: DMatrix<T>,
    pub b_tilde: DVector<T>,
    pub kappa_tilde: DVector<T>,
    pub eta_tilde: T,
    /// Index of the eliminated component of `y`.
    pub pivot_index: usize,
}

impl<T: Real> ReducedQp<T> {
    pub fn objective(&self, y_u: &DVector<T>) -> T {
        (self.k_tilde.tr_mul(y_u) + &self.b_tilde).norm_squared() * lit::<T>(0.5)
    }

    /// The reduced QP in the generic nonnegative form.
    pub fn as_nonneg_qp(&self) -> NonnegQp<T> {
        NonnegQp {
            hessian: gram(&self.k_tilde),
            linear: &self.k_tilde * &self.b_tilde,
            ineq: DMatrix::from_row_slice(1, self.kappa_tilde.len(), self.kappa_tilde.as_slice()),
            ineq_rhs: DVector::from_element(1, self.eta_tilde),
        }
    }
}

/// `K K^T`, filled symmetrically.
fn gram<T: Real>(k: &DMatrix<T>) -> DMatrix<T> {
    let n = k.nrows();
    let mut g = DMatrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = k.row(i).dot(&k.row(j));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Solves `kappa^T y = eta` for the component with the largest `|kappa|`.
pub fn eliminate_equality<T: Real>(sub: &SubproblemData<T>) -> Result<ReducedQp<T>> {
    let (pivot, kmax) = sub
        .kappa
        .iter()
        .enumerate()
        .fold((0, T::zero()), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    if kmax == T::zero() {
        return Err(Error::ZeroKappa);
    }
    let kappa_e = sub.kappa[pivot];
    let n = sub.dim();
    let k_e = sub.k_matrix.row(pivot).into_owned();
    let k_u = sub.k_matrix.clone().remove_row(pivot);
    let kappa_u = sub.kappa.clone().remove_row(pivot);

    let kappa_tilde = &kappa_u / kappa_e;
    let k_tilde = &k_u - &kappa_tilde * &k_e;
    let b_tilde = &sub.b_vec + k_e.transpose() * (sub.eta / kappa_e);
    let eta_tilde = sub.eta / kappa_e;
    debug_assert_eq!(k_tilde.nrows(), n - 1);
    if eta_tilde < T::zero() {
        return Err(Error::NegativeReducedRhs(eta_tilde.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(ReducedQp {
        k_tilde,
        b_tilde,
        kappa_tilde,
        eta_tilde,
        pivot_index: pivot,
    })
}

/// `min 1/2 x^T H x + g^T x  s.t.  G x <= h,  x >= 0`, with `H` PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegQp<T: Real> {
    pub hessian: DMatrix<T>,
    pub linear: DVector<T>,
    pub ineq: DMatrix<T>,
    pub ineq_rhs: DVector<T>,
}

impl<T: Real> NonnegQp<T> {
    pub fn n_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn objective(&self, x: &DVector<T>) -> T {
        (x.dot(&(&self.hessian * x)) * lit::<T>(0.5)) + self.linear.dot(x)
    }

    /// KKT system as `LCP(M, q)` with `M = [[H, G^T], [-G, 0]]`, `q = (g, h)`.
    pub fn to_lcp(&self) -> LcpProblem<T> {
        let n = self.n_vars();
        let m = self.ineq.nrows();
        let mut big = DMatrix::<T>::zeros(n + m, n + m);
        big.view_mut((0, 0), (n, n)).copy_from(&self.hessian);
        big.view_mut((0, n), (n, m)).copy_from(&self.ineq.transpose());
        big.view_mut((n, 0), (m, n)).copy_from(&(-&self.ineq));
        let mut q = DVector::<T>::zeros(n + m);
        q.rows_mut(0, n).copy_from(&self.linear);
        q.rows_mut(n, m).copy_from(&self.ineq_rhs);
        LcpProblem { m: big, q }
    }

    /// Solves through Lemke; returns the primal part of `z`.
    pub fn solve(&self, opts: &LemkeOptions<T>) -> Result<(DVector<T>, LcpSolution<T>)> {
        let lcp = self.to_lcp();
        let sol = lemke_solve(&lcp, opts)?;
        match sol.status {
            LcpStatus::Solved => Ok((sol.z.rows(0, self.n_vars()).into_owned(), sol)),
            LcpStatus::RayTermination => Err(Error::RayTermination),
            LcpStatus::IterationLimit => Err(Error::IterationLimit(sol.pivots_used)),
        }
    }
}

/// `LCP(M, q)` of a reduced cell QP.
pub fn to_lcp<T: Real>(red: &ReducedQp<T>) -> LcpProblem<T> {
    red.as_nonneg_qp().to_lcp()
}

/// Reinserts the eliminated component and unpacks `(lambda, mu, gamma)`.
pub fn recover_certificate<T: Real>(
    sub: &SubproblemData<T>,
    red: &ReducedQp<T>,
    y_u: &DVector<T>,
) -> Result<DualCertificate<T>> {
    let p = red.pivot_index;
    let n = sub.dim();
    if y_u.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: y_u.len(),
        });
    }
    let kappa_u = sub.kappa.clone().remove_row(p);
    let y_e = (sub.eta - kappa_u.dot(y_u)) / sub.kappa[p];
    if y_e < -lit::<T>(1e-6) {
        return Err(Error::NegativeReconstruction(y_e.to_f64().unwrap_or(f64::NAN)));
    }
    let y = y_u.clone().insert_row(p, y_e);
    Ok(DualCertificate::from_stacked(&y, sub.n_r, sub.n_o))
}

/// Full cell pipeline: eliminate, convert, Lemke, recover.
pub fn solve_cell<T: Real>(sub: &SubproblemData<T>, opts: &LemkeOptions<T>) -> Result<DualCertificate<T>> {
    let red = eliminate_equality(sub)?;
    let (y_u, _) = red.as_nonneg_qp().solve(opts)?;
    recover_certificate(sub, &red, &y_u)
}
