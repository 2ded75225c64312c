//! Lemke's complementary pivoting for `LCP(M, q)`:
//! find `z, w >= 0` with `w = M z + q` and `w^T z = 0`.
//!
//! Scheme I with the all-ones covering vector and a lexicographic
//! minimum-ratio test. Once the artificial variable leaves the basis the
//! final complementary basis is re-solved directly, which removes the
//! rounding accumulated over the pivots.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{min_entry, norm_inf};
use crate::{lit, tol, Error, Real, Result};

/// Largest problem [`lcp_enumerate`] accepts.
pub const ENUMERATE_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct LcpProblem<T: Real> {
    pub m: DMatrix<T>,
    pub q: DVector<T>,
}

impl<T: Real> LcpProblem<T> {
    pub fn new(m: DMatrix<T>, q: DVector<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: q.len(),
            });
        }
        Ok(Self { m, q })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LcpStatus {
    Solved,
    RayTermination,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcpSolution<T: Real> {
    pub z: DVector<T>,
    pub w: DVector<T>,
    pub status: LcpStatus,
    pub pivots_used: usize,
}

impl<T: Real> LcpSolution<T> {
    /// `|z^T w|`.
    pub fn complementarity(&self) -> T {
        self.z.dot(&self.w).abs()
    }

    /// `||w - (M z + q)||_inf`.
    pub fn residual(&self, problem: &LcpProblem<T>) -> T {
        norm_inf(&(&self.w - (&problem.m * &self.z + &problem.q)))
    }

    /// Checks the invariants of a solved LCP at the standard tolerances.
    pub fn is_valid(&self, problem: &LcpProblem<T>) -> bool {
        let scale = T::one() + norm_inf(&problem.q);
        let eps = tol::<T>(1e-8) * scale;
        let neg = tol::<T>(1e-9);
        self.residual(problem) <= eps
            && self.complementarity() <= eps
            && min_entry(&self.z) >= -neg
            && min_entry(&self.w) >= -neg
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LemkeOptions<T: Real> {
    /// Pivot budget; `None` means `50 n`.
    pub max_pivots: Option<usize>,
    /// Column entries at or below this are not eligible pivots.
    pub pivot_tol: T,
}

impl<T: Real> Default for LemkeOptions<T> {
    fn default() -> Self {
        Self {
            max_pivots: None,
            pivot_tol: tol(1e-11),
        }
    }
}

struct Tableau<T: Real> {
    // columns: w (0..n), z (n..2n), z0 (2n), rhs (2n+1)
    t: DMatrix<T>,
    basis: Vec<usize>,
    n: usize,
}

impl<T: Real> Tableau<T> {
    fn new(p: &LcpProblem<T>) -> Self {
        let n = p.n();
        let mut t = DMatrix::<T>::zeros(n, 2 * n + 2);
        for i in 0..n {
            t[(i, i)] = T::one();
            for j in 0..n {
                t[(i, n + j)] = -p.m[(i, j)];
            }
            t[(i, 2 * n)] = -T::one();
            t[(i, 2 * n + 1)] = p.q[i];
        }
        Self {
            t,
            basis: (0..n).collect(),
            n,
        }
    }

    fn z0(&self) -> usize {
        2 * self.n
    }

    fn rhs(&self) -> usize {
        2 * self.n + 1
    }

    fn complement(&self, var: usize) -> usize {
        if var < self.n {
            var + self.n
        } else {
            var - self.n
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[(r, c)];
        let width = self.t.ncols();
        for j in 0..width {
            self.t[(r, j)] /= p;
        }
        for i in 0..self.n {
            if i == r {
                continue;
            }
            let f = self.t[(i, c)];
            if f != T::zero() {
                for j in 0..width {
                    let v = self.t[(r, j)];
                    self.t[(i, j)] -= f * v;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Lexicographic minimum over `rows` of `(rhs_i, B^-1 row i) / a_i`.
    fn lex_min(&self, rows: &[usize], col: usize) -> usize {
        let n = self.n;
        let rhs = self.rhs();
        let key = |i: usize, k: usize| -> T {
            let num = if k == 0 { self.t[(i, rhs)] } else { self.t[(i, k - 1)] };
            num / self.t[(i, col)]
        };
        let mut cand: Vec<usize> = rows.to_vec();
        for k in 0..=n {
            if cand.len() <= 1 {
                break;
            }
            let best = cand
                .iter()
                .map(|&i| key(i, k))
                .fold(lit::<T>(f64::INFINITY), |a, b| a.min(b));
            let slack = tol::<T>(1e-12) * (T::one() + best.abs());
            cand.retain(|&i| key(i, k) <= best + slack);
            if k == 0 {
                if let Some(&r) = cand.iter().find(|&&i| self.basis[i] == self.z0()) {
                    return r;
                }
            }
        }
        cand[0]
    }
}

/// Solves `problem` with Lemke's method.
///
/// Returns `Err(SingularPivot)` only if the pivot element selected by the
/// ratio test is numerically zero.
pub fn lemke_solve<T: Real>(problem: &LcpProblem<T>, opts: &LemkeOptions<T>) -> Result<LcpSolution<T>> {
    let n = problem.n();
    if n == 0 || problem.q.iter().all(|v| *v >= T::zero()) {
        return Ok(LcpSolution {
            z: DVector::zeros(n),
            w: problem.q.clone(),
            status: LcpStatus::Solved,
            pivots_used: 0,
        });
    }
    let max_pivots = opts.max_pivots.unwrap_or(50 * n);
    let mut tab = Tableau::new(problem);
    let z0 = tab.z0();

    // z0 enters at the most negative q; ties broken lexicographically
    // (entries of the z0 column are all -1).
    let qmin = min_entry(&problem.q);
    let slack = tol::<T>(1e-12) * (T::one() + qmin.abs());
    let tied: Vec<usize> = (0..n).filter(|&i| problem.q[i] <= qmin + slack).collect();
    // with a_i = -1 the lexicographic rule picks the largest index among ties
    let r0 = *tied.last().expect("nonempty");
    tab.pivot(r0, z0);
    let mut entering = tab.complement(r0);
    let mut pivots = 1usize;

    loop {
        if pivots >= max_pivots {
            return Ok(finish(problem, &tab, LcpStatus::IterationLimit, pivots));
        }
        let rows: Vec<usize> = (0..n).filter(|&i| tab.t[(i, entering)] > opts.pivot_tol).collect();
        if rows.is_empty() {
            log::debug!("Lemke ray termination after {pivots} pivots: M = {}, q = {}", problem.m, problem.q);
            return Ok(finish(problem, &tab, LcpStatus::RayTermination, pivots));
        }
        let r = tab.lex_min(&rows, entering);
        let p = tab.t[(r, entering)];
        if p.abs() <= opts.pivot_tol {
            return Err(Error::SingularPivot(p.to_f64().unwrap_or(0.0)));
        }
        let leaving = tab.basis[r];
        tab.pivot(r, entering);
        pivots += 1;
        if leaving == z0 {
            return Ok(finish(problem, &tab, LcpStatus::Solved, pivots));
        }
        entering = tab.complement(leaving);
    }
}

fn finish<T: Real>(problem: &LcpProblem<T>, tab: &Tableau<T>, status: LcpStatus, pivots: usize) -> LcpSolution<T> {
    let n = tab.n;
    let rhs = tab.rhs();
    let mut z = DVector::<T>::zeros(n);
    let mut w = DVector::<T>::zeros(n);
    for (r, &var) in tab.basis.iter().enumerate() {
        let val = tab.t[(r, rhs)];
        if var < n {
            w[var] = val;
        } else if var < 2 * n {
            z[var - n] = val;
        }
    }
    if status == LcpStatus::Solved {
        let active: Vec<usize> = tab
            .basis
            .iter()
            .filter(|&&v| v >= n && v < 2 * n)
            .map(|&v| v - n)
            .collect();
        if let Some(zp) = solve_basis(problem, &active) {
            let scale = T::one() + norm_inf(&problem.q);
            if min_entry(&zp) >= -tol::<T>(1e-9) * scale {
                z = zp;
            }
        }
        z.apply(|v| *v = v.max(T::zero()));
        w = &problem.m * &z + &problem.q;
        for &i in tab.basis.iter().filter(|&&v| v >= n && v < 2 * n) {
            w[i - n] = T::zero();
        }
        w.apply(|v| *v = v.max(T::zero()));
    }
    LcpSolution {
        z,
        w,
        status,
        pivots_used: pivots,
    }
}

/// Solves `M_aa z_a = -q_a` for the complementary set `active`; `None`
/// if that block is (numerically) singular.
fn solve_basis<T: Real>(problem: &LcpProblem<T>, active: &[usize]) -> Option<DVector<T>> {
    let n = problem.n();
    let k = active.len();
    let mut z = DVector::<T>::zeros(n);
    if k == 0 {
        return Some(z);
    }
    let sub = DMatrix::from_fn(k, k, |r, c| problem.m[(active[r], active[c])]);
    let rhs = DVector::from_fn(k, |r, _| -problem.q[active[r]]);
    let lu = sub.lu();
    let u = lu.u();
    let diag_max = u.diagonal().iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let diag_min = u.diagonal().iter().fold(lit::<T>(f64::INFINITY), |a, x| a.min(x.abs()));
    if diag_max == T::zero() || diag_min <= tol::<T>(1e-12) * diag_max {
        return None;
    }
    let za = lu.solve(&rhs)?;
    for (r, &i) in active.iter().enumerate() {
        z[i] = za[r];
    }
    Some(z)
}

/// Exact solution by enumerating all `2^n` complementary index sets.
///
/// Among the sets whose principal block is nonsingular, returns the
/// solution with the smallest sign violation. Test oracle; `n <= 12`.
pub fn lcp_enumerate<T: Real>(problem: &LcpProblem<T>) -> Result<LcpSolution<T>> {
    let n = problem.n();
    if n > ENUMERATE_MAX_N {
        return Err(Error::TooLarge(n));
    }
    let mut best: Option<(T, DVector<T>)> = None;
    for mask in 0u32..(1u32 << n) {
        let active: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let Some(z) = solve_basis(problem, &active) else {
            continue;
        };
        let mut w = &problem.m * &z + &problem.q;
        let mut off = T::zero();
        for &i in &active {
            off = off.max(w[i].abs());
            w[i] = T::zero();
        }
        let violation = (-min_entry(&z)).max(-min_entry(&w)).max(off).max(T::zero());
        if best.as_ref().is_none_or(|(v, _)| violation < *v) {
            best = Some((violation, z));
        }
    }
    let scale = T::one() + norm_inf(&problem.q);
    match best {
        Some((violation, mut z)) if violation <= tol::<T>(1e-7) * scale => {
            z.apply(|v| *v = v.max(T::zero()));
            let mut w = &problem.m * &z + &problem.q;
            for i in 0..n {
                if z[i] > T::zero() {
                    w[i] = T::zero();
                }
            }
            w.apply(|v| *v = v.max(T::zero()));
            Ok(LcpSolution {
                z,
                w,
                status: LcpStatus::Solved,
                pivots_used: 0,
            })
        }
        _ => Err(Error::NoComplementaryBasis),
    }
}
