//! Dense two-phase simplex for small linear programs.
//!
//! Problems are stated as `min c^T x` subject to rows `a_i^T x <= b_i` or
//! `a_i^T x = b_i`, with each variable either free or nonnegative. Entering
//! columns follow Dantzig's rule until a run of degenerate pivots is seen,
//! after which Bland's rule takes over to rule out cycling.

use nalgebra::{DMatrix, DVector};

use crate::{tol, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Free,
    NonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// `min objective^T x` s.t. `rows x (sense) rhs`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T: Real> {
    pub objective: DVector<T>,
    pub rows: DMatrix<T>,
    pub rhs: DVector<T>,
    pub senses: Vec<RowSense>,
    pub vars: Vec<VarKind>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T: Real> {
    pub status: LpStatus,
    /// Primal point; meaningful only for `Optimal`.
    pub x: DVector<T>,
    pub objective: T,
    pub pivots: usize,
}

impl<T: Real> LinearProgram<T> {
    pub fn new(objective: DVector<T>, rows: DMatrix<T>, rhs: DVector<T>) -> Self {
        let m = rows.nrows();
        let n = rows.ncols();
        Self {
            objective,
            rows,
            rhs,
            senses: vec![RowSense::Le; m],
            vars: vec![VarKind::NonNegative; n],
        }
    }

    pub fn with_senses(mut self, senses: Vec<RowSense>) -> Self {
        self.senses = senses;
        self
    }

    pub fn with_vars(mut self, vars: Vec<VarKind>) -> Self {
        self.vars = vars;
        self
    }

    pub fn solve(&self) -> LpSolution<T> {
        solve_lp(self, 5_000)
    }
}

struct Tableau<T: Real> {
    // (m + 1) x (ncols + 1); the last row holds reduced costs, the last
    // column the right-hand side.
    t: DMatrix<T>,
    basis: Vec<usize>,
    m: usize,
    ncols: usize,
}

impl<T: Real> Tableau<T> {
    fn rhs_col(&self) -> usize {
        self.ncols
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[(r, c)];
        let width = self.ncols + 1;
        for j in 0..width {
            self.t[(r, j)] /= p;
        }
        for i in 0..=self.m {
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

    /// Runs simplex iterations on the current objective row.
    fn optimize(&mut self, allowed: &[bool], budget: &mut usize) -> LpStatus {
        let eps_cost = tol::<T>(1e-10);
        let eps_piv = tol::<T>(1e-9);
        let rhs = self.rhs_col();
        let mut degenerate_run = 0usize;
        let bland_after = 2 * (self.m + self.ncols);
        loop {
            if *budget == 0 {
                return LpStatus::IterationLimit;
            }
            let use_bland = degenerate_run > bland_after;
            let mut enter = None;
            let mut best = -eps_cost;
            for j in 0..self.ncols {
                if !allowed[j] {
                    continue;
                }
                let rc = self.t[(self.m, j)];
                if rc < -eps_cost {
                    if use_bland {
                        enter = Some(j);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        enter = Some(j);
                    }
                }
            }
            let Some(c) = enter else {
                return LpStatus::Optimal;
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.m {
                let a = self.t[(i, c)];
                if a > eps_piv {
                    let ratio = self.t[(i, rhs)] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best_ratio)) => {
                            if ratio < best_ratio
                                || (ratio == best_ratio && self.basis[i] < self.basis[r])
                            {
                                Some((i, ratio))
                            } else {
                                Some((r, best_ratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return LpStatus::Unbounded;
            };
            if ratio <= eps_cost {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
            *budget -= 1;
        }
    }
}

/// Solves `lp` with at most `max_pivots` pivots over both phases.
pub fn solve_lp<T: Real>(lp: &LinearProgram<T>, max_pivots: usize) -> LpSolution<T> {
    let m = lp.rows.nrows();
    let n = lp.rows.ncols();
    assert_eq!(lp.rhs.len(), m, "rhs length");
    assert_eq!(lp.objective.len(), n, "objective length");
    assert_eq!(lp.senses.len(), m, "senses length");
    assert_eq!(lp.vars.len(), n, "vars length");

    // Column layout: structural (free variables split into +/- parts), one
    // slack per inequality row, one artificial per row.
    let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut n_struct = 0;
    for kind in &lp.vars {
        match kind {
            VarKind::NonNegative => {
                col_of.push((n_struct, None));
                n_struct += 1;
            }
            VarKind::Free => {
                col_of.push((n_struct, Some(n_struct + 1)));
                n_struct += 2;
            }
        }
    }
    let n_slack = lp.senses.iter().filter(|s| **s == RowSense::Le).count();
    let art0 = n_struct + n_slack;
    let ncols = art0 + m;

    let mut t = DMatrix::<T>::zeros(m + 1, ncols + 1);
    let mut slack = n_struct;
    for i in 0..m {
        let scale = lp.rows.row(i).iter().fold(T::zero(), |a, x| a.max(x.abs()));
        let scale = if scale > T::zero() { scale } else { T::one() };
        for (j, &(p, neg)) in col_of.iter().enumerate() {
            let v = lp.rows[(i, j)] / scale;
            t[(i, p)] = v;
            if let Some(q) = neg {
                t[(i, q)] = -v;
            }
        }
        if lp.senses[i] == RowSense::Le {
            t[(i, slack)] = T::one() / scale;
            slack += 1;
        }
        t[(i, ncols)] = lp.rhs[i] / scale;
        if t[(i, ncols)] < T::zero() {
            for j in 0..ncols {
                t[(i, j)] = -t[(i, j)];
            }
            t[(i, ncols)] = -t[(i, ncols)];
        }
        t[(i, art0 + i)] = T::one();
    }
    // Phase one objective: sum of artificials, expressed in nonbasic terms.
    for i in 0..m {
        for j in 0..=ncols {
            if j < art0 || j == ncols {
                let v = t[(i, j)];
                t[(m, j)] -= v;
            }
        }
    }
    let mut tab = Tableau {
        t,
        basis: (art0..art0 + m).collect(),
        m,
        ncols,
    };
    let mut budget = max_pivots;
    let all = vec![true; ncols];
    let status = tab.optimize(&all, &mut budget);
    let fail = |status, budget: usize| LpSolution {
        status,
        x: DVector::zeros(n),
        objective: T::zero(),
        pivots: max_pivots - budget,
    };
    if status == LpStatus::IterationLimit {
        return fail(status, budget);
    }
    let infeas = -tab.t[(m, ncols)];
    let rhs_scale = (0..m).fold(T::one(), |a, i| a.max(tab.t[(i, ncols)].abs()));
    if infeas > tol::<T>(1e-9) * rhs_scale {
        return fail(LpStatus::Infeasible, budget);
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= art0 {
            let mut best: Option<(usize, T)> = None;
            for j in 0..art0 {
                let a = tab.t[(r, j)].abs();
                if a > tol::<T>(1e-9) && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((c, _)) = best {
                tab.pivot(r, c);
            }
        }
    }
    // Phase two objective row.
    let mut cost = DVector::<T>::zeros(ncols);
    for (j, &(p, neg)) in col_of.iter().enumerate() {
        cost[p] = lp.objective[j];
        if let Some(q) = neg {
            cost[q] = -lp.objective[j];
        }
    }
    for j in 0..=ncols {
        tab.t[(m, j)] = if j < ncols { cost[j] } else { T::zero() };
    }
    for r in 0..m {
        let cb = if tab.basis[r] < ncols { cost[tab.basis[r]] } else { T::zero() };
        if cb != T::zero() {
            for j in 0..=ncols {
                let v = tab.t[(r, j)];
                tab.t[(m, j)] -= cb * v;
            }
        }
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < art0).collect();
    let status = tab.optimize(&allowed, &mut budget);
    if status != LpStatus::Optimal {
        return fail(status, budget);
    }
    let mut values = DVector::<T>::zeros(ncols);
    for r in 0..m {
        values[tab.basis[r]] = tab.t[(r, ncols)];
    }
    let x = DVector::from_iterator(
        n,
        col_of.iter().map(|&(p, neg)| match neg {
            Some(q) => values[p] - values[q],
            None => values[p],
        }),
    );
    let objective = lp.objective.dot(&x);
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        pivots: max_pivots - budget,
    }
}
