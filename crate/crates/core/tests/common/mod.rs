//! Independent oracles shared by the integration tests. None of these call
//! the crate's solvers; they only use its data types.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::Rng;

use polyadmm::geometry::{BodyPolytope, HalfspacePolytope};

pub fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn unit(rng: &mut StdRng, d: usize) -> DVector<f64> {
    loop {
        let x = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        let n = x.norm();
        if n > 0.1 && n <= 1.0 {
            return x / n;
        }
    }
}

/// Bounded polytope containing `center`: the axis slab rows plus a few
/// random cuts, every row at a positive distance from `center`.
pub fn random_polytope(rng: &mut StdRng, d: usize, center: &DVector<f64>, scale: f64) -> HalfspacePolytope<f64> {
    let extra = rng.gen_range(1..=3);
    let mut rows: Vec<DVector<f64>> = Vec::new();
    for k in 0..d {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(d);
            e[k] = s;
            rows.push(e);
        }
    }
    for _ in 0..extra {
        rows.push(unit(rng, d));
    }
    let a = DMatrix::from_fn(rows.len(), d, |r, c| rows[r][c]);
    let b = DVector::from_fn(rows.len(), |r, _| rows[r].dot(center) + scale * rng.gen_range(0.3..1.0));
    HalfspacePolytope::new(a, b).unwrap()
}

pub fn random_body(rng: &mut StdRng, d: usize) -> BodyPolytope<f64> {
    BodyPolytope::new(random_polytope(rng, d, &DVector::zeros(d), 1.0)).unwrap()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Smallest `t >= 0` with `{A x <= b t} ∩ {C x <= d}` nonempty, by
/// enumerating every vertex of the lifted polyhedron in `(t, x)`.
/// `None` when the obstacle is empty.
pub fn scale_by_vertices(robot: &HalfspacePolytope<f64>, obstacle: &HalfspacePolytope<f64>) -> Option<f64> {
    let d = robot.dim();
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for i in 0..robot.n_rows() {
        let mut r = DVector::zeros(d + 1);
        r[0] = -robot.b()[i];
        r.rows_mut(1, d).copy_from(&robot.a().row(i).transpose());
        rows.push((r, 0.0));
    }
    for i in 0..obstacle.n_rows() {
        let mut r = DVector::zeros(d + 1);
        r.rows_mut(1, d).copy_from(&obstacle.a().row(i).transpose());
        rows.push((r, obstacle.b()[i]));
    }
    let mut t_row = DVector::zeros(d + 1);
    t_row[0] = -1.0;
    rows.push((t_row, 0.0));
    let mut best: Option<f64> = None;
    for set in combinations(rows.len(), d + 1) {
        let m = DMatrix::from_fn(d + 1, d + 1, |r, c| rows[set[r]].0[c]);
        let rhs = DVector::from_fn(d + 1, |r, _| rows[set[r]].1);
        let Some(p) = m.clone().lu().solve(&rhs) else { continue };
        if (&m * &p - &rhs).amax() > 1e-9 {
            continue;
        }
        let scale = 1.0 + p.amax();
        if rows.iter().all(|(r, h)| r.dot(&p) <= h + 1e-9 * scale) {
            best = Some(best.map_or(p[0], |b: f64| b.min(p[0])));
        }
    }
    best
}

/// Adaptive grid sampling of `P ∩ Q` over the box `[lo, hi]^2`.
///
/// Cells are refined only while they may meet both polytopes (each row
/// checked separately against the cell's corners); the centre of every
/// surviving cell is tested exactly. Returns `Some(true)` when a common
/// point is found, `Some(false)` when every cell has been ruled out, and
/// `None` when the depth budget ran out first.
pub fn grid_overlap(p: &HalfspacePolytope<f64>, q: &HalfspacePolytope<f64>, lo: [f64; 2], hi: [f64; 2], max_depth: usize) -> Option<bool> {
    let may_meet = |poly: &HalfspacePolytope<f64>, c: [f64; 2], h: f64| {
        (0..poly.n_rows()).all(|i| {
            let (a0, a1) = (poly.a()[(i, 0)], poly.a()[(i, 1)]);
            a0 * c[0] + a1 * c[1] - h * (a0.abs() + a1.abs()) <= poly.b()[i]
        })
    };
    let inside = |poly: &HalfspacePolytope<f64>, c: [f64; 2]| {
        (0..poly.n_rows()).all(|i| poly.a()[(i, 0)] * c[0] + poly.a()[(i, 1)] * c[1] <= poly.b()[i])
    };
    let side = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let mut cells = vec![[lo[0] + side / 2.0, lo[1] + side / 2.0]];
    let mut h = side / 2.0;
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for c in cells {
            if !may_meet(p, c, h) || !may_meet(q, c, h) {
                continue;
            }
            if inside(p, c) && inside(q, c) {
                return Some(true);
            }
            let g = h / 2.0;
            for (dx, dy) in [(-g, -g), (-g, g), (g, -g), (g, g)] {
                next.push([c[0] + dx, c[1] + dy]);
            }
        }
        if next.is_empty() {
            return Some(false);
        }
        if next.len() > 4_000_000 {
            return None;
        }
        cells = next;
        h /= 2.0;
    }
    None
}

/// All solutions `z` of `LCP(M, q)` found by trying every complementary
/// basis.
pub fn lcp_by_enumeration(m: &DMatrix<f64>, q: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = q.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        let mut z = DVector::zeros(n);
        if k > 0 {
            let sub = DMatrix::from_fn(k, k, |r, c| m[(idx[r], idx[c])]);
            let rhs = DVector::from_fn(k, |r, _| -q[idx[r]]);
            let Some(zs) = sub.lu().solve(&rhs) else { continue };
            for (r, &i) in idx.iter().enumerate() {
                z[i] = zs[r];
            }
        }
        let w = m * &z + q;
        let tol = 1e-9 * (1.0 + q.amax());
        if z.iter().all(|x| *x >= -tol) && w.iter().all(|x| *x >= -tol) {
            out.push(z);
        }
    }
    out
}

/// Projection onto `{x >= 0, w^T x = 1}` for `w > 0`.
fn project_weighted_simplex(x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    let f = |tau: f64| x.zip_map(w, |xi, wi| (xi - tau * wi).max(0.0)).dot(w) - 1.0;
    let mut lo = -1.0;
    while f(lo) < 0.0 {
        lo *= 2.0;
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    x.zip_map(w, |xi, wi| (xi - tau * wi).max(0.0))
}

/// Accelerated projected gradient for
/// `min 1/2 ||K^T y + b||^2` over `y = (lambda, rest)`, `lambda >= 0`,
/// `w^T lambda = 1`, `rest >= 0`. Returns the best objective seen.
pub fn projected_gradient(k: &DMatrix<f64>, b: &DVector<f64>, w: &DVector<f64>, steps: usize) -> f64 {
    let n = k.nrows();
    let n_l = w.len();
    let lip = k.clone().svd(false, false).singular_values.max().powi(2).max(1e-12);
    let obj = |y: &DVector<f64>| 0.5 * (k.tr_mul(y) + b).norm_squared();
    let project = |y: &DVector<f64>| {
        let mut out = y.map(|x| x.max(0.0));
        let lam = project_weighted_simplex(&y.rows(0, n_l).into_owned(), w);
        out.rows_mut(0, n_l).copy_from(&lam);
        out
    };
    let mut y = project(&DVector::from_element(n, 0.0));
    let mut z = y.clone();
    let mut t: f64 = 1.0;
    let mut best = obj(&y);
    for _ in 0..steps {
        let grad = k * (k.tr_mul(&z) + b);
        let y_next = project(&(&z - grad / lip));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = &y_next + (&y_next - &y) * ((t - 1.0) / t_next);
        y = y_next;
        t = t_next;
        best = best.min(obj(&y));
    }
    best
}

/// Equality-constrained LQ tracking by one dense KKT solve:
/// `min sum_{t=1}^{T} ||s_t - r_t||^2_Q + sum_{t=0}^{T-1} ||u_t||^2_R`
/// s.t. `s_{t+1} = A s_t + B u_t`, `s_0` given. Returns
/// `(states, controls)`.
pub fn lq_kkt(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    s0: &DVector<f64>,
    refs: &[DVector<f64>],
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let horizon = refs.len() - 1;
    let (ns, nu) = (a.nrows(), b.ncols());
    // variables: s_1..s_T, u_0..u_{T-1}
    let nx = horizon * (ns + nu);
    let ne = horizon * ns;
    let si = |t: usize| (t - 1) * ns;
    let ui = |t: usize| horizon * ns + t * nu;
    let mut kkt = DMatrix::<f64>::zeros(nx + ne, nx + ne);
    let mut rhs = DVector::<f64>::zeros(nx + ne);
    for t in 1..=horizon {
        kkt.view_mut((si(t), si(t)), (ns, ns)).copy_from(&(q * 2.0));
        rhs.rows_mut(si(t), ns).copy_from(&(q * &refs[t] * 2.0));
    }
    for t in 0..horizon {
        kkt.view_mut((ui(t), ui(t)), (nu, nu)).copy_from(&(r * 2.0));
    }
    for t in 0..horizon {
        // s_{t+1} - A s_t - B u_t = 0
        let row = nx + t * ns;
        let mut put = |col: usize, blk: &DMatrix<f64>| {
            kkt.view_mut((row, col), blk.shape()).copy_from(blk);
            kkt.view_mut((col, row), (blk.ncols(), blk.nrows())).copy_from(&blk.transpose());
        };
        put(si(t + 1), &DMatrix::identity(ns, ns));
        put(ui(t), &(-b));
        if t == 0 {
            rhs.rows_mut(row, ns).copy_from(&(a * s0));
        } else {
            put(si(t), &(-a));
        }
    }
    let x = kkt.lu().solve(&rhs).expect("KKT system nonsingular");
    let mut states = vec![s0.clone()];
    states.extend((1..=horizon).map(|t| x.rows(si(t), ns).into_owned()));
    let controls = (0..horizon).map(|t| x.rows(ui(t), nu).into_owned()).collect();
    (states, controls)
}

/// `min 1/2 x^T H x + g^T x` over `lo <= x <= hi` by trying every
/// assignment of free / lower / upper to each coordinate (3^n).
pub fn box_qp_by_enumeration(h: &DMatrix<f64>, g: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) -> DVector<f64> {
    let n = g.len();
    let mut best: Option<(f64, DVector<f64>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut state = vec![0u8; n];
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let mut x = DVector::zeros(n);
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 0).collect();
        for i in 0..n {
            match state[i] {
                1 => x[i] = lo[i],
                2 => x[i] = hi[i],
                _ => {}
            }
        }
        if !free.is_empty() {
            let k = free.len();
            let hff = DMatrix::from_fn(k, k, |r, cc| h[(free[r], free[cc])]);
            let rhs = DVector::from_fn(k, |r, _| {
                let i = free[r];
                -g[i] - (0..n).filter(|j| state[*j] != 0).map(|j| h[(i, j)] * x[j]).sum::<f64>()
            });
            let Some(xf) = hff.lu().solve(&rhs) else { continue };
            for (r, &i) in free.iter().enumerate() {
                x[i] = xf[r];
            }
        }
        if (0..n).any(|i| x[i] < lo[i] - 1e-12 || x[i] > hi[i] + 1e-12) {
            continue;
        }
        let grad = h * &x + g;
        let kkt_ok = (0..n).all(|i| match state[i] {
            1 => grad[i] >= -1e-9,
            2 => grad[i] <= 1e-9,
            _ => true,
        });
        if !kkt_ok {
            continue;
        }
        let f = 0.5 * x.dot(&(h * &x)) + g.dot(&x);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    best.expect("a KKT point exists for a convex box QP").1
}

/// KKT LCP of `min 1/2 x^T H x + g^T x, G x <= h, x >= 0`, assembled here
/// rather than through the crate.
pub fn qp_lcp(rng: &mut StdRng, k: usize, m: usize) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let l = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..1.0));
    let h = &l * l.transpose() + DMatrix::identity(k, k) * 0.05;
    let g = DVector::from_fn(k, |_, _| rng.gen_range(-2.0..2.0));
    let gm = DMatrix::from_fn(m, k, |_, _| rng.gen_range(-1.0..1.0));
    let hv = DVector::from_fn(m, |_, _| rng.gen_range(0.1..2.0));
    let n = k + m;
    let mut mm = DMatrix::zeros(n, n);
    mm.view_mut((0, 0), (k, k)).copy_from(&h);
    mm.view_mut((0, k), (k, m)).copy_from(&gm.transpose());
    mm.view_mut((k, 0), (m, k)).copy_from(&(-&gm));
    let mut q = DVector::zeros(n);
    q.rows_mut(0, k).copy_from(&g);
    q.rows_mut(k, m).copy_from(&hv);
    (mm, q, h, g)
}
