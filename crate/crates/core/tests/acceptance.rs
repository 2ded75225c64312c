//! One line per acceptance criterion. Runs without the libtest harness so
//! the lines always show; exits nonzero if any criterion fails.
//!
//! `ACCEPT_REQUIRE_SPEEDUP=1` turns criterion 7 into a hard check even on
//! hosts with fewer than four cores. `ACCEPT_SKIP_CAMPAIGN=1` skips the
//! multi-minute criterion 11.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{
    grid_overlap, lcp_by_enumeration, lq_kkt, projected_gradient, qp_lcp, random_body, random_polytope, v,
};
use nalgebra::{DMatrix, DVector};
use polyadmm::admm::{dual_update, evaluate_cost, solve_mpc, AdmmParams, MpcProblem};
use polyadmm::collision_lp::{min_scale, min_scale_posed, solve_dual};
use polyadmm::dual_subproblem::{build_subproblem, solve_cell};
use polyadmm::dynamics::{DoubleIntegrator2d, DynamicsModel, Unicycle};
use polyadmm::geometry::{make_box, transform_polytope, BodyPolytope, ObstacleSet, Pose, RobotGeometry};
use polyadmm::lemke::{lemke_solve, LcpProblem, LcpStatus, LemkeOptions};
use polyadmm::linalg::rotation2;
use polyadmm::sim::bench::{bench_problem, run_benchmark};
use polyadmm::sim::campaign::random_scenario;
use polyadmm::sim::run::build_problem;
use polyadmm::sim::{load_scenario, run_simulation, verify_trace, Scenario};
use polyadmm::Backend;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

enum Outcome {
    Pass(String),
    Fail(String),
    Unverified(String),
    Skipped(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn scenario(name: &str) -> Scenario {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    load_scenario(&path).unwrap()
}

fn env_flag(name: &str) -> bool {
    std::env::var(name).map(|v| v == "1").unwrap_or(false)
}

fn strong_duality() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let d = 2 + trial % 2;
        let body = random_body(&mut rng, d);
        let c = DVector::from_fn(d, |_, _| rng.gen_range(-3.0..3.0));
        let obs = random_polytope(&mut rng, d, &c, 1.0);
        let primal = min_scale(body.poly(), &obs).unwrap().alpha_star;
        let cert = solve_dual(body.poly(), &obs).unwrap();
        worst = worst.max((primal + obs.b().dot(&cert.mu)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-6 && secs < 5.0, format!("max gap {worst:.2e} over 200 pairs, {secs:.2} s"))
}

fn classification() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(102);
    let (mut compared, mut marginal, mut disagree, mut unresolved) = (0, 0, 0, 0);
    while compared < 200 {
        let half = |rng: &mut StdRng| v(&[rng.gen_range(0.2..1.0), rng.gen_range(0.2..1.0)]);
        let body = BodyPolytope::new(make_box(&v(&[0.0, 0.0]), &half(&mut rng)).unwrap()).unwrap();
        let pose = Pose::new(
            rotation2(rng.gen_range(-3.0..3.0)),
            v(&[rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]),
        )
        .unwrap();
        let obs = make_box(&v(&[0.0, 0.0]), &half(&mut rng)).unwrap();
        let alpha = min_scale_posed(&body, &pose, &obs).unwrap().alpha_star;
        if (alpha - 1.0).abs() <= 1e-3 {
            marginal += 1;
            continue;
        }
        let world = transform_polytope(body.poly(), &pose).unwrap();
        match grid_overlap(&world, &obs, [-4.0, -4.0], [4.0, 4.0], 24) {
            Some(hit) if hit == (alpha < 1.0) => {}
            Some(_) => disagree += 1,
            None => unresolved += 1,
        }
        compared += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        disagree == 0 && unresolved == 0 && secs < 30.0,
        format!("{disagree} disagreements, {unresolved} unresolved, {marginal} marginal skipped, {secs:.2} s"),
    )
}

fn lcp_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(103);
    let (mut worst_comp, mut worst_gap): (f64, f64) = (0.0, 0.0);
    let mut unsolved = 0;
    for _ in 0..500 {
        let k = rng.gen_range(1..=8);
        let m = rng.gen_range(0..=(10 - k));
        let (mm, q, h, g) = qp_lcp(&mut rng, k, m);
        let sol = lemke_solve(&LcpProblem::new(mm.clone(), q.clone()).unwrap(), &LemkeOptions::default()).unwrap();
        if sol.status != LcpStatus::Solved {
            unsolved += 1;
            continue;
        }
        let w = &mm * &sol.z + &q;
        let infeas = (-sol.z.min()).max(-w.min()).max(0.0);
        worst_comp = worst_comp.max(sol.z.dot(&w).abs()).max(infeas);
        let f = |z: &DVector<f64>| {
            let x = z.rows(0, k).into_owned();
            0.5 * x.dot(&(&h * &x)) + g.dot(&x)
        };
        let best = lcp_by_enumeration(&mm, &q).iter().map(f).fold(f64::INFINITY, f64::min);
        worst_gap = worst_gap.max((f(&sol.z) - best).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        unsolved == 0 && worst_comp <= 1e-8 && worst_gap <= 1e-7 && secs < 60.0,
        format!(
            "complementarity {worst_comp:.2e}, objective gap {worst_gap:.2e}, {unsolved} unsolved, {secs:.2} s"
        ),
    )
}

fn pipeline() -> Outcome {
    let mut rng = StdRng::seed_from_u64(104);
    let (mut worst_obj, mut worst_norm, mut worst_neg): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let body = random_body(&mut rng, 2);
        let c = DVector::from_fn(2, |_, _| rng.gen_range(-3.0..3.0));
        let obs = random_polytope(&mut rng, 2, &c, 0.7);
        let pose = Pose::new(
            rotation2(rng.gen_range(-3.0..3.0)),
            DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0)),
        )
        .unwrap();
        let zeta = rng.gen_range(-0.5..0.5);
        let xi = DVector::from_fn(2, |_, _| rng.gen_range(-0.5..0.5));
        let sub = build_subproblem(&body, &obs, &pose, zeta, &xi).unwrap();
        let cert = solve_cell(&sub, &LemkeOptions::default()).unwrap();
        let ours = sub.objective(&cert.stacked());
        let oracle = projected_gradient(&sub.k_matrix, &sub.b_vec, body.poly().b(), 100_000);
        worst_obj = worst_obj.max((ours - oracle).abs());
        worst_norm = worst_norm.max((body.poly().b().dot(&cert.lambda) - 1.0).abs());
        worst_neg = worst_neg.max(-cert.min_entry());
    }
    check(
        worst_obj <= 1e-5 && worst_norm <= 1e-7 && worst_neg <= 1e-9,
        format!("objective gap {worst_obj:.2e}, |b^T lambda - 1| {worst_norm:.2e}, most negative entry {:.2e}", -worst_neg),
    )
}

fn sigma_invariance() -> Outcome {
    let scn = scenario("corridor.toml");
    let prob = build_problem(&scn, &v(&[1.6, 0.0, 1.0, 0.0]), 1.6);
    let (frozen, _) = solve_mpc(&prob, &AdmmParams { max_iters: 3, ..AdmmParams::default() }, None).unwrap();
    let certs: Vec<_> = [1.0, 300.0, 1e4]
        .iter()
        .map(|&sigma| {
            // one full iteration, so sigma reaches every stage
            let params = AdmmParams {
                sigma,
                max_iters: 1,
                eps_pri: Some(1e-300),
                eps_dual: Some(1e-300),
                ..AdmmParams::default()
            };
            solve_mpc(&prob, &params, Some(&frozen)).unwrap().0.certificates()
        })
        .collect();
    let same = certs[0] == certs[1] && certs[1] == certs[2];
    check(same, format!("{} cells, sigma in {{1, 300, 1e4}}", frozen.cells.len()))
}

fn batch_determinism() -> Outcome {
    let (prob, traj) = bench_problem(&scenario("bench512.toml"));
    let opts = LemkeOptions::default();
    let serial = dual_update(&traj, &prob, Backend::Serial, &opts);
    let par = dual_update(&traj, &prob, Backend::Parallel(4), &opts);
    check(
        traj.cells.len() == 512 && serial.certificates == par.certificates,
        format!("{} cells, serial vs 4 workers", traj.cells.len()),
    )
}

fn speedup() -> Outcome {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let recs = run_benchmark(&scenario("bench512.toml"), &[4], 10).unwrap();
    let r = &recs[0];
    let detail = format!("speedup {:.2} with 4 workers at NMT {} on {cores} cores", r.speedup_vs_serial, r.nmt);
    if cores < 4 && !env_flag("ACCEPT_REQUIRE_SPEEDUP") {
        return Outcome::Unverified(format!("{detail}; needs a host with at least 4 cores"));
    }
    check(r.nmt == 512 && r.speedup_vs_serial >= 1.5, detail)
}

fn lq_exactness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(108);
    let (mut worst, mut max_iters): (f64, usize) = (0.0, 0);
    let mut all_converged = true;
    for _ in 0..5 {
        let horizon = 16;
        let refs: Vec<_> = (0..=horizon)
            .map(|t| {
                let x = 0.1 * t as f64;
                v(&[x + rng.gen_range(-0.1..0.1), 0.3 * x, 1.0, 0.3])
            })
            .collect();
        let body = BodyPolytope::new(make_box(&v(&[0.0, 0.0]), &v(&[0.2, 0.2])).unwrap()).unwrap();
        let prob = MpcProblem {
            horizon,
            dt: 0.1,
            q_s: DMatrix::from_diagonal(&v(&[1.0, 2.0, 0.1, 0.1])),
            q_u: DMatrix::from_diagonal(&v(&[0.05, 0.08])),
            s_min: DVector::from_element(4, f64::NEG_INFINITY),
            s_max: DVector::from_element(4, f64::INFINITY),
            u_min: DVector::from_element(2, -1e3),
            u_max: DVector::from_element(2, 1e3),
            reference: refs.clone(),
            initial_state: v(&[0.0, 0.0, 0.0, 0.0]),
            robot: RobotGeometry::new(vec![body]).unwrap(),
            obstacles: ObstacleSet::empty(),
            active_obstacles: vec![],
            model: std::sync::Arc::new(DoubleIntegrator2d),
        };
        let (traj, report) = solve_mpc(&prob, &AdmmParams::default(), None).unwrap();
        all_converged &= report.converged;
        max_iters = max_iters.max(report.iterations_run);
        let mut a = DMatrix::identity(4, 4);
        a[(0, 2)] = 0.1;
        a[(1, 3)] = 0.1;
        let mut b = DMatrix::zeros(4, 2);
        b[(2, 0)] = 0.1;
        b[(3, 1)] = 0.1;
        let (states, controls) = lq_kkt(&a, &b, &prob.q_s, &prob.q_u, &prob.initial_state, &refs);
        worst = worst.max((evaluate_cost(&traj, &prob) - prob.cost_of(&states, &controls)).abs());
    }
    check(
        worst <= 1e-6 && all_converged && max_iters <= 2,
        format!("cost gap {worst:.2e}, at most {max_iters} iterations"),
    )
}

fn corridor() -> Outcome {
    let start = Instant::now();
    let scn = scenario("corridor.toml");
    let out = run_simulation(&scn, Backend::Serial).unwrap();
    let report = verify_trace(&out.trace, &scn).unwrap();
    let secs = start.elapsed().as_secs_f64();
    check(
        out.metrics.success && report.min_scale >= 0.99 && secs < 60.0,
        format!(
            "success {}, verified min scale {:.4}, {secs:.1} s",
            out.metrics.success, report.min_scale
        ),
    )
}

fn jacobians() -> Outcome {
    let mut rng = StdRng::seed_from_u64(110);
    let models: Vec<Box<dyn DynamicsModel<f64>>> = vec![Box::new(DoubleIntegrator2d), Box::new(Unicycle)];
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for model in &models {
        for _ in 0..100 {
            let s = DVector::from_fn(model.n_s(), |_, _| rng.gen_range(-3.0..3.0));
            let u = DVector::from_fn(model.n_u(), |_, _| rng.gen_range(-2.0..2.0));
            let lin = model.linearize(&s, &u, 0.1);
            let lp = model.linearize_pose(&s);
            for k in 0..model.n_s() {
                let (mut sp, mut sm) = (s.clone(), s.clone());
                sp[k] += h;
                sm[k] -= h;
                let fd = (model.step(&sp, &u, 0.1) - model.step(&sm, &u, 0.1)) / (2.0 * h);
                worst = worst.max((fd - lin.a_jac.column(k)).amax());
                let (pp, pm) = (model.pose_of(&sp), model.pose_of(&sm));
                let drot = (pp.rotation() - pm.rotation()) / (2.0 * h);
                worst = worst.max((drot - &lp.rot_jac[k]).amax());
                let dtr = (pp.translation() - pm.translation()) / (2.0 * h);
                worst = worst.max((dtr - lp.trans_jac.column(k)).amax());
            }
            for k in 0..model.n_u() {
                let (mut up, mut um) = (u.clone(), u.clone());
                up[k] += h;
                um[k] -= h;
                let fd = (model.step(&s, &up, 0.1) - model.step(&s, &um, 0.1)) / (2.0 * h);
                worst = worst.max((fd - lin.b_jac.column(k)).amax());
            }
        }
    }
    check(worst < 1e-5, format!("max deviation {worst:.2e} over 100 points per model"))
}

fn campaign() -> Outcome {
    if env_flag("ACCEPT_SKIP_CAMPAIGN") {
        return Outcome::Skipped("ACCEPT_SKIP_CAMPAIGN=1".into());
    }
    let start = Instant::now();
    let (mut successes, mut violations) = (0, 0);
    for seed in 0..20 {
        let scn = random_scenario(seed, 8).unwrap();
        let out = run_simulation(&scn, Backend::Serial).unwrap();
        if out.metrics.success {
            successes += 1;
            if !verify_trace(&out.trace, &scn).unwrap().is_clean() {
                violations += 1;
            }
        }
    }
    check(
        successes >= 16 && violations == 0,
        format!(
            "{successes}/20 reached the goal, {violations} verified collisions, {:.0} s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("strong duality", strong_duality),
        ("collision classification", classification),
        ("LCP oracle equivalence", lcp_equivalence),
        ("QP to LCP pipeline", pipeline),
        ("sigma invariance", sigma_invariance),
        ("batch determinism", batch_determinism),
        ("parallel speedup", speedup),
        ("LQ exactness", lq_exactness),
        ("corridor end to end", corridor),
        ("dynamics Jacobians", jacobians),
        ("randomized campaign", campaign),
    ];
    let mut failed = vec![];
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let wall = t0.elapsed();
        let (tag, detail) = match &outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => ("FAIL", d),
            Outcome::Unverified(d) => ("UNVERIFIED", d),
            Outcome::Skipped(d) => ("SKIPPED", d),
        };
        println!("criterion {:>2} {tag:<10} {name}: {detail} [{:.1} s]", i + 1, wall.as_secs_f64());
        if matches!(outcome, Outcome::Fail(_)) {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
