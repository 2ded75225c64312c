//! Timing of the dual update stage across worker counts.

use std::path::Path;
use std::time::Instant;

use crate::admm::{dual_update, MpcProblem, TrajectoryIterate};
use crate::batch::Backend;
use crate::dual_subproblem::{build_subproblem, eliminate_equality, to_lcp};
use crate::lemke::LemkeOptions;
use crate::sim::run::build_problem;
use crate::sim::scenario::Scenario;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub workers: usize,
    /// Number of cells, `N * M * T`.
    pub nmt: usize,
    /// Largest LCP dimension among the cells.
    pub n_max: usize,
    pub median_us: f64,
    pub speedup_vs_serial: f64,
}

pub const BENCH_HEADER: &str = "workers,nmt,n_max,median_us,speedup_vs_serial";

/// The frozen input: the cold-start iterate at the scenario's initial state
/// with every obstacle active.
pub fn bench_problem(scn: &Scenario) -> (MpcProblem<f64>, TrajectoryIterate<f64>) {
    let mut prob = build_problem(scn, &scn.initial_state, 0.0);
    prob.active_obstacles = (0..scn.obstacles.len()).collect();
    let iterate = TrajectoryIterate::cold_start(&prob);
    (prob, iterate)
}

fn lcp_dim_max(prob: &MpcProblem<f64>, iterate: &TrajectoryIterate<f64>) -> Result<usize> {
    let mut n_max = 0;
    for c in &iterate.cells {
        let pose = prob.model.pose_of(&iterate.states[c.tag.step]);
        let sub = build_subproblem(
            &prob.robot.parts()[c.tag.part],
            prob.obstacles.get(c.tag.obstacle),
            &pose,
            c.zeta,
            &c.xi,
        )?;
        n_max = n_max.max(to_lcp(&eliminate_equality(&sub)?).n());
    }
    Ok(n_max)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median wall time of `reps` dual updates per worker count. The serial
/// baseline is always measured, so `speedup_vs_serial` is defined even when
/// `1` is not in `worker_counts`.
pub fn run_benchmark(scn: &Scenario, worker_counts: &[usize], reps: usize) -> Result<Vec<BenchRecord>> {
    if worker_counts.contains(&0) {
        return Err(Error::InvalidWorkers);
    }
    let reps = reps.max(1);
    let (prob, iterate) = bench_problem(scn);
    let opts = LemkeOptions::default();
    let nmt = iterate.cells.len();
    let n_max = lcp_dim_max(&prob, &iterate)?;
    let time = |backend: Backend| {
        let samples = (0..reps)
            .map(|_| {
                let t0 = Instant::now();
                let out = dual_update(&iterate, &prob, backend, &opts);
                let us = t0.elapsed().as_secs_f64() * 1e6;
                std::hint::black_box(out);
                us
            })
            .collect();
        median(samples)
    };
    let serial = time(Backend::Serial);
    Ok(worker_counts
        .iter()
        .map(|&w| {
            let median_us = if w == 1 { serial } else { time(Backend::Parallel(w)) };
            BenchRecord {
                workers: w,
                nmt,
                n_max,
                median_us,
                speedup_vs_serial: if w == 1 { 1.0 } else { serial / median_us },
            }
        })
        .collect())
}

pub fn write_bench_csv(path: &Path, records: &[BenchRecord]) -> Result<()> {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{:.1},{:.3}\n",
            r.workers, r.nmt, r.n_max, r.median_us, r.speedup_vs_serial
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}
