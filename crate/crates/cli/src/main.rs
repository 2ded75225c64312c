use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use polyadmm::batch::WORKERS_ENV;
use polyadmm::sim::svg::render_svg;
use polyadmm::sim::{load_scenario, run_benchmark, run_simulation, verify_trace, write_bench_csv, Trace};
use polyadmm::Backend;

#[derive(Parser)]
#[command(name = "polyadmm", version, about = "Polytope collision-avoiding MPC simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Serial,
    Parallel,
}

#[derive(Subcommand)]
enum Command {
    /// Run a closed-loop simulation.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Override the scenario's penalty weight.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write an SVG of the run (planar scenarios only).
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Re-check every pose of a trace against the scenario's obstacles.
    Verify { trace: PathBuf, scenario: PathBuf },
    /// Time the dual update for several worker counts.
    Bench {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn backend_of(arg: Option<BackendArg>, workers: Option<usize>) -> Result<Backend> {
    let backend = match (arg, workers) {
        (Some(BackendArg::Serial), _) => Backend::Serial,
        (Some(BackendArg::Parallel), w) => Backend::Parallel(w.unwrap_or(4)),
        (None, Some(w)) if w > 1 => Backend::Parallel(w),
        (None, Some(0)) => bail!("--workers must be at least 1"),
        (None, _) => Backend::Serial,
    };
    backend.validate()?;
    Ok(backend)
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run {
            scenario,
            backend,
            workers,
            sigma,
            trace,
            plot,
        } => {
            let mut scn = load_scenario(&scenario)?;
            if let Some(s) = sigma {
                if !(s > 0.0) {
                    bail!("--sigma must be positive");
                }
                scn.sigma = s;
            }
            let backend = backend_of(backend, workers)?;
            let out = run_simulation(&scn, backend)?;
            let m = &out.metrics;
            println!("scenario        {}", scn.name);
            println!("backend         {} ({} workers)", backend.name(), backend.workers());
            println!("success         {}", m.success);
            println!("termination     {:?}", m.termination);
            println!("navigation_time {:.2} s", m.navigation_time);
            println!("navigation_cost {:.4}", m.navigation_cost);
            println!("min_scale       {:.4}", m.min_scale_overall);
            println!("unconverged     {} of {} steps", m.unconverged_steps, m.per_step_solve_times.len());
            if !m.per_step_solve_times.is_empty() {
                let total: f64 = m.per_step_solve_times.iter().map(|d| d.as_secs_f64()).sum();
                println!(
                    "mean solve      {:.2} ms",
                    1e3 * total / m.per_step_solve_times.len() as f64
                );
            }
            if let Some(path) = trace {
                out.trace
                    .write(&path)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = plot {
                std::fs::write(&path, render_svg(&scn, &out.trace)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(m.success)
        }
        Command::Verify { trace, scenario } => {
            let scn = load_scenario(&scenario)?;
            let tr = Trace::read(&trace).with_context(|| format!("reading {}", trace.display()))?;
            let report = verify_trace(&tr, &scn)?;
            println!("pairs checked {}", report.pairs_checked);
            println!("min scale     {}", report.min_scale);
            for v in &report.violations {
                println!(
                    "violation: step {} part {} obstacle {} scale {:.6}",
                    v.step, v.part, v.obstacle, v.alpha
                );
            }
            println!("{}", if report.is_clean() { "clean" } else { "VIOLATIONS" });
            Ok(report.is_clean())
        }
        Command::Bench {
            scenario,
            workers,
            reps,
            out,
        } => {
            let scn = load_scenario(&scenario)?;
            let records = run_benchmark(&scn, &workers, reps)?;
            for r in &records {
                println!(
                    "workers {:>2}  nmt {}  n_max {}  median {:>10.1} us  speedup {:.2}",
                    r.workers, r.nmt, r.n_max, r.median_us, r.speedup_vs_serial
                );
            }
            write_bench_csv(&out, &records)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
