//! Deterministic batched execution of independent subproblems.
//!
//! The backend contract is a parallel map over an index range: the input is
//! split into static contiguous blocks of `ceil(count / workers)` items, each
//! worker writes only its own output slots, and the call returns once every
//! worker has finished. Every item is computed by exactly one sequential
//! call, so results are bitwise identical for any backend and worker count.

use std::collections::{BTreeMap, HashSet};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use crate::dual_subproblem::CellTag;
use crate::lemke::{lemke_solve, LcpProblem, LcpSolution, LcpStatus, LemkeOptions};
use crate::{Error, Real, Result};

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV: &str = "POLYADMM_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Serial,
    Parallel(usize),
}

impl Backend {
    pub fn workers(&self) -> usize {
        match *self {
            Backend::Serial => 1,
            Backend::Parallel(w) => w,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Serial => "serial",
            Backend::Parallel(_) => "parallel",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers() == 0 {
            return Err(Error::InvalidWorkers);
        }
        Ok(())
    }

    /// `Parallel(n)` from `POLYADMM_WORKERS`, otherwise `Serial`.
    pub fn from_env() -> Self {
        match std::env::var(WORKERS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()) {
            Some(n) if n > 1 => Backend::Parallel(n),
            _ => Backend::Serial,
        }
    }
}

/// Applies `f` to every input under `backend`, preserving order.
pub fn parallel_map<I, O, F>(backend: Backend, inputs: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync,
{
    let workers = backend.workers().max(1);
    if workers == 1 || inputs.len() <= 1 {
        return inputs.iter().map(&f).collect();
    }
    let chunk = inputs.len().div_ceil(workers);
    let mut slots: Vec<Option<O>> = (0..inputs.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (ins, outs) in inputs.chunks(chunk).zip(slots.chunks_mut(chunk)) {
            let f = &f;
            scope.spawn(move || {
                for (x, slot) in ins.iter().zip(outs.iter_mut()) {
                    *slot = Some(f(x));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every slot written")).collect()
}

#[derive(Debug, Clone)]
pub struct BatchRequest<T: Real> {
    pub problems: Vec<(CellTag, LcpProblem<T>)>,
    pub backend: Backend,
    pub options: LemkeOptions<T>,
}

impl<T: Real> BatchRequest<T> {
    pub fn new(problems: Vec<(CellTag, LcpProblem<T>)>, backend: Backend) -> Self {
        Self {
            problems,
            backend,
            options: LemkeOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.backend.validate()?;
        let mut seen = HashSet::with_capacity(self.problems.len());
        for (tag, _) in &self.problems {
            if !seen.insert(*tag) {
                return Err(Error::DuplicateTag(tag.part, tag.obstacle, tag.step));
            }
        }
        Ok(())
    }

    /// Largest LCP dimension in the batch.
    pub fn n_max(&self) -> usize {
        self.problems.iter().map(|(_, p)| p.n()).max().unwrap_or(0)
    }
}

/// Outcome class of one batch entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Lcp(LcpStatus),
    Error,
}

#[derive(Debug, Clone)]
pub struct BatchResult<T: Real> {
    pub solutions: Vec<Result<LcpSolution<T>>>,
    pub wall_time: Duration,
    pub histogram: BTreeMap<Outcome, usize>,
}

/// Solves every LCP of the batch; per-problem failures stay in their slot.
pub fn solve_batch<T: Real>(req: &BatchRequest<T>) -> Result<BatchResult<T>> {
    req.validate()?;
    let start = Instant::now();
    let solutions = parallel_map(req.backend, &req.problems, |(_, p)| lemke_solve(p, &req.options));
    let wall_time = start.elapsed();
    let mut histogram = BTreeMap::new();
    for s in &solutions {
        let key = match s {
            Ok(sol) => Outcome::Lcp(sol.status),
            Err(_) => Outcome::Error,
        };
        *histogram.entry(key).or_insert(0) += 1;
    }
    Ok(BatchResult {
        solutions,
        wall_time,
        histogram,
    })
}

/// One timed batch, as appended to a benchmark results file.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchRecord {
    pub backend: String,
    pub workers: usize,
    pub count: usize,
    pub n_max: usize,
    pub wall_time_us: u128,
}

pub const BATCH_RECORD_HEADER: &str = "backend,workers,count,n_max,wall_time_us";

impl BatchRecord {
    pub fn from_result<T: Real>(req: &BatchRequest<T>, res: &BatchResult<T>) -> Self {
        Self {
            backend: req.backend.name().to_string(),
            workers: req.backend.workers(),
            count: req.problems.len(),
            n_max: req.n_max(),
            wall_time_us: res.wall_time.as_micros(),
        }
    }

    fn to_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.backend, self.workers, self.count, self.n_max, self.wall_time_us
        )
    }
}

/// Appends records to `path`, writing the header when the file is new or
/// empty. An existing file with a different header is rejected.
pub fn append_batch_records(path: &Path, records: &[BatchRecord]) -> Result<()> {
    let existing = std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
    if existing {
        let file = std::fs::File::open(path)?;
        let mut first = String::new();
        BufReader::new(file).read_line(&mut first)?;
        if first.trim_end() != BATCH_RECORD_HEADER {
            return Err(Error::Io(format!(
                "{} has header {:?}, expected {:?}",
                path.display(),
                first.trim_end(),
                BATCH_RECORD_HEADER
            )));
        }
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    if !existing {
        writeln!(file, "{BATCH_RECORD_HEADER}")?;
    }
    for r in records {
        writeln!(file, "{}", r.to_row())?;
    }
    Ok(())
}
