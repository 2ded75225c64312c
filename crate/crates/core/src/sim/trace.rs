//! Per-step simulation traces as CSV.
//!
//! Columns: `step,time,s0..,u0..,cost,min_scale,admm_iters,solve_us,converged`.
//! Floats are written in shortest round-trip form, so a load/write/load
//! cycle reproduces every value exactly.

use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    /// True state at the start of the step.
    pub state: Vec<f64>,
    /// Control applied during the step (zeros on the terminal row).
    pub control: Vec<f64>,
    /// Stage cost of this row.
    pub cost: f64,
    /// Smallest scale over all (part, obstacle) pairs at `state`.
    pub min_scale: f64,
    pub admm_iters: usize,
    pub solve_us: u64,
    /// `false` when ADMM hit its iteration limit and the best iterate was used.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub n_s: usize,
    pub n_u: usize,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(n_s: usize, n_u: usize) -> Self {
        Self { n_s, n_u, rows: vec![] }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["step".to_string(), "time".to_string()];
        h.extend((0..self.n_s).map(|k| format!("s{k}")));
        h.extend((0..self.n_u).map(|k| format!("u{k}")));
        h.extend(["cost", "min_scale", "admm_iters", "solve_us", "converged"].map(String::from));
        h
    }

    /// Rows with timing fields zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.rows {
            r.solve_us = 0;
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(self.header()).map_err(io)?;
        for r in &self.rows {
            let mut rec = vec![r.step.to_string(), r.time.to_string()];
            rec.extend(r.state.iter().map(f64::to_string));
            rec.extend(r.control.iter().map(f64::to_string));
            rec.push(r.cost.to_string());
            rec.push(r.min_scale.to_string());
            rec.push(r.admm_iters.to_string());
            rec.push(r.solve_us.to_string());
            rec.push(u8::from(r.converged).to_string());
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let bad = |m: String| Error::TraceMismatch(m);
        let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
        let names: Vec<&str> = header.iter().collect();
        let n_s = names.iter().filter(|n| is_indexed(n, 's')).count();
        let n_u = names.iter().filter(|n| is_indexed(n, 'u')).count();
        let trace = Trace::new(n_s, n_u);
        if names != trace.header().iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(bad(format!("unexpected trace header {names:?}")));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let field = |k: usize| rec.get(k).unwrap_or("");
            let f = |k: usize| -> Result<f64> {
                field(k)
                    .parse::<f64>()
                    .map_err(|_| bad(format!("row {}: column {} is not a number", line + 1, names[k])))
            };
            let int = |k: usize| -> Result<u64> {
                field(k)
                    .parse::<u64>()
                    .map_err(|_| bad(format!("row {}: column {} is not an integer", line + 1, names[k])))
            };
            let base = 2 + n_s + n_u;
            rows.push(TraceRow {
                step: int(0)? as usize,
                time: f(1)?,
                state: (2..2 + n_s).map(f).collect::<Result<_>>()?,
                control: (2 + n_s..base).map(f).collect::<Result<_>>()?,
                cost: f(base)?,
                min_scale: f(base + 1)?,
                admm_iters: int(base + 2)? as usize,
                solve_us: int(base + 3)?,
                converged: int(base + 4)? != 0,
            });
        }
        Ok(Trace { rows, ..trace })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

fn is_indexed(name: &str, prefix: char) -> bool {
    name.strip_prefix(prefix)
        .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
}
