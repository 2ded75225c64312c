//! Post-hoc safety audit of a trace with the primal scale LP.

use nalgebra::DVector;

use crate::collision_lp::min_scale_posed;
use crate::sim::run::COLLISION_THRESHOLD;
use crate::sim::scenario::Scenario;
use crate::sim::trace::Trace;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub step: usize,
    pub part: usize,
    pub obstacle: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Smallest scale seen; `+inf` when no pair was checked.
    pub min_scale: f64,
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Recomputes the scale of every (part, obstacle, row) of the trace.
pub fn verify_trace(trace: &Trace, scn: &Scenario) -> Result<VerifyReport> {
    if trace.n_s != scn.n_s() || trace.n_u != scn.n_u() {
        return Err(Error::TraceMismatch(format!(
            "trace has {} states / {} controls, scenario model {} has {} / {}",
            trace.n_s,
            trace.n_u,
            scn.model.name(),
            scn.n_s(),
            scn.n_u()
        )));
    }
    let mut report = VerifyReport {
        min_scale: f64::INFINITY,
        pairs_checked: 0,
        violations: vec![],
    };
    for row in &trace.rows {
        let state = DVector::from_column_slice(&row.state);
        let pose = scn.model.pose_of(&state);
        for (i, part) in scn.robot.parts().iter().enumerate() {
            for (j, obs) in scn.obstacles.iter().enumerate() {
                let alpha = min_scale_posed(part, &pose, obs)?.alpha_star;
                report.pairs_checked += 1;
                report.min_scale = report.min_scale.min(alpha);
                if alpha < COLLISION_THRESHOLD {
                    report.violations.push(Violation {
                        step: row.step,
                        part: i,
                        obstacle: j,
                        alpha,
                    });
                }
            }
        }
    }
    Ok(report)
}
