//! Running the hierarchy level by level and looking for a rank loop.
//!
//! A rank loop `rank(T_m) = rank(T_{m+1})` in a valid certificate puts the
//! correlation in `D_q`. The loop is only ever looked for in the certificate
//! the solver happened to return, so its absence proves nothing.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::certificate::{Certificate, Correlation, ValidationTolerances};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, DEFAULT_RANK_TOL};
use crate::solver::{self, SolverConfig, SolverReport, SolverStatus};

pub use crate::linalg::numerical_rank;

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchyConfig {
    pub solver: SolverConfig,
    pub rank_rel_tol: f64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig { solver: SolverConfig::default(), rank_rel_tol: DEFAULT_RANK_TOL }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Every level up to the maximum is feasible and no loop was seen.
    ConsistentWithDqc,
    RankLoopDq,
    RejectedAtLevel(usize),
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ConsistentWithDqc => f.write_str("consistent-with-Dqc"),
            Verdict::RankLoopDq => f.write_str("rank-loop-Dq"),
            Verdict::RejectedAtLevel(j) => write!(f, "rejected-at-level-{j}"),
            Verdict::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    pub levels: Vec<SolverReport>,
    /// Numerical rank of `T_j` for `j = 1..`, taken from restrictions of the
    /// deepest feasible certificate.
    pub ranks: Vec<usize>,
    pub rank_loop: bool,
    /// Smallest `m` with `rank(T_m) = rank(T_{m+1})`.
    pub rank_loop_level: Option<usize>,
    pub verdict: Verdict,
    pub note: String,
    pub rank_rel_tol: f64,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
}

/// Numerical ranks agree. `t_m` must index a leading block of `t_m1`.
pub fn check_rank_loop(t_m: &Certificate, t_m1: &Certificate, rel_tol: f64) -> Result<bool> {
    let k = t_m.words().len();
    if t_m.n() != t_m1.n() || t_m.level() >= t_m1.level() || t_m1.words().get(..k) != Some(t_m.words()) {
        return Err(Error::Dimension(format!(
            "level-{} certificate is not a leading restriction of the level-{} one",
            t_m.level(),
            t_m1.level()
        )));
    }
    Ok(linalg::numerical_rank(t_m.matrix(), rel_tol) == linalg::numerical_rank(t_m1.matrix(), rel_tol))
}

fn rank_chain(cert: &Certificate, rel_tol: f64) -> (Vec<usize>, Option<usize>) {
    let ranks: Vec<usize> =
        (1..=cert.level()).map(|j| linalg::numerical_rank(cert.restrict(j).matrix(), rel_tol)).collect();
    let loop_at = ranks.windows(2).position(|w| w[0] == w[1]).map(|i| i + 1);
    (ranks, loop_at)
}

fn note_for(verdict: Verdict, tol: f64) -> String {
    match verdict {
        Verdict::RankLoopDq => {
            format!("rank loop found in the returned certificate (rank tolerance {tol:.1e}): finite-dimensional realization")
        }
        Verdict::ConsistentWithDqc => format!(
            "all levels feasible; no rank loop in the certificate found (rank tolerance {tol:.1e}), \
             which does not exclude a finite-dimensional realization"
        ),
        Verdict::RejectedAtLevel(j) => {
            format!("level {j} residual stalled above tolerance; heuristic evidence of infeasibility, not a proof")
        }
        Verdict::Inconclusive => "solver did not converge; no conclusion".to_string(),
    }
}

/// Solves levels `1..=max_level`, warm-starting each from the previous
/// certificate, then looks for a rank loop in the deepest feasible one.
pub fn certify(p: &Correlation, max_level: usize, config: &HierarchyConfig) -> Result<HierarchyReport> {
    if max_level < 1 {
        return Err(Error::Input("max_level must be at least 1".into()));
    }
    let mut levels = Vec::new();
    let mut deepest: Option<Certificate> = None;
    let mut stop = None;
    for k in 1..=max_level {
        let start: Option<CMatrix> = deepest.as_ref().map(|c| c.matrix().clone());
        let report = solver::solve_feasibility_from(p, k, &config.solver, start.as_ref())?;
        let status = report.status;
        if let Some(cert) = &report.certificate {
            deepest = Some(cert.clone());
        }
        levels.push(report);
        match status {
            SolverStatus::Feasible => {}
            SolverStatus::InfeasibleGap => {
                stop = Some(Verdict::RejectedAtLevel(k));
                break;
            }
            SolverStatus::NoConvergence => {
                stop = Some(Verdict::Inconclusive);
                break;
            }
        }
    }
    let (ranks, loop_at) = deepest.as_ref().map(|c| rank_chain(c, config.rank_rel_tol)).unwrap_or_default();
    let verdict = match stop {
        Some(v @ Verdict::RejectedAtLevel(_)) => v,
        _ if loop_at.is_some() => Verdict::RankLoopDq,
        Some(v) => v,
        None => Verdict::ConsistentWithDqc,
    };
    Ok(HierarchyReport {
        levels,
        ranks,
        rank_loop: loop_at.is_some(),
        rank_loop_level: loop_at,
        note: note_for(verdict, config.rank_rel_tol),
        verdict,
        rank_rel_tol: config.rank_rel_tol,
        certificate: deepest,
    })
}

/// The rank-loop check on a supplied certificate (e.g. from explicit
/// projections) instead of one found by the solver.
pub fn certify_certificate(
    cert: &Certificate,
    p: Option<&Correlation>,
    tols: ValidationTolerances,
    rank_rel_tol: f64,
) -> Result<HierarchyReport> {
    let mut levels = Vec::new();
    let mut rejected = None;
    for j in 1..=cert.level() {
        let validation = cert.restrict(j).validate(p, tols);
        let ok = validation.pass;
        levels.push(SolverReport {
            status: if ok { SolverStatus::Feasible } else { SolverStatus::InfeasibleGap },
            level: j,
            mode: cert.mode(),
            iterations: 0,
            residual: 0.0,
            note: Some(if ok { "supplied certificate".to_string() } else { validation.failures.join("; ") }),
            certificate: None,
            validation: Some(validation),
        });
        if !ok {
            rejected = Some(j);
            break;
        }
    }
    let (ranks, loop_at) = rank_chain(cert, rank_rel_tol);
    let verdict = match (rejected, loop_at) {
        (Some(_), _) => Verdict::Inconclusive,
        (None, Some(_)) => Verdict::RankLoopDq,
        (None, None) => Verdict::ConsistentWithDqc,
    };
    let note = match rejected {
        Some(j) => format!("supplied certificate fails validation at level {j}; nothing follows about the correlation"),
        None => note_for(verdict, rank_rel_tol),
    };
    Ok(HierarchyReport {
        levels,
        ranks,
        rank_loop: loop_at.is_some(),
        rank_loop_level: loop_at,
        verdict,
        note,
        rank_rel_tol,
        certificate: Some(cert.clone()),
    })
}
