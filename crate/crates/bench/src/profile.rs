//! Performance profiles: for each solver `s`, the fraction of problems it
//! solved within a factor `τ` of the best solver on that problem,
//!
//! ```text
//! r_{s,p} = R_{s,p} / min_s R_{s,p}        ρ_s(τ) = |{p : r_{s,p} ≤ τ}| / |P|
//! ```
//!
//! Failed runs carry an infinite time, so they contribute an infinite ratio
//! and never count as solved at any finite `τ`. A problem no solver finished
//! has no best time to normalise by; it is dropped from `P` and reported.

use crate::runner::BenchRecord;

/// One solver's profile curve over a shared `τ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver: String,
    /// Strictly increasing evaluation points, starting at (or above) 1.
    pub taus: Vec<f64>,
    /// Fraction of comparable problems solved within factor `τ` of the best
    /// solver; nondecreasing, in `[0, 1]`.
    pub rho: Vec<f64>,
}

/// Curves plus the problems that had to be dropped because no solver
/// recorded a finite time on them.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub curves: Vec<ProfileCurve>,
    pub dropped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("performance profiles compare solvers; got {0}, need at least 2")]
    TooFewSolvers(usize),
    #[error("no records to profile")]
    Empty,
    #[error("every problem was dropped: no solver recorded a finite time anywhere")]
    NothingComparable,
    #[error("the tau grid must be non-empty and strictly increasing")]
    BadGrid,
}

/// The default evaluation grid: fifty-seven points log-spaced over `[1, 2⁷]`
/// (eight per octave), the plotting range performance profiles are
/// conventionally read on.
pub fn default_tau_grid() -> Vec<f64> {
    (0..=56).map(|k| 2f64.powf(k as f64 / 8.0)).collect()
}

/// Compute one profile curve per solver appearing in `records`, over the
/// given `τ` grid. Records are keyed by (solver, problem) name; a pair that
/// appears more than once keeps its last record. A (solver, problem) pair
/// with no record at all is treated as a failed run.
pub fn performance_profile(
    records: &[BenchRecord],
    taus: &[f64],
) -> Result<ProfileReport, ProfileError> {
    if records.is_empty() {
        return Err(ProfileError::Empty);
    }
    if taus.is_empty() || !taus.windows(2).all(|w| w[0] < w[1]) {
        return Err(ProfileError::BadGrid);
    }
    let solvers = ordered_unique(records.iter().map(|r| r.solver.as_str()));
    if solvers.len() < 2 {
        return Err(ProfileError::TooFewSolvers(solvers.len()));
    }
    let problems = ordered_unique(records.iter().map(|r| r.problem.as_str()));

    let mut time = vec![vec![f64::INFINITY; problems.len()]; solvers.len()];
    for r in records {
        let s = solvers.iter().position(|s| *s == r.solver).unwrap();
        let p = problems.iter().position(|p| *p == r.problem).unwrap();
        time[s][p] = r.min_runtime;
    }

    let mut kept: Vec<(usize, f64)> = Vec::new();
    let mut dropped = Vec::new();
    for (p, pname) in problems.iter().enumerate() {
        let best = (0..solvers.len())
            .map(|s| time[s][p])
            .filter(|t| t.is_finite())
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            kept.push((p, best));
        } else {
            dropped.push(pname.to_string());
        }
    }
    if kept.is_empty() {
        return Err(ProfileError::NothingComparable);
    }

    let count = kept.len() as f64;
    let curves = solvers
        .iter()
        .enumerate()
        .map(|(s, sname)| {
            let ratios: Vec<f64> = kept.iter().map(|&(p, best)| time[s][p] / best).collect();
            let rho = taus
                .iter()
                .map(|&tau| ratios.iter().filter(|&&r| r <= tau).count() as f64 / count)
                .collect();
            ProfileCurve {
                solver: sname.to_string(),
                taus: taus.to_vec(),
                rho,
            }
        })
        .collect();
    Ok(ProfileReport { curves, dropped })
}

/// Keep only two solvers' records — profiles over many solvers are hard to
/// read because one slow outlier reshapes every other curve, so head-to-head
/// comparison is offered as a first-class mode.
pub fn restrict_to_pair(records: &[BenchRecord], a: &str, b: &str) -> Vec<BenchRecord> {
    records
        .iter()
        .filter(|r| r.solver == a || r.solver == b)
        .cloned()
        .collect()
}

fn ordered_unique<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}
