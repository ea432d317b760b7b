use serde::Serialize;

use crate::hypercube::{HypercubeIndex, Independence};
use crate::model::Evidence;
use crate::oracle::{Criterion, Oracle};
use crate::search::{solve_complete_map, solve_delta_ib_map, solve_ib_map, SolveConfig, SolveError};

use super::generate::{random_instance, GenerateOptions};

const VERIFY_DELTA: f64 = 0.1;
const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckTally {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Disagreement {
    pub trial: usize,
    pub seed: u64,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct VerifyReport {
    pub nodes: usize,
    pub trials: usize,
    pub seed: u64,
    pub ok: bool,
    pub checks: Vec<CheckTally>,
    pub failures: Vec<Disagreement>,
}

fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        _ => false,
    }
}

/// Runs the engine against the oracle on `trials` random instances.
///
/// Per instance: local and global independence agree on every partial
/// assignment (exact and delta); complete MAP, IB-MAP and delta-IB-MAP
/// winners match the oracle's best probabilities.
pub fn verify(nodes: usize, trials: usize, seed: u64) -> Result<VerifyReport, SolveError> {
    const NAMES: [&str; 5] = [
        "locality-exact",
        "locality-delta",
        "complete-map",
        "ib-map",
        "delta-ib-map",
    ];
    let mut checks: Vec<CheckTally> = NAMES
        .iter()
        .map(|&name| CheckTally {
            name,
            passed: 0,
            failed: 0,
        })
        .collect();
    let mut failures = Vec::new();
    for trial in 0..trials {
        let trial_seed = seed.wrapping_mul(1_000_003).wrapping_add(trial as u64);
        let (net, e) = random_instance(&GenerateOptions {
            nodes,
            max_parents: 3.min(nodes.saturating_sub(1)),
            seed: trial_seed,
            ..GenerateOptions::default()
        });
        let oracle = Oracle::new(&net).map_err(|err| SolveError::InvalidParameter(err.to_string()))?;
        let mut outcome = Vec::with_capacity(NAMES.len());

        let locality = |independence: Independence, criterion: Criterion| -> Result<Option<String>, SolveError> {
            let index = HypercubeIndex::new(&net, independence)?;
            let empty = Evidence::none(&net);
            let mismatch = oracle
                .extensions(&empty)
                .find(|a| index.is_terminated(a) != oracle.is_independence_based(a, criterion))
                .map(|a| format!("disagreement on {}", a.display(&net)));
            Ok(mismatch)
        };
        outcome.push(locality(Independence::exact(1e-9), Criterion::Exact { epsilon: 1e-9 })?);
        outcome.push(locality(
            Independence::delta(VERIFY_DELTA),
            Criterion::Delta { delta: VERIFY_DELTA },
        )?);

        let complete = solve_complete_map(&net, &e, &SolveConfig::default())?;
        let expected = oracle.complete_map(&e).best_probability();
        let found = complete.best().and_then(|s| s.probability);
        outcome.push((!close(found, expected, TOLERANCE)).then(|| format!("engine {found:?}, oracle {expected:?}")));

        let ib = solve_ib_map(&net, &e, &SolveConfig::default())?;
        let expected = oracle
            .ib_assignments(&e, Criterion::Exact { epsilon: 1e-9 }, true)
            .best_probability();
        let found = ib.best().and_then(|s| s.probability);
        outcome.push((!close(found, expected, TOLERANCE)).then(|| format!("engine {found:?}, oracle {expected:?}")));

        let delta = solve_delta_ib_map(&net, &e, &SolveConfig::default().with_delta(VERIFY_DELTA))?;
        let expected = oracle
            .ib_assignments(&e, Criterion::Delta { delta: VERIFY_DELTA }, true)
            .best_probability();
        let found = delta.best().map(|s| oracle.marginal(&s.assignment));
        outcome.push((!close(found, expected, 1e-9)).then(|| format!("engine {found:?}, oracle {expected:?}")));

        for (tally, result) in checks.iter_mut().zip(outcome) {
            match result {
                None => tally.passed += 1,
                Some(detail) => {
                    tally.failed += 1;
                    failures.push(Disagreement {
                        trial,
                        seed: trial_seed,
                        check: tally.name,
                        detail,
                    });
                }
            }
        }
    }
    Ok(VerifyReport {
        nodes,
        trials,
        seed,
        ok: failures.is_empty(),
        checks,
        failures,
    })
}
