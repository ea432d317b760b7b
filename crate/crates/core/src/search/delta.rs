use crate::hypercube::{HypercubeIndex, Independence};
use crate::model::{marginal_probability_with_budget, Assignment, Evidence, Network};

use super::heuristic::bounds_delta;
use super::ib::tau_children;
use super::{
    check_evidence, AgendaItem, Bounds, BudgetExceeded, Engine, Mode, SearchObserver, Solution, SolveConfig,
    SolveError, SolveReport, Step, Strategy,
};

struct DeltaStrategy<'a, 'n> {
    net: &'n Network,
    index: &'a HypercubeIndex<'n>,
}

impl Strategy for DeltaStrategy<'_, '_> {
    fn evaluate(&self, a: &Assignment) -> (f64, Option<Bounds>) {
        let bounds = bounds_delta(self.net, self.index, a);
        (bounds.upper, Some(bounds))
    }

    fn is_goal(&self, a: &Assignment) -> bool {
        self.index.is_terminated(a)
    }

    fn expand(&self, a: &Assignment) -> Vec<Assignment> {
        tau_children(self.net, self.index, a)
    }
}

/// The k-th largest lower bound among the candidates.
fn kth_lower(candidates: &[AgendaItem], k: usize) -> f64 {
    let mut lowers: Vec<f64> = candidates
        .iter()
        .map(|c| c.bounds.expect("delta items carry bounds").lower)
        .collect();
    lowers.sort_by(|a, b| b.total_cmp(a));
    lowers[k - 1]
}

/// Most probable delta-independence-based assignments extending the
/// evidence.
///
/// The agenda is ordered by upper bound. Terminated assignments are
/// collected into a candidate set until the best remaining upper bound
/// falls below the k-th best lower bound in the set; no unexplored
/// assignment can then outrank the top k candidates. The candidates'
/// exact priors are then computed by enumeration and the set is ranked by
/// them. Candidates whose bounds coincide take the bound as their exact
/// value, and a lone candidate is not post-processed at all.
pub fn solve_delta_ib_map(net: &Network, e: &Evidence, config: &SolveConfig) -> Result<SolveReport, SolveError> {
    solve_delta_ib_map_observed(net, e, config, &mut ())
}

pub fn solve_delta_ib_map_observed(
    net: &Network,
    e: &Evidence,
    config: &SolveConfig,
    observer: &mut dyn SearchObserver,
) -> Result<SolveReport, SolveError> {
    config.validate()?;
    check_evidence(net, e, true)?;
    let index = HypercubeIndex::new(net, Independence::delta(config.delta))?;
    let mut engine = Engine::new(DeltaStrategy { net, index: &index }, config.max_expansions, observer);
    engine.offer(e.assignment().clone());

    let k = config.k();
    let mut candidates: Vec<AgendaItem> = Vec::new();
    let outcome = loop {
        if candidates.len() >= k {
            let cutoff = kth_lower(&candidates, k);
            if matches!(engine.top_priority(), Some(top) if top < cutoff) {
                break Ok(());
            }
        }
        match engine.step() {
            Err(BudgetExceeded) => break Err(()),
            Ok(Step::Exhausted) => break Ok(()),
            Ok(Step::Expanded) => {}
            Ok(Step::Goal(item)) => candidates.push(item),
        }
    };

    let mut statistics = engine.statistics();
    statistics.candidates = Some(candidates.len());

    let lone = candidates.len() == 1;
    let mut ranked: Vec<(AgendaItem, Option<f64>)> = Vec::with_capacity(candidates.len());
    for item in candidates {
        let b = item.bounds.expect("delta items carry bounds");
        let exact = if b.lower == b.upper {
            Some(b.upper)
        } else if lone {
            None
        } else {
            Some(marginal_probability_with_budget(
                net,
                &item.assignment,
                config.enumeration_budget,
            )?)
        };
        ranked.push((item, exact));
    }
    let score = |(item, exact): &(AgendaItem, Option<f64>)| exact.unwrap_or(item.h_value);
    ranked.sort_by(|a, b| score(b).total_cmp(&score(a)));

    if config.maximality_filter {
        let keep: Vec<bool> = ranked
            .iter()
            .enumerate()
            .map(|(i, (s, _))| {
                !ranked
                    .iter()
                    .enumerate()
                    .any(|(j, (t, _))| i != j && t.assignment.subsumes(&s.assignment))
            })
            .collect();
        statistics.filtered = keep.iter().filter(|k| !**k).count();
        let mut flags = keep.into_iter();
        ranked.retain(|_| flags.next().unwrap());
    }
    if let Some(best) = ranked.first().map(score) {
        let floor = config.threshold * best;
        ranked.retain(|c| score(c) >= floor);
    }
    ranked.truncate(k);

    let solutions = ranked
        .into_iter()
        .enumerate()
        .map(|(i, (item, exact))| Solution {
            rank: i + 1,
            assignment: item.assignment,
            probability: exact,
            bounds: item.bounds,
        })
        .collect();
    let report = SolveReport {
        mode: Mode::DeltaIb,
        solutions,
        statistics,
        config: config.clone(),
    };
    match outcome {
        Ok(()) => Ok(report),
        Err(()) => Err(SolveError::Budget {
            limit: config.max_expansions,
            report: Box::new(report),
        }),
    }
}
