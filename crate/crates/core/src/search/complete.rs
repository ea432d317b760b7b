use crate::model::{Assignment, Evidence, Network, VarId};

use super::heuristic::heuristic_complete;
use super::{
    check_evidence, run_stream, Bounds, Engine, Mode, SearchObserver, SolveConfig, SolveError, SolveReport, Strategy,
};

/// Complete-mode expansion. The least-index bound node with unbound parents
/// gets one child per value combination of those parents; when there is no
/// such node, the least-index unbound variable gets one child per value.
pub fn complete_children(net: &Network, a: &Assignment) -> Vec<Assignment> {
    let order = net.topological_order();
    let fringe = order
        .iter()
        .copied()
        .find(|&v| a.is_bound(v) && net.parents(v).iter().any(|&p| !a.is_bound(p)));
    let targets: Vec<VarId> = match fringe {
        Some(w) => net.parents(w).iter().copied().filter(|&p| !a.is_bound(p)).collect(),
        None => match order.iter().copied().find(|&v| !a.is_bound(v)) {
            Some(v) => vec![v],
            None => return Vec::new(),
        },
    };
    let mut children = Vec::new();
    let mut values = vec![0usize; targets.len()];
    loop {
        let mut child = a.clone();
        for (&v, &x) in targets.iter().zip(&values) {
            child.bind(v, x);
        }
        children.push(child);
        let mut carried = true;
        for i in (0..targets.len()).rev() {
            values[i] += 1;
            if values[i] < net.cardinality(targets[i]) {
                carried = false;
                break;
            }
            values[i] = 0;
        }
        if carried {
            break;
        }
    }
    children
}

struct CompleteStrategy<'n> {
    net: &'n Network,
}

impl Strategy for CompleteStrategy<'_> {
    fn evaluate(&self, a: &Assignment) -> (f64, Option<Bounds>) {
        (heuristic_complete(self.net, a), None)
    }

    fn is_goal(&self, a: &Assignment) -> bool {
        a.is_complete()
    }

    fn expand(&self, a: &Assignment) -> Vec<Assignment> {
        complete_children(self.net, a)
    }
}

/// Most probable complete extensions of the evidence, best first.
pub fn solve_complete_map(net: &Network, e: &Evidence, config: &SolveConfig) -> Result<SolveReport, SolveError> {
    solve_complete_map_observed(net, e, config, &mut ())
}

pub fn solve_complete_map_observed(
    net: &Network,
    e: &Evidence,
    config: &SolveConfig,
    observer: &mut dyn SearchObserver,
) -> Result<SolveReport, SolveError> {
    config.validate()?;
    check_evidence(net, e, false)?;
    let mut engine = Engine::new(CompleteStrategy { net }, config.max_expansions, observer);
    engine.offer(e.assignment().clone());
    run_stream(Mode::Map, &mut engine, config)
}
