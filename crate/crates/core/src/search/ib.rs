use crate::hypercube::{HypercubeIndex, Independence};
use crate::model::{Assignment, Evidence, Network, VarId};

use super::heuristic::heuristic_ib;
use super::{
    check_evidence, run_stream, AgendaItem, Engine, Mode, SearchObserver, SolveConfig, SolveError, SolveReport,
    Strategy,
};

/// The minimal active fringe node: the first node in topological order
/// that is bound, has an unbound parent, and fails the independence
/// condition. `None` means the assignment is terminated.
pub fn fringe_classify(net: &Network, index: &HypercubeIndex<'_>, a: &Assignment) -> Option<VarId> {
    net.topological_order()
        .iter()
        .copied()
        .find(|&v| a.is_bound(v) && net.parents(v).iter().any(|&p| !a.is_bound(p)) && !index.ib_holds_at(a, v))
}

/// Children of `a`: its union with every compatible maximal hypercube of
/// the minimal active fringe node. Cubes contradicting a prior binding are
/// skipped. Empty when `a` is terminated.
pub fn tau_children(net: &Network, index: &HypercubeIndex<'_>, a: &Assignment) -> Vec<Assignment> {
    let Some(w) = fringe_classify(net, index, a) else {
        return Vec::new();
    };
    let value = a.get(w).expect("fringe node is bound");
    let mut children: Vec<Assignment> = Vec::new();
    for cube in index.cubes(w, value) {
        if let Ok(child) = a.union_compatible(&cube.fixed_parents(net)) {
            if !children.contains(&child) {
                children.push(child);
            }
        }
    }
    children
}

/// [`tau_children`] with freshly computed heuristic values.
pub fn tau_expand(net: &Network, index: &HypercubeIndex<'_>, item: &AgendaItem) -> Vec<AgendaItem> {
    tau_children(net, index, &item.assignment)
        .into_iter()
        .map(|child| {
            let h = heuristic_ib(net, index, &child);
            AgendaItem::new(child, h, None)
        })
        .collect()
}

pub(super) struct IbStrategy<'a, 'n> {
    pub net: &'n Network,
    pub index: &'a HypercubeIndex<'n>,
}

impl Strategy for IbStrategy<'_, '_> {
    fn evaluate(&self, a: &Assignment) -> (f64, Option<super::Bounds>) {
        (heuristic_ib(self.net, self.index, a), None)
    }

    fn is_goal(&self, a: &Assignment) -> bool {
        self.index.is_terminated(a)
    }

    fn expand(&self, a: &Assignment) -> Vec<Assignment> {
        tau_children(self.net, self.index, a)
    }
}

/// Most probable independence-based assignments that extend the evidence,
/// best first. Each reported probability is the exact prior.
pub fn solve_ib_map(net: &Network, e: &Evidence, config: &SolveConfig) -> Result<SolveReport, SolveError> {
    solve_ib_map_observed(net, e, config, &mut ())
}

pub fn solve_ib_map_observed(
    net: &Network,
    e: &Evidence,
    config: &SolveConfig,
    observer: &mut dyn SearchObserver,
) -> Result<SolveReport, SolveError> {
    config.validate()?;
    check_evidence(net, e, true)?;
    let index = HypercubeIndex::new(net, Independence::exact(config.epsilon))?;
    let mut engine = Engine::new(IbStrategy { net, index: &index }, config.max_expansions, observer);
    engine.offer(e.assignment().clone());
    run_stream(Mode::Ib, &mut engine, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::DEFAULT_EPSILON;
    use crate::model::Variable;

    fn binary(name: &str, parents: &[usize]) -> Variable {
        Variable::new(
            name,
            vec!["T".into(), "F".into()],
            parents.iter().map(|&p| VarId(p)).collect(),
        )
    }

    fn leaky_or() -> Network {
        let mut vars = vec![binary("v", &[1, 2, 3, 4])];
        vars.extend((1..=4).map(|i| binary(&format!("u{i}"), &[])));
        let mut v = Vec::new();
        for row in 0..16 {
            let p = if row == 15 { 0.1 } else { 0.9 };
            v.extend([p, 1.0 - p]);
        }
        let mut tables = vec![v];
        tables.extend((0..4).map(|_| vec![0.5, 0.5]));
        Network::new(vars, tables).unwrap()
    }

    #[test]
    fn fringe_of_lone_evidence_is_the_child() {
        let net = leaky_or();
        let index = HypercubeIndex::new(&net, Independence::exact(DEFAULT_EPSILON)).unwrap();
        let a = Assignment::named(&net, &[("v", "T")]);
        assert_eq!(fringe_classify(&net, &index, &a), net.lookup("v"));
        let done = Assignment::named(&net, &[("v", "T"), ("u1", "T")]);
        assert_eq!(fringe_classify(&net, &index, &done), None);
        let full = Assignment::named(&net, &[("v", "F"), ("u1", "T"), ("u2", "T"), ("u3", "T"), ("u4", "T")]);
        assert_eq!(fringe_classify(&net, &index, &full), None);
    }

    #[test]
    fn expansion_with_prior_false_parent_yields_four_children() {
        let net = leaky_or();
        let index = HypercubeIndex::new(&net, Independence::exact(DEFAULT_EPSILON)).unwrap();
        let a = Assignment::named(&net, &[("v", "T"), ("u1", "F")]);
        let children = tau_children(&net, &index, &a);
        let expected = vec![
            Assignment::named(&net, &[("v", "T"), ("u1", "F"), ("u2", "T")]),
            Assignment::named(&net, &[("v", "T"), ("u1", "F"), ("u3", "T")]),
            Assignment::named(&net, &[("v", "T"), ("u1", "F"), ("u4", "T")]),
            Assignment::named(&net, &[("v", "T"), ("u1", "F"), ("u2", "F"), ("u3", "F"), ("u4", "F")]),
        ];
        assert_eq!(children, expected);
    }

    #[test]
    fn expansion_of_bare_evidence_yields_one_child_per_cube() {
        let net = leaky_or();
        let index = HypercubeIndex::new(&net, Independence::exact(DEFAULT_EPSILON)).unwrap();
        let a = Assignment::named(&net, &[("v", "T")]);
        let item = AgendaItem::new(a.clone(), heuristic_ib(&net, &index, &a), None);
        let children = tau_expand(&net, &index, &item);
        assert_eq!(children.len(), 5);
        for child in &children {
            assert!(child.h_value <= item.h_value);
        }
        assert!((children[0].h_value - 0.45).abs() < 1e-15);
    }

    #[test]
    fn root_evidence_is_already_terminated() {
        let net = Network::new(vec![binary("X", &[])], vec![vec![0.3, 0.7]]).unwrap();
        let e = Evidence::new(Assignment::named(&net, &[("X", "T")]));
        let report = solve_ib_map(&net, &e, &SolveConfig::default()).unwrap();
        assert_eq!(report.solutions.len(), 1);
        assert_eq!(report.solutions[0].assignment, *e.assignment());
        assert_eq!(report.solutions[0].probability, Some(0.3));
        assert_eq!(report.statistics.expanded, 0);
    }

    #[test]
    fn empty_evidence_is_rejected() {
        let net = leaky_or();
        let err = solve_ib_map(&net, &Evidence::none(&net), &SolveConfig::default()).unwrap_err();
        assert!(matches!(err, SolveError::EmptyEvidence));
    }

    #[test]
    fn leaky_or_stream() {
        let net = leaky_or();
        let e = Evidence::new(Assignment::named(&net, &[("v", "T")]));
        let report = solve_ib_map(&net, &e, &SolveConfig::default().with_top_k(None)).unwrap();
        let probs: Vec<f64> = report.solutions.iter().map(|s| s.probability.unwrap()).collect();
        assert_eq!(probs.len(), 5);
        for p in &probs[..4] {
            assert!((p - 0.45).abs() < 1e-12);
        }
        assert!((probs[4] - 0.5f64.powi(4) * 0.1).abs() < 1e-12);
    }

    #[test]
    fn budget_returns_partial_report() {
        let net = leaky_or();
        let e = Evidence::new(Assignment::named(&net, &[("v", "T")]));
        let config = SolveConfig::default().with_max_expansions(0);
        match solve_ib_map(&net, &e, &config) {
            Err(SolveError::Budget { limit: 0, report }) => assert!(report.solutions.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
