//! Belief networks, partial assignments and exact queries over them.
//!
//! Everything here is immutable after construction. The exact marginal is
//! brute force and only meant for desk-scale networks; it backs the
//! post-processing of delta-independence search and the test oracles.

mod assignment;
mod network;

pub use assignment::{Assignment, Conflict, DisplayAssignment, Evidence};
pub use network::{Cpt, Network, VarId, Variable, ROW_SUM_TOLERANCE};

use thiserror::Error;

/// Default cap on the number of completions a brute-force sum may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 22;

/// Comparison slack for probabilities computed along different routes.
pub const PROBABILITY_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{variables} variables but {tables} tables")]
    TableCount { variables: usize, tables: usize },
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{variable}` declares value `{value}` twice")]
    DuplicateValue { variable: String, value: String },
    #[error("variable `{0}` needs at least two values")]
    DomainTooSmall(String),
    #[error("variable `{variable}` has out-of-range parent id {parent}")]
    UnknownParent { variable: String, parent: usize },
    #[error("variable `{variable}` lists parent `{parent}` twice")]
    DuplicateParent { variable: String, parent: String },
    #[error("table of `{variable}` has {found} entries, expected {expected}")]
    TableSize {
        variable: String,
        expected: usize,
        found: usize,
    },
    #[error("table of `{variable}`, row {row}: entry {value} outside [0, 1]")]
    ProbabilityRange { variable: String, row: usize, value: f64 },
    #[error("table of `{variable}`, row {row}: row sum {sum} is not 1")]
    RowSum { variable: String, row: usize, sum: f64 },
    #[error("cycle through edge {from} -> {to}")]
    Cycle { from: String, to: String },
    #[error("enumeration needs {required} completions, budget is {budget}")]
    Budget { required: u128, budget: u64 },
}

/// Exact `P(a)`, summing the joint over every completion of `a`.
pub fn marginal_probability(net: &Network, a: &Assignment) -> Result<f64, ModelError> {
    marginal_probability_with_budget(net, a, DEFAULT_ENUMERATION_BUDGET)
}

/// [`marginal_probability`] with an explicit enumeration cap.
///
/// Variables that are neither bound nor ancestors of a bound variable sum
/// out to one and are skipped; the budget applies to the remaining free
/// variables.
pub fn marginal_probability_with_budget(net: &Network, a: &Assignment, budget: u64) -> Result<f64, ModelError> {
    let mut relevant = vec![false; net.len()];
    for v in a.bound() {
        relevant[v.0] = true;
        for u in net.ancestors(v) {
            relevant[u.0] = true;
        }
    }
    let free: Vec<VarId> = net.ids().filter(|&v| relevant[v.0] && !a.is_bound(v)).collect();
    let required: u128 = free.iter().map(|&v| net.cardinality(v) as u128).product();
    if required > budget as u128 {
        return Err(ModelError::Budget { required, budget });
    }
    let members: Vec<VarId> = net.ids().filter(|&v| relevant[v.0]).collect();

    let mut full = a.clone();
    for &v in &free {
        full.bind(v, 0);
    }
    let mut total = 0.0;
    loop {
        let mut product = 1.0;
        for &v in &members {
            product *= net.entry(v, &full).expect("relevant set is ancestrally closed");
            if product == 0.0 {
                break;
            }
        }
        total += product;
        let mut carried = true;
        for &v in free.iter().rev() {
            let next = full.get(v).unwrap() + 1;
            if next < net.cardinality(v) {
                full.bind(v, next);
                carried = false;
                break;
            }
            full.bind(v, 0);
        }
        if carried {
            break;
        }
    }
    Ok(total)
}

/// Whether every variable bound in `a` is an evidence variable or has a
/// directed path down to one. With `proper`, every intermediate node on
/// that path must be bound in `a` as well.
pub fn evidential_support(net: &Network, a: &Assignment, e: &Evidence, proper: bool) -> bool {
    let mut reached = vec![false; net.len()];
    let mut stack: Vec<VarId> = e.bound().collect();
    for &v in &stack {
        reached[v.0] = true;
    }
    while let Some(u) = stack.pop() {
        for &p in net.parents(u) {
            if reached[p.0] || (proper && !a.is_bound(p)) {
                continue;
            }
            reached[p.0] = true;
            stack.push(p);
        }
    }
    a.bound().all(|v| reached[v.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(name: &str, parents: &[usize]) -> Variable {
        Variable::new(
            name,
            vec!["T".into(), "F".into()],
            parents.iter().map(|&p| VarId(p)).collect(),
        )
    }

    fn chain() -> Network {
        // A -> B -> E
        Network::new(
            vec![binary("A", &[]), binary("B", &[0]), binary("E", &[1])],
            vec![vec![0.2, 0.8], vec![0.7, 0.3, 0.4, 0.6], vec![0.9, 0.1, 0.5, 0.5]],
        )
        .unwrap()
    }

    #[test]
    fn marginal_of_empty_is_one() {
        let net = chain();
        assert_eq!(marginal_probability(&net, &Assignment::for_network(&net)).unwrap(), 1.0);
    }

    #[test]
    fn marginal_of_root_reads_the_prior() {
        let net = Network::new(vec![binary("X", &[])], vec![vec![0.3, 0.7]]).unwrap();
        let a = Assignment::named(&net, &[("X", "T")]);
        assert_eq!(marginal_probability(&net, &a).unwrap(), 0.3);
    }

    #[test]
    fn marginal_of_complete_is_the_joint() {
        let net = chain();
        let a = Assignment::named(&net, &[("A", "F"), ("B", "T"), ("E", "F")]);
        assert_eq!(marginal_probability(&net, &a).unwrap(), 0.8 * 0.4 * 0.1);
        assert_eq!(net.joint(&a), 0.8 * 0.4 * 0.1);
    }

    #[test]
    fn marginal_sums_out_ancestors() {
        let net = chain();
        let a = Assignment::named(&net, &[("E", "T")]);
        // P(B=T) = 0.2*0.7 + 0.8*0.4 = 0.46
        let expected = 0.46 * 0.9 + 0.54 * 0.5;
        assert!((marginal_probability(&net, &a).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn marginal_respects_budget() {
        let net = chain();
        let a = Assignment::named(&net, &[("E", "T")]);
        let err = marginal_probability_with_budget(&net, &a, 3).unwrap_err();
        assert_eq!(err, ModelError::Budget { required: 4, budget: 3 });
    }

    #[test]
    fn support_on_chain() {
        let net = chain();
        let e = Evidence::new(Assignment::named(&net, &[("E", "T")]));
        assert!(evidential_support(&net, &e, &e, false));
        assert!(evidential_support(&net, &e, &e, true));

        let gap = Assignment::named(&net, &[("E", "T"), ("A", "T")]);
        assert!(evidential_support(&net, &gap, &e, false));
        assert!(!evidential_support(&net, &gap, &e, true));

        let full = Assignment::named(&net, &[("E", "T"), ("B", "T"), ("A", "T")]);
        assert!(evidential_support(&net, &full, &e, false));
        assert!(evidential_support(&net, &full, &e, true));
    }

    #[test]
    fn support_rejects_descendants_of_evidence() {
        let net = chain();
        let e = Evidence::new(Assignment::named(&net, &[("A", "T")]));
        let a = Assignment::named(&net, &[("A", "T"), ("B", "F")]);
        assert!(!evidential_support(&net, &a, &e, false));
    }
}
