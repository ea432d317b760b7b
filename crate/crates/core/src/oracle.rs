//! Brute-force reference answers for small networks.
//!
//! Nothing here uses the hypercube or search modules. The oracle tabulates
//! the marginal of every partial assignment once (a table with
//! `prod(|domain| + 1)` slots, the extra slot standing for "unbound") and
//! answers every question by lookups into it: exact priors, the global form
//! of the independence conditions, evidential support, and the exhaustive
//! rankings that the search results are compared against.

use thiserror::Error;

use crate::model::{Assignment, Evidence, Network, VarId, DEFAULT_ENUMERATION_BUDGET};

/// Slack for the global delta test, which compares ratios of sums.
const RATIO_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle table needs {required} entries, budget is {budget}")]
    Budget { required: u128, budget: u64 },
}

/// Which independence the global check demands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Conditional probabilities agree within `epsilon`.
    Exact { epsilon: f64 },
    /// `min >= (1 - delta) * max`.
    Delta { delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Every qualifying assignment with its exact prior, most probable
    /// first, ties in assignment order.
    pub ranked: Vec<(Assignment, f64)>,
}

impl OracleResult {
    fn new(mut ranked: Vec<(Assignment, f64)>) -> Self {
        ranked.sort_by(|(a, p), (b, q)| q.total_cmp(p).then_with(|| a.cmp(b)));
        Self { ranked }
    }

    pub fn best_probability(&self) -> Option<f64> {
        self.ranked.first().map(|(_, p)| *p)
    }

    /// All assignments tied with the most probable one.
    pub fn best(&self) -> Vec<&Assignment> {
        match self.best_probability() {
            None => Vec::new(),
            Some(top) => self
                .ranked
                .iter()
                .take_while(|(_, p)| *p == top)
                .map(|(a, _)| a)
                .collect(),
        }
    }

    /// The ranked list restricted to members no other member subsumes.
    pub fn maximal(&self) -> Vec<(Assignment, f64)> {
        self.ranked
            .iter()
            .filter(|(a, _)| !self.ranked.iter().any(|(b, _)| b != a && b.subsumes(a)))
            .cloned()
            .collect()
    }
}

pub struct Oracle<'n> {
    net: &'n Network,
    radix: Vec<usize>,
    stride: Vec<usize>,
    marginal: Vec<f64>,
    ancestors: Vec<Vec<bool>>,
}

impl<'n> Oracle<'n> {
    pub fn new(net: &'n Network) -> Result<Self, OracleError> {
        Self::with_budget(net, DEFAULT_ENUMERATION_BUDGET)
    }

    pub fn with_budget(net: &'n Network, budget: u64) -> Result<Self, OracleError> {
        let n = net.len();
        let radix: Vec<usize> = net.ids().map(|v| net.cardinality(v) + 1).collect();
        let required = radix.iter().map(|&r| r as u128).product::<u128>();
        if required > budget as u128 {
            return Err(OracleError::Budget { required, budget });
        }
        let mut stride = vec![1usize; n];
        for i in 1..n {
            stride[i] = stride[i - 1] * radix[i - 1];
        }

        let size = required as usize;
        let mut marginal = vec![0.0; size];
        let mut digits = vec![0usize; n];
        for code in 0..size {
            let mut rest = code;
            for i in 0..n {
                digits[i] = rest % radix[i];
                rest /= radix[i];
            }
            // Free digits sit at the top of each radix, so replacing the
            // first free digit by a value always gives a smaller code.
            marginal[code] = match (0..n).find(|&i| digits[i] == radix[i] - 1) {
                Some(i) => (0..radix[i] - 1)
                    .map(|x| marginal[code - (radix[i] - 1 - x) * stride[i]])
                    .sum(),
                None => net
                    .ids()
                    .map(|v| {
                        let parents: Vec<usize> = net.parents(v).iter().map(|p| digits[p.0]).collect();
                        net.cpt(v).prob(digits[v.0], &parents)
                    })
                    .product(),
            };
        }

        let mut ancestors = vec![vec![false; n]; n];
        for v in net.ids() {
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                for &p in net.parents(u) {
                    if !ancestors[v.0][p.0] {
                        ancestors[v.0][p.0] = true;
                        stack.push(p);
                    }
                }
            }
        }
        Ok(Self {
            net,
            radix,
            stride,
            marginal,
            ancestors,
        })
    }

    pub fn network(&self) -> &'n Network {
        self.net
    }

    fn code(&self, a: &Assignment) -> usize {
        (0..self.radix.len())
            .map(|i| a.get(VarId(i)).unwrap_or(self.radix[i] - 1) * self.stride[i])
            .sum()
    }

    /// Exact `P(a)`.
    pub fn marginal(&self, a: &Assignment) -> f64 {
        self.marginal[self.code(a)]
    }

    /// Global independence test at one bound node `v`: `P(a[v] | rest, u)`
    /// must be (delta-)constant over every assignment `u` to the unbound
    /// ancestors of `v` whose conditioning event has positive probability.
    /// The rest of the assignment excludes `v`'s descendants.
    pub fn independent_at(&self, a: &Assignment, v: VarId, criterion: Criterion) -> bool {
        let Some(value) = a.get(v) else {
            return true;
        };
        let n = self.radix.len();
        let free: Vec<usize> = (0..n)
            .filter(|&u| self.ancestors[v.0][u] && !a.is_bound(VarId(u)))
            .collect();
        if free.is_empty() {
            return true;
        }
        let mut condition = a.clone();
        condition.unbind(v);
        for u in 0..n {
            if self.ancestors[u][v.0] {
                condition.unbind(VarId(u));
            }
        }

        let base = self.code(&condition);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut values = vec![0usize; free.len()];
        loop {
            let mut code = base;
            for (&u, &x) in free.iter().zip(&values) {
                code -= (self.radix[u] - 1 - x) * self.stride[u];
            }
            let den = self.marginal[code];
            if den > 0.0 {
                let num = self.marginal[code - (self.radix[v.0] - 1 - value) * self.stride[v.0]];
                let ratio = num / den;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            let mut i = 0;
            loop {
                if i == free.len() {
                    return match criterion {
                        _ if lo > hi => true,
                        Criterion::Exact { epsilon } => hi - lo <= epsilon,
                        Criterion::Delta { delta } => lo >= (1.0 - delta) * hi - RATIO_SLACK,
                    };
                }
                values[i] += 1;
                if values[i] < self.radix[free[i]] - 1 {
                    break;
                }
                values[i] = 0;
                i += 1;
            }
        }
    }

    /// Whether `a` is a (delta-)independence-based assignment, checked at
    /// every bound node against all of its unbound ancestors.
    pub fn is_independence_based(&self, a: &Assignment, criterion: Criterion) -> bool {
        a.bound().all(|v| self.independent_at(a, v, criterion))
    }

    /// Every bound node is evidence or reaches evidence along a directed
    /// path; with `proper`, along a path of bound nodes.
    pub fn supported(&self, a: &Assignment, e: &Evidence, proper: bool) -> bool {
        let n = self.radix.len();
        let mut reached = vec![false; n];
        let mut stack: Vec<VarId> = e.bound().collect();
        for v in &stack {
            reached[v.0] = true;
        }
        if !proper {
            for v in e.bound() {
                for (r, &above) in reached.iter_mut().zip(&self.ancestors[v.0]) {
                    *r |= above;
                }
            }
            return a.bound().all(|v| reached[v.0]);
        }
        while let Some(v) = stack.pop() {
            for &p in self.net.parents(v) {
                if a.is_bound(p) && !reached[p.0] {
                    reached[p.0] = true;
                    stack.push(p);
                }
            }
        }
        a.bound().all(|v| reached[v.0])
    }

    /// Every partial assignment extending `e`, in code order.
    pub fn extensions<'a>(&'a self, e: &'a Evidence) -> impl Iterator<Item = Assignment> + 'a {
        let n = self.radix.len();
        (0..self.marginal.len()).filter_map(move |code| {
            let mut a = Assignment::for_network(self.net);
            let mut rest = code;
            for i in 0..n {
                let d = rest % self.radix[i];
                rest /= self.radix[i];
                if d + 1 < self.radix[i] {
                    a.bind(VarId(i), d);
                }
            }
            e.subsumes(&a).then_some(a)
        })
    }

    /// All positive-probability assignments extending `e` that are
    /// independence-based under `criterion` and evidentially supported.
    pub fn ib_assignments(&self, e: &Evidence, criterion: Criterion, proper: bool) -> OracleResult {
        let ranked = self
            .extensions(e)
            .filter(|a| self.supported(a, e, proper) && self.is_independence_based(a, criterion))
            .map(|a| {
                let p = self.marginal(&a);
                (a, p)
            })
            .filter(|(_, p)| *p > 0.0)
            .collect();
        OracleResult::new(ranked)
    }

    /// All positive-probability complete extensions of `e`.
    pub fn complete_map(&self, e: &Evidence) -> OracleResult {
        let ranked = self
            .extensions(e)
            .filter(|a| a.is_complete())
            .map(|a| {
                let p = self.marginal(&a);
                (a, p)
            })
            .filter(|(_, p)| *p > 0.0)
            .collect();
        OracleResult::new(ranked)
    }
}

/// Exhaustive independence-based assignments extending `e`, ranked by
/// exact prior.
pub fn oracle_ib_assignments(
    net: &Network,
    e: &Evidence,
    criterion: Criterion,
    proper: bool,
) -> Result<OracleResult, OracleError> {
    Ok(Oracle::new(net)?.ib_assignments(e, criterion, proper))
}

/// Exhaustive complete MAP: every complete extension of `e`, ranked.
pub fn oracle_complete_map(net: &Network, e: &Evidence) -> Result<OracleResult, OracleError> {
    Ok(Oracle::new(net)?.complete_map(e))
}

#[cfg(test)]
mod tests {
    use super::*;
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

    const EXACT: Criterion = Criterion::Exact { epsilon: 1e-9 };

    #[test]
    fn single_root() {
        let net = Network::new(vec![binary("X", &[])], vec![vec![0.3, 0.7]]).unwrap();
        let e = Evidence::new(Assignment::named(&net, &[("X", "T")]));
        let r = oracle_ib_assignments(&net, &e, EXACT, true).unwrap();
        assert_eq!(r.ranked, vec![(e.assignment().clone(), 0.3)]);
    }

    #[test]
    fn marginals_sum_out() {
        let net = leaky_or();
        let o = Oracle::new(&net).unwrap();
        assert_eq!(o.marginal(&Assignment::for_network(&net)), 1.0);
        let a = Assignment::named(&net, &[("v", "T"), ("u1", "T")]);
        assert!((o.marginal(&a) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn leaky_or_qualifying_set() {
        let net = leaky_or();
        let e = Evidence::new(Assignment::named(&net, &[("v", "T")]));
        let r = oracle_ib_assignments(&net, &e, EXACT, true).unwrap();
        assert!((r.best_probability().unwrap() - 0.45).abs() < 1e-12);
        assert_eq!(r.best().len(), 4);
        let all_false = Assignment::named(&net, &[("v", "T"), ("u1", "F"), ("u2", "F"), ("u3", "F"), ("u4", "F")]);
        assert!(r.ranked.iter().any(|(a, _)| *a == all_false));
        assert!(!r.ranked.iter().any(|(a, _)| *a == *e.assignment()));
    }

    #[test]
    fn delta_one_admits_every_supported_extension() {
        let net = leaky_or();
        let e = Evidence::new(Assignment::named(&net, &[("v", "T")]));
        let o = Oracle::new(&net).unwrap();
        let r = o.ib_assignments(&e, Criterion::Delta { delta: 1.0 }, false);
        let supported = o.extensions(&e).filter(|a| o.supported(a, &e, false)).count();
        assert_eq!(r.ranked.len(), supported);
        assert_eq!(supported, 81);
    }

    #[test]
    fn deterministic_chain_complete_map() {
        let net = Network::new(
            vec![binary("A", &[]), binary("B", &[0]), binary("C", &[1])],
            vec![vec![0.4, 0.6], vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]],
        )
        .unwrap();
        let e = Evidence::new(Assignment::named(&net, &[("A", "T")]));
        let r = oracle_complete_map(&net, &e).unwrap();
        assert_eq!(r.ranked.len(), 1);
        assert_eq!(
            r.ranked[0].0,
            Assignment::named(&net, &[("A", "T"), ("B", "T"), ("C", "F")])
        );
        assert_eq!(r.ranked[0].1, 0.4);
    }

    #[test]
    fn independent_pair_complete_map() {
        let net = Network::new(
            vec![binary("A", &[]), binary("B", &[])],
            vec![vec![0.6, 0.4], vec![0.7, 0.3]],
        )
        .unwrap();
        let r = oracle_complete_map(&net, &Evidence::none(&net)).unwrap();
        let probs: Vec<f64> = r.ranked.iter().map(|(_, p)| *p).collect();
        let expected = [0.42, 0.28, 0.18, 0.12];
        for (p, q) in probs.iter().zip(expected) {
            assert!((p - q).abs() < 1e-15);
        }
    }

    #[test]
    fn budget() {
        let net = leaky_or();
        assert!(matches!(
            Oracle::with_budget(&net, 10),
            Err(OracleError::Budget { required: 243, .. })
        ));
    }
}
