mod common;

use ibmap::cli::{generate_network, GenerateOptions};
use ibmap::hypercube::{enumerate_hypercubes, qualifying_hypercubes, HypercubeIndex, Independence};
use ibmap::model::{marginal_probability, Assignment, Evidence, Network, VarId};
use ibmap::oracle::{Criterion, Oracle};
use ibmap::search::{
    heuristic_ib, solve_ib_map, solve_ib_map_observed, tau_expand, trim_to_proper_support, AgendaItem, SearchObserver,
    SolveConfig,
};
use proptest::prelude::*;

const EXACT: Criterion = Criterion::Exact { epsilon: 1e-9 };

fn net_for(seed: u64, nodes: usize, max_parents: usize, domain_size: usize) -> Network {
    generate_network(&GenerateOptions {
        nodes,
        max_parents,
        domain_size,
        planted: 0.7,
        seed,
    })
}

/// Every (pattern, min, max) for one node value, by direct enumeration of
/// the completions of each pattern.
fn brute_force_cubes(
    net: &Network,
    v: VarId,
    value: usize,
    independence: Independence,
) -> Vec<(Vec<Option<usize>>, f64, f64)> {
    let cards: Vec<usize> = net.parents(v).iter().map(|&p| net.cardinality(p)).collect();
    let mut patterns: Vec<Vec<Option<usize>>> = vec![vec![]];
    for &c in &cards {
        patterns = patterns
            .into_iter()
            .flat_map(|p| {
                (0..=c).map(move |x| {
                    let mut q = p.clone();
                    q.push((x < c).then_some(x));
                    q
                })
            })
            .collect();
    }
    let mut rows: Vec<Vec<usize>> = vec![vec![]];
    for &c in &cards {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                (0..c).map(move |x| {
                    let mut s = r.clone();
                    s.push(x);
                    s
                })
            })
            .collect();
    }
    patterns
        .into_iter()
        .filter_map(|pattern| {
            let probs: Vec<f64> = rows
                .iter()
                .filter(|r| pattern.iter().zip(r.iter()).all(|(f, x)| f.is_none_or(|f| f == *x)))
                .map(|r| net.cpt(v).prob(value, r))
                .collect();
            let lo = probs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ok = match independence {
                Independence::Exact { epsilon } => hi - lo <= epsilon,
                Independence::Delta { delta } => lo >= (1.0 - delta) * hi,
            };
            ok.then_some((pattern, lo, hi))
        })
        .collect()
}

fn pattern_subsumes(a: &[Option<usize>], b: &[Option<usize>]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.is_none() || x == y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hypercubes_are_complete_sound_and_maximal(
        seed in any::<u64>(),
        domain_size in 2usize..4,
        delta in prop_oneof![Just(None), (0.0f64..=1.0).prop_map(Some)],
    ) {
        let net = net_for(seed, 6, 5, domain_size);
        let independence = delta.map_or(Independence::exact(1e-9), Independence::delta);
        for v in net.ids() {
            for value in 0..net.cardinality(v) {
                let all = brute_force_cubes(&net, v, value, independence);
                let mut expected: Vec<Vec<Option<usize>>> = all
                    .iter()
                    .filter(|(p, _, _)| !all.iter().any(|(q, _, _)| q != p && pattern_subsumes(q, p)))
                    .map(|(p, _, _)| p.clone())
                    .collect();
                let cubes = enumerate_hypercubes(&net, v, value, independence, 12).unwrap();
                let mut found: Vec<Vec<Option<usize>>> = cubes.iter().map(|h| h.fixed.clone()).collect();
                for h in &cubes {
                    let (_, lo, hi) = all.iter().find(|(p, _, _)| *p == h.fixed).expect("sound");
                    prop_assert_eq!((*lo, *hi), (h.p_min, h.p_max));
                    prop_assert!(0.0 <= h.p_min && h.p_min <= h.p_max && h.p_max <= 1.0);
                }
                for (i, a) in found.iter().enumerate() {
                    for b in &found[i + 1..] {
                        prop_assert!(!pattern_subsumes(a, b) && !pattern_subsumes(b, a));
                    }
                }
                let counts: Vec<usize> = cubes.iter().map(|h| h.fixed_count()).collect();
                prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
                expected.sort();
                found.sort();
                prop_assert_eq!(found, expected);
            }
        }
    }

    #[test]
    fn qualifying_sets_grow_with_delta(seed in any::<u64>(), d1 in 0.0f64..=1.0, d2 in 0.0f64..=1.0) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let net = net_for(seed, 5, 4, 2);
        for v in net.ids() {
            for value in 0..2 {
                let small = qualifying_hypercubes(&net, v, value, Independence::delta(lo));
                let large = qualifying_hypercubes(&net, v, value, Independence::delta(hi));
                for h in &small {
                    prop_assert!(large.iter().any(|g| g.fixed == h.fixed));
                }
            }
        }
    }

    #[test]
    fn marginals_are_monotone_and_normalized(seed in any::<u64>()) {
        let net = net_for(seed, 4, 3, 2);
        let oracle = Oracle::new(&net).unwrap();
        let all: Vec<Assignment> = oracle.extensions(&Evidence::none(&net)).collect();
        let mut total = 0.0;
        for a in &all {
            let p = marginal_probability(&net, a).unwrap();
            if a.is_complete() {
                let product: f64 = net.ids().map(|v| net.entry(v, a).unwrap()).product();
                prop_assert_eq!(p, product);
                total += p;
            }
            for b in &all {
                if a.subsumes(b) {
                    prop_assert!(p >= marginal_probability(&net, b).unwrap() - 1e-15);
                }
            }
        }
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }
}

struct Admissibility<'a, 'n> {
    index: &'a HypercubeIndex<'n>,
    checked: usize,
}

impl SearchObserver for Admissibility<'_, '_> {
    fn expanded(&mut self, item: &AgendaItem) {
        let net = self.index.network();
        assert_eq!(item.h_value, heuristic_ib(net, self.index, &item.assignment));
        for child in tau_expand(net, self.index, item) {
            self.checked += 1;
            assert!(child.h_value <= item.h_value, "child above parent");
        }
    }
}

#[test]
fn expansion_never_raises_the_heuristic() {
    let mut checked = 0;
    for (_, net, e) in common::corpus() {
        let index = HypercubeIndex::new(&net, Independence::exact(1e-9)).unwrap();
        let mut observer = Admissibility {
            index: &index,
            checked: 0,
        };
        let config = SolveConfig::default().with_top_k(None);
        let report = solve_ib_map_observed(&net, &e, &config, &mut observer).unwrap();
        checked += observer.checked;
        for s in &report.solutions {
            let p = s.probability.unwrap();
            let exact = marginal_probability(&net, &s.assignment).unwrap();
            assert!((p - exact).abs() <= 1e-9);
        }
    }
    assert!(checked > 0);
}

#[test]
fn trimming_restores_proper_support() {
    let mut trimmed = 0;
    for (_, net, e) in common::corpus() {
        let oracle = Oracle::new(&net).unwrap();
        let index = HypercubeIndex::new(&net, Independence::exact(1e-9)).unwrap();
        for a in oracle.extensions(&e) {
            if !oracle.is_independence_based(&a, EXACT) {
                continue;
            }
            let t = trim_to_proper_support(&net, &a, &e);
            assert!(t.subsumes(&a));
            assert!(e.subsumes(&t));
            assert!(oracle.supported(&t, &e, true), "{}", t.display(&net));
            assert!(oracle.is_independence_based(&t, EXACT));
            assert!(index.is_terminated(&t));
            if oracle.supported(&a, &e, true) {
                assert_eq!(t, a);
            } else {
                trimmed += 1;
            }
        }
    }
    assert!(trimmed > 0);
}

#[test]
fn first_solution_is_not_shadowed() {
    for (i, net, e) in common::corpus() {
        let report = solve_ib_map(&net, &e, &SolveConfig::default()).unwrap();
        let first = &report.solutions[0];
        let p = first.probability.unwrap();
        let others = Oracle::new(&net).unwrap().ib_assignments(&e, EXACT, true);
        for (b, q) in &others.ranked {
            assert!(
                !(*b != first.assignment && b.subsumes(&first.assignment) && (q - p).abs() <= 1e-12),
                "instance {i}: first solution shadowed by {}",
                b.display(&net)
            );
        }
    }
}

#[test]
fn topological_order_is_stable() {
    for seed in 0..50 {
        let net = net_for(seed, 8, 3, 2);
        let order = net.topological_order().to_vec();
        assert_eq!(order, net_for(seed, 8, 3, 2).topological_order());
        for (i, &v) in order.iter().enumerate() {
            for &p in net.parents(v) {
                assert!(order[i + 1..].contains(&p));
            }
        }
    }
}
