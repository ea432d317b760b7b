use crate::hypercube::HypercubeIndex;
use crate::model::{Assignment, Network, VarId};

use super::Bounds;

/// `(min, max)` of the conditional probability of a bound node's value over
/// its unbound parents, when the node counts toward the product: all of its
/// parents are bound, or the independence condition holds at it. Roots
/// always count.
pub(crate) fn covered_range(net: &Network, index: &HypercubeIndex<'_>, a: &Assignment, v: VarId) -> Option<(f64, f64)> {
    let value = a.get(v)?;
    let binding = net.parent_binding(v, a);
    if binding.iter().all(Option::is_some) {
        let p = net.entry(v, a).expect("all parents bound");
        return Some((p, p));
    }
    index.ib_holds_at(a, v).then(|| net.cpt(v).range(value, &binding))
}

/// Product of `P(a[v] | parents)` over bound nodes whose parents are all
/// bound. Nodes with unbound parents contribute one.
pub fn heuristic_complete(net: &Network, a: &Assignment) -> f64 {
    a.bound().filter_map(|v| net.entry(v, a)).product()
}

/// Optimistic prior of `a`: the complete-mode product extended with every
/// node at which the independence condition holds, each contributing the
/// largest conditional probability over its unbound parents. Exact for
/// terminated assignments.
pub fn heuristic_ib(net: &Network, index: &HypercubeIndex<'_>, a: &Assignment) -> f64 {
    a.bound()
        .filter_map(|v| covered_range(net, index, a, v))
        .map(|(_, hi)| hi)
        .product()
}

/// Lower and upper bounds on `P(a)` from the per-node conditional ranges.
///
/// Covered nodes contribute their range; nodes not yet covered contribute
/// one to the upper bound (matching [`heuristic_ib`]) and their range
/// minimum to the lower bound. Both bounds hold for any assignment.
pub fn bounds_delta(net: &Network, index: &HypercubeIndex<'_>, a: &Assignment) -> Bounds {
    let mut lower = 1.0;
    let mut upper = 1.0;
    for v in a.bound() {
        match covered_range(net, index, a, v) {
            Some((lo, hi)) => {
                lower *= lo;
                upper *= hi;
            }
            None => {
                let value = a.get(v).unwrap();
                let (lo, _) = net.cpt(v).range(value, &net.parent_binding(v, a));
                lower *= lo;
            }
        }
    }
    Bounds { lower, upper }
}
