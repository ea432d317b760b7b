use crate::model::{Assignment, Evidence, Network, VarId};

/// Drops bound nodes until the assignment is properly evidentially
/// supported by `e`.
///
/// First every bound node that is not an ancestor of (or equal to) an
/// evidence node goes, then every node with no path to evidence through
/// bound nodes. Removals run descendants first, so a removed node never has
/// a bound child left behind and the independence condition at the
/// remaining nodes is untouched.
pub fn trim_to_proper_support(net: &Network, a: &Assignment, e: &Evidence) -> Assignment {
    let evidence: Vec<VarId> = e.bound().collect();

    let mut ancestral = vec![false; net.len()];
    let mut stack = evidence.clone();
    for &v in &stack {
        ancestral[v.0] = true;
    }
    while let Some(u) = stack.pop() {
        for &p in net.parents(u) {
            if !ancestral[p.0] {
                ancestral[p.0] = true;
                stack.push(p);
            }
        }
    }
    let mut out = a.clone();
    for &v in net.topological_order() {
        if out.is_bound(v) && !ancestral[v.0] {
            out.unbind(v);
        }
    }

    let mut supported = vec![false; net.len()];
    let mut stack = evidence;
    for &v in &stack {
        supported[v.0] = true;
    }
    while let Some(u) = stack.pop() {
        for &p in net.parents(u) {
            if out.is_bound(p) && !supported[p.0] {
                supported[p.0] = true;
                stack.push(p);
            }
        }
    }
    for &v in net.topological_order() {
        if out.is_bound(v) && !supported[v.0] {
            out.unbind(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evidential_support, Variable};

    fn chain() -> Network {
        let var = |name: &str, parents: Vec<VarId>| Variable::new(name, vec!["T".into(), "F".into()], parents);
        Network::new(
            vec![var("A", vec![]), var("B", vec![VarId(0)]), var("E", vec![VarId(1)])],
            vec![vec![0.2, 0.8], vec![0.7, 0.3, 0.4, 0.6], vec![0.9, 0.1, 0.5, 0.5]],
        )
        .unwrap()
    }

    #[test]
    fn supported_input_is_a_fixed_point() {
        let net = chain();
        let e = Evidence::new(Assignment::named(&net, &[("E", "T")]));
        let a = Assignment::named(&net, &[("E", "T"), ("B", "F"), ("A", "T")]);
        assert_eq!(trim_to_proper_support(&net, &a, &e), a);
    }

    #[test]
    fn gap_drops_the_stranded_ancestor() {
        let net = chain();
        let e = Evidence::new(Assignment::named(&net, &[("E", "T")]));
        let a = Assignment::named(&net, &[("E", "T"), ("A", "T")]);
        let trimmed = trim_to_proper_support(&net, &a, &e);
        assert_eq!(trimmed, *e.assignment());
        assert!(evidential_support(&net, &trimmed, &e, true));
    }

    #[test]
    fn drops_nodes_below_evidence() {
        let net = chain();
        let e = Evidence::new(Assignment::named(&net, &[("B", "T")]));
        let a = Assignment::named(&net, &[("E", "T"), ("B", "T"), ("A", "F")]);
        assert_eq!(
            trim_to_proper_support(&net, &a, &e),
            Assignment::named(&net, &[("B", "T"), ("A", "F")])
        );
    }
}
