use std::fmt;
use std::ops::Deref;

use super::{Network, VarId};

/// A partial map from variables to value indices.
///
/// Stored densely, one slot per network variable, so equal assignments are
/// equal as values and hash identically. The derived order is the
/// lexicographic order used for tie-breaking (unbound sorts before bound).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    slots: Vec<Option<u32>>,
}

/// Returned by [`Assignment::union_compatible`] when both sides bind the
/// same variable differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict {
    pub variable: VarId,
    pub left: usize,
    pub right: usize,
}

impl Assignment {
    pub fn empty(len: usize) -> Self {
        Self { slots: vec![None; len] }
    }

    pub fn for_network(net: &Network) -> Self {
        Self::empty(net.len())
    }

    pub fn from_pairs<I: IntoIterator<Item = (VarId, usize)>>(len: usize, pairs: I) -> Self {
        let mut a = Self::empty(len);
        for (v, x) in pairs {
            a.bind(v, x);
        }
        a
    }

    /// Builds an assignment from `(variable name, value name)` pairs.
    /// Panics on unknown names; meant for tests and fixtures.
    pub fn named(net: &Network, pairs: &[(&str, &str)]) -> Self {
        let mut a = Self::for_network(net);
        for &(var, value) in pairs {
            let v = net.lookup(var).unwrap_or_else(|| panic!("unknown variable {var}"));
            let x = net
                .variable(v)
                .value_index(value)
                .unwrap_or_else(|| panic!("unknown value {var}={value}"));
            a.bind(v, x);
        }
        a
    }

    /// Number of slots (network size), not the number of bindings.
    pub fn width(&self) -> usize {
        self.slots.len()
    }

    /// Number of bound variables.
    pub fn len(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    #[inline]
    pub fn get(&self, v: VarId) -> Option<usize> {
        self.slots[v.0].map(|x| x as usize)
    }

    #[inline]
    pub fn is_bound(&self, v: VarId) -> bool {
        self.slots[v.0].is_some()
    }

    pub fn bind(&mut self, v: VarId, value: usize) {
        self.slots[v.0] = Some(value as u32);
    }

    pub fn unbind(&mut self, v: VarId) {
        self.slots[v.0] = None;
    }

    pub fn with(&self, v: VarId, value: usize) -> Self {
        let mut a = self.clone();
        a.bind(v, value);
        a
    }

    /// Bound `(variable, value)` pairs in variable-id order.
    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|x| (VarId(i), x as usize)))
    }

    pub fn bound(&self) -> impl Iterator<Item = VarId> + '_ {
        self.iter().map(|(v, _)| v)
    }

    /// `self ⊆ other`: every binding of `self` appears in `other`.
    pub fn subsumes(&self, other: &Assignment) -> bool {
        debug_assert_eq!(self.width(), other.width());
        self.slots.iter().zip(&other.slots).all(|(a, b)| a.is_none() || a == b)
    }

    pub fn union_compatible(&self, other: &Assignment) -> Result<Assignment, Conflict> {
        debug_assert_eq!(self.width(), other.width());
        let mut slots = self.slots.clone();
        for (i, (slot, theirs)) in slots.iter_mut().zip(&other.slots).enumerate() {
            match (*slot, *theirs) {
                (Some(x), Some(y)) if x != y => {
                    return Err(Conflict {
                        variable: VarId(i),
                        left: x as usize,
                        right: y as usize,
                    })
                }
                (None, Some(y)) => *slot = Some(y),
                _ => {}
            }
        }
        Ok(Assignment { slots })
    }

    /// Keeps only the bindings of variables in `keep`.
    pub fn restrict<I: IntoIterator<Item = VarId>>(&self, keep: I) -> Assignment {
        let mut out = Assignment::empty(self.width());
        for v in keep {
            out.slots[v.0] = self.slots[v.0];
        }
        out
    }

    /// `(name, value)` pairs sorted by variable name.
    pub fn named_bindings(&self, net: &Network) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = self
            .iter()
            .map(|(v, x)| (net.name(v).to_owned(), net.variable(v).domain[x].clone()))
            .collect();
        pairs.sort();
        pairs
    }

    pub fn display<'a>(&'a self, net: &'a Network) -> DisplayAssignment<'a> {
        DisplayAssignment { a: self, net }
    }
}

pub struct DisplayAssignment<'a> {
    a: &'a Assignment,
    net: &'a Network,
}

impl fmt::Display for DisplayAssignment<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (name, value)) in self.a.named_bindings(self.net).iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}={value}")?;
        }
        f.write_str("}")
    }
}

/// The observed assignment a solve starts from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Evidence(Assignment);

impl Evidence {
    pub fn new(a: Assignment) -> Self {
        Self(a)
    }

    pub fn none(net: &Network) -> Self {
        Self(Assignment::for_network(net))
    }

    pub fn assignment(&self) -> &Assignment {
        &self.0
    }

    pub fn into_assignment(self) -> Assignment {
        self.0
    }
}

impl Deref for Evidence {
    type Target = Assignment;

    fn deref(&self) -> &Assignment {
        &self.0
    }
}

impl From<Assignment> for Evidence {
    fn from(a: Assignment) -> Self {
        Self(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(pairs: &[(usize, usize)]) -> Assignment {
        Assignment::from_pairs(3, pairs.iter().map(|&(v, x)| (VarId(v), x)))
    }

    #[test]
    fn subsumption_examples() {
        assert!(a(&[]).subsumes(&a(&[(0, 0)])));
        assert!(!a(&[(0, 0)]).subsumes(&a(&[(0, 1)])));
        assert!(a(&[(0, 0)]).subsumes(&a(&[(0, 0), (1, 1)])));
        assert!(!a(&[(0, 0), (1, 1)]).subsumes(&a(&[(0, 0)])));
    }

    #[test]
    fn union_examples() {
        assert_eq!(a(&[(0, 0)]).union_compatible(&a(&[(1, 1)])), Ok(a(&[(0, 0), (1, 1)])));
        assert_eq!(
            a(&[(0, 0)]).union_compatible(&a(&[(0, 0), (2, 1)])),
            Ok(a(&[(0, 0), (2, 1)]))
        );
        let conflict = a(&[(0, 0)]).union_compatible(&a(&[(0, 1)])).unwrap_err();
        assert_eq!(conflict.variable, VarId(0));
    }

    /// Every partial assignment of three binary variables.
    fn all_partials() -> Vec<Assignment> {
        let mut out = Vec::new();
        for code in 0..27usize {
            let mut c = code;
            let mut x = Assignment::empty(3);
            for v in 0..3 {
                match c % 3 {
                    0 => {}
                    k => x.bind(VarId(v), k - 1),
                }
                c /= 3;
            }
            out.push(x);
        }
        out
    }

    #[test]
    fn subsumption_is_a_partial_order() {
        let all = all_partials();
        for x in &all {
            assert!(x.subsumes(x));
            for y in &all {
                if x.subsumes(y) && y.subsumes(x) {
                    assert_eq!(x, y);
                }
                for z in &all {
                    if x.subsumes(y) && y.subsumes(z) {
                        assert!(x.subsumes(z));
                    }
                }
            }
        }
    }

    #[test]
    fn union_is_the_least_upper_bound() {
        let all = all_partials();
        for x in &all {
            for y in &all {
                match x.union_compatible(y) {
                    Ok(u) => {
                        assert!(x.subsumes(&u) && y.subsumes(&u));
                        let shared = x.restrict(y.bound()).len();
                        assert_eq!(u.len(), x.len() + y.len() - shared);
                    }
                    Err(c) => assert_ne!(x.get(c.variable), y.get(c.variable)),
                }
            }
        }
    }
}
