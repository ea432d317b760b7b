//! Independence hypercubes.
//!
//! A hypercube based on node `w` binds `w` and a subset `X` of its parents.
//! It qualifies when `P(w = value | X, rest of the parents)` is constant
//! (within `epsilon`) or delta-constant (`min >= (1 - delta) * max`) over
//! every completion of the parents outside `X`. Only subsumption-maximal
//! qualifiers, the ones that fix the fewest parents, are kept.
//!
//! Qualification is monotone: every sub-cube of a qualifying cube also
//! qualifies, because its range is contained in the larger one. A
//! qualifying cube is therefore maximal exactly when freeing any single one
//! of its fixed parents breaks qualification.

use std::sync::OnceLock;

use thiserror::Error;

use crate::model::{Assignment, Network, VarId};

pub const DEFAULT_PARENT_CAP: usize = 12;
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypercubeError {
    #[error("node `{node}` has {parents} parents, more than the cap of {cap}")]
    ParentCap { node: String, parents: usize, cap: usize },
    #[error("epsilon must be finite and non-negative, got {0}")]
    Epsilon(f64),
    #[error("delta must lie in [0, 1], got {0}")]
    Delta(f64),
}

/// Qualifier applied to the (min, max) range of a candidate cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Independence {
    Exact { epsilon: f64 },
    Delta { delta: f64 },
}

impl Independence {
    pub fn exact(epsilon: f64) -> Self {
        Independence::Exact { epsilon }
    }

    pub fn delta(delta: f64) -> Self {
        Independence::Delta { delta }
    }

    pub fn validate(self) -> Result<Self, HypercubeError> {
        match self {
            Independence::Exact { epsilon } if !(epsilon.is_finite() && epsilon >= 0.0) => {
                Err(HypercubeError::Epsilon(epsilon))
            }
            Independence::Delta { delta } if !(0.0..=1.0).contains(&delta) => Err(HypercubeError::Delta(delta)),
            ok => Ok(ok),
        }
    }

    #[inline]
    pub fn admits(self, lo: f64, hi: f64) -> bool {
        match self {
            Independence::Exact { epsilon } => hi - lo <= epsilon,
            Independence::Delta { delta } => lo >= (1.0 - delta) * hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypercube {
    pub node: VarId,
    pub node_value: usize,
    /// One slot per parent, in parent order; `None` means unfixed.
    pub fixed: Vec<Option<usize>>,
    pub p_min: f64,
    pub p_max: f64,
}

impl Hypercube {
    pub fn fixed_count(&self) -> usize {
        self.fixed.iter().filter(|f| f.is_some()).count()
    }

    /// Whether a parent binding (in parent order) lies inside this cube,
    /// i.e. the cube's fixed parents subsume the binding.
    pub fn covers(&self, binding: &[Option<usize>]) -> bool {
        self.fixed.iter().zip(binding).all(|(f, b)| f.is_none() || f == b)
    }

    /// The fixed parents as an assignment over the whole network.
    pub fn fixed_parents(&self, net: &Network) -> Assignment {
        let parents = net.parents(self.node);
        Assignment::from_pairs(
            net.len(),
            self.fixed.iter().zip(parents).filter_map(|(f, &p)| f.map(|x| (p, x))),
        )
    }

    /// Node binding plus fixed parents.
    pub fn to_assignment(&self, net: &Network) -> Assignment {
        self.fixed_parents(net).with(self.node, self.node_value)
    }

    fn order_key(&self) -> (usize, Vec<(usize, usize)>) {
        let bound = self
            .fixed
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.map(|x| (i, x)))
            .collect();
        (self.fixed_count(), bound)
    }
}

/// Range table over every "fixed or free" parent pattern of one node value.
/// Slot `card` of a parent's digit means the parent is free.
struct RangeTable {
    cards: Vec<usize>,
    strides: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl RangeTable {
    fn build(net: &Network, node: VarId, value: usize) -> Self {
        let cpt = net.cpt(node);
        let cards = cpt.parent_cards().to_vec();
        let k = cards.len();
        let mut strides = vec![1; k];
        for j in (0..k.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * (cards[j + 1] + 1);
        }
        let total: usize = cards.iter().map(|c| c + 1).product();
        let mut table = Self {
            cards,
            strides,
            lo: vec![f64::NAN; total],
            hi: vec![f64::NAN; total],
        };
        let mut digits = vec![0; k];
        for code in 0..total {
            table.decode(code, &mut digits);
            if digits.iter().zip(&table.cards).all(|(d, c)| d < c) {
                let p = cpt.prob(value, &digits);
                table.lo[code] = p;
                table.hi[code] = p;
            }
        }
        // After pass j, every pattern whose free parents are among 0..=j is filled.
        for j in 0..k {
            let card = table.cards[j];
            for code in 0..total {
                table.decode(code, &mut digits);
                if digits[j] != card || digits[j + 1..].iter().zip(&table.cards[j + 1..]).any(|(d, c)| d == c) {
                    continue;
                }
                let base = code - card * table.strides[j];
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for x in 0..card {
                    let child = base + x * table.strides[j];
                    lo = lo.min(table.lo[child]);
                    hi = hi.max(table.hi[child]);
                }
                table.lo[code] = lo;
                table.hi[code] = hi;
            }
        }
        table
    }

    fn len(&self) -> usize {
        self.lo.len()
    }

    fn decode(&self, mut code: usize, digits: &mut [usize]) {
        for (j, d) in digits.iter_mut().enumerate() {
            *d = code / self.strides[j];
            code %= self.strides[j];
        }
    }

    fn pattern(&self, code: usize) -> Vec<Option<usize>> {
        let mut digits = vec![0; self.cards.len()];
        self.decode(code, &mut digits);
        digits
            .iter()
            .zip(&self.cards)
            .map(|(&d, &c)| (d < c).then_some(d))
            .collect()
    }
}

fn check_cap(net: &Network, node: VarId, cap: usize) -> Result<(), HypercubeError> {
    let parents = net.parents(node).len();
    if parents > cap {
        return Err(HypercubeError::ParentCap {
            node: net.name(node).to_owned(),
            parents,
            cap,
        });
    }
    Ok(())
}

fn sort_cubes(cubes: &mut [Hypercube]) {
    cubes.sort_by_cached_key(Hypercube::order_key);
}

/// Every qualifying cube for `(node, value)`, maximal or not.
pub fn qualifying_hypercubes(net: &Network, node: VarId, value: usize, independence: Independence) -> Vec<Hypercube> {
    let table = RangeTable::build(net, node, value);
    let mut cubes: Vec<Hypercube> = (0..table.len())
        .filter(|&code| independence.admits(table.lo[code], table.hi[code]))
        .map(|code| Hypercube {
            node,
            node_value: value,
            fixed: table.pattern(code),
            p_min: table.lo[code],
            p_max: table.hi[code],
        })
        .collect();
    sort_cubes(&mut cubes);
    cubes
}

fn maximal_hypercubes(net: &Network, node: VarId, value: usize, independence: Independence) -> Vec<Hypercube> {
    let table = RangeTable::build(net, node, value);
    let mut digits = vec![0; table.cards.len()];
    let mut cubes = Vec::new();
    for code in 0..table.len() {
        if !independence.admits(table.lo[code], table.hi[code]) {
            continue;
        }
        table.decode(code, &mut digits);
        let widenable = (0..digits.len()).any(|j| {
            let card = table.cards[j];
            if digits[j] == card {
                return false;
            }
            let wider = code + (card - digits[j]) * table.strides[j];
            independence.admits(table.lo[wider], table.hi[wider])
        });
        if !widenable {
            cubes.push(Hypercube {
                node,
                node_value: value,
                fixed: table.pattern(code),
                p_min: table.lo[code],
                p_max: table.hi[code],
            });
        }
    }
    sort_cubes(&mut cubes);
    cubes
}

/// Maximal cubes whose probability is constant within `epsilon`.
pub fn enumerate_ib_hypercubes(
    net: &Network,
    node: VarId,
    value: usize,
    epsilon: f64,
) -> Result<Vec<Hypercube>, HypercubeError> {
    enumerate_hypercubes(net, node, value, Independence::exact(epsilon), DEFAULT_PARENT_CAP)
}

/// Maximal cubes satisfying `p_min >= (1 - delta) * p_max`.
pub fn enumerate_delta_hypercubes(
    net: &Network,
    node: VarId,
    value: usize,
    delta: f64,
) -> Result<Vec<Hypercube>, HypercubeError> {
    enumerate_hypercubes(net, node, value, Independence::delta(delta), DEFAULT_PARENT_CAP)
}

pub fn enumerate_hypercubes(
    net: &Network,
    node: VarId,
    value: usize,
    independence: Independence,
    parent_cap: usize,
) -> Result<Vec<Hypercube>, HypercubeError> {
    let independence = independence.validate()?;
    check_cap(net, node, parent_cap)?;
    Ok(maximal_hypercubes(net, node, value, independence))
}

/// Lazily filled per-node cache of maximal hypercubes.
///
/// Each node's cubes are computed on first use. Concurrent first use is
/// safe: the fill is idempotent and guarded by a `OnceLock`.
pub struct HypercubeIndex<'n> {
    net: &'n Network,
    independence: Independence,
    nodes: Vec<OnceLock<Vec<Vec<Hypercube>>>>,
}

impl<'n> HypercubeIndex<'n> {
    pub fn new(net: &'n Network, independence: Independence) -> Result<Self, HypercubeError> {
        Self::with_parent_cap(net, independence, DEFAULT_PARENT_CAP)
    }

    pub fn with_parent_cap(
        net: &'n Network,
        independence: Independence,
        parent_cap: usize,
    ) -> Result<Self, HypercubeError> {
        let independence = independence.validate()?;
        for v in net.ids() {
            check_cap(net, v, parent_cap)?;
        }
        Ok(Self {
            net,
            independence,
            nodes: (0..net.len()).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn network(&self) -> &'n Network {
        self.net
    }

    pub fn independence(&self) -> Independence {
        self.independence
    }

    /// Maximal cubes for `(node, value)`, in size-then-lexicographic order.
    pub fn cubes(&self, node: VarId, value: usize) -> &[Hypercube] {
        &self.node_cubes(node)[value]
    }

    fn node_cubes(&self, node: VarId) -> &[Vec<Hypercube>] {
        self.nodes[node.0].get_or_init(|| {
            (0..self.net.cardinality(node))
                .map(|x| maximal_hypercubes(self.net, node, x, self.independence))
                .collect()
        })
    }

    /// Whether the independence condition holds at a bound `node`: it has
    /// no parents, all of its parents are bound, or some maximal cube is
    /// subsumed by the assignment's restriction to the node and its parents.
    pub fn ib_holds_at(&self, a: &Assignment, node: VarId) -> bool {
        let Some(value) = a.get(node) else {
            return false;
        };
        let parents = self.net.parents(node);
        if parents.iter().all(|&p| a.is_bound(p)) {
            return true;
        }
        let binding = self.net.parent_binding(node, a);
        self.cubes(node, value).iter().any(|h| h.covers(&binding))
    }

    /// Whether the condition holds at every bound node.
    pub fn is_terminated(&self, a: &Assignment) -> bool {
        a.bound().all(|v| self.ib_holds_at(a, v))
    }

    /// Forces computation for every node.
    pub fn precompute(&self) {
        for v in self.net.ids() {
            self.node_cubes(v);
        }
    }
}
