use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use super::{Assignment, ModelError};

/// Tolerance on CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Index of a variable in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub domain: Vec<String>,
    /// Fixes the row layout of the CPT.
    pub parents: Vec<VarId>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: S, domain: Vec<String>, parents: Vec<VarId>) -> Self {
        Self {
            name: name.into(),
            domain,
            parents,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.domain.len()
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

/// Dense conditional probability table.
///
/// Rows are laid out row-major over the parent tuple in parent order, with
/// the last parent varying fastest. Within a row, entries follow the
/// variable's value order.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    cardinality: usize,
    parent_cards: Vec<usize>,
    table: Vec<f64>,
}

impl Cpt {
    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn row_count(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.table[row * self.cardinality..(row + 1) * self.cardinality]
    }

    /// Row index of a complete parent tuple.
    pub fn row_index(&self, parent_values: &[usize]) -> usize {
        debug_assert_eq!(parent_values.len(), self.parent_cards.len());
        parent_values
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&v, &card)| acc * card + v)
    }

    /// Inverse of [`Cpt::row_index`].
    pub fn row_tuple(&self, mut row: usize) -> Vec<usize> {
        let mut tuple = vec![0; self.parent_cards.len()];
        for (slot, &card) in tuple.iter_mut().zip(&self.parent_cards).rev() {
            *slot = row % card;
            row /= card;
        }
        tuple
    }

    pub fn prob(&self, value: usize, parent_values: &[usize]) -> f64 {
        self.table[self.row_index(parent_values) * self.cardinality + value]
    }

    /// Minimum and maximum of `P(value | parents)` over every completion of
    /// the parents left as `None` in `partial`.
    pub fn range(&self, value: usize, partial: &[Option<usize>]) -> (f64, f64) {
        debug_assert_eq!(partial.len(), self.parent_cards.len());
        let free: Vec<usize> = (0..partial.len()).filter(|&i| partial[i].is_none()).collect();
        let mut tuple: Vec<usize> = partial.iter().map(|p| p.unwrap_or(0)).collect();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        loop {
            let p = self.prob(value, &tuple);
            lo = lo.min(p);
            hi = hi.max(p);
            // odometer over the free parents
            let mut carried = true;
            for &i in free.iter().rev() {
                tuple[i] += 1;
                if tuple[i] < self.parent_cards[i] {
                    carried = false;
                    break;
                }
                tuple[i] = 0;
            }
            if carried {
                break;
            }
        }
        (lo, hi)
    }
}

/// A discrete belief network. Immutable once built.
#[derive(Debug, Clone)]
pub struct Network {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    children: Vec<Vec<VarId>>,
    order: Vec<VarId>,
    rank: Vec<usize>,
    by_name: HashMap<String, VarId>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.cpts == other.cpts
    }
}

impl Network {
    /// Builds and validates a network. `tables[i]` is the flattened CPT of
    /// `variables[i]` in the dense layout described on [`Cpt`].
    pub fn new(variables: Vec<Variable>, tables: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if variables.len() != tables.len() {
            return Err(ModelError::TableCount {
                variables: variables.len(),
                tables: tables.len(),
            });
        }
        let mut by_name = HashMap::with_capacity(variables.len());
        for (i, var) in variables.iter().enumerate() {
            if by_name.insert(var.name.clone(), VarId(i)).is_some() {
                return Err(ModelError::DuplicateVariable(var.name.clone()));
            }
            if var.domain.len() < 2 {
                return Err(ModelError::DomainTooSmall(var.name.clone()));
            }
            let mut seen = HashSet::new();
            for value in &var.domain {
                if !seen.insert(value.as_str()) {
                    return Err(ModelError::DuplicateValue {
                        variable: var.name.clone(),
                        value: value.clone(),
                    });
                }
            }
        }
        let mut children = vec![Vec::new(); variables.len()];
        for (i, var) in variables.iter().enumerate() {
            let mut seen = HashSet::new();
            for &p in &var.parents {
                if p.0 >= variables.len() {
                    return Err(ModelError::UnknownParent {
                        variable: var.name.clone(),
                        parent: p.0,
                    });
                }
                if !seen.insert(p) {
                    return Err(ModelError::DuplicateParent {
                        variable: var.name.clone(),
                        parent: variables[p.0].name.clone(),
                    });
                }
                children[p.0].push(VarId(i));
            }
        }

        let mut cpts = Vec::with_capacity(variables.len());
        for (var, table) in variables.iter().zip(tables) {
            let parent_cards: Vec<usize> = var.parents.iter().map(|p| variables[p.0].cardinality()).collect();
            let cpt = Cpt {
                cardinality: var.cardinality(),
                parent_cards,
                table,
            };
            let expected = cpt.row_count() * cpt.cardinality;
            if cpt.table.len() != expected {
                return Err(ModelError::TableSize {
                    variable: var.name.clone(),
                    expected,
                    found: cpt.table.len(),
                });
            }
            for row in 0..cpt.row_count() {
                let entries = cpt.row(row);
                if let Some(&bad) = entries.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                    return Err(ModelError::ProbabilityRange {
                        variable: var.name.clone(),
                        row,
                        value: bad,
                    });
                }
                let sum: f64 = entries.iter().sum();
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(ModelError::RowSum {
                        variable: var.name.clone(),
                        row,
                        sum,
                    });
                }
            }
            cpts.push(cpt);
        }

        let order = descendants_first(&variables, &children)?;
        let mut rank = vec![0; variables.len()];
        for (pos, v) in order.iter().enumerate() {
            rank[v.0] = pos;
        }
        Ok(Self {
            variables,
            cpts,
            children,
            order,
            rank,
            by_name,
        })
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.variables.len()).map(VarId)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.variables[v.0].name
    }

    pub fn cardinality(&self, v: VarId) -> usize {
        self.variables[v.0].cardinality()
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn parents(&self, v: VarId) -> &[VarId] {
        &self.variables[v.0].parents
    }

    pub fn children(&self, v: VarId) -> &[VarId] {
        &self.children[v.0]
    }

    pub fn cpt(&self, v: VarId) -> &Cpt {
        &self.cpts[v.0]
    }

    /// Descendants-first total order, ties broken by ascending name.
    pub fn topological_order(&self) -> &[VarId] {
        &self.order
    }

    /// Position of `v` in [`Network::topological_order`].
    pub fn index(&self, v: VarId) -> usize {
        self.rank[v.0]
    }

    /// The values `a` binds for the parents of `v`, in parent order.
    pub fn parent_binding(&self, v: VarId, a: &Assignment) -> Vec<Option<usize>> {
        self.parents(v).iter().map(|&p| a.get(p)).collect()
    }

    /// `P(a[v] | parents)` when `v` and all of its parents are bound.
    pub fn entry(&self, v: VarId, a: &Assignment) -> Option<f64> {
        let value = a.get(v)?;
        let tuple: Option<Vec<usize>> = self.parents(v).iter().map(|&p| a.get(p)).collect();
        Some(self.cpt(v).prob(value, &tuple?))
    }

    /// Non-reflexive transitive closure of the parent relation.
    pub fn ancestors(&self, v: VarId) -> BTreeSet<VarId> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<VarId> = self.parents(v).to_vec();
        while let Some(u) = stack.pop() {
            if seen.insert(u) {
                stack.extend_from_slice(self.parents(u));
            }
        }
        seen
    }

    /// The product of all CPT entries of a complete assignment.
    pub fn joint(&self, a: &Assignment) -> f64 {
        self.ids()
            .map(|v| self.entry(v, a).expect("joint requires a complete assignment"))
            .product()
    }
}

/// Kahn's algorithm run from the sinks upward, always releasing the
/// smallest available name.
fn descendants_first(variables: &[Variable], children: &[Vec<VarId>]) -> Result<Vec<VarId>, ModelError> {
    let n = variables.len();
    let mut pending: Vec<usize> = children.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<(&str, usize)> = (0..n)
        .filter(|&i| pending[i] == 0)
        .map(|i| (variables[i].name.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&(name, i)) = ready.iter().next() {
        ready.remove(&(name, i));
        order.push(VarId(i));
        for &p in &variables[i].parents {
            pending[p.0] -= 1;
            if pending[p.0] == 0 {
                ready.insert((variables[p.0].name.as_str(), p.0));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every unplaced node still has an unplaced child; walk children until a
    // node repeats to name one edge on a cycle.
    let placed: HashSet<usize> = order.iter().map(|v| v.0).collect();
    let start = (0..n).find(|i| !placed.contains(i)).expect("unplaced node");
    let mut visited = HashMap::new();
    let mut current = start;
    let mut step = 0usize;
    loop {
        visited.insert(current, step);
        let next = children[current]
            .iter()
            .find(|c| !placed.contains(&c.0))
            .expect("unplaced node without unplaced child")
            .0;
        if visited.contains_key(&next) {
            return Err(ModelError::Cycle {
                from: variables[current].name.clone(),
                to: variables[next].name.clone(),
            });
        }
        current = next;
        step += 1;
    }
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

    fn uniform_table(rows: usize) -> Vec<f64> {
        vec![0.5; rows * 2]
    }

    fn names(net: &Network) -> Vec<&str> {
        net.topological_order().iter().map(|&v| net.name(v)).collect()
    }

    #[test]
    fn chain_orders_descendants_first() {
        let net = Network::new(
            vec![binary("A", &[]), binary("B", &[0]), binary("C", &[1])],
            vec![uniform_table(1), uniform_table(2), uniform_table(2)],
        )
        .unwrap();
        assert_eq!(names(&net), ["C", "B", "A"]);
        assert_eq!(net.index(VarId(2)), 0);
    }

    #[test]
    fn diamond_breaks_ties_by_name() {
        // A->B, A->C, B->D, C->D, declared out of name order
        let net = Network::new(
            vec![
                binary("D", &[2, 1]),
                binary("C", &[3]),
                binary("B", &[3]),
                binary("A", &[]),
            ],
            vec![uniform_table(4), uniform_table(2), uniform_table(2), uniform_table(1)],
        )
        .unwrap();
        assert_eq!(names(&net), ["D", "B", "C", "A"]);
    }

    #[test]
    fn leaky_or_topology_puts_child_first() {
        let mut vars: Vec<Variable> = (1..=4).map(|i| binary(&format!("u{i}"), &[])).collect();
        vars.insert(0, binary("v", &[1, 2, 3, 4]));
        let mut tables = vec![uniform_table(16)];
        tables.extend((0..4).map(|_| uniform_table(1)));
        let net = Network::new(vars, tables).unwrap();
        assert_eq!(names(&net), ["v", "u1", "u2", "u3", "u4"]);
    }

    #[test]
    fn cycle_is_reported_with_an_edge() {
        let err = Network::new(
            vec![binary("A", &[1]), binary("B", &[0])],
            vec![uniform_table(2), uniform_table(2)],
        )
        .unwrap_err();
        match err {
            ModelError::Cycle { from, to } => {
                assert!(matches!((from.as_str(), to.as_str()), ("A", "B") | ("B", "A")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_rows() {
        let err = Network::new(vec![binary("X", &[])], vec![vec![0.3, 0.6]]).unwrap_err();
        assert!(matches!(err, ModelError::RowSum { row: 0, .. }));
        let err = Network::new(vec![binary("X", &[])], vec![vec![1.5, -0.5]]).unwrap_err();
        assert!(matches!(err, ModelError::ProbabilityRange { .. }));
        let err = Network::new(vec![binary("X", &[])], vec![vec![0.5, 0.5, 0.0]]).unwrap_err();
        assert!(matches!(
            err,
            ModelError::TableSize {
                expected: 2,
                found: 3,
                ..
            }
        ));
    }

    #[test]
    fn rejects_singleton_domain() {
        let var = Variable::new("X", vec!["only".into()], vec![]);
        let err = Network::new(vec![var], vec![vec![1.0]]).unwrap_err();
        assert!(matches!(err, ModelError::DomainTooSmall(_)));
    }

    #[test]
    fn row_layout_has_last_parent_fastest() {
        let var = Variable::new("X", vec!["a".into(), "b".into()], vec![]);
        let three = Variable::new("Y", vec!["0".into(), "1".into(), "2".into()], vec![]);
        let child = binary("Z", &[0, 1]);
        let mut z = Vec::new();
        for row in 0..6 {
            let p = row as f64 / 10.0;
            z.extend([p, 1.0 - p]);
        }
        let net = Network::new(vec![var, three, child], vec![vec![0.5, 0.5], vec![0.2, 0.3, 0.5], z]).unwrap();
        let cpt = net.cpt(VarId(2));
        assert_eq!(cpt.row_index(&[1, 0]), 3);
        assert_eq!(cpt.row_tuple(5), vec![1, 2]);
        assert!((cpt.prob(0, &[0, 2]) - 0.2).abs() < 1e-15);
        assert_eq!(cpt.range(0, &[Some(1), None]), (0.3, 0.5));
        assert_eq!(cpt.range(0, &[None, None]), (0.0, 0.5));
    }
}
