use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Assignment, Evidence, Network, VarId, Variable};

/// Parameters of the random network generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    pub nodes: usize,
    pub max_parents: usize,
    pub domain_size: usize,
    /// Share of nodes whose tables get copied rows, creating exact
    /// independences.
    pub planted: f64,
    pub seed: u64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            nodes: 6,
            max_parents: 3,
            domain_size: 2,
            planted: 0.5,
            seed: 0,
        }
    }
}

fn domain(size: usize) -> Vec<String> {
    if size == 2 {
        vec!["T".into(), "F".into()]
    } else {
        (0..size).map(|i| format!("v{i}")).collect()
    }
}

fn random_row(rng: &mut ChaCha8Rng, card: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Parent tuple of row `r`, last parent fastest.
fn row_tuple(mut r: usize, cards: &[usize]) -> Vec<usize> {
    let mut tuple = vec![0; cards.len()];
    for i in (0..cards.len()).rev() {
        tuple[i] = r % cards[i];
        r /= cards[i];
    }
    tuple
}

fn row_of(tuple: &[usize], cards: &[usize]) -> usize {
    tuple.iter().zip(cards).fold(0, |r, (&x, &c)| r * c + x)
}

/// A random DAG with strictly positive tables, deterministic in the seed.
///
/// Node `i` draws its parents from nodes `0..i`. Rows are normalized
/// uniform draws bounded away from zero. Planting then (a) with probability
/// `planted` per node gives every row with one parent at one value a shared
/// distribution, so that value screens off the other parents, and (b) in
/// `ceil(planted * n)` of the `n` nodes that have parents, copies rows
/// across the values of one parent, so the node ignores it.
pub fn generate_network(opts: &GenerateOptions) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let width = opts.nodes.to_string().len();
    let structure: Vec<Vec<usize>> = (0..opts.nodes)
        .map(|i| {
            let k = rng.gen_range(0..=opts.max_parents.min(i));
            let mut pool: Vec<usize> = (0..i).collect();
            pool.shuffle(&mut rng);
            let mut parents: Vec<usize> = pool.into_iter().take(k).collect();
            parents.sort_unstable();
            parents
        })
        .collect();
    let mut eligible: Vec<usize> = (0..opts.nodes).filter(|&i| !structure[i].is_empty()).collect();
    eligible.shuffle(&mut rng);
    eligible.truncate((opts.planted * eligible.len() as f64).ceil() as usize);

    let mut variables = Vec::with_capacity(opts.nodes);
    let mut tables = Vec::with_capacity(opts.nodes);
    for (i, parents) in structure.into_iter().enumerate() {
        let k = parents.len();
        let card = opts.domain_size;
        let cards = vec![card; k];
        let row_count: usize = cards.iter().product();
        let mut rows: Vec<Option<Vec<f64>>> = vec![None; row_count];
        if k > 0 && rng.gen_bool(opts.planted) {
            let p = rng.gen_range(0..k);
            let x = rng.gen_range(0..cards[p]);
            let shared = random_row(&mut rng, card);
            for (r, row) in rows.iter_mut().enumerate() {
                if row_tuple(r, &cards)[p] == x {
                    *row = Some(shared.clone());
                }
            }
        }
        let mut rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|row| row.unwrap_or_else(|| random_row(&mut rng, card)))
            .collect();
        if eligible.contains(&i) {
            let q = rng.gen_range(0..k);
            for r in 0..row_count {
                let mut tuple = row_tuple(r, &cards);
                if tuple[q] != 0 {
                    tuple[q] = 0;
                    rows[r] = rows[row_of(&tuple, &cards)].clone();
                }
            }
        }

        variables.push(Variable::new(
            format!("n{i:0width$}"),
            domain(card),
            parents.into_iter().map(VarId).collect(),
        ));
        tables.push(rows.concat());
    }
    Network::new(variables, tables).expect("generated networks are valid")
}

/// One or two random observations, seeded independently of the network.
/// Nodes with parents are observed when there are any, since evidence at
/// a root leaves nothing to explain.
pub fn random_evidence(net: &Network, seed: u64) -> Evidence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_e71d_e9ce);
    let mut ids: Vec<VarId> = net.ids().filter(|&v| !net.parents(v).is_empty()).collect();
    if ids.is_empty() {
        ids = net.ids().collect();
    }
    ids.shuffle(&mut rng);
    let count = rng.gen_range(1..=2.min(ids.len()));
    let mut a = Assignment::for_network(net);
    for &v in &ids[..count] {
        a.bind(v, rng.gen_range(0..net.cardinality(v)));
    }
    Evidence::new(a)
}

/// A corpus instance: a generated network with random evidence.
pub fn random_instance(opts: &GenerateOptions) -> (Network, Evidence) {
    let net = generate_network(opts);
    let e = random_evidence(&net, opts.seed);
    (net, e)
}
