#![allow(dead_code)]

use std::path::PathBuf;

use ibmap::cli::{random_instance, GenerateOptions};
use ibmap::model::{Evidence, Network};
use ibmap::parser::{parse_evidence, parse_network};

pub const CORPUS_SIZE: u64 = 200;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
        .join(name)
}

pub fn load(net: &str, ev: &str) -> (Network, Evidence) {
    let net = parse_network(&std::fs::read_to_string(data(net)).unwrap()).unwrap();
    let e = parse_evidence(&std::fs::read_to_string(data(ev)).unwrap(), &net).unwrap();
    (net, e)
}

/// Instance `i` of the seeded corpus: 3 to 7 binary nodes, planted
/// independence, strictly positive tables.
pub fn instance(i: u64) -> (Network, Evidence) {
    random_instance(&GenerateOptions {
        nodes: 3 + (i % 5) as usize,
        max_parents: 3,
        domain_size: 2,
        planted: 0.5,
        seed: i,
    })
}

pub fn corpus() -> impl Iterator<Item = (u64, Network, Evidence)> {
    (0..CORPUS_SIZE).map(|i| {
        let (net, e) = instance(i);
        (i, net, e)
    })
}
