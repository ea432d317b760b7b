use serde::Serialize;

use crate::hypercube::HypercubeIndex;
use crate::model::{Assignment, Network};
use crate::search::{Mode, SolveReport};

#[derive(Serialize)]
struct ReportJson<'a> {
    mode: Mode,
    solutions: Vec<SolutionJson>,
    statistics: StatisticsJson<'a>,
}

#[derive(Serialize)]
struct SolutionJson {
    rank: usize,
    bindings: Vec<(String, String)>,
    probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<BoundsJson>,
}

#[derive(Serialize)]
struct BoundsJson {
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct StatisticsJson<'a> {
    mode: &'a Mode,
    expanded: u64,
    enqueued: u64,
    peak_agenda: usize,
    filtered: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidates: Option<usize>,
    delta: Option<f64>,
    epsilon: f64,
    top_k: Option<usize>,
    threshold: f64,
    maximality_filter: bool,
}

fn bindings(net: &Network, a: &Assignment) -> Vec<(String, String)> {
    a.named_bindings(net)
}

/// Renders a report as pretty-printed JSON.
///
/// Solutions keep the order the engine produced them in; bindings are
/// sorted by variable name. Delta-mode solutions carry their bound pair,
/// and their probability is `null` when post-processing was skipped.
/// Identical reports render to identical bytes.
pub fn emit_report(net: &Network, report: &SolveReport) -> String {
    let config = &report.config;
    let json = ReportJson {
        mode: report.mode,
        solutions: report
            .solutions
            .iter()
            .map(|s| SolutionJson {
                rank: s.rank,
                bindings: bindings(net, &s.assignment),
                probability: s.probability,
                bounds: s.bounds.map(|b| BoundsJson {
                    lower: b.lower,
                    upper: b.upper,
                }),
            })
            .collect(),
        statistics: StatisticsJson {
            mode: &report.mode,
            expanded: report.statistics.expanded,
            enqueued: report.statistics.enqueued,
            peak_agenda: report.statistics.peak_agenda,
            filtered: report.statistics.filtered,
            candidates: report.statistics.candidates,
            delta: (report.mode == Mode::DeltaIb).then_some(config.delta),
            epsilon: config.epsilon,
            top_k: config.top_k,
            threshold: config.threshold,
            maximality_filter: config.maximality_filter,
        },
    };
    let mut out = serde_json::to_string_pretty(&json).expect("report serializes");
    out.push('\n');
    out
}

#[derive(Serialize)]
struct NodeCubes {
    node: String,
    parents: Vec<String>,
    values: Vec<ValueCubes>,
}

#[derive(Serialize)]
struct ValueCubes {
    value: String,
    hypercubes: Vec<CubeJson>,
}

#[derive(Serialize)]
struct CubeJson {
    fixed: Vec<(String, String)>,
    p_min: f64,
    p_max: f64,
}

/// Dumps every node's maximal hypercubes as JSON, nodes in declaration
/// order, values in domain order, cubes in index order.
pub fn emit_hypercubes(index: &HypercubeIndex<'_>) -> String {
    let net = index.network();
    let nodes: Vec<NodeCubes> = net
        .ids()
        .map(|v| {
            let var = net.variable(v);
            NodeCubes {
                node: var.name.clone(),
                parents: var.parents.iter().map(|&p| net.name(p).to_owned()).collect(),
                values: var
                    .domain
                    .iter()
                    .enumerate()
                    .map(|(x, value)| ValueCubes {
                        value: value.clone(),
                        hypercubes: index
                            .cubes(v, x)
                            .iter()
                            .map(|h| CubeJson {
                                fixed: h
                                    .fixed
                                    .iter()
                                    .zip(&var.parents)
                                    .filter_map(|(f, &p)| {
                                        f.map(|x| (net.name(p).to_owned(), net.variable(p).domain[x].clone()))
                                    })
                                    .collect(),
                                p_min: h.p_min,
                                p_max: h.p_max,
                            })
                            .collect(),
                    })
                    .collect(),
            }
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&nodes).expect("hypercubes serialize");
    out.push('\n');
    out
}
