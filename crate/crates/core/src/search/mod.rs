//! Best-first agenda search.
//!
//! One engine drives three modes:
//!
//! * `map`: complete MAP. Goals bind every variable; the heuristic is the
//!   product of CPT entries of nodes whose parents are all bound.
//! * `ib`: independence-based partial MAP. Goals are assignments where the
//!   independence condition holds at every bound node. Expansion applies the
//!   maximal hypercubes of the minimal active fringe node.
//! * `delta-ib`: the same with delta-hypercubes, agenda ordered by the upper
//!   bound, a candidate set collected until no agenda item can beat it, then
//!   exact post-processing of the candidates.
//!
//! All modes keep running after the first goal to enumerate next-best
//! solutions, bounded by `top_k` and a relative probability threshold.

mod agenda;
mod complete;
mod delta;
mod heuristic;
mod ib;
mod trim;

pub use agenda::{Agenda, AgendaItem, Bounds};
pub use complete::{complete_children, solve_complete_map, solve_complete_map_observed};
pub use delta::{solve_delta_ib_map, solve_delta_ib_map_observed};
pub use heuristic::{bounds_delta, heuristic_complete, heuristic_ib};
pub use ib::{fringe_classify, solve_ib_map, solve_ib_map_observed, tau_children, tau_expand};
pub use trim::trim_to_proper_support;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::hypercube::{HypercubeError, DEFAULT_EPSILON};
use crate::model::{Assignment, Evidence, ModelError, Network, DEFAULT_ENUMERATION_BUDGET};

pub const DEFAULT_MAX_EXPANSIONS: u64 = 1_000_000;

/// Relative slack when deciding whether two solution probabilities tie.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Map,
    Ib,
    DeltaIb,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Map => "map",
            Mode::Ib => "ib",
            Mode::DeltaIb => "delta-ib",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Equality tolerance for exact independence hypercubes.
    pub epsilon: f64,
    /// Ratio for delta-independence hypercubes (delta mode only).
    pub delta: f64,
    /// Number of solutions to report; `None` for all.
    pub top_k: Option<usize>,
    /// Stop once a solution falls below this fraction of the first one.
    pub threshold: f64,
    pub max_expansions: u64,
    /// Drop solutions subsumed by another reported solution.
    pub maximality_filter: bool,
    /// Cap for brute-force marginals in delta post-processing.
    pub enumeration_budget: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            delta: 0.0,
            top_k: Some(1),
            threshold: 0.0,
            max_expansions: DEFAULT_MAX_EXPANSIONS,
            maximality_filter: true,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

impl SolveConfig {
    pub fn with_top_k(mut self, k: Option<usize>) -> Self {
        self.top_k = k;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_maximality_filter(mut self, on: bool) -> Self {
        self.maximality_filter = on;
        self
    }

    pub fn with_max_expansions(mut self, max: u64) -> Self {
        self.max_expansions = max;
        self
    }

    fn validate(&self) -> Result<(), SolveError> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(SolveError::InvalidParameter(format!(
                "epsilon {} must be >= 0",
                self.epsilon
            )));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(SolveError::InvalidParameter(format!(
                "delta {} outside [0, 1]",
                self.delta
            )));
        }
        if self.top_k == Some(0) {
            return Err(SolveError::InvalidParameter("top-k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(SolveError::InvalidParameter(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }

    fn k(&self) -> usize {
        self.top_k.unwrap_or(usize::MAX)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// 1-based position in the report.
    pub rank: usize,
    pub assignment: Assignment,
    /// Exact prior. `None` only in delta mode when post-processing was
    /// skipped for a single candidate with distinct bounds.
    pub probability: Option<f64>,
    pub bounds: Option<Bounds>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Statistics {
    pub expanded: u64,
    pub enqueued: u64,
    pub peak_agenda: usize,
    /// Solutions removed by the maximality filter.
    pub filtered: usize,
    /// Size of the delta-mode candidate set.
    pub candidates: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub mode: Mode,
    pub solutions: Vec<Solution>,
    pub statistics: Statistics,
    pub config: SolveConfig,
}

impl SolveReport {
    pub fn best(&self) -> Option<&Solution> {
        self.solutions.first()
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("evidence is empty; independence-based modes need at least one observation")]
    EmptyEvidence,
    #[error("evidence was built for a network of {found} variables, expected {expected}")]
    EvidenceWidth { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Hypercube(#[from] HypercubeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("expansion budget of {limit} exhausted")]
    Budget { limit: u64, report: Box<SolveReport> },
}

/// Hooks into the engine, for instrumentation and tests.
pub trait SearchObserver {
    fn enqueued(&mut self, _item: &AgendaItem) {}
    fn expanded(&mut self, _item: &AgendaItem) {}
}

impl SearchObserver for () {}

impl<F: FnMut(&AgendaItem)> SearchObserver for F {
    fn enqueued(&mut self, item: &AgendaItem) {
        self(item)
    }
}

/// What a mode plugs into the engine.
trait Strategy {
    /// Agenda priority and optional bounds.
    fn evaluate(&self, a: &Assignment) -> (f64, Option<Bounds>);
    fn is_goal(&self, a: &Assignment) -> bool;
    fn expand(&self, a: &Assignment) -> Vec<Assignment>;
}

enum Step {
    Goal(AgendaItem),
    Expanded,
    Exhausted,
}

struct BudgetExceeded;

struct Engine<'o, S> {
    strategy: S,
    agenda: Agenda,
    expanded: u64,
    max_expansions: u64,
    observer: &'o mut dyn SearchObserver,
}

impl<'o, S: Strategy> Engine<'o, S> {
    fn new(strategy: S, max_expansions: u64, observer: &'o mut dyn SearchObserver) -> Self {
        Self {
            strategy,
            agenda: Agenda::new(),
            expanded: 0,
            max_expansions,
            observer,
        }
    }

    /// Zero-probability items are dropped: they cannot beat any solution.
    fn offer(&mut self, a: Assignment) {
        if self.agenda.has_seen(&a) {
            return;
        }
        let (h, bounds) = self.strategy.evaluate(&a);
        if h <= 0.0 {
            return;
        }
        let mut item = AgendaItem::new(a, h, bounds);
        item.sequence = self.agenda.enqueued() + 1;
        self.observer.enqueued(&item);
        self.agenda.push(item);
    }

    fn top_priority(&self) -> Option<f64> {
        self.agenda.peek().map(|i| i.h_value)
    }

    fn step(&mut self) -> Result<Step, BudgetExceeded> {
        let Some(top) = self.agenda.peek() else {
            return Ok(Step::Exhausted);
        };
        if !self.strategy.is_goal(&top.assignment) && self.expanded >= self.max_expansions {
            return Err(BudgetExceeded);
        }
        let item = self.agenda.pop().expect("peeked");
        if self.strategy.is_goal(&item.assignment) {
            return Ok(Step::Goal(item));
        }
        self.expanded += 1;
        self.observer.expanded(&item);
        for child in self.strategy.expand(&item.assignment) {
            self.offer(child);
        }
        Ok(Step::Expanded)
    }

    fn statistics(&self) -> Statistics {
        Statistics {
            expanded: self.expanded,
            enqueued: self.agenda.enqueued(),
            peak_agenda: self.agenda.peak(),
            filtered: 0,
            candidates: None,
        }
    }
}

/// Accepted solutions of a k-best stream, with the optional maximality
/// filter applied as solutions arrive.
struct Stream {
    filter: bool,
    k: usize,
    accepted: Vec<AgendaItem>,
    filtered: usize,
}

impl Stream {
    fn new(filter: bool, k: usize) -> Self {
        Self {
            filter,
            k,
            accepted: Vec::new(),
            filtered: 0,
        }
    }

    fn full(&self) -> bool {
        self.accepted.len() >= self.k
    }

    /// Whether the stream is settled given the best remaining priority.
    /// With the filter on, a later solution can still displace an accepted
    /// one it subsumes, which requires an equal probability.
    fn settled(&self, top: Option<f64>) -> bool {
        if !self.full() {
            return false;
        }
        if !self.filter {
            return true;
        }
        match (top, self.accepted.last()) {
            (Some(top), Some(last)) => top < last.h_value * (1.0 - TIE_TOLERANCE),
            _ => true,
        }
    }

    fn offer(&mut self, item: AgendaItem) {
        if !self.filter {
            if !self.full() {
                self.accepted.push(item);
            }
            return;
        }
        if self.accepted.iter().any(|s| s.assignment.subsumes(&item.assignment)) {
            self.filtered += 1;
            return;
        }
        let before = self.accepted.len();
        self.accepted.retain(|s| !item.assignment.subsumes(&s.assignment));
        let displaced = before - self.accepted.len();
        self.filtered += displaced;
        if displaced > 0 || !self.full() {
            self.accepted.push(item);
        }
    }
}

/// Shared k-best loop for the modes whose goals carry exact probabilities.
fn run_stream<S: Strategy>(
    mode: Mode,
    engine: &mut Engine<'_, S>,
    config: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    let mut stream = Stream::new(config.maximality_filter, config.k());
    let mut first: Option<f64> = None;
    let outcome = loop {
        if stream.settled(engine.top_priority()) {
            break Ok(());
        }
        match engine.step() {
            Err(BudgetExceeded) => break Err(()),
            Ok(Step::Exhausted) => break Ok(()),
            Ok(Step::Expanded) => {}
            Ok(Step::Goal(item)) => {
                let p = item.h_value;
                match first {
                    None => first = Some(p),
                    Some(best) if p < config.threshold * best => break Ok(()),
                    Some(_) => {}
                }
                stream.offer(item);
            }
        }
    };
    let mut statistics = engine.statistics();
    statistics.filtered = stream.filtered;
    let solutions = stream
        .accepted
        .into_iter()
        .enumerate()
        .map(|(i, item)| Solution {
            rank: i + 1,
            assignment: item.assignment,
            probability: Some(item.h_value),
            bounds: None,
        })
        .collect();
    let report = SolveReport {
        mode,
        solutions,
        statistics,
        config: config.clone(),
    };
    match outcome {
        Ok(()) => Ok(report),
        Err(()) => Err(SolveError::Budget {
            limit: config.max_expansions,
            report: Box::new(report),
        }),
    }
}

fn check_evidence(net: &Network, e: &Evidence, require_nonempty: bool) -> Result<(), SolveError> {
    if e.width() != net.len() {
        return Err(SolveError::EvidenceWidth {
            expected: net.len(),
            found: e.width(),
        });
    }
    if require_nonempty && e.is_empty() {
        return Err(SolveError::EmptyEvidence);
    }
    Ok(())
}
