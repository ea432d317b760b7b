use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::model::Assignment;

/// Lower and upper bound on the prior of an assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgendaItem {
    pub assignment: Assignment,
    /// Agenda priority: the admissible heuristic, or the upper bound in
    /// delta mode.
    pub h_value: f64,
    pub bounds: Option<Bounds>,
    /// Insertion counter; zero until the item is enqueued.
    pub sequence: u64,
}

impl AgendaItem {
    pub fn new(assignment: Assignment, h_value: f64, bounds: Option<Bounds>) -> Self {
        Self {
            assignment,
            h_value,
            bounds,
            sequence: 0,
        }
    }
}

struct Entry(AgendaItem);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Max-heap: higher priority first, then earlier insertion, then the
    // lexicographically smaller assignment.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .h_value
            .total_cmp(&other.0.h_value)
            .then_with(|| other.0.sequence.cmp(&self.0.sequence))
            .then_with(|| other.0.assignment.cmp(&self.0.assignment))
    }
}

/// Best-first agenda that never admits the same assignment twice.
#[derive(Default)]
pub struct Agenda {
    heap: BinaryHeap<Entry>,
    seen: HashSet<Assignment>,
    next_sequence: u64,
    peak: usize,
}

impl Agenda {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn has_seen(&self, a: &Assignment) -> bool {
        self.seen.contains(a)
    }

    /// Enqueues `item` unless its assignment was enqueued before. Returns
    /// whether it was added.
    pub fn push(&mut self, mut item: AgendaItem) -> bool {
        if !self.seen.insert(item.assignment.clone()) {
            return false;
        }
        self.next_sequence += 1;
        item.sequence = self.next_sequence;
        self.heap.push(Entry(item));
        self.peak = self.peak.max(self.heap.len());
        true
    }

    pub fn pop(&mut self) -> Option<AgendaItem> {
        self.heap.pop().map(|e| e.0)
    }

    pub fn peek(&self) -> Option<&AgendaItem> {
        self.heap.peek().map(|e| &e.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn enqueued(&self) -> u64 {
        self.next_sequence
    }

    pub fn peak(&self) -> usize {
        self.peak
    }
}
