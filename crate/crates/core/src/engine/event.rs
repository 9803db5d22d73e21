use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::time::SimTime;

/// Event kinds in the order they are handled at equal timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    TaskCompletion { task: usize },
    WorkflowArrival { workflow: usize },
    AutoscaleTick,
    ClusterDeallocationCheck { cluster: usize },
}

impl EventKind {
    pub fn priority(self) -> u8 {
        match self {
            EventKind::TaskCompletion { .. } => 0,
            EventKind::WorkflowArrival { .. } => 1,
            EventKind::AutoscaleTick => 2,
            EventKind::ClusterDeallocationCheck { .. } => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: SimTime,
    pub kind: EventKind,
    pub seq: u64,
}

impl Event {
    fn key(&self) -> (SimTime, u8, u64) {
        (self.time, self.kind.priority(), self.seq)
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-ordered event calendar keyed by (time, kind priority, insertion sequence).
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: SimTime, kind: EventKind) {
        self.heap.push(Reverse(Event {
            time,
            kind,
            seq: self.seq,
        }));
        self.seq += 1;
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn peek(&self) -> Option<&Event> {
        self.heap.peek().map(|Reverse(e)| e)
    }

    /// Pops the next event if it is at `time` with priority at most `max_priority`.
    pub fn pop_if(&mut self, time: SimTime, max_priority: u8) -> Option<Event> {
        match self.peek() {
            Some(e) if e.time == time && e.kind.priority() <= max_priority => self.pop(),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
