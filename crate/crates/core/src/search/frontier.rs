use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How the Frontier role orders its cards. Swapping this is the only change
/// between BFS, DFS, UCS, Greedy and A*.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontierDiscipline {
    Fifo,
    Lifo,
    PriorityG,
    PriorityH,
    PriorityGPlusH,
}

impl FrontierDiscipline {
    pub const ALL: [FrontierDiscipline; 5] = [
        FrontierDiscipline::Fifo,
        FrontierDiscipline::Lifo,
        FrontierDiscipline::PriorityG,
        FrontierDiscipline::PriorityH,
        FrontierDiscipline::PriorityGPlusH,
    ];

    pub fn needs_heuristic(self) -> bool {
        matches!(
            self,
            FrontierDiscipline::PriorityH | FrontierDiscipline::PriorityGPlusH
        )
    }

    pub fn algorithm_name(self) -> &'static str {
        match self {
            FrontierDiscipline::Fifo => "bfs",
            FrontierDiscipline::Lifo => "dfs",
            FrontierDiscipline::PriorityG => "ucs",
            FrontierDiscipline::PriorityH => "greedy",
            FrontierDiscipline::PriorityGPlusH => "astar",
        }
    }
}

impl fmt::Display for FrontierDiscipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.algorithm_name())
    }
}

/// Accepts algorithm names (`bfs`, `astar`, ...) or discipline names
/// (`fifo`, `priority_g_plus_h`, ...).
impl FromStr for FrontierDiscipline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bfs" | "fifo" => FrontierDiscipline::Fifo,
            "dfs" | "lifo" => FrontierDiscipline::Lifo,
            "ucs" | "priority_g" => FrontierDiscipline::PriorityG,
            "greedy" | "priority_h" => FrontierDiscipline::PriorityH,
            "astar" | "priority_g_plus_h" => FrontierDiscipline::PriorityGPlusH,
            other => return Err(Error::domain(format!("unknown search algorithm `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierEntry<C> {
    pub state: usize,
    pub g: C,
    pub key: C,
}

#[derive(Debug, Clone)]
struct Ranked<C> {
    seq: u64,
    entry: FrontierEntry<C>,
}

impl<C: Scalar> PartialEq for Ranked<C> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<C: Scalar> Eq for Ranked<C> {}

impl<C: Scalar> PartialOrd for Ranked<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the max-heap pops the smallest key, then the earliest insert.
impl<C: Scalar> Ord for Ranked<C> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .entry
            .key
            .partial_cmp(&self.entry.key)
            .expect("frontier keys are finite")
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone)]
enum Store<C> {
    Queue(VecDeque<FrontierEntry<C>>),
    Stack(Vec<FrontierEntry<C>>),
    Heap(BinaryHeap<Ranked<C>>),
}

#[derive(Debug, Clone)]
pub struct Frontier<C> {
    discipline: FrontierDiscipline,
    store: Store<C>,
    seq: u64,
}

impl<C: Scalar> Frontier<C> {
    pub fn new(discipline: FrontierDiscipline) -> Self {
        let store = match discipline {
            FrontierDiscipline::Fifo => Store::Queue(VecDeque::new()),
            FrontierDiscipline::Lifo => Store::Stack(Vec::new()),
            _ => Store::Heap(BinaryHeap::new()),
        };
        Frontier {
            discipline,
            store,
            seq: 0,
        }
    }

    pub fn discipline(&self) -> FrontierDiscipline {
        self.discipline
    }

    pub fn insert(&mut self, entry: FrontierEntry<C>) -> Result<()> {
        if !entry.key.to_f64().is_finite() {
            return Err(Error::domain("frontier priority keys must be finite"));
        }
        self.seq += 1;
        match &mut self.store {
            Store::Queue(q) => q.push_back(entry),
            Store::Stack(s) => s.push(entry),
            Store::Heap(h) => h.push(Ranked {
                seq: self.seq,
                entry,
            }),
        }
        Ok(())
    }

    pub fn pop(&mut self) -> Result<FrontierEntry<C>> {
        let popped = match &mut self.store {
            Store::Queue(q) => q.pop_front(),
            Store::Stack(s) => s.pop(),
            Store::Heap(h) => h.pop().map(|r| r.entry),
        };
        popped.ok_or(Error::EmptyFrontier)
    }

    pub fn len(&self) -> usize {
        match &self.store {
            Store::Queue(q) => q.len(),
            Store::Stack(s) => s.len(),
            Store::Heap(h) => h.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Contents in the order they would be popped.
    pub fn snapshot(&self) -> Vec<FrontierEntry<C>> {
        match &self.store {
            Store::Queue(q) => q.iter().cloned().collect(),
            Store::Stack(s) => s.iter().rev().cloned().collect(),
            Store::Heap(h) => {
                let mut v: Vec<_> = h.iter().cloned().collect();
                v.sort_by(|a, b| b.cmp(a));
                v.into_iter().map(|r| r.entry).collect()
            }
        }
    }
}
