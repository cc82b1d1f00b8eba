use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::frontier::{Frontier, FrontierDiscipline, FrontierEntry};
use super::graph::StateSpaceGraph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessorRecord {
    pub action: String,
    pub to: String,
    pub cost: f64,
}

/// One interaction between the Algorithm role and another role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum TraceEvent {
    FrontierInsert {
        state: String,
        g: f64,
        key: f64,
    },
    FrontierPop {
        state: String,
        g: f64,
        key: f64,
        stale: bool,
    },
    GoalTest {
        state: String,
        result: bool,
    },
    VisitMark {
        state: String,
    },
    SuccessorQuery {
        state: String,
        successors: Vec<SuccessorRecord>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentLink {
    pub child: String,
    pub parent: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub discipline: FrontierDiscipline,
    pub initial: String,
    pub events: Vec<TraceEvent>,
    /// Finalized states in the order they were popped.
    pub parents: Vec<ParentLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult<C> {
    pub found: bool,
    pub path_states: Vec<String>,
    pub path_actions: Vec<String>,
    pub total_cost: C,
    pub expansions: usize,
    pub trace: SearchTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Found,
    Exhausted,
}

/// The Algorithm role: owns the frontier, the visited marks and the parent
/// links, and advances one pop at a time so callers can drive it
/// interactively.
///
/// Duplicate handling: `fifo` and `priority_h` never re-insert a state that
/// was already inserted; `lifo` re-pushes anything not yet expanded; the
/// cost-ordered disciplines re-insert only on a strictly cheaper `g`. In every
/// case a state is finalized when popped and later copies are skipped as
/// stale.
#[derive(Debug, Clone)]
pub struct SearchRun<C> {
    discipline: FrontierDiscipline,
    frontier: Frontier<C>,
    inserted: Vec<bool>,
    expanded: Vec<bool>,
    best_g: Vec<Option<C>>,
    pending_parent: Vec<Option<(usize, String)>>,
    parent: Vec<Option<(usize, String)>>,
    trace: SearchTrace,
    expansions: usize,
    status: RunStatus,
    goal: Option<(usize, C)>,
}

impl<C: Scalar> SearchRun<C> {
    pub fn new(graph: &StateSpaceGraph<C>, discipline: FrontierDiscipline) -> Result<Self> {
        if discipline.needs_heuristic() && graph.heuristic().is_none() {
            return Err(Error::MissingHeuristic(discipline.to_string()));
        }
        if graph.is_empty() {
            return Err(Error::InvalidGraph("graph has no states".into()));
        }
        let n = graph.len();
        let initial = graph.initial();
        let mut run = SearchRun {
            discipline,
            frontier: Frontier::new(discipline),
            inserted: vec![false; n],
            expanded: vec![false; n],
            best_g: vec![None; n],
            pending_parent: vec![None; n],
            parent: vec![None; n],
            trace: SearchTrace {
                discipline,
                initial: graph.id(initial).to_string(),
                events: Vec::new(),
                parents: Vec::new(),
            },
            expansions: 0,
            status: RunStatus::Running,
            goal: None,
        };
        run.push(graph, initial, C::zero())?;
        Ok(run)
    }

    fn key(&self, graph: &StateSpaceGraph<C>, s: usize, g: &C) -> C {
        let h = || {
            graph
                .heuristic()
                .map(|h| h[s].clone())
                .unwrap_or_else(C::zero)
        };
        match self.discipline {
            FrontierDiscipline::Fifo | FrontierDiscipline::Lifo | FrontierDiscipline::PriorityG => {
                g.clone()
            }
            FrontierDiscipline::PriorityH => h(),
            FrontierDiscipline::PriorityGPlusH => g.clone() + h(),
        }
    }

    fn push(&mut self, graph: &StateSpaceGraph<C>, s: usize, g: C) -> Result<()> {
        let key = self.key(graph, s, &g);
        self.trace.events.push(TraceEvent::FrontierInsert {
            state: graph.id(s).to_string(),
            g: g.to_f64(),
            key: key.to_f64(),
        });
        self.inserted[s] = true;
        self.best_g[s] = Some(g.clone());
        self.frontier.insert(FrontierEntry { state: s, g, key })
    }

    fn should_insert(&self, to: usize, g: &C) -> bool {
        match self.discipline {
            FrontierDiscipline::Fifo | FrontierDiscipline::PriorityH => !self.inserted[to],
            FrontierDiscipline::Lifo => !self.expanded[to],
            FrontierDiscipline::PriorityG | FrontierDiscipline::PriorityGPlusH => {
                !self.expanded[to] && self.best_g[to].as_ref().is_none_or(|b| g < b)
            }
        }
    }

    fn finalize(&mut self, graph: &StateSpaceGraph<C>, s: usize) {
        self.expanded[s] = true;
        if let Some((p, action)) = self.pending_parent[s].clone() {
            self.trace.parents.push(ParentLink {
                child: graph.id(s).to_string(),
                parent: graph.id(p).to_string(),
                action: action.clone(),
            });
            self.parent[s] = Some((p, action));
        }
    }

    /// One pop of the frontier: stale skip, goal test, or expansion.
    pub fn step(&mut self, graph: &StateSpaceGraph<C>) -> Result<RunStatus> {
        if self.status != RunStatus::Running {
            return Ok(self.status);
        }
        let entry = match self.frontier.pop() {
            Ok(e) => e,
            Err(Error::EmptyFrontier) => {
                self.status = RunStatus::Exhausted;
                return Ok(self.status);
            }
            Err(e) => return Err(e),
        };
        let s = entry.state;
        let stale = self.expanded[s];
        self.trace.events.push(TraceEvent::FrontierPop {
            state: graph.id(s).to_string(),
            g: entry.g.to_f64(),
            key: entry.key.to_f64(),
            stale,
        });
        if stale {
            return Ok(self.status);
        }

        let is_goal = graph.goal_test(s)?;
        self.trace.events.push(TraceEvent::GoalTest {
            state: graph.id(s).to_string(),
            result: is_goal,
        });
        self.finalize(graph, s);
        if is_goal {
            self.status = RunStatus::Found;
            self.goal = Some((s, entry.g));
            return Ok(self.status);
        }

        self.trace.events.push(TraceEvent::VisitMark {
            state: graph.id(s).to_string(),
        });
        let successors = graph.successors(s)?;
        self.expansions += 1;
        self.trace.events.push(TraceEvent::SuccessorQuery {
            state: graph.id(s).to_string(),
            successors: successors
                .iter()
                .map(|x| SuccessorRecord {
                    action: x.action.to_string(),
                    to: graph.id(x.to).to_string(),
                    cost: x.cost.to_f64(),
                })
                .collect(),
        });
        for succ in successors {
            let g = entry.g.clone() + succ.cost.clone();
            if self.should_insert(succ.to, &g) {
                self.pending_parent[succ.to] = Some((s, succ.action.to_string()));
                self.push(graph, succ.to, g)?;
            }
        }
        Ok(self.status)
    }

    pub fn run_to_end(&mut self, graph: &StateSpaceGraph<C>) -> Result<RunStatus> {
        while self.step(graph)? == RunStatus::Running {}
        Ok(self.status)
    }

    pub fn status(&self) -> RunStatus {
        self.status
    }

    pub fn trace(&self) -> &SearchTrace {
        &self.trace
    }

    pub fn frontier(&self) -> &Frontier<C> {
        &self.frontier
    }

    pub fn expansions(&self) -> usize {
        self.expansions
    }

    pub fn visited(&self) -> impl Iterator<Item = usize> + '_ {
        self.expanded
            .iter()
            .enumerate()
            .filter(|(_, v)| **v)
            .map(|(i, _)| i)
    }

    /// Current outcome; a run still in progress reports `found: false`.
    pub fn result(&self, graph: &StateSpaceGraph<C>) -> Result<SearchResult<C>> {
        let (found, path_states, path_actions, total_cost) = match &self.goal {
            Some((goal, g)) => {
                let (states, actions) = reconstruct_path(&self.trace, graph.id(*goal))?;
                (true, states, actions, g.clone())
            }
            None => (false, Vec::new(), Vec::new(), C::zero()),
        };
        Ok(SearchResult {
            found,
            path_states,
            path_actions,
            total_cost,
            expansions: self.expansions,
            trace: self.trace.clone(),
        })
    }

    pub fn into_result(self, graph: &StateSpaceGraph<C>) -> Result<SearchResult<C>> {
        self.result(graph)
    }

    pub fn discipline(&self) -> FrontierDiscipline {
        self.discipline
    }
}

/// Run the full search to completion with one frontier discipline.
pub fn graph_search<C: Scalar>(
    graph: &StateSpaceGraph<C>,
    discipline: FrontierDiscipline,
) -> Result<SearchResult<C>> {
    let mut run = SearchRun::new(graph, discipline)?;
    run.run_to_end(graph)?;
    run.into_result(graph)
}

/// Walk parent links from `goal` back to the initial state.
pub fn reconstruct_path(trace: &SearchTrace, goal: &str) -> Result<(Vec<String>, Vec<String>)> {
    let links: HashMap<&str, &ParentLink> = trace
        .parents
        .iter()
        .map(|l| (l.child.as_str(), l))
        .collect();
    if goal != trace.initial && !links.contains_key(goal) {
        return Err(Error::UnreachedState(goal.to_string()));
    }
    let mut states = vec![goal.to_string()];
    let mut actions = Vec::new();
    let mut cur = goal;
    while cur != trace.initial {
        let link = links
            .get(cur)
            .ok_or_else(|| Error::UnreachedState(cur.to_string()))?;
        actions.push(link.action.clone());
        states.push(link.parent.clone());
        cur = &link.parent;
        if states.len() > trace.parents.len() + 1 {
            return Err(Error::InvalidGraph("parent links contain a cycle".into()));
        }
    }
    states.reverse();
    actions.reverse();
    Ok((states, actions))
}
