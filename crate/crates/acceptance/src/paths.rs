//! Exhaustive simple-path enumeration over a search graph.

use ai_lab_core::search::{GoalSpec, StateSpaceGraph};

/// Goal membership straight from the goal spec and the state attributes.
pub fn goal_states(g: &StateSpaceGraph<f64>) -> Vec<bool> {
    (0..g.len())
        .map(|s| match g.goal() {
            GoalSpec::StateId { id } => g.id(s) == id,
            GoalSpec::Predicate { conditions } => {
                conditions.iter().all(|(k, v)| g.attrs(s).get(k) == Some(v))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Best {
    /// Fewest edges on any simple path to a goal.
    pub edges: Option<usize>,
    /// Cheapest simple path to a goal.
    pub cost: Option<f64>,
}

/// Best path statistics from `start`, by walking every simple path.
pub fn best_from(g: &StateSpaceGraph<f64>, start: usize) -> Best {
    let goals = goal_states(g);
    let mut best = Best {
        edges: None,
        cost: None,
    };
    let mut on_path = vec![false; g.len()];
    walk(g, &goals, start, 0, 0.0, &mut on_path, &mut best);
    best
}

fn walk(
    g: &StateSpaceGraph<f64>,
    goals: &[bool],
    s: usize,
    depth: usize,
    cost: f64,
    on_path: &mut [bool],
    best: &mut Best,
) {
    if goals[s] {
        best.edges = Some(best.edges.map_or(depth, |e| e.min(depth)));
        best.cost = Some(best.cost.map_or(cost, |c| c.min(cost)));
    }
    on_path[s] = true;
    for e in g.edges().iter().filter(|e| e.from == s) {
        if !on_path[e.to] {
            walk(g, goals, e.to, depth + 1, cost + e.cost, on_path, best);
        }
    }
    on_path[s] = false;
}

/// Number of simple paths from the initial state that end at a goal.
pub fn count_goal_paths(g: &StateSpaceGraph<f64>) -> usize {
    fn go(g: &StateSpaceGraph<f64>, goals: &[bool], s: usize, on: &mut [bool]) -> usize {
        let mut n = usize::from(goals[s]);
        on[s] = true;
        for e in g.edges().iter().filter(|e| e.from == s) {
            if !on[e.to] {
                n += go(g, goals, e.to, on);
            }
        }
        on[s] = false;
        n
    }
    let goals = goal_states(g);
    go(g, &goals, g.initial(), &mut vec![false; g.len()])
}

/// Sum of edge costs along a state path, checking every hop exists.
pub fn path_cost(g: &StateSpaceGraph<f64>, states: &[String], actions: &[String]) -> Option<f64> {
    if states.len() != actions.len() + 1 {
        return None;
    }
    let mut total = 0.0;
    for (w, a) in states.windows(2).zip(actions) {
        let from = g.index_of(&w[0]).ok()?;
        let to = g.index_of(&w[1]).ok()?;
        let e = g
            .edges()
            .iter()
            .filter(|e| e.from == from && e.to == to && e.action == *a)
            .map(|e| e.cost)
            .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.min(c))))?;
        total += e;
    }
    Some(total)
}
