use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::rng::sums_to_one;
use crate::scalar::{prob_to_string, Prob, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    State(usize),
    Terminal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub target: Target,
    pub prob: Prob,
    /// Reward collected on entering `target`. For terminal targets this is the
    /// terminal's entry reward.
    pub reward: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalState<T> {
    pub id: String,
    pub reward: T,
}

/// A finite MDP with exact transition probabilities.
///
/// Terminals are explicit absorbing states with no actions; their value is
/// zero and their reward is paid on entry.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp<T> {
    states: Vec<String>,
    terminals: Vec<TerminalState<T>>,
    actions: Vec<Vec<String>>,
    transitions: Vec<Vec<Vec<Outcome<T>>>>,
    discount: T,
}

impl<T: Scalar> FiniteMdp<T> {
    /// `transitions[s][a]` lists the outcomes of action `actions[s][a]`.
    pub fn new(
        states: Vec<String>,
        terminals: Vec<TerminalState<T>>,
        actions: Vec<Vec<String>>,
        transitions: Vec<Vec<Vec<Outcome<T>>>>,
        discount: T,
    ) -> Result<Self> {
        if !(discount > T::zero() && discount <= T::one()) {
            return Err(Error::domain(format!(
                "discount {:?} is outside (0, 1]",
                discount
            )));
        }
        if actions.len() != states.len() || transitions.len() != states.len() {
            return Err(Error::validation(
                "states, actions and transitions disagree in length",
            ));
        }
        for (s, (acts, dists)) in actions.iter().zip(&transitions).enumerate() {
            if acts.is_empty() {
                return Err(Error::validation(format!(
                    "state `{}` has no actions",
                    states[s]
                )));
            }
            if acts.len() != dists.len() {
                return Err(Error::validation(format!(
                    "state `{}` declares {} actions but {} distributions",
                    states[s],
                    acts.len(),
                    dists.len()
                )));
            }
            for (a, dist) in dists.iter().enumerate() {
                for o in dist {
                    let ok = match o.target {
                        Target::State(i) => i < states.len(),
                        Target::Terminal(i) => i < terminals.len(),
                    };
                    if !ok {
                        return Err(Error::UnknownReference(format!(
                            "transition ({}, {}) points outside the model",
                            states[s], acts[a]
                        )));
                    }
                }
                let (ok, total) = sums_to_one(dist.iter().map(|o| &o.prob));
                if !ok {
                    return Err(Error::validation(format!(
                        "transition ({}, {}) sums to {}, not 1",
                        states[s],
                        acts[a],
                        prob_to_string(&total)
                    )));
                }
            }
        }
        Ok(FiniteMdp {
            states,
            terminals,
            actions,
            transitions,
            discount,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn terminals(&self) -> &[TerminalState<T>] {
        &self.terminals
    }

    pub fn actions(&self, s: usize) -> &[String] {
        &self.actions[s]
    }

    pub fn outcomes(&self, s: usize, a: usize) -> &[Outcome<T>] {
        &self.transitions[s][a]
    }

    pub fn discount(&self) -> &T {
        &self.discount
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s == id)
    }

    pub fn target_name(&self, t: Target) -> &str {
        match t {
            Target::State(i) => &self.states[i],
            Target::Terminal(i) => &self.terminals[i].id,
        }
    }

    /// A topological order of the non-terminal states, or the state where a
    /// cycle was detected.
    pub fn topological_order(&self) -> std::result::Result<Vec<usize>, usize> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let n = self.states.len();
        let mut mark = vec![Mark::New; n];
        let mut order = Vec::with_capacity(n);
        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            // iterative DFS; frame = (state, next successor cursor)
            let succ = |s: usize| -> Vec<usize> {
                let mut v: Vec<usize> = self.transitions[s]
                    .iter()
                    .flatten()
                    .filter(|o| *o.prob.numer() > 0)
                    .filter_map(|o| match o.target {
                        Target::State(j) => Some(j),
                        Target::Terminal(_) => None,
                    })
                    .collect();
                v.dedup();
                v
            };
            let mut stack = vec![(root, succ(root), 0usize)];
            mark[root] = Mark::Active;
            while let Some((s, next, cursor)) = stack.last_mut() {
                if *cursor < next.len() {
                    let j = next[*cursor];
                    *cursor += 1;
                    match mark[j] {
                        Mark::Active => return Err(j),
                        Mark::New => {
                            mark[j] = Mark::Active;
                            let nj = succ(j);
                            stack.push((j, nj, 0));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[*s] = Mark::Done;
                    order.push(*s);
                    stack.pop();
                }
            }
        }
        order.reverse();
        Ok(order)
    }

    /// One-step lookahead: `Q(s,a) = Σ p · (r + γ·V(s'))` with terminals worth 0.
    pub fn q_value(&self, values: &[T], s: usize, a: usize) -> T {
        self.transitions[s][a].iter().fold(T::zero(), |acc, o| {
            let cont = match o.target {
                Target::State(j) => self.discount.clone() * values[j].clone(),
                Target::Terminal(_) => T::zero(),
            };
            acc + T::from_prob(&o.prob) * (o.reward.clone() + cont)
        })
    }

    pub fn q_table(&self, values: &[T]) -> Vec<Vec<T>> {
        (0..self.states.len())
            .map(|s| {
                (0..self.actions[s].len())
                    .map(|a| self.q_value(values, s, a))
                    .collect()
            })
            .collect()
    }
}

/// Index of the first maximum (declaration-order tie break).
pub fn argmax_first<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, q) in row.iter().enumerate().skip(1) {
        if *q > row[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViResult<T> {
    pub values: Vec<T>,
    pub q_values: Vec<Vec<T>>,
    /// Action index per state.
    pub policy: Vec<usize>,
    pub iterations_to_converge: usize,
    pub residual_history: Vec<T>,
}

impl<T: Scalar> ViResult<T> {
    pub fn value_of(&self, mdp: &FiniteMdp<T>, state: &str) -> Option<&T> {
        mdp.state_index(state).map(|i| &self.values[i])
    }

    pub fn action_of<'m>(&self, mdp: &'m FiniteMdp<T>, state: &str) -> Option<&'m str> {
        mdp.state_index(state)
            .map(|i| mdp.actions(i)[self.policy[i]].as_str())
    }

    pub fn q_of(&self, mdp: &FiniteMdp<T>, state: &str, action: &str) -> Option<&T> {
        let s = mdp.state_index(state)?;
        let a = mdp.actions(s).iter().position(|x| x == action)?;
        Some(&self.q_values[s][a])
    }

    /// States where `action` is strictly better than every alternative.
    pub fn strict_set(&self, mdp: &FiniteMdp<T>, action: &str) -> Vec<String> {
        (0..mdp.states().len())
            .filter(|&s| {
                let acts = mdp.actions(s);
                let Some(a) = acts.iter().position(|x| x == action) else {
                    return false;
                };
                acts.len() > 1
                    && (0..acts.len())
                        .filter(|&b| b != a)
                        .all(|b| self.q_values[s][a] > self.q_values[s][b])
            })
            .map(|s| mdp.states()[s].clone())
            .collect()
    }

    /// Set of actions attaining the row maximum, per state.
    pub fn optimal_action_sets(&self, mdp: &FiniteMdp<T>) -> Vec<Vec<String>> {
        (0..mdp.states().len())
            .map(|s| {
                mdp.actions(s)
                    .iter()
                    .enumerate()
                    .filter(|(a, _)| self.q_values[s][*a] == self.values[s])
                    .map(|(_, name)| name.clone())
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self, mdp: &FiniteMdp<T>) -> Value {
        let mut values = Map::new();
        let mut q = Map::new();
        let mut policy = Map::new();
        for (s, id) in mdp.states().iter().enumerate() {
            values.insert(id.clone(), json!(self.values[s].to_f64()));
            let row: Map<String, Value> = mdp
                .actions(s)
                .iter()
                .zip(&self.q_values[s])
                .map(|(a, v)| (a.clone(), json!(v.to_f64())))
                .collect();
            q.insert(id.clone(), Value::Object(row));
            policy.insert(id.clone(), json!(mdp.actions(s)[self.policy[s]]));
        }
        let terminals: Map<String, Value> = mdp
            .terminals()
            .iter()
            .map(|t| (t.id.clone(), json!(t.reward.to_f64())))
            .collect();
        json!({
            "values": values,
            "q_values": q,
            "policy": policy,
            "terminals": terminals,
            "iterations": self.iterations_to_converge,
            "residual_history": self.residual_history.iter().map(|r| r.to_f64()).collect::<Vec<_>>(),
        })
    }
}

/// Synchronous value iteration until the sup-norm change drops below `tol`.
///
/// The reported values are one final backup of the converged iterate, so
/// `values[s] == max_a q_values[s][a]` holds exactly.
pub fn value_iteration<T: Scalar>(
    mdp: &FiniteMdp<T>,
    tol: T,
    max_sweeps: usize,
) -> Result<ViResult<T>> {
    if tol <= T::zero() {
        return Err(Error::domain("tolerance must be positive"));
    }
    if *mdp.discount() == T::one() {
        if let Err(s) = mdp.topological_order() {
            return Err(Error::CyclicUndiscounted(mdp.states()[s].clone()));
        }
    }
    let n = mdp.states().len();
    let mut values = vec![T::zero(); n];
    let mut residual_history = Vec::new();
    let mut converged = false;
    for _ in 0..max_sweeps {
        let next: Vec<T> = (0..n)
            .map(|s| {
                (0..mdp.actions(s).len())
                    .map(|a| mdp.q_value(&values, s, a))
                    .reduce(T::max_of)
                    .expect("every state has an action")
            })
            .collect();
        let residual = crate::scalar::max_abs_diff(&next, &values);
        values = next;
        let done = residual < tol;
        residual_history.push(residual);
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            sweeps: max_sweeps,
            residual: residual_history
                .last()
                .map(|r| r.to_f64())
                .unwrap_or(f64::NAN),
        });
    }
    let q_values = mdp.q_table(&values);
    let values: Vec<T> = q_values
        .iter()
        .map(|row| row.iter().cloned().reduce(T::max_of).unwrap())
        .collect();
    let policy = q_values.iter().map(|row| argmax_first(row)).collect();
    Ok(ViResult {
        values,
        q_values,
        policy,
        iterations_to_converge: residual_history.len(),
        residual_history,
    })
}

/// Greedy policy from a state-value map, ties to the first declared action.
pub fn extract_policy<T: Scalar>(
    mdp: &FiniteMdp<T>,
    values: &BTreeMap<String, T>,
) -> Result<Vec<usize>> {
    let v = mdp
        .states()
        .iter()
        .map(|s| {
            values
                .get(s)
                .cloned()
                .ok_or_else(|| Error::MissingValue(s.clone()))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(mdp
        .q_table(&v)
        .iter()
        .map(|row| argmax_first(row))
        .collect())
}

/// Probability of ending in each terminal when following `policy` from
/// `start`. Requires an acyclic MDP.
pub fn terminal_distribution<T: Scalar>(
    mdp: &FiniteMdp<T>,
    policy: &[usize],
    start: usize,
) -> Result<Vec<T>> {
    let order = mdp
        .topological_order()
        .map_err(|s| Error::CyclicUndiscounted(mdp.states()[s].clone()))?;
    let mut mass = vec![T::zero(); mdp.states().len()];
    mass[start] = T::one();
    let mut out = vec![T::zero(); mdp.terminals().len()];
    for s in order {
        if mass[s] == T::zero() {
            continue;
        }
        for o in mdp.outcomes(s, policy[s]) {
            let m = mass[s].clone() * T::from_prob(&o.prob);
            match o.target {
                Target::State(j) => mass[j] = mass[j].clone() + m,
                Target::Terminal(t) => out[t] = out[t].clone() + m,
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_step(reward: f64, discount: f64) -> FiniteMdp<f64> {
        FiniteMdp::new(
            vec!["s".into()],
            vec![TerminalState {
                id: "end".into(),
                reward,
            }],
            vec![vec!["go".into()]],
            vec![vec![vec![Outcome {
                target: Target::Terminal(0),
                prob: Prob::from_integer(1),
                reward,
            }]]],
            discount,
        )
        .unwrap()
    }

    #[test]
    fn single_step_value_is_the_reward() {
        let mdp = one_step(7.5, 1.0);
        let vi = value_iteration(&mdp, 1e-9, 10).unwrap();
        assert_eq!(vi.values, vec![7.5]);
        assert_eq!(vi.policy, vec![0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mdp = one_step(1.0, 1.0);
        assert_eq!(
            value_iteration(&mdp, 0.0, 10).unwrap_err().code(),
            "domain_error"
        );
        let err = FiniteMdp::<f64>::new(
            vec!["s".into()],
            vec![],
            vec![vec!["go".into()]],
            vec![vec![vec![Outcome {
                target: Target::State(0),
                prob: Prob::new(5, 6),
                reward: 0.0,
            }]]],
            0.5,
        )
        .unwrap_err();
        assert_eq!(err.code(), "validation_error");
        assert!(FiniteMdp::<f64>::new(vec![], vec![], vec![], vec![], 0.0).is_err());
    }

    fn self_loop(discount: f64) -> FiniteMdp<f64> {
        FiniteMdp::new(
            vec!["s".into()],
            vec![TerminalState {
                id: "end".into(),
                reward: 1.0,
            }],
            vec![vec!["stay".into(), "leave".into()]],
            vec![vec![
                vec![Outcome {
                    target: Target::State(0),
                    prob: Prob::from_integer(1),
                    reward: 0.5,
                }],
                vec![Outcome {
                    target: Target::Terminal(0),
                    prob: Prob::from_integer(1),
                    reward: 1.0,
                }],
            ]],
            discount,
        )
        .unwrap()
    }

    #[test]
    fn cyclic_undiscounted_is_rejected() {
        let err = value_iteration(&self_loop(1.0), 1e-9, 100).unwrap_err();
        assert_eq!(err, Error::CyclicUndiscounted("s".into()));
    }

    #[test]
    fn discounted_loop_converges() {
        // V = max(0.5 + 0.9 V, 1) -> V = 5
        let vi = value_iteration(&self_loop(0.9), 1e-10, 1000).unwrap();
        assert!((vi.values[0] - 5.0).abs() < 1e-8);
        assert_eq!(vi.policy, vec![0]);
        let err = value_iteration(&self_loop(0.9), 1e-10, 3).unwrap_err();
        assert_eq!(err.code(), "non_convergence");
    }

    #[test]
    fn extract_policy_ties_and_missing() {
        let mdp = FiniteMdp::new(
            vec!["s".into()],
            vec![TerminalState {
                id: "end".into(),
                reward: 2.0,
            }],
            vec![vec!["a".into(), "b".into()]],
            vec![vec![
                vec![Outcome {
                    target: Target::Terminal(0),
                    prob: Prob::from_integer(1),
                    reward: 2.0,
                }],
                vec![Outcome {
                    target: Target::Terminal(0),
                    prob: Prob::from_integer(1),
                    reward: 2.0,
                }],
            ]],
            1.0,
        )
        .unwrap();
        let mut values = BTreeMap::new();
        assert_eq!(
            extract_policy(&mdp, &values).unwrap_err(),
            Error::MissingValue("s".into())
        );
        values.insert("s".to_string(), 0.0);
        assert_eq!(extract_policy(&mdp, &values).unwrap(), vec![0]);
    }
}
