use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// On-disk body of a `search` scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBody {
    pub states: Vec<StateDecl>,
    pub edges: Vec<EdgeDecl>,
    pub initial: String,
    pub goal: GoalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heuristic: Option<Map<String, Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDecl {
    pub id: String,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub attrs: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDecl {
    pub from: String,
    pub action: String,
    pub to: String,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GoalSpec {
    StateId { id: String },
    Predicate { conditions: Map<String, Value> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge<C> {
    pub from: usize,
    pub action: String,
    pub to: usize,
    pub cost: C,
}

/// A validated search world. States are addressed by dense indices in
/// declaration order; ids are kept for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceGraph<C = f64> {
    ids: Vec<String>,
    attrs: Vec<Map<String, Value>>,
    index: HashMap<String, usize>,
    edges: Vec<Edge<C>>,
    outgoing: Vec<Vec<usize>>,
    initial: usize,
    goal: GoalSpec,
    heuristic: Option<Vec<C>>,
}

/// One outgoing connection as reported by the successor dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct Successor<'g, C> {
    pub action: &'g str,
    pub to: usize,
    pub cost: C,
}

impl<C: Scalar> StateSpaceGraph<C> {
    pub fn from_body(body: &SearchBody) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, s) in body.states.iter().enumerate() {
            if index.insert(s.id.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate state id `{}`", s.id)));
            }
        }
        let lookup = |id: &str, what: &str| {
            index.get(id).copied().ok_or_else(|| {
                Error::UnknownReference(format!("{what} references missing state `{id}`"))
            })
        };

        let mut edges = Vec::with_capacity(body.edges.len());
        let mut outgoing = vec![Vec::new(); body.states.len()];
        for (k, e) in body.edges.iter().enumerate() {
            let from = lookup(&e.from, &format!("edge {k}"))?;
            let to = lookup(&e.to, &format!("edge {k}"))?;
            if !e.cost.is_finite() || e.cost < 0.0 {
                return Err(Error::validation(format!(
                    "edge {k} ({} -> {}) has invalid cost {}",
                    e.from, e.to, e.cost
                )));
            }
            outgoing[from].push(edges.len());
            edges.push(Edge {
                from,
                action: e.action.clone(),
                to,
                cost: C::from_f64(e.cost),
            });
        }

        let initial = lookup(&body.initial, "initial")?;
        match &body.goal {
            GoalSpec::StateId { id } => {
                lookup(id, "goal")?;
            }
            GoalSpec::Predicate { conditions } => {
                for attr in conditions.keys() {
                    if !body.states.iter().any(|s| s.attrs.contains_key(attr)) {
                        return Err(Error::validation(format!(
                            "goal condition `{attr}` is not a declared state attribute"
                        )));
                    }
                }
            }
        }

        let heuristic = match &body.heuristic {
            None => None,
            Some(table) => {
                let mut h = vec![None; body.states.len()];
                for (id, v) in table {
                    let i = lookup(id, "heuristic")?;
                    let x = v
                        .as_f64()
                        .filter(|x| x.is_finite() && *x >= 0.0)
                        .ok_or_else(|| {
                            Error::validation(format!(
                                "heuristic for `{id}` must be a non-negative number"
                            ))
                        })?;
                    h[i] = Some(C::from_f64(x));
                }
                let h = h
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        v.ok_or_else(|| {
                            Error::validation(format!(
                                "heuristic has no entry for state `{}`",
                                body.states[i].id
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(h)
            }
        };

        Ok(StateSpaceGraph {
            ids: body.states.iter().map(|s| s.id.clone()).collect(),
            attrs: body.states.iter().map(|s| s.attrs.clone()).collect(),
            index,
            edges,
            outgoing,
            initial,
            goal: body.goal.clone(),
            heuristic,
        })
    }

    pub fn to_body(&self) -> SearchBody {
        SearchBody {
            states: self
                .ids
                .iter()
                .zip(&self.attrs)
                .map(|(id, attrs)| StateDecl {
                    id: id.clone(),
                    attrs: attrs.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDecl {
                    from: self.ids[e.from].clone(),
                    action: e.action.clone(),
                    to: self.ids[e.to].clone(),
                    cost: e.cost.to_f64(),
                })
                .collect(),
            initial: self.ids[self.initial].clone(),
            goal: self.goal.clone(),
            heuristic: self.heuristic.as_ref().map(|h| {
                self.ids
                    .iter()
                    .zip(h)
                    .map(|(id, v)| (id.clone(), Value::from(v.to_f64())))
                    .collect()
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, s: usize) -> &str {
        &self.ids[s]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn attrs(&self, s: usize) -> &Map<String, Value> {
        &self.attrs[s]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownState(id.to_string()))
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn goal(&self) -> &GoalSpec {
        &self.goal
    }

    pub fn edges(&self) -> &[Edge<C>] {
        &self.edges
    }

    pub fn heuristic(&self) -> Option<&[C]> {
        self.heuristic.as_deref()
    }

    /// Replace the heuristic table (used to build the h ≡ 0 variant in tests
    /// and by instructors comparing estimates).
    pub fn with_heuristic(mut self, h: Option<Vec<C>>) -> Result<Self> {
        if let Some(h) = &h {
            if h.len() != self.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.len(),
                    got: h.len(),
                });
            }
            if h.iter().any(|x| *x < C::zero()) {
                return Err(Error::validation("heuristic values must be non-negative"));
            }
        }
        self.heuristic = h;
        Ok(self)
    }

    /// Successor dictionary lookup: outgoing edges of `s` in declaration order.
    pub fn successors(&self, s: usize) -> Result<Vec<Successor<'_, C>>> {
        let out = self
            .outgoing
            .get(s)
            .ok_or_else(|| Error::UnknownState(format!("#{s}")))?;
        Ok(out
            .iter()
            .map(|&k| {
                let e = &self.edges[k];
                Successor {
                    action: &e.action,
                    to: e.to,
                    cost: e.cost.clone(),
                }
            })
            .collect())
    }

    /// Id-keyed form of [`successors`](Self::successors).
    pub fn successors_of(&self, id: &str) -> Result<Vec<(String, String, C)>> {
        let s = self.index_of(id)?;
        Ok(self
            .successors(s)?
            .into_iter()
            .map(|x| (x.action.to_string(), self.ids[x.to].clone(), x.cost))
            .collect())
    }

    /// Goal test role: id equality, or every predicate condition holding on
    /// the state's attributes.
    pub fn goal_test(&self, s: usize) -> Result<bool> {
        if s >= self.len() {
            return Err(Error::UnknownState(format!("#{s}")));
        }
        match &self.goal {
            GoalSpec::StateId { id } => Ok(self.ids[s] == *id),
            GoalSpec::Predicate { conditions } => {
                for (attr, want) in conditions {
                    match self.attrs[s].get(attr) {
                        None => {
                            return Err(Error::Predicate {
                                state: self.ids[s].clone(),
                                attr: attr.clone(),
                            })
                        }
                        Some(have) if have != want => return Ok(false),
                        Some(_) => {}
                    }
                }
                Ok(true)
            }
        }
    }

    pub fn goal_test_id(&self, id: &str) -> Result<bool> {
        self.goal_test(self.index_of(id)?)
    }

    /// States whose heuristic exceeds the true cost-to-goal. Cost-to-goal is
    /// computed by Dijkstra over reversed edges from every goal state; states
    /// that cannot reach a goal, or whose goal test errors, are not reported.
    pub fn heuristic_warnings(&self) -> Vec<String> {
        let Some(h) = &self.heuristic else {
            return Vec::new();
        };
        let n = self.len();
        let mut dist: Vec<Option<f64>> = vec![None; n];
        let mut done = vec![false; n];
        for (s, d) in dist.iter_mut().enumerate() {
            if matches!(self.goal_test(s), Ok(true)) {
                *d = Some(0.0);
            }
        }
        for _ in 0..n {
            let next = (0..n)
                .filter(|&s| !done[s] && dist[s].is_some())
                .min_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap());
            let Some(u) = next else { break };
            done[u] = true;
            let du = dist[u].unwrap();
            for e in self.edges.iter().filter(|e| e.to == u) {
                let cand = du + e.cost.to_f64();
                if dist[e.from].is_none_or(|d| cand < d) {
                    dist[e.from] = Some(cand);
                }
            }
        }
        (0..n)
            .filter_map(|s| {
                let d = dist[s]?;
                let hs = h[s].to_f64();
                (hs > d + 1e-9).then(|| {
                    format!(
                        "heuristic for `{}` is {hs} but the true cost to the goal is {d}",
                        self.ids[s]
                    )
                })
            })
            .collect()
    }
}
