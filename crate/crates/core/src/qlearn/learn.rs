use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::grid::{Action, Cell, GridSpec};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct QParams<T> {
    /// Learning rate: the share of the new target mixed into the estimate.
    pub alpha: T,
    /// Discount on the bootstrapped future value.
    pub gamma: T,
    /// A roll of `1..=explore_faces` on a `die_faces` die means explore.
    pub explore_faces: u32,
    pub die_faces: u32,
    /// Actions allowed per episode; `None` means width + height.
    pub step_budget: Option<usize>,
}

impl<T: Scalar> QParams<T> {
    pub fn new(alpha: T, gamma: T, explore_faces: u32, die_faces: u32) -> Result<Self> {
        let p = QParams {
            alpha,
            gamma,
            explore_faces,
            die_faces,
            step_budget: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: &T| *x >= T::zero() && *x <= T::one();
        if !unit(&self.alpha) {
            return Err(Error::domain(format!(
                "alpha {:?} outside [0, 1]",
                self.alpha
            )));
        }
        if !unit(&self.gamma) {
            return Err(Error::domain(format!(
                "gamma {:?} outside [0, 1]",
                self.gamma
            )));
        }
        if self.die_faces == 0 || self.explore_faces > self.die_faces {
            return Err(Error::domain(format!(
                "explore faces {} out of a {}-sided die",
                self.explore_faces, self.die_faces
            )));
        }
        if self.step_budget == Some(0) {
            return Err(Error::domain("step budget must be positive"));
        }
        Ok(())
    }

    pub fn budget(&self, grid: &GridSpec) -> usize {
        self.step_budget.unwrap_or_else(|| grid.default_budget())
    }
}

/// Action values for the non-terminal cells, one entry per available move.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable<T> {
    width: u32,
    rows: Vec<Option<Vec<(Action, T)>>>,
}

impl<T: Scalar> QTable<T> {
    pub fn zeros(grid: &GridSpec) -> Self {
        let rows = grid
            .cells()
            .map(|c| {
                (!grid.is_terminal(c)).then(|| {
                    grid.available_actions(c)
                        .into_iter()
                        .map(|a| (a, T::zero()))
                        .collect()
                })
            })
            .collect();
        QTable {
            width: grid.width(),
            rows,
        }
    }

    fn slot(&self, c: Cell) -> Option<usize> {
        (c.x < self.width)
            .then(|| (c.y * self.width + c.x) as usize)
            .filter(|&i| i < self.rows.len())
    }

    pub fn row(&self, c: Cell) -> Option<&[(Action, T)]> {
        self.slot(c).and_then(|i| self.rows[i].as_deref())
    }

    pub fn get(&self, c: Cell, a: Action) -> Option<&T> {
        self.row(c)?.iter().find(|(b, _)| *b == a).map(|(_, q)| q)
    }

    fn get_mut(&mut self, c: Cell, a: Action) -> Option<&mut T> {
        let i = self.slot(c)?;
        self.rows[i]
            .as_mut()?
            .iter_mut()
            .find(|(b, _)| *b == a)
            .map(|(_, q)| q)
    }

    pub fn set(&mut self, c: Cell, a: Action, value: T) -> Result<()> {
        *self
            .get_mut(c, a)
            .ok_or_else(|| Error::UnknownKey(format!("{c} {a}")))? = value;
        Ok(())
    }

    /// Row maximum and the first action attaining it in N,E,S,W order.
    pub fn best(&self, c: Cell) -> Option<(Action, T)> {
        let row = self.row(c)?;
        let mut best = row.first()?.clone();
        for (a, q) in &row[1..] {
            if *q > best.1 {
                best = (*a, q.clone());
            }
        }
        Some(best)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Cell, Action, &T)> {
        let w = self.width;
        self.rows.iter().enumerate().flat_map(move |(i, row)| {
            let c = Cell::new(i as u32 % w, i as u32 / w);
            row.iter().flatten().map(move |(a, q)| (c, *a, q))
        })
    }

    pub fn to_json(&self) -> Value {
        let mut out = Map::new();
        for (i, row) in self.rows.iter().enumerate() {
            let Some(row) = row else { continue };
            let c = Cell::new(i as u32 % self.width, i as u32 / self.width);
            let r: Map<String, Value> = row
                .iter()
                .map(|(a, q)| (a.to_string(), json!(q.to_f64())))
                .collect();
            out.insert(c.to_string(), Value::Object(r));
        }
        Value::Object(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Choice {
    pub action: Action,
    pub explored: bool,
    /// The explore/exploit roll.
    pub roll: u32,
    /// The second roll that picked the random move, when exploring.
    pub pick_roll: Option<u32>,
}

/// One die roll decides explore vs. exploit; exploring rolls again to pick
/// uniformly among the available moves, exploiting takes the first maximum.
pub fn select_action<T: Scalar>(
    q: &QTable<T>,
    s: Cell,
    params: &QParams<T>,
    rs: &mut RandomSource,
) -> Result<Choice> {
    let row = q.row(s).ok_or_else(|| Error::MissingRow(s.to_string()))?;
    let roll = rs.dice_roll(params.die_faces)?;
    if roll <= params.explore_faces {
        let pick = rs.dice_roll(row.len() as u32)?;
        Ok(Choice {
            action: row[pick as usize - 1].0,
            explored: true,
            roll,
            pick_roll: Some(pick),
        })
    } else {
        let (action, _) = q.best(s).expect("row is non-empty");
        Ok(Choice {
            action,
            explored: false,
            roll,
            pick_roll: None,
        })
    }
}

/// `Q(s,a) ← (1−α)·Q(s,a) + α·(r + γ·max Q(s',·))`, with no bootstrap from a
/// terminal `s'`. Returns the new value.
pub fn q_update<T: Scalar>(
    q: &mut QTable<T>,
    s: Cell,
    a: Action,
    reward: T,
    next: Cell,
    params: &QParams<T>,
    next_terminal: bool,
) -> Result<T> {
    let old = q
        .get(s, a)
        .cloned()
        .ok_or_else(|| Error::UnknownKey(format!("{s} {a}")))?;
    let future = if next_terminal {
        T::zero()
    } else {
        q.best(next)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::MissingRow(next.to_string()))?
    };
    let target = reward + params.gamma.clone() * future;
    let new = (T::one() - params.alpha.clone()) * old + params.alpha.clone() * target;
    q.set(s, a, new.clone())?;
    Ok(new)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord<T> {
    pub state: Cell,
    pub roll: u32,
    pub pick_roll: Option<u32>,
    pub explored: bool,
    pub action: Action,
    /// Set when slip replaced the chosen move.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slipped_to: Option<Action>,
    pub reward: T,
    pub next_state: Cell,
    pub q_before: T,
    pub q_after: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Terminal,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeLog<T> {
    pub start: Cell,
    pub steps: Vec<StepRecord<T>>,
    pub termination: Termination,
}

impl<T: Scalar> EpisodeLog<T> {
    /// Undiscounted sum of rewards collected.
    pub fn total_reward(&self) -> T {
        self.steps
            .iter()
            .fold(T::zero(), |acc, s| acc + s.reward.clone())
    }
}

/// First cell of an episode: the grid start, or a uniformly drawn
/// non-terminal cell when the grid asks for random starts.
pub fn episode_start(grid: &GridSpec, rs: &mut RandomSource) -> Result<Cell> {
    if !grid.random_start() {
        return Ok(grid.start());
    }
    let cells = grid.non_terminal_cells();
    let i = rs.dice_roll(cells.len() as u32)? as usize - 1;
    Ok(cells[i])
}

/// Executes a move, applying the grid's slip chance if it has one.
pub(crate) fn take_move<T: Scalar>(
    grid: &GridSpec,
    s: Cell,
    a: Action,
    rs: &mut RandomSource,
) -> Result<(Action, Option<Action>, Cell, T, bool)> {
    let mut actual = a;
    let mut slipped = None;
    if let Some(slip) = grid.slip() {
        if rs.dice_roll(slip.denominator)? <= slip.numerator {
            let moves = grid.available_actions(s);
            let pick = rs.dice_roll(moves.len() as u32)? as usize - 1;
            actual = moves[pick];
            slipped = Some(actual);
        }
    }
    let (next, r, done) = grid.env_step(s, actual)?;
    Ok((actual, slipped, next, r, done))
}

/// One select, move and update from `s`. Returns the record and whether the
/// move ended in a terminal cell.
pub fn q_step<T: Scalar>(
    grid: &GridSpec,
    q: &mut QTable<T>,
    params: &QParams<T>,
    s: Cell,
    rs: &mut RandomSource,
) -> Result<(StepRecord<T>, bool)> {
    let choice = select_action(q, s, params, rs)?;
    let (_, slipped_to, next, reward, done) = take_move::<T>(grid, s, choice.action, rs)?;
    let q_before = q
        .get(s, choice.action)
        .cloned()
        .expect("available action has an entry");
    let q_after = q_update(q, s, choice.action, reward.clone(), next, params, done)?;
    let record = StepRecord {
        state: s,
        roll: choice.roll,
        pick_roll: choice.pick_roll,
        explored: choice.explored,
        action: choice.action,
        slipped_to,
        reward,
        next_state: next,
        q_before,
        q_after,
    };
    Ok((record, done))
}

/// One pass through the maze: select, move, update, until a terminal cell or
/// the step budget. Budget exhaustion adds no extra update.
pub fn run_episode<T: Scalar>(
    grid: &GridSpec,
    q: &mut QTable<T>,
    params: &QParams<T>,
    rs: &mut RandomSource,
) -> Result<EpisodeLog<T>> {
    params.validate()?;
    let start = episode_start(grid, rs)?;
    let budget = params.budget(grid);
    let mut s = start;
    let mut steps = Vec::new();
    let mut termination = Termination::BudgetExhausted;
    while steps.len() < budget {
        let (step, done) = q_step(grid, q, params, s, rs)?;
        s = step.next_state;
        steps.push(step);
        if done {
            termination = Termination::Terminal;
            break;
        }
    }
    Ok(EpisodeLog {
        start,
        steps,
        termination,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput<T> {
    pub table: QTable<T>,
    /// `(k, table after k episodes)` for each requested index.
    pub snapshots: Vec<(usize, QTable<T>)>,
    pub returns: Vec<T>,
    pub episode_lengths: Vec<usize>,
    /// How often each cell was the state of a step.
    pub visits: BTreeMap<Cell, usize>,
}

/// Sequential episodes on one shared table.
pub fn train<T: Scalar>(
    grid: &GridSpec,
    params: &QParams<T>,
    n_episodes: usize,
    snapshot_at: &[usize],
    rs: &mut RandomSource,
) -> Result<TrainOutput<T>> {
    if n_episodes == 0 {
        return Err(Error::domain("need at least one episode"));
    }
    if let Some(k) = snapshot_at.iter().find(|&&k| k > n_episodes) {
        return Err(Error::domain(format!(
            "snapshot {k} is past the last episode {n_episodes}"
        )));
    }
    params.validate()?;
    let bound = (params.gamma < T::one()).then(|| {
        let r = grid
            .cells()
            .map(|c| T::from_f64(grid.info(c).reward.abs()))
            .fold(T::zero(), T::max_of);
        r / (T::one() - params.gamma.clone())
    });

    let mut table = QTable::zeros(grid);
    let mut snapshots = Vec::new();
    let mut returns = Vec::with_capacity(n_episodes);
    let mut episode_lengths = Vec::with_capacity(n_episodes);
    let mut visits = BTreeMap::new();
    for k in 0..=n_episodes {
        for _ in snapshot_at.iter().filter(|&&i| i == k) {
            snapshots.push((k, table.clone()));
        }
        if k == n_episodes {
            break;
        }
        let log = run_episode(grid, &mut table, params, rs)?;
        for step in &log.steps {
            *visits.entry(step.state).or_insert(0) += 1;
        }
        if let Some(bound) = &bound {
            debug_assert!(
                table.entries().all(|(_, _, q)| q.abs() <= bound.clone()),
                "Q-value escaped the R/(1-γ) bound"
            );
        }
        returns.push(log.total_reward());
        episode_lengths.push(log.steps.len());
    }
    Ok(TrainOutput {
        table,
        snapshots,
        returns,
        episode_lengths,
        visits,
    })
}

/// Per-cell argmax over the table with the N,E,S,W tie order.
pub fn greedy_policy<T: Scalar>(q: &QTable<T>, grid: &GridSpec) -> Result<BTreeMap<Cell, Action>> {
    grid.non_terminal_cells()
        .into_iter()
        .map(|c| {
            q.best(c)
                .map(|(a, _)| (c, a))
                .ok_or_else(|| Error::MissingRow(c.to_string()))
        })
        .collect()
}
