use serde::{Deserialize, Serialize};

use super::filter::{filter_step, Belief, Evidence};
use super::map::{HmmModel, MapSpec};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Spy transition then observation, both sampled from the model.
pub fn spy_step(model: &HmmModel, current: usize, rs: &mut RandomSource) -> Result<(usize, usize)> {
    let next = rs.sample_index(model.transition_row(current).iter().copied())?;
    let region = rs.sample_index(model.observation_row(next).iter().copied())?;
    Ok((next, region))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HunterAction {
    Move { to: String },
    Stay,
    Capture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    Running,
    Captured,
    Evaded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    AwaitSpy,
    AwaitHunter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    /// Hidden side: where the spy landed this round.
    pub spy_city: String,
    pub observation: String,
    pub hunter_action: Option<HunterAction>,
    /// Hunter position after the action.
    pub hunter_city: Option<String>,
    /// `Some(true)` on a successful capture, `Some(false)` on a miss.
    pub capture: Option<bool>,
}

/// Full game state, including the hidden spy position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoSpiesState {
    pub rounds: u32,
    pub round: u32,
    pub spy_city: String,
    pub hunter_city: String,
    pub phase: Phase,
    pub status: GameStatus,
    pub history: Vec<RoundRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HunterRound {
    pub round: u32,
    pub observation: String,
    pub hunter_action: Option<HunterAction>,
    pub hunter_city: Option<String>,
    pub capture: Option<bool>,
}

/// What the hunter is allowed to see.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HunterView {
    pub rounds: u32,
    pub round: u32,
    pub hunter_city: String,
    pub phase: Phase,
    pub status: GameStatus,
    pub history: Vec<HunterRound>,
}

impl TwoSpiesState {
    /// Start a game with the spy placed uniformly at random.
    pub fn new(map: &MapSpec, rs: &mut RandomSource) -> Self {
        let spy = rs.below(map.len() as u64) as usize;
        Self::with_spy_at(map, spy)
    }

    pub fn with_spy_at(map: &MapSpec, spy: usize) -> Self {
        TwoSpiesState {
            rounds: map.rounds(),
            round: 0,
            spy_city: map.city_id(spy).to_string(),
            hunter_city: map.city_id(map.hunter_start()).to_string(),
            phase: Phase::AwaitSpy,
            status: GameStatus::Running,
            history: Vec::new(),
        }
    }

    fn ensure_running(&self) -> Result<()> {
        match self.status {
            GameStatus::Running => Ok(()),
            GameStatus::Captured => Err(Error::GameOver("spy already captured".into())),
            GameStatus::Evaded => Err(Error::GameOver("spy already evaded".into())),
        }
    }

    fn ensure_phase(&self, phase: Phase) -> Result<()> {
        self.ensure_running()?;
        if self.phase != phase {
            let who = match self.phase {
                Phase::AwaitSpy => "spy",
                Phase::AwaitHunter => "hunter",
            };
            return Err(Error::IllegalMove(format!("waiting for the {who}")));
        }
        Ok(())
    }

    /// Sample the spy's move and report; returns (city, region).
    pub fn spy_turn(
        &mut self,
        map: &MapSpec,
        model: &HmmModel,
        rs: &mut RandomSource,
    ) -> Result<(String, String)> {
        self.ensure_phase(Phase::AwaitSpy)?;
        let current = map.city_index(&self.spy_city)?;
        let (next, region) = spy_step(model, current, rs)?;
        let out = (
            map.city_id(next).to_string(),
            model.regions()[region].clone(),
        );
        self.record_spy(out.0.clone(), out.1.clone());
        Ok(out)
    }

    /// A spy move chosen by a player rather than the dice. The move and the
    /// report must both have positive probability under the model.
    pub fn spy_turn_with(
        &mut self,
        map: &MapSpec,
        model: &HmmModel,
        to: &str,
        report: &str,
    ) -> Result<()> {
        self.ensure_phase(Phase::AwaitSpy)?;
        let current = map.city_index(&self.spy_city)?;
        let next = map.city_index(to)?;
        if *model.transition_row(current)[next].numer() == 0 {
            return Err(Error::IllegalMove(format!(
                "spy cannot move from {} to {to}",
                self.spy_city
            )));
        }
        let region = model.region_index(report)?;
        if *model.observation_row(next)[region].numer() == 0 {
            return Err(Error::IllegalMove(format!(
                "{to} cannot report region {report}"
            )));
        }
        self.record_spy(to.to_string(), report.to_string());
        Ok(())
    }

    fn record_spy(&mut self, city: String, observation: String) {
        self.round += 1;
        self.spy_city = city.clone();
        self.history.push(RoundRecord {
            round: self.round,
            spy_city: city,
            observation,
            hunter_action: None,
            hunter_city: None,
            capture: None,
        });
        self.phase = Phase::AwaitHunter;
    }

    /// Apply the hunter's move, stay or capture for the current round.
    pub fn hunter_act(&mut self, map: &MapSpec, action: &HunterAction) -> Result<()> {
        self.ensure_phase(Phase::AwaitHunter)?;
        let mut capture = None;
        match action {
            HunterAction::Move { to } => {
                let from = map.city_index(&self.hunter_city)?;
                let to_idx = map
                    .city_index(to)
                    .map_err(|_| Error::IllegalMove(format!("unknown city `{to}`")))?;
                if !map.is_adjacent(from, to_idx) {
                    return Err(Error::IllegalMove(format!(
                        "{to} is not adjacent to {}",
                        self.hunter_city
                    )));
                }
                self.hunter_city = to.clone();
            }
            HunterAction::Stay => {}
            HunterAction::Capture => {
                let hit = self.hunter_city == self.spy_city;
                capture = Some(hit);
                if hit {
                    self.status = GameStatus::Captured;
                }
            }
        }
        let rec = self.history.last_mut().expect("spy turn recorded");
        rec.hunter_action = Some(action.clone());
        rec.hunter_city = Some(self.hunter_city.clone());
        rec.capture = capture;
        self.phase = Phase::AwaitSpy;
        if self.status == GameStatus::Running && self.round >= self.rounds {
            self.status = GameStatus::Evaded;
        }
        Ok(())
    }

    /// A full round: spy transition and observation, then the hunter action.
    /// The action is checked before any dice are rolled.
    pub fn hunter_apply(
        &mut self,
        map: &MapSpec,
        model: &HmmModel,
        action: &HunterAction,
        rs: &mut RandomSource,
    ) -> Result<()> {
        self.ensure_phase(Phase::AwaitSpy)?;
        if let HunterAction::Move { to } = action {
            let from = map.city_index(&self.hunter_city)?;
            match map.city_index(to) {
                Ok(t) if map.is_adjacent(from, t) => {}
                _ => {
                    return Err(Error::IllegalMove(format!(
                        "{to} is not adjacent to {}",
                        self.hunter_city
                    )))
                }
            }
        }
        self.spy_turn(map, model, rs)?;
        self.hunter_act(map, action)
    }

    /// Evidence the hunter has gathered, one entry per round with a
    /// completed spy turn.
    pub fn evidence(&self) -> Vec<Evidence> {
        self.history
            .iter()
            .map(|r| Evidence {
                observation: r.observation.clone(),
                failed_capture_at: match r.capture {
                    Some(false) => r.hunter_city.clone(),
                    _ => None,
                },
            })
            .collect()
    }

    pub fn hunter_view(&self) -> HunterView {
        HunterView {
            rounds: self.rounds,
            round: self.round,
            hunter_city: self.hunter_city.clone(),
            phase: self.phase,
            status: self.status,
            history: self
                .history
                .iter()
                .map(|r| HunterRound {
                    round: r.round,
                    observation: r.observation.clone(),
                    hunter_action: r.hunter_action.clone(),
                    hunter_city: r.hunter_city.clone(),
                    capture: r.capture,
                })
                .collect(),
        }
    }
}

/// Hunter heuristic used for seeded demo games: capture when the current
/// city holds at least half the largest belief mass, otherwise step toward
/// the most likely city.
pub fn greedy_hunter_action(
    map: &MapSpec,
    hunter_city: &str,
    belief: &Belief<f64>,
) -> Result<HunterAction> {
    let here = map.city_index(hunter_city)?;
    let target = belief.argmax();
    let best = *belief.get(target);
    if *belief.get(here) * 2.0 >= best {
        return Ok(HunterAction::Capture);
    }
    let Some(d_here) = map.hops_from(here)[target] else {
        return Ok(HunterAction::Stay);
    };
    let step = map
        .neighbors(here)
        .iter()
        .filter_map(|&n| map.hops_from(n)[target].map(|d| (d, n)))
        .min_by_key(|&(d, _)| d);
    Ok(match step {
        Some((d, n)) if d < d_here => HunterAction::Move {
            to: map.city_id(n).to_string(),
        },
        _ => HunterAction::Stay,
    })
}

/// Play a whole game with the spy driven by the dice and the hunter by
/// [`greedy_hunter_action`] over the exact filter.
pub fn play_greedy_game(
    map: &MapSpec,
    model: &HmmModel,
    rs: &mut RandomSource,
) -> Result<TwoSpiesState> {
    let mut state = TwoSpiesState::new(map, rs);
    let mut belief = Belief::<f64>::uniform(map.len());
    while state.status == GameStatus::Running {
        state.spy_turn(map, model, rs)?;
        let obs = state
            .history
            .last()
            .expect("round recorded")
            .observation
            .clone();
        belief = filter_step(&belief, model, &obs, None)?;
        let action = greedy_hunter_action(map, &state.hunter_city, &belief)?;
        state.hunter_act(map, &action)?;
        if let Some(e) = state.evidence().last() {
            if let Some(c) = &e.failed_capture_at {
                belief = super::filter::exclude(&belief, model, c)?;
            }
        }
    }
    Ok(state)
}
