//! Red and Black Jack.
//!
//! The player draws from a Hit deck (red, black and face cards) or ends the
//! game by drawing once from a Stand deck. A face card busts. Standing scores
//! by the largest single-colour count in the final hand; drawing every
//! non-face card scores the jackpot.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::finite::{value_iteration, FiniteMdp, Outcome, Target, TerminalState, ViResult};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::scalar::{Prob, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HitDeck {
    pub red: u32,
    pub black: u32,
    pub face: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StandDeck {
    pub red: u32,
    pub black: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreTable {
    pub bust: f64,
    pub by_max_count: BTreeMap<u32, f64>,
    pub jackpot: f64,
}

/// What happens once every non-face card is in the player's hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JackpotRule {
    /// The full hand is still a decision state; hitting from it pays the
    /// jackpot, standing draws from the stand deck as usual.
    HitOnEmptyDeck,
    /// Completing the hand pays the jackpot immediately.
    AutoOnFullHand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeckConfig {
    pub hit_deck: HitDeck,
    pub stand_deck: StandDeck,
    pub scores: ScoreTable,
    pub jackpot_rule: JackpotRule,
}

impl Default for DeckConfig {
    fn default() -> Self {
        DeckConfig {
            hit_deck: HitDeck {
                red: 2,
                black: 2,
                face: 1,
            },
            stand_deck: StandDeck { red: 1, black: 1 },
            scores: ScoreTable {
                bust: -5.0,
                by_max_count: [(1, 1.0), (2, 5.0), (3, 15.0)].into_iter().collect(),
                jackpot: 30.0,
            },
            jackpot_rule: JackpotRule::HitOnEmptyDeck,
        }
    }
}

pub const HIT: &str = "Hit";
pub const STAND: &str = "Stand";
pub const BUST: &str = "Bust";
pub const JACKPOT: &str = "Jackpot";

/// Terminal name for a stand that ends with `count` cards of one colour.
pub fn count_terminal_name(count: u32) -> String {
    match count {
        1 => "Single".into(),
        2 => "Double".into(),
        3 => "Triple".into(),
        4 => "Quadruple".into(),
        k => format!("Max{k}"),
    }
}

pub fn state_name(r: u32, b: u32) -> String {
    format!("({r},{b})")
}

pub fn parse_state_name(s: &str) -> Option<(u32, u32)> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let (r, b) = inner.split_once(',')?;
    Some((r.trim().parse().ok()?, b.trim().parse().ok()?))
}

impl DeckConfig {
    pub fn validate(&self) -> Result<()> {
        let h = &self.hit_deck;
        if h.face < 1 || h.red < 1 || h.black < 1 {
            return Err(Error::InvalidDeck(
                "hit deck needs at least one red, one black and one face card".into(),
            ));
        }
        if self.stand_deck.red + self.stand_deck.black < 1 {
            return Err(Error::InvalidDeck("stand deck is empty".into()));
        }
        let all_finite = [self.scores.bust, self.scores.jackpot]
            .iter()
            .chain(self.scores.by_max_count.values())
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidDeck("scores must be finite".into()));
        }
        for k in self.achievable_counts() {
            if !self.scores.by_max_count.contains_key(&k) {
                return Err(Error::InvalidDeck(format!(
                    "score table has no entry for a stand with max count {k}"
                )));
            }
        }
        Ok(())
    }

    fn is_full(&self, r: u32, b: u32) -> bool {
        r == self.hit_deck.red && b == self.hit_deck.black
    }

    /// Card-count pairs where the player still chooses, in row-major order.
    pub fn decision_states(&self) -> Vec<(u32, u32)> {
        let mut v = Vec::new();
        for r in 0..=self.hit_deck.red {
            for b in 0..=self.hit_deck.black {
                if self.jackpot_rule == JackpotRule::AutoOnFullHand && self.is_full(r, b) {
                    continue;
                }
                v.push((r, b));
            }
        }
        v
    }

    /// Max counts a Stand can end with.
    pub fn achievable_counts(&self) -> Vec<u32> {
        let mut counts: Vec<u32> = self
            .decision_states()
            .into_iter()
            .flat_map(|(r, b)| {
                let red = (self.stand_deck.red > 0).then(|| (r + 1).max(b));
                let black = (self.stand_deck.black > 0).then(|| r.max(b + 1));
                red.into_iter().chain(black)
            })
            .collect();
        counts.sort_unstable();
        counts.dedup();
        counts
    }

    /// Stand outcome for a hand: `(max count, probability)` pairs.
    fn stand_outcomes(&self, r: u32, b: u32) -> Vec<(u32, Prob)> {
        let total = (self.stand_deck.red + self.stand_deck.black) as u64;
        let mut out: Vec<(u32, Prob)> = Vec::new();
        let mut add = |k: u32, p: Prob| {
            if *p.numer() == 0 {
                return;
            }
            match out.iter_mut().find(|(c, _)| *c == k) {
                Some((_, q)) => *q += p,
                None => out.push((k, p)),
            }
        };
        add((r + 1).max(b), Prob::new(self.stand_deck.red as u64, total));
        add(r.max(b + 1), Prob::new(self.stand_deck.black as u64, total));
        out
    }

    /// Apply a `path=value` edit such as `scores.jackpot=300` or
    /// `hit_deck.face=2`. Values are JSON literals; bare words are strings.
    pub fn with_edit(&self, edit: &str) -> Result<DeckConfig> {
        let (path, raw) = edit
            .split_once('=')
            .ok_or_else(|| Error::domain(format!("edit `{edit}` is not of the form path=value")))?;
        let value: Value = serde_json::from_str(raw.trim())
            .unwrap_or_else(|_| Value::String(raw.trim().to_string()));
        let mut doc = serde_json::to_value(self).expect("deck config serializes");
        let mut cursor = &mut doc;
        for part in path.trim().split('.') {
            cursor = cursor
                .as_object_mut()
                .and_then(|o| {
                    if !o.contains_key(part) && path.starts_with("scores.by_max_count.") {
                        o.insert(part.to_string(), Value::Null);
                    }
                    o.get_mut(part)
                })
                .ok_or_else(|| Error::domain(format!("unknown deck field `{path}`")))?;
        }
        *cursor = value;
        let edited: DeckConfig = serde_json::from_value(doc)
            .map_err(|e| Error::domain(format!("edit `{edit}`: {e}")))?;
        edited.validate()?;
        Ok(edited)
    }
}

/// Compile a deck into an exact MDP. States are named `(r,b)`; terminals are
/// Bust, one per achievable stand count, then Jackpot.
pub fn build_rbj_mdp<T: Scalar>(deck: &DeckConfig, discount: T) -> Result<FiniteMdp<T>> {
    deck.validate()?;
    let states = deck.decision_states();
    let index: BTreeMap<(u32, u32), usize> =
        states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let counts = deck.achievable_counts();

    let mut terminals = vec![TerminalState {
        id: BUST.to_string(),
        reward: T::from_f64(deck.scores.bust),
    }];
    for k in &counts {
        terminals.push(TerminalState {
            id: count_terminal_name(*k),
            reward: T::from_f64(deck.scores.by_max_count[k]),
        });
    }
    terminals.push(TerminalState {
        id: JACKPOT.to_string(),
        reward: T::from_f64(deck.scores.jackpot),
    });
    let bust = 0;
    let jackpot = terminals.len() - 1;
    let count_terminal = |k: u32| {
        1 + counts
            .iter()
            .position(|c| *c == k)
            .expect("count is achievable")
    };
    let terminal = |t: usize, p: Prob| Outcome {
        target: Target::Terminal(t),
        prob: p,
        reward: terminals[t].reward.clone(),
    };

    let h = deck.hit_deck;
    let mut transitions = Vec::with_capacity(states.len());
    for &(r, b) in &states {
        let remaining_red = (h.red - r) as u64;
        let remaining_black = (h.black - b) as u64;
        let n = remaining_red + remaining_black + h.face as u64;

        let mut hit = Vec::new();
        if remaining_red + remaining_black == 0 {
            hit.push(terminal(jackpot, Prob::from_integer(1)));
        } else {
            for (count, next) in [(remaining_red, (r + 1, b)), (remaining_black, (r, b + 1))] {
                if count == 0 {
                    continue;
                }
                let p = Prob::new(count, n);
                match index.get(&next) {
                    Some(&j) => hit.push(Outcome {
                        target: Target::State(j),
                        prob: p,
                        reward: T::zero(),
                    }),
                    None => hit.push(terminal(jackpot, p)),
                }
            }
            hit.push(terminal(bust, Prob::new(h.face as u64, n)));
        }

        let stand = deck
            .stand_outcomes(r, b)
            .into_iter()
            .map(|(k, p)| terminal(count_terminal(k), p))
            .collect();
        transitions.push(vec![hit, stand]);
    }

    FiniteMdp::new(
        states.iter().map(|&(r, b)| state_name(r, b)).collect(),
        terminals,
        vec![vec![HIT.to_string(), STAND.to_string()]; states.len()],
        transitions,
        discount,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Card {
    Red,
    Black,
    Face,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RbjAction {
    Hit,
    Stand,
}

impl RbjAction {
    pub fn name(self) -> &'static str {
        match self {
            RbjAction::Hit => HIT,
            RbjAction::Stand => STAND,
        }
    }
}

impl fmt::Display for RbjAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RbjAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hit" | "h" => Ok(RbjAction::Hit),
            "stand" | "s" => Ok(RbjAction::Stand),
            other => Err(Error::domain(format!("unknown action `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameEvent {
    Decision { state: String, action: RbjAction },
    Draw { pile: String, card: Card },
    End { terminal: String, score: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub terminal: String,
    pub score: f64,
    pub log: Vec<GameEvent>,
}

/// One game in progress. Both piles are shuffled when the game starts; the
/// order is the dealer's hidden information.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RbjGame {
    deck: DeckConfig,
    hit_pile: Vec<Card>,
    stand_pile: Vec<Card>,
    red: u32,
    black: u32,
    log: Vec<GameEvent>,
    outcome: Option<(String, f64)>,
}

fn shuffled(mut cards: Vec<Card>, rs: &mut RandomSource) -> Vec<Card> {
    for i in (1..cards.len()).rev() {
        let j = rs.below(i as u64 + 1) as usize;
        cards.swap(i, j);
    }
    cards
}

impl RbjGame {
    pub fn new(deck: &DeckConfig, rs: &mut RandomSource) -> Result<Self> {
        deck.validate()?;
        let h = deck.hit_deck;
        let hit: Vec<Card> = std::iter::repeat_n(Card::Red, h.red as usize)
            .chain(std::iter::repeat_n(Card::Black, h.black as usize))
            .chain(std::iter::repeat_n(Card::Face, h.face as usize))
            .collect();
        let stand: Vec<Card> = std::iter::repeat_n(Card::Red, deck.stand_deck.red as usize)
            .chain(std::iter::repeat_n(
                Card::Black,
                deck.stand_deck.black as usize,
            ))
            .collect();
        Ok(RbjGame {
            deck: deck.clone(),
            hit_pile: shuffled(hit, rs),
            stand_pile: shuffled(stand, rs),
            red: 0,
            black: 0,
            log: Vec::new(),
            outcome: None,
        })
    }

    pub fn hand(&self) -> (u32, u32) {
        (self.red, self.black)
    }

    pub fn state_name(&self) -> String {
        state_name(self.red, self.black)
    }

    pub fn is_over(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn outcome(&self) -> Option<(&str, f64)> {
        self.outcome.as_ref().map(|(t, s)| (t.as_str(), *s))
    }

    pub fn log(&self) -> &[GameEvent] {
        &self.log
    }

    /// Hidden pile order, top card last.
    pub fn hit_pile(&self) -> &[Card] {
        &self.hit_pile
    }

    pub fn stand_pile(&self) -> &[Card] {
        &self.stand_pile
    }

    fn finish(&mut self, terminal: String, score: f64) {
        self.log.push(GameEvent::End {
            terminal: terminal.clone(),
            score,
        });
        self.outcome = Some((terminal, score));
    }

    /// Play one decision; returns the events it produced.
    pub fn act(&mut self, action: RbjAction) -> Result<Vec<GameEvent>> {
        if let Some((t, _)) = &self.outcome {
            return Err(Error::GameOver(t.clone()));
        }
        let start = self.log.len();
        self.log.push(GameEvent::Decision {
            state: self.state_name(),
            action,
        });
        match action {
            RbjAction::Hit => {
                let full =
                    self.deck.hit_deck.red == self.red && self.deck.hit_deck.black == self.black;
                let card = self
                    .hit_pile
                    .pop()
                    .expect("hit pile holds at least the face cards");
                self.log.push(GameEvent::Draw {
                    pile: "hit".into(),
                    card,
                });
                if full {
                    self.finish(JACKPOT.into(), self.deck.scores.jackpot);
                } else {
                    match card {
                        Card::Face => self.finish(BUST.into(), self.deck.scores.bust),
                        Card::Red => self.red += 1,
                        Card::Black => self.black += 1,
                    }
                    let now_full = self.deck.hit_deck.red == self.red
                        && self.deck.hit_deck.black == self.black;
                    if !self.is_over()
                        && now_full
                        && self.deck.jackpot_rule == JackpotRule::AutoOnFullHand
                    {
                        self.finish(JACKPOT.into(), self.deck.scores.jackpot);
                    }
                }
            }
            RbjAction::Stand => {
                let card = self.stand_pile.pop().expect("stand deck is non-empty");
                self.log.push(GameEvent::Draw {
                    pile: "stand".into(),
                    card,
                });
                let (r, b) = match card {
                    Card::Red => (self.red + 1, self.black),
                    _ => (self.red, self.black + 1),
                };
                let k = r.max(b);
                let score = self.deck.scores.by_max_count[&k];
                self.finish(count_terminal_name(k), score);
            }
        }
        Ok(self.log[start..].to_vec())
    }

    /// The state or terminal the last decision led to.
    pub fn position_name(&self) -> String {
        match &self.outcome {
            Some((t, _)) => t.clone(),
            None => self.state_name(),
        }
    }
}

/// Supplies decisions for a simulated game.
pub trait Chooser {
    fn choose(&mut self, state: (u32, u32), rs: &mut RandomSource) -> Result<RbjAction>;
}

/// Follows a fixed state → action table.
pub struct PolicyChooser(pub BTreeMap<(u32, u32), RbjAction>);

impl PolicyChooser {
    pub fn from_vi<T: Scalar>(mdp: &FiniteMdp<T>, vi: &ViResult<T>) -> Self {
        PolicyChooser(
            mdp.states()
                .iter()
                .enumerate()
                .filter_map(|(s, name)| {
                    let act = mdp.actions(s)[vi.policy[s]].parse().ok()?;
                    Some((parse_state_name(name)?, act))
                })
                .collect(),
        )
    }
}

impl Chooser for PolicyChooser {
    fn choose(&mut self, state: (u32, u32), _rs: &mut RandomSource) -> Result<RbjAction> {
        self.0
            .get(&state)
            .copied()
            .ok_or_else(|| Error::MissingValue(state_name(state.0, state.1)))
    }
}

/// Plays a scripted action list; stands once the script runs out.
pub struct ScriptedChooser {
    script: Vec<RbjAction>,
    next: usize,
}

impl ScriptedChooser {
    pub fn new(script: Vec<RbjAction>) -> Self {
        ScriptedChooser { script, next: 0 }
    }
}

impl Chooser for ScriptedChooser {
    fn choose(&mut self, _state: (u32, u32), _rs: &mut RandomSource) -> Result<RbjAction> {
        let a = self
            .script
            .get(self.next)
            .copied()
            .unwrap_or(RbjAction::Stand);
        self.next += 1;
        Ok(a)
    }
}

/// Coin flip between Hit and Stand (one two-sided roll per decision).
pub struct ExploringChooser;

impl Chooser for ExploringChooser {
    fn choose(&mut self, _state: (u32, u32), rs: &mut RandomSource) -> Result<RbjAction> {
        Ok(if rs.dice_roll(2)? == 1 {
            RbjAction::Hit
        } else {
            RbjAction::Stand
        })
    }
}

pub fn simulate_rbj_game(
    deck: &DeckConfig,
    chooser: &mut dyn Chooser,
    rs: &mut RandomSource,
) -> Result<GameOutcome> {
    let mut game = RbjGame::new(deck, rs)?;
    while !game.is_over() {
        let action = chooser.choose(game.hand(), rs)?;
        game.act(action)?;
    }
    let (terminal, score) = game.outcome().expect("game finished");
    Ok(GameOutcome {
        terminal: terminal.to_string(),
        score,
        log: game.log,
    })
}

/// Observed successor counts for one `(state, action)` pair.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TransitionCounts {
    pub visits: u64,
    pub successors: BTreeMap<String, u64>,
}

impl TransitionCounts {
    pub fn frequency(&self, successor: &str) -> f64 {
        self.successors.get(successor).copied().unwrap_or(0) as f64 / self.visits as f64
    }
}

/// Empirical transition model from `n_games` exploratory games. Pairs never
/// tried are absent from the map.
pub fn estimate_transitions(
    deck: &DeckConfig,
    n_games: usize,
    rs: &mut RandomSource,
) -> Result<BTreeMap<(String, String), TransitionCounts>> {
    if n_games == 0 {
        return Err(Error::domain("need at least one game"));
    }
    let mut counts: BTreeMap<(String, String), TransitionCounts> = BTreeMap::new();
    let mut chooser = ExploringChooser;
    for _ in 0..n_games {
        let mut game = RbjGame::new(deck, rs)?;
        while !game.is_over() {
            let from = game.state_name();
            let action = chooser.choose(game.hand(), rs)?;
            game.act(action)?;
            let entry = counts.entry((from, action.name().to_string())).or_default();
            entry.visits += 1;
            *entry.successors.entry(game.position_name()).or_default() += 1;
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyChange {
    pub state: String,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone)]
pub struct Perturbation<T> {
    pub baseline_deck: DeckConfig,
    pub edited_deck: DeckConfig,
    pub baseline: (FiniteMdp<T>, ViResult<T>),
    pub edited: (FiniteMdp<T>, ViResult<T>),
    /// States present in both models whose greedy action changed.
    pub policy_diff: Vec<PolicyChange>,
    /// `(state, baseline value, edited value)` for states in both models.
    pub value_diff: Vec<(String, T, T)>,
}

pub fn solve_rbj<T: Scalar>(
    deck: &DeckConfig,
    discount: T,
    tol: T,
) -> Result<(FiniteMdp<T>, ViResult<T>)> {
    let mdp = build_rbj_mdp(deck, discount)?;
    let sweeps = mdp.states().len() + 2;
    let vi = value_iteration(&mdp, tol, sweeps)?;
    Ok((mdp, vi))
}

pub fn perturb_and_resolve<T: Scalar>(
    deck: &DeckConfig,
    edits: &[String],
    discount: T,
    tol: T,
) -> Result<Perturbation<T>> {
    let mut edited_deck = deck.clone();
    for e in edits {
        edited_deck = edited_deck.with_edit(e)?;
    }
    let baseline = solve_rbj(deck, discount.clone(), tol.clone())?;
    let edited = solve_rbj(&edited_deck, discount, tol)?;
    let mut policy_diff = Vec::new();
    let mut value_diff = Vec::new();
    for (s, name) in baseline.0.states().iter().enumerate() {
        let Some(t) = edited.0.state_index(name) else {
            continue;
        };
        let before = &baseline.0.actions(s)[baseline.1.policy[s]];
        let after = &edited.0.actions(t)[edited.1.policy[t]];
        if before != after {
            policy_diff.push(PolicyChange {
                state: name.clone(),
                before: before.clone(),
                after: after.clone(),
            });
        }
        value_diff.push((
            name.clone(),
            baseline.1.values[s].clone(),
            edited.1.values[t].clone(),
        ));
    }
    Ok(Perturbation {
        baseline_deck: deck.clone(),
        edited_deck,
        baseline,
        edited,
        policy_diff,
        value_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn p(mdp: &FiniteMdp<f64>, from: &str, action: &str, to: &str) -> Prob {
        let s = mdp.state_index(from).unwrap();
        let a = mdp.actions(s).iter().position(|x| x == action).unwrap();
        mdp.outcomes(s, a)
            .iter()
            .filter(|o| mdp.target_name(o.target) == to)
            .map(|o| o.prob)
            .sum()
    }

    #[test]
    fn default_deck_shape() {
        let mdp = build_rbj_mdp(&DeckConfig::default(), 1.0).unwrap();
        assert_eq!(mdp.states().len(), 9);
        let names: Vec<&str> = mdp.terminals().iter().map(|t| t.id.as_str()).collect();
        assert_eq!(names, ["Bust", "Single", "Double", "Triple", "Jackpot"]);
    }

    #[test]
    fn default_deck_transition_examples() {
        let mdp = build_rbj_mdp(&DeckConfig::default(), 1.0).unwrap();
        assert_eq!(p(&mdp, "(0,0)", HIT, "(1,0)"), Prob::new(2, 5));
        assert_eq!(p(&mdp, "(0,0)", HIT, BUST), Prob::new(1, 5));
        assert_eq!(p(&mdp, "(2,1)", HIT, BUST), Prob::new(1, 2));
        assert_eq!(p(&mdp, "(1,1)", STAND, "Double"), Prob::from_integer(1));
        assert_eq!(p(&mdp, "(2,2)", HIT, JACKPOT), Prob::from_integer(1));
        assert_eq!(p(&mdp, "(2,2)", STAND, "Triple"), Prob::from_integer(1));
    }

    #[test]
    fn auto_rule_drops_the_full_hand() {
        let deck = DeckConfig {
            jackpot_rule: JackpotRule::AutoOnFullHand,
            ..DeckConfig::default()
        };
        let mdp = build_rbj_mdp(&deck, 1.0).unwrap();
        assert_eq!(mdp.states().len(), 8);
        assert!(mdp.state_index("(2,2)").is_none());
        assert_eq!(p(&mdp, "(2,1)", HIT, JACKPOT), Prob::new(1, 2));
        assert_eq!(mdp.terminals().len(), 5);
    }

    #[test]
    fn invalid_decks() {
        let mut deck = DeckConfig::default();
        deck.hit_deck.face = 0;
        assert_eq!(
            build_rbj_mdp(&deck, 1.0).unwrap_err().code(),
            "invalid_deck"
        );
        let mut deck = DeckConfig::default();
        deck.hit_deck.red = 3;
        assert!(deck
            .validate()
            .unwrap_err()
            .to_string()
            .contains("max count 4"));
        let deck = DeckConfig::default()
            .with_edit("hit_deck.red=3")
            .err()
            .unwrap();
        assert_eq!(deck.code(), "invalid_deck");
        let ok = DeckConfig::default()
            .with_edit("scores.by_max_count.4=40")
            .unwrap();
        let ok = ok.with_edit("hit_deck.red=3").unwrap();
        assert_eq!(build_rbj_mdp(&ok, 1.0).unwrap().states().len(), 12);
    }

    #[test]
    fn exact_values() {
        let (mdp, vi) = solve_rbj(
            &DeckConfig::default(),
            BigRational::from_integer(1.into()),
            BigRational::new(1.into(), 1_000_000_000.into()),
        )
        .unwrap();
        let five = BigRational::from_integer(5.into());
        assert_eq!(vi.q_of(&mdp, "(1,1)", STAND), Some(&five));
        assert!(vi.iterations_to_converge <= 6);
    }

    #[test]
    fn stand_first_is_a_single() {
        for seed in 0..20 {
            let mut rs = RandomSource::new(seed);
            let out = simulate_rbj_game(
                &DeckConfig::default(),
                &mut ScriptedChooser::new(vec![RbjAction::Stand]),
                &mut rs,
            )
            .unwrap();
            assert_eq!(out.terminal, "Single");
            assert_eq!(out.score, 1.0);
        }
    }

    #[test]
    fn five_hits_without_early_bust_is_a_jackpot() {
        let mut seen = 0;
        for seed in 0..200 {
            let mut rs = RandomSource::new(seed);
            let mut chooser = ScriptedChooser::new(vec![RbjAction::Hit; 5]);
            let out = simulate_rbj_game(&DeckConfig::default(), &mut chooser, &mut rs).unwrap();
            let early_face = out
                .log
                .iter()
                .filter_map(|e| match e {
                    GameEvent::Draw { card, .. } => Some(*card),
                    _ => None,
                })
                .take(4)
                .any(|c| c == Card::Face);
            if !early_face {
                seen += 1;
                assert_eq!(out.terminal, JACKPOT);
                assert_eq!(out.score, 30.0);
            } else {
                assert_eq!(out.terminal, BUST);
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn acting_after_the_end_fails() {
        let mut rs = RandomSource::new(1);
        let mut game = RbjGame::new(&DeckConfig::default(), &mut rs).unwrap();
        game.act(RbjAction::Stand).unwrap();
        assert_eq!(game.act(RbjAction::Hit).unwrap_err().code(), "game_over");
    }

    #[test]
    fn single_game_estimates_are_zero_or_one() {
        let mut rs = RandomSource::new(4);
        let est = estimate_transitions(&DeckConfig::default(), 1, &mut rs).unwrap();
        for c in est.values() {
            for succ in c.successors.keys() {
                let f = c.frequency(succ);
                assert!(f == 0.0 || f == 1.0);
            }
        }
        assert!(estimate_transitions(&DeckConfig::default(), 0, &mut rs).is_err());
    }

    #[test]
    fn identity_edit_changes_nothing() {
        let r = perturb_and_resolve(
            &DeckConfig::default(),
            &["scores.jackpot=30".into()],
            1.0,
            1e-9,
        )
        .unwrap();
        assert!(r.policy_diff.is_empty());
        assert!(r.value_diff.iter().all(|(_, a, b)| a == b));
    }

    #[test]
    fn malformed_edits() {
        let d = DeckConfig::default();
        assert!(d.with_edit("scores.jackpot").is_err());
        assert!(d.with_edit("scores.nope=1").is_err());
        assert!(d.with_edit("jackpot_rule=sometimes").is_err());
        assert_eq!(
            d.with_edit("jackpot_rule=auto_on_full_hand")
                .unwrap()
                .jackpot_rule,
            JackpotRule::AutoOnFullHand
        );
    }

    #[test]
    fn state_names() {
        assert_eq!(parse_state_name("(2,1)"), Some((2, 1)));
        assert_eq!(parse_state_name("2,1"), None);
        assert_eq!(state_name(0, 3), "(0,3)");
    }
}
