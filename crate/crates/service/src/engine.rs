//! Session engines: thin state machines over the core activity engines.
//! Every random draw goes through the session's single `RandomSource`, so a
//! session is a pure function of its scenario, seed and action sequence.

use std::collections::BTreeSet;

use ai_lab_core::hmm::{
    brute_force_posterior, build_hmm, correct, exclude, predict, Belief, GameStatus, HmmModel,
    HunterAction, MapSpec, TwoSpiesState,
};
use ai_lab_core::mdp::{solve_rbj, Card, DeckConfig, GameEvent, RbjAction, RbjGame};
use ai_lab_core::qlearn::{episode_start, q_step, Cell, GridSpec, QParams, QTable, Termination};
use ai_lab_core::scenario::ScenarioDocument;
use ai_lab_core::search::{FrontierDiscipline, RunStatus, SearchRun, StateSpaceGraph, TraceEvent};
use ai_lab_core::RandomSource;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::activity::{Activity, Role, SessionOptions, SpyMode};
use crate::error::{Result, ServiceError};

/// An output event produced by an engine, before it is sealed into the log.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub actor: String,
    pub kind: String,
    pub payload: Value,
}

fn emit(actor: &str, kind: &str, payload: Value) -> Emitted {
    Emitted {
        actor: actor.into(),
        kind: kind.into(),
        payload,
    }
}

fn parse_action<A: DeserializeOwned>(activity: Activity, role: Role, action: &Value) -> Result<A> {
    serde_json::from_value(action.clone()).map_err(|e| {
        ServiceError::IllegalAction(format!("{role} cannot do {action} in {activity}: {e}"))
    })
}

fn cannot_act(activity: Activity, role: Role) -> ServiceError {
    ServiceError::IllegalAction(format!(
        "the {role} role takes no actions in {activity} sessions"
    ))
}

#[derive(Debug, Clone)]
pub(crate) enum Engine {
    Search(SearchEngine),
    Rbj(RbjEngine),
    Qmaze(QmazeEngine),
    Twospies(SpiesEngine),
}

impl Engine {
    pub fn start(
        activity: Activity,
        doc: &ScenarioDocument,
        options: &SessionOptions,
        rs: &mut RandomSource,
    ) -> Result<(Engine, Vec<Emitted>)> {
        Ok(match activity {
            Activity::Search => {
                let (e, ev) = SearchEngine::start(doc.as_search()?, options)?;
                (Engine::Search(e), ev)
            }
            Activity::Rbj => {
                let (e, ev) = RbjEngine::start(doc.as_deck()?, options, rs)?;
                (Engine::Rbj(e), ev)
            }
            Activity::Qmaze => {
                let (e, ev) = QmazeEngine::start(doc.as_grid()?, options, rs)?;
                (Engine::Qmaze(e), ev)
            }
            Activity::Twospies => {
                let (e, ev) = SpiesEngine::start(doc.as_map()?, options, rs)?;
                (Engine::Twospies(e), ev)
            }
        })
    }

    pub fn apply(
        &mut self,
        role: Role,
        action: &Value,
        rs: &mut RandomSource,
    ) -> Result<Vec<Emitted>> {
        match self {
            Engine::Search(e) => e.apply(role, action),
            Engine::Rbj(e) => e.apply(role, action, rs),
            Engine::Qmaze(e) => e.apply(role, action, rs),
            Engine::Twospies(e) => e.apply(role, action, rs),
        }
    }

    /// Unredacted projection for a role; the caller scrubs hidden keys.
    pub fn view(&self, role: Role) -> Value {
        match self {
            Engine::Search(e) => e.view(role),
            Engine::Rbj(e) => e.view(role),
            Engine::Qmaze(e) => e.view(role),
            Engine::Twospies(e) => e.view(role),
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Engine::Search(e) => match e.run.status() {
                RunStatus::Running => "running",
                RunStatus::Found => "found",
                RunStatus::Exhausted => "exhausted",
            },
            Engine::Rbj(e) => {
                if e.game.is_over() {
                    "game_over"
                } else {
                    "running"
                }
            }
            Engine::Qmaze(_) => "running",
            Engine::Twospies(e) => match e.state.status {
                GameStatus::Running => "running",
                GameStatus::Captured => "captured",
                GameStatus::Evaded => "evaded",
            },
        }
    }

    /// Brute-force cross-check of what the engine reports.
    pub fn oracle(&self) -> Result<Value> {
        match self {
            Engine::Twospies(e) => e.oracle(),
            Engine::Rbj(e) => Ok(json!({"solver": e.solver})),
            Engine::Search(e) => {
                let mut best = Map::new();
                for d in [FrontierDiscipline::Fifo, FrontierDiscipline::PriorityG] {
                    let r = ai_lab_core::search::graph_search(&e.graph, d)?;
                    best.insert(
                        d.algorithm_name().into(),
                        json!({"found": r.found, "path_states": r.path_states, "total_cost": r.total_cost}),
                    );
                }
                Ok(Value::Object(best))
            }
            Engine::Qmaze(_) => Err(ServiceError::NotFound(
                "qmaze sessions have no oracle".into(),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SearchEngine {
    graph: StateSpaceGraph<f64>,
    run: SearchRun<f64>,
    run_no: u32,
    emitted: usize,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SearchAction {
    Step,
    Run,
    Reset {
        #[serde(default)]
        algo: Option<String>,
    },
}

fn trace_event_parts(ev: &TraceEvent) -> (Role, &'static str) {
    match ev {
        TraceEvent::FrontierInsert { .. } => (Role::Frontier, "frontier_insert"),
        TraceEvent::FrontierPop { .. } => (Role::Frontier, "frontier_pop"),
        TraceEvent::GoalTest { .. } => (Role::GoalTest, "goal_test"),
        TraceEvent::VisitMark { .. } => (Role::Algorithm, "visit_mark"),
        TraceEvent::SuccessorQuery { .. } => (Role::SuccessorDictionary, "successor_query"),
    }
}

impl SearchEngine {
    fn start(
        graph: &StateSpaceGraph<f64>,
        options: &SessionOptions,
    ) -> Result<(Self, Vec<Emitted>)> {
        let discipline: FrontierDiscipline = options.algo.as_deref().unwrap_or("bfs").parse()?;
        let mut e = SearchEngine {
            graph: graph.clone(),
            run: SearchRun::new(graph, discipline)?,
            run_no: 1,
            emitted: 0,
        };
        let mut out = vec![e.started()];
        out.extend(e.drain());
        Ok((e, out))
    }

    fn started(&self) -> Emitted {
        emit(
            "algorithm",
            "search_started",
            json!({"run": self.run_no, "discipline": self.run.discipline(), "algo": self.run.discipline().algorithm_name()}),
        )
    }

    fn drain(&mut self) -> Vec<Emitted> {
        let events = &self.run.trace().events[self.emitted..];
        self.emitted += events.len();
        events
            .iter()
            .map(|ev| {
                let (actor, kind) = trace_event_parts(ev);
                emit(
                    actor.as_str(),
                    kind,
                    serde_json::to_value(ev).expect("trace events serialize"),
                )
            })
            .collect()
    }

    fn result_json(&self) -> Result<Value> {
        let r = self.run.result(&self.graph)?;
        Ok(json!({
            "found": r.found,
            "path_states": r.path_states,
            "path_actions": r.path_actions,
            "total_cost": r.total_cost,
            "expansions": r.expansions,
        }))
    }

    fn apply(&mut self, role: Role, action: &Value) -> Result<Vec<Emitted>> {
        if role != Role::Algorithm {
            return Err(cannot_act(Activity::Search, role));
        }
        let action: SearchAction = parse_action(Activity::Search, role, action)?;
        let mut out = Vec::new();
        match action {
            SearchAction::Step | SearchAction::Run => {
                if self.run.status() != RunStatus::Running {
                    return Err(ServiceError::IllegalAction(
                        "the search has finished; reset to search again".into(),
                    ));
                }
                if matches!(action, SearchAction::Step) {
                    self.run.step(&self.graph)?;
                } else {
                    self.run.run_to_end(&self.graph)?;
                }
                out.extend(self.drain());
                if self.run.status() != RunStatus::Running {
                    out.push(emit("algorithm", "search_finished", self.result_json()?));
                }
            }
            SearchAction::Reset { algo } => {
                let discipline = match algo {
                    Some(a) => a.parse()?,
                    None => self.run.discipline(),
                };
                self.run = SearchRun::new(&self.graph, discipline)?;
                self.run_no += 1;
                self.emitted = 0;
                out.push(self.started());
                out.extend(self.drain());
            }
        }
        Ok(out)
    }

    fn frontier_json(&self) -> Value {
        self.run
            .frontier()
            .snapshot()
            .into_iter()
            .map(|e| json!({"state": self.graph.id(e.state), "g": e.g, "key": e.key}))
            .collect()
    }

    fn view(&self, role: Role) -> Value {
        let trace = self.run.trace();
        let status = json!(self.run.status());
        let header = json!({
            "run": self.run_no,
            "discipline": self.run.discipline(),
            "algo": self.run.discipline().algorithm_name(),
            "status": status,
        });
        let mut v = header.as_object().cloned().expect("object");
        let mut put = |k: &str, val: Value| {
            v.insert(k.into(), val);
        };
        let heuristic = || -> Value {
            match self.graph.heuristic() {
                Some(h) => self
                    .graph
                    .ids()
                    .iter()
                    .zip(h)
                    .map(|(id, x)| (id.clone(), json!(x)))
                    .collect(),
                None => Value::Null,
            }
        };
        let result = || {
            if self.run.status() == RunStatus::Running {
                Value::Null
            } else {
                self.result_json().unwrap_or(Value::Null)
            }
        };
        match role {
            Role::Algorithm | Role::Observer => {
                put("initial", json!(trace.initial));
                put("expansions", json!(self.run.expansions()));
                put(
                    "visited",
                    json!(self
                        .run
                        .visited()
                        .map(|s| self.graph.id(s))
                        .collect::<Vec<_>>()),
                );
                put("parents", json!(trace.parents));
                put("frontier_size", json!(self.run.frontier().len()));
                put("trace", json!(trace.events));
                put("heuristic", heuristic());
                put("result", result());
                if role == Role::Observer {
                    put("frontier", self.frontier_json());
                    put(
                        "graph",
                        serde_json::to_value(self.graph.to_body()).expect("graph body serializes"),
                    );
                }
            }
            Role::SuccessorDictionary => {
                let mut dict = Map::new();
                for id in self.graph.ids() {
                    let succ: Vec<Value> = self
                        .graph
                        .successors_of(id)
                        .unwrap_or_default()
                        .into_iter()
                        .map(|(action, to, cost)| json!({"action": action, "to": to, "cost": cost}))
                        .collect();
                    dict.insert(id.clone(), Value::Array(succ));
                }
                put("edges", Value::Object(dict));
                let queries: Vec<&str> = trace
                    .events
                    .iter()
                    .filter_map(|e| match e {
                        TraceEvent::SuccessorQuery { state, .. } => Some(state.as_str()),
                        _ => None,
                    })
                    .collect();
                put("queries", json!(queries));
            }
            Role::GoalTest => {
                put(
                    "goal",
                    serde_json::to_value(self.graph.goal()).expect("goal serializes"),
                );
                let states: Vec<Value> = (0..self.graph.len())
                    .map(|s| json!({"id": self.graph.id(s), "attrs": self.graph.attrs(s)}))
                    .collect();
                put("states", json!(states));
                let tests: Vec<Value> = trace
                    .events
                    .iter()
                    .filter_map(|e| match e {
                        TraceEvent::GoalTest { state, result } => {
                            Some(json!({"state": state, "result": result}))
                        }
                        _ => None,
                    })
                    .collect();
                put("tests", json!(tests));
            }
            Role::Frontier => {
                put("frontier", self.frontier_json());
            }
            _ => {}
        }
        Value::Object(v)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct RbjEngine {
    deck: DeckConfig,
    game: RbjGame,
    game_no: u32,
    results: Vec<Value>,
    overlay: bool,
    solver: Value,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RbjCommand {
    Hit,
    Stand,
    NewGame,
}

fn count_cards(cards: &[Card]) -> (usize, usize, usize) {
    let n = |c: Card| cards.iter().filter(|&&x| x == c).count();
    (n(Card::Red), n(Card::Black), n(Card::Face))
}

impl RbjEngine {
    fn start(
        deck: &DeckConfig,
        options: &SessionOptions,
        rs: &mut RandomSource,
    ) -> Result<(Self, Vec<Emitted>)> {
        let (mdp, vi) = solve_rbj::<f64>(deck, 1.0, 1e-9)?;
        let e = RbjEngine {
            deck: deck.clone(),
            game: RbjGame::new(deck, rs)?,
            game_no: 1,
            results: Vec::new(),
            overlay: options.solver_overlay.unwrap_or(false),
            solver: vi.to_json(&mdp),
        };
        let ev = vec![e.started()];
        Ok((e, ev))
    }

    fn started(&self) -> Emitted {
        emit(
            "dealer",
            "game_started",
            json!({"game": self.game_no, "state": self.game.state_name()}),
        )
    }

    fn apply(&mut self, role: Role, action: &Value, rs: &mut RandomSource) -> Result<Vec<Emitted>> {
        if !matches!(role, Role::Player | Role::Dealer) {
            return Err(cannot_act(Activity::Rbj, role));
        }
        let cmd: RbjCommand = parse_action(Activity::Rbj, role, action)?;
        let action = match cmd {
            RbjCommand::NewGame => {
                if !self.game.is_over() {
                    return Err(ServiceError::IllegalAction(
                        "the current game is still running".into(),
                    ));
                }
                self.game = RbjGame::new(&self.deck, rs)?;
                self.game_no += 1;
                return Ok(vec![self.started()]);
            }
            RbjCommand::Hit => RbjAction::Hit,
            RbjCommand::Stand => RbjAction::Stand,
        };
        if role != Role::Player {
            return Err(ServiceError::IllegalAction(
                "only the player chooses Hit or Stand".into(),
            ));
        }
        let events = self.game.act(action)?;
        let position = self.game.position_name();
        let mut out = Vec::new();
        for ev in events {
            out.push(match ev {
                GameEvent::Decision { state, action } => emit(
                    "player",
                    "decision",
                    json!({"game": self.game_no, "state": state, "action": action}),
                ),
                GameEvent::Draw { pile, card } => emit(
                    "dealer",
                    "card_drawn",
                    json!({"game": self.game_no, "pile": pile, "card": card, "state": position}),
                ),
                GameEvent::End { terminal, score } => {
                    let r = json!({"game": self.game_no, "terminal": terminal, "score": score});
                    self.results.push(r.clone());
                    emit("dealer", "game_over", r)
                }
            });
        }
        Ok(out)
    }

    fn view(&self, role: Role) -> Value {
        let (red, black) = self.game.hand();
        let (hr, hb, hf) = count_cards(self.game.hit_pile());
        let (sr, sb, _) = count_cards(self.game.stand_pile());
        let mut v = json!({
            "game": self.game_no,
            "state": self.game.position_name(),
            "hand": {"red": red, "black": black},
            "over": self.game.is_over(),
            "outcome": self.game.outcome().map(|(t, s)| json!({"terminal": t, "score": s})),
            "events": self.game.log(),
            "results": self.results,
            "total_score": self.results.iter().filter_map(|r| r["score"].as_f64()).sum::<f64>(),
            "deck": self.deck,
            "remaining": {"hit": {"red": hr, "black": hb, "face": hf}, "stand": {"red": sr, "black": sb}},
        });
        let m = v.as_object_mut().expect("object");
        if matches!(role, Role::Dealer | Role::Observer) {
            m.insert("hit_pile".into(), json!(self.game.hit_pile()));
            m.insert("stand_pile".into(), json!(self.game.stand_pile()));
        }
        if role == Role::Observer || (role == Role::Player && self.overlay) {
            m.insert("solver".into(), self.solver.clone());
        }
        v
    }
}

#[derive(Debug, Clone)]
pub(crate) struct QmazeEngine {
    grid: GridSpec,
    params: QParams<f64>,
    budget: usize,
    q: QTable<f64>,
    initial_table: Value,
    episode: u32,
    position: Cell,
    steps: usize,
    episode_reward: f64,
    returns: Vec<Value>,
    revealed: BTreeSet<Cell>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum QCommand {
    Step,
    Episode,
}

impl QmazeEngine {
    fn start(
        grid: &GridSpec,
        options: &SessionOptions,
        rs: &mut RandomSource,
    ) -> Result<(Self, Vec<Emitted>)> {
        let mut params = QParams::new(
            options.alpha.unwrap_or(0.5),
            options.gamma.unwrap_or(0.9),
            options.explore_faces.unwrap_or(0),
            options.die_faces.unwrap_or(6),
        )?;
        params.step_budget = options.step_budget;
        params.validate()?;
        let q = QTable::zeros(grid);
        let mut e = QmazeEngine {
            grid: grid.clone(),
            budget: params.budget(grid),
            params,
            initial_table: q.to_json(),
            q,
            episode: 0,
            position: grid.start(),
            steps: 0,
            episode_reward: 0.0,
            returns: Vec::new(),
            revealed: BTreeSet::new(),
        };
        let ev = e.begin_episode(rs)?;
        Ok((e, vec![ev]))
    }

    fn begin_episode(&mut self, rs: &mut RandomSource) -> Result<Emitted> {
        self.episode += 1;
        self.position = episode_start(&self.grid, rs)?;
        self.steps = 0;
        self.episode_reward = 0.0;
        self.revealed.insert(self.position);
        Ok(emit(
            "player",
            "episode_started",
            json!({"episode": self.episode, "start": self.position.to_string(), "budget": self.budget}),
        ))
    }

    fn step(&mut self, rs: &mut RandomSource, out: &mut Vec<Emitted>) -> Result<bool> {
        let (rec, done) = q_step(&self.grid, &mut self.q, &self.params, self.position, rs)?;
        self.steps += 1;
        self.episode_reward += rec.reward;
        self.position = rec.next_state;
        self.revealed.insert(rec.next_state);
        let mut payload = serde_json::to_value(&rec).expect("step record serializes");
        let m = payload.as_object_mut().expect("object");
        m.insert("episode".into(), json!(self.episode));
        m.insert("step".into(), json!(self.steps));
        m.insert("state".into(), json!(rec.state.to_string()));
        m.insert("next_state".into(), json!(rec.next_state.to_string()));
        out.push(emit("player", "step", payload));
        let ended = if done {
            Some(Termination::Terminal)
        } else if self.steps >= self.budget {
            Some(Termination::BudgetExhausted)
        } else {
            None
        };
        if let Some(t) = ended {
            let summary = json!({
                "episode": self.episode,
                "steps": self.steps,
                "total_reward": self.episode_reward,
                "termination": t,
            });
            self.returns.push(summary.clone());
            out.push(emit("player", "episode_ended", summary));
            out.push(self.begin_episode(rs)?);
        }
        Ok(ended.is_some())
    }

    fn apply(&mut self, role: Role, action: &Value, rs: &mut RandomSource) -> Result<Vec<Emitted>> {
        if role != Role::Player {
            return Err(cannot_act(Activity::Qmaze, role));
        }
        let cmd: QCommand = parse_action(Activity::Qmaze, role, action)?;
        let mut out = Vec::new();
        match cmd {
            QCommand::Step => {
                self.step(rs, &mut out)?;
            }
            QCommand::Episode => while !self.step(rs, &mut out)? {},
        }
        Ok(out)
    }

    fn cell_json(&self, c: Cell) -> Value {
        let info = self.grid.info(c);
        json!({"reward": info.reward, "terminal": info.terminal})
    }

    fn view(&self, role: Role) -> Value {
        let body = self.grid.to_body();
        let revealed: Map<String, Value> = self
            .revealed
            .iter()
            .map(|&c| (c.to_string(), self.cell_json(c)))
            .collect();
        let mut v = json!({
            "grid": {"width": body.width, "height": body.height, "start": body.start, "walls": body.walls},
            "revealed": revealed,
            "position": self.position.to_string(),
            "episode": self.episode,
            "step": self.steps,
            "budget": self.budget,
            "params": {
                "alpha": self.params.alpha,
                "gamma": self.params.gamma,
                "explore_faces": self.params.explore_faces,
                "die_faces": self.params.die_faces,
            },
            "q_table": self.q.to_json(),
            "initial_table": self.initial_table,
            "returns": self.returns,
        });
        if role == Role::Observer {
            let all: Map<String, Value> = self
                .grid
                .cells()
                .map(|c| (c.to_string(), self.cell_json(c)))
                .collect();
            v.as_object_mut()
                .expect("object")
                .insert("grid_rewards".into(), Value::Object(all));
        }
        v
    }
}

#[derive(Debug, Clone)]
pub(crate) struct SpiesEngine {
    map: MapSpec,
    model: HmmModel,
    state: TwoSpiesState,
    belief: Belief<f64>,
    beliefs: Vec<Value>,
    mode: SpyMode,
}

/// Hunter input. `next_round` asks the service to roll the spy's dice when
/// the service plays the spy.
#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum HunterCommand {
    NextRound,
    Move { to: String },
    Stay,
    Capture,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SpyCommand {
    Transition { to: String, report: String },
}

impl SpiesEngine {
    fn start(
        map: &MapSpec,
        options: &SessionOptions,
        rs: &mut RandomSource,
    ) -> Result<(Self, Vec<Emitted>)> {
        let model = build_hmm(map);
        let state = TwoSpiesState::new(map, rs);
        let belief = Belief::uniform(map.len());
        let e = SpiesEngine {
            beliefs: vec![json!({"round": 0, "belief": belief.to_json(&model)})],
            map: map.clone(),
            model,
            state,
            belief,
            mode: options.spy_mode.unwrap_or_default(),
        };
        let out = vec![emit(
            "spy",
            "game_started",
            json!({
                "rounds": e.state.rounds,
                "hunter_city": e.state.hunter_city,
                "spy_city": e.state.spy_city,
                "spy_mode": e.mode,
            }),
        )];
        Ok((e, out))
    }

    fn after_spy(&mut self, city: String, region: String) -> Result<Vec<Emitted>> {
        let round = self.state.round;
        self.belief = correct(&predict(&self.belief, &self.model)?, &self.model, &region)?;
        Ok(vec![
            emit(
                "spy",
                "spy_moved",
                json!({"round": round, "spy_city": city}),
            ),
            emit(
                "spy",
                "observation",
                json!({"round": round, "region": region}),
            ),
            self.belief_event(),
        ])
    }

    fn belief_event(&mut self) -> Emitted {
        let payload =
            json!({"round": self.state.round, "belief": self.belief.to_json(&self.model)});
        self.beliefs.push(payload.clone());
        emit("hunter", "belief_updated", payload)
    }

    fn apply(&mut self, role: Role, action: &Value, rs: &mut RandomSource) -> Result<Vec<Emitted>> {
        match role {
            Role::Hunter => {
                let act = match parse_action(Activity::Twospies, role, action)? {
                    HunterCommand::NextRound => {
                        if self.mode == SpyMode::Human {
                            return Err(ServiceError::IllegalAction(
                                "the spy player moves the spy".into(),
                            ));
                        }
                        let (city, region) = self.state.spy_turn(&self.map, &self.model, rs)?;
                        return self.after_spy(city, region);
                    }
                    HunterCommand::Move { to } => HunterAction::Move { to },
                    HunterCommand::Stay => HunterAction::Stay,
                    HunterCommand::Capture => HunterAction::Capture,
                };
                self.hunter(act)
            }
            Role::Spy => {
                if self.mode == SpyMode::Auto {
                    return Err(ServiceError::IllegalAction(
                        "the service plays the spy in this session".into(),
                    ));
                }
                let SpyCommand::Transition { to, report } =
                    parse_action(Activity::Twospies, role, action)?;
                self.state
                    .spy_turn_with(&self.map, &self.model, &to, &report)?;
                self.after_spy(to, report)
            }
            _ => Err(cannot_act(Activity::Twospies, role)),
        }
    }

    fn hunter(&mut self, act: HunterAction) -> Result<Vec<Emitted>> {
        self.state.hunter_act(&self.map, &act)?;
        let round = self.state.round;
        let mut out = vec![emit(
            "hunter",
            "hunter_action",
            json!({"round": round, "action": act, "hunter_city": self.state.hunter_city}),
        )];
        if act == HunterAction::Capture {
            let city = self.state.hunter_city.clone();
            if self.state.status == GameStatus::Captured {
                out.push(emit(
                    "hunter",
                    "capture_success",
                    json!({"round": round, "city": city}),
                ));
            } else {
                out.push(emit(
                    "hunter",
                    "capture_failed",
                    json!({"round": round, "city": city}),
                ));
                self.belief = exclude(&self.belief, &self.model, &city)?;
                out.push(self.belief_event());
            }
        }
        if self.state.status != GameStatus::Running {
            out.push(emit(
                "spy",
                "game_over",
                json!({"status": self.state.status, "round": round, "spy_city": self.state.spy_city}),
            ));
        }
        Ok(out)
    }

    fn view(&self, role: Role) -> Value {
        let mut v = json!({
            "map": self.map.to_body(),
            "regions": self.model.regions(),
            "spy_mode": self.mode,
        });
        let m = v.as_object_mut().expect("object");
        match role {
            Role::Hunter => {
                m.insert("game".into(), json!(self.state.hunter_view()));
            }
            _ => {
                m.insert("game".into(), json!(self.state));
            }
        }
        if role != Role::Spy {
            m.insert("belief".into(), self.belief.to_json(&self.model));
            m.insert("beliefs".into(), json!(self.beliefs));
        }
        v
    }

    fn oracle(&self) -> Result<Value> {
        let evidence = self.state.evidence();
        let prior = Belief::<f64>::uniform(self.model.len());
        let posts = brute_force_posterior(&self.model, &evidence, &prior)?;
        let exact = posts.last().cloned().unwrap_or(prior);
        let diff = exact
            .probs()
            .iter()
            .zip(self.belief.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(json!({
            "round": self.state.round,
            "posterior": exact.to_json(&self.model),
            "belief": self.belief.to_json(&self.model),
            "max_abs_diff": diff,
        }))
    }
}
