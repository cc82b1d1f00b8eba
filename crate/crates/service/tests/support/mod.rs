//! Scripted play shared by the service tests and the acceptance suite.
#![allow(dead_code)]

use ai_lab_core::hmm::{greedy_hunter_action, Belief};
use ai_lab_core::scenario::{bundled_doc, ScenarioDocument};
use ai_lab_service::{Activity, Role, Session, SessionOptions};
use serde_json::{json, Value};

/// Fixed clock for reproducible log files.
pub const T0: u64 = 1_700_000_000_000;

pub struct GoldenSpec {
    pub name: &'static str,
    pub activity: Activity,
    pub scenario: &'static str,
    pub seed: u64,
    pub options: Value,
}

pub fn golden_specs() -> Vec<GoldenSpec> {
    let g = |name, activity, scenario, seed, options| GoldenSpec {
        name,
        activity,
        scenario,
        seed,
        options,
    };
    vec![
        g(
            "search_romania",
            Activity::Search,
            "romania.search",
            0,
            json!({"algo": "astar"}),
        ),
        g(
            "search_key_quest",
            Activity::Search,
            "key_quest.search",
            0,
            json!({}),
        ),
        g(
            "rbj_default_seed5",
            Activity::Rbj,
            "red_black_default.deck",
            5,
            json!({}),
        ),
        g(
            "rbj_three_red_overlay",
            Activity::Rbj,
            "deck_three_red.deck",
            11,
            json!({"solver_overlay": true}),
        ),
        g(
            "qmaze_grid3x3",
            Activity::Qmaze,
            "grid3x3.json",
            7,
            json!({"explore_faces": 2}),
        ),
        g(
            "twospies_country_a",
            Activity::Twospies,
            "country_a.map",
            5,
            json!({}),
        ),
        g(
            "twospies_country_b_human",
            Activity::Twospies,
            "country_b.map",
            9,
            json!({"spy_mode": "human"}),
        ),
    ]
}

impl GoldenSpec {
    pub fn doc(&self) -> ScenarioDocument {
        bundled_doc(self.scenario)
    }

    pub fn options(&self) -> SessionOptions {
        serde_json::from_value(self.options.clone()).unwrap()
    }

    pub fn create(&self) -> Session {
        Session::create(
            self.name,
            self.activity,
            &self.doc(),
            self.seed,
            self.options(),
            T0,
        )
        .unwrap()
    }
}

/// Pick the next legal action from the observer's view of a session, or
/// `None` when the script is done.
pub fn choose(
    activity: Activity,
    doc: &ScenarioDocument,
    view: &Value,
    turn: usize,
) -> Option<(Role, Value)> {
    let p = &view["payload"];
    match activity {
        Activity::Search => {
            let run = p["run"].as_u64().unwrap();
            if p["status"] == "running" {
                let kind = if run == 1 { "step" } else { "run" };
                Some((Role::Algorithm, json!({"type": kind})))
            } else if run < 3 {
                let algo = if run == 1 { "ucs" } else { "dfs" };
                Some((Role::Algorithm, json!({"type": "reset", "algo": algo})))
            } else {
                None
            }
        }
        Activity::Rbj => {
            let game = p["game"].as_u64().unwrap();
            if p["over"].as_bool().unwrap() {
                match game {
                    1 => Some((Role::Dealer, json!({"type": "new_game"}))),
                    2 => Some((Role::Player, json!({"type": "new_game"}))),
                    _ => None,
                }
            } else {
                let state = p["state"].as_str().unwrap();
                let best = p["solver"]["policy"][state]
                    .as_str()
                    .unwrap()
                    .to_ascii_lowercase();
                // The second game ignores the policy once to cover both moves.
                let kind = if game == 2 && turn.is_multiple_of(2) {
                    "hit".to_string()
                } else {
                    best
                };
                Some((Role::Player, json!({"type": kind})))
            }
        }
        Activity::Qmaze => {
            let done = p["returns"].as_array().unwrap().len();
            if done >= 6 {
                None
            } else if p["episode"] == 1 && p["step"].as_u64().unwrap() < 3 {
                Some((Role::Player, json!({"type": "step"})))
            } else {
                Some((Role::Player, json!({"type": "episode"})))
            }
        }
        Activity::Twospies => {
            let game = &p["game"];
            if game["status"] != "running" {
                return None;
            }
            let map = doc.as_map().unwrap();
            if game["phase"] == "await_spy" {
                if p["spy_mode"] == "auto" {
                    return Some((Role::Hunter, json!({"type": "next_round"})));
                }
                let from = game["spy_city"].as_str().unwrap();
                let moves: Vec<&String> = p["map"]["transition"][from]
                    .as_object()
                    .unwrap()
                    .iter()
                    .filter(|(_, v)| !v.as_str().unwrap().starts_with('0'))
                    .map(|(k, _)| k)
                    .collect();
                let to = moves[turn % moves.len()];
                let report = p["map"]["observation"][to.as_str()]
                    .as_object()
                    .unwrap()
                    .iter()
                    .find(|(_, v)| !v.as_str().unwrap().starts_with('0'))
                    .map(|(k, _)| k.clone())
                    .unwrap();
                return Some((
                    Role::Spy,
                    json!({"type": "transition", "to": to, "report": report}),
                ));
            }
            let weights: Vec<f64> = map
                .city_ids()
                .map(|c| p["belief"][c].as_f64().unwrap())
                .collect();
            let belief = Belief::new(weights).unwrap();
            let act =
                greedy_hunter_action(map, game["hunter_city"].as_str().unwrap(), &belief).unwrap();
            Some((Role::Hunter, serde_json::to_value(act).unwrap()))
        }
    }
}

/// Run the script against an in-process session; `each` sees the session
/// after creation and after every action.
pub fn drive(spec: &GoldenSpec, mut each: impl FnMut(&Session)) -> Session {
    let doc = spec.doc();
    let mut s = spec.create();
    each(&s);
    let mut turn = 0;
    while let Some((role, action)) =
        choose(spec.activity, &doc, &s.view(Role::Observer).unwrap(), turn)
    {
        let at = s.next_index();
        s.apply(role, at, action, T0 + at).unwrap();
        each(&s);
        turn += 1;
        assert!(turn < 500, "script for {} does not terminate", spec.name);
    }
    s
}
