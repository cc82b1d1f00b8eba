use std::fmt;
use std::str::FromStr;

use ai_lab_core::scenario::ScenarioKind;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Search,
    Rbj,
    Qmaze,
    Twospies,
}

impl Activity {
    pub const ALL: [Activity; 4] = [
        Activity::Search,
        Activity::Rbj,
        Activity::Qmaze,
        Activity::Twospies,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Search => "search",
            Activity::Rbj => "rbj",
            Activity::Qmaze => "qmaze",
            Activity::Twospies => "twospies",
        }
    }

    pub fn scenario_kind(self) -> ScenarioKind {
        match self {
            Activity::Search => ScenarioKind::Search,
            Activity::Rbj => ScenarioKind::Deck,
            Activity::Qmaze => ScenarioKind::Grid,
            Activity::Twospies => ScenarioKind::Map,
        }
    }

    /// Roles that can view a session of this activity, observer last.
    pub fn roles(self) -> &'static [Role] {
        match self {
            Activity::Search => &[
                Role::Algorithm,
                Role::SuccessorDictionary,
                Role::GoalTest,
                Role::Frontier,
                Role::Observer,
            ],
            Activity::Rbj => &[Role::Player, Role::Dealer, Role::Observer],
            Activity::Qmaze => &[Role::Player, Role::Observer],
            Activity::Twospies => &[Role::Hunter, Role::Spy, Role::Observer],
        }
    }

    pub fn check_role(self, role: Role) -> Result<()> {
        if self.roles().contains(&role) {
            Ok(())
        } else {
            Err(ServiceError::UnknownRole {
                role: role.as_str().into(),
                activity: self.as_str().into(),
            })
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Activity {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self> {
        Activity::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| ServiceError::UnsupportedActivity(format!("unknown activity `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Algorithm,
    SuccessorDictionary,
    GoalTest,
    Frontier,
    Player,
    Dealer,
    Hunter,
    Spy,
    Observer,
}

impl Role {
    pub const ALL: [Role; 9] = [
        Role::Algorithm,
        Role::SuccessorDictionary,
        Role::GoalTest,
        Role::Frontier,
        Role::Player,
        Role::Dealer,
        Role::Hunter,
        Role::Spy,
        Role::Observer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Algorithm => "algorithm",
            Role::SuccessorDictionary => "successor_dictionary",
            Role::GoalTest => "goal_test",
            Role::Frontier => "frontier",
            Role::Player => "player",
            Role::Dealer => "dealer",
            Role::Hunter => "hunter",
            Role::Spy => "spy",
            Role::Observer => "observer",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| ServiceError::UnknownRole {
                role: s.into(),
                activity: "any".into(),
            })
    }
}

/// Object keys a role must never receive, anywhere in a payload. The
/// observer (instructor) sees everything.
pub fn hidden_fields(activity: Activity, role: Role) -> &'static [&'static str] {
    use Activity::*;
    use Role::*;
    match (activity, role) {
        (_, Observer) => &[],
        (Search, Algorithm) => &["seed", "scenario", "goal", "conditions", "edges"],
        (Search, SuccessorDictionary) => &[
            "seed",
            "scenario",
            "goal",
            "conditions",
            "heuristic",
            "frontier",
        ],
        (Search, GoalTest) => &[
            "seed",
            "scenario",
            "edges",
            "successors",
            "heuristic",
            "frontier",
        ],
        (Search, Frontier) => &[
            "seed",
            "scenario",
            "goal",
            "conditions",
            "edges",
            "successors",
            "heuristic",
        ],
        (Rbj, Player) => &["seed", "scenario", "hit_pile", "stand_pile"],
        (Rbj, Dealer) => &["seed", "scenario"],
        (Qmaze, Player) => &["seed", "scenario", "grid_rewards"],
        (Twospies, Hunter) => &["seed", "scenario", "spy_city"],
        (Twospies, Spy) => &["seed", "scenario", "belief", "beliefs"],
        _ => &["seed", "scenario"],
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpyMode {
    /// The service rolls the spy's dice.
    #[default]
    Auto,
    /// A person plays the spy through the `spy` role.
    Human,
}

/// Per-session settings. Each activity accepts only its own fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionOptions {
    /// Search algorithm (`bfs`, `dfs`, `ucs`, `greedy`, `astar`); default `bfs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explore_faces: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub die_faces: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_budget: Option<usize>,
    /// Show solver values to the RBJ player.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_overlay: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spy_mode: Option<SpyMode>,
}

impl SessionOptions {
    pub fn check(&self, activity: Activity) -> Result<()> {
        let set: [(&str, bool, &[Activity]); 8] = [
            ("algo", self.algo.is_some(), &[Activity::Search]),
            ("alpha", self.alpha.is_some(), &[Activity::Qmaze]),
            ("gamma", self.gamma.is_some(), &[Activity::Qmaze]),
            (
                "explore_faces",
                self.explore_faces.is_some(),
                &[Activity::Qmaze],
            ),
            ("die_faces", self.die_faces.is_some(), &[Activity::Qmaze]),
            (
                "step_budget",
                self.step_budget.is_some(),
                &[Activity::Qmaze],
            ),
            (
                "solver_overlay",
                self.solver_overlay.is_some(),
                &[Activity::Rbj],
            ),
            ("spy_mode", self.spy_mode.is_some(), &[Activity::Twospies]),
        ];
        for (name, present, owners) in set {
            if present && !owners.contains(&activity) {
                return Err(ServiceError::Validation(format!(
                    "option `{name}` does not apply to {activity} sessions"
                )));
            }
        }
        if activity == Activity::Qmaze && self.explore_faces.is_none() {
            return Err(ServiceError::Validation(
                "qmaze sessions need `explore_faces`".into(),
            ));
        }
        Ok(())
    }
}
