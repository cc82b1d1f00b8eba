//! Scenario files: a JSON envelope `{"kind", "version", "body"}` around one of
//! four body schemas.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hmm::{MapBody, MapSpec};
use crate::mdp::DeckConfig;
use crate::qlearn::{GridBody, GridSpec};
use crate::rng::is_dice_expressible;
use crate::search::{SearchBody, StateSpaceGraph};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Search,
    Deck,
    Grid,
    Map,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::Search,
        ScenarioKind::Deck,
        ScenarioKind::Grid,
        ScenarioKind::Map,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Search => "search",
            ScenarioKind::Deck => "deck",
            ScenarioKind::Grid => "grid",
            ScenarioKind::Map => "map",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::validation(format!("unknown scenario kind `{s}`")))
    }
}

/// A validated scenario body.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Search(StateSpaceGraph<f64>),
    Deck(DeckConfig),
    Grid(GridSpec),
    Map(MapSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDocument {
    pub version: String,
    pub scenario: Scenario,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    kind: String,
    version: String,
    body: Value,
}

fn body<T: serde::de::DeserializeOwned>(kind: ScenarioKind, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::validation(format!("{kind} body: {e}")))
}

/// Parse and validate a scenario document. With `expected` set, a document
/// of another kind is rejected.
pub fn parse_scenario(expected: Option<ScenarioKind>, text: &str) -> Result<ScenarioDocument> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let env: Envelope = serde_json::from_value(value)
        .map_err(|e| Error::validation(format!("scenario envelope: {e}")))?;
    if env.version != FORMAT_VERSION {
        return Err(Error::validation(format!(
            "unsupported scenario version `{}` (expected `{FORMAT_VERSION}`)",
            env.version
        )));
    }
    let kind: ScenarioKind = env.kind.parse()?;
    if let Some(want) = expected {
        if want != kind {
            return Err(Error::validation(format!(
                "expected a {want} scenario, found {kind}"
            )));
        }
    }
    let scenario = match kind {
        ScenarioKind::Search => Scenario::Search(StateSpaceGraph::from_body(&body::<SearchBody>(
            kind, env.body,
        )?)?),
        ScenarioKind::Deck => {
            let deck: DeckConfig = body(kind, env.body)?;
            deck.validate()?;
            Scenario::Deck(deck)
        }
        ScenarioKind::Grid => {
            Scenario::Grid(GridSpec::from_body(&body::<GridBody>(kind, env.body)?)?)
        }
        ScenarioKind::Map => Scenario::Map(MapSpec::from_body(&body::<MapBody>(kind, env.body)?)?),
    };
    Ok(ScenarioDocument {
        version: env.version,
        scenario,
    })
}

/// Read and parse a scenario file; a name of a bundled fixture also works.
pub fn load_scenario(expected: Option<ScenarioKind>, path: &Path) -> Result<ScenarioDocument> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => match path.to_str().and_then(bundled) {
            Some(t) => t.to_string(),
            None => return Err(Error::Io(format!("{}: {e}", path.display()))),
        },
    };
    parse_scenario(expected, &text)
}

impl ScenarioDocument {
    pub fn new(scenario: Scenario) -> Self {
        ScenarioDocument {
            version: FORMAT_VERSION.to_string(),
            scenario,
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        match self.scenario {
            Scenario::Search(_) => ScenarioKind::Search,
            Scenario::Deck(_) => ScenarioKind::Deck,
            Scenario::Grid(_) => ScenarioKind::Grid,
            Scenario::Map(_) => ScenarioKind::Map,
        }
    }

    pub fn body_json(&self) -> Value {
        let v = match &self.scenario {
            Scenario::Search(g) => serde_json::to_value(g.to_body()),
            Scenario::Deck(d) => serde_json::to_value(d),
            Scenario::Grid(g) => serde_json::to_value(g.to_body()),
            Scenario::Map(m) => serde_json::to_value(m.to_body()),
        };
        v.expect("scenario bodies serialize")
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "kind": self.kind(),
            "version": self.version,
            "body": self.body_json(),
        })
    }

    /// Pretty-printed document text.
    pub fn serialize(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("json");
        s.push('\n');
        s
    }

    /// Problems that do not stop the document from loading: heuristics that
    /// overestimate, and probabilities no supported die can express.
    pub fn warnings(&self) -> Vec<String> {
        match &self.scenario {
            Scenario::Search(g) => g.heuristic_warnings(),
            Scenario::Deck(_) => Vec::new(),
            Scenario::Grid(g) => match g.slip() {
                Some(p) if !is_dice_expressible(&p.to_prob()) => {
                    vec![format!("slip probability {p} is not dice-expressible")]
                }
                _ => Vec::new(),
            },
            Scenario::Map(m) => m.dice_warnings(),
        }
    }

    fn mismatch(&self, want: ScenarioKind) -> Error {
        Error::validation(format!("expected a {want} scenario, found {}", self.kind()))
    }

    pub fn as_search(&self) -> Result<&StateSpaceGraph<f64>> {
        match &self.scenario {
            Scenario::Search(g) => Ok(g),
            _ => Err(self.mismatch(ScenarioKind::Search)),
        }
    }

    pub fn as_deck(&self) -> Result<&DeckConfig> {
        match &self.scenario {
            Scenario::Deck(d) => Ok(d),
            _ => Err(self.mismatch(ScenarioKind::Deck)),
        }
    }

    pub fn as_grid(&self) -> Result<&GridSpec> {
        match &self.scenario {
            Scenario::Grid(g) => Ok(g),
            _ => Err(self.mismatch(ScenarioKind::Grid)),
        }
    }

    pub fn as_map(&self) -> Result<&MapSpec> {
        match &self.scenario {
            Scenario::Map(m) => Ok(m),
            _ => Err(self.mismatch(ScenarioKind::Map)),
        }
    }
}

macro_rules! fixtures {
    ($($name:literal),* $(,)?) => {
        /// Scenario files shipped with the library, by file name.
        pub const BUNDLED: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../scenarios/", $name))),)*
        ];
    };
}

fixtures!(
    "campus.search",
    "diamond.search",
    "greedy_trap.search",
    "grid_maze.search",
    "house.search",
    "key_quest.search",
    "line.search",
    "ring.search",
    "romania.search",
    "zero_cost.search",
    "red_black_default.deck",
    "deck_big_jackpot.deck",
    "deck_harsh_bust.deck",
    "deck_two_faces.deck",
    "deck_three_red.deck",
    "deck_auto_jackpot.deck",
    "grid3x3.json",
    "country_a.map",
    "country_b.map",
    "bad_map.json",
);

/// Text of a bundled scenario, looked up by file name.
pub fn bundled(name: &str) -> Option<&'static str> {
    let name = name.rsplit('/').next().unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parse a bundled scenario; panics if the name is unknown or invalid.
pub fn bundled_doc(name: &str) -> ScenarioDocument {
    let text = bundled(name).unwrap_or_else(|| panic!("no bundled scenario `{name}`"));
    parse_scenario(None, text).unwrap_or_else(|e| panic!("bundled scenario `{name}`: {e}"))
}
