use ai_lab_core::scenario::{parse_scenario, ScenarioDocument};
use ai_lab_core::RandomSource;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::activity::{Activity, Role, SessionOptions};
use crate::engine::{Emitted, Engine};
use crate::error::{Result, ServiceError};
use crate::log::{verify_chain, LogEntry, ACTION, GENESIS_HASH, SETUP};
use crate::redact::redact;

/// One live activity: engine state plus the log that reproduces it.
#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    activity: Activity,
    seed: u64,
    options: SessionOptions,
    engine: Engine,
    rs: RandomSource,
    log: Vec<LogEntry>,
}

#[derive(Deserialize)]
struct SetupPayload {
    id: String,
    activity: Activity,
    scenario: Value,
    seed: u64,
    options: SessionOptions,
}

#[derive(Deserialize)]
struct ActionPayload {
    role: Role,
    action: Value,
}

impl Session {
    /// Validate the request, start the engine and log the setup.
    pub fn create(
        id: impl Into<String>,
        activity: Activity,
        scenario: &ScenarioDocument,
        seed: u64,
        options: SessionOptions,
        now_ms: u64,
    ) -> Result<Session> {
        if scenario.kind() != activity.scenario_kind() {
            return Err(ServiceError::UnsupportedActivity(format!(
                "{activity} sessions need a {} scenario, got {}",
                activity.scenario_kind(),
                scenario.kind()
            )));
        }
        options.check(activity)?;
        let mut rs = RandomSource::new(seed);
        let (engine, events) = Engine::start(activity, scenario, &options, &mut rs)?;
        let id = id.into();
        let mut s = Session {
            id: id.clone(),
            activity,
            seed,
            options: options.clone(),
            engine,
            rs,
            log: Vec::new(),
        };
        let setup = json!({
            "id": id,
            "activity": activity,
            "scenario": scenario.to_json(),
            "seed": seed,
            "options": options,
        });
        s.push("system", SETUP, setup, now_ms);
        s.push_all(events, now_ms);
        Ok(s)
    }

    fn push(&mut self, actor: &str, kind: &str, payload: Value, now_ms: u64) {
        let prev = self
            .log
            .last()
            .map_or(GENESIS_HASH, |e| e.hash.as_str())
            .to_string();
        let index = self.log.len() as u64;
        self.log
            .push(LogEntry::seal(index, now_ms, actor, kind, payload, &prev));
    }

    fn push_all(&mut self, events: Vec<Emitted>, now_ms: u64) {
        for e in events {
            self.push(&e.actor, &e.kind, e.payload, now_ms);
        }
    }

    /// Apply one action. `expected_index` must equal the current log length;
    /// a rejected action leaves the session untouched. Returns the new
    /// entries, starting with the action itself.
    pub fn apply(
        &mut self,
        role: Role,
        expected_index: u64,
        action: Value,
        now_ms: u64,
    ) -> Result<Vec<LogEntry>> {
        let actual = self.next_index();
        if expected_index != actual {
            return Err(ServiceError::StaleSession {
                expected: expected_index,
                actual,
            });
        }
        self.activity.check_role(role)?;
        let saved = (self.engine.clone(), self.rs.clone());
        let events = match self.engine.apply(role, &action, &mut self.rs) {
            Ok(ev) => ev,
            Err(e) => {
                (self.engine, self.rs) = saved;
                return Err(e);
            }
        };
        let start = self.log.len();
        self.push(
            role.as_str(),
            ACTION,
            json!({"role": role, "action": action}),
            now_ms,
        );
        self.push_all(events, now_ms);
        Ok(self.log[start..].to_vec())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn activity(&self) -> Activity {
        self.activity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn options(&self) -> &SessionOptions {
        &self.options
    }

    pub fn status(&self) -> &'static str {
        self.engine.status()
    }

    /// Index the next entry will get, which is also the expected index for
    /// the next action.
    pub fn next_index(&self) -> u64 {
        self.log.len() as u64
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    /// The redacted projection of the session for `role`.
    pub fn view(&self, role: Role) -> Result<Value> {
        self.activity.check_role(role)?;
        let v = json!({
            "session": self.id,
            "activity": self.activity,
            "role": role,
            "index": self.next_index(),
            "status": self.status(),
            "payload": self.engine.view(role),
        });
        Ok(redact(v, self.activity, role))
    }

    pub fn entry_for(&self, entry: &LogEntry, role: Role) -> Value {
        entry_view(entry, self.activity, role)
    }

    pub fn log_for(&self, role: Role) -> Result<Vec<Value>> {
        self.activity.check_role(role)?;
        Ok(self.log.iter().map(|e| self.entry_for(e, role)).collect())
    }

    /// Everything that defines the session, serialized deterministically.
    /// Replays compare this byte for byte.
    pub fn state_json(&self) -> Value {
        json!({
            "id": self.id,
            "activity": self.activity,
            "seed": self.seed,
            "options": self.options,
            "index": self.next_index(),
            "head": self.log.last().map(|e| e.hash.clone()),
            "rng_draws": self.rs.draws(),
            "status": self.status(),
            "state": self.engine.view(Role::Observer),
        })
    }

    pub fn state_string(&self) -> String {
        self.state_json().to_string()
    }

    pub fn oracle(&self) -> Result<Value> {
        self.engine.oracle()
    }
}

/// A log entry as `role` may see it. Non-observers get no hashes, since a
/// hash over a hidden field could be brute-forced.
pub fn entry_view(entry: &LogEntry, activity: Activity, role: Role) -> Value {
    if role == Role::Observer {
        return serde_json::to_value(entry).expect("log entries serialize");
    }
    let v = json!({
        "index": entry.index,
        "timestamp_ms": entry.timestamp_ms,
        "actor": entry.actor,
        "type": entry.kind,
        "payload": entry.payload,
    });
    redact(v, activity, role)
}

/// Rebuild a session from its log, checking that every logged output is
/// exactly what the engine produces again.
pub fn replay(entries: &[LogEntry]) -> Result<Session> {
    verify_chain(entries)?;
    let first = entries
        .first()
        .ok_or_else(|| ServiceError::CorruptLog("log has no setup entry".into()))?;
    if first.kind != SETUP {
        return Err(ServiceError::CorruptLog(format!(
            "entry 0 is `{}`, not setup",
            first.kind
        )));
    }
    let setup: SetupPayload = serde_json::from_value(first.payload.clone())
        .map_err(|e| ServiceError::CorruptLog(format!("setup payload: {e}")))?;
    let doc = parse_scenario(
        Some(setup.activity.scenario_kind()),
        &setup.scenario.to_string(),
    )?;
    let mut session = Session::create(
        setup.id,
        setup.activity,
        &doc,
        setup.seed,
        setup.options,
        first.timestamp_ms,
    )?;
    let mut pos = session.log.len();
    compare(&session.log, &entries[..pos.min(entries.len())], 0)?;
    while pos < entries.len() {
        let e = &entries[pos];
        if e.kind != ACTION {
            return Err(ServiceError::CorruptLog(format!(
                "entry {pos} (`{}`) was not produced by any action",
                e.kind
            )));
        }
        let act: ActionPayload = serde_json::from_value(e.payload.clone())
            .map_err(|err| ServiceError::CorruptLog(format!("action payload at {pos}: {err}")))?;
        let produced = session
            .apply(act.role, pos as u64, act.action, e.timestamp_ms)
            .map_err(|err| {
                ServiceError::CorruptLog(format!("action at {pos} no longer applies: {err}"))
            })?;
        let end = (pos + produced.len()).min(entries.len());
        compare(&produced, &entries[pos..end], pos)?;
        pos += produced.len();
    }
    Ok(session)
}

fn compare(produced: &[LogEntry], logged: &[LogEntry], offset: usize) -> Result<()> {
    if produced.len() != logged.len() {
        return Err(ServiceError::CorruptLog(format!(
            "log ends inside the events of entry {offset}"
        )));
    }
    for (p, l) in produced.iter().zip(logged) {
        if !p.same_event(l) {
            return Err(ServiceError::CorruptLog(format!(
                "entry {} differs on replay (`{}` vs `{}`)",
                l.index, p.kind, l.kind
            )));
        }
    }
    Ok(())
}
