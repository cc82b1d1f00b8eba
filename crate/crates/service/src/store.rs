use std::collections::{HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use ai_lab_core::scenario::{bundled, load_scenario, parse_scenario, ScenarioDocument};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::{broadcast, Mutex};

use crate::activity::{Activity, Role, SessionOptions};
use crate::error::{Result, ServiceError};
use crate::log::{append_jsonl, read_jsonl, LogEntry};
use crate::session::{entry_view, replay, Session};

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Extra scenario files addressable by name.
    pub scenario_dir: Option<PathBuf>,
    /// Where session logs are kept as `<id>.jsonl`; in-memory only if unset.
    pub data_dir: Option<PathBuf>,
    /// Serve the brute-force oracle endpoint.
    pub debug_oracle: bool,
}

/// A scenario given by name or as an inline document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Name(String),
    Inline(Value),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateRequest {
    pub activity: String,
    pub scenario: ScenarioRef,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub options: Option<SessionOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateResponse {
    pub id: String,
    pub seed: u64,
    pub index: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionRequest {
    pub role: String,
    pub expected_index: u64,
    pub action: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionResponse {
    pub accepted: bool,
    /// Expected index for the next action.
    pub index: u64,
    /// New entries, redacted for the acting role.
    pub events: Vec<Value>,
}

pub(crate) struct SessionHandle {
    session: Mutex<Session>,
    events: broadcast::Sender<LogEntry>,
}

/// All live sessions. Each session sits behind its own lock, so actions on
/// one session run one at a time while different sessions proceed in
/// parallel.
pub struct SessionStore {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<SessionHandle>>>,
    counter: AtomicU64,
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn parse_role(s: &str, activity: Activity) -> Result<Role> {
    let role: Role = s.parse().map_err(|_| ServiceError::UnknownRole {
        role: s.into(),
        activity: activity.as_str().into(),
    })?;
    activity.check_role(role)?;
    Ok(role)
}

impl SessionStore {
    /// Open a store, replaying any session logs found in the data directory.
    pub fn open(config: ServiceConfig) -> Result<Self> {
        let store = SessionStore {
            config,
            sessions: RwLock::new(HashMap::new()),
            counter: AtomicU64::new(0),
        };
        if let Some(dir) = &store.config.data_dir {
            std::fs::create_dir_all(dir)
                .map_err(|e| ServiceError::Io(format!("{}: {e}", dir.display())))?;
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| ServiceError::Io(format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            paths.sort();
            for p in paths {
                let session = replay(&read_jsonl(&p)?)?;
                store.insert(session);
            }
        }
        Ok(store)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn insert(&self, session: Session) -> Arc<SessionHandle> {
        let (tx, _) = broadcast::channel(1024);
        let id = session.id().to_string();
        let handle = Arc::new(SessionHandle {
            session: Mutex::new(session),
            events: tx,
        });
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id, handle.clone());
        handle
    }

    fn handle(&self, id: &str) -> Result<Arc<SessionHandle>> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.into()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .expect("session map lock")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    fn fresh_id(&self) -> String {
        let map = self.sessions.read().expect("session map lock");
        loop {
            let n = self.counter.fetch_add(1, Ordering::Relaxed) + 1;
            let id = format!("s{n:06}");
            if !map.contains_key(&id) {
                return id;
            }
        }
    }

    /// Resolve a scenario by name (scenario directory first, then bundled
    /// fixtures) or parse an inline document.
    pub fn resolve_scenario(&self, scenario: &ScenarioRef) -> Result<ScenarioDocument> {
        match scenario {
            ScenarioRef::Inline(v) => Ok(parse_scenario(None, &v.to_string())?),
            ScenarioRef::Name(name) => {
                if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
                    return Err(ServiceError::Validation(format!(
                        "bad scenario name `{name}`"
                    )));
                }
                if let Some(dir) = &self.config.scenario_dir {
                    let path = dir.join(name);
                    if path.is_file() {
                        return Ok(load_scenario(None, &path)?);
                    }
                }
                match bundled(name) {
                    Some(text) => Ok(parse_scenario(None, text)?),
                    None => Err(ServiceError::Validation(format!(
                        "unknown scenario `{name}`"
                    ))),
                }
            }
        }
    }

    fn log_path(&self, id: &str) -> Option<PathBuf> {
        self.config
            .data_dir
            .as_deref()
            .map(|d: &Path| d.join(format!("{id}.jsonl")))
    }

    pub async fn create(&self, req: CreateRequest) -> Result<CreateResponse> {
        let activity: Activity = req.activity.parse()?;
        let doc = self.resolve_scenario(&req.scenario)?;
        let seed = req.seed.unwrap_or_else(|| {
            let t = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_nanos() as u64);
            t ^ self.counter.load(Ordering::Relaxed).rotate_left(32)
        });
        let id = self.fresh_id();
        let session = Session::create(
            id.clone(),
            activity,
            &doc,
            seed,
            req.options.unwrap_or_default(),
            now_ms(),
        )?;
        if let Some(path) = self.log_path(&id) {
            append_jsonl(&path, session.log())?;
        }
        let index = session.next_index();
        self.insert(session);
        Ok(CreateResponse { id, seed, index })
    }

    pub async fn view(&self, id: &str, role: &str) -> Result<Value> {
        let h = self.handle(id)?;
        let s = h.session.lock().await;
        s.view(parse_role(role, s.activity())?)
    }

    pub async fn apply(&self, id: &str, req: ActionRequest) -> Result<ActionResponse> {
        let h = self.handle(id)?;
        let mut s = h.session.lock().await;
        let role = parse_role(&req.role, s.activity())?;
        let mut next = s.clone();
        let entries = next.apply(role, req.expected_index, req.action, now_ms())?;
        if let Some(path) = self.log_path(id) {
            append_jsonl(&path, &entries)?;
        }
        *s = next;
        for e in &entries {
            // No subscribers is fine.
            let _ = h.events.send(e.clone());
        }
        Ok(ActionResponse {
            accepted: true,
            index: s.next_index(),
            events: entries.iter().map(|e| s.entry_for(e, role)).collect(),
        })
    }

    /// The log as `role` may see it; the observer gets the raw entries.
    pub async fn log(&self, id: &str, role: Option<&str>) -> Result<Vec<Value>> {
        let h = self.handle(id)?;
        let s = h.session.lock().await;
        let role = match role {
            Some(r) => parse_role(r, s.activity())?,
            None => Role::Observer,
        };
        s.log_for(role)
    }

    pub async fn raw_log(&self, id: &str) -> Result<Vec<LogEntry>> {
        let h = self.handle(id)?;
        let s = h.session.lock().await;
        Ok(s.log().to_vec())
    }

    pub async fn state_string(&self, id: &str) -> Result<String> {
        let h = self.handle(id)?;
        let s = h.session.lock().await;
        Ok(s.state_string())
    }

    pub async fn oracle(&self, id: &str) -> Result<Value> {
        if !self.config.debug_oracle {
            return Err(ServiceError::NotFound(
                "the oracle endpoint is disabled".into(),
            ));
        }
        let h = self.handle(id)?;
        let s = h.session.lock().await;
        s.oracle()
    }

    /// Subscribe to a session's events from index `from`. The backlog and the
    /// live receiver are taken under the session lock, so nothing is missed
    /// or repeated.
    pub async fn subscribe(&self, id: &str, role: &str, from: Option<u64>) -> Result<Subscription> {
        let h = self.handle(id)?;
        let s = h.session.lock().await;
        let role = parse_role(role, s.activity())?;
        let from = from.unwrap_or(0).min(s.next_index());
        let backlog = s.log()[from as usize..].iter().cloned().collect();
        Ok(Subscription {
            rx: h.events.subscribe(),
            backlog,
            role,
            activity: s.activity(),
            next: from,
        })
    }
}

/// A role's event stream: backlog first, then live entries, in index order.
pub struct Subscription {
    rx: broadcast::Receiver<LogEntry>,
    backlog: VecDeque<LogEntry>,
    role: Role,
    activity: Activity,
    next: u64,
}

impl Subscription {
    pub fn role(&self) -> Role {
        self.role
    }

    /// Next entry redacted for the role, or `None` if the stream fell too
    /// far behind and must reconnect.
    pub async fn next(&mut self) -> Option<Value> {
        let entry = if let Some(e) = self.backlog.pop_front() {
            e
        } else {
            loop {
                match self.rx.recv().await {
                    Ok(e) if e.index < self.next => continue,
                    Ok(e) => break e,
                    Err(_) => return None,
                }
            }
        };
        self.next = entry.index + 1;
        let mut v = entry_view(&entry, self.activity, self.role);
        if let Some(m) = v.as_object_mut() {
            m.remove("timestamp_ms");
            m.remove("prev_hash");
            m.remove("hash");
        }
        Some(v)
    }
}
