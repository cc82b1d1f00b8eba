//! Redaction is checked structurally: no hidden key may appear at any depth
//! of any payload a non-observer role can receive.

use std::path::PathBuf;

use ai_lab_service::log::read_jsonl;
use ai_lab_service::redact::find_hidden;
use ai_lab_service::{
    hidden_fields, replay, ActionRequest, CreateRequest, Role, ScenarioRef, ServiceConfig,
    SessionStore,
};
use serde_json::{json, Value};

use crate::support::{choose, drive, golden_specs, GoldenSpec};

fn scan(what: &str, v: &Value, hidden: &[&str]) -> Result<(), String> {
    match find_hidden(v, hidden).first() {
        Some(path) => Err(format!("{what} exposes {path}")),
        None => Ok(()),
    }
}

async fn scan_all_roles(
    store: &SessionStore,
    spec: &GoldenSpec,
    id: &str,
) -> Result<usize, String> {
    let mut n = 0;
    for &role in spec
        .activity
        .roles()
        .iter()
        .filter(|&&r| r != Role::Observer)
    {
        let hidden = hidden_fields(spec.activity, role);
        let ctx = format!("{} {role}", spec.name);
        let view = store
            .view(id, role.as_str())
            .await
            .map_err(|e| e.to_string())?;
        scan(&format!("{ctx} view"), &view, hidden)?;
        let log = store
            .log(id, Some(role.as_str()))
            .await
            .map_err(|e| e.to_string())?;
        scan(&format!("{ctx} log"), &json!(log), hidden)?;
        n += 2;
    }
    Ok(n)
}

async fn live_session(store: &SessionStore, spec: &GoldenSpec) -> Result<usize, String> {
    let req = CreateRequest {
        activity: spec.activity.as_str().into(),
        scenario: ScenarioRef::Name(spec.scenario.into()),
        seed: Some(spec.seed),
        options: Some(spec.options()),
    };
    let id = store.create(req).await.map_err(|e| e.to_string())?.id;
    let mut scans = scan_all_roles(store, spec, &id).await?;
    let doc = spec.doc();
    let mut turn = 0;
    loop {
        let view = store
            .view(&id, "observer")
            .await
            .map_err(|e| e.to_string())?;
        let Some((role, action)) = choose(spec.activity, &doc, &view, turn) else {
            break;
        };
        let req = ActionRequest {
            role: role.as_str().into(),
            expected_index: view["index"].as_u64().unwrap(),
            action,
        };
        let res = store
            .apply(&id, req)
            .await
            .map_err(|e| format!("{}: {e}", spec.name))?;
        if role != Role::Observer {
            scan(
                &format!("{} {role} action response", spec.name),
                &json!(res.events),
                hidden_fields(spec.activity, role),
            )?;
        }
        scans += scan_all_roles(store, spec, &id).await?;
        turn += 1;
    }
    // The event stream each role would receive over the socket.
    let end = store.raw_log(&id).await.map_err(|e| e.to_string())?.len();
    for &role in spec
        .activity
        .roles()
        .iter()
        .filter(|&&r| r != Role::Observer)
    {
        let mut sub = store
            .subscribe(&id, role.as_str(), Some(0))
            .await
            .map_err(|e| e.to_string())?;
        for _ in 0..end {
            let msg = sub.next().await.ok_or("event stream ended early")?;
            scan(
                &format!("{} {role} stream", spec.name),
                &msg,
                hidden_fields(spec.activity, role),
            )?;
            scans += 1;
        }
    }
    let log = store.raw_log(&id).await.map_err(|e| e.to_string())?;
    let replayed = replay(&log).map_err(|e| format!("{}: {e}", spec.name))?;
    let live = store.state_string(&id).await.map_err(|e| e.to_string())?;
    if replayed.state_string() != live {
        return Err(format!(
            "{}: replay differs from the live session",
            spec.name
        ));
    }
    Ok(scans)
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../service/tests/golden")
}

pub fn check() -> super::Outcome {
    let rt = tokio::runtime::Builder::new_current_thread()
        .build()
        .map_err(|e| e.to_string())?;
    let store = SessionStore::open(ServiceConfig::default()).map_err(|e| e.to_string())?;
    let specs = golden_specs();
    let mut scans = 0;
    for spec in &specs {
        scans += rt.block_on(live_session(&store, spec))?;
    }
    for spec in &specs {
        let log = read_jsonl(&golden_dir().join(format!("{}.jsonl", spec.name)))
            .map_err(|e| e.to_string())?;
        let frozen =
            std::fs::read_to_string(golden_dir().join(format!("{}.state.json", spec.name)))
                .map_err(|e| e.to_string())?;
        let replayed = replay(&log).map_err(|e| format!("{}: {e}", spec.name))?;
        if replayed.state_string() != frozen {
            return Err(format!("{}: replayed golden state differs", spec.name));
        }
        if drive(spec, |_| {}).state_string() != frozen {
            return Err(format!("{}: live golden state differs", spec.name));
        }
    }
    Ok(format!(
        "{scans} structural scans over 4 activities, {} golden sessions replayed byte-for-byte",
        specs.len()
    ))
}
