pub mod hmm;
pub mod mdp;
pub mod q;
pub mod search;
pub mod serve;
pub mod validate;

use std::path::Path;

use ai_lab_core::scenario::{load_scenario, ScenarioDocument, ScenarioKind};

use crate::output::{CliResult, Ctx};

/// Load a scenario of the given kind, recording it in the manifest and
/// reporting its warnings.
pub fn load(ctx: &mut Ctx, path: &Path, kind: ScenarioKind) -> CliResult<ScenarioDocument> {
    let doc = load_scenario(Some(kind), path)?;
    ctx.scenario(path);
    for w in doc.warnings() {
        ctx.warn(&w);
    }
    Ok(doc)
}
