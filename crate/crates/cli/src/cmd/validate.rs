use ai_lab_core::scenario::load_scenario;
use serde_json::json;

use crate::args::ValidateArgs;
use crate::output::{CliResult, Ctx, Report, Table};

pub fn run(mut ctx: Ctx, args: ValidateArgs) -> CliResult<()> {
    ctx.command("validate");
    let doc = load_scenario(None, &args.scenario)?;
    ctx.scenario(&args.scenario);
    let warnings = doc.warnings();
    for w in &warnings {
        ctx.warn(w);
    }
    let mut table = Table::new(&["scenario", "kind", "valid", "warnings"]);
    table.push([
        args.scenario.display().to_string(),
        doc.kind().to_string(),
        "true".to_string(),
        warnings.len().to_string(),
    ]);
    let json = json!({
        "scenario": args.scenario.display().to_string(),
        "kind": doc.kind(),
        "version": doc.version,
        "valid": true,
        "warnings": warnings,
    });
    ctx.finish(Report { json, table })
}
