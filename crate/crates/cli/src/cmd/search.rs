use ai_lab_core::scenario::ScenarioKind;
use ai_lab_core::search::{graph_search, FrontierDiscipline};
use serde_json::json;

use crate::args::SearchArgs;
use crate::output::{num, CliResult, Ctx, Report, Table};

pub fn run(mut ctx: Ctx, args: SearchArgs) -> CliResult<()> {
    ctx.command("search");
    let doc = super::load(&mut ctx, &args.scenario, ScenarioKind::Search)?;
    let graph = doc.as_search()?;
    let discipline: FrontierDiscipline = args.algo.parse()?;
    ctx.params(json!({ "algo": discipline.algorithm_name() }));
    let result = graph_search(graph, discipline)?;

    let mut table = Table::new(&["step", "state", "action", "step_cost", "cumulative_cost"]);
    if let Some(first) = result.path_states.first() {
        table.push(["0", first.as_str(), "", "0", "0"]);
    }
    let mut total = 0.0;
    for (i, (pair, action)) in result
        .path_states
        .windows(2)
        .zip(&result.path_actions)
        .enumerate()
    {
        let cost = graph
            .successors_of(&pair[0])?
            .into_iter()
            .filter(|(a, to, _)| a == action && *to == pair[1])
            .map(|(_, _, c)| c)
            .fold(f64::INFINITY, f64::min);
        total += cost;
        table.push([
            (i + 1).to_string(),
            pair[1].clone(),
            action.clone(),
            num(cost),
            num(total),
        ]);
    }

    if let Some(path) = &args.trace {
        let trace = serde_json::to_value(&result.trace).expect("trace serializes");
        ctx.write_artifact(path, &trace)?;
    }
    let json = json!({
        "scenario": args.scenario.display().to_string(),
        "algorithm": discipline.algorithm_name(),
        "discipline": discipline,
        "found": result.found,
        "path_states": result.path_states,
        "path_actions": result.path_actions,
        "total_cost": result.total_cost,
        "expansions": result.expansions,
    });
    ctx.finish(Report { json, table })
}
