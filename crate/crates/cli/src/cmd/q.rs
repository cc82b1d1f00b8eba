use ai_lab_core::qlearn::{greedy_policy, train, QParams};
use ai_lab_core::scenario::ScenarioKind;
use ai_lab_core::RandomSource;
use serde_json::{json, Map, Value};

use crate::args::{QCommand, TrainArgs};
use crate::output::{num, CliResult, Ctx, Report, Table};

pub fn run(ctx: Ctx, cmd: QCommand) -> CliResult<()> {
    match cmd {
        QCommand::Train(a) => train_cmd(ctx, a),
    }
}

fn train_cmd(mut ctx: Ctx, args: TrainArgs) -> CliResult<()> {
    ctx.command("q train");
    let doc = super::load(&mut ctx, &args.grid, ScenarioKind::Grid)?;
    let grid = doc.as_grid()?;
    let mut params = QParams::new(args.alpha, args.gamma, args.explore_faces, args.die_faces)?;
    params.step_budget = args.step_budget;
    params.validate()?;
    let seed = ctx.seed();
    let param_json = json!({
        "episodes": args.episodes,
        "alpha": args.alpha,
        "gamma": args.gamma,
        "explore_faces": args.explore_faces,
        "die_faces": args.die_faces,
        "step_budget": params.budget(grid),
        "snapshots": args.snapshots,
    });
    ctx.params(param_json.clone());

    let out = train(
        grid,
        &params,
        args.episodes,
        &args.snapshots,
        &mut RandomSource::new(seed),
    )?;
    let policy: Map<String, Value> = greedy_policy(&out.table, grid)?
        .into_iter()
        .map(|(c, a)| (c.to_string(), json!(a)))
        .collect();
    let visits: Map<String, Value> = out
        .visits
        .iter()
        .map(|(c, n)| (c.to_string(), json!(n)))
        .collect();
    let snapshots: Vec<Value> = out
        .snapshots
        .iter()
        .map(|(k, t)| json!({ "episode": k, "table": t.to_json() }))
        .collect();

    let mut table = Table::new(&["episode", "return", "length"]);
    for (i, (r, n)) in out.returns.iter().zip(&out.episode_lengths).enumerate() {
        table.push([(i + 1).to_string(), num(*r), n.to_string()]);
    }
    let json = json!({
        "grid": args.grid.display().to_string(),
        "seed": seed,
        "params": param_json,
        "final_table": out.table.to_json(),
        "greedy_policy": policy,
        "visits": visits,
        "snapshots": snapshots,
        "returns": out.returns,
        "episode_lengths": out.episode_lengths,
    });
    ctx.finish(Report { json, table })
}
