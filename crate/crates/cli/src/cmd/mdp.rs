use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use ai_lab_core::mdp::rbj::{
    build_rbj_mdp, estimate_transitions, parse_state_name, perturb_and_resolve, simulate_rbj_game,
    solve_rbj, DeckConfig, GameEvent, GameOutcome, PolicyChooser, RbjAction, RbjGame,
};
use ai_lab_core::scenario::ScenarioKind;
use ai_lab_core::{RandomSource, Scalar};
use serde_json::{json, Map, Value};

use crate::args::{EstimateArgs, MdpCommand, PerturbArgs, PlayDeckArgs, SimulateArgs, SolveArgs};
use crate::output::{num, CliError, CliResult, Ctx, Report, Table};

/// Pairs with fewer visits are left out of the reported worst error.
const ESTIMATE_MIN_VISITS: u64 = 500;

pub fn run(ctx: Ctx, cmd: MdpCommand) -> CliResult<()> {
    match cmd {
        MdpCommand::Solve(a) => solve(ctx, a),
        MdpCommand::Simulate(a) => simulate(ctx, a),
        MdpCommand::Perturb(a) => perturb(ctx, a),
        MdpCommand::Estimate(a) => estimate(ctx, a),
        MdpCommand::Play(a) => play(ctx, a),
    }
}

fn load_deck(ctx: &mut Ctx, path: &Path) -> CliResult<DeckConfig> {
    let doc = super::load(ctx, path, ScenarioKind::Deck)?;
    Ok(doc.as_deck()?.clone())
}

fn solve(mut ctx: Ctx, args: SolveArgs) -> CliResult<()> {
    ctx.command("mdp solve");
    let deck = load_deck(&mut ctx, &args.deck)?;
    ctx.params(json!({ "gamma": args.gamma, "tol": args.tol }));
    let (mdp, vi) = solve_rbj(&deck, args.gamma, args.tol)?;

    let mut json = json!({
        "deck": args.deck.display().to_string(),
        "gamma": args.gamma,
        "tol": args.tol,
        "non_terminal_states": mdp.states().len(),
        "terminal_states": mdp.terminals().len(),
    });
    if let (Value::Object(out), Value::Object(body)) = (&mut json, vi.to_json(&mdp)) {
        out.extend(body);
    }
    let mut table = Table::new(&["sweep", "residual"]);
    for (i, r) in vi.residual_history.iter().enumerate() {
        table.push([(i + 1).to_string(), num(*r)]);
    }
    ctx.finish(Report { json, table })
}

/// Accepts a bare `{"(r,b)": action}` map or any object with such a map
/// under `"policy"`.
fn load_policy(path: &Path) -> CliResult<PolicyChooser> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io_error", format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::new("syntax_error", format!("{}: {e}", path.display())))?;
    let map = match value.get("policy") {
        Some(Value::Object(m)) => m.clone(),
        _ => match value {
            Value::Object(m) => m,
            _ => {
                return Err(CliError::new(
                    "validation_error",
                    "policy file must be a JSON object",
                ))
            }
        },
    };
    let mut table = BTreeMap::new();
    for (state, action) in map {
        let hand = parse_state_name(&state).ok_or_else(|| {
            CliError::new(
                "validation_error",
                format!("policy key `{state}` is not a hand like (r,b)"),
            )
        })?;
        let action: RbjAction = action
            .as_str()
            .ok_or_else(|| {
                CliError::new(
                    "validation_error",
                    format!("policy action for {state} must be a string"),
                )
            })?
            .parse()?;
        table.insert(hand, action);
    }
    Ok(PolicyChooser(table))
}

fn simulate(mut ctx: Ctx, args: SimulateArgs) -> CliResult<()> {
    ctx.command("mdp simulate");
    let deck = load_deck(&mut ctx, &args.deck)?;
    if args.games == 0 {
        return Err(CliError::new("domain_error", "need at least one game"));
    }
    if args.workers == 0 {
        return Err(CliError::new("domain_error", "need at least one worker"));
    }
    let policy = match &args.policy {
        Some(p) => {
            ctx.scenario(p);
            load_policy(p)?
        }
        None => {
            let (mdp, vi) = solve_rbj(&deck, 1.0, 1e-9)?;
            PolicyChooser::from_vi(&mdp, &vi)
        }
    };
    let seed = ctx.seed();
    ctx.params(json!({ "games": args.games, "workers": args.workers, "policy": args.policy.as_ref().map(|p| p.display().to_string()) }));

    let workers = args.workers.min(args.games);
    let blocks: Vec<CliResult<Vec<GameOutcome>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (lo, hi) = (w * args.games / workers, (w + 1) * args.games / workers);
                let deck = &deck;
                let mut chooser = PolicyChooser(policy.0.clone());
                scope.spawn(move || {
                    let mut rs = RandomSource::substream(seed, w as u64);
                    (lo..hi)
                        .map(|_| {
                            simulate_rbj_game(deck, &mut chooser, &mut rs).map_err(CliError::from)
                        })
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });

    let mut table = Table::new(&["game", "worker", "terminal", "score"]);
    let mut terminals: BTreeMap<String, u64> = BTreeMap::new();
    let mut per_worker = Vec::new();
    let mut total = 0.0;
    let mut game = 0;
    for (w, block) in blocks.into_iter().enumerate() {
        let block = block?;
        let sum: f64 = block.iter().map(|g| g.score).sum();
        per_worker.push(
            json!({ "worker": w, "games": block.len(), "mean_score": sum / block.len() as f64 }),
        );
        total += sum;
        for g in block {
            *terminals.entry(g.terminal.clone()).or_default() += 1;
            table.push([game.to_string(), w.to_string(), g.terminal, num(g.score)]);
            game += 1;
        }
    }
    let json = json!({
        "deck": args.deck.display().to_string(),
        "seed": seed,
        "games": args.games,
        "workers": workers,
        "mean_score": total / args.games as f64,
        "terminal_counts": terminals,
        "per_worker": per_worker,
    });
    ctx.finish(Report { json, table })
}

fn perturb(mut ctx: Ctx, args: PerturbArgs) -> CliResult<()> {
    ctx.command("mdp perturb");
    let deck = load_deck(&mut ctx, &args.deck)?;
    ctx.params(json!({ "set": args.edits, "gamma": args.gamma, "tol": args.tol }));
    let p = perturb_and_resolve(&deck, &args.edits, args.gamma, args.tol)?;
    let (bm, bv) = &p.baseline;
    let (em, ev) = &p.edited;

    let mut table = Table::new(&[
        "state",
        "baseline_value",
        "edited_value",
        "baseline_action",
        "edited_action",
    ]);
    let mut values = Vec::new();
    for (state, before, after) in &p.value_diff {
        let ba = bv.action_of(bm, state).unwrap_or_default();
        let ea = ev.action_of(em, state).unwrap_or_default();
        table.push([
            state.clone(),
            num(*before),
            num(*after),
            ba.to_string(),
            ea.to_string(),
        ]);
        values.push(json!({ "state": state, "baseline": before, "edited": after }));
    }
    let changes: Vec<Value> = p
        .policy_diff
        .iter()
        .map(|c| json!({ "state": c.state, "before": c.before, "after": c.after }))
        .collect();
    let json = json!({
        "deck": args.deck.display().to_string(),
        "edits": args.edits,
        "baseline_deck": p.baseline_deck,
        "edited_deck": p.edited_deck,
        "policy_diff": changes,
        "value_diff": values,
        "strict_hit": { "baseline": bv.strict_set(bm, "Hit"), "edited": ev.strict_set(em, "Hit") },
        "strict_stand": { "baseline": bv.strict_set(bm, "Stand"), "edited": ev.strict_set(em, "Stand") },
        "baseline": bv.to_json(bm),
        "edited": ev.to_json(em),
    });
    ctx.finish(Report { json, table })
}

fn estimate(mut ctx: Ctx, args: EstimateArgs) -> CliResult<()> {
    ctx.command("mdp estimate");
    let deck = load_deck(&mut ctx, &args.deck)?;
    let seed = ctx.seed();
    ctx.params(json!({ "games": args.games }));
    let counts = estimate_transitions(&deck, args.games, &mut RandomSource::new(seed))?;
    let mdp = build_rbj_mdp::<f64>(&deck, 1.0)?;

    let mut table = Table::new(&[
        "state",
        "action",
        "visits",
        "successor",
        "count",
        "frequency",
        "analytic",
    ]);
    let mut pairs = Vec::new();
    let mut worst: f64 = 0.0;
    for ((state, action), c) in &counts {
        let mut analytic: BTreeMap<String, f64> = BTreeMap::new();
        if let Some(s) = mdp.state_index(state) {
            if let Some(a) = mdp.actions(s).iter().position(|x| x == action) {
                for o in mdp.outcomes(s, a) {
                    *analytic
                        .entry(mdp.target_name(o.target).to_string())
                        .or_default() += f64::from_prob(&o.prob);
                }
            }
        }
        let mut names: Vec<&String> = analytic.keys().chain(c.successors.keys()).collect();
        names.sort();
        names.dedup();
        let mut rows = Map::new();
        for name in names {
            let freq = c.frequency(name);
            let p = analytic.get(name).copied().unwrap_or(0.0);
            if c.visits >= ESTIMATE_MIN_VISITS {
                worst = worst.max((freq - p).abs());
            }
            let count = c.successors.get(name).copied().unwrap_or(0);
            table.push([
                state.clone(),
                action.clone(),
                c.visits.to_string(),
                name.clone(),
                count.to_string(),
                num(freq),
                num(p),
            ]);
            rows.insert(
                name.clone(),
                json!({ "count": count, "frequency": freq, "analytic": p }),
            );
        }
        pairs.push(
            json!({ "state": state, "action": action, "visits": c.visits, "successors": rows }),
        );
    }
    let json = json!({
        "deck": args.deck.display().to_string(),
        "seed": seed,
        "games": args.games,
        "min_visits": ESTIMATE_MIN_VISITS,
        "max_abs_error": worst,
        "pairs": pairs,
    });
    ctx.finish(Report { json, table })
}

fn describe(event: &GameEvent) -> String {
    match event {
        GameEvent::Decision { state, action } => format!("{state}: {action}"),
        GameEvent::Draw { pile, card } => format!("drew {card:?} from the {pile} pile"),
        GameEvent::End { terminal, score } => format!("game over: {terminal}, score {score}"),
    }
}

fn play(mut ctx: Ctx, args: PlayDeckArgs) -> CliResult<()> {
    ctx.command("mdp play");
    let deck = load_deck(&mut ctx, &args.deck)?;
    let seed = ctx.seed();
    let mut rs = RandomSource::new(seed);
    let mut game = RbjGame::new(&deck, &mut rs)?;
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    while !game.is_over() {
        let (r, b) = game.hand();
        eprint!("hand: {r} red, {b} black. hit or stand? [h/s] ");
        let line = lines.next().ok_or_else(|| {
            CliError::new("domain_error", "input ended before the game finished")
        })??;
        let action: RbjAction = match line.trim().parse() {
            Ok(a) => a,
            Err(e) => {
                eprintln!("{e}");
                continue;
            }
        };
        for event in game.act(action)? {
            eprintln!("{}", describe(&event));
        }
    }
    let (terminal, score) = game.outcome().expect("game finished");
    let mut table = Table::new(&["step", "event"]);
    for (i, e) in game.log().iter().enumerate() {
        table.push([i.to_string(), describe(e)]);
    }
    let json = json!({
        "deck": args.deck.display().to_string(),
        "seed": seed,
        "terminal": terminal,
        "score": score,
        "log": game.log(),
    });
    ctx.finish(Report { json, table })
}
