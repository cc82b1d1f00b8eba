use std::io::BufRead;
use std::path::Path;

use ai_lab_core::hmm::{
    build_hmm, exclude, filter_step, filter_trace, play_greedy_game, run_particle_filter,
    total_variation, Belief, Evidence, EvidenceTrace, GameStatus, HmmModel, HunterAction, MapSpec,
    TwoSpiesState,
};
use ai_lab_core::scenario::ScenarioKind;
use ai_lab_core::{Exact, RandomSource};
use serde_json::{json, Map, Value};

use crate::args::{FilterArgs, HmmCommand, PfArgs, PlayMapArgs};
use crate::output::{num, CliError, CliResult, Ctx, Report, Table};

pub fn run(ctx: Ctx, cmd: HmmCommand) -> CliResult<()> {
    match cmd {
        HmmCommand::Filter(a) => filter(ctx, a),
        HmmCommand::Play(a) => play(ctx, a),
        HmmCommand::Pf(a) => pf(ctx, a),
    }
}

fn load_map(ctx: &mut Ctx, path: &Path) -> CliResult<(MapSpec, HmmModel)> {
    let doc = super::load(ctx, path, ScenarioKind::Map)?;
    let map = doc.as_map()?.clone();
    let model = build_hmm(&map);
    Ok((map, model))
}

fn load_trace(ctx: &mut Ctx, path: &Path) -> CliResult<Vec<Evidence>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io_error", format!("{}: {e}", path.display())))?;
    let trace: EvidenceTrace = serde_json::from_str(&text)
        .map_err(|e| CliError::new("validation_error", format!("{}: {e}", path.display())))?;
    ctx.scenario(path);
    Ok(trace.evidence)
}

fn filter(mut ctx: Ctx, args: FilterArgs) -> CliResult<()> {
    ctx.command("hmm filter");
    let (_, model) = load_map(&mut ctx, &args.map)?;
    let evidence = load_trace(&mut ctx, &args.trace)?;
    ctx.params(json!({ "prior": "uniform" }));
    let beliefs = filter_trace(&model, &Belief::<Exact>::uniform(model.len()), &evidence)?;

    let mut table = Table::new(&["round", "city", "probability"]);
    let mut rounds = Vec::new();
    for (k, (e, b)) in evidence.iter().zip(&beliefs).enumerate() {
        let mut exact = Map::new();
        for (c, p) in model.cities().iter().zip(b.probs()) {
            exact.insert(c.clone(), json!(p.to_string()));
        }
        for (c, p) in model.cities().iter().zip(b.to_f64()) {
            table.push([(k + 1).to_string(), c.clone(), num(p)]);
        }
        rounds.push(json!({
            "round": k + 1,
            "observation": e.observation,
            "failed_capture_at": e.failed_capture_at,
            "belief": b.to_json(&model),
            "exact": exact,
            "most_likely": model.cities()[b.argmax()],
        }));
    }
    let json = json!({
        "map": args.map.display().to_string(),
        "trace": args.trace.display().to_string(),
        "prior": "uniform",
        "rounds": rounds,
    });
    ctx.finish(Report { json, table })
}

fn pf(mut ctx: Ctx, args: PfArgs) -> CliResult<()> {
    ctx.command("hmm pf");
    let (map, model) = load_map(&mut ctx, &args.map)?;
    if args.runs == 0 || args.workers == 0 {
        return Err(CliError::new(
            "domain_error",
            "runs and workers must be positive",
        ));
    }
    let seed = ctx.seed();
    let evidence = match &args.trace {
        Some(p) => load_trace(&mut ctx, p)?,
        None => play_greedy_game(&map, &model, &mut RandomSource::new(seed))?.evidence(),
    };
    ctx.params(json!({
        "particles": args.particles,
        "runs": args.runs,
        "workers": args.workers,
        "trace": args.trace.as_ref().map(|p| p.display().to_string()),
    }));
    let exact: Vec<Vec<f64>> =
        filter_trace(&model, &Belief::<f64>::uniform(model.len()), &evidence)?
            .iter()
            .map(Belief::to_f64)
            .collect();

    // Run k always draws from sub-stream k, so the output does not depend
    // on how runs are spread over workers.
    let workers = args.workers.min(args.runs);
    let mut runs: Vec<(usize, CliResult<Vec<Vec<f64>>>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (model, evidence) = (&model, &evidence);
                scope.spawn(move || {
                    (w..args.runs)
                        .step_by(workers)
                        .map(|k| {
                            let mut rs = RandomSource::substream(seed, k as u64);
                            (
                                k,
                                run_particle_filter(model, evidence, args.particles, &mut rs)
                                    .map_err(CliError::from),
                            )
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    runs.sort_by_key(|(k, _)| *k);

    let mut table = Table::new(&["run", "round", "tv"]);
    let mut mean_tv = vec![0.0; evidence.len()];
    let mut detail = Vec::new();
    for (k, hist) in runs {
        let hist = hist?;
        let tv: Vec<f64> = hist
            .iter()
            .zip(&exact)
            .map(|(h, e)| total_variation(h, e))
            .collect();
        for (r, d) in tv.iter().enumerate() {
            table.push([k.to_string(), (r + 1).to_string(), num(*d)]);
            mean_tv[r] += d / args.runs as f64;
        }
        detail.push(json!({ "run": k, "tv": tv, "histograms": hist }));
    }
    let json = json!({
        "map": args.map.display().to_string(),
        "seed": seed,
        "particles": args.particles,
        "runs": args.runs,
        "evidence": evidence,
        "exact": exact,
        "mean_tv": mean_tv,
        "per_run": detail,
    });
    ctx.finish(Report { json, table })
}

fn parse_hunter(line: &str) -> Option<HunterAction> {
    let mut words = line.split_whitespace();
    match (words.next()?, words.next()) {
        ("stay", None) => Some(HunterAction::Stay),
        ("capture", None) => Some(HunterAction::Capture),
        ("move", Some(to)) => Some(HunterAction::Move { to: to.to_string() }),
        _ => None,
    }
}

fn play(mut ctx: Ctx, args: PlayMapArgs) -> CliResult<()> {
    ctx.command("hmm play");
    let (map, model) = load_map(&mut ctx, &args.map)?;
    let seed = ctx.seed();
    let mut rs = RandomSource::new(seed);
    let mut state = TwoSpiesState::new(&map, &mut rs);
    let mut belief = Belief::<f64>::uniform(map.len());
    let mut beliefs = Vec::new();
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();

    while state.status == GameStatus::Running {
        let (_, region) = state.spy_turn(&map, &model, &mut rs)?;
        belief = filter_step(&belief, &model, &region, None)?;
        eprintln!(
            "round {} of {}: the spy reports from {region}",
            state.round, state.rounds
        );
        for (c, p) in model.cities().iter().zip(belief.probs()) {
            eprintln!("  {c:<12} {p:.4}");
        }
        let here = map.city_index(&state.hunter_city)?;
        let near: Vec<&str> = map
            .neighbors(here)
            .iter()
            .map(|&n| map.city_id(n))
            .collect();
        loop {
            eprint!(
                "you are in {} (neighbors: {}). move <city> | stay | capture? ",
                state.hunter_city,
                near.join(", ")
            );
            let line = lines.next().ok_or_else(|| {
                CliError::new("domain_error", "input ended before the game finished")
            })??;
            let Some(action) = parse_hunter(line.trim()) else {
                eprintln!("expected `move <city>`, `stay` or `capture`");
                continue;
            };
            match state.hunter_act(&map, &action) {
                Ok(()) => break,
                Err(e) => eprintln!("{e}"),
            }
        }
        let rec = state.history.last().expect("round recorded");
        if rec.capture == Some(false) {
            eprintln!("no spy in {}", state.hunter_city);
            belief = exclude(&belief, &model, &state.hunter_city)?;
        }
        beliefs.push(belief.to_json(&model));
    }
    match state.status {
        GameStatus::Captured => eprintln!("captured the spy in {}", state.spy_city),
        _ => eprintln!("the spy evaded you; it was in {}", state.spy_city),
    }

    let mut table = Table::new(&[
        "round",
        "spy_city",
        "observation",
        "action",
        "hunter_city",
        "capture",
    ]);
    for r in &state.history {
        let action = match &r.hunter_action {
            Some(HunterAction::Move { to }) => format!("move {to}"),
            Some(HunterAction::Stay) => "stay".into(),
            Some(HunterAction::Capture) => "capture".into(),
            None => String::new(),
        };
        let capture = r.capture.map(|c| c.to_string()).unwrap_or_default();
        table.push([
            r.round.to_string(),
            r.spy_city.clone(),
            r.observation.clone(),
            action,
            r.hunter_city.clone().unwrap_or_default(),
            capture,
        ]);
    }
    let json = json!({
        "map": args.map.display().to_string(),
        "seed": seed,
        "game": state,
        "beliefs": Value::Array(beliefs),
    });
    ctx.finish(Report { json, table })
}
