//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails or runs over its time budget.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ai_lab_acceptance::{paths, rbj as oracle};
use ai_lab_core::hmm::{
    brute_force_posterior, build_hmm, filter_trace, play_greedy_game, run_particle_filter,
    total_variation, Belief, EvidenceTrace, GameStatus,
};
use ai_lab_core::mdp::rbj::{parse_state_name, state_name};
use ai_lab_core::mdp::{
    build_rbj_mdp, estimate_transitions, gridworld_to_mdp, perturb_and_resolve, solve_rbj,
    value_iteration,
};
use ai_lab_core::qlearn::{greedy_policy, train, QParams};
use ai_lab_core::scenario::{bundled_doc, ScenarioKind, BUNDLED};
use ai_lab_core::search::{graph_search, FrontierDiscipline};
use ai_lab_core::{Exact, RandomSource, Scalar};

mod redaction;
#[path = "../../service/tests/support/mod.rs"]
mod support;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

const DECKS: [&str; 6] = [
    "red_black_default.deck",
    "deck_big_jackpot.deck",
    "deck_harsh_bust.deck",
    "deck_two_faces.deck",
    "deck_three_red.deck",
    "deck_auto_jackpot.deck",
];

fn search_optimality() -> Outcome {
    let mut fixtures = 0;
    let mut astar_checked = 0;
    let mut greedy_worse = Vec::new();
    for (name, _) in BUNDLED.iter().filter(|(n, _)| n.ends_with(".search")) {
        let doc = bundled_doc(name);
        assert_eq!(doc.kind(), ScenarioKind::Search);
        let g = doc.as_search().map_err(|e| e.to_string())?;
        ensure!(g.len() <= 12, "{name}: {} states", g.len());
        fixtures += 1;
        let best = paths::best_from(g, g.initial());
        let (Some(edges), Some(cost)) = (best.edges, best.cost) else {
            return Err(format!("{name}: goal unreachable in the fixture"));
        };

        let bfs = graph_search(g, FrontierDiscipline::Fifo).map_err(|e| e.to_string())?;
        ensure!(
            bfs.found && bfs.path_actions.len() == edges,
            "{name}: bfs {} edges, oracle {edges}",
            bfs.path_actions.len()
        );
        let ucs = graph_search(g, FrontierDiscipline::PriorityG).map_err(|e| e.to_string())?;
        ensure!(
            ucs.found && ucs.total_cost == cost,
            "{name}: ucs cost {}, oracle {cost}",
            ucs.total_cost
        );
        ensure!(
            paths::path_cost(g, &ucs.path_states, &ucs.path_actions) == Some(cost),
            "{name}: ucs path does not price to its cost"
        );
        let dfs = graph_search(g, FrontierDiscipline::Lifo).map_err(|e| e.to_string())?;
        ensure!(
            dfs.found
                && paths::path_cost(g, &dfs.path_states, &dfs.path_actions) == Some(dfs.total_cost),
            "{name}: dfs path is not a real path"
        );

        if let Some(h) = g.heuristic() {
            for (s, hs) in h.iter().enumerate() {
                if let Some(true_cost) = paths::best_from(g, s).cost {
                    ensure!(
                        *hs <= true_cost,
                        "{name}: heuristic overestimates at {}",
                        g.id(s)
                    );
                }
            }
            let astar =
                graph_search(g, FrontierDiscipline::PriorityGPlusH).map_err(|e| e.to_string())?;
            ensure!(
                astar.total_cost == cost,
                "{name}: A* cost {}, optimum {cost}",
                astar.total_cost
            );
            astar_checked += 1;
            let greedy =
                graph_search(g, FrontierDiscipline::PriorityH).map_err(|e| e.to_string())?;
            ensure!(greedy.found, "{name}: greedy found nothing");
            if greedy.total_cost > cost {
                greedy_worse.push(*name);
            }
        }
    }
    ensure!(
        fixtures == 10,
        "expected 10 search fixtures, found {fixtures}"
    );
    ensure!(
        !greedy_worse.is_empty(),
        "no fixture shows greedy suboptimality"
    );
    Ok(format!(
        "{fixtures} graphs, A* checked on {astar_checked}, greedy suboptimal on {}",
        greedy_worse.join(", ")
    ))
}

fn rbj_state_count() -> Outcome {
    let deck = bundled_doc("red_black_default.deck")
        .as_deck()
        .unwrap()
        .clone();
    let mdp = build_rbj_mdp(&deck, 1.0).map_err(|e| e.to_string())?;
    let terminals: Vec<&str> = mdp.terminals().iter().map(|t| t.id.as_str()).collect();
    ensure!(
        mdp.states().len() == 9,
        "{} non-terminal states",
        mdp.states().len()
    );
    ensure!(
        terminals == ["Bust", "Single", "Double", "Triple", "Jackpot"],
        "terminals {terminals:?}"
    );
    Ok("9 non-terminal, 5 terminal".into())
}

fn rbj_convergence() -> Outcome {
    let deck = bundled_doc("red_black_default.deck")
        .as_deck()
        .unwrap()
        .clone();
    let mdp = build_rbj_mdp(&deck, 1.0).map_err(|e| e.to_string())?;
    let vi = value_iteration(&mdp, 1e-9, 1000).map_err(|e| e.to_string())?;
    ensure!(
        vi.iterations_to_converge <= 6,
        "{} sweeps",
        vi.iterations_to_converge
    );
    Ok(format!("{} sweeps", vi.iterations_to_converge))
}

fn rbj_oracle() -> Outcome {
    let mut states = 0;
    for name in DECKS {
        let deck = bundled_doc(name).as_deck().unwrap().clone();
        let mut ex = oracle::Expectimax::new(&deck);
        let hands = ex.decision_hands();

        let (mdp, vi) = solve_rbj(&deck, 1.0, 1e-12).map_err(|e| e.to_string())?;
        let exact_tol = Exact::parse_literal("1/1000000000000").unwrap();
        let (emdp, evi) =
            solve_rbj(&deck, Exact::from_usize(1), exact_tol).map_err(|e| e.to_string())?;
        let sets = evi.optimal_action_sets(&emdp);

        ensure!(
            mdp.states().len() == hands.len(),
            "{name}: {} states vs {} hands",
            mdp.states().len(),
            hands.len()
        );
        for (r, b) in hands {
            let id = state_name(r, b);
            let want = ex.hand(r, b);
            let got = vi
                .value_of(&mdp, &id)
                .ok_or(format!("{name}: no state {id}"))?;
            let diff = (got - want.value().to_f64()).abs();
            ensure!(
                diff <= 1e-12,
                "{name} {id}: value {got} vs {}",
                want.value().to_f64()
            );
            let s = emdp.state_index(&id).unwrap();
            ensure!(
                evi.values[s] == want.value(),
                "{name} {id}: exact value differs"
            );
            ensure!(
                sets[s] == want.best_actions(),
                "{name} {id}: actions {:?} vs {:?}",
                sets[s],
                want.best_actions()
            );
            states += 1;
        }
    }
    Ok(format!("{} decks, {states} states", DECKS.len()))
}

fn rbj_monotonicity() -> Outcome {
    let deck = bundled_doc("red_black_default.deck")
        .as_deck()
        .unwrap()
        .clone();
    let tol = Exact::parse_literal("1/1000000000000").unwrap();
    let one = Exact::from_usize(1);
    let mut report = Vec::new();
    for (edit, action) in [("scores.jackpot=300", "Hit"), ("scores.bust=-500", "Stand")] {
        let p = perturb_and_resolve(&deck, &[edit.to_string()], one.clone(), tol.clone())
            .map_err(|e| e.to_string())?;
        let before: BTreeSet<String> = p
            .baseline
            .1
            .strict_set(&p.baseline.0, action)
            .into_iter()
            .collect();
        let after: BTreeSet<String> = p
            .edited
            .1
            .strict_set(&p.edited.0, action)
            .into_iter()
            .collect();
        ensure!(
            before.is_subset(&after),
            "{edit}: strict {action} set shrank from {before:?} to {after:?}"
        );
        report.push(format!("{action} {}→{}", before.len(), after.len()));
    }
    Ok(report.join(", "))
}

fn rbj_transition_estimation() -> Outcome {
    let deck = bundled_doc("red_black_default.deck")
        .as_deck()
        .unwrap()
        .clone();
    let counts = estimate_transitions(&deck, 10_000, &mut RandomSource::new(5))
        .map_err(|e| e.to_string())?;
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for ((state, action), c) in &counts {
        if c.visits < 500 {
            continue;
        }
        let (r, b) = parse_state_name(state).ok_or(format!("bad state {state}"))?;
        let analytic = oracle::successor_probs(&deck, r, b, action);
        let keys: BTreeSet<&String> = analytic.keys().chain(c.successors.keys()).collect();
        for k in keys {
            let want = analytic.get(k).copied().unwrap_or(0.0);
            let err = (c.frequency(k) - want).abs();
            worst = worst.max(err);
            ensure!(
                err <= 0.02,
                "{state} {action} → {k}: {} vs {want}",
                c.frequency(k)
            );
        }
        checked += 1;
    }
    ensure!(checked > 0, "no pair visited 500 times");
    Ok(format!(
        "{checked} (state, action) pairs, worst error {worst:.4}"
    ))
}

fn q_params() -> QParams<f64> {
    QParams::new(0.5, 0.9, 2, 6).unwrap()
}

fn q_vs_vi() -> Outcome {
    let doc = bundled_doc("grid3x3.json");
    let grid = doc.as_grid().unwrap();
    let out =
        train(grid, &q_params(), 500, &[], &mut RandomSource::new(7)).map_err(|e| e.to_string())?;
    let limit = (grid.width() + grid.height()) as usize;
    let longest = out.episode_lengths.iter().copied().max().unwrap_or(0);
    ensure!(
        longest <= limit,
        "episode of {longest} steps exceeds {limit}"
    );

    let mdp = gridworld_to_mdp(grid, 0.9).map_err(|e| e.to_string())?;
    let vi = value_iteration(&mdp, 1e-12, 10_000).map_err(|e| e.to_string())?;
    let learned = greedy_policy(&out.table, grid).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (cell, action) in &learned {
        if out.visits.get(cell).copied().unwrap_or(0) < 25 {
            continue;
        }
        let want = vi
            .action_of(&mdp, &cell.to_string())
            .ok_or(format!("no VI state {cell}"))?;
        ensure!(
            action.to_string() == want,
            "{cell}: learned {action}, VI {want}"
        );
        compared += 1;
    }
    ensure!(compared > 0, "no cell visited 25 times");
    Ok(format!("{compared} cells agree, longest episode {longest}"))
}

const GOLDEN_Q: &str = include_str!("golden/q_grid3x3_seed7.json");

fn q_determinism() -> Outcome {
    let doc = bundled_doc("grid3x3.json");
    let grid = doc.as_grid().unwrap();
    let run = || {
        train(grid, &q_params(), 500, &[], &mut RandomSource::new(7))
            .unwrap()
            .table
    };
    let (a, b) = (run(), run());
    let bits = |t: &ai_lab_core::QTable64| {
        t.entries()
            .map(|(_, _, q)| q.to_bits())
            .collect::<Vec<u64>>()
    };
    ensure!(bits(&a) == bits(&b), "two runs disagree");
    let text = serde_json::to_string_pretty(&a.to_json()).unwrap();
    ensure!(
        text.trim() == GOLDEN_Q.trim(),
        "table differs from the frozen golden:\n{text}"
    );
    Ok("bit-identical across runs and golden".into())
}

fn hmm_filter_oracle() -> Outcome {
    let mut games = 0;
    let mut failed_captures = 0;
    let mut worst: f64 = 0.0;
    for name in ["country_a.map", "country_b.map"] {
        let doc = bundled_doc(name);
        let map = doc.as_map().unwrap();
        let model = build_hmm(map);
        let prior = Belief::<f64>::uniform(map.len());
        for seed in 0..20 {
            let game = play_greedy_game(map, &model, &mut RandomSource::new(seed))
                .map_err(|e| e.to_string())?;
            ensure!(
                game.status != GameStatus::Running,
                "{name} seed {seed}: unfinished"
            );
            let ev = game.evidence();
            failed_captures += ev.iter().filter(|e| e.failed_capture_at.is_some()).count();
            let filtered = filter_trace(&model, &prior, &ev).map_err(|e| e.to_string())?;
            let oracle = brute_force_posterior(&model, &ev, &prior).map_err(|e| e.to_string())?;
            for (round, (f, o)) in filtered.iter().zip(&oracle).enumerate() {
                let total: f64 = f.probs().iter().sum();
                ensure!(
                    (total - 1.0).abs() <= 1e-12,
                    "{name} seed {seed} round {round}: sum {total}"
                );
                ensure!(
                    f.probs().iter().all(|p| *p >= 0.0),
                    "{name} seed {seed}: negative belief"
                );
                for (x, y) in f.probs().iter().zip(o.probs()) {
                    worst = worst.max((x - y).abs());
                }
            }
            games += 1;
        }
    }
    ensure!(worst <= 1e-12, "max deviation {worst:e}");
    Ok(format!(
        "{games} games, {failed_captures} failed captures, max deviation {worst:.1e}"
    ))
}

const TRACES: [(&str, &str); 2] = [
    (
        "country_a.map",
        include_str!("../../core/scenarios/country_a.trace.json"),
    ),
    (
        "country_b.map",
        include_str!("../../core/scenarios/country_b.trace.json"),
    ),
];

fn mean_tv(particles: usize) -> Result<f64, String> {
    let mut total = 0.0;
    let mut n = 0;
    for (name, text) in TRACES {
        let doc = bundled_doc(name);
        let model = build_hmm(doc.as_map().unwrap());
        let trace: EvidenceTrace = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let exact = filter_trace(
            &model,
            &Belief::<f64>::uniform(model.len()),
            &trace.evidence,
        )
        .map_err(|e| e.to_string())?;
        for seed in 0..20 {
            let mut rs = RandomSource::new(seed);
            let approx = run_particle_filter(&model, &trace.evidence, particles, &mut rs)
                .map_err(|e| e.to_string())?;
            for (h, b) in approx.iter().zip(&exact) {
                total += total_variation(h, b.probs());
                n += 1;
            }
        }
    }
    Ok(total / n as f64)
}

fn particle_consistency() -> Outcome {
    let small = mean_tv(100)?;
    let large = mean_tv(10_000)?;
    ensure!(
        large < small,
        "mean TV {large} at N=10000 is not below {small} at N=100"
    );
    Ok(format!(
        "mean TV {small:.4} at N=100, {large:.4} at N=10000"
    ))
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            name: "search optimality suite",
            budget: Duration::from_secs(1),
            run: search_optimality,
        },
        Criterion {
            name: "rbj state count",
            budget: Duration::from_secs(1),
            run: rbj_state_count,
        },
        Criterion {
            name: "rbj convergence",
            budget: Duration::from_secs(1),
            run: rbj_convergence,
        },
        Criterion {
            name: "rbj oracle equivalence",
            budget: Duration::from_secs(5),
            run: rbj_oracle,
        },
        Criterion {
            name: "rbj monotonicity",
            budget: Duration::from_secs(1),
            run: rbj_monotonicity,
        },
        Criterion {
            name: "transition estimation",
            budget: Duration::from_secs(10),
            run: rbj_transition_estimation,
        },
        Criterion {
            name: "q-learning vs value iteration",
            budget: Duration::from_secs(5),
            run: q_vs_vi,
        },
        Criterion {
            name: "q determinism",
            budget: Duration::from_secs(5),
            run: q_determinism,
        },
        Criterion {
            name: "hmm filter-oracle equivalence",
            budget: Duration::from_secs(30),
            run: hmm_filter_oracle,
        },
        Criterion {
            name: "particle-filter consistency",
            budget: Duration::from_secs(60),
            run: particle_consistency,
        },
        Criterion {
            name: "redaction + replay",
            budget: Duration::from_secs(10),
            run: redaction::check,
        },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => {
                Err(format!("over budget {:?}: {detail}", c.budget))
            }
            o => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<32} {:>8.1?}  {detail}", c.name, elapsed),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:<32} {:>8.1?}  {why}", c.name, elapsed);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
