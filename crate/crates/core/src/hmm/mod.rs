//! "Two Spies": a hidden spy moves between cities and reports its region
//! through a noisy channel; the hunter filters those reports into a belief.
//!
//! A round is spy transition, then observation from the new city, then the
//! hunter's action. A failed capture is treated as evidence that the spy is
//! elsewhere, which goes beyond the classroom rules.

mod filter;
mod game;
mod map;
mod oracle;
mod particle;

pub use filter::{
    correct, exclude, filter_step, filter_trace, predict, total_variation, Belief, Evidence,
    EvidenceTrace,
};
pub use game::{
    greedy_hunter_action, play_greedy_game, spy_step, GameStatus, HunterAction, HunterRound,
    HunterView, Phase, RoundRecord, TwoSpiesState,
};
pub use map::{build_hmm, CityDecl, DistDecl, HmmModel, MapBody, MapSpec};
pub use oracle::{brute_force_posterior, MAX_PATHS};
pub use particle::{
    init_particles, particle_filter_step, particle_histogram, run_particle_filter,
    systematic_resample,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;
    use crate::scalar::Prob;
    use num_rational::BigRational;
    use serde_json::json;

    fn p(n: u64, d: u64) -> Prob {
        Prob::new(n, d)
    }

    fn three_cities() -> MapSpec {
        let body: MapBody = serde_json::from_value(json!({
            "cities": [
                {"id": "a", "region": "west", "neighbors": ["b"]},
                {"id": "b", "region": "west", "neighbors": ["a", "c"]},
                {"id": "c", "region": "east", "neighbors": ["b"]}
            ],
            "transition": {
                "a": {"a": "3/6", "b": "3/6"},
                "b": {"a": "2/6", "b": "2/6", "c": "2/6"},
                "c": {"b": "3/6", "c": "3/6"}
            },
            "observation": {
                "a": {"west": "5/6", "east": "1/6"},
                "b": {"west": "4/6", "east": "2/6"},
                "c": {"east": "1/1"}
            },
            "hunter_start": "b"
        }))
        .unwrap();
        MapSpec::from_body(&body).unwrap()
    }

    fn identity(n: usize, hard: bool) -> HmmModel {
        let cities: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let t = (0..n)
            .map(|i| (0..n).map(|j| p((i == j) as u64, 1)).collect())
            .collect();
        let (regions, o) = if hard {
            let regions = vec!["lo".to_string(), "hi".to_string()];
            let o = (0..n)
                .map(|i| {
                    if i < n / 2 {
                        vec![p(1, 1), p(0, 1)]
                    } else {
                        vec![p(0, 1), p(1, 1)]
                    }
                })
                .collect();
            (regions, o)
        } else {
            (vec!["any".to_string()], vec![vec![p(1, 1)]; n])
        };
        HmmModel::new(cities, regions, t, o).unwrap()
    }

    #[test]
    fn identity_transitions() {
        let m = identity(2, false);
        assert_eq!(m.transition::<f64>(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let b = Belief::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(predict(&b, &m).unwrap(), b);
        assert_eq!(filter_step(&b, &m, "any", None).unwrap(), b);
    }

    #[test]
    fn non_stochastic_row_is_named() {
        let mut body = three_cities().to_body();
        body.transition
            .get_mut("c")
            .unwrap()
            .insert("c".into(), "2/6".parse().unwrap());
        let err = MapSpec::from_body(&body).unwrap_err();
        assert_eq!(err.code(), "validation_error");
        assert!(err.to_string().contains("`c`"), "{err}");
        assert!(err.to_string().contains("5/6"), "{err}");
    }

    #[test]
    fn map_validation() {
        let good = three_cities().to_body();
        let mut asym = good.clone();
        asym.cities[0].neighbors.clear();
        asym.transition.insert(
            "a".into(),
            [("a".to_string(), "1/1".parse().unwrap())].into(),
        );
        assert_eq!(
            MapSpec::from_body(&asym).unwrap_err().code(),
            "validation_error"
        );
        asym.directed = true;
        assert!(MapSpec::from_body(&asym).is_ok());

        let mut jump = good.clone();
        jump.transition.insert(
            "a".into(),
            [("c".to_string(), "1/1".parse().unwrap())].into(),
        );
        assert!(MapSpec::from_body(&jump)
            .unwrap_err()
            .to_string()
            .contains("non-neighbor"));

        let mut unknown = good.clone();
        unknown.hunter_start = "zz".into();
        assert_eq!(
            MapSpec::from_body(&unknown).unwrap_err().code(),
            "unknown_reference"
        );

        let mut region = good;
        region
            .observation
            .get_mut("c")
            .unwrap()
            .insert("north".into(), "0/1".parse().unwrap());
        assert_eq!(
            MapSpec::from_body(&region).unwrap_err().code(),
            "unknown_reference"
        );
    }

    #[test]
    fn map_round_trip() {
        let m = three_cities();
        assert_eq!(MapSpec::from_body(&m.to_body()).unwrap(), m);
        assert_eq!(m.to_body().transition["a"]["a"].to_string(), "1/2");
        assert!(m.dice_warnings().is_empty());
    }

    #[test]
    fn predict_examples() {
        let m = build_hmm(&three_cities());
        let b = predict(&Belief::<f64>::point(3, 1), &m).unwrap();
        assert_eq!(b.probs(), [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);

        // doubly stochastic: uniform stays uniform
        let m = identity(4, false);
        let u = Belief::<BigRational>::uniform(4);
        assert_eq!(predict(&u, &m).unwrap(), u);
        assert_eq!(
            predict(&Belief::<f64>::uniform(3), &m).unwrap_err().code(),
            "dimension_mismatch"
        );
    }

    #[test]
    fn correct_examples() {
        let m = identity(4, true);
        let u = Belief::<BigRational>::uniform(4);
        let b = correct(&u, &m, "hi").unwrap();
        let half = BigRational::new(1.into(), 2.into());
        let zero = BigRational::from_integer(0.into());
        assert_eq!(b.probs(), [zero.clone(), zero, half.clone(), half]);
        let point = Belief::<f64>::point(4, 0);
        assert_eq!(
            correct(&point, &m, "hi").unwrap_err().code(),
            "zero_likelihood"
        );
        assert_eq!(
            correct(&point, &m, "nowhere").unwrap_err().code(),
            "unknown_reference"
        );

        let flat = identity(3, false);
        let b = Belief::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(correct(&b, &flat, "any").unwrap(), b);
    }

    #[test]
    fn failed_capture_zeroes_city() {
        let m = build_hmm(&three_cities());
        let b = filter_step(&Belief::<f64>::uniform(3), &m, "west", Some("b")).unwrap();
        assert_eq!(*b.get(1), 0.0);
        assert!((b.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let point = Belief::<f64>::point(3, 2);
        let flat = identity(3, false);
        assert_eq!(
            exclude(&point, &flat, "c2").unwrap_err().code(),
            "zero_likelihood"
        );
    }

    #[test]
    fn oracle_base_case_matches_one_step() {
        let m = build_hmm(&three_cities());
        let prior = Belief::<BigRational>::uniform(3);
        let ev = vec![Evidence {
            observation: "east".into(),
            failed_capture_at: None,
        }];
        let oracle = brute_force_posterior(&m, &ev, &prior).unwrap();
        let direct = correct(&predict(&prior, &m).unwrap(), &m, "east").unwrap();
        assert_eq!(oracle, vec![direct]);
    }

    #[test]
    fn oracle_hard_evidence_intersects() {
        let m = identity(6, true);
        let ev = [
            Evidence {
                observation: "hi".into(),
                failed_capture_at: Some("c4".into()),
            },
            Evidence {
                observation: "hi".into(),
                failed_capture_at: None,
            },
        ];
        let post = brute_force_posterior(&m, &ev, &Belief::<f64>::uniform(6)).unwrap();
        assert_eq!(post[1].probs(), [0.0, 0.0, 0.0, 0.5, 0.0, 0.5]);
    }

    #[test]
    fn oracle_refuses_huge_enumerations() {
        let m = identity(12, false);
        let ev = vec![
            Evidence {
                observation: "any".into(),
                failed_capture_at: None
            };
            7
        ];
        let err = brute_force_posterior(&m, &ev, &Belief::<f64>::uniform(12)).unwrap_err();
        assert_eq!(err, crate::Error::TooLarge(12u128.pow(7)));
    }

    #[test]
    fn exact_filter_equals_exact_oracle() {
        let map = three_cities();
        let m = build_hmm(&map);
        let ev = vec![
            Evidence {
                observation: "west".into(),
                failed_capture_at: None,
            },
            Evidence {
                observation: "west".into(),
                failed_capture_at: Some("a".into()),
            },
            Evidence {
                observation: "east".into(),
                failed_capture_at: None,
            },
        ];
        let prior = Belief::<BigRational>::uniform(3);
        assert_eq!(
            filter_trace(&m, &prior, &ev).unwrap(),
            brute_force_posterior(&m, &ev, &prior).unwrap()
        );
    }

    #[test]
    fn spy_step_degenerate_rows() {
        let map = three_cities();
        let m = build_hmm(&map);
        let mut rs = RandomSource::new(1);
        for _ in 0..50 {
            let (_, r) = spy_step(&m, 2, &mut rs).unwrap();
            if r == 0 {
                // only reachable when the spy moved to b
                continue;
            }
            assert_eq!(m.regions()[r], "east");
        }
        let id = identity(3, false);
        assert_eq!(spy_step(&id, 1, &mut rs).unwrap(), (1, 0));
    }

    #[test]
    fn spy_step_frequencies() {
        let m = build_hmm(&three_cities());
        let mut rs = RandomSource::new(13);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            counts[spy_step(&m, 1, &mut rs).unwrap().0] += 1;
        }
        for c in counts {
            assert!((c as f64 / 10_000.0 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn particles_respect_hard_evidence() {
        let m = identity(6, true);
        let mut rs = RandomSource::new(2);
        let ps = init_particles(&m, 200, &mut rs).unwrap();
        let out = particle_filter_step(&ps, &m, "lo", None, &mut rs).unwrap();
        assert_eq!(out.len(), 200);
        assert!(out.iter().all(|&c| c < 3));
        let single = particle_filter_step(&[4], &m, "hi", None, &mut rs).unwrap();
        assert_eq!(single, [4]);
        assert_eq!(
            particle_filter_step(&[4], &m, "lo", None, &mut rs).unwrap_err(),
            crate::Error::Degeneracy
        );
        assert_eq!(
            init_particles(&m, 0, &mut rs).unwrap_err().code(),
            "domain_error"
        );
    }

    #[test]
    fn systematic_resampling_is_proportional() {
        let mut rs = RandomSource::new(3);
        let out = systematic_resample(&[0, 1, 2, 3], &[0.0, 3.0, 0.0, 1.0], &mut rs).unwrap();
        let ones = out.iter().filter(|&&c| c == 1).count();
        assert_eq!(ones, 3);
        assert_eq!(out.iter().filter(|&&c| c == 3).count(), 1);
    }

    fn hunter_game() -> (MapSpec, HmmModel, TwoSpiesState) {
        let map = three_cities();
        let model = build_hmm(&map);
        let state = TwoSpiesState::with_spy_at(&map, 0);
        (map, model, state)
    }

    #[test]
    fn capture_on_spy_city() {
        let (map, model, mut g) = hunter_game();
        g.spy_turn_with(&map, &model, "b", "west").unwrap();
        g.hunter_act(&map, &HunterAction::Capture).unwrap();
        assert_eq!(g.status, GameStatus::Captured);
        assert_eq!(g.history[0].capture, Some(true));
        let mut rs = RandomSource::new(0);
        assert_eq!(
            g.hunter_apply(&map, &model, &HunterAction::Stay, &mut rs)
                .unwrap_err()
                .code(),
            "game_over"
        );
    }

    #[test]
    fn six_rounds_of_staying_evades() {
        let (map, model, mut g) = hunter_game();
        for _ in 0..6 {
            g.spy_turn_with(&map, &model, "a", "west").unwrap();
            g.hunter_act(&map, &HunterAction::Stay).unwrap();
        }
        assert_eq!(g.round, 6);
        assert_eq!(g.status, GameStatus::Evaded);
    }

    #[test]
    fn failed_capture_continues_and_is_evidence() {
        let (map, model, mut g) = hunter_game();
        g.spy_turn_with(&map, &model, "a", "west").unwrap();
        g.hunter_act(&map, &HunterAction::Capture).unwrap();
        assert_eq!(g.status, GameStatus::Running);
        assert_eq!(g.evidence()[0].failed_capture_at.as_deref(), Some("b"));
    }

    #[test]
    fn illegal_moves() {
        let (map, model, mut g) = hunter_game();
        let mut rs = RandomSource::new(0);
        g.hunter_city = "a".into();
        let bad = HunterAction::Move { to: "c".into() };
        assert_eq!(
            g.hunter_apply(&map, &model, &bad, &mut rs)
                .unwrap_err()
                .code(),
            "illegal_move"
        );
        assert_eq!(g.round, 0, "no dice rolled for a rejected action");
        assert_eq!(
            g.hunter_act(&map, &HunterAction::Stay).unwrap_err().code(),
            "illegal_move"
        );
        assert_eq!(
            g.spy_turn_with(&map, &model, "c", "east")
                .unwrap_err()
                .code(),
            "illegal_move"
        );
        assert_eq!(
            g.spy_turn_with(&map, &model, "a", "east").map(|_| ()),
            Ok(()),
        );
    }

    #[test]
    fn hunter_view_hides_spy() {
        let (map, model, mut g) = hunter_game();
        let mut rs = RandomSource::new(4);
        g.hunter_apply(&map, &model, &HunterAction::Stay, &mut rs)
            .unwrap();
        let text = serde_json::to_string(&g.hunter_view()).unwrap();
        assert!(!text.contains("spy_city"));
        assert!(serde_json::to_string(&g).unwrap().contains("spy_city"));
    }

    #[test]
    fn greedy_games_finish() {
        let map = three_cities();
        let model = build_hmm(&map);
        for seed in 0..20 {
            let g = play_greedy_game(&map, &model, &mut RandomSource::new(seed)).unwrap();
            assert_ne!(g.status, GameStatus::Running);
            assert!(g.round <= 6);
        }
    }
}
