//! Finite MDPs, value iteration, Red and Black Jack, and the GridWorld bridge.

mod finite;
mod grid;
pub mod rbj;

pub use finite::{
    argmax_first, extract_policy, terminal_distribution, value_iteration, FiniteMdp, Outcome,
    Target, TerminalState, ViResult,
};
pub use grid::gridworld_to_mdp;
pub use rbj::{
    build_rbj_mdp, estimate_transitions, perturb_and_resolve, simulate_rbj_game, solve_rbj, Card,
    Chooser, DeckConfig, GameEvent, GameOutcome, HitDeck, JackpotRule, Perturbation, PolicyChange,
    PolicyChooser, RbjAction, RbjGame, ScoreTable, ScriptedChooser, StandDeck, TransitionCounts,
};
