//! Q-Maze: tabular Q-learning on a GridWorld with dice-driven exploration.

mod grid;
mod learn;

pub use grid::{Action, Cell, CellDecl, CellInfo, GridBody, GridSpec};
#[allow(unused_imports)]
pub(crate) use learn::take_move;
pub use learn::{
    episode_start, greedy_policy, q_step, q_update, run_episode, select_action, train, Choice,
    EpisodeLog, QParams, QTable, StepRecord, Termination, TrainOutput,
};
