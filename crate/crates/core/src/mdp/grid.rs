use std::collections::BTreeMap;

use super::finite::{FiniteMdp, Outcome, Target, TerminalState};
use crate::error::{Error, Result};
use crate::qlearn::{Action, Cell, GridSpec};
use crate::scalar::{Prob, Scalar};

/// GridWorld as an MDP: non-terminal cells are states, terminal cells are
/// absorbing terminals, and every move pays the entered cell's reward.
/// States and terminals are named `(x,y)`; actions are `N`, `E`, `S`, `W`.
pub fn gridworld_to_mdp<T: Scalar>(grid: &GridSpec, discount: T) -> Result<FiniteMdp<T>> {
    let states = grid.non_terminal_cells();
    if states.is_empty() {
        return Err(Error::InvalidGrid("grid has no non-terminal cells".into()));
    }
    let terminal_cells: Vec<Cell> = grid.cells().filter(|c| grid.is_terminal(*c)).collect();
    let target_of = |c: Cell| -> Target {
        match states.iter().position(|s| *s == c) {
            Some(i) => Target::State(i),
            None => Target::Terminal(
                terminal_cells
                    .iter()
                    .position(|t| *t == c)
                    .expect("terminal cell"),
            ),
        }
    };

    let mut actions = Vec::with_capacity(states.len());
    let mut transitions = Vec::with_capacity(states.len());
    for &s in &states {
        let moves = grid.available_actions(s);
        let mut per_action = Vec::with_capacity(moves.len());
        for &a in &moves {
            let mut dist: BTreeMap<Cell, Prob> = BTreeMap::new();
            let mut add = |m: Action, p: Prob| -> Result<()> {
                let (next, _, _) = grid.env_step::<T>(s, m)?;
                *dist.entry(next).or_insert_with(|| Prob::from_integer(0)) += p;
                Ok(())
            };
            match grid.slip() {
                None => add(a, Prob::from_integer(1))?,
                Some(slip) => {
                    let slip = slip.to_prob();
                    add(a, Prob::from_integer(1) - slip)?;
                    let share = slip / Prob::from_integer(moves.len() as u64);
                    for &m in &moves {
                        add(m, share)?;
                    }
                }
            }
            per_action.push(
                dist.into_iter()
                    .filter(|(_, p)| *p.numer() > 0)
                    .map(|(next, prob)| Outcome {
                        target: target_of(next),
                        prob,
                        reward: grid.reward(next),
                    })
                    .collect(),
            );
        }
        actions.push(moves.iter().map(|a| a.to_string()).collect());
        transitions.push(per_action);
    }

    FiniteMdp::new(
        states.iter().map(|c| c.to_string()).collect(),
        terminal_cells
            .iter()
            .map(|c| TerminalState {
                id: c.to_string(),
                reward: grid.reward(*c),
            })
            .collect(),
        actions,
        transitions,
        discount,
    )
}
