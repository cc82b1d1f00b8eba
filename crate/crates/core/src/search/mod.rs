//! "Becoming Search": graph search split into the four classroom roles.
//!
//! * the successor dictionary is [`StateSpaceGraph::successors`],
//! * the goal test is [`StateSpaceGraph::goal_test`],
//! * the frontier is [`Frontier`] with a pluggable [`FrontierDiscipline`],
//! * the algorithm is [`SearchRun`], which only talks to the other three.
//!
//! Goal tests happen when a state is popped, not when it is inserted.

mod engine;
mod frontier;
mod graph;

pub use engine::{
    graph_search, reconstruct_path, ParentLink, RunStatus, SearchResult, SearchRun, SearchTrace,
    SuccessorRecord, TraceEvent,
};
pub use frontier::{Frontier, FrontierDiscipline, FrontierEntry};
pub use graph::{Edge, EdgeDecl, GoalSpec, SearchBody, StateDecl, StateSpaceGraph, Successor};
