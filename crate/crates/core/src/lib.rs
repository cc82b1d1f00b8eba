//! Core engines for four unplugged AI activities: graph search, a card-game
//! MDP, dice-driven Q-learning and an HMM pursuit game.

pub mod error;
pub mod hmm;
pub mod mdp;
pub mod qlearn;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod search;

pub use error::{Error, Result};
pub use rng::{DiceProbability, RandomSource, RNG_ALGORITHM};
pub use scalar::{Prob, Scalar};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

pub type Graph64 = search::StateSpaceGraph<f64>;
pub type SearchResult64 = search::SearchResult<f64>;
pub type Mdp64 = mdp::FiniteMdp<f64>;
pub type ExactMdp = mdp::FiniteMdp<Exact>;
pub type ViResult64 = mdp::ViResult<f64>;
pub type ExactViResult = mdp::ViResult<Exact>;
pub type QTable64 = qlearn::QTable<f64>;
pub type Belief64 = hmm::Belief<f64>;
pub type ExactBelief = hmm::Belief<Exact>;
pub type QParams64 = qlearn::QParams<f64>;
