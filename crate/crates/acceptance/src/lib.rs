//! Reference computations that share no algorithm code with the engines they
//! check. Each one reads only the scenario data and applies the rules
//! directly.

pub mod paths;
pub mod rbj;
