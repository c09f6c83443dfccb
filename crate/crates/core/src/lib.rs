//! Risk-neutral and risk-averse Wardrop equilibria on single-commodity
//! networks, and the price of risk aversion.

pub mod alternating;
pub mod analysis;
pub mod instances;
pub mod io;
pub mod network;
pub mod poly;
pub mod solver;
pub mod sp;
