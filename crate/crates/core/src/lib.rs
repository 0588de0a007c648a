pub mod baselines;
pub mod bench;
pub mod config;
pub mod counter;
pub mod error;
pub mod hessian;
pub mod linesearch;
pub mod pdqn;
pub mod penalty;
pub mod problem;
pub mod record;
pub mod sets;
pub mod solver;
pub mod stationarity;
