//! Reference methods for the benchmark comparison.

pub mod bfs;
pub mod fista;
pub mod iht;
pub mod simplex;
pub mod zcws;

pub use bfs::{bfs, bfs_search};
pub use fista::{fista_restricted, FistaResult};
pub use iht::iht;
pub use simplex::{gss, pss, simplex_search, SearchEnd, SimplexSearch, Step};
pub use zcws::zcws;
