pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod models;
pub mod nn;
pub mod synthetic;
pub mod text;
pub mod util;

pub use error::{Error, Result};
