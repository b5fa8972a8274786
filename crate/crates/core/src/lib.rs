pub mod cli;
pub mod epr;
pub mod error;
pub mod hilbert;
pub mod instrument;
pub mod lattice;
pub mod matrix_json;
pub mod pasting;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod spacetime;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
