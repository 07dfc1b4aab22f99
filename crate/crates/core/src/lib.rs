pub mod bernstein;
pub mod blend;
pub mod combinations;
pub mod error;
pub mod function;
pub mod lab;
pub mod numkit;
pub mod weights;

pub use error::{Error, Result};
pub use function::{CorpusFunction, RealFunction};
