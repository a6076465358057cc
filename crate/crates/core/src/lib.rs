pub mod cli;
pub mod decomposition;
pub mod error;
pub mod group_ring;
pub mod lemmas;
pub mod linalg;
pub mod local_field;
pub mod norm_pairs;
pub mod rmg_modules;

pub use error::{Error, Result};
