pub mod cli;
pub mod datamodel;
pub mod error;
pub mod eval;
pub mod hierarchy;
pub mod kernel;
pub mod svm;
pub mod synth;

pub use error::{Error, Result};
