pub mod bargmann_fock;
pub mod cli;
pub mod error;
pub mod gabor_core;
pub mod indicator_lab;
pub mod numeric;
pub mod output;
pub mod phase_space;
pub mod special_functions;

pub use error::{Error, Result};
