pub mod circuit;
pub mod ensemble;
pub mod entanglement;
pub mod error;
pub mod experiment;
pub mod krylov;
pub mod linalg;
pub mod magic;
pub mod oracle;
pub mod random;

pub use error::{Error, Result};
