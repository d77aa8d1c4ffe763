//! Inner and outer sum-of-squares hierarchies for polynomial minimization on
//! the boolean hypercube, with Krawtchouk-root error bounds and explicit
//! kernel certificates.

pub mod cli;
pub mod cube;
pub mod error;
pub mod gamma;
pub mod krawtchouk;
pub mod inner;
pub mod instances;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod lp;
pub mod matrix;
pub mod outer;
pub mod qary;
pub mod sdp;

pub use error::{Error, Result};
