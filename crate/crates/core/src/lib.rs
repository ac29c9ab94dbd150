//! Decoupling of multilinear polynomials.
//!
//! * [`polynomial`]: sparse multilinear polynomials, Fourier quantities and
//!   exact cube enumeration.
//! * [`decoupling`]: one-block (`odec`) and full (`dec`) decoupling.
//! * [`coefficients`]: coupling schemes `(α_i, β_i, c_i)` with
//!   `odec f(y, z) = Σ_i c_i f(α_i y + β_i z)`.
//! * [`montecarlo`]: reproducible sampling and tail/moment estimation.
//! * [`verify`]: executable checks of the decoupling identities and inequalities.
//! * [`cli`]: the `decouple-kit` command line.

pub mod cli;
pub mod coefficients;
pub mod decoupling;
pub mod error;
pub mod montecarlo;
pub mod polynomial;
pub mod verify;

pub use error::{Error, Result};
