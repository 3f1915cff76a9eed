//! Discrete Benamou-Brenier interpolation between probability measures on
//! finite graphs.
//!
//! The pipeline computes the W₁ distance and the support union of the
//! optimal face, orients the graph along the geodesics of that union,
//! equips the orientation with divergence-free edge weights, minimises an
//! entropy functional over couplings of comparable pairs, and assembles
//! polynomial densities `f`, edge fluxes `g` and triple fluxes `h` that
//! satisfy the continuity and Benamou-Brenier equations.

pub mod bernstein;
pub mod cli;
pub mod curve;
pub mod error;
pub mod graph;
pub mod io;
pub mod mcf;
pub mod oracle;
pub mod orientation;
pub mod pipeline;
pub mod poly;
pub mod scaling;
pub mod transport;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
