//! Determining a domain from its Dirichlet spectrum and the spectral image of
//! its harmonic subspace: forward solvers, wave dynamics in spectral
//! coordinates, subspace lattices and the wave distance.

pub mod error;
pub mod lattice;
pub mod linalg;
pub mod reconstruct;
pub mod run;
pub mod spectral_forward;
pub mod subspace;
pub mod verify;
pub mod wave_dynamics;

pub use error::{Error, Result};
