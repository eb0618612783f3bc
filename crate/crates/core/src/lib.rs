//! Validated integration of initial value problems for semilinear parabolic
//! PDEs using fully spectral Fourier-Chebyshev expansions.
//!
//! The library computes an approximate solution of the IVP in coefficient
//! space, then certifies a rigorous C0 error radius around it via a
//! Newton-Kantorovich contraction argument whose bounds are evaluated in
//! interval arithmetic. Shipped models: Swift-Hohenberg, Kuramoto-Sivashinsky
//! and the 2D Navier-Stokes vorticity equation, including multi-step
//! integration and a trapping-region check for global existence.

pub mod certify;
pub mod config;
pub mod error;
pub mod interval;
pub mod linop;
pub mod matrix;
pub mod models;
pub mod mubounds;
pub mod problem;
pub mod solver;
pub mod space;
pub mod timestep;

pub use error::{Error, Result};
pub use interval::{IMatrix, IVector, Interval};
