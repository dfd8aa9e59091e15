//! Learned soft-tissue displacement estimation.
//!
//! The crate covers the whole pipeline: random organ-like tetrahedral
//! meshes ([`mesh`]), a static hyperelastic FEM solver producing ground
//! truth ([`fem`]), conversion of geometry and boundary conditions into
//! regular grids ([`voxel`]), dataset generation and persistence
//! ([`dataset`]), a 3D convolutional encoder-decoder with its loss and
//! training loop ([`net`]), and evaluation utilities ([`eval`]).
//!
//! The `softdeform` binary wires these into reproducible commands; see
//! [`cli`].

pub mod cli;
pub mod config;
pub mod dataset;
pub mod eval;
pub mod fem;
pub mod geom;
pub mod io;
pub mod mesh;
pub mod net;
pub mod voxel;

pub use nalgebra::Vector3;

/// 3D vector in meters.
pub type Vec3 = nalgebra::Vector3<f64>;
