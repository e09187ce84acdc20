//! High-order HDG discretization of elliptic boundary-value and interface
//! problems on curved domains, using straight-triangle meshes and transfer
//! paths to carry boundary and interface data between the true curves and
//! the computational mesh.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod hdg;
pub mod mesh;
pub mod paths;
pub mod postprocess;
pub mod quadrature;
pub mod run;

pub use error::{Error, Result};
