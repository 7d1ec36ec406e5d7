#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Spectral-counting laboratory for Schrödinger operators `−Δ + 1 + V` on the
//! flat torus `R^n / Z^n`.

pub mod cache;
pub mod config;
pub mod duhamel;
pub mod error;
pub mod experiments;
pub mod galerkin;
pub mod kernels;
pub mod lattice;
pub mod mollify;
pub mod output;
pub mod potentials;
pub mod quadrature;
pub mod weyl;

pub use error::{Error, Result};
