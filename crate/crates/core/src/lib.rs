//! Normalized ground states of radial nonlinear Schrödinger problems
//! `−Δu + V u + λu = g(u)` under a mass constraint `|u|₂² = a`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod discretization;
pub mod domain;
pub mod energy;
pub mod error;
pub mod oracle;
pub mod solver;

pub use error::{Error, Result};
