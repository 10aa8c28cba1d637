//! Simulator for the quantum Wheatstone bridge: a four-spin chain driven by a
//! cold and a hot bath whose entangled interface population and spin current
//! are sensitive to an unknown coupling.
//!
//! Sites 1–4 of the bridge are indices 0–3, the shadow spin is index 4.
//! Energies and rates are in units of J with ħ = k_B = 1, except in
//! [`circuit`], which works in SI and reports angular frequencies.

// `!(x > 0.0)` style checks are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate blas_src;

pub mod bridge;
pub mod circuit;
pub mod error;
pub mod fit;
pub mod krylov;
pub mod linalg;
pub mod liouville;
pub mod metrology;
pub mod model;
pub mod observables;
pub mod optimize;
pub mod ratemodel;
pub mod robustness;
pub mod shadow;
pub mod spinops;

pub use error::{QwbError, Result};
