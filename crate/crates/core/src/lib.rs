//! Highest-frequency eigenmodes of finite-difference Schrödinger operators.
//!
//! On a periodic grid the three-point Laplacian maps the `(-1)^n` carrier to
//! `4/h²` minus a second derivative of opposite sign, so the top of the
//! discrete spectrum behaves like the bottom of `-d²/dx² - V`. This crate
//! assembles the discrete operators, computes certified spectra, demodulates
//! the Nyquist modes and checks them against the continuum envelope problem
//! and the WKB amplitude.

// NaN must fail the positivity and tolerance checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod envelope;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod modes;
pub mod operator;
pub mod wkb;

pub use error::{Error, Result};
