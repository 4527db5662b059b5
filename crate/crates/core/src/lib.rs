//! Single trapped ion in a time-dependent harmonic trap.
//!
//! The crate solves the classical mode-function equation `q̈ + ν(t)² q = 0`,
//! turns the resulting complex mode function into first-order excitation
//! spectra for a laser-probed ion, evaluates the exponential-chirp closed
//! forms, and checks the whole chain against an exact two-level + oscillator
//! Schrödinger evolution.
//!
//! Internal units: ħ = M = 1 unless [`spectrum::PhysicalScales`] says
//! otherwise; frequencies are plain numbers in a user-chosen time unit.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod modes;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod specfun;
pub mod spectrum;

pub use error::{Error, Result};
