//! Numerical core for the gradient flow of the L² curvature energy
//! `F(g) = ∫ s² dV` on compact surfaces.
//!
//! Metrics are conformal deformations `g = e^{2u} g₀` of one of two fixed
//! backgrounds: a flat square torus (periodic, fully spectral operators) or
//! the round unit sphere restricted to axisymmetric data (1D staggered grid
//! in the polar angle, second-order conservative finite differences).
//!
//! The crate provides
//! - background differential operators and quadrature ([`background`]),
//! - conformal curvature, energy functionals, the energy gradient tensor and
//!   the dissipation functionals ([`geometry`]),
//! - a full coordinate tensor pipeline on general 2×2 metrics over the torus
//!   chart, used as an independent oracle ([`tensor`]),
//! - time integration of the conformal and volume-normalized flows with
//!   diagnostics ([`flow`]),
//! - the diffeomorphism correction that turns conformal-flow solutions into
//!   solutions of the full gradient flow ([`diffeo`]).
//!
//! Everything is deterministic: fixed reduction orders in quadratures and
//! transforms, and a hand-rolled seeded RNG ([`rng`]), so repeated runs with
//! the same configuration are bit-identical.
//!
//! The crate is `no_std` (with `alloc`); float transcendentals come from
//! `libm`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod background;
pub mod diffeo;
pub mod error;
pub mod fft;
pub mod flow;
pub mod geometry;
pub mod interp;
pub mod linalg;
pub mod rng;
pub mod tensor;

pub use background::{Background, ScalarField};
pub use error::{Error, Result};
pub use flow::{DiagnosticsRecord, FlowConfig, FlowState, Scheme};
pub use geometry::{ConformalMetric, EnergyReport};
pub use tensor::{DerivScheme, SymTensorField};
