// SPDX-License-Identifier: Apache-2.0

//! Monitored continuous-time quantum-walk search on the complete graph.
//!
//! A walker on `N` vertices evolves under `-gamma N |s><s|` while a detector
//! continuously monitors the marked vertex `|w>` at rate `kappa`. Conditioned on
//! no click, the dynamics reduce to a two-level non-Hermitian Hamiltonian in the
//! span of `|w>` and the uniform state of the remaining vertices. The crate
//! computes its spectrum, the no-click probability, search fidelities with and
//! without conditional resetting, scaling exponents, and an independent
//! full-dimensional reference.
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the aliases below
//! fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;
pub type Params = model::ModelParams<f64>;
pub type Matrix2 = model::TwoLevelMatrix<f64>;
pub type Spectrum = spectral::SpectralData<f64>;
pub type Overlaps = spectral::OverlapSet<f64>;
pub type Evolution = spectral::Propagator<f64>;
pub type Fidelity = dynamics::FidelityPoint<f64>;
pub type Schedule = dynamics::ResetSchedule<f64>;
pub type Sample = oracle::EvolutionSample<f64>;
pub type Report = oracle::ReductionReport<f64>;
pub type MonteCarlo = oracle::MonteCarloResult<f64>;
