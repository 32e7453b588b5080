// SPDX-License-Identifier: Apache-2.0

//! Error type for the simulator.

use thiserror::Error;

/// Failures reported by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input is too close to the exceptional point for the biorthogonal form (|1+v^2| = {residual:e})")]
    NearExceptionalPoint { residual: f64 },

    #[error("no measurement back-action: {0}")]
    NoDecay(String),

    #[error("threshold never reached: {0}")]
    NoCrossing(String),

    #[error("scan limit of {steps} steps exceeded at t = {t:e}")]
    ScanLimit { steps: u64, t: f64 },

    #[error("integrator step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("dense oracle limited to N <= {cap}, got N = {n}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parameter point (r_bar = {r_bar}, s = {s}) is outside the classified region")]
    OutOfScope { r_bar: f64, s: f64 },
}

impl Error {
    /// True when the failure is caused by the caller's inputs rather than by the numerics.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::DenseCapExceeded { .. } | Error::OutOfScope { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
