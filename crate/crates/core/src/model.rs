// SPDX-License-Identifier: Apache-2.0

//! Model parameters, the reduced two-level Hamiltonian and the regime map.
//!
//! The walk Hamiltonian on the complete graph is projected onto the span of the
//! target `|w>` and the uniform superposition `|r_perp>` of the other vertices.
//! Monitoring of the target adds the anti-Hermitian term `-i kappa |w><w|`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, Real};

/// Scaling exponents and prefactors, `gamma = gamma_bar N^(-r_bar-1)`, `kappa = kappa_bar N^(-s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling<T> {
    pub gamma_bar: T,
    pub kappa_bar: T,
    pub r_bar: T,
    pub s: T,
}

/// Physical parameters of one monitored search instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    n: usize,
    gamma: T,
    kappa: T,
    epsilon_w: T,
    scaling: Option<Scaling<T>>,
}

impl<T: Real> ModelParams<T> {
    /// Parameters given directly in physical units, with unit target energy.
    pub fn new(n: usize, gamma: T, kappa: T) -> Result<Self> {
        Self::with_target_energy(n, gamma, kappa, T::one())
    }

    /// Parameters with an explicit target energy `epsilon_w`.
    pub fn with_target_energy(n: usize, gamma: T, kappa: T, epsilon_w: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("N must be at least 2, got {n}")));
        }
        if !gamma.is_finite() || gamma < T::zero() {
            return Err(Error::InvalidParameter(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if !kappa.is_finite() || kappa < T::zero() {
            return Err(Error::InvalidParameter(format!("kappa must be finite and >= 0, got {kappa}")));
        }
        if !epsilon_w.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon_w must be finite, got {epsilon_w}")));
        }
        Ok(Self { n, gamma, kappa, epsilon_w, scaling: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn epsilon_w(&self) -> T {
        self.epsilon_w
    }

    /// Scaling description when the parameters came from [`build_params`].
    pub fn scaling(&self) -> Option<Scaling<T>> {
        self.scaling
    }

    /// Recover `(gamma_bar, kappa_bar)` for given exponents.
    pub fn scaling_readback(&self, r_bar: T, s: T) -> (T, T) {
        let nf: T = count(self.n);
        (self.gamma * nf.powf(r_bar + T::one()), self.kappa * nf.powf(s))
    }

    /// Copy with a different `N`, keeping `gamma` and `kappa`.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::with_target_energy(n, self.gamma, self.kappa, self.epsilon_w)
    }
}

/// Build parameters from the scaling description.
pub fn build_params<T: Real>(n: usize, gamma_bar: T, kappa_bar: T, r_bar: T, s: T) -> Result<ModelParams<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N must be at least 2, got {n}")));
    }
    if !(gamma_bar > T::zero()) || !gamma_bar.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma_bar must be > 0, got {gamma_bar}")));
    }
    if !(kappa_bar >= T::zero()) || !kappa_bar.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa_bar must be >= 0, got {kappa_bar}")));
    }
    if !r_bar.is_finite() || !s.is_finite() {
        return Err(Error::InvalidParameter("exponents must be finite".into()));
    }
    let nf: T = count(n);
    let gamma = gamma_bar * nf.powf(-r_bar - T::one());
    let kappa = kappa_bar * nf.powf(-s);
    let mut p = ModelParams::new(n, gamma, kappa)?;
    p.scaling = Some(Scaling { gamma_bar, kappa_bar, r_bar, s });
    Ok(p)
}

/// Effective Hamiltonian in the `{|w>, |r_perp>}` basis, `[[a, b], [b, d]]`.
///
/// Trace, determinant and `((a - d)/2)^2 + b^2` are carried alongside the
/// elements. For the search Hamiltonian they are formed from the rank-one
/// structure, which avoids the cancellation present in `a d - b^2` when
/// `gamma N` is large.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelMatrix<T> {
    pub a: Complex<T>,
    pub b: T,
    pub d: T,
    trace: Complex<T>,
    det: Complex<T>,
    disc_sq: Complex<T>,
}

impl<T: Real> TwoLevelMatrix<T> {
    /// Generic symmetric matrix from its elements.
    pub fn from_elements(a: Complex<T>, b: T, d: T) -> Self {
        let dd = Complex::new(d, T::zero());
        let half_diff = (a - dd) * lit::<T>(0.5);
        TwoLevelMatrix {
            a,
            b,
            d,
            trace: a + dd,
            det: a * d - b * b,
            disc_sq: half_diff * half_diff + b * b,
        }
    }

    pub fn trace(&self) -> Complex<T> {
        self.trace
    }

    pub fn det(&self) -> Complex<T> {
        self.det
    }

    /// `D^2 = ((a - d)/2)^2 + b^2`.
    pub fn discriminant_sq(&self) -> Complex<T> {
        self.disc_sq
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: [Complex<T>; 2]) -> [Complex<T>; 2] {
        [self.a * v[0] + v[1] * self.b, v[0] * self.b + v[1] * self.d]
    }
}

/// Matrix elements of the reduced Hamiltonian.
pub fn matrix_elements<T: Real>(p: &ModelParams<T>) -> TwoLevelMatrix<T> {
    let nf: T = count(p.n);
    let nm1 = nf - T::one();
    let e = Complex::new(p.epsilon_w, p.kappa);
    let g = p.gamma;
    let gn = Complex::new(g * nf, T::zero());
    // H = -gamma N |s><s| - e |w><w|: lambda^2 + (gamma N + e) lambda + gamma (N-1) e = 0.
    let four_disc = (gn - e) * (gn - e) + e * (lit::<T>(4.0) * g);
    TwoLevelMatrix {
        a: -(e + g),
        b: -g * nm1.sqrt(),
        d: -g * nm1,
        trace: -(gn + e),
        det: e * (g * nm1),
        disc_sq: four_disc * lit::<T>(0.25),
    }
}

/// Initial state `|s>` in the reduced basis.
pub fn initial_state<T: Real>(n: usize) -> [T; 2] {
    let nf: T = count(n);
    [T::one() / nf.sqrt(), (T::one() - T::one() / nf).sqrt()]
}

/// Exceptional point `(gamma_EP, kappa_EP)` for unit target energy; requires `N >= 3`.
pub fn exceptional_point<T: Real>(n: usize) -> Result<(T, T)> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("exceptional point requires N >= 3, got {n}")));
    }
    let nf: T = count(n);
    let gamma = T::one() / (nf - lit(2.0));
    let kappa = lit::<T>(2.0) * gamma * (nf - T::one()).sqrt();
    Ok((gamma, kappa))
}

/// Regime labels of the search-time phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    A1,
    A2,
    CriticalEP,
    B,
    C,
    D,
    BoundaryBC,
    BoundaryCD,
    BoundaryBD,
    OutOfScope,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::A1 => "A1",
            RegimeTag::A2 => "A2",
            RegimeTag::CriticalEP => "CriticalEP",
            RegimeTag::B => "B",
            RegimeTag::C => "C",
            RegimeTag::D => "D",
            RegimeTag::BoundaryBC => "BoundaryBC",
            RegimeTag::BoundaryCD => "BoundaryCD",
            RegimeTag::BoundaryBD => "BoundaryBD",
            RegimeTag::OutOfScope => "OutOfScope",
        }
    }
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Regime and no-reset search-time exponent `alpha` (`tau ~ N^alpha`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub regime: RegimeTag,
    pub alpha: f64,
}

/// Tolerance used by [`classify_regime`] for the boundary lines.
pub const REGIME_TOL: f64 = 1e-12;

/// Classify `(r_bar, s, gamma_bar)`; see [`classify_regime_with_tol`].
pub fn classify_regime(r_bar: f64, s: f64, gamma_bar: f64) -> RegimeLabel {
    classify_regime_with_tol(r_bar, s, gamma_bar, REGIME_TOL)
}

/// Classify a scaling point into its regime.
///
/// Lines are tested in priority order: the `r_bar = 0` line, then `s = 0`
/// with `r_bar > 0`, then `s = r_bar < 0`. Coordinates within `tol` of a line
/// count as on it.
pub fn classify_regime_with_tol(r_bar: f64, s: f64, gamma_bar: f64, tol: f64) -> RegimeLabel {
    let label = |regime, alpha| RegimeLabel { regime, alpha };
    if !r_bar.is_finite() || !s.is_finite() || !gamma_bar.is_finite() {
        return label(RegimeTag::OutOfScope, f64::NAN);
    }
    if r_bar.abs() <= tol {
        if (gamma_bar - 1.0).abs() <= tol {
            return if (s - 0.5).abs() <= tol {
                label(RegimeTag::CriticalEP, 0.5)
            } else if s > 0.5 {
                label(RegimeTag::A1, s)
            } else {
                label(RegimeTag::A2, 1.0 - s)
            };
        }
        return if s.abs() <= tol {
            label(RegimeTag::BoundaryBC, 1.0)
        } else if s > 0.0 {
            label(RegimeTag::BoundaryBD, s + 1.0)
        } else {
            label(RegimeTag::C, 1.0 - s)
        };
    }
    if s.abs() <= tol && r_bar > 0.0 {
        return label(RegimeTag::BoundaryBC, 2.0 * r_bar + 1.0);
    }
    if (s - r_bar).abs() <= tol && r_bar < 0.0 {
        return label(RegimeTag::BoundaryCD, r_bar + 1.0);
    }
    if r_bar > 0.0 && s > 0.0 {
        label(RegimeTag::B, 2.0 * r_bar + s + 1.0)
    } else if s < 0.0 && r_bar > s {
        label(RegimeTag::C, 2.0 * r_bar - s + 1.0)
    } else if r_bar < 0.0 && s > r_bar {
        label(RegimeTag::D, 1.0 + s)
    } else {
        label(RegimeTag::OutOfScope, f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matrix_elements_small_case() {
        let p = ModelParams::new(4, 0.25_f64, 0.5).unwrap();
        let m = matrix_elements(&p);
        assert_relative_eq!(m.a.re, -1.25);
        assert_relative_eq!(m.a.im, -0.5);
        assert_relative_eq!(m.b, -0.25 * 3f64.sqrt());
        assert_relative_eq!(m.d, -0.75);
    }

    #[test]
    fn ep_values() {
        let (g, k) = exceptional_point::<f64>(100).unwrap();
        assert_relative_eq!(g, 1.0 / 98.0);
        assert_relative_eq!(k, 2.0 * 99f64.sqrt() / 98.0);
        assert!(exceptional_point::<f64>(2).is_err());
    }

    #[test]
    fn scaling_roundtrip() {
        let p = build_params(1000, 0.7_f64, 1.3, 0.25, -0.5).unwrap();
        let (gb, kb) = p.scaling_readback(0.25, -0.5);
        assert_relative_eq!(gb, 0.7, max_relative = 1e-12);
        assert_relative_eq!(kb, 1.3, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ModelParams::new(1, 0.1_f64, 0.1).is_err());
        assert!(ModelParams::new(10, -0.1_f64, 0.1).is_err());
        assert!(build_params(10, 0.0_f64, 1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn regime_examples() {
        let c = classify_regime(0.0, 0.5, 1.0);
        assert_eq!(c.regime, RegimeTag::CriticalEP);
        assert_eq!(c.alpha, 0.5);
        assert_eq!(classify_regime(0.0, 0.75, 1.0).regime, RegimeTag::A1);
        assert_relative_eq!(classify_regime(0.0, 0.25, 1.0).alpha, 0.75);
        let b = classify_regime(0.1, 0.25, 1.0);
        assert_eq!(b.regime, RegimeTag::B);
        assert_relative_eq!(b.alpha, 1.45);
        let d = classify_regime(-2.0, -0.5, 1.0);
        assert_eq!(d.regime, RegimeTag::D);
        assert_relative_eq!(d.alpha, 0.5);
        // s = -1 with r_bar = -2 sits inside D.
        let d0 = classify_regime(-2.0, -1.0, 1.0);
        assert_eq!(d0.regime, RegimeTag::D);
        assert_eq!(d0.alpha, 0.0);
        let cd = classify_regime(-1.0, -1.0, 1.0);
        assert_eq!(cd.regime, RegimeTag::BoundaryCD);
        assert_eq!(cd.alpha, 0.0);
        assert_eq!(classify_regime(0.5, 0.0, 1.0).regime, RegimeTag::BoundaryBC);
        assert_eq!(classify_regime(0.0, 0.3, 0.5).regime, RegimeTag::BoundaryBD);
        assert_relative_eq!(classify_regime(0.0, 0.3, 0.5).alpha, 1.3);
        assert_eq!(classify_regime(f64::NAN, 0.3, 1.0).regime, RegimeTag::OutOfScope);
    }

    #[test]
    fn alpha_is_continuous_across_boundaries() {
        let h = 1e-7;
        for &(r, s) in &[(0.5, 0.0), (-0.5, -0.5), (0.0, 0.4)] {
            let here = classify_regime(r, s, 0.9).alpha;
            for (dr, ds) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                let near = classify_regime(r + dr, s + ds, 0.9).alpha;
                assert!((near - here).abs() < 1e-6, "({r},{s}) {here} vs {near}");
            }
        }
    }
}
