// SPDX-License-Identifier: Apache-2.0

//! Spectrum, biorthogonal overlaps and the no-click probability of the
//! two-level effective Hamiltonian.
//!
//! The Hamiltonian is complex symmetric, so left eigenvectors are transposes
//! of right eigenvectors. Eigenvectors are written as `(v, 1)` with
//! `v = (lambda - d) / b`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{initial_state, matrix_elements, ModelParams, TwoLevelMatrix};
use crate::scalar::{csqrt, exp_clamped, expi, lit, Real};

/// Relative size of `D^2` below which a point is flagged as near the EP.
///
/// Applied to `D^2` rather than `D`: an exact-EP input rounds to
/// `|D| ~ sqrt(eps)`, which a bound on `|D|` itself would not catch.
pub const EP_TOL: f64 = 1e-9;

/// Largest `O_+ + O_- + 2|O_x|` for which the spectral sum is trusted.
///
/// The spectral form loses about `eps * (O_+ + O_- + 2|O_x|)` absolute accuracy
/// through cancellation; above this limit the propagator norm is used instead.
pub const SPECTRAL_CONDITION_LIMIT: f64 = 1e4;

/// Eigenvalues of the two-level Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralData<T> {
    /// `(a + d)/2 + D`.
    pub lambda_plus: Complex<T>,
    /// `(a + d)/2 - D`.
    pub lambda_minus: Complex<T>,
    /// `D = sqrt(((a - d)/2)^2 + b^2)`, principal branch.
    pub discriminant: Complex<T>,
    pub near_ep: bool,
}

impl<T: Real> SpectralData<T> {
    pub fn trace(&self) -> Complex<T> {
        self.lambda_plus + self.lambda_minus
    }

    pub fn det(&self) -> Complex<T> {
        self.lambda_plus * self.lambda_minus
    }
}

/// Eigenvalues with the `+`/`-` labels fixed by the principal square root.
///
/// The root of larger modulus is `(a + d)/2 +- D` with the sign that avoids
/// cancellation; the other is `det / lambda_big`.
pub fn eigenvalues<T: Real>(m: &TwoLevelMatrix<T>) -> SpectralData<T> {
    let mean = m.trace() * lit::<T>(0.5);
    let disc = csqrt(m.discriminant_sq());
    let dd = Complex::new(m.d, T::zero());
    let scale = (m.a - dd).norm().max(m.b.abs()).max(T::min_positive_value());
    let near_ep = m.discriminant_sq().norm() < lit::<T>(EP_TOL) * scale * scale;
    let (plus_is_big, big) = if (mean + disc).norm() >= (mean - disc).norm() {
        (true, mean + disc)
    } else {
        (false, mean - disc)
    };
    let small = if big.norm().is_zero() { big } else { m.det() / big };
    let (mut lambda_plus, mut lambda_minus) = if plus_is_big { (big, small) } else { (small, big) };
    if !near_ep && !m.b.is_zero() {
        // b and d are real, so Im(lambda) = Im(a) |v|^2 / (1 + |v|^2) for the
        // right eigenvector (v, 1). This keeps Im accurate when |Im| << |Re|.
        let two_d = disc * lit::<T>(2.0);
        for (lambda, split) in [(&mut lambda_plus, two_d), (&mut lambda_minus, -two_d)] {
            let (v, _) = mode_vector(m, *lambda, split);
            let v2 = v.norm_sqr();
            let weight = if v2 > T::one() { T::one() / (T::one() + v2.recip()) } else { v2 / (T::one() + v2) };
            lambda.im = m.a.im * weight;
        }
    }
    SpectralData { lambda_plus, lambda_minus, discriminant: disc, near_ep }
}

// Eigenvector component `v` of `(v, 1)` and `1 + v^2`, from whichever of
// `(lambda - d)/b` and `b/(lambda - a)` is free of cancellation.
fn mode_vector<T: Real>(m: &TwoLevelMatrix<T>, lambda: Complex<T>, split: Complex<T>) -> (Complex<T>, Complex<T>) {
    let x = lambda - m.d;
    let y = lambda - m.a;
    if x.norm() >= y.norm() {
        (x / m.b, x * split / (m.b * m.b))
    } else {
        (Complex::new(m.b, T::zero()) / y, split / y)
    }
}

fn mode_vectors<T: Real>(m: &TwoLevelMatrix<T>, sd: &SpectralData<T>) -> [(Complex<T>, Complex<T>); 2] {
    let two_d = sd.discriminant * lit::<T>(2.0);
    [mode_vector(m, sd.lambda_plus, two_d), mode_vector(m, sd.lambda_minus, -two_d)]
}

/// Which label is the slow (least damped) mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeLabel {
    Plus,
    Minus,
}

/// Slow and fast eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowFast<T> {
    pub slow: Complex<T>,
    pub fast: Complex<T>,
    pub slow_label: ModeLabel,
    /// Set at the EP, where both entries carry the same eigenvalue.
    pub degenerate: bool,
}

/// Split the spectrum into the slow mode (larger `Im`) and the fast mode; ties go to `+`.
pub fn slow_fast<T: Real>(sd: &SpectralData<T>) -> SlowFast<T> {
    let plus_slow = sd.lambda_plus.im >= sd.lambda_minus.im;
    let (slow, fast, slow_label) = if plus_slow {
        (sd.lambda_plus, sd.lambda_minus, ModeLabel::Plus)
    } else {
        (sd.lambda_minus, sd.lambda_plus, ModeLabel::Minus)
    };
    SlowFast { slow, fast, slow_label, degenerate: sd.near_ep }
}

/// Eigenvector components `(v_+, v_-)`.
pub fn eigenvector_components<T: Real>(m: &TwoLevelMatrix<T>, sd: &SpectralData<T>) -> Result<(Complex<T>, Complex<T>)> {
    if m.b.is_zero() {
        return Err(Error::Degenerate("b = 0: eigenvectors are the basis states".into()));
    }
    if sd.near_ep {
        return Err(Error::NearExceptionalPoint { residual: 0.0 });
    }
    let [(vp, _), (vm, _)] = mode_vectors(m, sd);
    Ok((vp, vm))
}

/// Biorthogonal overlaps of `|s>` with the two modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapSet<T> {
    pub o_plus: T,
    pub o_minus: T,
    pub o_cross: Complex<T>,
}

impl<T: Real> OverlapSet<T> {
    /// Worst-case amplification of rounding error in the spectral sum.
    pub fn condition(&self) -> T {
        self.o_plus + self.o_minus + lit::<T>(2.0) * self.o_cross.norm()
    }
}

/// `O_+`, `O_-` and the cross overlap `O_x` for the initial state `|s>`.
pub fn overlaps<T: Real>(m: &TwoLevelMatrix<T>, n: usize) -> Result<OverlapSet<T>> {
    overlaps_with(m, &eigenvalues(m), n)
}

fn overlaps_with<T: Real>(m: &TwoLevelMatrix<T>, sd: &SpectralData<T>, n: usize) -> Result<OverlapSet<T>> {
    let [s1, s2] = initial_state::<T>(n);
    let b = m.b;
    let zero = Complex::new(T::zero(), T::zero());
    if b.is_zero() {
        // Decoupled: the mode with lambda = a is |w>, the other is |r_perp>.
        let a_is_plus = (sd.lambda_plus - m.a).norm() <= (sd.lambda_minus - m.a).norm();
        let (ow, op) = (s1 * s1, s2 * s2);
        let (o_plus, o_minus) = if a_is_plus { (ow, op) } else { (op, ow) };
        return Ok(OverlapSet { o_plus, o_minus, o_cross: zero });
    }
    if sd.near_ep {
        return Err(Error::NearExceptionalPoint { residual: 0.0 });
    }
    let [(vp, qp), (vm, qm)] = mode_vectors(m, sd);
    for q in [qp, qm] {
        if q.norm() < lit(1e-13) {
            return Err(Error::NearExceptionalPoint { residual: q.norm().to_f64().unwrap_or(0.0) });
        }
    }
    let proj = |v: Complex<T>| v * s1 + s2;
    let diag = |v: Complex<T>, q: Complex<T>| (T::one() + v.norm_sqr()) * proj(v).norm_sqr() / q.norm_sqr();
    let o_cross = (vm.conj() * vp + T::one()) * proj(vm).conj() * proj(vp) / (qm.conj() * qp);
    Ok(OverlapSet { o_plus: diag(vp, qp), o_minus: diag(vm, qm), o_cross })
}

/// Precomputed evolution of `|s>` under one effective Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct Propagator<T> {
    pub matrix: TwoLevelMatrix<T>,
    pub spectrum: SpectralData<T>,
    /// Present when the spectral sum is well conditioned.
    pub overlaps: Option<OverlapSet<T>>,
    n: usize,
    state: [T; 2],
    mean: Complex<T>,
    delta: Complex<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(p: &ModelParams<T>) -> Self {
        Self::from_matrix(matrix_elements(p), p.n())
    }

    pub fn from_matrix(m: TwoLevelMatrix<T>, n: usize) -> Self {
        let sd = eigenvalues(&m);
        let half = lit::<T>(0.5);
        let dd = Complex::new(m.d, T::zero());
        let overlaps = overlaps_with(&m, &sd, n)
            .ok()
            .filter(|o| o.condition() <= lit(SPECTRAL_CONDITION_LIMIT) && o.condition().is_finite());
        Propagator {
            matrix: m,
            spectrum: sd,
            overlaps,
            n,
            state: initial_state(n),
            mean: (m.a + dd) * half,
            delta: (m.a - dd) * half,
        }
    }

    /// `exp(-i H t) |s>` as `(<w|.>, <r_perp|.>)`.
    ///
    /// Uses `exp(-iHt) = exp(-i abar t) [cos(Dt) I - i sin(Dt)/D (H - abar I)]`,
    /// with a series for `sin(Dt)/D` when `|Dt|` is small. At `D = 0` this is
    /// the Jordan form `exp(-i lambda t)(I - i t (H - lambda I))`.
    pub fn amplitudes(&self, t: T) -> [Complex<T>; 2] {
        let sd = &self.spectrum;
        let half = lit::<T>(0.5);
        let ep = expi(sd.lambda_plus, t);
        let em = expi(sd.lambda_minus, t);
        let c = (ep + em) * half;
        let dt = sd.discriminant * t;
        let g = if dt.norm() < half {
            expi(self.mean, t) * sinc(dt) * t
        } else {
            (em - ep) / (Complex::new(T::zero(), lit(2.0)) * sd.discriminant)
        };
        let [s1, s2] = self.state;
        let b = self.matrix.b;
        let ig = Complex::new(T::zero(), T::one()) * g;
        let w = c * s1 - ig * (self.delta * s1 + b * s2);
        let r = c * s2 - ig * (Complex::new(b * s1, T::zero()) - self.delta * s2);
        [w, r]
    }

    /// No-click probability from the propagator norm (valid everywhere).
    pub fn no_click_norm(&self, t: T) -> T {
        let [w, r] = self.amplitudes(t);
        w.norm_sqr() + r.norm_sqr()
    }

    /// No-click probability from the spectral sum, when available.
    pub fn no_click_spectral(&self, t: T) -> Option<T> {
        self.overlaps.map(|o| spectral_sum(&self.spectrum, &o, t))
    }

    /// No-click probability, spectral when well conditioned and from the norm otherwise.
    pub fn no_click(&self, t: T) -> T {
        self.no_click_spectral(t).unwrap_or_else(|| self.no_click_norm(t))
    }

    /// Target occupation `|<w| exp(-iHt) |s>|^2`.
    pub fn target_occupation(&self, t: T) -> T {
        self.amplitudes(t)[0].norm_sqr()
    }

    /// `|Re(lambda_+ - lambda_-)|`.
    pub fn beat_frequency(&self) -> T {
        (self.spectrum.lambda_plus.re - self.spectrum.lambda_minus.re).abs()
    }

    /// `lim_{t -> inf} P(t)`: weight carried by undamped modes.
    pub fn long_time_limit(&self) -> T {
        let sd = &self.spectrum;
        let (dp, dm) = (sd.lambda_plus.im < T::zero(), sd.lambda_minus.im < T::zero());
        if dp && dm {
            return T::zero();
        }
        if !dp && !dm {
            return T::one();
        }
        match overlaps_with(&self.matrix, sd, self.n) {
            Ok(o) => {
                if dp {
                    o.o_minus
                } else {
                    o.o_plus
                }
            }
            Err(_) => T::zero(),
        }
    }

    /// Upper bound on `|dP/dt|` for times `>= t`, from the spectral form.
    ///
    /// `None` when the spectral form is not in use.
    pub fn derivative_bound(&self, t: T) -> Option<T> {
        let o = self.overlaps?;
        let sd = &self.spectrum;
        let two = lit::<T>(2.0);
        let (ip, im) = (sd.lambda_plus.im, sd.lambda_minus.im);
        let beat = (sd.lambda_plus - sd.lambda_minus.conj()).norm();
        Some(
            two * ip.abs() * o.o_plus * exp_clamped(two * ip * t)
                + two * im.abs() * o.o_minus * exp_clamped(two * im * t)
                + two * o.o_cross.norm() * beat * exp_clamped((ip + im) * t),
        )
    }
}

fn spectral_sum<T: Real>(sd: &SpectralData<T>, o: &OverlapSet<T>, t: T) -> T {
    let two = lit::<T>(2.0);
    let (lp, lm) = (sd.lambda_plus, sd.lambda_minus);
    let cross_mag = exp_clamped((lp.im + lm.im) * t);
    let cross = if cross_mag.is_zero() {
        T::zero()
    } else {
        let phase = -(lp.re - lm.re) * t;
        two * cross_mag * (Complex::new(phase.cos(), phase.sin()) * o.o_cross).re
    };
    exp_clamped(two * lp.im * t) * o.o_plus + exp_clamped(two * lm.im * t) * o.o_minus + cross
}

fn sinc<T: Real>(z: Complex<T>) -> Complex<T> {
    // sin(z)/z = sum (-1)^k z^(2k) / (2k+1)!, |z| < 1/2.
    let z2 = z * z;
    let mut term = Complex::new(T::one(), T::zero());
    let mut sum = term;
    for k in 1..14 {
        let kk = lit::<T>((2 * k * (2 * k + 1)) as f64);
        term = -term * z2 / kk;
        sum = sum + term;
    }
    sum
}

/// `exp(-iHt)|s>` in the reduced basis.
pub fn propagator_amplitudes<T: Real>(m: &TwoLevelMatrix<T>, n: usize, t: T) -> [Complex<T>; 2] {
    Propagator::from_matrix(*m, n).amplitudes(t)
}

/// No-click probability `P(t) = ||exp(-iHt)|s>||^2`.
pub fn no_click_probability<T: Real>(m: &TwoLevelMatrix<T>, n: usize, t: T) -> T {
    Propagator::from_matrix(*m, n).no_click(t)
}
