// SPDX-License-Identifier: Apache-2.0

//! Scaling predictions, exponent fits and closed forms at the exceptional point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{reset_search_time, search_time};
use crate::error::{Error, Result};
use crate::model::{build_params, classify_regime, matrix_elements, ModelParams, RegimeTag};
use crate::spectral::{eigenvalues, overlaps, slow_fast, ModeLabel};

/// Search-time protocol for exponent predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaMode {
    NoReset,
    /// Resetting with period `T = 1/|Im lambda_f|`.
    ResetFast,
}

/// Predicted exponent `alpha` of `tau ~ N^alpha`.
pub fn predicted_alpha(r_bar: f64, s: f64, gamma_bar: f64, mode: AlphaMode) -> Result<f64> {
    let label = classify_regime(r_bar, s, gamma_bar);
    if label.regime == RegimeTag::OutOfScope {
        return Err(Error::OutOfScope { r_bar, s });
    }
    Ok(match mode {
        AlphaMode::NoReset => label.alpha,
        AlphaMode::ResetFast => match label.regime {
            RegimeTag::B | RegimeTag::C | RegimeTag::BoundaryBC | RegimeTag::BoundaryCD | RegimeTag::BoundaryBD => s + 1.0,
            // r_bar = 0, s < 0 lies on the closure of C.
            RegimeTag::A2 if s < 0.0 => s + 1.0,
            _ => label.alpha,
        },
    })
}

/// Ordinary least-squares fit of `ln y = alpha ln N + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit an exponent to `(N, y)` samples.
pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<FitResult> {
    if samples.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 samples, got {}", samples.len())));
    }
    if samples.iter().any(|&(n, y)| !(n > 0.0) || !(y > 0.0) || !y.is_finite()) {
        return Err(Error::InvalidParameter("samples must have N > 0 and finite y > 0".into()));
    }
    let mut ns: Vec<f64> = samples.iter().map(|s| s.0).collect();
    ns.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("duplicate N in samples".into()));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let alpha_hat = sxy / sxx;
    let intercept = my - alpha_hat * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(FitResult { alpha_hat, intercept, r_squared })
}

/// `count` values of `N` spaced geometrically between `10^lo` and `10^hi`.
pub fn geometric_sizes(lo: f64, hi: f64, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let x = if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 };
            10f64.powf(x).round() as usize
        })
        .collect();
    out.dedup();
    out
}

/// `count` geometrically spaced values between `lo` and `hi`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (r * i as f64).exp()).collect()
}

/// One cell of a phase diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub r_bar: f64,
    pub s: f64,
    pub regime: RegimeTag,
    pub alpha: f64,
    /// `alpha > 1`.
    pub worse_than_classical: bool,
    /// `alpha <= 1/2`.
    pub grover_or_better: bool,
}

/// Phase diagram over a rectangular grid, `s` outer and `r_bar` inner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub mode: AlphaMode,
    pub gamma_bar: f64,
    pub cells: Vec<PhaseCell>,
}

/// Evaluate the regime map and `alpha` on every grid point.
pub fn phase_diagram(r_grid: &[f64], s_grid: &[f64], gamma_bar: f64, mode: AlphaMode) -> Result<PhaseDiagram> {
    if r_grid.is_empty() || s_grid.is_empty() {
        return Err(Error::InvalidParameter("grids must be non-empty".into()));
    }
    let points: Vec<(f64, f64)> = s_grid.iter().flat_map(|&s| r_grid.iter().map(move |&r| (r, s))).collect();
    let cells = points
        .par_iter()
        .map(|&(r_bar, s)| {
            let regime = classify_regime(r_bar, s, gamma_bar).regime;
            let alpha = predicted_alpha(r_bar, s, gamma_bar, mode).unwrap_or(f64::NAN);
            PhaseCell {
                r_bar,
                s,
                regime,
                alpha,
                worse_than_classical: alpha > 1.0,
                grover_or_better: alpha <= 0.5,
            }
        })
        .collect();
    Ok(PhaseDiagram { mode, gamma_bar, cells })
}

/// Predicted exponents of `1/|Im lambda_s|` and `1/|Im lambda_f|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateExponents {
    pub slow: f64,
    pub fast: f64,
}

/// The slow time scale follows the search time, the fast one scales as `N^s`.
pub fn eigenvalue_scaling_prediction(r_bar: f64, s: f64, gamma_bar: f64) -> Result<RateExponents> {
    Ok(RateExponents { slow: predicted_alpha(r_bar, s, gamma_bar, AlphaMode::NoReset)?, fast: s })
}

/// Predicted exponent of the fast-mode overlap `O_f`, where known.
///
/// `-1` in regimes B and C; in D, `2 r_bar - 1` for `s > 0` and `2 r_bar - 2 s - 1` for `s < 0`.
pub fn overlap_scaling_prediction(r_bar: f64, s: f64, gamma_bar: f64) -> Option<f64> {
    match classify_regime(r_bar, s, gamma_bar).regime {
        RegimeTag::B | RegimeTag::C => Some(-1.0),
        RegimeTag::D if s > 0.0 => Some(2.0 * r_bar - 1.0),
        RegimeTag::D if s < 0.0 => Some(2.0 * r_bar - 2.0 * s - 1.0),
        _ => None,
    }
}

/// A scaling family `gamma = gamma_bar N^(-r_bar-1)`, `kappa = kappa_bar N^(-s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFamily {
    pub gamma_bar: f64,
    pub kappa_bar: f64,
    pub r_bar: f64,
    pub s: f64,
}

impl ScalingFamily {
    pub fn new(gamma_bar: f64, kappa_bar: f64, r_bar: f64, s: f64) -> Self {
        Self { gamma_bar, kappa_bar, r_bar, s }
    }

    pub fn params(&self, n: usize) -> Result<ModelParams<f64>> {
        build_params(n, self.gamma_bar, self.kappa_bar, self.r_bar, self.s)
    }
}

/// Spectral quantities of one member of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeScales {
    pub n: usize,
    pub inv_rate_slow: f64,
    pub inv_rate_fast: f64,
    pub overlap_slow: f64,
    pub overlap_fast: f64,
}

/// `1/|Im lambda|` and overlaps of the slow and fast modes at size `n`.
pub fn mode_scales(family: &ScalingFamily, n: usize) -> Result<ModeScales> {
    let p = family.params(n)?;
    let m = matrix_elements(&p);
    let sd = eigenvalues(&m);
    let sf = slow_fast(&sd);
    let o = overlaps(&m, n)?;
    let (os, of) = match sf.slow_label {
        ModeLabel::Plus => (o.o_plus, o.o_minus),
        ModeLabel::Minus => (o.o_minus, o.o_plus),
    };
    Ok(ModeScales {
        n,
        inv_rate_slow: 1.0 / sf.slow.im.abs(),
        inv_rate_fast: 1.0 / sf.fast.im.abs(),
        overlap_slow: os,
        overlap_fast: of,
    })
}

/// Fitted exponent of the no-reset search time along a family.
pub fn search_time_exponent(family: &ScalingFamily, sizes: &[usize], epsilon: f64) -> Result<FitResult> {
    let samples = sizes
        .par_iter()
        .map(|&n| Ok((n as f64, search_time(&family.params(n)?, epsilon)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_exponent(&samples)
}

/// Change of the search-time exponent under resetting with `T = N^beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentChange {
    pub alpha: f64,
    pub alpha_reset: f64,
    pub change: f64,
}

/// Fit `tau` and `tau_R(T = N^beta)` along a family and report `alpha_R - alpha`.
pub fn reset_exponent_change(family: &ScalingFamily, beta: f64, epsilon: f64, sizes: &[usize]) -> Result<ExponentChange> {
    reset_exponent_change_with(family, |n| (n as f64).powf(beta), epsilon, sizes)
}

/// As [`reset_exponent_change`] with an arbitrary period rule `T(N)`.
pub fn reset_exponent_change_with<F: Fn(usize) -> f64 + Sync>(
    family: &ScalingFamily,
    period: F,
    epsilon: f64,
    sizes: &[usize],
) -> Result<ExponentChange> {
    let rows = sizes
        .par_iter()
        .map(|&n| {
            let p = family.params(n)?;
            let tau = search_time(&p, epsilon)?;
            let tau_r = reset_search_time(&p, period(n), epsilon, false)?.tau_r;
            Ok(((n as f64, tau), (n as f64, tau_r)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (plain, reset): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let alpha = fit_exponent(&plain)?.alpha_hat;
    let alpha_reset = fit_exponent(&reset)?.alpha_hat;
    Ok(ExponentChange { alpha, alpha_reset, change: alpha_reset - alpha })
}

/// Leading-order coefficients of `P(t) = e^(-a t)(A + B cos wt + C sin wt)` at
/// `gamma = 1/N`, `kappa = kappa_bar / sqrt(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpCoefficients {
    pub decay: f64,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Oscillation amplitude `sqrt(B^2 + C^2)`.
    pub d: f64,
}

/// Coefficients for `0 < kappa_bar < 2`.
pub fn ep_coefficients(n: usize, kappa_bar: f64) -> Result<EpCoefficients> {
    if !(kappa_bar > 0.0 && kappa_bar < 2.0) {
        return Err(Error::InvalidParameter(format!("kappa_bar must lie in (0, 2), got {kappa_bar}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N must be at least 2, got {n}")));
    }
    if n < 100 {
        log::warn!("EP asymptotics evaluated at small N = {n}");
    }
    let nf = n as f64;
    let k2 = kappa_bar * kappa_bar;
    let gap = 4.0 - k2;
    Ok(EpCoefficients {
        decay: kappa_bar / nf.sqrt(),
        omega: (gap / nf).sqrt(),
        a: 4.0 / gap,
        b: -k2 / gap,
        c: kappa_bar / gap.sqrt(),
        d: 2.0 * kappa_bar / gap,
    })
}

/// Asymptotic `P(t)` near the exceptional point.
pub fn ep_asymptotic_pt(n: usize, kappa_bar: f64, t: f64) -> Result<f64> {
    let k = ep_coefficients(n, kappa_bar)?;
    let (s, c) = (k.omega * t).sin_cos();
    Ok((-k.decay * t).exp() * (k.a + k.b * c + k.c * s))
}

/// Envelope `e^(-a t)(A -+ D)` bounding the asymptotic `P(t)`.
pub fn ep_envelope_bounds(n: usize, kappa_bar: f64, t: f64) -> Result<(f64, f64)> {
    let k = ep_coefficients(n, kappa_bar)?;
    let e = (-k.decay * t).exp();
    Ok((e * (k.a - k.d), e * (k.a + k.d)))
}

/// Times at which the envelope reaches `c`: `(sqrt(N)/kappa_bar) ln[2/((2 +- kappa_bar) c)]`.
pub fn ep_time_bounds(n: usize, kappa_bar: f64, c: f64) -> Result<(f64, f64)> {
    let k = ep_coefficients(n, kappa_bar)?;
    if !(c > 0.0 && c < k.a - k.d) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, {}), got {c}", k.a - k.d)));
    }
    let scale = (n as f64).sqrt() / kappa_bar;
    Ok((
        scale * (2.0 / ((2.0 + kappa_bar) * c)).ln(),
        scale * (2.0 / ((2.0 - kappa_bar) * c)).ln(),
    ))
}

/// Exponents of the simulation cost of a gate-based realisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryComplexityRow {
    pub dt_exponent: f64,
    pub tau_exponent: f64,
    pub nsteps_exponent: f64,
    pub tau_physical_exponent: f64,
}

/// Time step `dt ~ 1/||L||`, step count and physical run time for `s <= 0`.
pub fn query_complexity(r_bar: f64, s: f64, with_reset: bool) -> Result<QueryComplexityRow> {
    if s > 0.0 {
        return Err(Error::InvalidParameter(format!("query accounting covers s <= 0, got s = {s}")));
    }
    let mode = if with_reset { AlphaMode::ResetFast } else { AlphaMode::NoReset };
    let tau_exponent = predicted_alpha(r_bar, s, 1.0, mode)?;
    let (dt_exponent, nsteps_exponent) = if s >= r_bar {
        (r_bar, 1.0 + s - r_bar)
    } else if with_reset {
        (s, 1.0)
    } else {
        (s, 2.0 * (r_bar - s) + 1.0)
    };
    Ok(QueryComplexityRow {
        dt_exponent,
        tau_exponent,
        nsteps_exponent,
        tau_physical_exponent: nsteps_exponent + dt_exponent / 2.0,
    })
}

/// `||L|| = 1 + ||H|| + kappa`, with `||H||` the spectral norm of the Hermitian 2x2 block.
pub fn lindblad_norm(p: &ModelParams<f64>) -> f64 {
    let m = matrix_elements(p);
    let (a, b, d) = (m.a.re, m.b, m.d);
    let mean = 0.5 * (a + d);
    let half = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let h = (mean.abs() + half).max((mean - half).abs());
    1.0 + h + p.kappa()
}

/// Largest `N` for which `dt(N) = kappa/(gamma N)^2` stays above `dt0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NStar {
    Finite(f64),
    Unbounded,
}

/// Validity bound of the continuous-monitoring model.
pub fn validity_bound_nstar(r_bar: f64, s: f64, gamma_bar: f64, kappa_bar: f64, dt0: f64) -> Result<NStar> {
    if !(gamma_bar > 0.0 && kappa_bar > 0.0 && dt0 > 0.0) {
        return Err(Error::InvalidParameter("gamma_bar, kappa_bar and dt0 must be positive".into()));
    }
    let e = 2.0 * r_bar - s;
    if e >= 0.0 {
        return Ok(NStar::Unbounded);
    }
    Ok(NStar::Finite((gamma_bar * gamma_bar * dt0 / kappa_bar).powf(1.0 / e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reset_predictions() {
        assert_eq!(predicted_alpha(1.0, 0.5, 1.0, AlphaMode::NoReset).unwrap(), 3.5);
        assert_eq!(predicted_alpha(1.0, 0.5, 1.0, AlphaMode::ResetFast).unwrap(), 1.5);
        assert_eq!(predicted_alpha(-2.0, -0.5, 1.0, AlphaMode::ResetFast).unwrap(), 0.5);
        assert!(predicted_alpha(f64::NAN, 0.0, 1.0, AlphaMode::NoReset).is_err());
    }

    #[test]
    fn fit_recovers_exact_power() {
        let samples: Vec<(f64, f64)> = [10.0, 100.0, 1000.0, 1e4].iter().map(|&n: &f64| (n, 3.0 * n.powf(1.25))).collect();
        let f = fit_exponent(&samples).unwrap();
        assert_relative_eq!(f.alpha_hat, 1.25, epsilon = 1e-12);
        assert_relative_eq!(f.intercept, 3f64.ln(), epsilon = 1e-10);
        assert_relative_eq!(f.r_squared, 1.0, epsilon = 1e-12);
        assert!(fit_exponent(&samples[..2]).is_err());
        assert!(fit_exponent(&[(10.0, 1.0), (10.0, 2.0), (100.0, 3.0)]).is_err());
        assert!(fit_exponent(&[(10.0, 1.0), (20.0, 0.0), (100.0, 3.0)]).is_err());
    }

    #[test]
    fn ep_closed_forms() {
        for &k in &[0.1, 0.5, 1.0, 1.5, 1.9] {
            assert_relative_eq!(ep_asymptotic_pt(1_000_000, k, 0.0).unwrap(), 1.0, epsilon = 1e-12);
            let c = ep_coefficients(1_000_000, k).unwrap();
            assert_relative_eq!(c.d, (c.b * c.b + c.c * c.c).sqrt(), epsilon = 1e-12);
        }
        let (lo, hi) = ep_time_bounds(1_000_000, 1.0, 1e-3).unwrap();
        assert_relative_eq!(lo, 1000.0 * (2.0 / 3e-3f64).ln(), epsilon = 1e-9);
        assert_relative_eq!(hi, 1000.0 * (2.0 / 1e-3f64).ln(), epsilon = 1e-9);
        assert!(ep_time_bounds(100, 1.0, 0.9).is_err());
        assert!(ep_coefficients(100, 2.0).is_err());
    }

    #[test]
    fn nstar_examples() {
        assert_eq!(validity_bound_nstar(-1.0, -1.0, 1.0, 1.0, 0.01).unwrap(), NStar::Finite(100.0));
        assert_eq!(validity_bound_nstar(-0.5, -1.0, 1.0, 1.0, 0.01).unwrap(), NStar::Unbounded);
    }

    #[test]
    fn query_rows() {
        let r = query_complexity(-1.0, -1.0, false).unwrap();
        assert_relative_eq!(r.tau_physical_exponent, 0.5);
        let r = query_complexity(0.0, -1.0, true).unwrap();
        assert_relative_eq!(r.tau_physical_exponent, 0.5);
        assert!(query_complexity(0.0, 0.5, false).is_err());
    }

    #[test]
    fn phase_diagram_single_cell() {
        let d = phase_diagram(&[0.1], &[0.25], 1.0, AlphaMode::NoReset).unwrap();
        assert_eq!(d.cells.len(), 1);
        assert_relative_eq!(d.cells[0].alpha, 1.45);
        assert!(d.cells[0].worse_than_classical);
    }
}
