// SPDX-License-Identifier: Apache-2.0

//! Fidelities, search times and conditional resetting.
//!
//! Without resetting the no-click probability `P(t)` obeys
//! `dP/dt = -2 kappa |<w|psi(t)>|^2 <= 0`, so it is nonincreasing and every
//! threshold is crossed at most once. With resetting to `|s>` every period `T`
//! (when no click occurred) the survival probability is `P(T)^m P(t - mT)`
//! with `m = floor(t/T)`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::{lit, Real};
use crate::spectral::Propagator;

/// Default detection threshold.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Step cap of the oscillatory target-occupation scan.
pub const SCAN_CAP: u64 = 1_000_000_000;

/// Relative tolerance of crossing times.
pub const CROSSING_RTOL: f64 = 1e-12;

const MAX_DOUBLINGS: u32 = 4096;

/// Fidelities at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPoint<T> {
    pub t: T,
    /// Probability of finding the walker on the target with no prior click.
    pub f0: T,
    /// Probability that a click has occurred by `t`.
    pub f1: T,
    /// Survival (no-click) probability.
    pub p: T,
}

/// Conditional-reset protocol: reset to `|s>` every `period` if no click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetSchedule<T> {
    pub period: T,
    /// Number of epochs, when fixed; `None` means unbounded.
    pub epochs: Option<u64>,
    pub epsilon: T,
}

impl<T: Real> ResetSchedule<T> {
    pub fn new(period: T) -> Result<Self> {
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::InvalidParameter(format!("reset period must be > 0, got {period}")));
        }
        Ok(Self { period, epochs: None, epsilon: lit(DEFAULT_EPSILON) })
    }

    /// Schedule with the fewest epochs reaching `P(T)^m <= epsilon`.
    pub fn sufficient(p: &ModelParams<T>, period: T, epsilon: T) -> Result<Self> {
        let mut s = Self::new(period)?;
        let pt = Propagator::new(p).no_click(period);
        s.epochs = Some(epochs_needed(pt, epsilon)?);
        s.epsilon = epsilon;
        Ok(s)
    }

    /// True when the epoch count reaches the threshold for the given `P(T)`.
    pub fn is_sufficient(&self, p_period: T) -> bool {
        match self.epochs {
            Some(m) => epochs_needed(p_period, self.epsilon).map(|need| m >= need).unwrap_or(false),
            None => true,
        }
    }
}

/// Search-time definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// First `t` with `F1(t) >= 1 - epsilon` (requires `kappa > 0`).
    Click,
    /// First `t` with `F0(t) >= 1 - epsilon`; used for the unmonitored walk.
    TargetOccupation,
}

/// `(F0, F1)` from `P(T)^m`, `P(Delta)` and `|<w|S(Delta)|s>|^2`.
pub fn fidelity_components<T: Real>(p_epochs: T, p_delta: T, target_delta: T) -> (T, T) {
    (p_epochs * target_delta, T::one() - p_epochs * p_delta)
}

/// `p^m` for large `m` without repeated multiplication.
pub fn power_epochs<T: Real>(p: T, m: u64) -> T {
    if m == 0 {
        T::one()
    } else if p <= T::zero() {
        T::zero()
    } else {
        (p.ln() * T::from_u64(m).unwrap_or_else(T::max_value)).exp()
    }
}

/// Fidelities and survival at time `t`, optionally under resetting.
pub fn fidelity<T: Real>(p: &ModelParams<T>, t: T, schedule: Option<&ResetSchedule<T>>) -> Result<FidelityPoint<T>> {
    Ok(fidelity_curve(p, &[t], schedule)?[0])
}

/// [`fidelity`] over a time grid, sharing one propagator.
pub fn fidelity_curve<T: Real>(
    p: &ModelParams<T>,
    times: &[T],
    schedule: Option<&ResetSchedule<T>>,
) -> Result<Vec<FidelityPoint<T>>> {
    let prop = Propagator::new(p);
    let p_period = schedule.map(|s| prop.no_click(s.period));
    times
        .iter()
        .map(|&t| {
            if !(t >= T::zero()) || !t.is_finite() {
                return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
            }
            let (m, delta) = match schedule {
                Some(s) => split_epochs(t, s.period),
                None => (0, t),
            };
            let p_epochs = p_period.map_or(T::one(), |pt| power_epochs(pt, m));
            let [w, r] = prop.amplitudes(delta);
            let target = w.norm_sqr();
            let p_delta = w.norm_sqr() + r.norm_sqr();
            let p_delta = prop.no_click_spectral(delta).unwrap_or(p_delta);
            let (f0, f1) = fidelity_components(p_epochs, p_delta, target);
            Ok(FidelityPoint { t, f0, f1, p: p_epochs * p_delta })
        })
        .collect()
}

fn split_epochs<T: Real>(t: T, period: T) -> (u64, T) {
    let m = (t / period).floor();
    let delta = (t - m * period).max(T::zero());
    (m.to_u64().unwrap_or(u64::MAX), delta)
}

/// Smallest `m` with `p_period^m <= epsilon`.
pub fn epochs_needed<T: Real>(p_period: T, epsilon: T) -> Result<u64> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(p_period > T::zero()) {
        return Err(Error::InvalidParameter(format!("P(T) must be > 0, got {p_period}")));
    }
    if p_period >= T::one() {
        return Err(Error::NoDecay(format!("P(T) = {p_period}: resetting never reaches the threshold")));
    }
    if p_period <= epsilon {
        return Ok(1);
    }
    let estimate = (epsilon.ln() / p_period.ln()).ceil();
    let mut m = estimate.to_u64().ok_or(Error::ScanLimit { steps: u64::MAX, t: f64::INFINITY })?;
    while m > 1 && power_epochs(p_period, m - 1) <= epsilon {
        m -= 1;
    }
    while power_epochs(p_period, m) > epsilon {
        m += 1;
    }
    Ok(m)
}

fn validate_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// First `t >= 0` with `f(t) <= level` for a nonincreasing `f`.
///
/// The step grows geometrically from `h0` until the level is bracketed, then
/// the crossing is bisected to [`CROSSING_RTOL`].
pub fn first_crossing<T: Real, F: Fn(T) -> T>(f: F, level: T, h0: T) -> Result<T> {
    if f(T::zero()) <= level {
        return Ok(T::zero());
    }
    let mut lo = T::zero();
    let mut h = h0;
    for _ in 0..MAX_DOUBLINGS {
        let hi = lo + h;
        if !hi.is_finite() {
            break;
        }
        if f(hi) <= level {
            return Ok(bisect_down(&f, lo, hi, level));
        }
        lo = hi;
        h = h + h;
    }
    Err(Error::ScanLimit { steps: MAX_DOUBLINGS as u64, t: lo.to_f64().unwrap_or(f64::INFINITY) })
}

// f(lo) > level >= f(hi); returns the smallest bracketed time found.
fn bisect_down<T: Real, F: Fn(T) -> T>(f: &F, mut lo: T, mut hi: T, level: T) -> T {
    let rtol: T = lit(CROSSING_RTOL);
    let half = lit::<T>(0.5);
    for _ in 0..256 {
        if hi - lo <= rtol * hi {
            break;
        }
        let mid = lo + (hi - lo) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Initial scan step `min(pi/(8 Omega), 1/(8 |Im lambda_f|))`.
fn initial_step<T: Real>(prop: &Propagator<T>) -> T {
    let sd = &prop.spectrum;
    let eighth = lit::<T>(0.125);
    let omega = prop.beat_frequency();
    let fast = sd.lambda_plus.im.min(sd.lambda_minus.im).abs();
    let slow = sd.lambda_plus.im.max(sd.lambda_minus.im).abs();
    let mut h = T::infinity();
    if omega > T::zero() {
        h = h.min(T::PI() * eighth / omega);
    }
    if fast > T::zero() {
        h = h.min(eighth / fast);
    }
    if !h.is_finite() && slow > T::zero() {
        h = eighth / slow;
    }
    if !h.is_finite() || h <= T::zero() {
        T::one()
    } else {
        h
    }
}

/// No-reset search time: first `t` with `F1(t) >= 1 - epsilon`.
pub fn search_time<T: Real>(p: &ModelParams<T>, epsilon: T) -> Result<T> {
    search_time_with(p, epsilon, SearchMode::Click)
}

/// Search time under the chosen definition.
pub fn search_time_with<T: Real>(p: &ModelParams<T>, epsilon: T, mode: SearchMode) -> Result<T> {
    validate_epsilon(epsilon)?;
    let prop = Propagator::new(p);
    match mode {
        SearchMode::Click => {
            if p.kappa().is_zero() {
                return Err(Error::NoDecay("kappa = 0: use the target-occupation search mode".into()));
            }
            click_search(&prop, epsilon)
        }
        SearchMode::TargetOccupation => occupation_search(&prop, T::one() - epsilon).map(|(t, _)| t),
    }
}

fn click_search<T: Real>(prop: &Propagator<T>, epsilon: T) -> Result<T> {
    if prop.long_time_limit() >= epsilon {
        return Err(Error::NoCrossing(format!(
            "P(t) tends to {} which is above epsilon = {epsilon}",
            prop.long_time_limit()
        )));
    }
    first_crossing(|t| prop.no_click(t), epsilon, initial_step(prop))
}

// Scan F0 on the grid pi/(8 Omega); returns the first time F0 >= level, or
// with level = None the first local maximum.
fn occupation_search<T: Real>(prop: &Propagator<T>, level: T) -> Result<(T, T)> {
    let omega = prop.beat_frequency();
    if !(omega > T::zero()) {
        return Err(Error::Degenerate("no oscillation: Re(lambda_+) = Re(lambda_-)".into()));
    }
    let h = T::PI() * lit::<T>(0.125) / omega;
    let f = |t: T| prop.target_occupation(t);
    let mut prev = f(T::zero());
    if prev >= level {
        return Ok((T::zero(), prev));
    }
    let mut cur = f(h);
    let mut k: u64 = 1;
    while k < SCAN_CAP {
        let t = h * T::from_u64(k).unwrap();
        if cur >= level {
            let tc = bisect_up(&f, t - h, t, level);
            return Ok((tc, f(tc)));
        }
        let next = f(t + h);
        if cur > prev && cur >= next {
            let (tp, fp) = golden_max(&f, t - h, t + h);
            if fp >= level {
                let tc = bisect_up(&f, t - h, tp, level);
                return Ok((tc, f(tc)));
            }
        }
        prev = cur;
        cur = next;
        k += 1;
    }
    Err(Error::ScanLimit { steps: SCAN_CAP, t: (h * T::from_u64(k).unwrap()).to_f64().unwrap_or(f64::NAN) })
}

// f(lo) < level <= f(hi).
fn bisect_up<T: Real, F: Fn(T) -> T>(f: &F, mut lo: T, mut hi: T, level: T) -> T {
    let rtol: T = lit(CROSSING_RTOL);
    let half = lit::<T>(0.5);
    for _ in 0..256 {
        if hi - lo <= rtol * hi {
            break;
        }
        let mid = lo + (hi - lo) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn golden_max<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T) -> (T, T) {
    let g = lit::<T>(0.618_033_988_749_894_8);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= lit::<T>(1e-14) * b.abs().max(T::one()) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    let t = (a + b) * lit(0.5);
    (t, f(t))
}

/// First local maximum of the target occupation `F0(t)` (time, value).
pub fn first_target_peak<T: Real>(p: &ModelParams<T>) -> Result<(T, T)> {
    first_peak_scan(&Propagator::new(p))
}

fn first_peak_scan<T: Real>(prop: &Propagator<T>) -> Result<(T, T)> {
    let omega = prop.beat_frequency();
    if !(omega > T::zero()) {
        return Err(Error::Degenerate("no oscillation: Re(lambda_+) = Re(lambda_-)".into()));
    }
    let h = T::PI() * lit::<T>(0.125) / omega;
    let f = |t: T| prop.target_occupation(t);
    let (mut prev, mut cur) = (f(T::zero()), f(h));
    for k in 1..SCAN_CAP {
        let t = h * T::from_u64(k).unwrap();
        let next = f(t + h);
        if cur > prev && cur >= next {
            return Ok(golden_max(&f, t - h, t + h));
        }
        prev = cur;
        cur = next;
    }
    Err(Error::ScanLimit { steps: SCAN_CAP, t: f64::NAN })
}

/// Search time under resetting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetSearch<T> {
    pub tau_r: T,
    pub epochs: u64,
    pub p_period: T,
}

/// Reset search time `m T`, or with `refine` the exact crossing inside the last epoch.
pub fn reset_search_time<T: Real>(p: &ModelParams<T>, period: T, epsilon: T, refine: bool) -> Result<ResetSearch<T>> {
    validate_epsilon(epsilon)?;
    if !(period > T::zero()) || !period.is_finite() {
        return Err(Error::InvalidParameter(format!("reset period must be > 0, got {period}")));
    }
    let prop = Propagator::new(p);
    let p_period = prop.no_click(period);
    let epochs = if p_period <= epsilon { 1 } else { epochs_needed(p_period, epsilon)? };
    let mf = T::from_u64(epochs).unwrap_or_else(T::max_value);
    let tau_r = if refine {
        let before = power_epochs(p_period, epochs - 1);
        let level = epsilon / before;
        let delta = bisect_down(&|t| prop.no_click(t), T::zero(), period, level);
        (mf - T::one()) * period + delta
    } else {
        mf * period
    };
    Ok(ResetSearch { tau_r, epochs, p_period })
}

/// One point of a reset-period scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetPoint<T> {
    pub period: T,
    pub tau_r: Option<T>,
    /// `tau_R / tau`.
    pub ratio: Option<T>,
}

/// Result of [`optimal_reset_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResetScan<T> {
    pub tau: T,
    pub best_period: T,
    pub best_tau_r: T,
    pub points: Vec<ResetPoint<T>>,
}

/// Scan reset periods and report `tau_R(T)/tau` and the best period.
pub fn optimal_reset_scan<T: Real>(p: &ModelParams<T>, epsilon: T, periods: &[T]) -> Result<ResetScan<T>> {
    let tau = search_time(p, epsilon)?;
    let points: Vec<ResetPoint<T>> = periods
        .iter()
        .map(|&period| {
            let tau_r = reset_search_time(p, period, epsilon, false).ok().map(|r| r.tau_r);
            ResetPoint { period, tau_r, ratio: tau_r.map(|x| x / tau) }
        })
        .collect();
    let best = points
        .iter()
        .filter_map(|pt| pt.tau_r.map(|x| (pt.period, x)))
        .fold(None, |acc: Option<(T, T)>, cur| match acc {
            Some(a) if a.1 <= cur.1 => Some(a),
            _ => Some(cur),
        });
    let (best_period, best_tau_r) =
        best.ok_or_else(|| Error::NoCrossing("no reset period in the grid reaches the threshold".into()))?;
    Ok(ResetScan { tau, best_period, best_tau_r, points })
}

/// Draws first-click times by inverting the survival function.
#[derive(Debug, Clone, Copy)]
pub struct ClickSampler<T> {
    prop: Propagator<T>,
    period: Option<T>,
    p_period: T,
    p_limit: T,
    h0: T,
}

impl<T: Real> ClickSampler<T> {
    pub fn new(p: &ModelParams<T>, schedule: Option<&ResetSchedule<T>>) -> Result<Self> {
        if p.kappa().is_zero() {
            return Err(Error::NoDecay("kappa = 0: no clicks are ever recorded".into()));
        }
        let prop = Propagator::new(p);
        let period = schedule.map(|s| s.period);
        let p_period = period.map_or(T::one(), |t| prop.no_click(t));
        Ok(Self { prop, period, p_period, p_limit: prop.long_time_limit(), h0: initial_step(&prop) })
    }

    /// Survival probability `S(t)`.
    pub fn survival(&self, t: T) -> T {
        match self.period {
            Some(period) => {
                let (m, delta) = split_epochs(t, period);
                power_epochs(self.p_period, m) * self.prop.no_click(delta)
            }
            None => self.prop.no_click(t),
        }
    }

    /// Click time for a uniform variate `u` in `[0, 1)`; infinite if no click ever occurs.
    pub fn click_time(&self, u: T) -> T {
        let v = T::one() - u;
        if v >= T::one() {
            return T::zero();
        }
        match self.period {
            None => {
                if self.p_limit >= v {
                    return T::infinity();
                }
                first_crossing(|t| self.prop.no_click(t), v, self.h0).unwrap_or(T::infinity())
            }
            Some(period) => {
                let pt = self.p_period;
                if pt >= T::one() {
                    return T::infinity();
                }
                let mut m: u64 = if pt <= T::zero() { 0 } else { (v.ln() / pt.ln()).floor().to_u64().unwrap_or(u64::MAX) };
                while m > 0 && power_epochs(pt, m) <= v {
                    m -= 1;
                }
                while power_epochs(pt, m + 1) > v {
                    m += 1;
                }
                let level = v / power_epochs(pt, m);
                let delta = bisect_down(&|t| self.prop.no_click(t), T::zero(), period, level);
                T::from_u64(m).unwrap() * period + delta
            }
        }
    }

    /// Click time drawn from a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, seed: u64) -> T {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: f64 = rng.gen();
        self.click_time(lit(u))
    }
}

/// One first-click time drawn with a seeded generator.
pub fn sample_click_time<T: Real>(p: &ModelParams<T>, schedule: Option<&ResetSchedule<T>>, seed: u64) -> Result<T> {
    Ok(ClickSampler::new(p, schedule)?.sample(seed))
}

/// Target amplitude `<w| exp(-iHt) |s>`.
pub fn target_amplitude<T: Real>(p: &ModelParams<T>, t: T) -> Complex<T> {
    Propagator::new(p).amplitudes(t)[0]
}
