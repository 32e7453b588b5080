// SPDX-License-Identifier: Apache-2.0

//! Full `N`-dimensional reference dynamics and trajectory sampling.
//!
//! The state is propagated in the vertex basis with explicit Runge-Kutta
//! integration of `d psi/dt = -i H_eff psi`, together with the click flux
//! `dq/dt = 2 kappa |psi_w|^2`. Nothing here uses the two-level reduction, so
//! the results serve as an independent check of it.

use num_complex::Complex;
use rayon::prelude::*;

use crate::dynamics::{ClickSampler, ResetSchedule};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::{count, lit, Real};
use crate::spectral::Propagator;

/// Largest `N` accepted by the dense oracle.
pub const DENSE_CAP: usize = 4096;

/// Above this size the Hamiltonian is applied matrix-free.
pub const MATRIX_FREE_ABOVE: usize = 64;

/// Index of the target vertex.
pub const TARGET: usize = 0;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    pub n: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    fn matvec_into(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(x).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b);
        }
    }
}

/// `H_eff = -gamma N |s><s| - (eps_w + i kappa)|w><w|` in the vertex basis.
pub fn dense_hamiltonian<T: Real>(p: &ModelParams<T>) -> Result<DenseMatrix<T>> {
    let n = p.n();
    if n > DENSE_CAP {
        return Err(Error::DenseCapExceeded { n, cap: DENSE_CAP });
    }
    let mut data = vec![Complex::new(-p.gamma(), T::zero()); n * n];
    data[TARGET * n + TARGET] = Complex::new(-p.gamma() - p.epsilon_w(), -p.kappa());
    Ok(DenseMatrix { n, data })
}

enum Operator<T> {
    Dense(DenseMatrix<T>),
    RankTwo { gamma: T, target: Complex<T> },
}

impl<T: Real> Operator<T> {
    fn new(p: &ModelParams<T>) -> Result<Self> {
        if p.n() > DENSE_CAP {
            return Err(Error::DenseCapExceeded { n: p.n(), cap: DENSE_CAP });
        }
        if p.n() <= MATRIX_FREE_ABOVE {
            Ok(Operator::Dense(dense_hamiltonian(p)?))
        } else {
            Ok(Operator::RankTwo { gamma: p.gamma(), target: Complex::new(-p.epsilon_w(), -p.kappa()) })
        }
    }

    // out = -i H x
    fn apply(&self, x: &[Complex<T>], out: &mut [Complex<T>]) {
        match self {
            Operator::Dense(m) => m.matvec_into(x, out),
            Operator::RankTwo { gamma, target } => {
                let total = x.iter().fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + *v);
                let fill = -total * *gamma;
                for o in out.iter_mut() {
                    *o = fill;
                }
                out[TARGET] = out[TARGET] + *target * x[TARGET];
            }
        }
        let mi = Complex::new(T::zero(), -T::one());
        for o in out.iter_mut() {
            *o = *o * mi;
        }
    }
}

/// Time integrator for [`evolve_full`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator<T> {
    /// Dormand-Prince 5(4) with PI step control.
    Adaptive { atol: T, rtol: T },
    /// Classical RK4 with a fixed step (bit-reproducible).
    FixedRk4 { dt: T },
}

impl<T: Real> Integrator<T> {
    /// Adaptive integration at absolute and relative tolerance `1e-12`.
    pub fn default_adaptive() -> Self {
        Integrator::Adaptive { atol: lit(1e-12), rtol: lit(1e-12) }
    }
}

/// Full-dimensional state summary at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSample<T> {
    pub t: T,
    /// `||psi(t)||^2`.
    pub p_full: T,
    /// `|<w|psi(t)>|^2`.
    pub f0_full: T,
    /// Integrated click flux `q(t)`.
    pub click_flux: T,
    /// `|p_full + click_flux - 1|`.
    pub conservation_residual: T,
}

// psi occupies 0..n; slot n holds the flux q in its real part.
struct System<T> {
    op: Operator<T>,
    n: usize,
    kappa: T,
}

impl<T: Real> System<T> {
    fn rhs(&self, y: &[Complex<T>], out: &mut [Complex<T>]) {
        self.op.apply(&y[..self.n], &mut out[..self.n]);
        let flux = lit::<T>(2.0) * self.kappa * y[TARGET].norm_sqr();
        out[self.n] = Complex::new(flux, T::zero());
    }
}

fn sample<T: Real>(t: T, y: &[Complex<T>], n: usize) -> EvolutionSample<T> {
    let p_full = y[..n].iter().fold(T::zero(), |acc, v| acc + v.norm_sqr());
    let click_flux = y[n].re;
    EvolutionSample {
        t,
        p_full,
        f0_full: y[TARGET].norm_sqr(),
        click_flux,
        conservation_residual: (p_full + click_flux - T::one()).abs(),
    }
}

/// Evolve `|s>` in the full space and record samples at `times` (nondecreasing, >= 0).
pub fn evolve_full<T: Real>(p: &ModelParams<T>, times: &[T], integrator: Integrator<T>) -> Result<Vec<EvolutionSample<T>>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= T::zero()) || !t.is_finite()) {
        return Err(Error::InvalidParameter("time grid must be finite, nonnegative and nondecreasing".into()));
    }
    let n = p.n();
    let sys = System { op: Operator::new(p)?, n, kappa: p.kappa() };
    let amp = Complex::new(T::one() / count::<T>(n).sqrt(), T::zero());
    let mut y = vec![amp; n + 1];
    y[n] = Complex::new(T::zero(), T::zero());
    let mut t = T::zero();
    let mut out = Vec::with_capacity(times.len());
    match integrator {
        Integrator::FixedRk4 { dt } => {
            if !(dt > T::zero()) {
                return Err(Error::InvalidParameter(format!("RK4 step must be > 0, got {dt}")));
            }
            let mut work = Rk4Work::new(n + 1);
            for &target in times {
                while t < target {
                    let h = dt.min(target - t);
                    rk4_step(&sys, &mut y, h, &mut work);
                    t = if target - t <= dt { target } else { t + h };
                }
                out.push(sample(target, &y, n));
            }
        }
        Integrator::Adaptive { atol, rtol } => {
            let mut dp = Dopri::new(n + 1, atol, rtol);
            for &target in times {
                t = dp.advance(&sys, &mut y, t, target)?;
                out.push(sample(target, &y, n));
            }
        }
    }
    Ok(out)
}

struct Rk4Work<T> {
    k: [Vec<Complex<T>>; 4],
    tmp: Vec<Complex<T>>,
}

impl<T: Real> Rk4Work<T> {
    fn new(len: usize) -> Self {
        let z = vec![Complex::new(T::zero(), T::zero()); len];
        Self { k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }
}

fn rk4_step<T: Real>(sys: &System<T>, y: &mut [Complex<T>], h: T, w: &mut Rk4Work<T>) {
    let half = h * lit(0.5);
    sys.rhs(y, &mut w.k[0]);
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k[0][i] * half;
    }
    sys.rhs(&w.tmp, &mut w.k[1]);
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k[1][i] * half;
    }
    sys.rhs(&w.tmp, &mut w.k[2]);
    for i in 0..y.len() {
        w.tmp[i] = y[i] + w.k[2][i] * h;
    }
    sys.rhs(&w.tmp, &mut w.k[3]);
    let sixth = h / lit(6.0);
    for i in 0..y.len() {
        y[i] = y[i] + (w.k[0][i] + (w.k[1][i] + w.k[2][i]) * lit::<T>(2.0) + w.k[3][i]) * sixth;
    }
}

// Dormand-Prince 5(4) tableau (autonomous system, nodes not needed).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri<T> {
    k: Vec<Vec<Complex<T>>>,
    tmp: Vec<Complex<T>>,
    atol: T,
    rtol: T,
    h: Option<T>,
    err_prev: T,
}

impl<T: Real> Dopri<T> {
    fn new(len: usize, atol: T, rtol: T) -> Self {
        let z = vec![Complex::new(T::zero(), T::zero()); len];
        Self { k: vec![z.clone(); 7], tmp: z, atol, rtol, h: None, err_prev: lit(1e-4) }
    }

    fn initial_step(&self, sys: &System<T>, y: &[Complex<T>]) -> T {
        let mut f = vec![Complex::new(T::zero(), T::zero()); y.len()];
        sys.rhs(y, &mut f);
        let fmax = f.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let tol = self.atol.max(self.rtol);
        if fmax.is_zero() {
            T::one()
        } else {
            lit::<T>(0.01) * tol.powf(lit(0.2)) / fmax
        }
    }

    fn advance(&mut self, sys: &System<T>, y: &mut [Complex<T>], mut t: T, target: T) -> Result<T> {
        if t >= target {
            return Ok(t);
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(sys, y),
        };
        let len = y.len();
        sys.rhs(y, &mut self.k[0]);
        loop {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            for s in 1..7 {
                for i in 0..len {
                    let mut acc = y[i];
                    for j in 0..s {
                        if A[s][j] != 0.0 {
                            acc = acc + self.k[j][i] * (step * lit::<T>(A[s][j]));
                        }
                    }
                    self.tmp[i] = acc;
                }
                sys.rhs(&self.tmp, &mut self.k[s]);
            }
            // tmp holds the fifth-order solution (stage 7 argument, FSAL).
            let mut err = T::zero();
            for i in 0..len {
                let mut e = Complex::new(T::zero(), T::zero());
                for s in 0..7 {
                    if E[s] != 0.0 {
                        e = e + self.k[s][i] * lit::<T>(E[s]);
                    }
                }
                let scale = self.atol + self.rtol * y[i].norm().max(self.tmp[i].norm());
                err = err.max((e * step).norm() / scale);
            }
            if err <= T::one() {
                t = if last { target } else { t + step };
                y.copy_from_slice(&self.tmp);
                self.k.swap(0, 6);
                let fac = if err.is_zero() {
                    lit(5.0)
                } else {
                    lit::<T>(0.9) * err.powf(lit(-0.7 / 5.0)) * self.err_prev.powf(lit(0.4 / 5.0))
                };
                let fac = fac.max(lit(0.2)).min(lit(5.0));
                self.err_prev = err.max(lit(1e-4));
                if !last {
                    h = step * fac;
                }
                if last {
                    self.h = Some(h);
                    return Ok(t);
                }
            } else {
                let fac = (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2));
                h = step * fac;
            }
            if h <= T::epsilon() * t.abs().max(T::one()) {
                return Err(Error::StepSizeUnderflow {
                    t: t.to_f64().unwrap_or(f64::NAN),
                    h: h.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
}

/// Deviation between the two-level reduction and the full evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionReport<T> {
    pub max_dev_p: T,
    pub max_dev_f0: T,
    pub max_conservation_residual: T,
    pub samples: usize,
}

/// Compare `P(t)` and `F0(t)` of the reduced model against [`evolve_full`].
pub fn reduction_check<T: Real>(p: &ModelParams<T>, times: &[T], integrator: Integrator<T>) -> Result<ReductionReport<T>> {
    let full = evolve_full(p, times, integrator)?;
    let prop = Propagator::new(p);
    let mut report = ReductionReport {
        max_dev_p: T::zero(),
        max_dev_f0: T::zero(),
        max_conservation_residual: T::zero(),
        samples: full.len(),
    };
    for s in &full {
        report.max_dev_p = report.max_dev_p.max((prop.no_click(s.t) - s.p_full).abs());
        report.max_dev_f0 = report.max_dev_f0.max((prop.target_occupation(s.t) - s.f0_full).abs());
        report.max_conservation_residual = report.max_conservation_residual.max(s.conservation_residual);
    }
    Ok(report)
}

/// First-click times of independent trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult<T> {
    /// Click time of trajectory `i` (seed `base_seed + i`); infinite if none.
    pub click_times: Vec<T>,
    pub base_seed: u64,
}

impl<T: Real> MonteCarloResult<T> {
    /// Fraction of trajectories with a click at or before `t`.
    pub fn empirical_f1(&self, t: T) -> T {
        let hits = self.click_times.iter().filter(|&&c| c <= t).count();
        count::<T>(hits) / count::<T>(self.click_times.len().max(1))
    }

    /// Binomial standard error of the empirical click probability `f`.
    pub fn standard_error(&self, f: T) -> T {
        (f * (T::one() - f) / count::<T>(self.click_times.len().max(1))).sqrt()
    }

    /// Counts in `bins` equal bins on `[0, t_max)`; clicks beyond are dropped.
    pub fn histogram(&self, bins: usize, t_max: T) -> Vec<u64> {
        let mut h = vec![0u64; bins];
        if bins == 0 || !(t_max > T::zero()) {
            return h;
        }
        for &c in &self.click_times {
            if c >= T::zero() && c < t_max {
                let k = ((c / t_max) * count::<T>(bins)).floor().to_usize().unwrap_or(bins).min(bins - 1);
                h[k] += 1;
            }
        }
        h
    }

    /// Kolmogorov-Smirnov distance between the sample and the CDF `cdf`.
    pub fn ks_statistic<F: Fn(T) -> T>(&self, cdf: F) -> T {
        let mut sorted: Vec<T> = self.click_times.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let n = count::<T>(sorted.len());
        let mut d = T::zero();
        for (i, &x) in sorted.iter().enumerate() {
            let f = if x.is_finite() { cdf(x) } else { T::one() };
            let lo = count::<T>(i) / n;
            let hi = count::<T>(i + 1) / n;
            d = d.max(f - lo).max(hi - f);
        }
        d
    }
}

/// Sample `n_traj` first-click times in parallel; results do not depend on the thread count.
pub fn trajectory_monte_carlo<T: Real>(
    p: &ModelParams<T>,
    schedule: Option<&ResetSchedule<T>>,
    n_traj: usize,
    base_seed: u64,
) -> Result<MonteCarloResult<T>> {
    if n_traj == 0 {
        return Err(Error::InvalidParameter("trajectory count must be positive".into()));
    }
    let sampler = ClickSampler::new(p, schedule)?;
    let click_times = (0..n_traj as u64)
        .into_par_iter()
        .map(|i| sampler.sample(base_seed.wrapping_add(i)))
        .collect();
    Ok(MonteCarloResult { click_times, base_seed })
}
