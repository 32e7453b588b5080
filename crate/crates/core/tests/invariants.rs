// SPDX-License-Identifier: Apache-2.0

//! Structural invariants of the no-click dynamics near and away from the
//! exceptional point.

use monitored_search::dynamics::{power_epochs, ClickSampler, ResetSchedule};
use monitored_search::model::{exceptional_point, ModelParams};
use monitored_search::spectral::{slow_fast, ModeLabel, Propagator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `|2 Re[e^{-i(l+ - l-*)t} O_x]|` and its envelope `2|O_x| e^{(Im l+ + Im l-)t}`,
/// both relative to the slow term `O_s e^{2 Im l_s t}`.
fn interference_ratios(prop: &Propagator<f64>, t: f64) -> (f64, f64) {
    let o = prop.overlaps.expect("well conditioned");
    let sd = prop.spectrum;
    let sf = slow_fast(&sd);
    let o_slow = match sf.slow_label {
        ModeLabel::Plus => o.o_plus,
        ModeLabel::Minus => o.o_minus,
    };
    let slow = o_slow * (2.0 * sf.slow.im * t).exp();
    let phase = monitored_search::C64::new(0.0, -1.0) * (sd.lambda_plus - sd.lambda_minus.conj()) * t;
    let cross = 2.0 * (phase.exp() * o.o_cross).re.abs();
    let envelope = 2.0 * o.o_cross.norm() * ((sd.lambda_plus.im + sd.lambda_minus.im) * t).exp();
    (cross / slow, envelope / slow)
}

#[test]
fn interference_envelope_decays_relative_to_slow_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let n = rng.gen_range(10usize..5000);
        let nf = n as f64;
        let p = ModelParams::new(n, 10f64.powf(rng.gen_range(-1.0..1.0)) / nf, 10f64.powf(rng.gen_range(-1.5..1.0)) / nf.sqrt()).unwrap();
        let prop = Propagator::new(&p);
        if prop.overlaps.is_none() || prop.spectrum.near_ep {
            continue;
        }
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let (_, env) = interference_ratios(&prop, i as f64 * 0.1 * nf.sqrt());
            assert!(env <= last * (1.0 + 1e-12), "N={n}: envelope ratio increased");
            last = env;
        }
    }
}

#[test]
fn literal_interference_ratio_is_monotone_without_beating() {
    // gamma = gamma_EP with kappa above kappa_EP: purely imaginary splitting, no beat.
    for &n in &[50usize, 400, 3000] {
        let (g, k_ep) = exceptional_point::<f64>(n).unwrap();
        let p = ModelParams::new(n, g, 1.5 * k_ep).unwrap();
        let prop = Propagator::new(&p);
        assert!(prop.beat_frequency() <= 1e-12 * prop.spectrum.lambda_plus.norm());
        let mut last = f64::INFINITY;
        for i in 0..400 {
            let (ratio, env) = interference_ratios(&prop, i as f64 * 0.05 * (n as f64).sqrt());
            assert!(ratio <= env * (1.0 + 1e-12));
            assert!(ratio <= last * (1.0 + 1e-12));
            last = ratio;
        }
    }
}

#[test]
fn literal_interference_ratio_oscillates_with_beating() {
    let n = 1000;
    let p = ModelParams::new(n, 1.0 / n as f64, 0.5 / (n as f64).sqrt()).unwrap();
    let prop = Propagator::new(&p);
    assert!(prop.beat_frequency() > 0.0);
    let ratios: Vec<f64> = (0..400).map(|i| interference_ratios(&prop, i as f64 * 0.5).0).collect();
    assert!(ratios.windows(2).any(|w| w[1] > w[0]));
}

#[test]
fn reset_survival_is_renewal_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let n = rng.gen_range(10usize..10_000);
        let nf = n as f64;
        let p = ModelParams::new(n, rng.gen_range(0.2..3.0) / nf, rng.gen_range(0.05..3.0) / nf.sqrt()).unwrap();
        let period = rng.gen_range(0.1..3.0) * nf.sqrt();
        let sched = ResetSchedule::new(period).unwrap();
        let sampler = ClickSampler::new(&p, Some(&sched)).unwrap();
        let pt = Propagator::new(&p).no_click(period);
        for m in [1u64, 2, 7, 40, 100] {
            let want = power_epochs(pt, m);
            let got = sampler.survival(m as f64 * period);
            assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-300, "m={m}: {got} vs {want}");
        }
    }
}

#[test]
fn survival_is_continuous_approaching_the_exceptional_point() {
    let n = 400;
    let (g, k) = exceptional_point::<f64>(n).unwrap();
    let at_ep = Propagator::new(&ModelParams::new(n, g, k).unwrap());
    assert!(at_ep.spectrum.near_ep);
    for &t in &[1.0, 20.0, 150.0] {
        let target = at_ep.no_click(t);
        let mut last_err = f64::INFINITY;
        for j in 2..12 {
            let delta = 10f64.powi(-j);
            let near = Propagator::new(&ModelParams::new(n, g * (1.0 + delta), k * (1.0 + 0.5 * delta)).unwrap());
            let err = (near.no_click(t) - target).abs();
            assert!(err <= last_err * 1.01 + 1e-15, "t={t} delta={delta}: {err}");
            last_err = err;
        }
        assert!(last_err < 1e-9);
    }
}
