// SPDX-License-Identifier: Apache-2.0

//! Independent oracles for the two-level propagator and spectrum: a
//! scaling-and-squaring matrix exponential and Durand-Kerner roots of the
//! characteristic polynomial built from the raw matrix elements.

use monitored_search::model::{exceptional_point, initial_state, matrix_elements, ModelParams, TwoLevelMatrix};
use monitored_search::spectral::{eigenvalues, Propagator};
use monitored_search::C64;

type M2 = [[C64; 2]; 2];

fn mul(x: &M2, y: &M2) -> M2 {
    let mut z = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            z[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    z
}

/// `exp(-i H t)` by Taylor series on `H t / 2^k` followed by `k` squarings.
fn expm_reference(m: &TwoLevelMatrix<f64>, t: f64) -> M2 {
    let minus_i = C64::new(0.0, -1.0);
    let h = [[m.a, C64::new(m.b, 0.0)], [C64::new(m.b, 0.0), C64::new(m.d, 0.0)]];
    let norm = m.a.norm() + m.d.abs() + 2.0 * m.b.abs();
    let k = ((norm * t).max(1.0).log2().ceil() as i32 + 4).max(0);
    let scale = t / 2f64.powi(k);
    let x: M2 = [
        [h[0][0] * minus_i * scale, h[0][1] * minus_i * scale],
        [h[1][0] * minus_i * scale, h[1][1] * minus_i * scale],
    ];
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut sum = [[one, zero], [zero, one]];
    let mut term = sum;
    for j in 1..30 {
        term = mul(&term, &x);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= j as f64;
            }
        }
        for r in 0..2 {
            for c in 0..2 {
                sum[r][c] += term[r][c];
            }
        }
    }
    for _ in 0..k {
        sum = mul(&sum, &sum);
    }
    sum
}

fn reference_amplitudes(p: &ModelParams<f64>, t: f64) -> [C64; 2] {
    let m = matrix_elements(p);
    let u = expm_reference(&m, t);
    let s = initial_state::<f64>(p.n());
    [u[0][0] * s[0] + u[0][1] * s[1], u[1][0] * s[0] + u[1][1] * s[1]]
}

fn durand_kerner(c1: C64, c0: C64) -> [C64; 2] {
    let f = |z: C64| z * z + c1 * z + c0;
    let scale = c1.norm().max(c0.norm().sqrt()).max(1e-300);
    let mut r = [C64::new(0.4, 0.9) * scale, C64::new(-0.7, 0.3) * scale];
    for _ in 0..500 {
        let r0 = r[0] - f(r[0]) / (r[0] - r[1]);
        let r1 = r[1] - f(r[1]) / (r[1] - r0);
        r = [r0, r1];
    }
    r
}

#[test]
fn propagator_matches_scaling_and_squaring() {
    let cases = [
        (50usize, 0.7 / 50.0, 0.3),
        (200, 1.0 / 200.0, 1.0 / 200f64.sqrt()),
        (1000, 2.0 / 1000.0, 0.01),
        (64, 0.5 / 64.0, 1.5),
    ];
    for &(n, g, k) in &cases {
        let p = ModelParams::new(n, g, k).unwrap();
        let prop = Propagator::new(&p);
        for i in 0..40 {
            let t = i as f64 * 2.0 * (n as f64).sqrt() / 39.0;
            let got = prop.amplitudes(t);
            let want = reference_amplitudes(&p, t);
            for j in 0..2 {
                assert!((got[j] - want[j]).norm() < 1e-11, "N={n} t={t} j={j}: {} vs {}", got[j], want[j]);
            }
        }
    }
}

#[test]
fn propagator_matches_scaling_and_squaring_at_exact_ep() {
    for &n in &[10usize, 100, 1000] {
        let (g, k) = exceptional_point::<f64>(n).unwrap();
        let p = ModelParams::new(n, g, k).unwrap();
        let prop = Propagator::new(&p);
        for i in 0..40 {
            let t = i as f64 * 4.0 * (n as f64).sqrt() / 39.0;
            let got = prop.amplitudes(t);
            let want = reference_amplitudes(&p, t);
            for j in 0..2 {
                assert!((got[j] - want[j]).norm() < 1e-10, "N={n} t={t}: {} vs {}", got[j], want[j]);
            }
        }
    }
}

#[test]
fn eigenvalues_match_polynomial_roots() {
    let cases = [(30usize, 0.03, 0.2), (500, 0.004, 0.05), (10_000, 1e-4, 0.02), (100, 0.5, 2.0)];
    for &(n, g, k) in &cases {
        let p = ModelParams::new(n, g, k).unwrap();
        let m = matrix_elements(&p);
        let c1 = -(m.a + m.d);
        let c0 = m.a * m.d - m.b * m.b;
        let mut roots = durand_kerner(c1, c0);
        let sd = eigenvalues(&m);
        if (roots[0] - sd.lambda_plus).norm() > (roots[1] - sd.lambda_plus).norm() {
            roots.swap(0, 1);
        }
        let scale = m.a.norm().max(m.d.abs());
        assert!((roots[0] - sd.lambda_plus).norm() < 1e-10 * scale, "{} vs {}", roots[0], sd.lambda_plus);
        assert!((roots[1] - sd.lambda_minus).norm() < 1e-10 * scale, "{} vs {}", roots[1], sd.lambda_minus);
    }
}
