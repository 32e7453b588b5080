// SPDX-License-Identifier: Apache-2.0

//! Large-N eigenvalues and overlaps against 60-digit reference values.

use monitored_search::model::build_params;
use monitored_search::spectral::{eigenvalues, overlaps};
use monitored_search::model::matrix_elements;

// (N, r_bar, s, [Re l+, Im l+, Re l-, Im l-, O+, O-]) with gamma_bar = kappa_bar = 1.
const REFERENCE: &[(usize, f64, f64, [f64; 6])] = &[
    (1000, 0.1, 0.25, [-0.5002406169793844, -0.00015819621824578634, -1.000946616647888, -0.17766974478564648, 0.9967331711932894, 0.003665198810813164]),
    (1000, 0.0, 0.5, [-0.9726077896963986, -0.015234166232027571, -1.0273922103036013, -0.016388610369656224, 0.6541184221998155, 0.678475156586179]),
    (1000, -2.0, -0.5, [-0.999000998003989, -31.591153761931235, -1000000.000999002, -0.03162283975255793, 1.0000009950099772e-12, 1.000000000002996]),
    (1000, 0.0, -0.5, [-0.998999998001994, -3.159118525834246e-05, -1.0010000019980059, -31.622745010498534, 0.9990029910169201, 0.0010010049990159312]),
    (1000, -0.5, 0.25, [-0.9989684792282455, -0.17763832869785262, -31.623808122455547, -0.0001896123060396672, 1.098815204686645e-06, 0.9999990448332514]),
    (100000, 0.1, 0.25, [-0.31622315111979293, -1.1946330123415347e-07, -1.000004614897045, -0.056234013055733674, 0.9999787455840943, 2.131150215869276e-05]),
    (100000, 0.0, 0.5, [-0.9972613811267018, -0.0015753653402221996, -1.0027386188732983, -0.0015869123199461798, 0.6654457950115098, 0.6678801310131801]),
    (100000, -2.0, -0.5, [-0.999990000099998, -316.22460373917716, -10000000000.00001, -0.0031622776608008253, 1.000000000099995e-20, 1.0]),
    (100000, 0.0, -0.5, [-0.999989999999998, -3.162246037707986e-08, -1.000010000000002, -316.22776598521546, 0.999990000299991, 1.000010000499999e-05]),
    (100000, -0.5, 0.25, [-0.9999899683781791, -0.05623356660426333, -316.22777604845976, -5.6591477157864e-07, 1.0095267993428435e-10, 0.9999999999003284]),
    (10000000, 0.1, 0.25, [-0.1995262065733245, -1.1043110432983356e-10, -1.0000000249235634, -0.017782793989958124, 0.9999998439748209, 1.5603743210300984e-07]),
    (10000000, 0.0, 0.5, [-0.9997261387151616, -0.00015805614798278302, -1.0002738612848383, -0.00015817161803405492, 0.6665449134989825, 0.6667883457602866]),
    (10000000, -2.0, -0.5, [-0.99999990000001, -3162.2773439406133, -100000000000000.0, -0.0003162277660168443, 1.00000000000001e-28, 1.0]),
    (10000000, 0.0, -0.5, [-0.9999999, -3.1622773439406446e-11, -1.0000001, -3162.2776601683477, 0.99999990000003, 1.00000010000005e-07]),
    (10000000, -0.5, 0.25, [-0.9999998999683772, -0.017782792320984602, -3162.2776602684107, -1.7794046262292182e-09, 1.0009490832662276e-14, 0.99999999999999]),
];

fn close(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

#[test]
fn eigenvalues_match_high_precision_reference() {
    for &(n, r_bar, s, want) in REFERENCE {
        let p = build_params(n, 1.0, 1.0, r_bar, s).unwrap();
        let sd = eigenvalues(&matrix_elements(&p));
        let got = [sd.lambda_plus.re, sd.lambda_plus.im, sd.lambda_minus.re, sd.lambda_minus.im];
        for (g, w) in got.iter().zip(want.iter()) {
            assert!(close(*g, *w, 1e-9), "N={n} r_bar={r_bar} s={s}: {g} vs {w}");
        }
    }
}

#[test]
fn overlaps_match_high_precision_reference() {
    for &(n, r_bar, s, want) in REFERENCE {
        let p = build_params(n, 1.0, 1.0, r_bar, s).unwrap();
        let o = overlaps(&matrix_elements(&p), n).unwrap();
        assert!(close(o.o_plus, want[4], 1e-8), "N={n} r_bar={r_bar} s={s}: O+ {} vs {}", o.o_plus, want[4]);
        assert!(close(o.o_minus, want[5], 1e-8), "N={n} r_bar={r_bar} s={s}: O- {} vs {}", o.o_minus, want[5]);
    }
}
