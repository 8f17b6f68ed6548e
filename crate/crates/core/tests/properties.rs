use proptest::prelude::*;

use sepscan::estimator::{CurveBin, SeparabilityCurve};
use sepscan::io::{curve_to_csv_string, format_decimal17, read_curve_csv};
use sepscan::measures::{log_density_weight, MeasureSpec, Metric};
use sepscan::qmat::{conjugate_spectrum, eigenvalues_sym, partial_transpose_matrix, Mat4, C64};
use sepscan::sampling::{haar_group_element, SequenceKind, SequenceSource};
use sepscan::separability::{is_absolutely_separable, maximal_concurrence};
use sepscan::{Ensemble, Spectrum};

fn spectrum_from(raw: [f64; 4]) -> Spectrum {
    let total: f64 = raw.iter().sum();
    Spectrum::new(raw.map(|x| x / total)).unwrap()
}

fn arb_raw() -> impl Strategy<Value = [f64; 4]> {
    [0.001f64..1.0, 0.001f64..1.0, 0.001f64..1.0, 0.001f64..1.0]
}

fn arb_matrix() -> impl Strategy<Value = Mat4> {
    prop::array::uniform16((-1.0f64..1.0, -1.0f64..1.0)).prop_map(|v| {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for (k, (re, im)) in v.into_iter().enumerate() {
            m[k / 4][k % 4] = C64::new(re, im);
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn partial_transpose_is_an_involution(m in arb_matrix()) {
        prop_assert_eq!(partial_transpose_matrix(&partial_transpose_matrix(&m)), m);
        let pt = partial_transpose_matrix(&m);
        for i in 0..4 {
            prop_assert_eq!(pt[i][i], m[i][i]);
        }
    }

    #[test]
    fn conjugation_preserves_the_spectrum(raw in arb_raw(), seed in any::<u64>(), complex in any::<bool>()) {
        let s = spectrum_from(raw);
        let ensemble = if complex { Ensemble::Complex } else { Ensemble::Real };
        let mut src = SequenceSource::new(SequenceKind::PseudoRandom, 32, seed).unwrap();
        let rho = conjugate_spectrum(&s, &haar_group_element(&mut src, ensemble).unwrap());
        let ev = eigenvalues_sym(rho.entries()).unwrap();
        for (a, b) in ev.iter().zip(s.values()) {
            prop_assert!((a - b).abs() <= 1e-10, "{:?} vs {:?}", ev, s.values());
        }
    }

    #[test]
    fn density_weight_is_permutation_symmetric(raw in arb_raw(), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let total: f64 = raw.iter().sum();
        let lambda = raw.map(|x| x / total);
        let permuted: Vec<f64> = perm.iter().map(|&i| lambda[i]).collect();
        for metric in [Metric::Hs, Metric::Bures] {
            for ensemble in [Ensemble::Real, Ensemble::Complex] {
                let spec = MeasureSpec::two_qubit(metric, ensemble);
                let a = log_density_weight(&spec, &lambda);
                let b = log_density_weight(&spec, &permuted);
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn maximal_concurrence_is_bounded(raw in arb_raw()) {
        let s = spectrum_from(raw);
        let c = maximal_concurrence(&s);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert_eq!(c == 0.0, is_absolutely_separable(&s));
    }

    #[test]
    fn decimal17_reads_back_exactly(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let text = format_decimal17(x);
        prop_assert!(!text.contains('e') && !text.contains('E'));
        prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn curve_csv_round_trip_is_bit_exact(counts in prop::collection::vec((1u64..100_000, 0.0f64..=1.0), 2..60)) {
        let n = counts.len() + 1;
        let bins: Vec<CurveBin> = counts
            .iter()
            .enumerate()
            .map(|(k, &(trials, frac))| {
                CurveBin::from_counts((k + 1) as f64 / n as f64, trials, (frac * trials as f64).floor() as u64).unwrap()
            })
            .collect();
        let curve = SeparabilityCurve::from_bins(bins).unwrap();
        let text = curve_to_csv_string(&curve);
        prop_assert!(!text.contains('\r'));
        let back = read_curve_csv(text.as_bytes()).unwrap();
        prop_assert_eq!(back.bins.len(), curve.bins.len());
        for (a, b) in curve.bins.iter().zip(&back.bins) {
            prop_assert_eq!(a.c_mid.to_bits(), b.c_mid.to_bits());
            prop_assert_eq!(a.sigma_hat.to_bits(), b.sigma_hat.to_bits());
            prop_assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
            prop_assert_eq!((a.n_trials, a.n_separable), (b.n_trials, b.n_separable));
        }
        prop_assert_eq!(curve_to_csv_string(&back), text);
    }
}
