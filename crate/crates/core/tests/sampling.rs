use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sepscan::qmat::{mul, Mat4, C64};
use sepscan::sampling::{
    dirichlet_simplex, haar_group_element, simplex_point, spectrum_with_concurrence, FixedCSlice, Proposal,
    SequenceKind, SequenceSource, Sobol,
};
use sepscan::separability::maximal_concurrence;
use sepscan::Ensemble;

const REFERENCE: &str = include_str!("data/sobol_reference.txt");

/// Sample mean and standard error of the mean.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn assert_within_3se(label: &str, a: &[f64], b: &[f64]) {
    let (ma, sa) = mean_se(a);
    let (mb, sb) = mean_se(b);
    let combined = (sa * sa + sb * sb).sqrt();
    assert!((ma - mb).abs() <= 3.0 * combined, "{label}: {ma} vs {mb}, combined se {combined}");
}

#[test]
fn sobol_matches_reference_points() {
    let sobol = Sobol::new(64).unwrap();
    let rows: Vec<Vec<f64>> = REFERENCE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 128);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 64);
        let point = sobol.point(i as u64);
        for (d, (&expected, &got)) in row.iter().zip(&point).enumerate() {
            assert_eq!(expected, got, "point {i}, dimension {d}");
        }
    }
}

#[test]
fn unshifted_source_walks_the_reference_sequence() {
    let sobol = Sobol::new(8).unwrap();
    let mut src = SequenceSource::new(SequenceKind::LowDiscrepancy, 8, 0).unwrap();
    for i in 1..50 {
        assert_eq!(src.next_point(), sobol.point(i));
    }
}

#[test]
fn sources_are_reproducible_and_counter_addressable() {
    for kind in [SequenceKind::LowDiscrepancy, SequenceKind::PseudoRandom] {
        let mut a = SequenceSource::new(kind, 32, 77).unwrap();
        let first: Vec<Vec<f64>> = (0..20).map(|_| a.next_point()).collect();
        let mut b = SequenceSource::new(kind, 32, 77).unwrap();
        b.set_counter(11);
        assert_eq!(b.next_point(), first[10]);
        let mut c = SequenceSource::new(kind, 32, 78).unwrap();
        assert_ne!(c.next_point(), first[0]);

        let mut g1 = SequenceSource::new(kind, 32, 5).unwrap();
        let mut g2 = SequenceSource::new(kind, 32, 5).unwrap();
        for e in [Ensemble::Real, Ensemble::Complex] {
            assert_eq!(haar_group_element(&mut g1, e).unwrap(), haar_group_element(&mut g2, e).unwrap());
        }
    }
}

fn overlap(u: &Mat4, v: &[f64; 4]) -> f64 {
    (0..4).map(|j| u[0][j] * v[j]).sum::<C64>().norm_sqr()
}

const PROBE: [f64; 4] = [0.5, 0.5, 0.5, 0.5];

#[test]
fn haar_overlap_moments() {
    // |<e1, U v>|^2 is Beta(1, 3) for U(4) and Beta(1/2, 3/2) for SO(4).
    for (ensemble, second) in [(Ensemble::Complex, 0.1), (Ensemble::Real, 0.125)] {
        for kind in [SequenceKind::LowDiscrepancy, SequenceKind::PseudoRandom] {
            let mut src = SequenceSource::new(kind, 32, 2024).unwrap();
            let xs: Vec<f64> =
                (0..10_000).map(|_| overlap(haar_group_element(&mut src, ensemble).unwrap().matrix(), &PROBE)).collect();
            let (m, se) = mean_se(&xs);
            assert!((m - 0.25).abs() <= 0.02, "{ensemble} {kind:?}: mean {m}");
            assert!((m - 0.25).abs() <= 3.0 * se + 1e-3, "{ensemble} {kind:?}: mean {m} se {se}");
            let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
            let (m2, se2) = mean_se(&sq);
            assert!((m2 - second).abs() <= 3.0 * se2 + 1e-3, "{ensemble} {kind:?}: second moment {m2}");
        }
    }
}

#[test]
fn haar_left_invariance() {
    for ensemble in [Ensemble::Real, Ensemble::Complex] {
        let mut fixed = SequenceSource::new(SequenceKind::PseudoRandom, 32, 9).unwrap();
        let v = *haar_group_element(&mut fixed, ensemble).unwrap().matrix();
        let mut a = SequenceSource::new(SequenceKind::LowDiscrepancy, 32, 31).unwrap();
        let mut b = SequenceSource::new(SequenceKind::LowDiscrepancy, 32, 32).unwrap();
        let plain: Vec<f64> =
            (0..10_000).map(|_| overlap(haar_group_element(&mut a, ensemble).unwrap().matrix(), &PROBE)).collect();
        let moved: Vec<f64> = (0..10_000)
            .map(|_| overlap(&mul(&v, haar_group_element(&mut b, ensemble).unwrap().matrix()), &PROBE))
            .collect();
        assert_within_3se(&format!("{ensemble} first moment"), &plain, &moved);
        let sq = |xs: &[f64]| xs.iter().map(|x| x * x).collect::<Vec<_>>();
        assert_within_3se(&format!("{ensemble} second moment"), &sq(&plain), &sq(&moved));
    }
}

/// Independent Dirichlet(1,1,1,1) draw: spacings of sorted uniforms.
fn spacing_dirichlet(rng: &mut ChaCha20Rng) -> [f64; 4] {
    let mut cuts = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    [cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], 1.0 - cuts[2]]
}

#[test]
fn uniform_simplex_matches_brute_force_dirichlet() {
    let n = 20_000;
    let mut src = SequenceSource::new(SequenceKind::PseudoRandom, 8, 404).unwrap();
    let ours: Vec<Vec<f64>> = (0..n).map(|_| simplex_point(&mut src, 4, Proposal::Uniform).unwrap().lambda).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(405);
    let brute: Vec<[f64; 4]> = (0..n).map(|_| spacing_dirichlet(&mut rng)).collect();
    for i in 0..4 {
        let a: Vec<f64> = ours.iter().map(|l| l[i]).collect();
        let b: Vec<f64> = brute.iter().map(|l| l[i]).collect();
        assert_within_3se(&format!("E[l{i}]"), &a, &b);
        for j in i..4 {
            let a: Vec<f64> = ours.iter().map(|l| l[i] * l[j]).collect();
            let b: Vec<f64> = brute.iter().map(|l| l[i] * l[j]).collect();
            assert_within_3se(&format!("E[l{i} l{j}]"), &a, &b);
        }
    }
}

#[test]
fn sorted_uniform_spectrum_has_expected_largest_eigenvalue() {
    // E[max] of Dirichlet(1,1,1,1) is (1 + 1/2 + 1/3 + 1/4) / 4.
    let mut src = SequenceSource::new(SequenceKind::LowDiscrepancy, 8, 12).unwrap();
    let maxima: Vec<f64> =
        (0..20_000).map(|_| dirichlet_simplex(&mut src, Proposal::Uniform).unwrap().0.values()[0]).collect();
    let (m, se) = mean_se(&maxima);
    let expected = (1.0 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0;
    assert!((m - expected).abs() <= 3.0 * se + 1e-3, "mean max {m}, expected {expected}");
}

#[test]
fn bures_adapted_simplex_moments() {
    // Dirichlet(1/2, ..., 1/2) on four coordinates: mean 1/4, E[l^2] = 1/8.
    let mut src = SequenceSource::new(SequenceKind::PseudoRandom, 8, 8).unwrap();
    let draws: Vec<Vec<f64>> =
        (0..20_000).map(|_| simplex_point(&mut src, 4, Proposal::BuresAdapted).unwrap().lambda).collect();
    for i in 0..4 {
        let xs: Vec<f64> = draws.iter().map(|l| l[i]).collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 0.25).abs() <= 3.0 * se, "coordinate {i} mean {m}");
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (m2, se2) = mean_se(&sq);
        assert!((m2 - 0.125).abs() <= 3.0 * se2, "coordinate {i} second moment {m2}");
    }
    assert!(draws.iter().flatten().all(|&x| x > 0.0));
}

#[test]
fn fixed_c_coverage() {
    let mut src = SequenceSource::new(SequenceKind::PseudoRandom, 2, 3).unwrap();
    for c in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let slice = FixedCSlice::new(c, 100_000).unwrap();
        for _ in 0..500 {
            let s = spectrum_with_concurrence(&slice, &mut src).unwrap();
            assert!((maximal_concurrence(&s) - c).abs() <= 1e-10);
        }
    }
    let slice = FixedCSlice::new(0.999, 100_000).unwrap();
    for _ in 0..100 {
        assert!(spectrum_with_concurrence(&slice, &mut src).unwrap().values()[0] >= 0.999);
    }
}
