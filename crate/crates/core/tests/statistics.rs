mod common;

use vrd_core::estimator::{estimate, summarize, Observable, SamplingMode, SamplingPlan};
use vrd_core::metrics::fidelity_to_pure;
use vrd_core::numcore::{pauli, ComplexMatrix, DensityOperator};
use vrd_core::protocols::{coherence_vrd, entanglement_vrd};
use vrd_core::states::{bell, mcs, psi_plus_one, werner_xi, BellLabel};
use vrd_core::tomography::{project_physical, virtual_tomography};

#[test]
fn grand_mean_is_unbiased() {
    let qc = entanglement_vrd(0.4).unwrap();
    let rho = werner_xi(0.4).unwrap();
    let obs = Observable::new("XX", pauli(1).kron(&pauli(1))).unwrap();
    let truth = DensityOperator::new(qc.apply_exact(&rho).unwrap(), vec![2, 2])
        .unwrap()
        .expectation(obs.matrix());
    let means: Vec<f64> = (0..200)
        .map(|seed| {
            let plan = SamplingPlan::new(10_000, 1000 + seed, SamplingMode::ProjectiveSampling).unwrap();
            estimate(&qc, &rho, &obs, &plan).unwrap().mean
        })
        .collect();
    let (grand, grand_se) = summarize(&means);
    assert!((grand - truth).abs() < 5.0 * grand_se, "{grand} vs {truth} (se {grand_se})");
}

#[test]
fn coherence_grand_mean_is_unbiased() {
    let qc = coherence_vrd();
    let rho = DensityOperator::from_pure(&psi_plus_one());
    let obs = Observable::projector("mcs", &mcs(4).unwrap());
    let means: Vec<f64> = (0..200)
        .map(|seed| {
            let plan = SamplingPlan::new(10_000, seed, SamplingMode::ExpectationOracle).unwrap();
            estimate(&qc, &rho, &obs, &plan).unwrap().mean
        })
        .collect();
    let (grand, grand_se) = summarize(&means);
    assert!((grand - 1.0).abs() < 5.0 * grand_se);
}

#[test]
fn identical_plans_give_identical_results() {
    let qc = coherence_vrd();
    let rho = DensityOperator::from_pure(&psi_plus_one());
    let obs = Observable::projector("mcs", &mcs(4).unwrap());
    let plan = SamplingPlan::new(5_000, 77, SamplingMode::ProjectiveSampling).unwrap();
    let a = estimate(&qc, &rho, &obs, &plan).unwrap();
    let b = estimate(&qc, &rho, &obs, &plan).unwrap();
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

#[test]
fn tomography_fidelity_improves_with_shots() {
    let qc = entanglement_vrd(0.6).unwrap();
    let rho = werner_xi(0.6).unwrap();
    let target = bell(BellLabel::PsiMinus);
    let ladder = [1_000u64, 10_000, 100_000];
    let stats: Vec<(f64, f64)> = ladder
        .iter()
        .map(|&shots| {
            let f: Vec<f64> = (0..8)
                .map(|seed| {
                    let r = virtual_tomography(&qc, &rho, shots, seed).unwrap();
                    fidelity_to_pure(&r.physical, &target).unwrap()
                })
                .collect();
            summarize(&f)
        })
        .collect();
    for w in stats.windows(2) {
        let ((lo, lo_se), (hi, hi_se)) = (w[0], w[1]);
        assert!(hi + hi_se.max(lo_se) >= lo, "{stats:?}");
    }
    assert!(stats[2].0 >= 0.99);
}

/// Distance to the nearest point of the Bloch ball, by successively refined
/// grid search over spherical coordinates (radius clamped to [0, 1]).
fn grid_nearest(s: [f64; 3]) -> f64 {
    use std::f64::consts::PI;
    let dist = |r: f64, th: f64, ph: f64| {
        let p = [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()];
        (p.iter().zip(&s).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 2.0).sqrt()
    };
    let mut centre = (0.5, PI / 2.0, PI);
    let mut span = (0.5, PI / 2.0, PI);
    let mut best = f64::INFINITY;
    for _ in 0..10 {
        let n = 24;
        let mut arg = centre;
        for i in 0..=n {
            let r = (centre.0 - span.0 + 2.0 * span.0 * i as f64 / n as f64).clamp(0.0, 1.0);
            for j in 0..=n {
                let th = (centre.1 - span.1 + 2.0 * span.1 * j as f64 / n as f64).clamp(0.0, PI);
                for k in 0..=n {
                    let ph = centre.2 - span.2 + 2.0 * span.2 * k as f64 / n as f64;
                    let d = dist(r, th, ph);
                    if d < best {
                        best = d;
                        arg = (r, th, ph);
                    }
                }
            }
        }
        centre = arg;
        span = (span.0 / 4.0, span.1 / 4.0, span.2 / 4.0);
    }
    best
}

#[test]
fn qubit_projection_matches_grid_oracle() {
    let mut r = common::rng(2024);
    for _ in 0..20 {
        let s: [f64; 3] = std::array::from_fn(|_| rand::Rng::random_range(&mut r, -1.5..1.5));
        let mut m = ComplexMatrix::identity(2);
        for (k, sk) in s.iter().enumerate() {
            m = &m + &pauli(k + 1).scale_real(*sk);
        }
        let m = m.scale_real(0.5);
        let p = project_physical(&m).unwrap();
        let ours = (&m - p.matrix()).frobenius_norm();
        let oracle = grid_nearest(s);
        assert!((ours - oracle).abs() <= 1e-6, "{ours} vs {oracle}");
        assert!((p.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(p.eigen().min_value() >= -1e-12);
    }
}
