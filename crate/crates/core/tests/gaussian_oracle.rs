// Real-space brute force for Gaussian states on small lattices.

mod common;

use num_complex::Complex;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use tachyon_core::quantum::{
    coherent_displace, evolve_gaussian, overlap_vacuum, pairwise_overlap, smeared_variance, vacuum_state,
    BandQuadrature,
};
use common::{brute_force_exponent, random_symmetric};
use tachyon_core::{
    build_lattice, classify_modes, default_critical_tolerance, evolve_modes, DispersionTable, LatticeSpec,
};

fn setup(n: usize, l: f64, m: f64) -> (LatticeSpec, DispersionTable) {
    let lat = build_lattice(n, l).unwrap();
    let d = classify_modes(&lat, m, default_critical_tolerance(m)).unwrap();
    (lat, d)
}

#[test]
fn pairwise_exponent_matches_real_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // L = 8 pi puts k = 1 on a node, so all three mode classes appear
    for &(n, l, t) in &[(32usize, 20.0, 0.0), (32, 20.0, 3.0), (64, 8.0 * PI, 2.5), (16, 12.0, -1.5)] {
        let (lat, d) = setup(n, l, 1.0);
        let vac = vacuum_state(&lat, &d).unwrap();
        let a = vac
            .displace(&random_symmetric(&lat, &mut rng, 0.5), &random_symmetric(&lat, &mut rng, 0.5))
            .unwrap();
        let b = vac
            .displace(&random_symmetric(&lat, &mut rng, 0.5), &random_symmetric(&lat, &mut rng, 0.5))
            .unwrap();
        let (a, b) = (evolve_gaussian(&a, &d, t).unwrap(), evolve_gaussian(&b, &d, t).unwrap());
        let fast = pairwise_overlap(&a, &b).unwrap().exponent;
        let slow = brute_force_exponent(&a, &b);
        assert!((fast - slow).abs() < 1e-12 * fast.max(1.0) * (1.0 + t.abs()).powi(2), "N={n} t={t}: {fast} vs {slow}");
    }
}

#[test]
fn vacuum_overlap_matches_real_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (lat, d) = setup(32, 20.0, 1.0);
    let vac = vacuum_state(&lat, &d).unwrap();
    let s = coherent_displace(&vac, &random_symmetric(&lat, &mut rng, 0.3)).unwrap();
    let fast = overlap_vacuum(&s, &d).unwrap().exponent;
    assert!((fast - brute_force_exponent(&vac, &s)).abs() < 1e-12);
    // determinant term vanishes for identical pure covariances
    assert!(brute_force_exponent(&vac, &vac).abs() < 1e-12);
}

#[test]
fn means_follow_classical_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (lat, d) = setup(64, 30.0, 1.0);
    let vac = vacuum_state(&lat, &d).unwrap();
    let s = vac
        .displace(&random_symmetric(&lat, &mut rng, 1.0), &random_symmetric(&lat, &mut rng, 1.0))
        .unwrap();
    for &t in &[0.7, 5.0, 25.0] {
        let q = evolve_gaussian(&s, &d, t).unwrap().mean_modes();
        let c = evolve_modes(&s.mean_modes(), &d, t).unwrap();
        let scale = c.phi_k.iter().chain(&c.pi_k).fold(0.0f64, |a, z| a.max(z.norm()));
        for i in 0..lat.num_points() {
            assert!((q.phi_k[i] - c.phi_k[i]).norm() <= 1e-12 * scale);
            assert!((q.pi_k[i] - c.pi_k[i]).norm() <= 1e-12 * scale);
        }
    }
}

#[test]
fn vacuum_exponent_scales_with_amplitude_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (lat, d) = setup(64, 40.0, 1.0);
    let vac = vacuum_state(&lat, &d).unwrap();
    let g = random_symmetric(&lat, &mut rng, 1.0);
    let e1 = overlap_vacuum(&coherent_displace(&vac, &g).unwrap(), &d).unwrap().exponent;
    for a in [0.1, 3.0, 40.0] {
        let ga: Vec<_> = g.iter().map(|c| c * a).collect();
        let ea = overlap_vacuum(&coherent_displace(&vac, &ga).unwrap(), &d).unwrap().exponent;
        assert!((ea / (a * a * e1) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn critical_regulator_only_moves_critical_terms() {
    let (lat, d) = setup(64, 8.0 * PI, 1.0);
    let crit = (0..64).find(|&i| d.class(i) == tachyon_core::ModeClass::Critical).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut g = random_symmetric(&lat, &mut rng, 1.0);
    let base = {
        let vac = vacuum_state(&lat, &d).unwrap();
        overlap_vacuum(&coherent_displace(&vac, &g).unwrap(), &d).unwrap()
    };
    let d2 = d.clone().with_critical_frequency(0.25);
    let vac2 = vacuum_state(&lat, &d2).unwrap();
    let moved = overlap_vacuum(&coherent_displace(&vac2, &g).unwrap(), &d2).unwrap();
    assert_eq!(moved.normal_exponent, base.normal_exponent);
    assert!((moved.unstable_exponent - base.unstable_exponent).abs() > 1e-6);
    // with the critical displacement removed the regulator no longer matters
    g[crit] = Complex::new(0.0, 0.0);
    g[lat.conjugate_slot(crit)] = Complex::new(0.0, 0.0);
    let vac = vacuum_state(&lat, &d).unwrap();
    let a = overlap_vacuum(&coherent_displace(&vac, &g).unwrap(), &d).unwrap();
    let b = overlap_vacuum(&coherent_displace(&vac2, &g).unwrap(), &d2).unwrap();
    assert!((a.exponent - b.exponent).abs() < 1e-14 * a.exponent);
}

#[test]
fn edge_corrected_band_tracks_bessel_growth() {
    let (lat, d) = setup(4096, 1024.0, 1.0);
    let vac = vacuum_state(&lat, &d).unwrap();
    let f: Vec<f64> = lat.wavevectors().iter().map(|k| if k.abs() <= 1.0 { 1.0 } else { 0.0 }).collect();
    let v0 = smeared_variance(&vac, &d, &f, 0.0, BandQuadrature::EdgeCorrected).unwrap().unstable;
    let riemann0 = smeared_variance(&vac, &d, &f, 0.0, BandQuadrature::Riemann).unwrap().unstable;
    // continuum value (1 / 2 pi) int dk / (2 kappa) = 1/4 for f_hat = 1 on |k| <= m
    assert!((v0 - 0.25).abs() < 1e-8, "{v0}");
    assert!((riemann0 - 0.25).abs() > 1e-3, "riemann {riemann0}");
    for t in [1.0, 4.0, 8.0] {
        let vt = smeared_variance(&vac, &d, &f, t, BandQuadrature::EdgeCorrected).unwrap().unstable;
        let i0 = tachyon_core::bessel::bessel_i0(2.0 * t).unwrap();
        assert!((vt / v0 / i0 - 1.0).abs() < 1e-6, "t={t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn overlaps_are_time_invariant(seed in 0u64..1000, t in -6.0f64..30.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lat, d) = setup(64, 30.0, 1.0);
        let vac = vacuum_state(&lat, &d).unwrap();
        let a = vac.displace(&random_symmetric(&lat, &mut rng, 0.2), &random_symmetric(&lat, &mut rng, 0.2)).unwrap();
        let b = coherent_displace(&vac, &random_symmetric(&lat, &mut rng, 0.2)).unwrap();
        let before = pairwise_overlap(&a, &b).unwrap().overlap();
        let after = pairwise_overlap(&evolve_gaussian(&a, &d, t).unwrap(), &evolve_gaussian(&b, &d, t).unwrap()).unwrap().overlap();
        prop_assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn uncertainty_bound_survives_evolution(mt in 0.0f64..50.0, l in 10.0f64..60.0) {
        let (lat, d) = setup(64, l, 1.0);
        let vac = evolve_gaussian(&vacuum_state(&lat, &d).unwrap(), &d, mt).unwrap();
        for m in vac.modes() {
            prop_assert!(m.uncertainty_product() >= 0.25 * (1.0 - 1e-10));
        }
    }
}
