// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tachyon_core::bessel::{bessel_i0, bessel_i1};
use tachyon_core::green::{causality_report, propagate_green, tail_reconstruction};
use tachyon_core::quantum::{
    coherent_displace, evolve_gaussian, observability_report, overlap_vacuum, pairwise_overlap, rld_experiment,
    smeared_variance, vacuum_state, BandQuadrature, Smearing,
};
use tachyon_core::wavepacket::{build_wavepacket, wavepacket_modes, track_group_velocity, track_phase_velocity, truncate, TruncationSpec, WavepacketSpec};
use tachyon_core::{
    build_lattice, classify_modes, default_critical_tolerance, evolve_modes, from_modes, quadratic_energy, to_modes,
    DispersionTable, DoubleDouble, FieldState, LatticeSpec,
};

const M: f64 = 1.0;

type Outcome = (bool, String);

fn disp(lat: &LatticeSpec) -> DispersionTable {
    classify_modes(lat, M, default_critical_tolerance(M)).unwrap()
}

fn evolve_f64(s: &FieldState, lat: &LatticeSpec, d: &DispersionTable, t: f64) -> FieldState {
    from_modes(&evolve_modes(&to_modes(s, lat).unwrap(), d, t).unwrap(), lat).unwrap()
}

fn packet_runs(k0: f64) -> (f64, f64) {
    let lat = build_lattice(8192, 1600.0).unwrap();
    let d = disp(&lat);
    let spec = WavepacketSpec::new(k0, 0.1, -200.0, 1.0);
    // evolve the exact spectrum: a lattice round trip would seed the unstable band with rounding noise
    let m0 = wavepacket_modes::<f64>(&lat, &spec, M).unwrap();
    let at = |t: f64| from_modes(&evolve_modes(&m0, &d, t).unwrap(), &lat).unwrap();
    let group: Vec<_> = [0.0, 15.0, 30.0, 45.0, 60.0].iter().map(|&t| at(t)).collect();
    let (vg, _) = track_group_velocity(&group, &lat, (-300.0, -50.0)).unwrap();
    let phase: Vec<_> = (0..6).map(|i| at(0.2 * i as f64)).collect();
    let (vp, _) = track_phase_velocity(&phase, &lat, spec.x0).unwrap();
    (vg, vp)
}

fn criterion_1() -> Outcome {
    let mut ok = true;
    let mut msg = vec![];
    for (k0, want) in [(2.0, 2.0 / 3f64.sqrt()), (3.0, 3.0 / 8f64.sqrt())] {
        let (vg, _) = packet_runs(k0);
        let rel = (vg / want - 1.0).abs();
        ok &= rel <= 0.01;
        msg.push(format!("k0={k0} v={vg:.6} want {want:.6} rel {rel:.2e}"));
    }
    (ok, msg.join("; "))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut msg = vec![];
    for k0 in [2.0, 3.0] {
        let (vg, vp) = packet_runs(k0);
        let dev = (vg * vp - 1.0).abs();
        ok &= dev <= 0.01;
        msg.push(format!("k0={k0} vp*vg={:.6}", vg * vp));
    }
    (ok, msg.join("; "))
}

/// Sampled causality configurations with the packet at least six envelope
/// widths behind the cut.
fn causality_cases(count: usize, seed: u64) -> Vec<(f64, f64, f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let k0 = rng.gen_range(1.5..3.5);
            let dk = f64::min(0.1, (k0 - M) / 7.0);
            let x0 = -rng.gen_range(6.0..9.0) / dk;
            let eps = rng.gen_range(0.1..0.5);
            let t = if i == 0 { 40.0 } else { rng.gen_range(1.0..40.0) };
            (k0, dk, x0, eps, t)
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let lat = build_lattice(8192, 1024.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut cases = vec![(2.0, 0.1, -80.0, 0.25, 40.0)];
    cases.extend(causality_cases(11, 3));
    for &(k0, dk, x0, eps, t) in &cases {
        let spec = WavepacketSpec::new(k0, dk, x0, 1.0);
        let tr = TruncationSpec::new(0.0, eps).unwrap();
        let s: FieldState<DoubleDouble> = build_wavepacket(&lat, &spec, M).unwrap();
        let st = truncate(&s, &tr, &lat).unwrap();
        let r = causality_report(&s, &st, t, M, &lat, &tr).unwrap();
        let w = r.regime_a_relative().max(r.regime_c_relative());
        worst = worst.max(w);
        ok &= w <= 1e-8;
    }
    (ok, format!("worst residual / peak {worst:.2e} over {} configurations (bound 1e-8)", cases.len()))
}

fn tail_runs(times: &[f64]) -> Vec<tachyon_core::green::TailReport> {
    let lat = build_lattice(8192, 1024.0).unwrap();
    let spec = WavepacketSpec::new(1.5, 0.08, 0.0, 1.0);
    let tr = TruncationSpec::new(0.0, 0.1).unwrap();
    tail_reconstruction::<DoubleDouble>(&spec, &tr, M, &lat, times).unwrap()
}

fn criterion_4() -> Outcome {
    let r = &tail_runs(&[40.0])[0];
    (
        r.envelope_error <= 0.01,
        format!("L2 envelope error {:.3e} at mt=40 over [{:.2}, {:.2}] (bound 1e-2)", r.envelope_error, r.window.0, r.window.1),
    )
}

fn criterion_5() -> Outcome {
    let r = &tail_runs(&[20.0])[0];
    let k_rel = (r.local_wavevector / 1.5 - 1.0).abs();
    (
        r.unstable_fraction > 1.0 - 1e-6 && k_rel <= 0.02,
        format!(
            "unstable fraction 1-{:.2e} at mt=20, local k {:.5} (rel {:.2e})",
            r.normal_fraction, r.local_wavevector, k_rel
        ),
    )
}

fn green_error(n: usize) -> f64 {
    let lat = build_lattice(n, 128.0).unwrap();
    let d = disp(&lat);
    let pulse: Vec<f64> = lat.positions().iter().map(|x| (-x * x / 0.5).exp()).collect();
    let mut worst: f64 = 0.0;
    for (phi0, pi0) in [(vec![0.0; n], pulse.clone()), (pulse.clone(), vec![0.0; n])] {
        let s0 = FieldState::new(0.0, phi0, pi0).unwrap();
        let oracle = evolve_f64(&s0, &lat, &d, 5.0);
        let g = propagate_green(&s0, 5.0, M, &lat).unwrap();
        let e = g.phi.iter().zip(&oracle.phi).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        worst = worst.max(e / oracle.max_abs_phi());
    }
    worst
}

fn criterion_6() -> Outcome {
    let errs: Vec<f64> = [1024, 2048, 4096].iter().map(|&n| green_error(n)).collect();
    let ok = errs[2] <= 1e-4 && errs[1] < errs[0] && errs[2] < errs[1];
    (ok, format!("error / peak N=1024,2048,4096: {:.2e}, {:.2e}, {:.2e}", errs[0], errs[1], errs[2]))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut scaling: f64 = 0.0;
    for (n, l) in [(16usize, 12.0), (32, 20.0), (64, 8.0 * PI), (64, 45.0)] {
        let lat = build_lattice(n, l).unwrap();
        let d = disp(&lat);
        let vac = vacuum_state(&lat, &d).unwrap();
        let g = common::random_symmetric(&lat, &mut rng, 0.4);
        let e = overlap_vacuum(&coherent_displace(&vac, &g).unwrap(), &d).unwrap().exponent;
        worst = worst.max((e - common::brute_force_exponent(&vac, &coherent_displace(&vac, &g).unwrap())).abs());
        for a in [0.01, 7.0, 1000.0] {
            let ga: Vec<Complex<f64>> = g.iter().map(|c| c * a).collect();
            let ea = overlap_vacuum(&coherent_displace(&vac, &ga).unwrap(), &d).unwrap().exponent;
            scaling = scaling.max((ea / (a * a * e) - 1.0).abs());
        }
    }
    (
        worst <= 1e-12 && scaling <= 1e-12,
        format!("max |exponent - oracle| {worst:.2e}; amplitude^2 scaling deviation {scaling:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let lat = build_lattice(8192, 1024.0).unwrap();
    let d = disp(&lat);
    let vac = vacuum_state(&lat, &d).unwrap();
    let f = Smearing::Band { k_cut: M }.sample(&lat);
    let var = |t: f64| smeared_variance(&vac, &d, &f, t, BandQuadrature::EdgeCorrected).unwrap().unstable;
    let v0 = var(0.0);
    let mut worst: f64 = 0.0;
    for i in 0..=40 {
        let t = 0.25 * i as f64;
        worst = worst.max((var(t) / v0 / bessel_i0(2.0 * M * t).unwrap() - 1.0).abs());
    }
    let asym = var(20.0) / v0 / ((40.0f64).exp() / (4.0 * PI * 20.0).sqrt());
    (
        worst <= 1e-6 && (asym - 1.0).abs() <= 0.01,
        format!("max |ratio / I0(2mT) - 1| {worst:.2e} on [0, 10]; asymptote ratio at mT=20 {asym:.5}; prefactor <phi^2>_U(0) = {v0:.10}"),
    )
}

fn criterion_9() -> Outcome {
    let lat = build_lattice(8192, 1024.0).unwrap();
    let times: Vec<f64> = (1..=10).map(|i| 5.0 * i as f64).collect();
    let mut drift: f64 = 0.0;
    for (x0, amp) in [(-12.5, 1.0), (0.0, 0.5), (-8.0, 2.0)] {
        let spec = WavepacketSpec::new(2.0, 0.1, x0, amp);
        let r = rld_experiment(&lat, &spec, &TruncationSpec::new(0.0, 0.25).unwrap(), M, &times).unwrap();
        drift = drift.max(r.max_overlap_drift);
    }
    let small = build_lattice(64, 30.0).unwrap();
    let d = disp(&small);
    let vac = vacuum_state(&small, &d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let a = vac
            .displace(&common::random_symmetric(&small, &mut rng, 0.3), &common::random_symmetric(&small, &mut rng, 0.3))
            .unwrap();
        let b = coherent_displace(&vac, &common::random_symmetric(&small, &mut rng, 0.3)).unwrap();
        let o0 = pairwise_overlap(&a, &b).unwrap().overlap();
        let t = rng.gen_range(0.0..50.0);
        let ot = pairwise_overlap(&evolve_gaussian(&a, &d, t).unwrap(), &evolve_gaussian(&b, &d, t).unwrap())
            .unwrap()
            .overlap();
        drift = drift.max((ot - o0).abs());
    }
    (drift <= 1e-10, format!("max |overlap(t) - overlap(0)| {drift:.2e} over mT in [0, 50]"))
}

fn criterion_10() -> Outcome {
    let lat = build_lattice(8192, 1024.0).unwrap();
    let mut audited = 0;
    let mut ok = true;
    for (k0, dk) in [(1.5, 0.08), (2.0, 0.1), (3.0, 0.1)] {
        for eps in [0.1, 0.25, 1.0] {
            for x0 in [-12.5, -5.0, 0.0] {
                let spec = WavepacketSpec::new(k0, dk, x0, 1.0);
                let r = rld_experiment(&lat, &spec, &TruncationSpec::new(0.0, eps).unwrap(), M, &[]).unwrap();
                ok &= r.audit_holds();
                audited += 1;
            }
        }
    }
    let mut last = [0.0f64; 3];
    let mut monotone = true;
    for amp in [2.0, 1.0, 0.5, 0.1, 0.01, 0.0] {
        let spec = WavepacketSpec::new(2.0, 0.1, -5.0, amp);
        let r = rld_experiment(&lat, &spec, &TruncationSpec::new(0.0, 0.25).unwrap(), M, &[]).unwrap();
        ok &= r.audit_holds();
        let row = r.rows[0];
        let now = [row.rl.overlap(), row.rd.overlap(), row.ld.overlap()];
        monotone &= now.iter().zip(&last).all(|(a, b)| a >= b);
        last = now;
    }
    let limit = last.iter().all(|&o| o == 1.0);
    (
        ok && monotone && limit,
        format!("Cauchy-Schwarz holds on {audited}+6 configurations; overlaps monotone in amplitude, {last:?} at zero tail"),
    )
}

fn criterion_11() -> Outcome {
    let lat = build_lattice(8192, 1024.0).unwrap();
    let spec = WavepacketSpec::new(1.5, 0.08, 0.0, 1.0);
    let tr = TruncationSpec::new(0.0, 0.1).unwrap();
    let smear = Smearing::Gaussian { width: 0.2 };
    let report = |t: f64, a: f64| observability_report(&lat, &spec.with_amplitude(a), &tr, M, t, &smear, Default::default()).unwrap();
    let base = report(20.0, 1.0);
    // sweep amplitude across the crossing
    let mut below = 0.0;
    let mut above = f64::INFINITY;
    for p in 0..16 {
        let a = 10f64.powi(p);
        let r = ratio_at(&base, a);
        if r < 1.0 {
            below = a;
        } else if above.is_infinite() {
            above = a;
        }
    }
    let crossing_ok = below < base.crossing_amplitude && base.crossing_amplitude <= above && base.crossing_exponent > 100.0;
    let mut scaled = vec![];
    let mut prev = 0.0;
    let mut monotone = true;
    for t in [10.0, 15.0, 20.0, 25.0, 30.0] {
        let r = report(t, 1.0);
        monotone &= r.crossing_amplitude > prev;
        prev = r.crossing_amplitude;
        scaled.push(r.crossing_amplitude / ((M * t).exp() / (2.0 * M * t).powf(0.25)));
    }
    let spread = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    (
        crossing_ok && monotone && spread <= 2.0,
        format!(
            "crossing at A={:.3e} with exponent {:.3e}; A*/(e^mT/(2mT)^0.25) spread {spread:.4} over mT in [10, 30]",
            base.crossing_amplitude, base.crossing_exponent
        ),
    )
}

fn ratio_at(base: &tachyon_core::quantum::ObservabilityReport, a: f64) -> f64 {
    base.signal * a / base.amplitude / base.fluctuation
}

fn dd_series(order: u32, z: f64) -> f64 {
    let q = DoubleDouble::new(0.25 * z * z);
    let mut term = if order == 0 { DoubleDouble::ONE } else { DoubleDouble::new(0.5 * z) };
    let mut sum = term;
    for k in 1..2000u32 {
        term = term * q / DoubleDouble::new((k * (k + order)) as f64);
        sum = sum + term;
        if term.hi() < 1e-33 * sum.hi() {
            break;
        }
    }
    sum.hi()
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let lat = build_lattice(8192, 1024.0).unwrap();
    let d = disp(&lat);
    let n = lat.num_points();
    let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let pi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = FieldState::new(0.0, phi, pi).unwrap();
    let back = from_modes(&to_modes(&s, &lat).unwrap(), &lat).unwrap();
    let round = s.phi.iter().zip(&back.phi).chain(s.pi.iter().zip(&back.pi)).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));

    let spec = WavepacketSpec::new(2.0, 0.1, -80.0, 1.0);
    let pm = wavepacket_modes::<f64>(&lat, &spec, M).unwrap();
    let e0 = quadratic_energy(&from_modes(&pm, &lat).unwrap(), &lat, M).unwrap();
    let e1 = quadratic_energy(&from_modes(&evolve_modes(&pm, &d, 60.0).unwrap(), &lat).unwrap(), &lat, M).unwrap();
    let energy = ((e1 - e0) / e0).abs();

    let m0 = to_modes(&s, &lat).unwrap();
    let once = evolve_modes(&m0, &d, 7.5).unwrap();
    let twice = evolve_modes(&evolve_modes(&m0, &d, 3.0).unwrap(), &d, 4.5).unwrap();
    let scale = once.phi_k.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let group = once.phi_k.iter().zip(&twice.phi_k).fold(0.0f64, |a, (x, y)| a.max((x - y).norm())) / scale;

    let vac = evolve_gaussian(&vacuum_state(&lat, &d).unwrap(), &d, 50.0).unwrap();
    let floor = vac.min_uncertainty_product();

    let mut bessel: f64 = 0.0;
    for i in 0..=140 {
        let z = if i == 0 { 1e-6 } else { 5.0 * i as f64 - 1.0 };
        bessel = bessel.max((bessel_i0(z).unwrap() / dd_series(0, z) - 1.0).abs());
        bessel = bessel.max((bessel_i1(z).unwrap() / dd_series(1, z) - 1.0).abs());
    }
    (
        round <= 1e-12 && energy <= 1e-10 && group <= 1e-10 && floor >= 0.25 - 1e-10 && bessel <= 1e-14,
        format!(
            "round trip {round:.1e}, energy drift {energy:.1e}, group {group:.1e}, uncertainty floor {floor:.15}, Bessel {bessel:.1e}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("group velocity", criterion_1),
        ("phase-group duality", criterion_2),
        ("causality", criterion_3),
        ("tail reconstruction", criterion_4),
        ("unstable-mode dominance", criterion_5),
        ("Green-function oracle", criterion_6),
        ("vacuum overlap", criterion_7),
        ("fluctuation growth", criterion_8),
        ("unitarity of overlaps", criterion_9),
        ("R/L/D uncertainty audit", criterion_10),
        ("observability boundary", criterion_11),
        ("numerical substrate", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
