use num_complex::Complex;
use tachyon_core::quantum::{coherent_displace, overlap_vacuum, vacuum_state, GaussianFieldState};
use tachyon_core::wavepacket::{build_wavepacket, truncate, TruncationSpec, WavepacketSpec};
use tachyon_core::{
    classify_modes, default_critical_tolerance, to_modes, DispersionTable, DoubleDouble, FieldState, LatticeSpec,
    ModeState,
};

use super::guard_margin;
use crate::config::ScenarioConfig;
use crate::record::{Record, Series};
use crate::CliError;

fn truncated_modes(lat: &LatticeSpec, spec: &WavepacketSpec, trunc: &TruncationSpec, m: f64) -> Result<ModeState, CliError> {
    let p: FieldState<DoubleDouble> = build_wavepacket(lat, spec, m)?;
    Ok(to_modes(&truncate(&p, trunc, lat)?, lat)?.to_f64())
}

fn scaled(v: &[Complex<f64>], a: f64) -> Vec<Complex<f64>> {
    v.iter().map(|c| c * a).collect()
}

pub fn run(cfg: &ScenarioConfig) -> Result<Record, CliError> {
    let lat = cfg.lattice()?;
    let m = cfg.m();
    let base = cfg.packet()?;
    let trunc = cfg.truncation()?;
    let disp: DispersionTable = classify_modes(&lat, m, default_critical_tolerance(m))?;
    let vac: GaussianFieldState = vacuum_state(&lat, &disp)?;

    let mut s = Series::new(
        "sweep",
        &[
            "x0",
            "depth",
            "exponent",
            "normal_exponent",
            "unstable_exponent",
            "overlap",
            "mean_photons",
            "phase_space_exponent",
        ],
    );
    let mut rows = Vec::new();
    let mut scaling: f64 = 0.0;
    for &x0 in cfg.sweep_x0()? {
        let spec = base.with_center(x0);
        spec.validate(&lat, m)?;
        guard_margin(&spec, cfg.t_max(), &lat, m)?;
        let g = truncated_modes(&lat, &spec, &trunc, m)?;
        let field = overlap_vacuum(&coherent_displace(&vac, &g.phi_k)?, &disp)?;
        let full = overlap_vacuum(&vac.displace(&g.phi_k, &g.pi_k)?, &disp)?;
        let doubled = overlap_vacuum(&coherent_displace(&vac, &scaled(&g.phi_k, 2.0))?, &disp)?;
        if field.exponent > 0.0 {
            scaling = scaling.max((doubled.exponent / (4.0 * field.exponent) - 1.0).abs());
        }
        let depth = (trunc.cut_position - x0) * spec.delta_k;
        rows.push((depth, field.exponent, field.overlap()));
        s.push(vec![
            x0,
            depth,
            field.exponent,
            field.normal_exponent,
            field.unstable_exponent,
            field.overlap(),
            2.0 * field.exponent,
            full.exponent,
        ]);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let top = rows.iter().fold(0.0f64, |a, r| a.max(r.1));
    let monotone = rows.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12 * top);
    let deepest = rows.last().expect("sweep is non-empty");

    let mut r = Record::new("overlap");
    r.scalar("amplitude", base.amplitude);
    r.scalar("max_exponent", top);
    r.scalar("deepest_depth", deepest.0);
    r.scalar("deepest_overlap", deepest.2);
    r.scalar("amplitude_scaling_deviation", scaling);
    r.series.push(s);
    r.check(
        "amplitude_squared_scaling",
        scaling <= 1e-12,
        format!("exponent(2A) / 4 exponent(A) - 1 up to {scaling:.3e} (bound 1e-12)"),
    );
    r.check(
        "monotone_in_depth",
        monotone,
        "exponent non-increasing as the packet moves behind the cut".into(),
    );
    if deepest.0 >= 10.0 {
        r.check(
            "deep_tail_indistinguishable",
            deepest.2 >= 0.99,
            format!("overlap {:.6} at depth {:.2} envelope widths (bound >= 0.99)", deepest.2, deepest.0),
        );
    }
    Ok(r)
}
