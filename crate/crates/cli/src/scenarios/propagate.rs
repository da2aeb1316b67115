use tachyon_core::wavepacket::{envelope, envelope_centroid, track_group_velocity, track_phase_velocity, wavepacket_modes};
use tachyon_core::{classify_modes, default_critical_tolerance, evolve_modes, from_modes, DispersionTable, FieldState};

use super::{checked_packet, sorted_times};
use crate::config::ScenarioConfig;
use crate::record::{Record, Series};
use crate::CliError;

const PHASE_STEPS: usize = 6;
const PHASE_DT: f64 = 0.2;

pub fn run(cfg: &ScenarioConfig) -> Result<Record, CliError> {
    let lat = cfg.lattice()?;
    let m = cfg.m();
    let (spec, margin) = checked_packet(cfg, &lat)?;
    let times = sorted_times(cfg);
    if times.len() < 3 {
        return Err(CliError::Config("propagate needs at least 3 distinct schedule.t_values".into()));
    }
    let vg = spec.group_velocity(m);
    let vp = spec.phase_velocity(m);
    let t_max = cfg.t_max();
    let window = cfg
        .window()
        .unwrap_or((spec.x0 - 6.0 / spec.delta_k, spec.x0 + vg * t_max + 6.0 / spec.delta_k));

    let disp: DispersionTable = classify_modes(&lat, m, default_critical_tolerance(m))?;
    // evolve the exact spectrum so the unstable band starts at zero
    let m0 = wavepacket_modes::<f64>(&lat, &spec, m)?;
    let at = |t: f64| -> Result<FieldState, CliError> { Ok(from_modes(&evolve_modes(&m0, &disp, t)?, &lat)?) };
    let states = times.iter().map(|&t| at(t)).collect::<Result<Vec<_>, _>>()?;

    let mut centroids = Series::new("centroid", &["t", "centroid", "predicted", "residual"]);
    for (s, &t) in states.iter().zip(&times) {
        let c = envelope_centroid(&envelope(s, &lat)?, &lat, window)?;
        let p = spec.x0 + vg * t;
        centroids.push(vec![t, c, p, c - p]);
    }
    let (v_meas, rms) = track_group_velocity(&states, &lat, window)?;

    let carrier = (0..PHASE_STEPS).map(|i| at(PHASE_DT * i as f64)).collect::<Result<Vec<_>, _>>()?;
    let (vp_meas, vp_rms) = track_phase_velocity(&carrier, &lat, spec.x0)?;

    let rel = (v_meas / vg - 1.0).abs();
    let duality = v_meas * vp_meas;
    let mut r = Record::new("propagate");
    r.scalar("domain_margin", margin);
    r.scalar("window_lo", window.0);
    r.scalar("window_hi", window.1);
    r.scalar("v_group_formula", vg);
    r.scalar("v_group_measured", v_meas);
    r.scalar("v_group_rel_deviation", rel);
    r.scalar("v_group_fit_rms", rms);
    r.scalar("v_phase_formula", vp);
    r.scalar("v_phase_measured", vp_meas);
    r.scalar("v_phase_fit_rms", vp_rms);
    r.scalar("duality_product", duality);
    r.series.push(centroids);
    r.check(
        "group_velocity",
        rel <= 0.01,
        format!("|v - v_g| / v_g = {rel:.3e} (bound 1e-2), v = {v_meas:.8}, v_g = {vg:.8}"),
    );
    r.check(
        "phase_group_duality",
        (duality - 1.0).abs() <= 0.01,
        format!("v_p v_g = {duality:.8} (bound 1 +- 1e-2)"),
    );
    Ok(r)
}
