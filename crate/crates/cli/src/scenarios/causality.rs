use tachyon_core::green::{causality_report, propagate_green};
use tachyon_core::wavepacket::{build_wavepacket, truncate};
use tachyon_core::{
    classify_modes, default_critical_tolerance, evolve_modes, from_modes, to_modes, DispersionTable, DoubleDouble,
    FieldState,
};

use super::{checked_packet, max_abs, sorted_times};
use crate::config::ScenarioConfig;
use crate::record::{Record, Series};
use crate::CliError;

const BOUND: f64 = 1e-8;

pub fn run(cfg: &ScenarioConfig) -> Result<Record, CliError> {
    let lat = cfg.lattice()?;
    let m = cfg.m();
    let (spec, margin) = checked_packet(cfg, &lat)?;
    let trunc = cfg.truncation()?;
    let times = sorted_times(cfg);

    let packet: FieldState<DoubleDouble> = build_wavepacket(&lat, &spec, m)?;
    let cut = truncate(&packet, &trunc, &lat)?;
    let cut64: FieldState = cut.convert();
    let disp: DispersionTable = classify_modes(&lat, m, default_critical_tolerance(m))?;
    let modes64 = to_modes(&cut64, &lat)?;

    let mut s = Series::new(
        "regimes",
        &[
            "t",
            "region_a_lo",
            "region_a_hi",
            "region_c_lo",
            "region_c_hi",
            "regime_a_max",
            "regime_a_relative",
            "regime_c_deviation",
            "regime_c_relative",
            "regime_b_max",
            "peak",
            "green_spectral_error",
        ],
    );
    let mut worst: f64 = 0.0;
    let mut worst_green: f64 = 0.0;
    for &t in &times {
        let c = causality_report(&packet, &cut, t, m, &lat, &trunc)?;
        // same f64 initial data through both propagators
        let spectral = from_modes(&evolve_modes(&modes64, &disp, t)?, &lat)?;
        let green = propagate_green(&cut64, t, m, &lat)?;
        let g_err = max_abs(green.phi.iter().zip(&spectral.phi).map(|(a, b)| a - b)) / spectral.max_abs_phi();
        worst = worst.max(c.regime_a_relative()).max(c.regime_c_relative());
        worst_green = worst_green.max(g_err);
        s.push(vec![
            t,
            c.region_a.0,
            c.region_a.1,
            c.region_c.0,
            c.region_c.1,
            c.regime_a_max,
            c.regime_a_relative(),
            c.regime_c_deviation,
            c.regime_c_relative(),
            c.regime_b_max,
            c.peak,
            g_err,
        ]);
    }
    let mut r = Record::new("causality");
    r.scalar("domain_margin", margin);
    r.scalar("cut_margin", 5.0 * trunc.smoothing_length);
    r.scalar("worst_relative_residual", worst);
    r.scalar("worst_green_spectral_error", worst_green);
    r.series.push(s);
    r.check(
        "causality",
        worst <= BOUND,
        format!("worst residual / peak outside the cone {worst:.3e} (bound {BOUND:e})"),
    );
    Ok(r)
}
