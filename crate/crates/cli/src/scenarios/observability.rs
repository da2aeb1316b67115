use tachyon_core::quantum::observability_report;

use super::{checked_packet, sorted_times};
use crate::config::ScenarioConfig;
use crate::record::{Record, Series};
use crate::CliError;

/// Required crossing exponent for "many quanta".
const MANY_QUANTA: f64 = 100.0;

pub fn run(cfg: &ScenarioConfig) -> Result<Record, CliError> {
    let lat = cfg.lattice()?;
    let m = cfg.m();
    let (spec, margin) = checked_packet(cfg, &lat)?;
    let trunc = cfg.truncation()?;
    let smear = cfg.smearing()?;
    let thresholds = cfg.thresholds();
    let amplitudes = cfg.sweep_amplitude()?;
    let unit = spec.with_amplitude(1.0);

    let mut boundary = Series::new(
        "boundary",
        &[
            "T",
            "separation_condition",
            "lightcone_condition",
            "signal_per_amplitude",
            "fluctuation",
            "crossing_amplitude",
            "crossing_exponent",
            "scaled_crossing_amplitude",
        ],
    );
    let mut sweep = Series::new("sweep", &["T", "amplitude", "signal", "ratio", "vacuum_exponent", "observable"]);
    let mut r = Record::new("observability");
    let mut scaled_in_range = Vec::new();
    let mut last_crossing = 0.0;
    let mut monotone = true;
    for t in sorted_times(cfg) {
        let rep = observability_report(&lat, &unit, &trunc, m, t, &smear, thresholds)?;
        let scale = (m * t).exp() / (2.0 * m * t).powf(0.25);
        let scaled = rep.crossing_amplitude / scale;
        boundary.push(vec![
            t,
            rep.separation_condition,
            rep.lightcone_condition,
            rep.signal,
            rep.fluctuation,
            rep.crossing_amplitude,
            rep.crossing_exponent,
            scaled,
        ]);
        monotone &= rep.crossing_amplitude > last_crossing;
        last_crossing = rep.crossing_amplitude;
        if (10.0..=30.0).contains(&(m * t)) {
            scaled_in_range.push(scaled);
        }
        let mut below = false;
        let mut above = false;
        for &a in amplitudes {
            let ratio = rep.signal * a.abs() / rep.fluctuation;
            let observable = rep.separation_condition >= thresholds.condition
                && rep.lightcone_condition >= thresholds.condition
                && ratio >= thresholds.ratio;
            below |= ratio < 1.0;
            above |= ratio >= 1.0;
            sweep.push(vec![t, a, rep.signal * a.abs(), ratio, rep.vacuum_exponent * a * a, f64::from(u8::from(observable))]);
        }
        if (m * t - 20.0).abs() < 1e-9 {
            r.scalar("crossing_amplitude_mT20", rep.crossing_amplitude);
            r.scalar("crossing_exponent_mT20", rep.crossing_exponent);
            r.check(
                "crossing_needs_many_quanta",
                below && above && rep.crossing_exponent > MANY_QUANTA,
                format!(
                    "sweep brackets ratio 1: {}, crossing exponent {:.3e} at A = {:.3e} (bound > {MANY_QUANTA})",
                    below && above,
                    rep.crossing_exponent,
                    rep.crossing_amplitude
                ),
            );
        }
    }
    r.scalar("domain_margin", margin);
    r.scalar("condition_threshold", thresholds.condition);
    r.scalar("ratio_threshold", thresholds.ratio);
    r.series.push(boundary);
    r.series.push(sweep);
    r.check(
        "crossing_grows_with_time",
        monotone,
        "required amplitude increases with T_obs".into(),
    );
    if scaled_in_range.len() >= 2 {
        let hi = scaled_in_range.iter().cloned().fold(0.0, f64::max);
        let lo = scaled_in_range.iter().cloned().fold(f64::INFINITY, f64::min);
        r.scalar("scaled_crossing_spread", hi / lo);
        r.check(
            "crossing_scaling",
            hi / lo <= 2.0,
            format!("A* (2mT)^(1/4) e^(-mT) varies by a factor {:.4} over mT in [10, 30] (bound 2)", hi / lo),
        );
    }
    Ok(r)
}
