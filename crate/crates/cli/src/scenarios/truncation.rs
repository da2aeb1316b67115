use tachyon_core::green::{causality_report, tail_reconstruction};
use tachyon_core::wavepacket::{build_wavepacket, truncate};
use tachyon_core::{DoubleDouble, FieldState};

use super::{checked_packet, sorted_times};
use crate::config::ScenarioConfig;
use crate::record::{Record, Series};
use crate::CliError;

/// `m t` from which the unstable band must dominate.
const DOMINANCE_TIME: f64 = 20.0;

pub fn run(cfg: &ScenarioConfig) -> Result<Record, CliError> {
    let lat = cfg.lattice()?;
    let m = cfg.m();
    let (spec, margin) = checked_packet(cfg, &lat)?;
    let trunc = cfg.truncation()?;
    let times = sorted_times(cfg);

    let tails = tail_reconstruction::<DoubleDouble>(&spec, &trunc, m, &lat, &times)?;
    let packet: FieldState<DoubleDouble> = build_wavepacket(&lat, &spec, m)?;
    let cut = truncate(&packet, &trunc, &lat)?;

    let mut s = Series::new(
        "diagnostics",
        &[
            "t",
            "peak_position",
            "regime_a_max",
            "regime_b_max",
            "regime_c_deviation",
            "peak",
            "normal_fraction",
            "unstable_fraction",
            "envelope_error",
            "window_peak",
            "local_wavevector",
        ],
    );
    let mut r = Record::new("truncation");
    let mut dominance = Vec::new();
    for tail in &tails {
        let c = causality_report(&packet, &cut, tail.time, m, &lat, &trunc)?;
        s.push(vec![
            tail.time,
            tail.peak_position,
            c.regime_a_max,
            c.regime_b_max,
            c.regime_c_deviation,
            c.peak,
            tail.normal_fraction,
            tail.unstable_fraction,
            tail.envelope_error,
            tail.window_peak,
            tail.local_wavevector,
        ]);
        if m * tail.time >= DOMINANCE_TIME {
            dominance.push(tail);
        }
    }
    let last = tails.last().expect("schedule is non-empty");
    r.scalar("domain_margin", margin);
    r.scalar("k0", spec.k0);
    r.scalar("final_time", last.time);
    r.scalar("final_envelope_error", last.envelope_error);
    r.scalar("final_unstable_fraction", last.unstable_fraction);
    r.scalar("final_local_wavevector", last.local_wavevector);
    r.series.push(s);

    r.check(
        "tail_reconstruction",
        last.envelope_error <= 0.01,
        format!("L2 envelope error {:.3e} at t = {} (bound 1e-2)", last.envelope_error, last.time),
    );
    for tail in dominance {
        let k_rel = (tail.local_wavevector / spec.k0 - 1.0).abs();
        r.check(
            &format!("unstable_dominance_t{}", tail.time),
            tail.unstable_fraction > 1.0 - 1e-6 && k_rel <= 0.02,
            format!(
                "normal fraction {:.3e} (bound 1e-6), local k {:.6} vs k0 {} (rel {:.3e}, bound 2e-2)",
                tail.normal_fraction, tail.local_wavevector, spec.k0, k_rel
            ),
        );
    }
    Ok(r)
}
