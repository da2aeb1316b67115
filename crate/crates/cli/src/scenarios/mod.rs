mod causality;
mod fluctuations;
mod observability;
mod overlap;
mod propagate;
mod rld;
mod truncation;

use tachyon_core::green::domain_margin;
use tachyon_core::wavepacket::WavepacketSpec;
use tachyon_core::LatticeSpec;

use crate::config::ScenarioConfig;
use crate::record::Record;
use crate::CliError;

pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub run: fn(&ScenarioConfig) -> Result<Record, CliError>,
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "propagate",
        summary: "free packet: envelope centroid and carrier speeds against k0/sqrt(k0^2-m^2)",
        run: propagate::run,
    },
    Scenario {
        name: "truncation",
        summary: "truncated packet: regime diagnostics, band split and forward-peak reconstruction",
        run: truncation::run,
    },
    Scenario {
        name: "causality",
        summary: "truncated-vs-original residuals outside the light cone, Green vs spectral",
        run: causality::run,
    },
    Scenario {
        name: "overlap",
        summary: "vacuum overlap exponent of the truncated tail against cut depth",
        run: overlap::run,
    },
    Scenario {
        name: "fluctuations",
        summary: "smeared vacuum variance growth against I0(2mT) and its asymptote",
        run: fluctuations::run,
    },
    Scenario {
        name: "rld",
        summary: "R/L/D coherent-state overlaps over time and the uncertainty audit",
        run: rld::run,
    },
    Scenario {
        name: "observability",
        summary: "signal against fluctuations over amplitude and observation time",
        run: observability::run,
    },
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

pub fn names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|s| s.name).collect()
}

/// Aborts with a physics-guard error when the packet would run into its
/// periodic image before `t_max`.
pub fn guard_margin(spec: &WavepacketSpec, t_max: f64, lattice: &LatticeSpec, m: f64) -> Result<f64, CliError> {
    let margin = domain_margin(spec, t_max, lattice, m);
    if margin < 0.0 {
        return Err(CliError::Guard(format!(
            "domain_margin = {margin:.6} < 0 for x0 = {}, t_max = {t_max}, L_dom = {}",
            spec.x0,
            lattice.domain_length()
        )));
    }
    Ok(margin)
}

/// Validated packet plus its margin for the scheduled horizon.
pub fn checked_packet(cfg: &ScenarioConfig, lattice: &LatticeSpec) -> Result<(WavepacketSpec, f64), CliError> {
    let spec = cfg.packet()?;
    spec.validate(lattice, cfg.m())?;
    let margin = guard_margin(&spec, cfg.t_max(), lattice, cfg.m())?;
    Ok((spec, margin))
}

pub fn sorted_times(cfg: &ScenarioConfig) -> Vec<f64> {
    let mut t = cfg.schedule.t_values.clone();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Largest `|x|` of an iterator, ignoring NaN.
pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, v| a.max(v.abs()))
}
