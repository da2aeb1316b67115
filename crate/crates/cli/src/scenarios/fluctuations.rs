use std::f64::consts::PI;

use tachyon_core::bessel::{bessel_i0, MAX_ARGUMENT};
use tachyon_core::quantum::{smeared_variance, vacuum_state, BandQuadrature, Smearing};
use tachyon_core::{classify_modes, default_critical_tolerance, DispersionTable, ModeClass};

use super::sorted_times;
use crate::config::ScenarioConfig;
use crate::record::{Record, Series};
use crate::CliError;

pub fn run(cfg: &ScenarioConfig) -> Result<Record, CliError> {
    let lat = cfg.lattice()?;
    let m = cfg.m();
    let smear = cfg.smearing()?;
    let disp: DispersionTable = classify_modes(&lat, m, default_critical_tolerance(m))?;
    let vac = vacuum_state(&lat, &disp)?;
    let f = smear.sample(&lat);
    let quadrature = if disp.count(ModeClass::Critical) == 0 && disp.count(ModeClass::Unstable) >= 4 {
        BandQuadrature::EdgeCorrected
    } else {
        BandQuadrature::Riemann
    };
    let base = smeared_variance(&vac, &disp, &f, 0.0, quadrature)?;

    let mut s = Series::new(
        "variance",
        &[
            "T",
            "unstable",
            "normal",
            "total",
            "ratio",
            "bessel_i0",
            "bessel_rel_deviation",
            "asymptote",
            "asymptote_ratio",
        ],
    );
    let ideal = matches!(smear, Smearing::Band { k_cut } if (k_cut - m).abs() <= 1e-12 * m);
    let mut bessel_worst: f64 = 0.0;
    let mut asym_worst: Option<f64> = None;
    for t in sorted_times(cfg) {
        let v = smeared_variance(&vac, &disp, &f, t, quadrature)?;
        let ratio = v.unstable / base.unstable;
        let z = 2.0 * m * t;
        let i0 = if z <= MAX_ARGUMENT { bessel_i0(z)? } else { f64::NAN };
        let dev = ratio / i0 - 1.0;
        let (asym, asym_ratio) = if t > 0.0 {
            let a = z.exp() / (4.0 * PI * m * t).sqrt();
            (a, ratio / a)
        } else {
            (f64::NAN, f64::NAN)
        };
        if m * t <= 10.0 {
            bessel_worst = bessel_worst.max(dev.abs());
        }
        if m * t >= 20.0 {
            asym_worst = Some(asym_worst.unwrap_or(0.0).max((asym_ratio - 1.0).abs()));
        }
        s.push(vec![t, v.unstable, v.normal, v.total, ratio, i0, dev, asym, asym_ratio]);
    }

    let mut r = Record::new("fluctuations");
    r.scalar(
        "quadrature",
        match quadrature {
            BandQuadrature::EdgeCorrected => "edge_corrected",
            BandQuadrature::Riemann => "riemann",
        },
    );
    r.scalar("prefactor_unstable_variance_t0", base.unstable);
    r.scalar("normal_variance_t0", base.normal);
    r.scalar("ideal_band_smearing", ideal);
    r.series.push(s);
    if ideal {
        r.check(
            "bessel_growth",
            bessel_worst <= 1e-6,
            format!("max |ratio / I0(2mT) - 1| for mT <= 10: {bessel_worst:.3e} (bound 1e-6)"),
        );
        if let Some(a) = asym_worst {
            r.check(
                "asymptotic_growth",
                a <= 0.01,
                format!("max |ratio / asymptote - 1| for mT >= 20: {a:.3e} (bound 1e-2)"),
            );
        }
    }
    Ok(r)
}
