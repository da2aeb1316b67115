//! Retarded Green functions of `phi_tt - phi_xx - m^2 phi = 0` and
//! position-space propagation.
//!
//! ```text
//! G~(x, t) = 1/2 theta(t - |x|) I_0(m s),          s = sqrt(t^2 - x^2)
//! G(x, t)  = d_t G~ = 1/2 [delta(x - t) + delta(x + t)] + theta(t - |x|) (m^2 t / 2) I_1(m s) / (m s)
//! ```
//!
//! so that `phi(x, t) = int dx' [G(x - x', t) phi_0(x') + G~(x - x', t) pi_0(x')]`.
//! The momentum follows from `d_t G = G~_xx + m^2 G~`:
//! `pi(x, t) = int dx' [G pi_0 + G~ (phi_0'' + m^2 phi_0)]`.

use crate::bessel::{bessel_i0, bessel_i1_over_z};
use crate::error::{LabError, Result};
use crate::lattice::{
    classify_modes, default_critical_tolerance, evolve_modes, from_modes, spectral_derivative, to_modes,
    FieldState, LatticeSpec,
};
use crate::scalar::Real;
use crate::wavepacket::{
    band_energy_split, build_wavepacket, envelope, local_envelope, local_wavevector_by, truncate, CarrierEstimator,
    TruncationSpec, WavepacketSpec,
};

/// Number of smoothing lengths excluded on each side of the cut.
pub const CUT_MARGIN_LENGTHS: f64 = 5.0;

fn interval(x: f64, t: f64) -> Option<f64> {
    let s2 = (t - x.abs()) * (t + x.abs());
    (s2 >= 0.0).then(|| s2.sqrt())
}

/// `G~(x, t)`; zero outside the light cone, `1/2` on it.
pub fn gtilde(x: f64, t: f64, m: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(LabError::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    match interval(x, t) {
        Some(s) => Ok(0.5 * bessel_i0(m * s)?),
        None => Ok(0.0),
    }
}

/// Interior (non-distributional) part of `G(x, t)`.
pub fn g_bulk(x: f64, t: f64, m: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(LabError::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    match interval(x, t) {
        Some(s) => Ok(0.5 * m * m * t * bessel_i1_over_z(m * s)?),
        None => Ok(0.0),
    }
}

/// Both kernels sampled at the lattice positions `x_j`.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub mass: f64,
    pub time: f64,
    pub gtilde_samples: Vec<f64>,
    pub g_bulk_samples: Vec<f64>,
    /// weight of each of the two light-cone images in `G`
    pub lightcone_weight: f64,
}

impl GreenKernel {
    pub fn sample(lattice: &LatticeSpec, t: f64, m: f64) -> Result<Self> {
        let xs = lattice.positions();
        Ok(Self {
            mass: m,
            time: t,
            gtilde_samples: xs.iter().map(|&x| gtilde(x, t, m)).collect::<Result<_>>()?,
            g_bulk_samples: xs.iter().map(|&x| g_bulk(x, t, m)).collect::<Result<_>>()?,
            lightcone_weight: 0.5,
        })
    }
}

/// Quadrature weights for `int_{-t}^{t} f(u) du` on the nodes `u = d dx`,
/// `|d| <= D`, plus the two exact endpoints `u = +-t`.
struct ConeRule {
    reach: usize,
    /// weight of node `|d|`, `d = 0..=D`
    node: Vec<f64>,
    /// weight of each endpoint
    end: f64,
    /// endpoint offset in units of dx
    end_offset: f64,
}

impl ConeRule {
    fn new(t: f64, dx: f64) -> Self {
        let ratio = t / dx;
        let mut reach = ratio.floor() as usize;
        // an endpoint within rounding of a node is that node
        if ratio - reach as f64 > 1.0 - 1e-9 {
            reach += 1;
        }
        let rem = (t - reach as f64 * dx).max(0.0);
        let mut node = vec![dx; reach + 1];
        if reach == 0 {
            node[0] = rem;
        } else {
            node[reach] = 0.5 * dx + 0.5 * rem;
        }
        Self {
            reach,
            node,
            end: if reach == 0 { 0.5 * rem } else { 0.5 * rem },
            end_offset: ratio,
        }
    }
}

fn periodic(values: &[f64], idx: i64) -> f64 {
    values[idx.rem_euclid(values.len() as i64) as usize]
}

fn interpolate(values: &[f64], pos: f64) -> f64 {
    let base = pos.floor();
    let frac = pos - base;
    let i = base as i64;
    let a = periodic(values, i);
    if frac == 0.0 {
        return a;
    }
    a + frac * (periodic(values, i + 1) - a)
}

/// Position-space propagation by quadrature of the closed-form kernels.
///
/// The interior integrals use the trapezoid rule on the sites inside the cone
/// plus the two partial end segments; the delta part of `G` is applied as
/// `1/2 [f(x - t) + f(x + t)]` with linear interpolation. Indexing is periodic,
/// so `2 t` must stay below the domain length.
pub fn propagate_green(state0: &FieldState, t: f64, m: f64, lattice: &LatticeSpec) -> Result<FieldState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(LabError::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    let n = lattice.num_points();
    if state0.phi.len() != n || state0.pi.len() != n {
        return Err(LabError::LengthMismatch {
            expected: n,
            got: state0.phi.len().min(state0.pi.len()),
        });
    }
    if t == 0.0 {
        return Ok(state0.clone());
    }
    if 2.0 * t >= lattice.domain_length() {
        return Err(LabError::WraparoundRisk(format!(
            "light cone of width {} exceeds the domain length {}",
            2.0 * t,
            lattice.domain_length()
        )));
    }
    let dx = lattice.spacing();
    let rule = ConeRule::new(t, dx);
    let gt: Vec<f64> = (0..=rule.reach).map(|d| gtilde(d as f64 * dx, t, m)).collect::<Result<_>>()?;
    let gb: Vec<f64> = (0..=rule.reach).map(|d| g_bulk(d as f64 * dx, t, m)).collect::<Result<_>>()?;
    let gt_edge = 0.5;
    let gb_edge = 0.25 * m * m * t;

    let phi0 = &state0.phi;
    let pi0 = &state0.pi;
    let d2 = spectral_derivative(phi0, lattice, 2)?;
    let source: Vec<f64> = d2.iter().zip(phi0).map(|(a, b)| a + m * m * b).collect();

    // int G_bulk f + int G~ h over the cone centred on site i
    let cone = |i: usize, f: &[f64], h: &[f64]| -> f64 {
        let c = i as i64;
        let mut acc = rule.node[0] * (gb[0] * f[i] + gt[0] * h[i]);
        for d in 1..=rule.reach {
            let w = rule.node[d];
            let di = d as i64;
            acc += w * gb[d] * (periodic(f, c - di) + periodic(f, c + di));
            acc += w * gt[d] * (periodic(h, c - di) + periodic(h, c + di));
        }
        let lo = i as f64 - rule.end_offset;
        let hi = i as f64 + rule.end_offset;
        acc += rule.end * gb_edge * (interpolate(f, lo) + interpolate(f, hi));
        acc += rule.end * gt_edge * (interpolate(h, lo) + interpolate(h, hi));
        acc
    };
    let edge = |i: usize, f: &[f64]| -> f64 {
        0.5 * (interpolate(f, i as f64 - rule.end_offset) + interpolate(f, i as f64 + rule.end_offset))
    };

    let mut phi = Vec::with_capacity(n);
    let mut pi = Vec::with_capacity(n);
    for i in 0..n {
        phi.push(edge(i, phi0) + cone(i, phi0, pi0));
        pi.push(edge(i, pi0) + cone(i, pi0, &source));
    }
    let out = FieldState::new(state0.time + t, phi, pi)?;
    if !out.is_finite() {
        return Err(LabError::InstabilityOverflow {
            mode: 0,
            wavevector: 0.0,
            kappa_dt: m * t,
        });
    }
    Ok(out)
}

/// Spatial headroom left after a packet runs for `t_max`:
/// `L/2 - (|x0| + v_g t_max + t_max + 8/dk)`. Negative means the causal
/// comparison regions would be contaminated by wraparound.
pub fn domain_margin(spec: &WavepacketSpec, t_max: f64, lattice: &LatticeSpec, m: f64) -> f64 {
    let vg = spec.group_velocity(m);
    0.5 * lattice.domain_length() - (spec.x0.abs() + vg * t_max + t_max + 8.0 / spec.delta_k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalityReport {
    pub time: f64,
    /// max |phi_T| over regime (a)
    pub regime_a_max: f64,
    /// max |phi_T - phi| over regime (c)
    pub regime_c_deviation: f64,
    /// max |phi_T| between the two regions
    pub regime_b_max: f64,
    /// max |phi| of the evolved untruncated packet
    pub peak: f64,
    pub region_a: (f64, f64),
    pub region_c: (f64, f64),
}

impl CausalityReport {
    pub fn regime_a_relative(&self) -> f64 {
        self.regime_a_max / self.peak
    }

    pub fn regime_c_relative(&self) -> f64 {
        self.regime_c_deviation / self.peak
    }
}

/// The two causal comparison regions at time `t` for a cut at `x_c`:
/// (a) `(-L/2 + t, x_c - t - 5 eps)` and (c) `(x_c + t + 5 eps, L/2 - t)`.
/// The outer bounds discard what the periodic image of the cut reaches.
pub fn causality_regions(lattice: &LatticeSpec, trunc: &TruncationSpec, t: f64) -> Result<((f64, f64), (f64, f64))> {
    let half = 0.5 * lattice.domain_length();
    let pad = t + CUT_MARGIN_LENGTHS * trunc.smoothing_length;
    let a = (-half + t, trunc.cut_position - pad);
    let c = (trunc.cut_position + pad, half - t);
    if a.0 >= a.1 {
        return Err(LabError::MarginViolation(format!(
            "regime (a) region is empty at t = {t}: ({}, {})",
            a.0, a.1
        )));
    }
    if c.0 >= c.1 {
        return Err(LabError::MarginViolation(format!(
            "regime (c) region is empty at t = {t}: ({}, {})",
            c.0, c.1
        )));
    }
    Ok((a, c))
}

/// Evolves an untruncated state and its truncated copy to `t` with the exact
/// mode evolution and measures the two causality residuals.
pub fn causality_report<R: Real>(
    original0: &FieldState<R>,
    truncated0: &FieldState<R>,
    t: f64,
    m: f64,
    lattice: &LatticeSpec,
    trunc: &TruncationSpec,
) -> Result<CausalityReport> {
    if t < 0.0 {
        return Err(LabError::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    let (ra, rc) = causality_regions(lattice, trunc, t)?;
    let disp = classify_modes::<R>(lattice, m, default_critical_tolerance(m))?;
    let evolve = |s: &FieldState<R>| -> Result<FieldState<R>> {
        let modes = to_modes(s, lattice)?;
        from_modes(&evolve_modes(&modes, &disp, t)?, lattice)
    };
    let orig = evolve(original0)?;
    let tr = evolve(truncated0)?;
    let mut report = CausalityReport {
        time: original0.time + t,
        regime_a_max: 0.0,
        regime_c_deviation: 0.0,
        regime_b_max: 0.0,
        peak: orig.max_abs_phi(),
        region_a: ra,
        region_c: rc,
    };
    for j in 0..lattice.num_points() {
        let x = lattice.position(j);
        let v = tr.phi[j].to_f64().abs();
        if x > ra.0 && x < ra.1 {
            report.regime_a_max = report.regime_a_max.max(v);
        } else if x > rc.0 && x < rc.1 {
            let d = (tr.phi[j] - orig.phi[j]).to_f64().abs();
            report.regime_c_deviation = report.regime_c_deviation.max(d);
        } else if x >= ra.1 && x <= rc.0 {
            report.regime_b_max = report.regime_b_max.max(v);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub time: f64,
    /// `x0 + v_g t`
    pub peak_position: f64,
    /// `[x_p - 1/dk, x_p + 1/dk]` clipped to regime (c)
    pub window: (f64, f64),
    /// relative L2 distance between the truncated state's local envelope and
    /// the untruncated packet's envelope over `window`
    pub envelope_error: f64,
    /// peak of the truncated field over `window`
    pub window_peak: f64,
    pub normal_fraction: f64,
    pub unstable_fraction: f64,
    /// local wavevector of the truncated field within `x_p +- CARRIER_HALF_WIDTH`, NaN without a carrier
    pub local_wavevector: f64,
}

/// Half width of the window used for the local wavevector at the peak.
pub const CARRIER_HALF_WIDTH: f64 = 2.0;

/// Evolves a packet and its truncated copy to each time and compares the
/// forward peak.
pub fn tail_reconstruction<R: Real>(
    spec: &WavepacketSpec,
    trunc: &TruncationSpec,
    m: f64,
    lattice: &LatticeSpec,
    times: &[f64],
) -> Result<Vec<TailReport>> {
    let disp = classify_modes::<R>(lattice, m, default_critical_tolerance(m))?;
    let packet: FieldState<R> = build_wavepacket(lattice, spec, m)?;
    let m0 = to_modes(&packet, lattice)?;
    let mt0 = to_modes(&truncate(&packet, trunc, lattice)?, lattice)?;
    let vg = spec.group_velocity(m);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let (_, rc) = causality_regions(lattice, trunc, t)?;
        let xp = spec.x0 + vg * t;
        let window = ((xp - 1.0 / spec.delta_k).max(rc.0), (xp + 1.0 / spec.delta_k).min(rc.1));
        if window.0 >= window.1 {
            return Err(LabError::MarginViolation(format!(
                "peak window at t = {t} lies outside regime (c) ({}, {})",
                rc.0, rc.1
            )));
        }
        let a = evolve_modes(&m0, &disp, t)?;
        let b = evolve_modes(&mt0, &disp, t)?;
        let (normal, unstable) = band_energy_split(&b, &disp)?;
        let fa = from_modes(&a, lattice)?;
        let fb = from_modes(&b, lattice)?;
        let ea = envelope(&fa, lattice)?;
        let eb = local_envelope(&fb, lattice)?;
        let (mut num, mut den, mut peak) = (0.0, 0.0, 0.0f64);
        for j in 0..lattice.num_points() {
            let x = lattice.position(j);
            if x >= window.0 && x <= window.1 {
                num += (ea[j] - eb[j]).powi(2);
                den += ea[j].powi(2);
                peak = peak.max(fb.phi[j].to_f64().abs());
            }
        }
        let k = match local_wavevector_by(&fb, lattice, xp, CARRIER_HALF_WIDTH, CarrierEstimator::EnergyOperator) {
            Ok(k) => k,
            Err(LabError::NoCarrier(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        out.push(TailReport {
            time: t,
            peak_position: xp,
            window,
            envelope_error: (num / den).sqrt(),
            window_peak: peak,
            normal_fraction: normal / (normal + unstable),
            unstable_fraction: unstable / (normal + unstable),
            local_wavevector: k,
        });
    }
    Ok(out)
}
