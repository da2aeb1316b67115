//! Band-limited Gaussian wavepackets, the smoothed cut, and packet diagnostics.
//!
//! Two carrier estimators are provided. The analytic signal (Hilbert
//! transform) is the textbook one but is nonlocal: a large smooth field
//! anywhere on the lattice leaks into it everywhere. The energy-operator
//! estimator uses only local spectral derivatives,
//!
//! ```text
//! Psi[f] = f'^2 - f f'',   k^2 = Psi[f'] / Psi[f],   A^2 = Psi[f]^2 / Psi[f'],
//! ```
//!
//! exact for `A cos(kx + c)` and insensitive to what happens far away.

use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::lattice::{
    modes_to_complex, modes_to_real, real_to_modes, spectral_derivative, DispersionTable, FieldState, LatticeSpec,
    ModeClass, ModeState,
};
use crate::scalar::Real;

/// Default half-width of the spectral band, in units of `delta_k`.
pub const DEFAULT_BAND_HALF_WIDTH: f64 = 6.0;
/// Minimum distance of the band edges from `k0`, in units of `delta_k`.
pub const MIN_BAND_HALF_WIDTH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    pub k0: f64,
    pub delta_k: f64,
    pub x0: f64,
    pub amplitude: f64,
    /// `None` selects `k0 - 6 delta_k`
    pub k_min: Option<f64>,
    /// `None` selects `k0 + 6 delta_k`, capped below Nyquist
    pub k_max: Option<f64>,
}

impl WavepacketSpec {
    pub fn new(k0: f64, delta_k: f64, x0: f64, amplitude: f64) -> Self {
        Self {
            k0,
            delta_k,
            x0,
            amplitude,
            k_min: None,
            k_max: None,
        }
    }

    pub fn with_band(mut self, k_min: f64, k_max: f64) -> Self {
        self.k_min = Some(k_min);
        self.k_max = Some(k_max);
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_center(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn omega0(&self, m: f64) -> f64 {
        ((self.k0 - m) * (self.k0 + m)).sqrt()
    }

    /// `v_g = k0 / sqrt(k0^2 - m^2)`
    pub fn group_velocity(&self, m: f64) -> f64 {
        self.k0 / self.omega0(m)
    }

    /// `v_p = sqrt(k0^2 - m^2) / k0 = 1 / v_g`
    pub fn phase_velocity(&self, m: f64) -> f64 {
        self.omega0(m) / self.k0
    }

    /// Resolved `[k_min, k_max]` after defaults and the Nyquist cap.
    pub fn band(&self, lattice: &LatticeSpec) -> (f64, f64) {
        let k_min = self.k_min.unwrap_or(self.k0 - DEFAULT_BAND_HALF_WIDTH * self.delta_k);
        let cap = lattice.nyquist_wavevector() - lattice.dk();
        let k_max = self
            .k_max
            .unwrap_or_else(|| (self.k0 + DEFAULT_BAND_HALF_WIDTH * self.delta_k).min(cap));
        (k_min, k_max)
    }

    pub fn validate(&self, lattice: &LatticeSpec, m: f64) -> Result<()> {
        for (name, v) in [("k0", self.k0), ("delta_k", self.delta_k), ("x0", self.x0), ("amplitude", self.amplitude)] {
            if !v.is_finite() {
                return Err(LabError::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.delta_k <= 0.0 {
            return Err(LabError::InvalidParameter(format!(
                "delta_k must be positive, got {}",
                self.delta_k
            )));
        }
        if self.k0 <= m {
            return Err(LabError::BandNotNormal(format!("k0 = {} does not exceed m = {m}", self.k0)));
        }
        let (k_min, k_max) = self.band(lattice);
        if k_min <= m {
            return Err(LabError::BandNotNormal(format!("k_min = {k_min} does not exceed m = {m}")));
        }
        if k_max >= lattice.nyquist_wavevector() {
            return Err(LabError::InvalidParameter(format!(
                "k_max = {k_max} reaches the Nyquist wavevector {}",
                lattice.nyquist_wavevector()
            )));
        }
        let need = MIN_BAND_HALF_WIDTH * self.delta_k;
        if self.k0 - k_min < need || k_max - self.k0 < need {
            return Err(LabError::InvalidParameter(format!(
                "band [{k_min}, {k_max}] leaves less than {MIN_BAND_HALF_WIDTH} delta_k on one side of k0 = {}",
                self.k0
            )));
        }
        Ok(())
    }
}

/// Mode amplitudes of the packet
/// `phi(x) = int_band dk (g(k) e^{ikx} + c.c.)`, `g(k) = A exp(-(k-k0)^2 / (2 dk^2)) e^{-ik x0}`,
/// with `pi = d_t phi` taken on the positive-frequency branch.
pub fn wavepacket_modes<R: Real>(lattice: &LatticeSpec, spec: &WavepacketSpec, m: f64) -> Result<ModeState<R>> {
    spec.validate(lattice, m)?;
    let (k_min, k_max) = spec.band(lattice);
    let n = lattice.num_points();
    let mut out = ModeState::zeros(n, 0.0);
    let root = (R::pi() + R::pi()).sqrt();
    let amp = R::from_f64(spec.amplitude) * root;
    let k0 = R::from_f64(spec.k0);
    let inv = R::one() / (R::from_f64(2.0) * R::from_f64(spec.delta_k) * R::from_f64(spec.delta_k));
    let x0 = R::from_f64(spec.x0);
    let m2 = R::from_f64(m) * R::from_f64(m);
    for i in 1..lattice.nyquist_slot() {
        let kf = lattice.wavevector(i);
        if kf < k_min || kf > k_max {
            continue;
        }
        let k = lattice.wavevector_in::<R>(i);
        let d = k - k0;
        let mag = amp * (-(d * d * inv)).exp();
        let (s, c) = (k * x0).sin_cos();
        let g = Complex::new(mag * c, -(mag * s));
        let w = (k * k - m2).sqrt();
        // -i w g
        let p = Complex::new(w * g.im, -(w * g.re));
        let j = lattice.conjugate_slot(i);
        out.phi_k[i] = g;
        out.pi_k[i] = p;
        out.phi_k[j] = g.conj();
        out.pi_k[j] = p.conj();
    }
    Ok(out)
}

pub fn build_wavepacket<R: Real>(lattice: &LatticeSpec, spec: &WavepacketSpec, m: f64) -> Result<FieldState<R>> {
    let modes = wavepacket_modes::<R>(lattice, spec, m)?;
    Ok(FieldState {
        time: 0.0,
        phi: modes_to_real(&modes.phi_k, lattice)?,
        pi: modes_to_real(&modes.pi_k, lattice)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    pub cut_position: f64,
    pub smoothing_length: f64,
}

impl TruncationSpec {
    pub fn new(cut_position: f64, smoothing_length: f64) -> Result<Self> {
        if !cut_position.is_finite() {
            return Err(LabError::InvalidParameter(format!("cut position must be finite, got {cut_position}")));
        }
        if !(smoothing_length.is_finite() && smoothing_length > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "smoothing length must be positive, got {smoothing_length}"
            )));
        }
        Ok(Self {
            cut_position,
            smoothing_length,
        })
    }

    /// Logistic step `1 / (1 + exp(-(x - x_c) / eps))`.
    pub fn step<R: Real>(&self, x: R) -> R {
        let mut u = (x - R::from_f64(self.cut_position)) / R::from_f64(self.smoothing_length);
        let lim = R::from_f64(600.0);
        if u > lim {
            u = lim;
        } else if u < -lim {
            u = -lim;
        }
        if u >= R::zero() {
            R::one() / (R::one() + (-u).exp())
        } else {
            let e = u.exp();
            e / (R::one() + e)
        }
    }

    /// Largest smoothing length compatible with the other scales,
    /// `min(1/k_max, 1/(10 dk), 20 dx)`.
    pub fn length_bound(&self, spec: &WavepacketSpec, lattice: &LatticeSpec) -> f64 {
        let (_, k_max) = spec.band(lattice);
        (1.0 / k_max).min(1.0 / (10.0 * spec.delta_k)).min(20.0 * lattice.spacing())
    }

    /// A message when the smoothing length is not the smallest scale.
    pub fn scale_warning(&self, spec: &WavepacketSpec, lattice: &LatticeSpec) -> Option<String> {
        let bound = self.length_bound(spec, lattice);
        (self.smoothing_length >= bound).then(|| {
            format!(
                "smoothing length {} is not below min(1/k_max, 1/(10 delta_k), 20 dx) = {bound}",
                self.smoothing_length
            )
        })
    }
}

/// Multiplies `phi` and `pi` by the logistic step.
pub fn truncate<R: Real>(state: &FieldState<R>, trunc: &TruncationSpec, lattice: &LatticeSpec) -> Result<FieldState<R>> {
    if state.phi.len() != lattice.num_points() || state.pi.len() != lattice.num_points() {
        return Err(LabError::LengthMismatch {
            expected: lattice.num_points(),
            got: state.phi.len().min(state.pi.len()),
        });
    }
    let mut out = state.clone();
    for j in 0..lattice.num_points() {
        let w: R = trunc.step(lattice.position_in::<R>(j));
        out.phi[j] *= w;
        out.pi[j] *= w;
    }
    Ok(out)
}

/// Analytic signal of a real lattice function: negative-k half removed,
/// positive half doubled, `k = 0` and the Nyquist slot kept once.
pub fn analytic_signal<R: Real>(values: &[R], lattice: &LatticeSpec) -> Result<Vec<Complex<R>>> {
    let mut modes = real_to_modes(values, lattice)?;
    let two = R::from_f64(2.0);
    let nyq = lattice.nyquist_slot();
    for (i, c) in modes.iter_mut().enumerate() {
        if i == 0 || i == nyq {
            continue;
        }
        if i < nyq {
            *c = Complex::new(c.re * two, c.im * two);
        } else {
            *c = Complex::new(R::zero(), R::zero());
        }
    }
    modes_to_complex(&modes, lattice)
}

/// Modulus of the analytic signal of `phi`.
pub fn envelope<R: Real>(state: &FieldState<R>, lattice: &LatticeSpec) -> Result<Vec<f64>> {
    Ok(analytic_signal(&state.phi, lattice)?
        .iter()
        .map(|c| c.norm_sqr().sqrt().to_f64())
        .collect())
}

/// Energy-operator amplitude and signed wavevector at every site.
///
/// Where `Psi[phi] < 0` the field is locally exponential rather than
/// oscillatory; the wavevector is then reported as `-sqrt(|k^2|)` and the
/// amplitude as zero.
#[derive(Debug, Clone)]
pub struct LocalCarrier {
    pub amplitude: Vec<f64>,
    pub wavevector: Vec<f64>,
}

pub fn local_carrier<R: Real>(state: &FieldState<R>, lattice: &LatticeSpec) -> Result<LocalCarrier> {
    let f = &state.phi;
    let d1 = spectral_derivative(f, lattice, 1)?;
    let d2 = spectral_derivative(f, lattice, 2)?;
    let d3 = spectral_derivative(f, lattice, 3)?;
    let n = lattice.num_points();
    let mut amplitude = Vec::with_capacity(n);
    let mut wavevector = Vec::with_capacity(n);
    for j in 0..n {
        let psi0 = d1[j] * d1[j] - f[j] * d2[j];
        let psi1 = d2[j] * d2[j] - d1[j] * d3[j];
        let p0 = psi0.to_f64();
        let p1 = psi1.to_f64();
        if p0 > 0.0 && p1 > 0.0 {
            amplitude.push((psi0 * psi0 / psi1).sqrt().to_f64());
            wavevector.push((psi1 / psi0).sqrt().to_f64());
        } else if p0 != 0.0 {
            amplitude.push(0.0);
            let k2 = (psi1 / psi0).to_f64();
            wavevector.push(if k2 >= 0.0 { -k2.sqrt() } else { -(-k2).sqrt() });
        } else {
            amplitude.push(0.0);
            wavevector.push(f64::NAN);
        }
    }
    Ok(LocalCarrier { amplitude, wavevector })
}

/// Energy-operator envelope of `phi`.
pub fn local_envelope<R: Real>(state: &FieldState<R>, lattice: &LatticeSpec) -> Result<Vec<f64>> {
    Ok(local_carrier(state, lattice)?.amplitude)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarrierEstimator {
    AnalyticSignal,
    EnergyOperator,
}

fn window_sites(lattice: &LatticeSpec, lo: f64, hi: f64) -> Result<Vec<usize>> {
    let half = 0.5 * lattice.domain_length();
    if !(lo < hi) || lo < -half || hi > half {
        return Err(LabError::InvalidParameter(format!(
            "window [{lo}, {hi}] is not inside the lattice [{}, {half}]",
            -half
        )));
    }
    let sites: Vec<usize> = (0..lattice.num_points())
        .filter(|&j| {
            let x = lattice.position(j);
            x >= lo && x <= hi
        })
        .collect();
    if sites.len() < 2 {
        return Err(LabError::InvalidParameter(format!("window [{lo}, {hi}] holds fewer than two sites")));
    }
    Ok(sites)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn noise_floor<R: Real>(state: &FieldState<R>) -> f64 {
    1e3 * R::EPSILON.max(f64::EPSILON * 1e-16) * state.max_abs_phi()
}

/// Median of `d(arg z)/dx` of the analytic signal over `[center - h, center + h]`.
pub fn local_wavevector<R: Real>(state: &FieldState<R>, lattice: &LatticeSpec, center: f64, half_width: f64) -> Result<f64> {
    local_wavevector_by(state, lattice, center, half_width, CarrierEstimator::AnalyticSignal)
}

pub fn local_wavevector_by<R: Real>(
    state: &FieldState<R>,
    lattice: &LatticeSpec,
    center: f64,
    half_width: f64,
    estimator: CarrierEstimator,
) -> Result<f64> {
    let sites = window_sites(lattice, center - half_width, center + half_width)?;
    let floor = noise_floor(state);
    let dx = lattice.spacing();
    match estimator {
        CarrierEstimator::AnalyticSignal => {
            let z = analytic_signal(&state.phi, lattice)?;
            let peak = sites.iter().fold(0.0f64, |a, &j| a.max(z[j].norm_sqr().sqrt().to_f64()));
            if !(peak > floor) {
                return Err(LabError::NoCarrier(format!(
                    "envelope {peak:e} in window around {center} is below the noise floor {floor:e}"
                )));
            }
            let grads: Vec<f64> = sites
                .windows(2)
                .map(|w| {
                    let q = z[w[1]] * z[w[0]].conj();
                    q.im.to_f64().atan2(q.re.to_f64()) / dx
                })
                .collect();
            Ok(median(grads))
        }
        CarrierEstimator::EnergyOperator => {
            let c = local_carrier(state, lattice)?;
            let peak = sites.iter().fold(0.0f64, |a, &j| a.max(state.phi[j].to_f64().abs()));
            if !(peak > floor) {
                return Err(LabError::NoCarrier(format!(
                    "field {peak:e} in window around {center} is below the noise floor {floor:e}"
                )));
            }
            let ks: Vec<f64> = sites.iter().map(|&j| c.wavevector[j]).filter(|k| k.is_finite()).collect();
            if ks.is_empty() {
                return Err(LabError::NoCarrier(format!("no usable samples in window around {center}")));
            }
            Ok(median(ks))
        }
    }
}

/// Centroid of `env^2` restricted to `[lo, hi]`. Fails when the profile at
/// either window edge exceeds 1% of its in-window maximum.
pub fn envelope_centroid(env: &[f64], lattice: &LatticeSpec, window: (f64, f64)) -> Result<f64> {
    let sites = window_sites(lattice, window.0, window.1)?;
    let max = sites.iter().fold(0.0f64, |a, &j| a.max(env[j] * env[j]));
    if !(max > 0.0) {
        return Err(LabError::Tracking("envelope vanishes inside the window".into()));
    }
    let first = env[sites[0]] * env[sites[0]];
    let last = env[*sites.last().unwrap()] * env[*sites.last().unwrap()];
    if first > 0.01 * max || last > 0.01 * max {
        return Err(LabError::Tracking(format!(
            "packet leaves the window [{}, {}] (edge weight {:.3e} of maximum)",
            window.0,
            window.1,
            first.max(last) / max
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &j in &sites {
        let w = env[j] * env[j];
        num += w * lattice.position(j);
        den += w;
    }
    Ok(num / den)
}

fn linear_fit(ts: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(ys) {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (y - ym);
    }
    let slope = sxy / sxx;
    let icpt = ym - slope * tm;
    let rss: f64 = ts.iter().zip(ys).map(|(t, y)| (y - icpt - slope * t).powi(2)).sum();
    (slope, icpt, (rss / n).sqrt())
}

fn distinct_times<R: Real>(states: &[FieldState<R>]) -> Result<Vec<f64>> {
    let ts: Vec<f64> = states.iter().map(|s| s.time).collect();
    let mut sorted = ts.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    if sorted.len() < 3 {
        return Err(LabError::Tracking(format!(
            "need at least three distinct times, got {}",
            sorted.len()
        )));
    }
    Ok(ts)
}

/// Least-squares slope of the windowed envelope-centroid position versus
/// time. Returns `(v_measured, rms_residual)`.
pub fn track_group_velocity<R: Real>(states: &[FieldState<R>], lattice: &LatticeSpec, window: (f64, f64)) -> Result<(f64, f64)> {
    let ts = distinct_times(states)?;
    let xs: Vec<f64> = states
        .iter()
        .map(|s| envelope_centroid(&envelope(s, lattice)?, lattice, window))
        .collect::<Result<_>>()?;
    let (v, _, res) = linear_fit(&ts, &xs);
    Ok((v, res))
}

/// Carrier crest speed at a fixed probe: the unwrapped analytic-signal phase
/// slope gives `omega`, the local wavevector (mean over the supplied states)
/// gives `k`, and `v_p = omega / k`. Successive states must be closer than
/// half a carrier period. Returns `(v_p, rms_phase_residual)`.
pub fn track_phase_velocity<R: Real>(states: &[FieldState<R>], lattice: &LatticeSpec, probe: f64) -> Result<(f64, f64)> {
    let ts = distinct_times(states)?;
    let j = lattice.nearest_site(probe);
    let dx = lattice.spacing();
    let mut phases = Vec::with_capacity(states.len());
    let mut k_sum = 0.0;
    let mut prev: Option<f64> = None;
    for s in states {
        let z = analytic_signal(&s.phi, lattice)?;
        let c = z[j];
        if !(c.norm_sqr().to_f64() > 0.0) {
            return Err(LabError::NoCarrier(format!("no carrier at probe {probe}")));
        }
        let raw = c.im.to_f64().atan2(c.re.to_f64());
        let ph = match prev {
            None => raw,
            Some(p) => p + (raw - p + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI,
        };
        prev = Some(ph);
        phases.push(ph);
        let n = lattice.num_points();
        let q = z[(j + 1) % n] * z[(j + n - 1) % n].conj();
        k_sum += q.im.to_f64().atan2(q.re.to_f64()) / (2.0 * dx);
    }
    let (slope, _, res) = linear_fit(&ts, &phases);
    let k = k_sum / states.len() as f64;
    Ok((-slope / k, res))
}

/// Fractions of `sum |phi_k|^2 + |pi_k|^2 / max(|omega_k|, m)^2` in the normal
/// and in the unstable band. Critical modes count as unstable.
pub fn band_energy_split<R: Real>(modes: &ModeState<R>, disp: &DispersionTable<R>) -> Result<(f64, f64)> {
    if modes.len() != disp.len() {
        return Err(LabError::LengthMismatch {
            expected: disp.len(),
            got: modes.len(),
        });
    }
    let m = R::from_f64(disp.mass());
    let mut normal = R::zero();
    let mut unstable = R::zero();
    for i in 0..modes.len() {
        let r = disp.rate(i);
        let w = if r > m { r } else { m };
        let mut weight = modes.phi_k[i].norm_sqr();
        if w.to_f64() > 0.0 {
            weight += modes.pi_k[i].norm_sqr() / (w * w);
        } else {
            weight += modes.pi_k[i].norm_sqr();
        }
        match disp.class(i) {
            ModeClass::Normal => normal += weight,
            _ => unstable += weight,
        }
    }
    let total = normal + unstable;
    if !(total.to_f64() > 0.0) {
        return Err(LabError::ZeroState);
    }
    Ok(((normal / total).to_f64(), (unstable / total).to_f64()))
}
