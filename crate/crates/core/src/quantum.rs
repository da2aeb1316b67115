//! Gaussian states of the decoupled lattice modes.
//!
//! # Storage
//!
//! Each mode keeps its means and covariance in a normal-form frame chosen by
//! its class, so that free evolution is a rotation, a pure squeeze or a shear
//! and never mixes numbers of very different size:
//!
//! ```text
//! normal   (w = omega):     a = sqrt(w) phi,  b = pi / sqrt(w)          rotation by omega dt
//! unstable (w = kappa):     u = (a + b)/sqrt2, v = (a - b)/sqrt2         u e^{kappa dt}, v e^{-kappa dt}
//! critical (w = regulator): a = sqrt(w) phi,  b = pi / sqrt(w)          a += w dt b
//! ```
//!
//! Every frame map has unit determinant (up to sign), so the uncertainty
//! product `V_phiphi V_pipi - V_phipi^2` equals the frame determinant, and
//! the vacuum is `1/2 I` in every frame. The `(phi, pi)` means and moments are
//! derived on demand.
//!
//! # Normalization
//!
//! Second moments are those of one real quadrature: with the lattice
//! transform of [`crate::lattice`], a conjugate pair `(k, -k)` is two real
//! oscillators `sqrt(2 dk) Re phi_k`, `sqrt(2 dk) Im phi_k`, each with the
//! moments stored here. The coherent overlap of two states with equal
//! covariance `V` and mean difference `D_k` is
//!
//! ```text
//! -ln |<a|b>| = 1/8 sum_k dk D_k^+ V_k^{-1} D_k
//!             = 1/4 sum_k dk (|w_k| |D phi_k|^2 + |D pi_k|^2 / |w_k|)   (vacuum covariance)
//! ```
//!
//! with all sums over every lattice mode. A smear `phi_f = int f(x) phi(x) dx`
//! with `f_hat(k) = int f(x) e^{-ikx} dx` (so `f_hat(0) = 1`) has variance
//! `(1 / 2 pi) sum_k dk |f_hat(k)|^2 V_phiphi(k)`.

use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::lattice::{
    classify_modes, default_critical_tolerance, evolve_modes, from_modes, to_modes, DispersionTable, FieldState,
    LatticeSpec, ModeClass, ModeState, OVERFLOW_LIMIT,
};
use crate::scalar::Real;
use crate::wavepacket::{build_wavepacket, truncate, TruncationSpec, WavepacketSpec};
use crate::DoubleDouble;

type Mat2 = [[f64; 2]; 2];

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;
const ZERO: Complex<f64> = Complex::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct ModeGaussian {
    class: ModeClass,
    /// frame frequency: omega, kappa or the critical regulator
    freq: f64,
    frame_mean: [Complex<f64>; 2],
    frame_cov: Mat2,
}

impl ModeGaussian {
    fn vacuum(class: ModeClass, freq: f64) -> Self {
        Self {
            class,
            freq,
            frame_mean: [ZERO; 2],
            frame_cov: [[0.5, 0.0], [0.0, 0.5]],
        }
    }

    pub fn class(&self) -> ModeClass {
        self.class
    }

    /// `|omega_k|` used by this mode (omega, kappa or the critical regulator).
    pub fn frequency(&self) -> f64 {
        self.freq
    }

    fn to_frame(&self, phi: Complex<f64>, pi: Complex<f64>) -> [Complex<f64>; 2] {
        let r = self.freq.sqrt();
        let a = phi * r;
        let b = pi / r;
        match self.class {
            ModeClass::Unstable => [(a + b) * SQRT_HALF, (a - b) * SQRT_HALF],
            _ => [a, b],
        }
    }

    fn from_frame(&self, f: [Complex<f64>; 2]) -> (Complex<f64>, Complex<f64>) {
        let (a, b) = match self.class {
            ModeClass::Unstable => ((f[0] + f[1]) * SQRT_HALF, (f[0] - f[1]) * SQRT_HALF),
            _ => (f[0], f[1]),
        };
        let r = self.freq.sqrt();
        (a / r, b * r)
    }

    /// Matrix taking frame coordinates back to `(phi, pi)`.
    fn inverse_frame_matrix(&self) -> Mat2 {
        let r = self.freq.sqrt();
        match self.class {
            ModeClass::Unstable => [[SQRT_HALF / r, SQRT_HALF / r], [SQRT_HALF * r, -SQRT_HALF * r]],
            _ => [[1.0 / r, 0.0], [0.0, r]],
        }
    }

    pub fn mean_phi(&self) -> Complex<f64> {
        self.from_frame(self.frame_mean).0
    }

    pub fn mean_pi(&self) -> Complex<f64> {
        self.from_frame(self.frame_mean).1
    }

    /// Centered `[[V_phiphi, V_phipi], [V_phipi, V_pipi]]`.
    pub fn second_moments(&self) -> Mat2 {
        let t = self.inverse_frame_matrix();
        congruence(&t, &self.frame_cov)
    }

    pub fn frame_covariance(&self) -> Mat2 {
        self.frame_cov
    }

    /// `V_phiphi V_pipi - V_phipi^2`, evaluated in the frame.
    pub fn uncertainty_product(&self) -> f64 {
        det(&self.frame_cov)
    }

    fn evolve(&mut self, dt: f64) {
        let p = self.freq * dt;
        let map: Mat2 = match self.class {
            ModeClass::Normal => {
                let (s, c) = p.sin_cos();
                [[c, s], [-s, c]]
            }
            ModeClass::Unstable => [[p.exp(), 0.0], [0.0, (-p).exp()]],
            ModeClass::Critical => [[1.0, p], [0.0, 1.0]],
        };
        let [x, y] = self.frame_mean;
        self.frame_mean = [x * map[0][0] + y * map[0][1], x * map[1][0] + y * map[1][1]];
        self.frame_cov = match self.class {
            // keep the squeeze exactly diagonal-preserving
            ModeClass::Unstable => {
                let c = self.frame_cov;
                [[c[0][0] * map[0][0] * map[0][0], c[0][1]], [c[1][0], c[1][1] * map[1][1] * map[1][1]]]
            }
            _ => congruence(&map, &self.frame_cov),
        };
    }

    fn is_bounded(&self) -> bool {
        let means = self.frame_mean.iter().all(|c| c.re.abs() <= OVERFLOW_LIMIT && c.im.abs() <= OVERFLOW_LIMIT);
        let cov = self.frame_cov.iter().flatten().all(|v| v.is_finite() && v.abs() <= OVERFLOW_LIMIT);
        means && cov && self.frame_mean.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `T C T^T`
fn congruence(t: &Mat2, c: &Mat2) -> Mat2 {
    let mut tc = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            tc[i][j] = t[i][0] * c[0][j] + t[i][1] * c[1][j];
        }
    }
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = tc[i][0] * t[j][0] + tc[i][1] * t[j][1];
        }
    }
    // symmetrize the rounding
    let off = 0.5 * (out[0][1] + out[1][0]);
    out[0][1] = off;
    out[1][0] = off;
    out
}

/// `x^+ C^{-1} x` for a complex 2-vector and a real symmetric positive `C`.
fn inverse_quadratic(c: &Mat2, x: &[Complex<f64>; 2]) -> f64 {
    let d = det(c);
    let q = |r0: f64, r1: f64| (c[1][1] * r0 * r0 - 2.0 * c[0][1] * r0 * r1 + c[0][0] * r1 * r1) / d;
    q(x[0].re, x[1].re) + q(x[0].im, x[1].im)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFieldState {
    pub time: f64,
    lattice: LatticeSpec,
    modes: Vec<ModeGaussian>,
}

/// Product of per-mode slowest-growth Gaussians: `V_phiphi = 1/(2w)`,
/// `V_pipi = w/2` with `w` = omega, kappa, or the critical regulator.
pub fn vacuum_state(lattice: &LatticeSpec, disp: &DispersionTable) -> Result<GaussianFieldState> {
    if disp.len() != lattice.num_points() {
        return Err(LabError::LengthMismatch {
            expected: lattice.num_points(),
            got: disp.len(),
        });
    }
    if !(disp.critical_frequency() > 0.0) && disp.count(ModeClass::Critical) > 0 {
        return Err(LabError::InvalidParameter(
            "critical modes need a positive regulator frequency".into(),
        ));
    }
    let modes = (0..disp.len())
        .map(|i| ModeGaussian::vacuum(disp.class(i), disp.abs_frequency(i)))
        .collect();
    Ok(GaussianFieldState {
        time: 0.0,
        lattice: *lattice,
        modes,
    })
}

impl GaussianFieldState {
    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn modes(&self) -> &[ModeGaussian] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mean_modes(&self) -> ModeState {
        let mut out = ModeState::zeros(self.len(), self.time);
        for (i, m) in self.modes.iter().enumerate() {
            let (p, q) = m.from_frame(m.frame_mean);
            out.phi_k[i] = p;
            out.pi_k[i] = q;
        }
        out
    }

    /// `<phi(x_j)>`, `<pi(x_j)>` on the lattice.
    pub fn mean_field(&self) -> Result<FieldState> {
        from_modes(&self.mean_modes(), &self.lattice)
    }

    pub fn min_uncertainty_product(&self) -> f64 {
        self.modes.iter().map(|m| m.uncertainty_product()).fold(f64::INFINITY, f64::min)
    }

    fn check_symmetric(&self, g: &[Complex<f64>], what: &str) -> Result<()> {
        if g.len() != self.len() {
            return Err(LabError::LengthMismatch {
                expected: self.len(),
                got: g.len(),
            });
        }
        let scale = g.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        let n = g.len();
        for i in 0..n {
            let j = (n - i) % n;
            let d = (g[i] - g[j].conj()).norm();
            if d > 1e-12 * scale {
                return Err(LabError::SymmetryViolation(format!(
                    "{what}: slot {i} and slot {j} differ from conjugates by {d:e}"
                )));
            }
        }
        Ok(())
    }

    /// Phase-space displacement `<phi_k> += g_phi`, `<pi_k> += g_pi`.
    pub fn displace(&self, g_phi: &[Complex<f64>], g_pi: &[Complex<f64>]) -> Result<Self> {
        self.check_symmetric(g_phi, "field displacement")?;
        self.check_symmetric(g_pi, "momentum displacement")?;
        let mut out = self.clone();
        for (i, m) in out.modes.iter_mut().enumerate() {
            let d = m.to_frame(g_phi[i], g_pi[i]);
            m.frame_mean[0] += d[0];
            m.frame_mean[1] += d[1];
        }
        Ok(out)
    }
}

/// Field displacement `<phi_k> += g(k)`; covariances unchanged.
pub fn coherent_displace(state: &GaussianFieldState, g: &[Complex<f64>]) -> Result<GaussianFieldState> {
    state.displace(g, &vec![ZERO; g.len()])
}

/// Free evolution by `dt` (any sign); means follow the classical mode map,
/// covariances its congruence.
pub fn evolve_gaussian(state: &GaussianFieldState, disp: &DispersionTable, dt: f64) -> Result<GaussianFieldState> {
    if disp.len() != state.len() {
        return Err(LabError::LengthMismatch {
            expected: state.len(),
            got: disp.len(),
        });
    }
    if !dt.is_finite() {
        return Err(LabError::InvalidParameter(format!("time step must be finite, got {dt}")));
    }
    let mut out = state.clone();
    out.time += dt;
    for (i, m) in out.modes.iter_mut().enumerate() {
        if m.class != disp.class(i) {
            return Err(LabError::InvalidParameter(format!(
                "mode {i} class differs between state and dispersion table"
            )));
        }
        m.evolve(dt);
        if !m.is_bounded() {
            return Err(LabError::InstabilityOverflow {
                mode: i,
                wavevector: disp.wavevector(i),
                kappa_dt: disp.kappa(i).map_or(0.0, |k| k * dt),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport {
    /// `-ln |<a|b>|`
    pub exponent: f64,
    pub normal_exponent: f64,
    /// unstable and critical modes
    pub unstable_exponent: f64,
}

impl OverlapReport {
    pub fn overlap(&self) -> f64 {
        (-self.exponent).exp()
    }
}

fn covariances_match(a: &ModeGaussian, b: &ModeGaussian) -> bool {
    let scale = a.frame_cov.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    a.class == b.class
        && a.frame_cov
            .iter()
            .flatten()
            .zip(b.frame_cov.iter().flatten())
            .all(|(x, y)| (x - y).abs() <= 1e-9 * scale)
}

/// `|<a|b>|` of two coherent states with equal covariances, in log form.
pub fn pairwise_overlap(a: &GaussianFieldState, b: &GaussianFieldState) -> Result<OverlapReport> {
    if a.len() != b.len() {
        return Err(LabError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let tol = 1e-12 * a.time.abs().max(b.time.abs()).max(1.0);
    if (a.time - b.time).abs() > tol {
        return Err(LabError::TimeMismatch(a.time, b.time));
    }
    let dk = a.lattice.dk();
    let mut normal = 0.0;
    let mut unstable = 0.0;
    for (i, (ma, mb)) in a.modes.iter().zip(&b.modes).enumerate() {
        if !covariances_match(ma, mb) {
            return Err(LabError::CovarianceMismatch(format!("mode {i} covariances differ")));
        }
        let d = [ma.frame_mean[0] - mb.frame_mean[0], ma.frame_mean[1] - mb.frame_mean[1]];
        let e = 0.125 * dk * inverse_quadratic(&ma.frame_cov, &d);
        match ma.class {
            ModeClass::Normal => normal += e,
            _ => unstable += e,
        }
    }
    Ok(OverlapReport {
        exponent: normal + unstable,
        normal_exponent: normal,
        unstable_exponent: unstable,
    })
}

/// `|<vac(t)|psi(t)>|` for a displaced vacuum; the vacuum is evolved to the
/// state's time first.
pub fn overlap_vacuum(state: &GaussianFieldState, disp: &DispersionTable) -> Result<OverlapReport> {
    let vac = vacuum_state(&state.lattice, disp)?;
    let vac = if state.time != 0.0 {
        evolve_gaussian(&vac, disp, state.time)?
    } else {
        vac
    };
    pairwise_overlap(&vac, state).map_err(|e| match e {
        LabError::CovarianceMismatch(s) => {
            LabError::CovarianceMismatch(format!("state is not a displaced vacuum: {s}"))
        }
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandQuadrature {
    /// plain mode sum with weight `dk`
    Riemann,
    /// product-integration weights on the unstable band that integrate the
    /// `1/kappa` edge singularity exactly
    EdgeCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmearedVariance {
    pub total: f64,
    pub normal: f64,
    pub unstable: f64,
}

/// Smearing profiles given by their transform `f_hat(k)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Smearing {
    /// normalized Gaussian of standard deviation `width`: `f_hat = exp(-k^2 width^2 / 2)`
    Gaussian { width: f64 },
    /// `f_hat = 1` for `|k| <= k_cut`, zero outside
    Band { k_cut: f64 },
}

impl Smearing {
    pub fn f_hat(&self, k: f64) -> f64 {
        match *self {
            Smearing::Gaussian { width } => (-0.5 * k * k * width * width).exp(),
            Smearing::Band { k_cut } => {
                if k.abs() <= k_cut {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sample(&self, lattice: &LatticeSpec) -> Vec<f64> {
        lattice.wavevectors().iter().map(|&k| self.f_hat(k)).collect()
    }
}

/// Variance of the smeared field at absolute time `t`; the state is evolved
/// there first if needed.
pub fn smeared_variance(
    state: &GaussianFieldState,
    disp: &DispersionTable,
    f_hat: &[f64],
    t: f64,
    quadrature: BandQuadrature,
) -> Result<SmearedVariance> {
    if f_hat.len() != state.len() {
        return Err(LabError::LengthMismatch {
            expected: state.len(),
            got: f_hat.len(),
        });
    }
    let evolved;
    let s = if t != state.time {
        evolved = evolve_gaussian(state, disp, t - state.time)?;
        &evolved
    } else {
        state
    };
    let dk = s.lattice.dk();
    let inv_2pi = 0.5 / std::f64::consts::PI;
    let mut normal = 0.0;
    let mut unstable = 0.0;
    for (i, m) in s.modes.iter().enumerate() {
        let v = f_hat[i] * f_hat[i] * m.second_moments()[0][0];
        match m.class {
            ModeClass::Normal => normal += dk * v,
            _ => {
                if quadrature == BandQuadrature::Riemann {
                    unstable += dk * v
                }
            }
        }
    }
    if quadrature == BandQuadrature::EdgeCorrected {
        if disp.count(ModeClass::Critical) > 0 {
            return Err(LabError::InvalidParameter(
                "edge-corrected quadrature needs a band without critical modes".into(),
            ));
        }
        let mut nodes: Vec<(f64, f64)> = s
            .modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.class == ModeClass::Unstable)
            .map(|(i, m)| {
                let v = f_hat[i] * f_hat[i] * m.second_moments()[0][0];
                (disp.wavevector(i), m.freq * v)
            })
            .collect();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ks: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let w = edge_weights(&ks, disp.mass())?;
        unstable = nodes.iter().zip(&w).map(|(n, w)| n.1 * w).sum();
    }
    Ok(SmearedVariance {
        total: inv_2pi * (normal + unstable),
        normal: inv_2pi * normal,
        unstable: inv_2pi * unstable,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Weights `W_n` with `sum_n W_n F(k_n) ~ int_{-m}^{m} F(k) / sqrt(m^2 - k^2) dk`
/// for smooth `F` sampled at ascending nodes strictly inside `(-m, m)`:
/// local cubic interpolation of `F`, integrated exactly against the weight
/// after `k = m cos(theta)`.
fn edge_weights(ks: &[f64], m: f64) -> Result<Vec<f64>> {
    let n = ks.len();
    if n < 4 {
        return Err(LabError::InvalidParameter(format!(
            "edge-corrected quadrature needs at least 4 unstable modes, got {n}"
        )));
    }
    let gl = gauss_legendre(16);
    let mut w = vec![0.0; n];
    let mut segment = |lo: f64, hi: f64, first: usize| {
        let stencil = &ks[first..first + 4];
        let (ta, tb) = ((hi / m).clamp(-1.0, 1.0).acos(), (lo / m).clamp(-1.0, 1.0).acos());
        let half = 0.5 * (tb - ta);
        let mid = 0.5 * (tb + ta);
        for &(x, gw) in &gl {
            let k = m * (mid + half * x).cos();
            for (a, &ka) in stencil.iter().enumerate() {
                let mut l = 1.0;
                for (b, &kb) in stencil.iter().enumerate() {
                    if a != b {
                        l *= (k - kb) / (ka - kb);
                    }
                }
                w[first + a] += gw * half * l;
            }
        }
    };
    segment(-m, ks[0], 0);
    for j in 0..n - 1 {
        let first = j.saturating_sub(1).min(n - 4);
        segment(ks[j], ks[j + 1], first);
    }
    segment(ks[n - 1], m, n - 4);
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservabilityThresholds {
    pub condition: f64,
    pub ratio: f64,
}

impl Default for ObservabilityThresholds {
    fn default() -> Self {
        Self {
            condition: 10.0,
            ratio: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityReport {
    pub t_obs: f64,
    pub amplitude: f64,
    /// `v_g T delta_k`
    pub separation_condition: f64,
    /// `(v_g - 1) T delta_k`
    pub lightcone_condition: f64,
    pub peak_position: f64,
    pub signal: f64,
    pub fluctuation: f64,
    pub ratio: f64,
    pub variance: SmearedVariance,
    /// exponent of the field-displaced overlap `1/4 sum dk |w| |g|^2` at this amplitude
    pub vacuum_exponent: f64,
    /// amplitude at which signal equals fluctuation
    pub crossing_amplitude: f64,
    pub crossing_exponent: f64,
    pub observable: bool,
}

/// Signal (smeared classical field of the truncated packet near
/// `x0 + v_g T`) against vacuum fluctuations of the same smear at `T`.
#[allow(clippy::too_many_arguments)]
pub fn observability_report(
    lattice: &LatticeSpec,
    spec: &WavepacketSpec,
    trunc: &TruncationSpec,
    m: f64,
    t_obs: f64,
    smearing: &Smearing,
    thresholds: ObservabilityThresholds,
) -> Result<ObservabilityReport> {
    if !(t_obs.is_finite() && t_obs >= 0.0) {
        return Err(LabError::InvalidParameter(format!("observation time must be non-negative, got {t_obs}")));
    }
    let vg = spec.group_velocity(m);
    let f_hat = smearing.sample(lattice);
    let unit = spec.with_amplitude(1.0);

    let dd_disp = classify_modes::<DoubleDouble>(lattice, m, default_critical_tolerance(m))?;
    let packet: FieldState<DoubleDouble> = build_wavepacket(lattice, &unit, m)?;
    let cut = truncate(&packet, trunc, lattice)?;
    let modes0 = to_modes(&cut, lattice)?;
    let mut modes_t = evolve_modes(&modes0, &dd_disp, t_obs)?;
    for (c, &f) in modes_t.phi_k.iter_mut().zip(&f_hat) {
        *c = c.scale(DoubleDouble::new(f));
    }
    let smeared = from_modes(&modes_t, lattice)?;
    let xp = spec.x0 + vg * t_obs;
    let reach = std::f64::consts::PI / spec.k0;
    let mut per_unit = 0.0f64;
    for j in 0..lattice.num_points() {
        let x = lattice.position(j);
        let dist = (x - xp).abs().min(lattice.domain_length() - (x - xp).abs());
        if dist <= reach {
            per_unit = per_unit.max(smeared.phi[j].to_f64().abs());
        }
    }

    let disp: DispersionTable = classify_modes(lattice, m, default_critical_tolerance(m))?;
    let vac = vacuum_state(lattice, &disp)?;
    let quadrature = if disp.count(ModeClass::Critical) == 0 && disp.count(ModeClass::Unstable) >= 4 {
        BandQuadrature::EdgeCorrected
    } else {
        BandQuadrature::Riemann
    };
    let variance = smeared_variance(&vac, &disp, &f_hat, t_obs, quadrature)?;
    let fluctuation = variance.total.sqrt();

    let g: Vec<Complex<f64>> = modes0.phi_k.iter().map(|c| Complex::new(c.re.to_f64(), c.im.to_f64())).collect();
    let unit_exponent = overlap_vacuum(&coherent_displace(&vac, &g)?, &disp)?.exponent;

    let signal = per_unit * spec.amplitude.abs();
    let ratio = signal / fluctuation;
    let separation_condition = vg * t_obs * spec.delta_k;
    let lightcone_condition = (vg - 1.0) * t_obs * spec.delta_k;
    let crossing_amplitude = fluctuation / per_unit;
    Ok(ObservabilityReport {
        t_obs,
        amplitude: spec.amplitude,
        separation_condition,
        lightcone_condition,
        peak_position: xp,
        signal,
        fluctuation,
        ratio,
        variance,
        vacuum_exponent: unit_exponent * spec.amplitude * spec.amplitude,
        crossing_amplitude,
        crossing_exponent: unit_exponent * crossing_amplitude * crossing_amplitude,
        observable: separation_condition >= thresholds.condition
            && lightcone_condition >= thresholds.condition
            && ratio >= thresholds.ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RldRow {
    pub time: f64,
    pub rl: OverlapReport,
    pub rd: OverlapReport,
    pub ld: OverlapReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RldReport {
    pub rows: Vec<RldRow>,
    /// `(-ln|<R|L>|)(-ln|<R|D>|)` at `t = 0`
    pub audit_lhs: f64,
    /// `(1/4 sum dk |D phi^{RD}_k| |D pi^{RL}_k|)^2`
    pub audit_rhs: f64,
    /// largest change of any pairwise overlap modulus across the rows
    pub max_overlap_drift: f64,
}

impl RldReport {
    pub fn audit_holds(&self) -> bool {
        self.audit_lhs >= self.audit_rhs * (1.0 - 1e-12)
    }
}

/// Three truncated coherent states `R = (phi, pi)`, `L = (phi, -pi)`,
/// `D = (-phi, pi)` and their pairwise overlaps at `t = 0` and each time.
pub fn rld_experiment(
    lattice: &LatticeSpec,
    spec: &WavepacketSpec,
    trunc: &TruncationSpec,
    m: f64,
    times: &[f64],
) -> Result<RldReport> {
    let packet: FieldState<DoubleDouble> = build_wavepacket(lattice, spec, m)?;
    let cut = to_modes(&truncate(&packet, trunc, lattice)?, lattice)?.to_f64();
    let disp: DispersionTable = classify_modes(lattice, m, default_critical_tolerance(m))?;
    rld_from_modes(lattice, &disp, &cut, times)
}

/// R/L/D experiment for an arbitrary classical displacement.
pub fn rld_from_modes(lattice: &LatticeSpec, disp: &DispersionTable, cut: &ModeState, times: &[f64]) -> Result<RldReport> {
    let vac = vacuum_state(lattice, disp)?;
    let neg = |v: &[Complex<f64>]| v.iter().map(|c| -c).collect::<Vec<_>>();
    let r = vac.displace(&cut.phi_k, &cut.pi_k)?;
    let l = vac.displace(&cut.phi_k, &neg(&cut.pi_k))?;
    let d = vac.displace(&neg(&cut.phi_k), &cut.pi_k)?;

    let mut rows = Vec::with_capacity(times.len() + 1);
    let mut ts = vec![0.0];
    ts.extend(times.iter().copied().filter(|&t| t != 0.0));
    for &t in &ts {
        let (rt, lt, dt) = if t == 0.0 {
            (r.clone(), l.clone(), d.clone())
        } else {
            (
                evolve_gaussian(&r, disp, t)?,
                evolve_gaussian(&l, disp, t)?,
                evolve_gaussian(&d, disp, t)?,
            )
        };
        rows.push(RldRow {
            time: t,
            rl: pairwise_overlap(&rt, &lt)?,
            rd: pairwise_overlap(&rt, &dt)?,
            ld: pairwise_overlap(&lt, &dt)?,
        });
    }
    let first = rows[0];
    let mut drift = 0.0f64;
    for row in &rows {
        for (a, b) in [(row.rl, first.rl), (row.rd, first.rd), (row.ld, first.ld)] {
            drift = drift.max((a.overlap() - b.overlap()).abs());
        }
    }
    let dk = lattice.dk();
    let cross: f64 = cut
        .phi_k
        .iter()
        .zip(&cut.pi_k)
        .map(|(p, q)| dk * (2.0 * p.norm()) * (2.0 * q.norm()))
        .sum();
    Ok(RldReport {
        rows,
        audit_lhs: first.rl.exponent * first.rd.exponent,
        audit_rhs: (0.25 * cross).powi(2),
        max_overlap_drift: drift,
    })
}
