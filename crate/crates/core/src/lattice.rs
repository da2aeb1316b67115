//! Periodic 1-D lattice, discrete Fourier analysis and exact per-mode evolution
//! of the linearized field `phi_tt = phi_xx + m^2 phi`.
//!
//! # Conventions
//!
//! Sites sit at `x_j = -L/2 + j dx`, `j = 0..N`. Mode arrays are stored in FFT
//! order: storage slot `i` holds the signed index `n = i` for `i < N/2` and
//! `n = i - N` otherwise, with wavevector `k_n = 2 pi n / L`.
//!
//! The transform pair discretizes the continuum one with `dk = 2 pi / L`:
//!
//! ```text
//! phi(x_j) = (1/sqrt(2 pi)) sum_n dk exp(i k_n x_j) phi_n
//! phi_n    = (1/sqrt(2 pi)) sum_j dx exp(-i k_n x_j) phi(x_j)
//! ```
//!
//! so that `sum_j dx |phi_j|^2 = sum_n dk |phi_n|^2` holds exactly (Parseval),
//! and every mode sum elsewhere in the crate (energies, overlaps, variances)
//! carries the weight `dk`. All reductions run in ascending storage order.

use num_complex::Complex;

use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Amplitudes above this abort an evolution.
pub const OVERFLOW_LIMIT: f64 = 1e200;

const MAX_POINTS: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    num_points: usize,
    domain_length: f64,
    spacing: f64,
}

/// Builds an `N`-site periodic lattice of length `L_dom`.
///
/// `N` must be a power of two no smaller than 8 (the double-double transform is
/// radix-2).
pub fn build_lattice(num_points: usize, domain_length: f64) -> Result<LatticeSpec> {
    if num_points < 8 {
        return Err(LabError::InvalidLattice(format!(
            "need at least 8 points, got {num_points}"
        )));
    }
    if num_points > MAX_POINTS {
        return Err(LabError::InvalidLattice(format!(
            "{num_points} points exceeds the supported maximum {MAX_POINTS}"
        )));
    }
    if !num_points.is_power_of_two() {
        return Err(LabError::InvalidLattice(format!(
            "number of points must be a power of two, got {num_points}"
        )));
    }
    if !(domain_length.is_finite() && domain_length > 0.0) {
        return Err(LabError::InvalidLattice(format!(
            "domain length must be positive and finite, got {domain_length}"
        )));
    }
    Ok(LatticeSpec {
        num_points,
        domain_length,
        spacing: domain_length / num_points as f64,
    })
}

impl LatticeSpec {
    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.domain_length
    }

    pub fn x_min(&self) -> f64 {
        -0.5 * self.domain_length
    }

    pub fn position(&self, j: usize) -> f64 {
        self.x_min() + j as f64 * self.spacing
    }

    /// Site position evaluated in the working precision.
    pub fn position_in<R: Real>(&self, j: usize) -> R {
        let l = R::from_f64(self.domain_length);
        R::from_f64(-0.5 * self.domain_length) + R::from_usize(j) * l / R::from_usize(self.num_points)
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.position(j)).collect()
    }

    /// Signed mode index of storage slot `i`.
    pub fn mode_number(&self, i: usize) -> i64 {
        if i < self.num_points / 2 {
            i as i64
        } else {
            i as i64 - self.num_points as i64
        }
    }

    pub fn wavevector(&self, i: usize) -> f64 {
        self.mode_number(i) as f64 * self.dk()
    }

    pub fn wavevectors(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.wavevector(i)).collect()
    }

    /// Wavevector evaluated in the working precision.
    pub fn wavevector_in<R: Real>(&self, i: usize) -> R {
        let n = self.mode_number(i);
        let two_pi = R::pi() + R::pi();
        let kn = two_pi * R::from_f64(n.unsigned_abs() as f64) / R::from_f64(self.domain_length);
        if n < 0 {
            -kn
        } else {
            kn
        }
    }

    /// Storage slot of `-k` for slot `i`.
    pub fn conjugate_slot(&self, i: usize) -> usize {
        (self.num_points - i) % self.num_points
    }

    pub fn nyquist_slot(&self) -> usize {
        self.num_points / 2
    }

    pub fn nyquist_wavevector(&self) -> f64 {
        std::f64::consts::PI / self.spacing
    }

    /// Slot of the site nearest to `x` (periodic).
    pub fn nearest_site(&self, x: f64) -> usize {
        let u = ((x - self.x_min()) / self.spacing).round() as i64;
        u.rem_euclid(self.num_points as i64) as usize
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.num_points {
            return Err(LabError::LengthMismatch {
                expected: self.num_points,
                got,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    Normal,
    Unstable,
    Critical,
}

/// Per-mode classification under `omega_k^2 = k^2 - m^2`.
#[derive(Debug, Clone)]
pub struct DispersionTable<R: Real = f64> {
    mass: f64,
    critical_tolerance: f64,
    critical_frequency: f64,
    dk: f64,
    wavevectors: Vec<f64>,
    classes: Vec<ModeClass>,
    /// omega for normal modes, kappa for unstable ones, zero for critical ones
    rates: Vec<R>,
}

pub fn default_critical_tolerance(mass: f64) -> f64 {
    1e-12 * mass * mass
}

/// Classifies every lattice mode as normal (`k^2 - m^2 > eps`), unstable
/// (`m^2 - k^2 > eps`) or critical.
pub fn classify_modes<R: Real>(
    lattice: &LatticeSpec,
    mass: f64,
    critical_tolerance: f64,
) -> Result<DispersionTable<R>> {
    if !(mass.is_finite() && mass >= 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "mass must be finite and non-negative, got {mass}"
        )));
    }
    if !(critical_tolerance.is_finite() && critical_tolerance >= 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "critical tolerance must be non-negative, got {critical_tolerance}"
        )));
    }
    let m = R::from_f64(mass);
    let m2 = m * m;
    let n = lattice.num_points();
    let mut classes = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    for i in 0..n {
        let k = lattice.wavevector_in::<R>(i);
        let d = k * k - m2;
        let df = d.to_f64();
        if df > critical_tolerance {
            classes.push(ModeClass::Normal);
            rates.push(d.sqrt());
        } else if -df > critical_tolerance {
            classes.push(ModeClass::Unstable);
            rates.push((-d).sqrt());
        } else {
            classes.push(ModeClass::Critical);
            rates.push(R::zero());
        }
    }
    Ok(DispersionTable {
        mass,
        critical_tolerance,
        critical_frequency: mass,
        dk: lattice.dk(),
        wavevectors: lattice.wavevectors(),
        classes,
        rates,
    })
}

impl<R: Real> DispersionTable<R> {
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn critical_tolerance(&self) -> f64 {
        self.critical_tolerance
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn wavevector(&self, i: usize) -> f64 {
        self.wavevectors[i]
    }

    pub fn class(&self, i: usize) -> ModeClass {
        self.classes[i]
    }

    pub fn classes(&self) -> &[ModeClass] {
        &self.classes
    }

    pub fn omega(&self, i: usize) -> Option<R> {
        (self.classes[i] == ModeClass::Normal).then(|| self.rates[i])
    }

    pub fn kappa(&self, i: usize) -> Option<R> {
        (self.classes[i] == ModeClass::Unstable).then(|| self.rates[i])
    }

    /// `omega`, `kappa`, or zero for critical modes.
    pub fn rate(&self, i: usize) -> R {
        self.rates[i]
    }

    /// Frequency assigned to critical modes by the Gaussian-state code.
    pub fn critical_frequency(&self) -> f64 {
        self.critical_frequency
    }

    /// Replaces the critical-mode regulator (default: the mass).
    pub fn with_critical_frequency(mut self, w: f64) -> Self {
        self.critical_frequency = w;
        self
    }

    /// `|omega_k|` as used by overlaps: omega, kappa, or the critical regulator.
    pub fn abs_frequency(&self, i: usize) -> f64 {
        match self.classes[i] {
            ModeClass::Critical => self.critical_frequency,
            _ => self.rates[i].to_f64(),
        }
    }

    pub fn count(&self, class: ModeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState<R: Real = f64> {
    pub time: f64,
    pub phi: Vec<R>,
    pub pi: Vec<R>,
}

impl<R: Real> FieldState<R> {
    pub fn new(time: f64, phi: Vec<R>, pi: Vec<R>) -> Result<Self> {
        if phi.len() != pi.len() {
            return Err(LabError::LengthMismatch {
                expected: phi.len(),
                got: pi.len(),
            });
        }
        Ok(Self { time, phi, pi })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            time: 0.0,
            phi: vec![R::zero(); n],
            pi: vec![R::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn phi_f64(&self) -> Vec<f64> {
        self.phi.iter().map(|v| v.to_f64()).collect()
    }

    pub fn pi_f64(&self) -> Vec<f64> {
        self.pi.iter().map(|v| v.to_f64()).collect()
    }

    pub fn convert<S: Real>(&self) -> FieldState<S> {
        FieldState {
            time: self.time,
            phi: self.phi.iter().map(|v| S::from_f64(v.to_f64())).collect(),
            pi: self.pi.iter().map(|v| S::from_f64(v.to_f64())).collect(),
        }
    }

    pub fn max_abs_phi(&self) -> f64 {
        self.phi.iter().fold(0.0, |a, v| a.max(v.to_f64().abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.phi.iter().chain(&self.pi).all(|v| v.is_finite())
    }
}

impl FieldState<f64> {
    /// Lifts an `f64` state into another precision without rounding.
    pub fn lift<S: Real>(&self) -> FieldState<S> {
        self.convert()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeState<R: Real = f64> {
    pub time: f64,
    pub phi_k: Vec<Complex<R>>,
    pub pi_k: Vec<Complex<R>>,
}

impl<R: Real> ModeState<R> {
    pub fn zeros(n: usize, time: f64) -> Self {
        Self {
            time,
            phi_k: vec![Complex::new(R::zero(), R::zero()); n],
            pi_k: vec![Complex::new(R::zero(), R::zero()); n],
        }
    }

    pub fn len(&self) -> usize {
        self.phi_k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi_k.is_empty()
    }

    /// Largest violation of `phi_{-k} = conj(phi_k)` (and likewise for `pi`).
    pub fn reality_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            let j = (n - i) % n;
            for arr in [&self.phi_k, &self.pi_k] {
                let d = arr[i] - arr[j].conj();
                worst = worst.max(d.re.to_f64().abs()).max(d.im.to_f64().abs());
            }
        }
        worst
    }

    pub fn to_f64(&self) -> ModeState<f64> {
        let cv = |v: &Complex<R>| Complex::new(v.re.to_f64(), v.im.to_f64());
        ModeState {
            time: self.time,
            phi_k: self.phi_k.iter().map(cv).collect(),
            pi_k: self.pi_k.iter().map(cv).collect(),
        }
    }
}

fn parity_sign<R: Real>(lattice: &LatticeSpec, i: usize) -> R {
    // exp(-i k_n x_min) = (-1)^n because x_min = -L/2
    if lattice.mode_number(i).rem_euclid(2) == 0 {
        R::one()
    } else {
        -R::one()
    }
}

fn sqrt_two_pi<R: Real>() -> R {
    (R::pi() + R::pi()).sqrt()
}

/// Forward transform of one real array into mode amplitudes.
pub fn real_to_modes<R: Real>(values: &[R], lattice: &LatticeSpec) -> Result<Vec<Complex<R>>> {
    lattice.check_len(values.len())?;
    let mut buf: Vec<Complex<R>> = values.iter().map(|&v| Complex::new(v, R::zero())).collect();
    R::fft(&mut buf, false);
    let scale = R::from_f64(lattice.domain_length()) / R::from_usize(lattice.num_points()) / sqrt_two_pi::<R>();
    for (i, c) in buf.iter_mut().enumerate() {
        let s = scale * parity_sign::<R>(lattice, i);
        *c = Complex::new(c.re * s, c.im * s);
    }
    Ok(buf)
}

/// Inverse transform of an arbitrary (not necessarily conjugate-symmetric)
/// spectrum into complex site values.
pub fn modes_to_complex<R: Real>(modes: &[Complex<R>], lattice: &LatticeSpec) -> Result<Vec<Complex<R>>> {
    lattice.check_len(modes.len())?;
    let two_pi = R::pi() + R::pi();
    let dk = two_pi / R::from_f64(lattice.domain_length());
    let scale = dk / sqrt_two_pi::<R>();
    let mut buf: Vec<Complex<R>> = modes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let s = scale * parity_sign::<R>(lattice, i);
            Complex::new(c.re * s, c.im * s)
        })
        .collect();
    R::fft(&mut buf, true);
    Ok(buf)
}

/// Inverse transform; returns the real part (the imaginary part vanishes for
/// conjugate-symmetric input).
pub fn modes_to_real<R: Real>(modes: &[Complex<R>], lattice: &LatticeSpec) -> Result<Vec<R>> {
    Ok(modes_to_complex(modes, lattice)?.into_iter().map(|c| c.re).collect())
}

pub fn to_modes<R: Real>(state: &FieldState<R>, lattice: &LatticeSpec) -> Result<ModeState<R>> {
    lattice.check_len(state.pi.len())?;
    Ok(ModeState {
        time: state.time,
        phi_k: real_to_modes(&state.phi, lattice)?,
        pi_k: real_to_modes(&state.pi, lattice)?,
    })
}

pub fn from_modes<R: Real>(modes: &ModeState<R>, lattice: &LatticeSpec) -> Result<FieldState<R>> {
    lattice.check_len(modes.pi_k.len())?;
    Ok(FieldState {
        time: modes.time,
        phi: modes_to_real(&modes.phi_k, lattice)?,
        pi: modes_to_real(&modes.pi_k, lattice)?,
    })
}

/// Spectral derivative of order `order` of a real lattice function. The
/// Nyquist component is dropped for odd orders so the result stays real.
pub fn spectral_derivative<R: Real>(values: &[R], lattice: &LatticeSpec, order: u32) -> Result<Vec<R>> {
    let mut modes = real_to_modes(values, lattice)?;
    let nyq = lattice.nyquist_slot();
    for (i, c) in modes.iter_mut().enumerate() {
        if order % 2 == 1 && i == nyq {
            *c = Complex::new(R::zero(), R::zero());
            continue;
        }
        let k = lattice.wavevector_in::<R>(i);
        let mut f = Complex::new(R::one(), R::zero());
        for _ in 0..order {
            f = f * Complex::new(R::zero(), k);
        }
        *c = *c * f;
    }
    modes_to_real(&modes, lattice)
}

/// Exact evolution of every mode over `dt` (any sign).
///
/// Normal modes rotate with `omega`, unstable ones follow the continuation
/// `omega -> i kappa`, critical ones move freely (`phi += pi dt`).
pub fn evolve_modes<R: Real>(modes: &ModeState<R>, disp: &DispersionTable<R>, dt: f64) -> Result<ModeState<R>> {
    if modes.len() != disp.len() || modes.pi_k.len() != disp.len() {
        return Err(LabError::LengthMismatch {
            expected: disp.len(),
            got: modes.len(),
        });
    }
    if !dt.is_finite() {
        return Err(LabError::InvalidParameter(format!("time step must be finite, got {dt}")));
    }
    let t = R::from_f64(dt);
    let mut out = ModeState::zeros(modes.len(), modes.time + dt);
    for i in 0..modes.len() {
        let phi = modes.phi_k[i];
        let pi = modes.pi_k[i];
        let rate = disp.rate(i);
        let (a, b) = match disp.class(i) {
            ModeClass::Normal => {
                let (s, c) = (rate * t).sin_cos();
                (phi.scale(c) + pi.scale(s / rate), pi.scale(c) - phi.scale(rate * s))
            }
            ModeClass::Unstable => {
                let (ch, sh) = (rate * t).cosh_sinh();
                (phi.scale(ch) + pi.scale(sh / rate), pi.scale(ch) + phi.scale(rate * sh))
            }
            ModeClass::Critical => (phi + pi.scale(t), pi),
        };
        for v in [a.re, a.im, b.re, b.im] {
            let f = v.to_f64();
            if !(f.is_finite() && f.abs() <= OVERFLOW_LIMIT) {
                let kappa_dt = disp.kappa(i).map_or(0.0, |k| k.to_f64() * dt);
                return Err(LabError::InstabilityOverflow {
                    mode: i,
                    wavevector: disp.wavevector(i),
                    kappa_dt,
                });
            }
        }
        out.phi_k[i] = a;
        out.pi_k[i] = b;
    }
    Ok(out)
}

/// Discrete quadratic Hamiltonian `1/2 int dx (pi^2 + (d_x phi)^2 - m^2 phi^2)`.
///
/// The kinetic and mass terms are summed over sites; the gradient term uses
/// the spectral derivative through Parseval, `int (d_x phi)^2 = sum dk k^2 |phi_k|^2`.
/// Can be negative when the unstable band is populated.
pub fn quadratic_energy<R: Real>(state: &FieldState<R>, lattice: &LatticeSpec, mass: f64) -> Result<f64> {
    lattice.check_len(state.phi.len())?;
    lattice.check_len(state.pi.len())?;
    let m2 = R::from_f64(mass) * R::from_f64(mass);
    let mut site = R::zero();
    for (p, q) in state.phi.iter().zip(&state.pi) {
        site += *q * *q - m2 * *p * *p;
    }
    let site = site * R::from_f64(lattice.spacing());
    let phi_k = real_to_modes(&state.phi, lattice)?;
    let mut grad = R::zero();
    for (i, c) in phi_k.iter().enumerate() {
        let k = lattice.wavevector_in::<R>(i);
        grad += k * k * c.norm_sqr();
    }
    let grad = grad * R::from_f64(lattice.dk());
    Ok(((site + grad) * R::from_f64(0.5)).to_f64())
}

/// Mode-sum form of the same energy, `1/2 sum dk (|pi_k|^2 + (k^2 - m^2)|phi_k|^2)`,
/// together with the sum of absolute values (a scale for relative comparisons).
pub fn mode_energy<R: Real>(modes: &ModeState<R>, lattice: &LatticeSpec, mass: f64) -> (f64, f64) {
    let m2 = R::from_f64(mass) * R::from_f64(mass);
    let mut e = R::zero();
    let mut scale = R::zero();
    for i in 0..modes.len() {
        let k = lattice.wavevector_in::<R>(i);
        let w2 = k * k - m2;
        let term_pi = modes.pi_k[i].norm_sqr();
        let term_phi = w2 * modes.phi_k[i].norm_sqr();
        e += term_pi + term_phi;
        scale += term_pi + term_phi.abs();
    }
    let half_dk = R::from_f64(0.5 * lattice.dk());
    ((e * half_dk).to_f64(), (scale * half_dk).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;
    use std::f64::consts::PI;

    #[test]
    fn lattice_tables() {
        let lat = build_lattice(8, 8.0).unwrap();
        assert_eq!(lat.spacing(), 1.0);
        let ks: Vec<i64> = (0..8).map(|i| lat.mode_number(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((lat.wavevector(4) + PI).abs() < 1e-15);
        assert!((lat.wavevector(5) + 0.75 * PI).abs() < 1e-15);

        let lat = build_lattice(4096, 400.0).unwrap();
        assert!((lat.dk() - 0.015_707_963_267_948_967).abs() < 1e-17);
        assert_eq!(lat.spacing() * 4096.0, 400.0);
    }

    #[test]
    fn lattice_rejects_bad_sizes() {
        assert!(build_lattice(0, 1.0).is_err());
        assert!(build_lattice(4, 1.0).is_err());
        assert!(build_lattice(12, 1.0).is_err());
        assert!(build_lattice(16, 0.0).is_err());
        assert!(build_lattice(16, -3.0).is_err());
        assert!(build_lattice(16, f64::NAN).is_err());
    }

    #[test]
    fn wavevectors_symmetric_except_nyquist() {
        let lat = build_lattice(32, 10.0).unwrap();
        for i in 0..32 {
            if i == lat.nyquist_slot() {
                continue;
            }
            let j = lat.conjugate_slot(i);
            assert_eq!(lat.wavevector(i), -lat.wavevector(j));
        }
    }

    #[test]
    fn classification_examples() {
        // L chosen so that k = 2, 0.6 and 1 are lattice modes: k_n = n/4
        let lat = build_lattice(64, 8.0 * PI).unwrap();
        let disp: DispersionTable = classify_modes(&lat, 1.0, default_critical_tolerance(1.0)).unwrap();
        let slot = |k: f64| (0..64).find(|&i| (lat.wavevector(i) - k).abs() < 1e-12).unwrap();
        let i2 = slot(2.0);
        assert_eq!(disp.class(i2), ModeClass::Normal);
        assert!((disp.omega(i2).unwrap() - 3f64.sqrt()).abs() < 1e-14);
        let i1 = slot(1.0);
        assert_eq!(disp.class(i1), ModeClass::Critical);
        assert_eq!(disp.rate(i1), 0.0);

        let lat = build_lattice(64, 10.0 * PI).unwrap(); // k_n = n/5
        let disp: DispersionTable = classify_modes(&lat, 1.0, default_critical_tolerance(1.0)).unwrap();
        let i = (0..64).find(|&i| (lat.wavevector(i) - 0.6).abs() < 1e-12).unwrap();
        assert_eq!(disp.class(i), ModeClass::Unstable);
        assert!((disp.kappa(i).unwrap() - 0.8).abs() < 1e-14);
        for i in 0..64 {
            assert!(disp.rate(i) >= 0.0);
        }
    }

    #[test]
    fn cosine_has_two_lines() {
        let lat = build_lattice(64, 2.0 * PI).unwrap();
        let phi: Vec<f64> = lat.positions().iter().map(|&x| (3.0 * x).cos()).collect();
        let s = FieldState::new(0.0, phi, vec![0.0; 64]).unwrap();
        let m = to_modes(&s, &lat).unwrap();
        for i in 0..64 {
            let k = lat.wavevector(i);
            let mag = m.phi_k[i].norm();
            if (k.abs() - 3.0).abs() < 1e-12 {
                // cos(3x) = (e^{3ix} + e^{-3ix})/2 and phi = (1/sqrt(2pi)) sum dk e^{ikx} phi_k
                assert!((mag - (2.0 * PI).sqrt() / 2.0 / lat.dk()).abs() < 1e-12);
            } else {
                assert!(mag < 1e-12, "k={k} mag={mag}");
            }
        }
        let zero = to_modes(&FieldState::<f64>::zeros(64), &lat).unwrap();
        assert!(zero.phi_k.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn parseval_holds() {
        let lat = build_lattice(128, 17.0).unwrap();
        let phi: Vec<f64> = (0..128).map(|j| ((j * j) as f64 * 0.013).sin()).collect();
        let m = real_to_modes(&phi, &lat).unwrap();
        let real: f64 = phi.iter().map(|v| v * v).sum::<f64>() * lat.spacing();
        let spec: f64 = m.iter().map(|c| c.norm_sqr()).sum::<f64>() * lat.dk();
        assert!((real - spec).abs() < 1e-12 * real);
    }

    #[test]
    fn evolution_examples() {
        let lat = build_lattice(64, 8.0 * PI).unwrap();
        let disp: DispersionTable = classify_modes(&lat, 1.0, default_critical_tolerance(1.0)).unwrap();
        let i2 = (0..64).find(|&i| (lat.wavevector(i) - 2.0).abs() < 1e-12).unwrap();
        let i1 = (0..64).find(|&i| (lat.wavevector(i) - 1.0).abs() < 1e-12).unwrap();
        let i0 = 0; // k = 0, kappa = 1
        let mut m = ModeState::zeros(64, 0.0);
        m.phi_k[i2] = Complex::new(0.3, -0.2);
        m.pi_k[i2] = Complex::new(0.1, 0.5);
        m.phi_k[i0] = Complex::new(1.0, 0.0);
        m.pi_k[i1] = Complex::new(1.0, 0.0);

        let period = 2.0 * PI / 3f64.sqrt();
        let e = evolve_modes(&m, &disp, period).unwrap();
        assert!((e.phi_k[i2] - m.phi_k[i2]).norm() < 1e-14);
        assert!((e.pi_k[i2] - m.pi_k[i2]).norm() < 1e-14);

        let e = evolve_modes(&m, &disp, 1.0).unwrap();
        assert!((e.phi_k[i0].re - 1.543_080_634_815_243_7).abs() < 1e-15);
        assert!((e.pi_k[i0].re - 1.175_201_193_643_801_4).abs() < 1e-15);

        let e = evolve_modes(&m, &disp, 3.0).unwrap();
        assert_eq!(e.phi_k[i1], Complex::new(3.0, 0.0));
        assert_eq!(e.pi_k[i1], Complex::new(1.0, 0.0));
        // untouched modes stay exactly zero
        for i in 0..64 {
            if i != i0 && i != i1 && i != i2 {
                assert_eq!(e.phi_k[i], Complex::new(0.0, 0.0));
                assert_eq!(e.pi_k[i], Complex::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn overflow_guard_names_the_mode() {
        let lat = build_lattice(16, 16.0).unwrap();
        let disp: DispersionTable = classify_modes(&lat, 1.0, default_critical_tolerance(1.0)).unwrap();
        let mut m = ModeState::zeros(16, 0.0);
        m.phi_k[0] = Complex::new(1.0, 0.0);
        match evolve_modes(&m, &disp, 500.0) {
            Err(LabError::InstabilityOverflow { mode, kappa_dt, .. }) => {
                assert_eq!(mode, 0);
                assert!((kappa_dt - 500.0).abs() < 1e-9);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn energy_of_zero_field_is_zero() {
        let lat = build_lattice(32, 10.0).unwrap();
        assert_eq!(quadratic_energy(&FieldState::<f64>::zeros(32), &lat, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn double_double_pipeline_matches_f64() {
        let lat = build_lattice(64, 20.0).unwrap();
        let phi: Vec<f64> = lat.positions().iter().map(|&x| (-x * x / 4.0).exp() * (2.0 * x).cos()).collect();
        let s = FieldState::new(0.0, phi.clone(), vec![0.0; 64]).unwrap();
        let a = to_modes(&s, &lat).unwrap();
        let b = to_modes(&s.lift::<DoubleDouble>(), &lat).unwrap().to_f64();
        for (x, y) in a.phi_k.iter().zip(&b.phi_k) {
            assert!((x - y).norm() < 1e-14);
        }
        let back = from_modes(&to_modes(&s.lift::<DoubleDouble>(), &lat).unwrap(), &lat).unwrap();
        for (x, y) in back.phi.iter().zip(&phi) {
            assert!((*x - DoubleDouble::new(*y)).abs().hi() < 1e-30);
        }
    }
}
