// Shared brute-force oracles.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tachyon_core::quantum::GaussianFieldState;
use tachyon_core::LatticeSpec;

pub fn random_symmetric(lat: &LatticeSpec, rng: &mut ChaCha8Rng, scale: f64) -> Vec<Complex<f64>> {
    let n = lat.num_points();
    let mut g = vec![Complex::new(0.0, 0.0); n];
    for i in 0..=n / 2 {
        let j = lat.conjugate_slot(i);
        let v = if i == j {
            Complex::new(rng.gen_range(-1.0..1.0), 0.0)
        } else {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        };
        g[i] = v * scale;
        g[j] = g[i].conj();
    }
    g
}

/// Covariance of `(sqrt(dx) phi_j, sqrt(dx) pi_j)` built site by site.
pub fn real_space_covariance(s: &GaussianFieldState) -> DMatrix<f64> {
    let lat = s.lattice();
    let n = lat.num_points();
    let dx = lat.spacing();
    let l = lat.domain_length();
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let r = lat.position(a) - lat.position(b);
            let mut acc = [0.0; 3];
            for (i, m) in s.modes().iter().enumerate() {
                let c = (lat.wavevector(i) * r).cos() / l;
                let sm = m.second_moments();
                acc[0] += c * sm[0][0];
                acc[1] += c * sm[0][1];
                acc[2] += c * sm[1][1];
            }
            v[(a, b)] = dx * acc[0];
            v[(a, n + b)] = dx * acc[1];
            v[(n + a, b)] = dx * acc[1];
            v[(n + a, n + b)] = dx * acc[2];
        }
    }
    v
}

/// `-ln |<a|b>|` for pure Gaussian states, `1/4 ln det(Va + Vb) + 1/4 d^T (Va + Vb)^{-1} d`.
pub fn brute_force_exponent(a: &GaussianFieldState, b: &GaussianFieldState) -> f64 {
    let n = a.len();
    let dx = a.lattice().spacing();
    let sum = real_space_covariance(a) + real_space_covariance(b);
    let fa = a.mean_field().unwrap();
    let fb = b.mean_field().unwrap();
    let mut d = nalgebra::DVector::zeros(2 * n);
    for j in 0..n {
        d[j] = dx.sqrt() * (fa.phi[j] - fb.phi[j]);
        d[n + j] = dx.sqrt() * (fa.pi[j] - fb.pi[j]);
    }
    let lu = sum.clone().lu();
    let x = lu.solve(&d).unwrap();
    0.25 * lu.determinant().ln() + 0.25 * d.dot(&x)
}
