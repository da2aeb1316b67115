//! Modified Bessel functions `I_0`, `I_1` on `[0, 700]`.
//!
//! Below [`SERIES_THRESHOLD`] the ascending series is summed (all terms
//! positive, so no cancellation). Above it the Hankel asymptotic expansion
//! `e^z / sqrt(2 pi z) * sum_k (-1)^k a_k(nu) / z^k` is truncated at its
//! smallest term, which at the threshold is already below `1e-20`.

use crate::error::{LabError, Result};

pub const SERIES_THRESHOLD: f64 = 25.0;
pub const MAX_ARGUMENT: f64 = 700.0;

fn check(z: f64) -> Result<()> {
    if !(0.0..=MAX_ARGUMENT).contains(&z) {
        return Err(LabError::BesselDomain(z));
    }
    Ok(())
}

fn series(order: u32, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = if order == 0 { 1.0 } else { 0.5 * z };
    let mut sum = term;
    let nu = order as f64;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + nu));
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

fn asymptotic(order: u32, z: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * z);
        if next.abs() >= term.abs() || next.abs() < 1e-18 * sum.abs() {
            if next.abs() < term.abs() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    // split the exponential to keep e^z / sqrt(z) representable near the top of the range
    let h = (0.5 * z).exp();
    h * (sum / (2.0 * std::f64::consts::PI * z).sqrt()) * h
}

/// `I_order(z)` for `order` in `{0, 1}`.
pub fn bessel_i(order: u32, z: f64) -> Result<f64> {
    if order > 1 {
        return Err(LabError::InvalidParameter(format!("Bessel order must be 0 or 1, got {order}")));
    }
    check(z)?;
    if z < SERIES_THRESHOLD {
        Ok(series(order, z))
    } else {
        Ok(asymptotic(order, z))
    }
}

pub fn bessel_i0(z: f64) -> Result<f64> {
    bessel_i(0, z)
}

pub fn bessel_i1(z: f64) -> Result<f64> {
    bessel_i(1, z)
}

/// `I_1(z) / z`, finite at the origin where it tends to `1/2`.
pub fn bessel_i1_over_z(z: f64) -> Result<f64> {
    check(z)?;
    if z < SERIES_THRESHOLD {
        let q = 0.25 * z * z;
        let mut term = 0.5;
        let mut sum = term;
        let mut k = 1.0;
        loop {
            term *= q / (k * (k + 1.0));
            sum += term;
            if term <= sum * 1e-17 {
                return Ok(sum);
            }
            k += 1.0;
        }
    }
    Ok(asymptotic(1, z) / z)
}
