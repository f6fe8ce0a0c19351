//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gamma via the Stirling series for ln Γ, after shifting the argument above
/// 20 with Γ(x + 1) = x Γ(x). Shares no code or coefficients with the
/// Lanczos implementation under test.
pub fn gamma_stirling(x: f64) -> f64 {
    assert!(x > 0.0);
    let mut shift = 1.0;
    let mut z = x;
    while z < 20.0 {
        shift *= z;
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2)
        + 1.0 / (1188.0 * z * z2 * z2 * z2 * z2);
    let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series;
    ln.exp() / shift
}

pub fn mantegna_sigma_oracle(beta: f64) -> f64 {
    let num = gamma_stirling(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = gamma_stirling((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    (num / den).powf(1.0 / beta)
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2) - 3.0
}

/// Nearest-rank percentile, `q` in (0, 1].
pub fn percentile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two-sided sign test against a median of zero, normal approximation.
/// Returns the z statistic; |z| < 3.2905 corresponds to p > 0.001.
pub fn sign_test_z(xs: &[f64]) -> f64 {
    let nonzero: Vec<f64> = xs.iter().copied().filter(|x| *x != 0.0).collect();
    let n = nonzero.len() as f64;
    let positive = nonzero.iter().filter(|x| **x > 0.0).count() as f64;
    (positive - n / 2.0) / (n / 4.0).sqrt()
}

pub const Z_P001: f64 = 3.2905;
