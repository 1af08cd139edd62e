//! Jacobi elliptic functions via Landen transformations, supporting the
//! elliptic (Cauer) analog prototype.
//!
//! The recursions follow the classical descending-Landen scheme: the modulus
//! sequence k -> v1 -> v2 -> ... converges quadratically to zero, where the
//! elliptic functions degenerate to trigonometric ones. Arguments are in units
//! of the complete integral K(k), so `cde(u, k)` computes cd(u*K, k).

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::design::Zpk;

const LANDEN_TOL: f64 = 1e-15;

fn landen(k: f64) -> Vec<f64> {
    let mut seq = Vec::new();
    let mut k = k;
    while k > LANDEN_TOL {
        let kp = (1.0 - k * k).max(0.0).sqrt();
        k = (k / (1.0 + kp)).powi(2);
        seq.push(k);
    }
    seq
}

/// Complete elliptic integral of the first kind K(k), modulus convention.
#[cfg(test)]
fn complete_k(k: f64) -> f64 {
    landen(k).iter().fold(PI / 2.0, |acc, v| acc * (1.0 + v))
}

/// cd(u*K(k), k) for complex `u`.
fn cde(u: Complex64, k: f64) -> Complex64 {
    let mut w = (u * (PI / 2.0)).cos();
    for &v in landen(k).iter().rev() {
        w = (w * (1.0 + v)) / (w * w * v + 1.0);
    }
    w
}

/// sn(u*K(k), k) for complex `u`.
fn sne(u: Complex64, k: f64) -> Complex64 {
    let mut w = (u * (PI / 2.0)).sin();
    for &v in landen(k).iter().rev() {
        w = (w * (1.0 + v)) / (w * w * v + 1.0);
    }
    w
}

/// Inverse of `sne`: returns u with sn(u*K(k), k) = w.
fn asne(w: Complex64, k: f64) -> Complex64 {
    let vs = landen(k);
    let mut w = w;
    for (j, &v) in vs.iter().enumerate() {
        let prev = if j == 0 { k } else { vs[j - 1] };
        let root = (Complex64::new(1.0, 0.0) - w * w * (prev * prev)).sqrt();
        w = w * 2.0 / ((root + 1.0) * (1.0 + v));
    }
    w.asin() * (2.0 / PI)
}

/// Normalized elliptic low-pass prototype (passband edge at 1 rad/s) for even
/// order: zeros, poles, and gain such that the passband ripples between
/// 10^(-rp/20) and 1.
pub(super) fn elliptic_prototype(order: usize, rp_db: f64, rs_db: f64) -> Result<Zpk> {
    debug_assert!(order >= 2 && order % 2 == 0);
    if !(rp_db > 0.0) || !(rs_db > 0.0) {
        return Err(Error::InvalidInput(format!(
            "elliptic design needs positive ripple/attenuation, got rp={rp_db} dB rs={rs_db} dB"
        )));
    }
    let eps_p = (10f64.powf(0.1 * rp_db) - 1.0).sqrt();
    let eps_s = (10f64.powf(0.1 * rs_db) - 1.0).sqrt();
    let k1 = eps_p / eps_s;
    if k1 >= 1.0 {
        return Err(Error::DesignFailure(format!(
            "stopband attenuation ({rs_db} dB) must exceed passband ripple ({rp_db} dB)"
        )));
    }
    let k1p = (1.0 - k1 * k1).sqrt();
    let n = order as f64;
    let half = order / 2;

    // Degree equation solved for the selectivity modulus k.
    let mut kp = k1p.powi(order as i32);
    for i in 1..=half {
        let u = (2 * i - 1) as f64 / n;
        let s = sne(Complex64::new(u, 0.0), k1p).re;
        kp *= s.powi(4);
    }
    let k = (1.0 - kp * kp).max(0.0).sqrt();

    let j = Complex64::new(0.0, 1.0);
    let v0 = -j * asne(j / eps_p, k1) / n;

    let mut zeros = Vec::with_capacity(order);
    let mut poles = Vec::with_capacity(order);
    for i in 1..=half {
        let u = (2 * i - 1) as f64 / n;
        let zeta = cde(Complex64::new(u, 0.0), k).re;
        let z = j / (k * zeta);
        zeros.push(z);
        zeros.push(z.conj());
        let p = j * cde(Complex64::new(u, 0.0) - j * v0, k);
        poles.push(p);
        poles.push(p.conj());
    }

    let num: Complex64 = poles.iter().map(|p| -p).product();
    let den: Complex64 = zeros.iter().map(|z| -z).product();
    let gain = 10f64.powf(-rp_db / 20.0) * (num / den).re;
    Ok(Zpk { zeros, poles, gain })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_integral_matches_reference() {
        // K(k) reference values (Abramowitz & Stegun convention, modulus k).
        for (k, expect) in [
            (0.1, 1.57474556151736),
            (0.5, 1.6857503548126),
            (0.9, 2.28054913842277),
            (0.99, 3.35660052336119),
        ] {
            assert!((complete_k(k) - expect).abs() < 1e-12, "K({k})");
        }
    }

    #[test]
    fn jacobi_identities() {
        // sn(K) = 1, cd(0) = 1, and asne inverts sne on (0, 1).
        for k in [0.2, 0.7, 0.95] {
            let one = Complex64::new(1.0, 0.0);
            assert!((sne(one, k) - one).norm() < 1e-12);
            assert!((cde(Complex64::new(0.0, 0.0), k) - one).norm() < 1e-12);
            for u in [0.2, 0.7] {
                let w = sne(Complex64::new(u, 0.0), k);
                let back = asne(w, k);
                assert!((back.re - u).abs() < 1e-12, "u={u} k={k} got {back}");
            }
        }
    }

    #[test]
    fn prototype_matches_reference_order_four() {
        // ellipap(4, 1, 40) reference zeros/poles/gain.
        let zpk = elliptic_prototype(4, 1.0, 40.0).unwrap();
        let mut zeros: Vec<f64> = zpk.zeros.iter().map(|z| z.im).collect();
        zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect_z = [
            -3.5252874329960022,
            -1.6095504012251538,
            1.6095504012251538,
            3.5252874329960022,
        ];
        for (got, want) in zeros.iter().zip(expect_z.iter()) {
            assert!((got - want).abs() < 1e-9, "zero {got} vs {want}");
        }
        let mut poles = zpk.poles.clone();
        poles.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let expect_p = [
            Complex64::new(-0.10528126462117136, -0.9937108112087721),
            Complex64::new(-0.3642905958734215, -0.47860276764064974),
            Complex64::new(-0.3642905958734215, 0.47860276764064974),
            Complex64::new(-0.10528126462117136, 0.9937108112087721),
        ];
        for (got, want) in poles.iter().zip(expect_p.iter()) {
            assert!((got - want).norm() < 1e-9, "pole {got} vs {want}");
        }
        assert!((zpk.gain - 0.009999999999999997).abs() < 1e-12);
    }

    #[test]
    fn rejects_inverted_specs() {
        assert!(elliptic_prototype(4, 40.0, 1.0).is_err());
        assert!(elliptic_prototype(4, -1.0, 40.0).is_err());
    }
}
