//! Analog prototypes and the lowpass -> band-pass -> digital design chain.
//!
//! All designs go through the same route: normalized analog prototype
//! (poles/zeros/gain), band-pass transform at the prewarped edge frequencies,
//! bilinear transform, then pairing into second-order sections. Coefficients
//! stay in double precision end to end.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::elliptic::elliptic_prototype;
use super::{Biquad, FilterFamily, FilterSpec, SosCascade};

/// Zeros/poles/gain form of a transfer function.
pub(super) struct Zpk {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    pub gain: f64,
}

pub(super) fn design(spec: &FilterSpec, fs: f64) -> Result<SosCascade> {
    let proto = match spec.family {
        FilterFamily::Butterworth => butterworth_prototype(spec.order),
        FilterFamily::Chebyshev2 => chebyshev2_prototype(spec.order, spec.stopband_atten_db)?,
        FilterFamily::Elliptic => {
            elliptic_prototype(spec.order, spec.passband_ripple_db, spec.stopband_atten_db)?
        }
    };
    // Prewarp the band edges so the bilinear transform lands them exactly.
    let w1 = 2.0 * fs * (PI * spec.f_low / fs).tan();
    let w2 = 2.0 * fs * (PI * spec.f_high / fs).tan();
    let analog_bp = lowpass_to_bandpass(proto, (w1 * w2).sqrt(), w2 - w1);
    let digital = bilinear(analog_bp, fs);
    zpk_to_sos(digital)
}

/// Butterworth prototype: poles on the unit circle, no finite zeros.
fn butterworth_prototype(order: usize) -> Zpk {
    let n = order as i64;
    let poles = (0..order)
        .map(|i| {
            let m = (2 * i as i64) - n + 1;
            let theta = PI * m as f64 / (2.0 * n as f64);
            -Complex64::new(0.0, theta).exp()
        })
        .collect();
    Zpk {
        zeros: Vec::new(),
        poles,
        gain: 1.0,
    }
}

/// Chebyshev Type-II prototype, normalized so the stopband edge sits at
/// 1 rad/s with `atten_db` of equiripple attenuation beyond it. The passband
/// is maximally flat with unit gain at DC.
fn chebyshev2_prototype(order: usize, atten_db: f64) -> Result<Zpk> {
    if !(atten_db > 0.0) {
        return Err(Error::InvalidInput(format!(
            "stopband attenuation must be positive, got {atten_db} dB"
        )));
    }
    debug_assert!(order >= 2 && order % 2 == 0);
    let n = order as f64;
    let de = 1.0 / (10f64.powf(0.1 * atten_db) - 1.0).sqrt();
    let mu = (1.0 / de).asinh() / n;

    let mut zeros = Vec::with_capacity(order);
    let mut poles = Vec::with_capacity(order);
    for i in 0..order {
        let m = (2 * i as i64) - order as i64 + 1;
        let theta = PI * m as f64 / (2.0 * n);
        // zeros on the imaginary axis
        zeros.push(Complex64::new(0.0, 1.0 / theta.sin()));
        // Chebyshev-I pole warped then inverted
        let raw = -Complex64::new(0.0, theta).exp();
        let warped = Complex64::new(mu.sinh() * raw.re, mu.cosh() * raw.im);
        poles.push(1.0 / warped);
    }
    let num: Complex64 = poles.iter().map(|p| -p).product();
    let den: Complex64 = zeros.iter().map(|z| -z).product();
    Ok(Zpk {
        zeros,
        poles,
        gain: (num / den).re,
    })
}

/// s -> (s^2 + w0^2) / (bw * s): each prototype root splits into two, and
/// zeros at infinity map to zeros at DC.
fn lowpass_to_bandpass(proto: Zpk, w0: f64, bw: f64) -> Zpk {
    let degree = proto.poles.len() - proto.zeros.len();
    let transform = |roots: &[Complex64]| -> Vec<Complex64> {
        let mut out = Vec::with_capacity(roots.len() * 2);
        for &r in roots {
            let scaled = r * (bw / 2.0);
            let disc = (scaled * scaled - w0 * w0).sqrt();
            out.push(scaled + disc);
            out.push(scaled - disc);
        }
        out
    };
    let mut zeros = transform(&proto.zeros);
    zeros.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(degree));
    Zpk {
        zeros,
        poles: transform(&proto.poles),
        gain: proto.gain * bw.powi(degree as i32),
    }
}

/// Bilinear transform with gain bookkeeping; zeros at infinity map to z = -1.
fn bilinear(analog: Zpk, fs: f64) -> Zpk {
    let fs2 = 2.0 * fs;
    let map = |r: Complex64| (fs2 + r) / (fs2 - r);
    let mut num = Complex64::new(1.0, 0.0);
    for &z in &analog.zeros {
        num *= fs2 - z;
    }
    let mut den = Complex64::new(1.0, 0.0);
    for &p in &analog.poles {
        den *= fs2 - p;
    }
    let pad = analog.poles.len() - analog.zeros.len();
    let mut zeros: Vec<Complex64> = analog.zeros.iter().map(|&z| map(z)).collect();
    zeros.extend(std::iter::repeat(Complex64::new(-1.0, 0.0)).take(pad));
    Zpk {
        zeros,
        poles: analog.poles.iter().map(|&p| map(p)).collect(),
        gain: analog.gain * (num / den).re,
    }
}

/// One conjugate pair or a pair of real roots, represented so the resulting
/// quadratic has exactly real coefficients.
#[derive(Clone, Copy)]
enum RootPair {
    Conjugate(Complex64), // upper-half representative
    Reals(f64, f64),
}

impl RootPair {
    fn representative(&self) -> Complex64 {
        match *self {
            RootPair::Conjugate(z) => z,
            RootPair::Reals(a, b) => Complex64::new(0.5 * (a + b), 0.0),
        }
    }

    /// Monic quadratic 1 + c1 z^-1 + c2 z^-2 with these roots.
    fn quadratic(&self) -> (f64, f64) {
        match *self {
            RootPair::Conjugate(z) => (-2.0 * z.re, z.norm_sqr()),
            RootPair::Reals(a, b) => (-(a + b), a * b),
        }
    }

    fn max_radius(&self) -> f64 {
        match *self {
            RootPair::Conjugate(z) => z.norm(),
            RootPair::Reals(a, b) => a.abs().max(b.abs()),
        }
    }
}

/// Group a conjugate-closed root list into pairs. Real roots are paired
/// largest-with-smallest (this puts the Butterworth band-pass zeros at +1/-1
/// into each section).
fn pair_roots(roots: &[Complex64], what: &str) -> Result<Vec<RootPair>> {
    let mut reals: Vec<f64> = Vec::new();
    let mut upper: Vec<Complex64> = Vec::new();
    let mut lower: Vec<Complex64> = Vec::new();
    for &r in roots {
        let tol = 1e-8 * (1.0 + r.norm());
        if r.im.abs() <= tol {
            reals.push(r.re);
        } else if r.im > 0.0 {
            upper.push(r);
        } else {
            lower.push(r);
        }
    }
    if upper.len() != lower.len() || reals.len() % 2 != 0 {
        return Err(Error::DesignFailure(format!(
            "{what} do not form conjugate pairs ({} upper, {} lower, {} real)",
            upper.len(),
            lower.len(),
            reals.len()
        )));
    }
    upper.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let mut pairs = Vec::with_capacity(roots.len() / 2);
    for u in upper {
        let (idx, dist) = lower
            .iter()
            .enumerate()
            .map(|(i, l)| (i, (l.conj() - u).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .expect("lower list exhausted before upper");
        if dist > 1e-6 * (1.0 + u.norm()) {
            return Err(Error::DesignFailure(format!(
                "{what}: no conjugate partner for {u} (best distance {dist:e})"
            )));
        }
        lower.swap_remove(idx);
        pairs.push(RootPair::Conjugate(u));
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    while reals.len() >= 2 {
        let hi = reals.pop().expect("non-empty");
        let lo = reals.remove(0);
        pairs.push(RootPair::Reals(lo, hi));
    }
    Ok(pairs)
}

/// Pair zeros with their nearest poles, build biquads, sort sections by
/// ascending pole radius, and fold the overall gain into the first section.
fn zpk_to_sos(zpk: Zpk) -> Result<SosCascade> {
    if zpk.zeros.len() != zpk.poles.len() || zpk.poles.len() % 2 != 0 {
        return Err(Error::DesignFailure(format!(
            "expected an equal, even number of zeros and poles, got {} zeros / {} poles",
            zpk.zeros.len(),
            zpk.poles.len()
        )));
    }
    let pole_pairs = pair_roots(&zpk.poles, "poles")?;
    let mut zero_pairs = pair_roots(&zpk.zeros, "zeros")?;

    // Poles closest to the unit circle get first pick of the zeros.
    let mut pole_order: Vec<usize> = (0..pole_pairs.len()).collect();
    pole_order.sort_by(|&a, &b| {
        pole_pairs[b]
            .max_radius()
            .partial_cmp(&pole_pairs[a].max_radius())
            .unwrap()
    });

    let mut sections = Vec::with_capacity(pole_pairs.len());
    for &pi in &pole_order {
        let p = pole_pairs[pi];
        let rep = p.representative();
        let (zi, _) = zero_pairs
            .iter()
            .enumerate()
            .map(|(i, z)| (i, (z.representative() - rep).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .expect("zero pair list exhausted");
        let z = zero_pairs.swap_remove(zi);
        let (b1, b2) = z.quadratic();
        let (a1, a2) = p.quadratic();
        sections.push(Biquad {
            b0: 1.0,
            b1,
            b2,
            a1,
            a2,
        });
    }

    // Ascending pole radius for numerical robustness during application.
    sections.sort_by(|a, b| {
        a.max_pole_radius()
            .partial_cmp(&b.max_pole_radius())
            .unwrap()
    });
    if let Some(first) = sections.first_mut() {
        first.b0 *= zpk.gain;
        first.b1 *= zpk.gain;
        first.b2 *= zpk.gain;
    }
    SosCascade::new(sections)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev2_prototype_matches_reference() {
        // cheb2ap(4, 40) reference values.
        let zpk = chebyshev2_prototype(4, 40.0).unwrap();
        let mut zs: Vec<f64> = zpk.zeros.iter().map(|z| z.im).collect();
        zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in zs.iter().zip(
            [
                -2.613125929752753,
                -1.082392200292394,
                1.082392200292394,
                2.613125929752753,
            ]
            .iter(),
        ) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let mut ps = zpk.poles.clone();
        ps.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        let expect = [
            Complex64::new(-0.17116012188825785, -0.47610224689532044),
            Complex64::new(-0.5045370360501146, -0.24079048688074278),
            Complex64::new(-0.5045370360501146, 0.24079048688074278),
            Complex64::new(-0.17116012188825785, 0.47610224689532044),
        ];
        for (got, want) in ps.iter().zip(expect.iter()) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        assert!((zpk.gain - 0.009999999999999995).abs() < 1e-15);
        // DC gain of the prototype is exactly one
        let h0: Complex64 = zpk.zeros.iter().map(|z| -z).product::<Complex64>()
            / zpk.poles.iter().map(|p| -p).product::<Complex64>()
            * zpk.gain;
        assert!((h0.re - 1.0).abs() < 1e-12 && h0.im.abs() < 1e-12);
    }

    #[test]
    fn butterworth_prototype_poles_on_unit_circle() {
        let zpk = butterworth_prototype(4);
        assert!(zpk.zeros.is_empty());
        for p in &zpk.poles {
            assert!((p.norm() - 1.0).abs() < 1e-12);
            assert!(p.re < 0.0);
        }
    }

    #[test]
    fn real_root_pairing_spans_plus_minus_one() {
        let roots = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ];
        let pairs = pair_roots(&roots, "zeros").unwrap();
        assert_eq!(pairs.len(), 2);
        for p in pairs {
            let (c1, c2) = p.quadratic();
            assert!((c1 - 0.0).abs() < 1e-12);
            assert!((c2 + 1.0).abs() < 1e-12);
        }
    }
}
