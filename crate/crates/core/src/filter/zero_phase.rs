//! Forward-backward (zero-phase) application of an SOS cascade.
//!
//! The signal is extended at both ends with an odd (point-reflected) extension
//! of length 3 x the cascade state size (two states per section), each pass is
//! seeded with the steady-state step response scaled by its first sample, and
//! the extension is stripped after the backward pass. Net phase shift is zero
//! and the effective attenuation doubles in dB.

use crate::error::{Error, Result};

use super::SosCascade;

pub(super) fn sosfiltfilt(cascade: &SosCascade, x: &[f64]) -> Result<Vec<f64>> {
    let pad = 3 * 2 * cascade.sections().len();
    if x.len() <= pad {
        return Err(Error::InsufficientData(format!(
            "zero-phase filtering needs more than {pad} samples of signal \
             (edge padding is 3 x the filter state size), got {}",
            x.len()
        )));
    }
    let n = x.len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=pad {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }

    sosfilt_steady(cascade, &mut ext);
    ext.reverse();
    sosfilt_steady(cascade, &mut ext);
    ext.reverse();

    Ok(ext[pad..pad + n].to_vec())
}

/// Run the cascade over `buf` in place, section by section, with each
/// section's state initialized to its steady-state step response scaled by
/// the first input sample. Constant signals pass through without transient.
fn sosfilt_steady(cascade: &SosCascade, buf: &mut [f64]) {
    let x0 = buf[0];
    let mut cum_gain = 1.0;
    for sec in cascade.sections() {
        let g = sec.dc_gain();
        let scale = cum_gain * x0;
        // Steady state of the transposed direct-form II biquad under a unit
        // step: z1 = g - b0, z2 = b2 - a2 * g.
        let mut z1 = (g - sec.b0) * scale;
        let mut z2 = (sec.b2 - sec.a2 * g) * scale;
        for v in buf.iter_mut() {
            let x = *v;
            let y = sec.b0 * x + z1;
            z1 = sec.b1 * x - sec.a1 * y + z2;
            z2 = sec.b2 * x - sec.a2 * y;
            *v = y;
        }
        cum_gain *= g;
    }
}
