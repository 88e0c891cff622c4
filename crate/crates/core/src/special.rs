//! Riccati-Bessel functions of complex argument.
//!
//! `psi_l(z) = z j_l(z)` is the solution of the vacuum radial mode equation
//! regular at the origin; `xi_l(z) = z h_l^{(1)}(z)` the outgoing second
//! solution. With this pair the Wronskian `psi xi' - psi' xi` is the
//! constant `i`.
//!
//! `psi` uses a normalized downward recurrence; `xi` never becomes
//! recessive as the order grows, so it recurses upward unconditionally.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest order supported before the recurrences are considered untrusted.
pub const L_MAX: u32 = 64;

/// Overflow guard: `exp(|Im z|)` must stay representable with headroom for
/// the order-growth of `xi`.
const IM_LIMIT: f64 = 200.0;

/// Magnitude threshold for rescaling the downward recurrence.
const RESCALE_AT: f64 = 1e250;

/// Value and derivative of a Riccati-Bessel function at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiPair {
    pub value: Complex64,
    pub derivative: Complex64,
}

fn check_args(l: u32, z: Complex64) -> Result<()> {
    if z.norm() == 0.0 {
        return Err(Error::RangeError("argument must be nonzero".into()));
    }
    if z.im.abs() > IM_LIMIT {
        return Err(Error::RangeError(format!(
            "|Im z| = {} exceeds the overflow guard {IM_LIMIT}",
            z.im.abs()
        )));
    }
    if l > L_MAX {
        return Err(Error::RangeError(format!("order {l} exceeds L_MAX = {L_MAX}")));
    }
    Ok(())
}

/// `psi_l(z) = z j_l(z)` and its derivative.
pub fn psi(l: u32, z: Complex64) -> Result<RiccatiPair> {
    check_args(l, z)?;
    let psi0 = z.sin();
    let psim1 = z.cos(); // psi_{-1}, consistent with psi_l' = psi_{l-1} - (l/z) psi_l
    if l == 0 {
        return Ok(RiccatiPair { value: psi0, derivative: psim1 });
    }
    // Downward (Miller) recurrence from a buffer above max(l, |z|),
    // normalized against the closed forms at orders 0 and 1. Upward
    // recurrence is avoided entirely: for arguments with a large imaginary
    // part psi dominates xi at low orders, so rounding seeds an xi component
    // with an enormous coefficient that surfaces near the turning point.
    let start = l + 30 + z.norm().ceil() as u32;
    let mut above = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1e-30, 0.0);
    let mut at_l = Complex64::new(0.0, 0.0);
    let mut at_lm1 = Complex64::new(0.0, 0.0);
    let mut at_1 = Complex64::new(0.0, 0.0);
    for k in (1..=start).rev() {
        // produce index k-1
        let next = (2 * k + 1) as f64 / z * cur - above;
        above = cur;
        cur = next;
        let idx = k - 1;
        if idx == l {
            at_l = cur;
        }
        if idx + 1 == l {
            at_lm1 = cur;
        }
        if idx == 1 {
            at_1 = cur;
        }
        if cur.norm() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            above *= s;
            cur *= s;
            at_l *= s;
            at_lm1 *= s;
            at_1 *= s;
        }
    }
    // Bring the tracked values down to O(1) before dividing: complex
    // division squares the denominator magnitude internally and overflows
    // around 1e154.
    let inv = 1.0 / cur.norm().max(at_1.norm());
    let at_0 = cur * inv;
    let at_1 = at_1 * inv;
    let at_l = at_l * inv;
    let at_lm1 = at_lm1 * inv;
    let psi1 = psi0 / z - psim1;
    // Normalize against whichever reference order is farther from a zero.
    let factor = if at_0.norm() >= at_1.norm() {
        psi0 / at_0
    } else {
        psi1 / at_1
    };
    let value = factor * at_l;
    let below = factor * at_lm1;
    let derivative = below - (l as f64) / z * value;
    Ok(RiccatiPair { value, derivative })
}

/// `xi_l(z) = z h_l^{(1)}(z)` and its derivative; `xi_0(z) = -i e^{iz}`.
pub fn xi(l: u32, z: Complex64) -> Result<RiccatiPair> {
    check_args(l, z)?;
    let e = (Complex64::i() * z).exp();
    let mut prev = e; // xi_{-1}
    let mut cur = -Complex64::i() * e;
    for k in 0..l {
        let next = (2 * k + 1) as f64 / z * cur - prev;
        prev = cur;
        cur = next;
    }
    let derivative = prev - (l as f64) / z * cur;
    Ok(RiccatiPair { value: cur, derivative })
}

/// `|psi_l xi_l' - psi_l' xi_l - i|`; identically zero in exact arithmetic.
pub fn wronskian_defect(l: u32, z: Complex64) -> Result<f64> {
    let p = psi(l, z)?;
    let x = xi(l, z)?;
    Ok((p.value * x.derivative - p.derivative * x.value - Complex64::i()).norm())
}
