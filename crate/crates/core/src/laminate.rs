//! Two-phase isotropic micro-structure whose radial homogenized limit is the
//! anisotropic reference cloak.
//!
//! On the cloak annulus `(1, 2)` the micro-structure alternates between two
//! positive scalar phases `alpha(s)` and `beta(s)` in the fast radial
//! variable. The phases are pinned by two conditions: their arithmetic mean
//! equals the tangential eigenvalue `1/b` of the reference tensor and their
//! harmonic mean equals its radial eigenvalue `(s-a)^2/(b s^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{
    delta_factor, CloakGeometry, HiddenObject, InnerShellMode, RadialMedium, RadialTensor,
    Segment, TensorProfile,
};

/// Phase amplitudes of the laminate at slow radius `s`, `alpha >= beta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePair {
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
}

/// Solve the mean conditions for the phase amplitudes at slow radius `s`.
///
/// Eliminating one unknown turns the pair (arithmetic mean, harmonic mean) =
/// (1/b, (s-a)^2/(b s^2)) into the quadratic
/// `x^2 - (2/b) x + (s-a)^2/(b^2 s^2) = 0` (root sum twice the arithmetic
/// mean, root product harmonic mean times 1/b).
pub fn solve_phase_pair(s: f64, geom: &CloakGeometry) -> Result<PhasePair> {
    if !(1.0..=2.0).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "phase pair only defined for s in [1, 2], got {s}"
        )));
    }
    let sum = 2.0 / geom.b;
    let d = s - geom.a;
    let product = d * d / (geom.b * geom.b * s * s);
    let discriminant = sum * sum - 4.0 * product;
    if discriminant <= 0.0 {
        return Err(Error::InfeasibleLaminate { s, discriminant });
    }
    let root = discriminant.sqrt();
    let alpha = 0.5 * (sum + root);
    let beta = product / alpha;
    Ok(PhasePair { alpha, beta, s })
}

/// The micro-structure value at slow radius `s` and fast variable `t`
/// (periodic with period 1; the alpha phase occupies `frac(t) < 1/2`).
pub fn gamma_cell(s: f64, t: f64, geom: &CloakGeometry, mode: InnerShellMode) -> Result<f64> {
    if !(s > 0.0 && s <= 3.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma_cell radius must lie in (0, 3], got {s}"
        )));
    }
    if s > 2.0 {
        Ok(1.0)
    } else if s > 1.0 {
        let pair = solve_phase_pair(s, geom)?;
        let frac = t.rem_euclid(1.0);
        Ok(if frac < 0.5 { pair.alpha } else { pair.beta })
    } else if s > 0.5 {
        Ok(mode.inner_scalar(geom.rho))
    } else {
        Ok(1.0)
    }
}

/// One isotropic shell of the discretized micro-structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub r_inner: f64,
    pub r_outer: f64,
    pub eps: Complex64,
    pub mu: Complex64,
    /// The micro-structure factor of this shell (media divided by their
    /// object/conductive prefactors).
    pub gamma: f64,
}

/// Finite-n concentric-shell discretization of the micro-structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub shells: Vec<Shell>,
    pub n: u32,
    pub geom: CloakGeometry,
    pub delta: f64,
    pub omega: f64,
}

/// Build the n-th micro-structure stack. The cloak annulus `(1, 2)` is tiled
/// by n periods of width 1/n, two shells per period; phase amplitudes are
/// sampled at the period midpoint so the per-period means match the
/// homogenization targets exactly there.
pub fn build_stack(
    n: u32,
    geom: &CloakGeometry,
    delta: f64,
    omega: f64,
    object: &HiddenObject,
    mode: InnerShellMode,
) -> Result<LayerStack> {
    if n < 1 {
        return Err(Error::InvalidParameter("stack index n must be >= 1".into()));
    }
    if omega <= 0.0 || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    object.validate()?;

    let dfac = delta_factor(delta);
    let mut shells = Vec::with_capacity(2 * n as usize + 4);

    // Core shells: gamma = 1, prefactors from the hidden object.
    let mut lo = 0.0;
    let mut core_radii = object.interior_breakpoints();
    core_radii.push(0.5);
    for hi in core_radii {
        let (ea, ma) = object.at(0.5 * (lo + hi));
        shells.push(Shell {
            r_inner: lo,
            r_outer: hi,
            eps: dfac * ea,
            mu: ma,
            gamma: 1.0,
        });
        lo = hi;
    }

    // Conductive shell (1/2, 1): constant phase, phi3 = rho^-2.
    let g = mode.inner_scalar(geom.rho);
    let phi3 = Complex64::new(1.0, 1.0 / (geom.rho * geom.rho * omega));
    shells.push(Shell {
        r_inner: 0.5,
        r_outer: 1.0,
        eps: dfac * phi3 * g,
        mu: Complex64::new(g, 0.0),
        gamma: g,
    });

    // Laminated annulus (1, 2): n periods, two phases per period.
    let period = 1.0 / n as f64;
    for p in 0..n {
        let s_lo = 1.0 + p as f64 * period;
        let s_mid = s_lo + 0.5 * period;
        let pair = solve_phase_pair(s_mid, geom)?;
        for (phase, gamma) in [(0u8, pair.alpha), (1u8, pair.beta)] {
            let r_inner = s_lo + 0.5 * period * phase as f64;
            let r_outer = r_inner + 0.5 * period;
            shells.push(Shell {
                r_inner,
                r_outer,
                eps: dfac * gamma,
                mu: Complex64::new(gamma, 0.0),
                gamma,
            });
        }
    }

    // Matching annulus [2, 3].
    shells.push(Shell {
        r_inner: 2.0,
        r_outer: 3.0,
        eps: dfac,
        mu: Complex64::new(1.0, 0.0),
        gamma: 1.0,
    });

    Ok(LayerStack { shells, n, geom: *geom, delta, omega })
}

impl LayerStack {
    /// View as a piecewise-constant radial medium for the mode solver.
    pub fn to_radial_medium(&self) -> RadialMedium {
        RadialMedium {
            segments: self
                .shells
                .iter()
                .map(|sh| Segment {
                    r_lo: sh.r_inner,
                    r_hi: sh.r_outer,
                    eps: TensorProfile::Constant(RadialTensor::isotropic(sh.eps)),
                    mu: TensorProfile::Constant(RadialTensor::isotropic(sh.mu)),
                })
                .collect(),
            omega: self.omega,
        }
    }

    /// Shells within the laminated annulus (1, 2).
    pub fn annulus_shells(&self) -> impl Iterator<Item = &Shell> {
        self.shells
            .iter()
            .filter(|sh| sh.r_inner >= 1.0 - 1e-12 && sh.r_outer <= 2.0 + 1e-12)
    }
}

/// Layer-thickness-weighted arithmetic and harmonic means of the
/// micro-structure factor over a window `(s_lo, s_hi)`.
///
/// The window must not span the fixed region boundaries 1/2, 1, 2 or any
/// hidden-object breakpoint, where the slow prefactors jump.
pub fn means_of_stack(stack: &LayerStack, s_lo: f64, s_hi: f64) -> Result<(f64, f64)> {
    if !(s_lo >= 0.0 && s_hi <= 3.0 && s_lo < s_hi) {
        return Err(Error::InvalidParameter(format!(
            "window must satisfy 0 <= s_lo < s_hi <= 3, got ({s_lo}, {s_hi})"
        )));
    }
    let mut boundaries = vec![0.5, 1.0, 2.0];
    for sh in &stack.shells {
        if sh.r_outer < 0.5 {
            boundaries.push(sh.r_outer);
        }
    }
    for bd in boundaries {
        if s_lo < bd - 1e-12 && s_hi > bd + 1e-12 {
            return Err(Error::WindowSpansBoundary(s_lo, s_hi));
        }
    }
    let mut weight = 0.0;
    let mut arith = 0.0;
    let mut harm = 0.0;
    for sh in &stack.shells {
        let lo = sh.r_inner.max(s_lo);
        let hi = sh.r_outer.min(s_hi);
        if hi > lo {
            let w = hi - lo;
            weight += w;
            arith += w * sh.gamma;
            harm += w / sh.gamma;
        }
    }
    Ok((arith / weight, weight / harm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(rho: f64) -> CloakGeometry {
        CloakGeometry::new(rho).unwrap()
    }

    #[test]
    fn phase_pair_reference_point() {
        // Roots of x^2 - 3.5 x + 0.5625 at s = 1.5, rho = 1/4.
        let pair = solve_phase_pair(1.5, &geom(0.25)).unwrap();
        assert!((pair.alpha - 3.33113883008419).abs() < 1e-12);
        assert!((pair.beta - 0.16886116991581025).abs() < 1e-12);
    }

    #[test]
    fn phase_pair_mean_conditions() {
        for &rho in &[0.5, 0.4, 0.25, 0.1, 0.05] {
            let g = geom(rho);
            for i in 0..=200 {
                let s = 1.0 + i as f64 / 200.0;
                let pair = solve_phase_pair(s, &g).unwrap();
                assert!(pair.alpha >= pair.beta && pair.beta > 0.0);
                let am = 0.5 * (pair.alpha + pair.beta);
                let hm = 2.0 * pair.alpha * pair.beta / (pair.alpha + pair.beta);
                let am_target = 1.0 / g.b;
                let hm_target = (s - g.a).powi(2) / (g.b * s * s);
                assert!((am - am_target).abs() / am_target < 1e-12);
                assert!((hm - hm_target).abs() / hm_target < 1e-12);
                // AM > HM strictly: (s-a)^2/s^2 < 1 on the annulus since a > 0.
                assert!(am > hm);
            }
        }
    }

    #[test]
    fn phase_pair_endpoint_means() {
        let g = geom(0.25);
        let pair = solve_phase_pair(1.0, &g).unwrap();
        let am = 0.5 * (pair.alpha + pair.beta);
        let hm = 2.0 * pair.alpha * pair.beta / (pair.alpha + pair.beta);
        assert!((am - 1.75).abs() < 1e-12);
        assert!((hm - 1.0 / 28.0).abs() < 1e-12);
    }

    #[test]
    fn feasibility_grid() {
        // Discriminant stays strictly positive on a 200 x 20 (s, rho) grid.
        for j in 0..20 {
            let rho = 0.5 * (j as f64 + 1.0) / 20.0;
            let g = geom(rho);
            for i in 0..=200 {
                let s = 1.0 + i as f64 / 200.0;
                let d = s - g.a;
                let disc = (4.0 / (g.b * g.b)) * (1.0 - d * d / (s * s));
                assert!(disc > 0.0);
                assert!(solve_phase_pair(s, &g).is_ok());
            }
        }
    }

    #[test]
    fn gamma_cell_regions() {
        let g = geom(0.25);
        let m = InnerShellMode::PaperLiteral;
        assert_eq!(gamma_cell(2.5, 0.37, &g, m).unwrap(), 1.0);
        assert_eq!(gamma_cell(0.75, 0.9, &g, m).unwrap(), 4.0);
        assert_eq!(gamma_cell(0.3, 0.1, &g, m).unwrap(), 1.0);
        assert_eq!(
            gamma_cell(0.75, 0.0, &g, InnerShellMode::ComputedPushforward).unwrap(),
            0.25
        );
        assert!((gamma_cell(1.5, 0.25, &g, m).unwrap() - 3.33113883008419).abs() < 1e-12);
        assert!((gamma_cell(1.5, 0.75, &g, m).unwrap() - 0.16886116991581025).abs() < 1e-12);
        // Periodicity in the fast variable.
        assert_eq!(
            gamma_cell(1.5, 0.25, &g, m).unwrap(),
            gamma_cell(1.5, 7.25, &g, m).unwrap()
        );
        assert!(gamma_cell(0.0, 0.0, &g, m).is_err());
        assert!(gamma_cell(3.5, 0.0, &g, m).is_err());
    }

    #[test]
    fn stack_shell_counts() {
        let g = geom(0.25);
        let stack =
            build_stack(4, &g, 0.0, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                .unwrap();
        assert_eq!(stack.annulus_shells().count(), 8);
        // Shells partition (0, 3].
        let mut prev = 0.0;
        for sh in &stack.shells {
            assert!((sh.r_inner - prev).abs() < 1e-12);
            assert!(sh.r_outer > sh.r_inner);
            prev = sh.r_outer;
        }
        assert!((prev - 3.0).abs() < 1e-12);
    }

    #[test]
    fn stack_conductive_shell_matches_reference() {
        // With n = 1 and paper-literal phases, the conductive shell carries
        // eps = 4 (1 + 16 i) and mu = 4 at rho = 1/4, delta = 0, omega = 1.
        let g = geom(0.25);
        let stack =
            build_stack(1, &g, 0.0, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                .unwrap();
        let sh = stack
            .shells
            .iter()
            .find(|sh| sh.r_inner == 0.5)
            .unwrap();
        assert!((sh.eps - Complex64::new(4.0, 64.0)).norm() < 1e-12);
        assert!((sh.mu.re - 4.0).abs() < 1e-15);
    }

    #[test]
    fn stack_outer_annulus_delta() {
        let g = geom(0.25);
        let stack =
            build_stack(2, &g, 0.1, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                .unwrap();
        let sh = stack.shells.last().unwrap();
        assert!((sh.eps - delta_factor(0.1)).norm() < 1e-15);
        assert!((sh.mu.re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn means_match_targets_per_period() {
        let g = geom(0.25);
        for &n in &[1u32, 4, 16, 64] {
            let stack =
                build_stack(n, &g, 0.05, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                    .unwrap();
            let period = 1.0 / n as f64;
            for p in 0..n {
                let s_lo = 1.0 + p as f64 * period;
                let s_mid = s_lo + 0.5 * period;
                let (am, hm) = means_of_stack(&stack, s_lo, s_lo + period).unwrap();
                let am_target = 1.0 / g.b;
                let hm_target = (s_mid - g.a).powi(2) / (g.b * s_mid * s_mid);
                assert!((am - am_target).abs() / am_target < 1e-12);
                assert!((hm - hm_target).abs() / hm_target < 1e-12);
                assert!(am >= hm);
            }
        }
    }

    #[test]
    fn means_constant_regions() {
        let g = geom(0.25);
        let stack =
            build_stack(4, &g, 0.0, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                .unwrap();
        let (am, hm) = means_of_stack(&stack, 0.6, 0.9).unwrap();
        assert_eq!((am, hm), (4.0, 4.0));
        let (am, hm) = means_of_stack(&stack, 2.2, 2.8).unwrap();
        assert_eq!((am, hm), (1.0, 1.0));
    }

    #[test]
    fn means_reject_boundary_spanning_window() {
        let g = geom(0.25);
        let stack =
            build_stack(4, &g, 0.0, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                .unwrap();
        assert!(matches!(
            means_of_stack(&stack, 0.9, 1.1),
            Err(Error::WindowSpansBoundary(_, _))
        ));
    }

    #[test]
    fn midpoint_sampling_first_order_at_edges() {
        // Deviation between sampled amplitudes and continuum values at window
        // edges shrinks like 1/n: log-log slope >= 0.9 over n = 8..256.
        let g = geom(0.25);
        let mut data = Vec::new();
        let mut n = 8u32;
        while n <= 256 {
            let stack =
                build_stack(n, &g, 0.0, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                    .unwrap();
            let mut worst: f64 = 0.0;
            for sh in stack.annulus_shells() {
                let edge = solve_phase_pair(sh.r_inner.max(1.0), &g).unwrap();
                let dev = (sh.gamma - edge.alpha).abs().min((sh.gamma - edge.beta).abs());
                worst = worst.max(dev);
            }
            data.push(((n as f64).ln(), worst.ln()));
            n *= 2;
        }
        let slope = -least_squares_slope(&data);
        assert!(slope >= 0.9, "measured decay order {slope}");
    }

    fn least_squares_slope(data: &[(f64, f64)]) -> f64 {
        let n = data.len() as f64;
        let sx: f64 = data.iter().map(|d| d.0).sum();
        let sy: f64 = data.iter().map(|d| d.1).sum();
        let sxx: f64 = data.iter().map(|d| d.0 * d.0).sum();
        let sxy: f64 = data.iter().map(|d| d.0 * d.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }
}
