//! Per-mode radial Maxwell solver and modal boundary log-derivatives.
//!
//! # Mode reduction
//!
//! For time-harmonic fields in a radially symmetric medium with eigenvalue
//! pairs `eps = (eps_r, eps_t)` and `mu = (mu_r, mu_t)`, expand the fields in
//! vector spherical harmonics of degree `l >= 1`. Each degree splits into two
//! polarization families that do not couple:
//!
//! * **TM** (magnetic field purely tangential): the magnetic Debye potential
//!   `u(r)` (r times the radial scalar generating H) satisfies
//!
//!   ```text
//!   ( (1/eps_t) u' )' + ( omega^2 mu_t - l(l+1) / (eps_r r^2) ) u = 0.
//!   ```
//!
//!   This follows from eliminating E in `curl H = -i omega eps E`,
//!   `curl E = i omega mu H`: the tangential curl components bring in
//!   `1/eps_t`, while the radial component of `curl H`, which carries the
//!   angular Laplacian eigenvalue `l(l+1)`, is divided by `eps_r`.
//!
//! * **TE** (electric field purely tangential): identical with eps and mu
//!   interchanged.
//!
//! In vacuum both reduce to the Riccati-Bessel equation
//! `u'' + (omega^2 - l(l+1)/r^2) u = 0`. The derivation is not re-checked
//! symbolically here; it is gated by two independent experiments: the vacuum
//! closed form, and exact invariance of the boundary log-derivative under a
//! boundary-fixing radial push-forward of the identity medium.
//!
//! # Flux variable
//!
//! The propagated state is `(u, v)` with `v = (1/c_t) u'`, where `c_t` is
//! the tangential eigenvalue of the coefficient under the outer derivative
//! (`eps_t` for TM, `mu_t` for TE). Both components are continuous across
//! material interfaces, so piecewise media need no jump handling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{RadialMedium, RadialTensor, Segment, TensorProfile};
use crate::special::{psi, xi};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    Te,
    Tm,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Polarization::Te => write!(f, "TE"),
            Polarization::Tm => write!(f, "TM"),
        }
    }
}

/// One block of the impedance map: polarization and degree `l >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode {
    pub pol: Polarization,
    pub l: u32,
}

impl Mode {
    pub fn new(pol: Polarization, l: u32) -> Result<Self> {
        if l < 1 {
            return Err(Error::InvalidParameter(
                "Maxwell modes start at degree l = 1".into(),
            ));
        }
        Ok(Self { pol, l })
    }
}

/// Radial state of one mode: Debye potential and its flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub u: Complex64,
    /// `(1/c_t) u'`, continuous across interfaces.
    pub flux: Complex64,
}

impl ModeState {
    pub fn norm(&self) -> f64 {
        self.u.norm().max(self.flux.norm())
    }

    fn scaled(self, s: f64) -> Self {
        ModeState { u: self.u * s, flux: self.flux * s }
    }
}

/// The curl-side (`c`) and potential-side (`m`) coefficients of a mode.
fn coefficients(mode: Mode, eps: RadialTensor, mu: RadialTensor) -> (RadialTensor, RadialTensor) {
    match mode.pol {
        Polarization::Tm => (eps, mu),
        Polarization::Te => (mu, eps),
    }
}

/// First-order system right-hand side at radius `r`:
/// `u' = c_t v`, `v' = -(omega^2 m_t - l(l+1)/(c_r r^2)) u`.
pub fn radial_ode(
    mode: Mode,
    eps: RadialTensor,
    mu: RadialTensor,
    omega: f64,
    r: f64,
    state: ModeState,
) -> Result<(Complex64, Complex64)> {
    let (c, m) = coefficients(mode, eps, mu);
    if c.tangential.norm() == 0.0 || c.radial.norm() == 0.0 || m.tangential.norm() == 0.0 {
        return Err(Error::SingularMedium(r));
    }
    let ll1 = (mode.l * (mode.l + 1)) as f64;
    let q = omega * omega * m.tangential - ll1 / (c.radial * r * r);
    Ok((c.tangential * state.flux, -q * state.u))
}

/// Principal square root with the decaying-into-loss branch `Im k >= 0`.
pub fn wavenumber(omega: f64, eps: Complex64, mu: Complex64) -> Complex64 {
    let k = (omega * omega * eps * mu).sqrt();
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        -k
    } else {
        k
    }
}

/// Regular solution seed inside an isotropic core: `u = psi_l(k r0)`.
pub fn regular_seed(
    mode: Mode,
    eps: Complex64,
    mu: Complex64,
    omega: f64,
    r0: f64,
) -> Result<ModeState> {
    let k = wavenumber(omega, eps, mu);
    let p = psi(mode.l, k * r0)?;
    let c_t = match mode.pol {
        Polarization::Tm => eps,
        Polarization::Te => mu,
    };
    Ok(ModeState { u: p.value, flux: k * p.derivative / c_t })
}

/// Exact transfer across a constant isotropic shell via the Riccati-Bessel
/// fundamental system.
pub fn propagate_analytic(
    state: ModeState,
    mode: Mode,
    eps: Complex64,
    mu: Complex64,
    r_from: f64,
    r_to: f64,
    omega: f64,
) -> Result<ModeState> {
    if r_from == r_to {
        return Ok(state);
    }
    let k = wavenumber(omega, eps, mu);
    let c_t = match mode.pol {
        Polarization::Tm => eps,
        Polarization::Te => mu,
    };
    let pf = psi(mode.l, k * r_from)?;
    let xf = xi(mode.l, k * r_from)?;
    // u = A psi + B xi, c_t v = k (A psi' + B xi'); the system determinant is
    // the Wronskian, evaluated rather than assumed for rounding robustness.
    let w = pf.value * xf.derivative - pf.derivative * xf.value;
    let rhs = c_t * state.flux / k;
    let coef_a = (state.u * xf.derivative - rhs * xf.value) / w;
    let coef_b = (rhs * pf.value - state.u * pf.derivative) / w;
    let pt = psi(mode.l, k * r_to)?;
    let xt = xi(mode.l, k * r_to)?;
    Ok(ModeState {
        u: coef_a * pt.value + coef_b * xt.value,
        flux: k * (coef_a * pt.derivative + coef_b * xt.derivative) / c_t,
    })
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive embedded Runge-Kutta integration of the mode system across one
/// smooth segment of a medium. Breakpoints must not fall inside
/// `[r_from, r_to]`; callers integrate segment by segment.
pub fn propagate_ode<F>(
    state: ModeState,
    mode: Mode,
    media: F,
    r_from: f64,
    r_to: f64,
    omega: f64,
    tol: f64,
) -> Result<ModeState>
where
    F: Fn(f64) -> (RadialTensor, RadialTensor),
{
    if r_to == r_from {
        return Ok(state);
    }
    let span = r_to - r_from;
    let rhs = |r: f64, y: [Complex64; 2]| -> Result<[Complex64; 2]> {
        let (eps, mu) = media(r);
        let (du, dv) = radial_ode(mode, eps, mu, omega, r, ModeState { u: y[0], flux: y[1] })?;
        Ok([du, dv])
    };

    let mut r = r_from;
    let mut y = [state.u, state.flux];
    let mut h = span / 16.0;
    let h_min = span.abs() * 1e-14;
    let atol = tol * state.norm().max(1e-300);
    let mut k0 = rhs(r, y)?;

    while (r_to - r) / span > 1e-14 {
        if (r + h - r_to) / span > 0.0 {
            h = r_to - r;
        }
        if h.abs() < h_min {
            return Err(Error::Stiffness(r));
        }
        let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
        k[0] = k0;
        let mut failed = false;
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    ys[0] += h * a * kj[0];
                    ys[1] += h * a * kj[1];
                }
            }
            match rhs(r + DP_C[stage] * h, ys) {
                Ok(v) => k[stage + 1] = v,
                Err(Error::SingularMedium(_)) if r + DP_C[stage] * h <= r_from => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            h *= 0.5;
            continue;
        }
        // 5th-order solution is stage 6's abscissa (FSAL).
        let y_new = [
            y[0] + h * (DP_A[5][0] * k[0][0]
                + DP_A[5][2] * k[2][0]
                + DP_A[5][3] * k[3][0]
                + DP_A[5][4] * k[4][0]
                + DP_A[5][5] * k[5][0]),
            y[1] + h * (DP_A[5][0] * k[0][1]
                + DP_A[5][2] * k[2][1]
                + DP_A[5][3] * k[3][1]
                + DP_A[5][4] * k[4][1]
                + DP_A[5][5] * k[5][1]),
        ];
        let mut err: f64 = 0.0;
        for comp in 0..2 {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                e += DP_E[j] * kj[comp];
            }
            e *= h;
            let scale = atol + tol * y[comp].norm().max(y_new[comp].norm());
            err = err.max(e.norm() / scale);
        }
        if err <= 1.0 {
            r += h;
            y = y_new;
            k0 = k[6];
        }
        let grow = if err > 0.0 {
            0.9 * err.powf(-0.2)
        } else {
            5.0
        };
        h *= grow.clamp(0.2, 5.0);
    }
    Ok(ModeState { u: y[0], flux: y[1] })
}

fn innermost_isotropic(medium: &RadialMedium) -> Result<(&Segment, Complex64, Complex64)> {
    let seg = medium
        .segments
        .first()
        .ok_or_else(|| Error::InvalidParameter("medium has no segments".into()))?;
    match &seg.eps {
        TensorProfile::Constant(e) if e.is_isotropic() => match &seg.mu {
            TensorProfile::Constant(m) if m.is_isotropic() => Ok((seg, e.radial, m.radial)),
            _ => Err(Error::InvalidParameter(
                "innermost segment must be constant isotropic for origin seeding".into(),
            )),
        },
        _ => Err(Error::InvalidParameter(
            "innermost segment must be constant isotropic for origin seeding".into(),
        )),
    }
}

fn propagate_segment(
    state: ModeState,
    mode: Mode,
    seg: &Segment,
    r_from: f64,
    r_to: f64,
    omega: f64,
    tol: f64,
) -> Result<ModeState> {
    if seg.eps.is_constant_isotropic() && seg.mu.is_constant_isotropic() {
        let eps = seg.eps.eval(r_from).radial;
        let mu = seg.mu.eval(r_from).radial;
        propagate_analytic(state, mode, eps, mu, r_from, r_to, omega)
    } else {
        propagate_ode(
            state,
            mode,
            |r| (seg.eps.eval(r), seg.mu.eval(r)),
            r_from,
            r_to,
            omega,
            tol,
        )
    }
}

/// Propagate the regular solution from inside the core to `r_stop`,
/// renormalizing between segments so lossy shells cannot overflow.
fn propagate_regular(
    medium: &RadialMedium,
    mode: Mode,
    tol: f64,
    r_stop: f64,
) -> Result<(ModeState, RadialTensor)> {
    let (core, eps0, mu0) = innermost_isotropic(medium)?;
    let r0 = (0.05_f64).min(core.r_hi / 2.0);
    let mut state = regular_seed(mode, eps0, mu0, medium.omega, r0)?;
    let mut r = r0;
    let mut c_t = RadialTensor::isotropic(match mode.pol {
        Polarization::Tm => eps0,
        Polarization::Te => mu0,
    });
    for seg in &medium.segments {
        if seg.r_hi <= r {
            continue;
        }
        let lo = seg.r_lo.max(r);
        let hi = seg.r_hi.min(r_stop);
        if hi <= lo {
            break;
        }
        state = propagate_segment(state, mode, seg, lo, hi, medium.omega, tol)?;
        r = hi;
        let (eps, mu) = (seg.eps.eval(hi), seg.mu.eval(hi));
        c_t = match mode.pol {
            Polarization::Tm => eps,
            Polarization::Te => mu,
        };
        let n = state.norm();
        if n == 0.0 {
            return Err(Error::NearResonance(format!(
                "state vanished at r = {r} for {} l = {}",
                mode.pol, mode.l
            )));
        }
        state = state.scaled(1.0 / n);
        if r >= r_stop {
            break;
        }
    }
    Ok((state, c_t))
}

/// Modal boundary log-derivative `zeta = u'(3) / u(3)` for the regular
/// solution through the given medium.
pub fn modal_dtn(medium: &RadialMedium, mode: Mode, tol: f64) -> Result<Complex64> {
    let (state, c_t) = propagate_regular(medium, mode, tol, 3.0)?;
    let du = c_t.tangential * state.flux;
    let scale = (state.u.norm_sqr() + du.norm_sqr()).sqrt();
    if state.u.norm() < 1e-8 * scale {
        return Err(Error::NearResonance(format!(
            "|u(3)| below resonance guard for {} l = {}",
            mode.pol, mode.l
        )));
    }
    Ok(du / state.u)
}

/// Vacuum boundary log-derivative in closed form:
/// `omega psi_l'(3 omega) / psi_l(3 omega)`.
pub fn vacuum_dtn(mode: Mode, omega: f64) -> Result<Complex64> {
    let p = psi(mode.l, Complex64::new(3.0 * omega, 0.0))?;
    let scale = (p.value.norm_sqr() + p.derivative.norm_sqr()).sqrt();
    if p.value.norm() < 1e-8 * scale {
        return Err(Error::NearResonance(format!(
            "omega = {omega} is near a vacuum eigenvalue for l = {}",
            mode.l
        )));
    }
    Ok(omega * p.derivative / p.value)
}

/// Sample the regular mode potential at radii inside the matching annulus
/// `(2, 3)`, normalized so that `u(3) = 1`.
pub fn potential_samples(
    medium: &RadialMedium,
    mode: Mode,
    tol: f64,
    radii: &[f64],
) -> Result<Vec<Complex64>> {
    if radii.iter().any(|&r| !(r > 2.0 && r < 3.0)) {
        return Err(Error::InvalidParameter(
            "potential samples must lie strictly inside (2, 3)".into(),
        ));
    }
    let (state2, _) = propagate_regular(medium, mode, tol, 2.0)?;
    let outer = medium
        .segments
        .last()
        .ok_or_else(|| Error::InvalidParameter("medium has no segments".into()))?;
    let (eps, mu) = (outer.eps.eval(2.5), outer.mu.eval(2.5));
    if !(outer.eps.is_constant_isotropic() && outer.mu.is_constant_isotropic())
        || outer.r_lo > 2.0
    {
        return Err(Error::InvalidParameter(
            "outermost segment must be constant isotropic on [2, 3]".into(),
        ));
    }
    let at = |r: f64| {
        propagate_analytic(state2, mode, eps.radial, mu.radial, 2.0, r, medium.omega)
    };
    let boundary = at(3.0 - 0.0)?;
    if boundary.u.norm() == 0.0 {
        return Err(Error::NearResonance("u(3) = 0".into()));
    }
    radii
        .iter()
        .map(|&r| Ok(at(r)?.u / boundary.u))
        .collect()
}
