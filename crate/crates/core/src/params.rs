//! Blow-up map, radial push-forwards and the anisotropic reference cloak media.
//!
//! All media in scope are radially symmetric, so material tensors are stored
//! by their two eigenvalues: one on the radial projection and one (with
//! multiplicity two) on its tangential complement. The cloak annulus is the
//! push-forward of the identity under the radial blow-up map, an affine
//! stretch `s -> a + b s` on the middle region.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of the blow-up map: dilates the ball of radius `rho` to the unit
/// ball, affinely retracts the annulus `(rho, 2)` onto `(1, 2)` and leaves
/// `[2, 3]` fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloakGeometry {
    pub rho: f64,
    pub a: f64,
    pub b: f64,
}

impl CloakGeometry {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in (0, 1/2], got {rho}; the two-phase laminate \
                 is only guaranteed feasible on that range"
            )));
        }
        Ok(Self {
            rho,
            a: 2.0 * (1.0 - rho) / (2.0 - rho),
            b: 1.0 / (2.0 - rho),
        })
    }
}

/// Which scalar the inner shell `1/2 < r < 1` of the reference medium takes.
///
/// The direct push-forward of the identity under the dilation `x -> x/rho`
/// has both eigenvalues equal to `rho`; a published table lists `1/rho`
/// instead. Both are kept; the boundary-invariance experiment discriminates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerShellMode {
    PaperLiteral,
    ComputedPushforward,
}

impl InnerShellMode {
    pub fn inner_scalar(self, rho: f64) -> f64 {
        match self {
            InnerShellMode::PaperLiteral => 1.0 / rho,
            InnerShellMode::ComputedPushforward => rho,
        }
    }
}

/// Radially symmetric rank-2 tensor, stored by eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialTensor {
    /// Eigenvalue on the radial projection.
    pub radial: Complex64,
    /// Eigenvalue on the tangential complement (multiplicity 2).
    pub tangential: Complex64,
}

impl RadialTensor {
    pub fn new(radial: Complex64, tangential: Complex64) -> Self {
        Self { radial, tangential }
    }

    pub fn isotropic(c: Complex64) -> Self {
        Self { radial: c, tangential: c }
    }

    pub fn identity() -> Self {
        Self::isotropic(Complex64::new(1.0, 0.0))
    }

    pub fn scaled(self, c: Complex64) -> Self {
        Self { radial: c * self.radial, tangential: c * self.tangential }
    }

    pub fn is_isotropic(&self) -> bool {
        self.radial == self.tangential
    }
}

/// A radially layered hidden object in the core ball of radius 1/2:
/// concentric isotropic shells listed by increasing outer radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenObject {
    pub shells: Vec<ObjectShell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectShell {
    pub r_outer: f64,
    pub eps: Complex64,
    pub mu: Complex64,
}

impl HiddenObject {
    /// Empty core: vacuum inside the cloaked region.
    pub fn vacuum() -> Self {
        Self { shells: Vec::new() }
    }

    pub fn uniform(eps: Complex64, mu: Complex64) -> Self {
        Self { shells: vec![ObjectShell { r_outer: 0.5, eps, mu }] }
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev = 0.0;
        for (i, sh) in self.shells.iter().enumerate() {
            if sh.r_outer <= prev || sh.r_outer > 0.5 {
                return Err(Error::InvalidParameter(format!(
                    "object shell {i}: radii must increase and stay within the \
                     core ball of radius 1/2 (got r_outer = {})",
                    sh.r_outer
                )));
            }
            if sh.eps.re <= 0.0 || sh.eps.im < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "object shell {i}: need Re(eps) > 0 and Im(eps) >= 0, got {}",
                    sh.eps
                )));
            }
            if sh.mu.re <= 0.0 || sh.mu.im != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "object shell {i}: need Re(mu) > 0 and Im(mu) = 0, got {}",
                    sh.mu
                )));
            }
            prev = sh.r_outer;
        }
        if let Some(last) = self.shells.last() {
            if (last.r_outer - 0.5).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "outermost object shell must reach radius 1/2, got {}",
                    last.r_outer
                )));
            }
        }
        Ok(())
    }

    /// (eps, mu) of the object at radius `r` in (0, 1/2]; vacuum when empty.
    pub fn at(&self, r: f64) -> (Complex64, Complex64) {
        for sh in &self.shells {
            if r <= sh.r_outer {
                return (sh.eps, sh.mu);
            }
        }
        (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    /// Interior breakpoints of the object, strictly inside (0, 1/2).
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        self.shells
            .iter()
            .map(|s| s.r_outer)
            .filter(|&r| r < 0.5 - 1e-15)
            .collect()
    }
}

fn norm3(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Radial profile of the blow-up map: `R(s)` as a function of `s = |x|`.
pub fn f_rho_radius(s: f64, geom: &CloakGeometry) -> Result<f64> {
    if s > 3.0 {
        return Err(Error::OutsideDomain(s));
    }
    Ok(if s >= 2.0 {
        s
    } else if s > geom.rho {
        geom.a + geom.b * s
    } else {
        s / geom.rho
    })
}

/// Inverse radial profile of the blow-up map.
pub fn f_rho_inv_radius(r: f64, geom: &CloakGeometry) -> Result<f64> {
    if r > 3.0 {
        return Err(Error::OutsideDomain(r));
    }
    Ok(if r >= 2.0 {
        r
    } else if r > 1.0 {
        (r - geom.a) / geom.b
    } else {
        r * geom.rho
    })
}

/// The blow-up map on points of the closed ball of radius 3.
pub fn f_rho(x: [f64; 3], geom: &CloakGeometry) -> Result<[f64; 3]> {
    let s = norm3(x);
    if s > 3.0 {
        return Err(Error::OutsideDomain(s));
    }
    if s == 0.0 {
        return Ok([0.0; 3]);
    }
    let r = f_rho_radius(s, geom)?;
    let scale = r / s;
    Ok([x[0] * scale, x[1] * scale, x[2] * scale])
}

/// Inverse of the blow-up map on points.
pub fn f_rho_inv(y: [f64; 3], geom: &CloakGeometry) -> Result<[f64; 3]> {
    let r = norm3(y);
    if r > 3.0 {
        return Err(Error::OutsideDomain(r));
    }
    if r == 0.0 {
        return Ok([0.0; 3]);
    }
    let s = f_rho_inv_radius(r, geom)?;
    let scale = s / r;
    Ok([y[0] * scale, y[1] * scale, y[2] * scale])
}

/// Push-forward of a radially symmetric tensor under a radial map with value
/// `r_target = R(s)` and derivative `r_deriv = R'(s)` at source radius `s`.
///
/// The Jacobian of `x -> R(|x|) x/|x|` has eigenvalues `R'(s)` (radial) and
/// `R(s)/s` (tangential, twice), so `F_* A = (DF A DF^t)/det(DF)` scales the
/// radial eigenvalue by `R'(s) s^2 / R(s)^2` and the tangential one by
/// `1 / R'(s)`.
pub fn pushforward_radial(
    s: f64,
    r_target: f64,
    r_deriv: f64,
    input: RadialTensor,
) -> Result<RadialTensor> {
    if s == 0.0 {
        return Err(Error::SingularMap(s));
    }
    if r_deriv <= 0.0 || r_target <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "push-forward needs R(s) > 0 and R'(s) > 0, got R = {r_target}, R' = {r_deriv}"
        )));
    }
    let radial_factor = r_deriv * s * s / (r_target * r_target);
    let tangential_factor = 1.0 / r_deriv;
    Ok(RadialTensor {
        radial: input.radial * radial_factor,
        tangential: input.tangential * tangential_factor,
    })
}

/// The reference tensor profile: push-forward of the identity under the
/// blow-up map outside the core, identity inside the core.
pub fn gamma_star(r: f64, geom: &CloakGeometry, mode: InnerShellMode) -> Result<RadialTensor> {
    if r <= 0.0 {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    if r > 3.0 {
        return Err(Error::OutsideDomain(r));
    }
    Ok(if r >= 2.0 {
        RadialTensor::identity()
    } else if r > 1.0 {
        let d = r - geom.a;
        RadialTensor::new(
            Complex64::new(d * d / (geom.b * r * r), 0.0),
            Complex64::new(1.0 / geom.b, 0.0),
        )
    } else if r > 0.5 {
        RadialTensor::isotropic(Complex64::new(mode.inner_scalar(geom.rho), 0.0))
    } else {
        RadialTensor::identity()
    })
}

/// Piecewise radial tensor profile on one interval of a [`RadialMedium`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TensorProfile {
    Constant(RadialTensor),
    /// `scale` times the push-forward of the identity under `s -> a + b s`,
    /// evaluated at the target radius.
    AffinePushforward { a: f64, b: f64, scale: Complex64 },
}

impl TensorProfile {
    pub fn eval(&self, r: f64) -> RadialTensor {
        match *self {
            TensorProfile::Constant(t) => t,
            TensorProfile::AffinePushforward { a, b, scale } => {
                let d = r - a;
                RadialTensor::new(
                    scale * (d * d / (b * r * r)),
                    scale / b,
                )
            }
        }
    }

    pub fn is_constant_isotropic(&self) -> bool {
        matches!(self, TensorProfile::Constant(t) if t.is_isotropic())
    }
}

/// One radial interval with its material profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub r_lo: f64,
    pub r_hi: f64,
    pub eps: TensorProfile,
    pub mu: TensorProfile,
}

/// Piecewise description of complex, radially anisotropic media on (0, 3].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMedium {
    pub segments: Vec<Segment>,
    pub omega: f64,
}

impl RadialMedium {
    /// Vacuum everywhere (identity media).
    pub fn vacuum(omega: f64) -> Self {
        Self {
            segments: vec![Segment {
                r_lo: 0.0,
                r_hi: 3.0,
                eps: TensorProfile::Constant(RadialTensor::identity()),
                mu: TensorProfile::Constant(RadialTensor::identity()),
            }],
            omega,
        }
    }

    pub fn eval(&self, r: f64) -> Result<(RadialTensor, RadialTensor)> {
        for seg in &self.segments {
            if r <= seg.r_hi || std::ptr::eq(seg, self.segments.last().unwrap()) {
                return Ok((seg.eps.eval(r), seg.mu.eval(r)));
            }
        }
        Err(Error::OutsideDomain(r))
    }
}

pub fn delta_factor(delta: f64) -> Complex64 {
    let z = Complex64::new(1.0, delta);
    z * z
}

/// The anisotropic reference cloak: mu = phi1 * gamma_star and
/// eps = (1 + i delta)^2 (1 + i phi3 / omega) phi2 * gamma_star, where the
/// conductive factor phi3 = rho^-2 lives on the shell (1/2, 1) and phi1, phi2
/// carry the hidden object inside the core. At delta = 0 this is exactly the
/// regularized near-cloak extension.
pub fn build_reference_media(
    geom: &CloakGeometry,
    delta: f64,
    omega: f64,
    object: &HiddenObject,
    mode: InnerShellMode,
) -> Result<RadialMedium> {
    if omega <= 0.0 || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta must lie in [0, 1), got {delta}")));
    }
    object.validate()?;

    let dfac = delta_factor(delta);
    let one = Complex64::new(1.0, 0.0);
    let mut segments = Vec::new();

    // Core: gamma_star = I, so eps = dfac * eps_a and mu = mu_a per shell.
    let mut lo = 0.0;
    let mut core_radii = object.interior_breakpoints();
    core_radii.push(0.5);
    for hi in core_radii {
        let (ea, ma) = object.at(0.5 * (lo + hi));
        segments.push(Segment {
            r_lo: lo,
            r_hi: hi,
            eps: TensorProfile::Constant(RadialTensor::isotropic(dfac * ea)),
            mu: TensorProfile::Constant(RadialTensor::isotropic(ma)),
        });
        lo = hi;
    }

    // Conductive shell (1/2, 1): phi3 = rho^-2.
    let g = Complex64::new(mode.inner_scalar(geom.rho), 0.0);
    let phi3 = Complex64::new(1.0, 1.0 / (geom.rho * geom.rho * omega));
    segments.push(Segment {
        r_lo: 0.5,
        r_hi: 1.0,
        eps: TensorProfile::Constant(RadialTensor::isotropic(dfac * phi3 * g)),
        mu: TensorProfile::Constant(RadialTensor::isotropic(g)),
    });

    // Anisotropic cloak annulus (1, 2).
    segments.push(Segment {
        r_lo: 1.0,
        r_hi: 2.0,
        eps: TensorProfile::AffinePushforward { a: geom.a, b: geom.b, scale: dfac },
        mu: TensorProfile::AffinePushforward { a: geom.a, b: geom.b, scale: one },
    });

    // Matching annulus [2, 3]: identity up to the delta rotation on eps.
    segments.push(Segment {
        r_lo: 2.0,
        r_hi: 3.0,
        eps: TensorProfile::Constant(RadialTensor::isotropic(dfac)),
        mu: TensorProfile::Constant(RadialTensor::identity()),
    });

    Ok(RadialMedium { segments, omega })
}

/// Push-forward of the identity under the blow-up map over the whole ball,
/// including the core. Boundary measurements of this medium coincide with
/// vacuum because the map restricts to the identity on the boundary sphere.
pub fn pushforward_identity_medium(geom: &CloakGeometry, omega: f64) -> RadialMedium {
    let rho = Complex64::new(geom.rho, 0.0);
    let one = Complex64::new(1.0, 0.0);
    RadialMedium {
        segments: vec![
            Segment {
                r_lo: 0.0,
                r_hi: 1.0,
                eps: TensorProfile::Constant(RadialTensor::isotropic(rho)),
                mu: TensorProfile::Constant(RadialTensor::isotropic(rho)),
            },
            Segment {
                r_lo: 1.0,
                r_hi: 2.0,
                eps: TensorProfile::AffinePushforward { a: geom.a, b: geom.b, scale: one },
                mu: TensorProfile::AffinePushforward { a: geom.a, b: geom.b, scale: one },
            },
            Segment {
                r_lo: 2.0,
                r_hi: 3.0,
                eps: TensorProfile::Constant(RadialTensor::identity()),
                mu: TensorProfile::Constant(RadialTensor::identity()),
            },
        ],
        omega,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(rho: f64) -> CloakGeometry {
        CloakGeometry::new(rho).unwrap()
    }

    #[test]
    fn geometry_invariants() {
        for &rho in &[0.5, 0.4, 0.25, 0.1, 0.05, 0.01] {
            let g = geom(rho);
            assert!(g.a > 0.0 && g.a < 1.0);
            assert!(g.b > 0.5 && g.b <= 2.0 / 3.0 + 1e-15);
            // Continuity of the radial profile at s = rho and s = 2.
            assert!((g.a + g.b * rho - 1.0).abs() < 1e-14);
            assert!((g.a + g.b * 2.0 - 2.0).abs() < 1e-14);
        }
        assert!(CloakGeometry::new(0.0).is_err());
        assert!(CloakGeometry::new(0.6).is_err());
    }

    #[test]
    fn f_rho_identity_region() {
        let g = geom(0.25);
        assert_eq!(f_rho([2.5, 0.0, 0.0], &g).unwrap(), [2.5, 0.0, 0.0]);
    }

    #[test]
    fn f_rho_dilation() {
        let g = geom(0.25);
        let y = f_rho([0.25, 0.0, 0.0], &g).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && y[1] == 0.0 && y[2] == 0.0);
    }

    #[test]
    fn f_rho_middle() {
        // a = 6/7, b = 4/7 at rho = 1/4, so F(1) = 10/7.
        let g = geom(0.25);
        let y = f_rho([1.0, 0.0, 0.0], &g).unwrap();
        assert!((y[0] - 10.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn f_rho_rejects_outside() {
        let g = geom(0.25);
        assert!(matches!(f_rho([3.5, 0.0, 0.0], &g), Err(Error::OutsideDomain(_))));
        assert!(matches!(f_rho_inv([0.0, 3.2, 0.0], &g), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn f_rho_inverse_examples() {
        let g = geom(0.25);
        let x = f_rho_inv([1.0, 0.0, 0.0], &g).unwrap();
        assert!((x[0] - 0.25).abs() < 1e-15);
        let x = f_rho_inv([2.5, 0.0, 0.0], &g).unwrap();
        assert!((x[0] - 2.5).abs() < 1e-15);
        let x = f_rho_inv([10.0 / 7.0, 0.0, 0.0], &g).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn round_trip_grid() {
        // 10 x 10 x 10 grid in the ball, max round-trip error < 1e-13.
        for &rho in &[0.4, 0.25, 0.05] {
            let g = geom(rho);
            let mut max_err: f64 = 0.0;
            for i in 0..10 {
                for j in 0..10 {
                    for k in 0..10 {
                        let x = [
                            -1.6 + 0.35 * i as f64,
                            -1.6 + 0.35 * j as f64,
                            -1.6 + 0.35 * k as f64,
                        ];
                        if norm3(x) > 3.0 {
                            continue;
                        }
                        let y = f_rho(x, &g).unwrap();
                        let back = f_rho_inv(y, &g).unwrap();
                        for d in 0..3 {
                            max_err = max_err.max((back[d] - x[d]).abs());
                        }
                    }
                }
            }
            assert!(max_err < 1e-13, "round trip error {max_err} at rho = {rho}");
        }
    }

    #[test]
    fn continuity_at_breakpoints() {
        for &rho in &[0.4, 0.25, 0.1] {
            let g = geom(rho);
            let e = 1e-15;
            for &s in &[rho, 2.0] {
                let below = f_rho_radius(s - e, &g).unwrap();
                let above = f_rho_radius(s + e, &g).unwrap();
                // The jump in slope scales the one-sided offsets by up to 1/rho.
                assert!((below - above).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn pushforward_identity_map() {
        let c = Complex64::new(2.0, 0.5);
        let t = pushforward_radial(1.3, 1.3, 1.0, RadialTensor::isotropic(c)).unwrap();
        assert_eq!(t.radial, c);
        assert_eq!(t.tangential, c);
    }

    #[test]
    fn pushforward_affine_matches_gamma_star() {
        // 50 radii in (1, 2), 5 values of rho; componentwise < 1e-13.
        for &rho in &[0.5, 0.4, 0.25, 0.1, 0.05] {
            let g = geom(rho);
            for i in 0..50 {
                let r = 1.0 + (i as f64 + 0.5) / 50.0;
                let s = (r - g.a) / g.b;
                let pf = pushforward_radial(s, r, g.b, RadialTensor::identity()).unwrap();
                let gs = gamma_star(r, &g, InnerShellMode::ComputedPushforward).unwrap();
                assert!((pf.radial - gs.radial).norm() < 1e-13);
                assert!((pf.tangential - gs.tangential).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn pushforward_dilation_gives_rho() {
        let g = geom(0.25);
        let s = 0.1;
        let t = pushforward_radial(s, s / g.rho, 1.0 / g.rho, RadialTensor::identity()).unwrap();
        assert!((t.radial.re - g.rho).abs() < 1e-15);
        assert!((t.tangential.re - g.rho).abs() < 1e-15);
    }

    #[test]
    fn pushforward_eigenvalue_identities() {
        // For F_* I: radial = R' s^2 / R^2 and tangential = 1/R', directly.
        let cases = [(0.7, 1.9, 0.6), (1.5, 1.2, 2.0), (2.5, 2.5, 1.0)];
        for &(s, r, dr) in &cases {
            let t = pushforward_radial(s, r, dr, RadialTensor::identity()).unwrap();
            assert!((t.radial.re - dr * s * s / (r * r)).abs() < 1e-15);
            assert!((t.tangential.re - 1.0 / dr).abs() < 1e-15);
        }
    }

    #[test]
    fn pushforward_singular_at_origin() {
        assert!(matches!(
            pushforward_radial(0.0, 1.0, 1.0, RadialTensor::identity()),
            Err(Error::SingularMap(_))
        ));
    }

    #[test]
    fn gamma_star_table() {
        let g = geom(0.25);
        let t = gamma_star(2.5, &g, InnerShellMode::ComputedPushforward).unwrap();
        assert_eq!(t, RadialTensor::identity());

        let t = gamma_star(1.5, &g, InnerShellMode::ComputedPushforward).unwrap();
        assert!((t.radial.re - 0.32142857142857145).abs() < 1e-15);
        assert!((t.tangential.re - 1.75).abs() < 1e-15);

        let t = gamma_star(0.75, &g, InnerShellMode::PaperLiteral).unwrap();
        assert!((t.radial.re - 4.0).abs() < 1e-15);
        assert!((t.tangential.re - 4.0).abs() < 1e-15);

        let t = gamma_star(0.75, &g, InnerShellMode::ComputedPushforward).unwrap();
        assert!((t.radial.re - 0.25).abs() < 1e-15);

        let t = gamma_star(0.3, &g, InnerShellMode::PaperLiteral).unwrap();
        assert_eq!(t, RadialTensor::identity());

        assert!(gamma_star(-1.0, &g, InnerShellMode::PaperLiteral).is_err());
        assert!(gamma_star(0.0, &g, InnerShellMode::PaperLiteral).is_err());
    }

    #[test]
    fn reference_media_vacuum_annulus() {
        let g = geom(0.25);
        let med =
            build_reference_media(&g, 0.0, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                .unwrap();
        let (eps, mu) = med.eval(2.5).unwrap();
        assert_eq!(eps, RadialTensor::identity());
        assert_eq!(mu, RadialTensor::identity());
    }

    #[test]
    fn reference_media_conductive_shell() {
        // eps = rho^-1 (1 + i rho^-2 / omega), mu = rho^-1 in paper-literal mode.
        let g = geom(0.25);
        let med =
            build_reference_media(&g, 0.0, 1.0, &HiddenObject::vacuum(), InnerShellMode::PaperLiteral)
                .unwrap();
        let (eps, mu) = med.eval(0.75).unwrap();
        assert!((eps.radial - Complex64::new(4.0, 64.0)).norm() < 1e-12);
        assert!((mu.radial.re - 4.0).abs() < 1e-15);
        assert!(eps.is_isotropic() && mu.is_isotropic());
    }

    #[test]
    fn reference_media_delta_rotation() {
        let g = geom(0.25);
        let med = build_reference_media(
            &g,
            0.1,
            1.0,
            &HiddenObject::vacuum(),
            InnerShellMode::ComputedPushforward,
        )
        .unwrap();
        let (eps, mu) = med.eval(1.5).unwrap();
        let dfac = delta_factor(0.1);
        assert!((eps.radial - dfac * 0.32142857142857145).norm() < 1e-15);
        assert!((eps.tangential - dfac * 1.75).norm() < 1e-15);
        assert!((mu.radial.re - 0.32142857142857145).abs() < 1e-15);
        assert!((mu.tangential.re - 1.75).abs() < 1e-15);
    }

    #[test]
    fn reference_media_delta_zero_is_near_cloak() {
        // At delta = 0 the medium equals the regularized near-cloak extension
        // exactly, sampled across all regions.
        let g = geom(0.25);
        let mode = InnerShellMode::ComputedPushforward;
        let med = build_reference_media(&g, 0.0, 1.0, &HiddenObject::vacuum(), mode).unwrap();
        for &r in &[0.2, 0.75, 1.3, 1.9, 2.4, 3.0] {
            let (eps, mu) = med.eval(r).unwrap();
            let gs = gamma_star(r, &g, mode).unwrap();
            let phi3 = if r > 0.5 && r < 1.0 {
                Complex64::new(1.0, 16.0)
            } else {
                Complex64::new(1.0, 0.0)
            };
            assert!((eps.radial - phi3 * gs.radial).norm() < 1e-13, "r = {r}");
            assert!((eps.tangential - phi3 * gs.tangential).norm() < 1e-13, "r = {r}");
            assert!((mu.radial - gs.radial).norm() < 1e-13, "r = {r}");
            assert!((mu.tangential - gs.tangential).norm() < 1e-13, "r = {r}");
        }
    }

    #[test]
    fn hidden_object_validation() {
        let bad = HiddenObject {
            shells: vec![ObjectShell {
                r_outer: 0.6,
                eps: Complex64::new(1.0, 0.0),
                mu: Complex64::new(1.0, 0.0),
            }],
        };
        assert!(bad.validate().is_err());

        let lossy_mu = HiddenObject::uniform(Complex64::new(2.0, 1.0), Complex64::new(1.0, 0.1));
        assert!(lossy_mu.validate().is_err());

        let ok = HiddenObject::uniform(Complex64::new(2.0, 3.0), Complex64::new(1.0, 0.0));
        assert!(ok.validate().is_ok());
    }
}
