//! Impedance spectra, spectral distances and convergence sweeps.
//!
//! The boundary operator of a radially symmetric medium is diagonal in the
//! vector spherical harmonic basis, so it is represented by its modal
//! log-derivatives up to a cutoff degree. Distances between two media are
//! weighted sup metrics over those entries; the weights
//! `(1 + l(l+1))^{-1/2}` mimic the -1/2 Sobolev index of the natural trace
//! space. Any fixed weight family preserves convergence to zero, which is
//! all the sweeps assert.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::laminate::build_stack;
use crate::params::{
    build_reference_media, CloakGeometry, HiddenObject, InnerShellMode, RadialMedium,
};
use crate::radial::{modal_dtn, potential_samples, vacuum_dtn, Mode, Polarization};
use crate::special::{psi, xi, L_MAX};

pub const SCHEMA_VERSION: u32 = 1;

/// Threshold for the normalized vacuum resonance indicator.
const RESONANCE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    Sobolev,
    Uniform,
}

impl WeightScheme {
    pub fn weight(self, l: u32) -> f64 {
        match self {
            WeightScheme::Sobolev => 1.0 / (1.0 + (l * (l + 1)) as f64).sqrt(),
            WeightScheme::Uniform => 1.0,
        }
    }
}

/// One experiment: a cloak construction plus the measurement cutoffs.
/// `n = 0` selects the homogenized anisotropic reference; `n >= 1` the
/// two-phase laminate with n periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub omega: f64,
    pub rho: f64,
    pub delta: f64,
    pub n: u32,
    pub inner_shell_mode: InnerShellMode,
    pub object: HiddenObject,
    pub l_max: u32,
    pub tol: f64,
    pub weights: WeightScheme,
}

impl ExperimentConfig {
    /// Defaults for everything except the three limit parameters.
    pub fn new(rho: f64, delta: f64, n: u32) -> Self {
        Self {
            omega: 1.0,
            rho,
            delta,
            n,
            inner_shell_mode: InnerShellMode::ComputedPushforward,
            object: HiddenObject::vacuum(),
            l_max: 20,
            tol: 1e-10,
            weights: WeightScheme::Sobolev,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.delta >= 0.0 && self.delta <= 0.5) {
            return Err(Error::Config(format!("delta must lie in [0, 0.5], got {}", self.delta)));
        }
        if !(1..=L_MAX).contains(&self.l_max) {
            return Err(Error::Config(format!("l_max must lie in [1, {L_MAX}], got {}", self.l_max)));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-4) {
            return Err(Error::Config(format!("tol must lie in (0, 1e-4], got {}", self.tol)));
        }
        self.geometry()?;
        self.object.validate()?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<CloakGeometry> {
        CloakGeometry::new(self.rho)
    }

    /// Hex SHA-256 of the canonical JSON serialization; identifies the
    /// generating configuration in every output.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex_digest(json.as_bytes())
    }

    pub fn build_medium(&self) -> Result<RadialMedium> {
        let geom = self.geometry()?;
        if self.n == 0 {
            build_reference_media(&geom, self.delta, self.omega, &self.object, self.inner_shell_mode)
        } else {
            Ok(build_stack(
                self.n,
                &geom,
                self.delta,
                self.omega,
                &self.object,
                self.inner_shell_mode,
            )?
            .to_radial_medium())
        }
    }

    /// Modal impedance spectrum for all `l <= l_max`, both polarizations.
    /// Parallel over modes unless `sequential`; results are independent of
    /// execution order either way.
    pub fn spectrum(&self, sequential: bool) -> Result<DtnSpectrum> {
        self.validate()?;
        resonance_guard(self.omega, self.l_max)?;
        let medium = self.build_medium()?;
        medium_spectrum(&medium, self.l_max, self.tol, sequential, self.fingerprint())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Reject frequencies at or near a vacuum eigenvalue of the ball. The raw
/// magnitude `|psi_l(3 omega)| decays superexponentially in l at fixed
/// omega, so it cannot serve as a uniform floor; the indicator used here is
/// `|psi_l xi_l| (2l+1) / (3 omega)`, which tends to 1 in the static limit
/// and vanishes exactly at the eigenvalues.
pub fn resonance_guard(omega: f64, l_max: u32) -> Result<()> {
    let z = Complex64::new(3.0 * omega, 0.0);
    for l in 1..=l_max {
        let p = psi(l, z)?;
        let x = xi(l, z)?;
        let indicator = (p.value * x.value).norm() * (2 * l + 1) as f64 / (3.0 * omega);
        if indicator < RESONANCE_FLOOR {
            return Err(Error::NearResonance(format!(
                "omega = {omega} is near a vacuum eigenvalue for l = {l} \
                 (indicator {indicator:.3e})"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub mode: Mode,
    pub zeta: Complex64,
}

/// Modal impedance spectrum of one medium, ordered by `(l, pol)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnSpectrum {
    pub omega: f64,
    pub fingerprint: String,
    pub entries: Vec<SpectrumEntry>,
}

pub fn mode_list(l_max: u32) -> Vec<Mode> {
    let mut modes = Vec::with_capacity(2 * l_max as usize);
    for l in 1..=l_max {
        modes.push(Mode { pol: Polarization::Te, l });
        modes.push(Mode { pol: Polarization::Tm, l });
    }
    modes
}

/// Spectrum of an explicit medium; the workhorse behind
/// [`ExperimentConfig::spectrum`] and the vacuum comparison tests.
pub fn medium_spectrum(
    medium: &RadialMedium,
    l_max: u32,
    tol: f64,
    sequential: bool,
    fingerprint: String,
) -> Result<DtnSpectrum> {
    let modes = mode_list(l_max);
    let zetas: Result<Vec<Complex64>> = if sequential {
        modes.iter().map(|&m| modal_dtn(medium, m, tol)).collect()
    } else {
        modes.par_iter().map(|&m| modal_dtn(medium, m, tol)).collect()
    };
    let entries = modes
        .into_iter()
        .zip(zetas?)
        .map(|(mode, zeta)| SpectrumEntry { mode, zeta })
        .collect();
    Ok(DtnSpectrum { omega: medium.omega, fingerprint, entries })
}

/// Closed-form vacuum spectrum, the reference of the near-cloak sweeps.
pub fn vacuum_spectrum(omega: f64, l_max: u32) -> Result<DtnSpectrum> {
    resonance_guard(omega, l_max)?;
    let entries = mode_list(l_max)
        .into_iter()
        .map(|mode| Ok(SpectrumEntry { mode, zeta: vacuum_dtn(mode, omega)? }))
        .collect::<Result<Vec<_>>>()?;
    let fingerprint = hex_digest(format!("vacuum omega={omega} l_max={l_max}").as_bytes());
    Ok(DtnSpectrum { omega, fingerprint, entries })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    /// Weighted sup over modes.
    pub sup: f64,
    /// Unweighted l2 aggregate of the same entry gaps.
    pub l2: f64,
    /// Mode attaining the weighted sup.
    pub worst: Mode,
}

/// Weighted modal sup distance between two spectra of the same frequency
/// and cutoff.
pub fn distance(a: &DtnSpectrum, b: &DtnSpectrum, scheme: WeightScheme) -> Result<DistanceReport> {
    if a.omega != b.omega {
        return Err(Error::SpectrumMismatch(format!(
            "frequencies differ: {} vs {}",
            a.omega, b.omega
        )));
    }
    if a.entries.len() != b.entries.len() {
        return Err(Error::SpectrumMismatch(format!(
            "entry counts differ: {} vs {}",
            a.entries.len(),
            b.entries.len()
        )));
    }
    let mut sup = -1.0;
    let mut l2_sq = 0.0;
    let mut worst = Mode { pol: Polarization::Te, l: 1 };
    for (ea, eb) in a.entries.iter().zip(&b.entries) {
        if ea.mode != eb.mode {
            return Err(Error::SpectrumMismatch(format!(
                "mode sets differ: {:?} vs {:?}",
                ea.mode, eb.mode
            )));
        }
        let gap = (ea.zeta - eb.zeta).norm();
        l2_sq += gap * gap;
        let weighted = scheme.weight(ea.mode.l) * gap;
        if weighted > sup {
            sup = weighted;
            worst = ea.mode;
        }
    }
    if sup < 0.0 {
        return Err(Error::SpectrumMismatch("empty spectra".into()));
    }
    Ok(DistanceReport { sup, l2: l2_sq.sqrt(), worst })
}

/// Truncation-tail check: the largest entry gap at the cutoff degree itself.
/// If the tail is already below a sweep's resolution the cutoff is justified.
pub fn tail_gap(a: &DtnSpectrum, b: &DtnSpectrum) -> Result<f64> {
    let l_max = a
        .entries
        .iter()
        .map(|e| e.mode.l)
        .max()
        .ok_or_else(|| Error::SpectrumMismatch("empty spectra".into()))?;
    let mut gap: f64 = 0.0;
    for (ea, eb) in a.entries.iter().zip(&b.entries) {
        if ea.mode != eb.mode {
            return Err(Error::SpectrumMismatch("mode sets differ".into()));
        }
        if ea.mode.l == l_max {
            gap = gap.max((ea.zeta - eb.zeta).norm());
        }
    }
    Ok(gap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParam {
    N,
    Delta,
    Rho,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::Delta => "delta",
            SweepParam::Rho => "rho",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub param: SweepParam,
    pub value: f64,
    pub distance_sup: f64,
    pub distance_l2: f64,
    pub worst: Mode,
    pub runtime_s: f64,
    /// Whether this row continues the expected decreasing trend.
    pub monotone_ok: bool,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<ConvergenceRow>,
    /// Values whose solve failed; failures abort the row, not the sweep.
    pub failures: Vec<(f64, Error)>,
}

impl SweepOutcome {
    pub fn trend_ok(&self) -> bool {
        self.rows.iter().all(|r| r.monotone_ok)
    }
}

fn with_value(base: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    match param {
        SweepParam::N => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "n sweep values must be positive integers, got {value}"
                )));
            }
            cfg.n = value as u32;
        }
        SweepParam::Delta => cfg.delta = value,
        SweepParam::Rho => cfg.rho = value,
    }
    Ok(cfg)
}

/// Vary one parameter of `base` and measure the spectral distance to a fixed
/// reference spectrum. Rows come out sorted along the improvement direction
/// of the corresponding limit: n ascending, delta and rho descending.
pub fn sweep(
    base: &ExperimentConfig,
    param: SweepParam,
    values: &[f64],
    reference: &DtnSpectrum,
    sequential: bool,
) -> Result<SweepOutcome> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sweep values"));
    if param != SweepParam::N {
        sorted.reverse();
    }

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut prev_sup: Option<f64> = None;
    for &value in &sorted {
        let cfg = with_value(base, param, value)?;
        let start = Instant::now();
        let spec = match cfg.spectrum(sequential) {
            Ok(s) => s,
            Err(e @ (Error::Config(_) | Error::InvalidParameter(_))) => return Err(e),
            Err(e) => {
                failures.push((value, e));
                continue;
            }
        };
        let report = distance(&spec, reference, base.weights)?;
        let monotone_ok = prev_sup.is_none_or(|p| report.sup <= p);
        prev_sup = Some(report.sup);
        rows.push(ConvergenceRow {
            param,
            value,
            distance_sup: report.sup,
            distance_l2: report.l2,
            worst: report.worst,
            runtime_s: start.elapsed().as_secs_f64(),
            monotone_ok,
        });
    }
    Ok(SweepOutcome { rows, failures })
}

/// Discrete L2 gap between the mode potentials of two configurations over
/// sample radii in the matching annulus, each normalized to `u(3) = 1`.
/// Requires the configurations to share their media on [2, 3], i.e. equal
/// omega and delta.
pub fn annulus_field_gap(
    a: &ExperimentConfig,
    b: &ExperimentConfig,
    mode: Mode,
    radii: &[f64],
) -> Result<f64> {
    if a.omega != b.omega || a.delta != b.delta {
        return Err(Error::Config(
            "annulus gap requires identical media on [2, 3] (same omega and delta)".into(),
        ));
    }
    if radii.is_empty() {
        return Err(Error::Config("annulus gap needs at least one radius".into()));
    }
    a.validate()?;
    b.validate()?;
    let med_a = a.build_medium()?;
    let med_b = b.build_medium()?;
    let ua = potential_samples(&med_a, mode, a.tol, radii)?;
    let ub = potential_samples(&med_b, mode, b.tol, radii)?;
    let sum: f64 = ua.iter().zip(&ub).map(|(x, y)| (x - y).norm_sqr()).sum();
    Ok((sum / radii.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spectrum_from(zetas: &[Complex64]) -> DtnSpectrum {
        let entries = mode_list(zetas.len() as u32 / 2)
            .into_iter()
            .zip(zetas)
            .map(|(mode, &zeta)| SpectrumEntry { mode, zeta })
            .collect();
        DtnSpectrum { omega: 1.0, fingerprint: String::new(), entries }
    }

    #[test]
    fn vacuum_medium_matches_closed_form() {
        let med = RadialMedium::vacuum(1.0);
        let s = medium_spectrum(&med, 8, 1e-10, true, String::new()).unwrap();
        let v = vacuum_spectrum(1.0, 8).unwrap();
        let d = distance(&s, &v, WeightScheme::Uniform).unwrap();
        assert!(d.sup < 1e-9, "sup gap {}", d.sup);
    }

    #[test]
    fn spectrum_is_deterministic_and_order_independent() {
        let cfg = {
            let mut c = ExperimentConfig::new(0.25, 0.05, 4);
            c.l_max = 3;
            c
        };
        let s1 = cfg.spectrum(true).unwrap();
        let s2 = cfg.spectrum(true).unwrap();
        assert_eq!(s1, s2);
        let par = cfg.spectrum(false).unwrap();
        assert_eq!(s1, par);
    }

    #[test]
    fn fingerprint_stable_and_sensitive() {
        let a = ExperimentConfig::new(0.25, 0.05, 4);
        let b = ExperimentConfig::new(0.25, 0.05, 8);
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 64);
    }

    #[test]
    fn resonance_guard_accepts_default_rejects_eigenvalue() {
        resonance_guard(1.0, 20).unwrap();
        // First zero of psi_1 is at z = tan z, z ~ 4.4934; omega = z/3.
        let omega = 4.493409457909064 / 3.0;
        assert!(matches!(resonance_guard(omega, 3), Err(Error::NearResonance(_))));
    }

    #[test]
    fn distance_identity_and_mismatch() {
        let v = vacuum_spectrum(1.0, 5).unwrap();
        let d = distance(&v, &v, WeightScheme::Sobolev).unwrap();
        assert_eq!(d.sup, 0.0);
        assert_eq!(d.l2, 0.0);
        let w = vacuum_spectrum(1.0, 6).unwrap();
        assert!(matches!(distance(&v, &w, WeightScheme::Sobolev), Err(Error::SpectrumMismatch(_))));
        let mut shifted = v.clone();
        shifted.omega = 2.0;
        assert!(distance(&v, &shifted, WeightScheme::Sobolev).is_err());
    }

    #[test]
    fn tail_gap_picks_cutoff_degree() {
        let a = spectrum_from(&[Complex64::new(1.0, 0.0); 4]);
        let mut zs = [Complex64::new(1.0, 0.0); 4];
        zs[3] += Complex64::new(0.0, 0.25); // TM entry at l = 2
        zs[0] += Complex64::new(3.0, 0.0); // l = 1 gap must not count
        let b = spectrum_from(&zs);
        assert!((tail_gap(&a, &b).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sweep_sorts_in_improvement_direction() {
        let base = {
            let mut c = ExperimentConfig::new(0.25, 0.0, 0);
            c.l_max = 2;
            c
        };
        let reference = vacuum_spectrum(1.0, 2).unwrap();
        let out = sweep(&base, SweepParam::Rho, &[0.1, 0.25, 0.2], &reference, true).unwrap();
        let values: Vec<f64> = out.rows.iter().map(|r| r.value).collect();
        assert_eq!(values, vec![0.25, 0.2, 0.1]);
        assert!(out.failures.is_empty());
        assert!(out.rows.iter().all(|r| r.distance_sup >= 0.0));
    }

    #[test]
    fn sweep_rejects_fractional_n() {
        let base = ExperimentConfig::new(0.25, 0.05, 0);
        let reference = vacuum_spectrum(1.0, 20).unwrap();
        assert!(sweep(&base, SweepParam::N, &[2.5], &reference, true).is_err());
    }

    #[test]
    fn annulus_gap_identical_configs_is_zero() {
        let cfg = {
            let mut c = ExperimentConfig::new(0.25, 0.05, 0);
            c.l_max = 2;
            c
        };
        let m = Mode { pol: Polarization::Te, l: 1 };
        let gap = annulus_field_gap(&cfg, &cfg, m, &[2.25, 2.5, 2.75]).unwrap();
        assert!(gap < 1e-12);

        let other = ExperimentConfig::new(0.25, 0.1, 0);
        assert!(annulus_field_gap(&cfg, &other, m, &[2.5]).is_err());
    }

    proptest! {
        #[test]
        fn distance_metric_properties(
            re in proptest::collection::vec(-10.0f64..10.0, 12),
            im in proptest::collection::vec(-10.0f64..10.0, 12),
        ) {
            let z: Vec<Complex64> = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
            let (a, b, c) = (
                spectrum_from(&z[0..4]),
                spectrum_from(&z[4..8]),
                spectrum_from(&z[8..12]),
            );
            for scheme in [WeightScheme::Sobolev, WeightScheme::Uniform] {
                let dab = distance(&a, &b, scheme).unwrap().sup;
                let dba = distance(&b, &a, scheme).unwrap().sup;
                let dac = distance(&a, &c, scheme).unwrap().sup;
                let dcb = distance(&c, &b, scheme).unwrap().sup;
                prop_assert!((dab - dba).abs() < 1e-12);
                prop_assert!(dab <= dac + dcb + 1e-12);
            }
        }
    }
}
