//! 1D periodic cell-problem solver.
//!
//! Independent check of the effective-medium formulas behind the laminate:
//! the corrector of a periodic scalar coefficient satisfies
//! `(gamma (chi' + 1))' = 0`, so the constant flux is the harmonic mean and
//! `chi' = -1 + HM/gamma`. The solver goes through a conservative
//! finite-difference system instead of that shortcut; the closed form is the
//! oracle.

use crate::error::{Error, Result};

/// Samples of a positive 1-periodic coefficient at the uniform nodes
/// `t_i = i/N`, `i = 0..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    samples: Vec<f64>,
}

impl PeriodicProfile {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InvalidParameter(format!(
                "profile needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "profile samples must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|i| f(i as f64 / n as f64)).collect())
    }

    /// Two-phase laminate: `alpha` on [0, 1/2), `beta` on [1/2, 1).
    pub fn two_phase(alpha: f64, beta: f64, n: usize) -> Result<Self> {
        Self::from_fn(n, |t| if t < 0.5 { alpha } else { beta })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Harmonic average of adjacent node samples; exact face coefficient for
    /// piecewise-constant profiles aligned with the grid.
    fn face(&self, i: usize) -> f64 {
        let n = self.samples.len();
        let a = self.samples[i];
        let b = self.samples[(i + 1) % n];
        2.0 * a * b / (a + b)
    }
}

/// Discrete corrector of the periodic cell problem.
#[derive(Debug, Clone)]
pub struct CellSolution {
    /// Corrector at the nodes, zero mean.
    pub chi: Vec<f64>,
    /// Forward differences `(chi_{i+1} - chi_i) N` on face i (between nodes
    /// i and i+1, periodic).
    pub dchi_faces: Vec<f64>,
    /// Central differences at the nodes.
    pub dchi_nodes: Vec<f64>,
}

/// Solve `(gamma chi')' = -gamma'` with periodic boundary conditions and
/// zero mean, by flux-form finite differences with harmonic face averaging.
pub fn solve_cell_1d(profile: &PeriodicProfile) -> Result<CellSolution> {
    let n = profile.len();
    let h = 1.0 / n as f64;

    // Unknowns chi_1..chi_{n-1} with chi_0 pinned to 0; the dropped equation
    // at node 0 is the negative sum of the others. Row i (node i):
    //   g_{i-1/2} chi_{i-1} - (g_{i-1/2} + g_{i+1/2}) chi_i + g_{i+1/2} chi_{i+1}
    //     = -h (g_{i+1/2} - g_{i-1/2})
    let m = n - 1;
    let mut diag = vec![0.0; m];
    let mut lower = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for i in 1..n {
        let gl = profile.face(i - 1);
        let gr = profile.face(i);
        let k = i - 1;
        lower[k] = gl;
        diag[k] = -(gl + gr);
        upper[k] = gr;
        rhs[k] = -h * (gr - gl);
    }
    // chi_0 = chi_n = 0 removes the off-diagonal couplings at both ends.
    let sol = solve_tridiagonal(&lower, &mut diag, &upper, &mut rhs)?;

    let mut chi = Vec::with_capacity(n);
    chi.push(0.0);
    chi.extend_from_slice(&sol);
    let mean = chi.iter().sum::<f64>() / n as f64;
    for v in &mut chi {
        *v -= mean;
    }

    let dchi_faces: Vec<f64> = (0..n)
        .map(|i| (chi[(i + 1) % n] - chi[i]) / h)
        .collect();
    let dchi_nodes: Vec<f64> = (0..n)
        .map(|i| (chi[(i + 1) % n] - chi[(i + n - 1) % n]) / (2.0 * h))
        .collect();

    Ok(CellSolution { chi, dchi_faces, dchi_nodes })
}

fn solve_tridiagonal(
    lower: &[f64],
    diag: &mut [f64],
    upper: &[f64],
    rhs: &mut [f64],
) -> Result<Vec<f64>> {
    let m = diag.len();
    for i in 1..m {
        if diag[i - 1] == 0.0 {
            return Err(Error::InvalidParameter(
                "singular discrete cell system (zero pivot)".into(),
            ));
        }
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if diag[m - 1] == 0.0 {
        return Err(Error::InvalidParameter(
            "singular discrete cell system (zero pivot)".into(),
        ));
    }
    let mut x = vec![0.0; m];
    x[m - 1] = rhs[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    }
    Ok(x)
}

/// Discrete harmonic mean of the profile.
pub fn harmonic_mean(profile: &PeriodicProfile) -> f64 {
    let inv_sum: f64 = profile.samples().iter().map(|g| 1.0 / g).sum();
    profile.len() as f64 / inv_sum
}

/// Analytic corrector derivative `-1 + HM/gamma` at the nodes; the oracle
/// for [`solve_cell_1d`].
pub fn chi1_closed_form(profile: &PeriodicProfile) -> Vec<f64> {
    let c = harmonic_mean(profile);
    profile.samples().iter().map(|g| -1.0 + c / g).collect()
}

/// Homogenized eigenvalues of the radial cell problem: `underline` through
/// the corrector-energy quadrature `sum h gamma (1 + chi')^2`, `overline`
/// the arithmetic mean (the tangential correctors vanish because the profile
/// does not depend on the tangential fast variables).
pub fn homogenize_profile(profile: &PeriodicProfile) -> Result<(f64, f64)> {
    let sol = solve_cell_1d(profile)?;
    let n = profile.len();
    let h = 1.0 / n as f64;
    let underline: f64 = (0..n)
        .map(|i| {
            let g = profile.face(i);
            let grad = 1.0 + sol.dchi_faces[i];
            h * g * grad * grad
        })
        .sum();
    let overline = profile.samples().iter().sum::<f64>() / n as f64;
    Ok((underline, overline))
}
