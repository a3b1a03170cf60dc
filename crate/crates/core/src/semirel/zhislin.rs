//! Scaled shell trial functions `f_R(x) = R^{−3/2} f(x/R)` for a single
//! smoothed nucleus in three dimensions.
//!
//! Trials are radial, so `u(r) = r f(r)` extended oddly to the line turns
//! the 3D forms into 1D ones: `⟨f, A f⟩ = 2π ∫ ũ A₁ ũ` for `A = T` or a
//! radial potential. A 1D grid therefore carries the whole computation.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::decay::{linear_fit, LinearFit};
use super::grid::{apply_t_real, SpectralGrid};
use crate::error::{Error, Result};

pub const SHELL_INNER: f64 = 1.25;
pub const SHELL_OUTER: f64 = 1.75;
/// Grid spacings required across the shell of each trial.
pub const SHELL_POINTS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuclearPotential {
    pub charge: f64,
    pub softening: f64,
}

impl NuclearPotential {
    pub fn value(&self, r: f64) -> f64 {
        -self.charge / (r * r + self.softening * self.softening).sqrt()
    }
}

/// Unit-scale profile, a C^∞ bump on `5/4 < r < 7/4`.
pub fn shell_profile(r: f64) -> f64 {
    let mid = 0.5 * (SHELL_INNER + SHELL_OUTER);
    let half = 0.5 * (SHELL_OUTER - SHELL_INNER);
    let s = (r - mid) / half;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialValue {
    pub r: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZhislinReport {
    pub nucleus: NuclearPotential,
    pub values: Vec<TrialValue>,
    pub min_total: f64,
    pub argmin_r: f64,
    /// Essential floor of the one-nucleus problem.
    pub floor: f64,
    pub dips_below_floor: bool,
    /// `total ≈ −c/R + d/R²`.
    pub c: f64,
    pub d: f64,
    /// Fit of `log kinetic` against `log R`.
    pub kinetic_fit: LinearFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialFamily {
    pub scales: Vec<f64>,
    pub rayleigh_quotients: Vec<f64>,
    /// Largest `|⟨f_i, f_j⟩|`, `i ≠ j`.
    pub max_overlap: f64,
    /// Largest `|⟨f_i, H f_j⟩|`, `i ≠ j`.
    pub max_coupling: f64,
    /// Eigenvalues of `H` compressed to the span of the trials.
    pub compressed_eigenvalues: Vec<f64>,
    pub all_negative: bool,
}

fn odd_trial(grid: &SpectralGrid, r: f64) -> Result<Vec<f64>> {
    if grid.dim() != 1 {
        return Err(Error::Domain("the radial reduction runs on a 1D grid".into()));
    }
    if SHELL_OUTER * r >= grid.half_width() {
        return Err(Error::Domain(format!(
            "trial support reaches {}, grid half-width is {}",
            SHELL_OUTER * r,
            grid.half_width()
        )));
    }
    if (SHELL_OUTER - SHELL_INNER) * r < SHELL_POINTS * grid.spacing() {
        return Err(Error::Domain(format!("trial at R = {r} is not resolved by spacing {}", grid.spacing())));
    }
    let scale = r.powf(-1.5);
    Ok(grid.sample(|x| x[0] * scale * shell_profile(x[0].abs() / r)))
}

fn normalized_trial(grid: &SpectralGrid, r: f64) -> Result<Vec<f64>> {
    let mut u = odd_trial(grid, r)?;
    let n = (2.0 * std::f64::consts::PI * grid.inner_real(&u, &u)).sqrt();
    u.iter_mut().for_each(|x| *x /= n);
    Ok(u)
}

struct Forms<'a> {
    grid: &'a SpectralGrid,
    potential: Vec<f64>,
}

impl Forms<'_> {
    fn new<'a>(grid: &'a SpectralGrid, nucleus: &NuclearPotential) -> Forms<'a> {
        Forms { grid, potential: grid.sample(|x| nucleus.value(x[0].abs())) }
    }

    fn kinetic(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        Ok(2.0 * std::f64::consts::PI * self.grid.inner_real(a, &apply_t_real(self.grid, b)?))
    }

    fn potential(&self, a: &[f64], b: &[f64]) -> f64 {
        let vb: Vec<f64> = b.iter().zip(&self.potential).map(|(x, v)| x * v).collect();
        2.0 * std::f64::consts::PI * self.grid.inner_real(a, &vb)
    }
}

/// `⟨f_R, (T + V) f_R⟩` across `r_values` on a 1D radial grid.
pub fn zhislin_trial_bound(grid: &SpectralGrid, nucleus: &NuclearPotential, r_values: &[f64]) -> Result<ZhislinReport> {
    if r_values.len() < 3 {
        return Err(Error::Validation("need at least three scales".into()));
    }
    let forms = Forms::new(grid, nucleus);
    let mut values = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let u = normalized_trial(grid, r)?;
        let kinetic = forms.kinetic(&u, &u)?;
        let potential = forms.potential(&u, &u);
        values.push(TrialValue { r, kinetic, potential, total: kinetic + potential });
    }
    let (mut min_total, mut argmin_r) = (f64::INFINITY, f64::NAN);
    for v in &values {
        if v.total < min_total {
            min_total = v.total;
            argmin_r = v.r;
        }
    }
    // R²·total ≈ −c R + d, which weights the large-R tail
    let rs: Vec<f64> = values.iter().map(|v| v.r).collect();
    let scaled: Vec<f64> = values.iter().map(|v| v.total * v.r * v.r).collect();
    let shape = linear_fit(&rs, &scaled)?;
    let lx: Vec<f64> = values.iter().map(|v| v.r.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.kinetic.ln()).collect();
    Ok(ZhislinReport {
        nucleus: *nucleus,
        values,
        min_total,
        argmin_r,
        floor: 0.0,
        dips_below_floor: min_total < 0.0,
        c: -shape.slope,
        d: shape.intercept,
        kinetic_fit: linear_fit(&lx, &ly)?,
    })
}

/// Rayleigh quotients and the compressed Hamiltonian for trials at
/// `scales`, which should have pairwise disjoint shells.
pub fn trial_family(grid: &SpectralGrid, nucleus: &NuclearPotential, scales: &[f64]) -> Result<TrialFamily> {
    let forms = Forms::new(grid, nucleus);
    let trials: Vec<Vec<f64>> = scales.iter().map(|&r| normalized_trial(grid, r)).collect::<Result<_>>()?;
    let k = trials.len();
    let mut h = DMatrix::zeros(k, k);
    let mut s = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            h[(i, j)] = forms.kinetic(&trials[i], &trials[j])? + forms.potential(&trials[i], &trials[j]);
            s[(i, j)] = 2.0 * std::f64::consts::PI * grid.inner_real(&trials[i], &trials[j]);
        }
    }
    let h = 0.5 * (&h + h.transpose());
    let off = |m: &DMatrix<f64>| {
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    worst = worst.max(m[(i, j)].abs());
                }
            }
        }
        worst
    };
    // S^{−1/2} H S^{−1/2}
    let se = SymmetricEigen::new(s.clone());
    if se.eigenvalues.iter().any(|l| *l <= 1e-12) {
        return Err(Error::Conditioning("trial functions are linearly dependent".into()));
    }
    let inv_sqrt = &se.eigenvectors
        * DMatrix::from_diagonal(&se.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * se.eigenvectors.transpose();
    let compressed = &inv_sqrt * &h * &inv_sqrt;
    let mut ev: Vec<f64> = SymmetricEigen::new(0.5 * (&compressed + compressed.transpose())).eigenvalues.iter().cloned().collect();
    ev.sort_by(f64::total_cmp);
    let rq: Vec<f64> = (0..k).map(|i| h[(i, i)] / s[(i, i)]).collect();
    Ok(TrialFamily {
        scales: scales.to_vec(),
        all_negative: rq.iter().all(|q| *q < 0.0) && ev.iter().all(|e| *e < 0.0),
        rayleigh_quotients: rq,
        max_overlap: off(&s),
        max_coupling: off(&h),
        compressed_eigenvalues: ev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_reduction_matches_free_gaussian_energy() {
        // f = e^{−r²/2}: ⟨f, (−Δ/2) f⟩/‖f‖² = 3/4; T ≤ −Δ/2 and both agree
        // to leading order for wide trials
        let g = SpectralGrid::new(1, 1024, 64.0).unwrap();
        let w = 8.0;
        let u = g.sample(|x| x[0] * (-(x[0] / w).powi(2) / 2.0).exp());
        let forms = Forms::new(&g, &NuclearPotential { charge: 0.0, softening: 1.0 });
        let e = forms.kinetic(&u, &u).unwrap() / (2.0 * std::f64::consts::PI * g.inner_real(&u, &u));
        let free = 0.75 / (w * w);
        assert!(e < free && e > 0.95 * free, "{e} vs {free}");
    }

    #[test]
    fn too_small_grid_is_a_domain_error() {
        let g = SpectralGrid::new(1, 1024, 16.0).unwrap();
        let n = NuclearPotential { charge: 1.0, softening: 1.0 };
        assert!(matches!(zhislin_trial_bound(&g, &n, &[4.0, 8.0, 12.0]), Err(Error::Domain(_))));
    }
}
