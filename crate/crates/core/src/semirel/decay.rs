//! Exponential decay fits of grid eigenfunctions.

use serde::Serialize;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// Shell averages below this are treated as underflow and dropped.
pub const UNDERFLOW: f64 = 1e-14;
pub const MIN_R2: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// [`crate::scalar::linear_fit`] with input checks.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Validation(format!("need ≥ 2 paired samples, got {} and {}", x.len(), y.len())));
    }
    if x.iter().all(|a| *a == x[0]) {
        return Err(Error::Domain("abscissae are all equal".into()));
    }
    let (slope, intercept, r2) = crate::scalar::linear_fit(x, y);
    Ok(LinearFit { slope, intercept, r2 })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// Slope of `log` shell average against radius.
    pub rate: f64,
    pub fit: Option<LinearFit>,
    pub radii: Vec<f64>,
    pub shell_means: Vec<f64>,
    /// Slope negative with `R² ≥ 0.95`.
    pub applicable: bool,
    pub note: String,
}

/// Fits `log ⟨|ψ|⟩_shell` against `r` for shells between
/// `threshold_radius` and `max_radius`. Shells have the width of one grid
/// spacing and are centred at the origin.
pub fn decay_rate(grid: &SpectralGrid, psi: &[f64], threshold_radius: f64, max_radius: f64) -> Result<DecayFit> {
    if psi.len() != grid.len() {
        return Err(Error::Validation("grid function length does not match the grid".into()));
    }
    if !(max_radius > threshold_radius) {
        return Err(Error::Domain(format!("empty fit window [{threshold_radius}, {max_radius}]")));
    }
    let norm = grid.norm(psi);
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Precondition(format!("ψ must be normalized, has norm {norm}")));
    }
    let h = grid.spacing();
    let bins = (max_radius / h).ceil() as usize + 1;
    let mut sum = vec![0.0; bins];
    let mut rsum = vec![0.0; bins];
    let mut count = vec![0usize; bins];
    for (i, v) in psi.iter().enumerate() {
        let x = grid.point(i);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r < threshold_radius || r > max_radius {
            continue;
        }
        let b = (r / h) as usize;
        sum[b] += v.abs();
        rsum[b] += r;
        count[b] += 1;
    }
    let mut radii = Vec::new();
    let mut means = Vec::new();
    for b in 0..bins {
        if count[b] == 0 {
            continue;
        }
        let mean = sum[b] / count[b] as f64;
        if mean < UNDERFLOW {
            // the tail beyond the first underflowing shell is noise
            break;
        }
        radii.push(rsum[b] / count[b] as f64);
        means.push(mean);
    }
    if radii.len() < 3 {
        return Ok(DecayFit {
            rate: f64::NAN,
            fit: None,
            radii,
            shell_means: means,
            applicable: false,
            note: "fewer than three shells in the fit window".into(),
        });
    }
    let logs: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let fit = linear_fit(&radii, &logs)?;
    let (applicable, note) = if fit.slope >= -1e-10 {
        (false, "shell averages are not decaying".to_string())
    } else if fit.r2 < MIN_R2 {
        (false, format!("fit R² = {} below {MIN_R2}", fit.r2))
    } else {
        (true, String::new())
    };
    Ok(DecayFit { rate: fit.slope, fit: Some(fit), radii, shell_means: means, applicable, note })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_mode_is_not_applicable() {
        let g = SpectralGrid::new(3, 16, 4.0).unwrap();
        let c = 1.0 / (g.len() as f64 * g.cell_volume()).sqrt();
        let psi = vec![c; g.len()];
        let fit = decay_rate(&g, &psi, 0.5, 3.5).unwrap();
        assert!(!fit.applicable);
    }

    #[test]
    fn exponential_is_recovered() {
        let g = SpectralGrid::new(3, 32, 8.0).unwrap();
        let mut psi = g.sample(|x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()).exp());
        let n = g.norm(&psi);
        psi.iter_mut().for_each(|v| *v /= n);
        let fit = decay_rate(&g, &psi, 1.0, 7.0).unwrap();
        assert!(fit.applicable);
        assert!((fit.rate + 1.0).abs() < 0.05, "{}", fit.rate);
    }
}
