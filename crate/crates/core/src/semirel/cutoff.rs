//! Smooth radial cutoffs and the three-piece partition of unity.

use serde::Serialize;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};

pub const INNER: f64 = 0.1;
pub const OUTER: f64 = 0.125;

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ step, 0 for `t ≤ 0` and 1 for `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = psi(t);
        a / (a + psi(1.0 - t))
    }
}

/// Unit-scale profile: 1 on `r ≤ 1/10`, 0 on `r ≥ 1/8`.
pub fn profile(r: f64) -> f64 {
    1.0 - smooth_step((r - INNER) / (OUTER - INNER))
}

/// `ζ_R(x) = χ(|x|/R)`, optionally centred away from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffFunction {
    pub scale: f64,
    pub center: [f64; 3],
}

impl CutoffFunction {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!("cutoff scale must be positive, got {scale}")));
        }
        Ok(Self { scale, center: [0.0; 3] })
    }

    pub fn centered(mut self, center: [f64; 3]) -> Self {
        self.center = center;
        self
    }

    pub fn value(&self, x: [f64; 3]) -> f64 {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        profile((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() / self.scale)
    }

    /// Width of the transition shell, `R/40`.
    pub fn shell_width(&self) -> f64 {
        (OUTER - INNER) * self.scale
    }

    pub fn outer_radius(&self) -> f64 {
        OUTER * self.scale
    }

    pub fn sample(&self, grid: &SpectralGrid) -> Vec<f64> {
        grid.sample(|x| self.value(x))
    }

    /// Requires at least `points` grid spacings across the transition shell
    /// and the support inside the box.
    pub fn check_resolved(&self, grid: &SpectralGrid, points: f64) -> Result<()> {
        if self.shell_width() < points * grid.spacing() {
            return Err(Error::Precondition(format!(
                "transition shell of width {} spans fewer than {points} grid spacings of {}",
                self.shell_width(),
                grid.spacing()
            )));
        }
        let reach = self.center.iter().map(|c| c.abs()).fold(0.0, f64::max) + self.outer_radius();
        if reach >= grid.half_width() {
            return Err(Error::Precondition(format!(
                "cutoff support reaches {reach}, box half-width is {}",
                grid.half_width()
            )));
        }
        Ok(())
    }
}

/// `J_{i,R} = v_i(x/R)/V(x/R)` with `v₁ = χ`, `v₂ = χ(· − s)`,
/// `v₀ = 1 − v₁ − v₂` and `V = (v₀² + v₁² + v₂²)^{1/2}`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub scale: f64,
    pub separation: [f64; 3],
    pub functions: [Vec<f64>; 3],
}

impl PartitionOfUnity {
    /// Partition with unit separation vector `separation` (in units of `R`).
    pub fn new(grid: &SpectralGrid, scale: f64, separation: [f64; 3]) -> Result<Self> {
        let norm = separation.iter().map(|s| s * s).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("separation must be a unit vector, has length {norm}")));
        }
        if grid.dim() == 1 && (separation[1] != 0.0 || separation[2] != 0.0) {
            return Err(Error::Domain("1D partitions need separation ±e₁".into()));
        }
        let chi1 = CutoffFunction::new(scale)?;
        let chi2 = chi1.centered(separation.map(|s| s * scale));
        chi1.check_resolved(grid, 8.0)?;
        chi2.check_resolved(grid, 8.0)?;
        let n = grid.len();
        let mut j = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for idx in 0..n {
            let x = grid.point(idx);
            let v1 = chi1.value(x);
            let v2 = chi2.value(x);
            let v0 = 1.0 - v1 - v2;
            let big_v = (v0 * v0 + v1 * v1 + v2 * v2).sqrt();
            j[0][idx] = v0 / big_v;
            j[1][idx] = v1 / big_v;
            j[2][idx] = v2 / big_v;
        }
        Ok(Self { scale, separation, functions: j })
    }

    /// `max |Σ J_i² − 1|` over the grid.
    pub fn defect(&self) -> f64 {
        let [a, b, c] = &self.functions;
        (0..a.len()).map(|i| (a[i] * a[i] + b[i] * b[i] + c[i] * c[i] - 1.0).abs()).fold(0.0, f64::max)
    }
}
