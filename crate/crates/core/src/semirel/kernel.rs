//! Off-diagonal quadratic forms of `T` through its Bessel kernel
//! `−K₂(|x−y|) / (2π² |x−y|²)` in three dimensions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::bessel::bessel_k2;
use super::decay::{linear_fit, LinearFit};
use super::grid::{apply_t, to_complex, SpectralGrid};
use crate::error::{Error, Result};

fn support(f: &[Complex64]) -> Vec<usize> {
    (0..f.len()).filter(|&i| f[i] != Complex64::new(0.0, 0.0)).collect()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// `⟨f, T g⟩` evaluated through the kernel, for `f` and `g` whose grid
/// supports are at distance at least `separation ≥ 1`.
pub fn kernel_form(grid: &SpectralGrid, f: &[Complex64], g: &[Complex64], separation: f64) -> Result<Complex64> {
    if grid.dim() != 3 {
        return Err(Error::Domain("the Bessel kernel form is three-dimensional".into()));
    }
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::Validation("grid function length does not match the grid".into()));
    }
    if !(separation >= 1.0) {
        return Err(Error::Precondition(format!("separation must be at least 1, got {separation}")));
    }
    let sf = support(f);
    let sg = support(g);
    if sf.is_empty() || sg.is_empty() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let pg: Vec<[f64; 3]> = sg.iter().map(|&j| grid.point(j)).collect();
    let rows: Vec<(Complex64, f64)> = sf
        .par_iter()
        .map(|&i| {
            let x = grid.point(i);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut closest = f64::INFINITY;
            for (k, &j) in sg.iter().enumerate() {
                let r = dist(x, pg[k]);
                closest = closest.min(r);
                if r > 0.0 {
                    let w = bessel_k2(r).expect("positive distance") / (r * r);
                    acc += g[j] * w;
                }
            }
            (f[i].conj() * acc, closest)
        })
        .collect();
    let closest = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    if closest < separation {
        return Err(Error::Precondition(format!(
            "supports are {closest} apart, less than the separation {separation}"
        )));
    }
    let sum: Complex64 = rows.iter().map(|r| r.0).sum();
    let dv = grid.cell_volume();
    Ok(sum * (-dv * dv / (2.0 * std::f64::consts::PI.powi(2))))
}

/// `⟨f, T g⟩` through the Fourier multiplier.
pub fn fourier_form(grid: &SpectralGrid, f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    let tg = apply_t(grid, g)?;
    Ok(grid.inner(f, &tg))
}

/// `(1 − |x − c|²/a²)^k` inside the ball of radius `a`, 0 outside.
pub fn polynomial_bump(grid: &SpectralGrid, center: [f64; 3], radius: f64, power: i32) -> Vec<f64> {
    grid.sample(|x| {
        let s = dist(x, center) / radius;
        if s < 1.0 {
            (1.0 - s * s).powi(power)
        } else {
            0.0
        }
    })
}

/// Two bumps of radius `a` centred on the main diagonal with support gap
/// `separation`. Keeping the pair off the coordinate axes avoids aligning
/// it with the grid's periodic images.
pub fn diagonal_bump_pair(grid: &SpectralGrid, separation: f64, radius: f64, power: i32) -> Result<(Vec<f64>, Vec<f64>)> {
    let half = 0.5 * separation + radius;
    let c = half / 3f64.sqrt();
    if c + radius >= grid.half_width() {
        return Err(Error::Domain(format!(
            "bumps reach {}, box half-width is {}",
            c + radius,
            grid.half_width()
        )));
    }
    Ok((
        polynomial_bump(grid, [c, c, c], radius, power),
        polynomial_bump(grid, [-c, -c, -c], radius, power),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelComparison {
    pub separation: f64,
    pub kernel: f64,
    pub fourier: f64,
    pub relative_difference: f64,
}

/// Kernel and Fourier evaluations of `⟨f, T g⟩` for the diagonal pair.
pub fn compare_forms(grid: &SpectralGrid, separation: f64, radius: f64, power: i32) -> Result<KernelComparison> {
    let (f, g) = diagonal_bump_pair(grid, separation, radius, power)?;
    let (f, g) = (to_complex(&f), to_complex(&g));
    let k = kernel_form(grid, &f, &g, separation)?.re;
    let q = fourier_form(grid, &f, &g)?.re;
    Ok(KernelComparison {
        separation,
        kernel: k,
        fourier: q,
        relative_difference: (k - q).abs() / q.abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelDecay {
    pub separations: Vec<f64>,
    /// `|⟨f, T g⟩| / (‖f‖ ‖g‖)` per separation.
    pub normalized_values: Vec<f64>,
    /// Minus the slope of the log of the normalized values.
    pub rate: f64,
    pub fit: LinearFit,
}

pub fn kernel_decay(grid: &SpectralGrid, separations: &[f64], radius: f64, power: i32) -> Result<KernelDecay> {
    let mut values = Vec::with_capacity(separations.len());
    for &r in separations {
        let (f, g) = diagonal_bump_pair(grid, r, radius, power)?;
        let nf = grid.norm(&f);
        let ng = grid.norm(&g);
        let v = kernel_form(grid, &to_complex(&f), &to_complex(&g), r)?;
        values.push(v.norm() / (nf * ng));
    }
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(separations, &logs)?;
    Ok(KernelDecay {
        separations: separations.to_vec(),
        normalized_values: values,
        rate: -fit.slope,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_gives_zero() {
        let g = SpectralGrid::new(3, 16, 8.0).unwrap();
        let (a, _) = diagonal_bump_pair(&g, 2.0, 1.5, 4).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); g.len()];
        assert_eq!(kernel_form(&g, &to_complex(&a), &zero, 2.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn overlapping_supports_are_rejected() {
        let g = SpectralGrid::new(3, 16, 8.0).unwrap();
        let a = to_complex(&polynomial_bump(&g, [0.0; 3], 2.0, 4));
        let b = to_complex(&polynomial_bump(&g, [1.0, 0.0, 0.0], 2.0, 4));
        assert!(matches!(kernel_form(&g, &a, &b, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn kernel_form_is_negative_for_positive_bumps() {
        let g = SpectralGrid::new(3, 16, 8.0).unwrap();
        let (a, b) = diagonal_bump_pair(&g, 2.0, 1.5, 4).unwrap();
        let v = kernel_form(&g, &to_complex(&a), &to_complex(&b), 2.0).unwrap();
        assert!(v.re < 0.0);
        assert_eq!(v.im, 0.0);
    }
}
