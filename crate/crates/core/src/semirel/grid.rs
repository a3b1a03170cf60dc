//! Periodic grids in one or three dimensions and the Fourier multiplier
//! `T = √(1 − Δ) − 1` on them.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[−W, W)^d` with `n` points per axis.
#[derive(Clone)]
pub struct SpectralGrid {
    dim: usize,
    n: usize,
    half_width: f64,
    spacing: f64,
    /// `|p|` per mode, in the same flattened order as grid functions.
    momenta: Vec<f64>,
    symbol: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .field("half_width", &self.half_width)
            .finish()
    }
}

/// `√(1 + p²) − 1` without cancellation at small `p`.
pub fn symbol(p: f64) -> f64 {
    let q = p * p;
    q / ((1.0 + q).sqrt() + 1.0)
}

impl SpectralGrid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if dim != 1 && dim != 3 {
            return Err(Error::Domain(format!("grid dimension must be 1 or 3, got {dim}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Domain(format!("points per axis must be a power of two ≥ 2, got {n}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Domain(format!("half-width must be positive, got {half_width}")));
        }
        let axis: Vec<f64> = (0..n).map(|k| Self::axis_momentum(n, half_width, k)).collect();
        let momenta: Vec<f64> = if dim == 1 {
            axis.iter().map(|p| p.abs()).collect()
        } else {
            let mut m = Vec::with_capacity(n * n * n);
            for a in &axis {
                for b in &axis {
                    for c in &axis {
                        m.push((a * a + b * b + c * c).sqrt());
                    }
                }
            }
            m
        };
        let symbol = momenta.iter().map(|p| symbol(*p)).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            n,
            half_width,
            spacing: 2.0 * half_width / n as f64,
            momenta,
            symbol,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    /// `2π k_signed / (2W)` for mode `k` of one axis.
    fn axis_momentum(n: usize, half_width: f64, k: usize) -> f64 {
        let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        2.0 * std::f64::consts::PI * signed / (2.0 * half_width)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn symbol_values(&self) -> &[f64] {
        &self.symbol
    }

    /// Signed momentum of mode `k` along one axis.
    pub fn axis_momenta(&self) -> Vec<f64> {
        (0..self.n).map(|k| Self::axis_momentum(self.n, self.half_width, k)).collect()
    }

    /// Coordinates `−W + i h` of one axis.
    pub fn axis_points(&self) -> Vec<f64> {
        (0..self.n).map(|i| -self.half_width + i as f64 * self.spacing).collect()
    }

    /// Position of flattened index `idx`; unused coordinates are 0 in 1D.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing;
        let w = self.half_width;
        if self.dim == 1 {
            [-w + idx as f64 * h, 0.0, 0.0]
        } else {
            let n = self.n;
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            [-w + i as f64 * h, -w + j as f64 * h, -w + k as f64 * h]
        }
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Samples `f` at every grid point.
    pub fn sample<F: Fn([f64; 3]) -> f64 + Sync>(&self, f: F) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|i| f(self.point(i))).collect()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Validation(format!(
                "grid function has {len} values, grid has {}",
                self.len()
            )));
        }
        Ok(())
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let fft = if inverse { &self.inverse } else { &self.forward };
        if self.dim == 1 {
            fft.process(data);
        } else {
            data.par_chunks_mut(n * n).for_each(|c| fft.process(c));
            for axis in [1usize, 0] {
                let stride = if axis == 1 { n } else { n * n };
                let mut lines = vec![Complex64::new(0.0, 0.0); data.len()];
                let gather = |line: usize, t: usize| {
                    // line enumerates the two remaining indices
                    let (a, b) = (line / n, line % n);
                    if axis == 1 {
                        a * n * n + t * stride + b
                    } else {
                        t * stride + a * n + b
                    }
                };
                lines.par_chunks_mut(n).enumerate().for_each(|(line, buf)| {
                    for (t, x) in buf.iter_mut().enumerate() {
                        *x = data[gather(line, t)];
                    }
                    fft.process(buf);
                });
                for (line, buf) in lines.chunks(n).enumerate() {
                    for (t, x) in buf.iter().enumerate() {
                        data[gather(line, t)] = *x;
                    }
                }
            }
        }
        if inverse {
            let s = 1.0 / self.len() as f64;
            data.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// Forward DFT without normalization.
    pub fn dft(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(psi.len())?;
        let mut out = psi.to_vec();
        self.transform(&mut out, false);
        Ok(out)
    }

    /// Inverse of [`dft`](Self::dft).
    pub fn idft(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(coeffs.len())?;
        let mut out = coeffs.to_vec();
        self.transform(&mut out, true);
        Ok(out)
    }

    /// Unitary discrete Fourier transform, `‖F ψ‖₂ = ‖ψ‖₂`.
    pub fn fourier_transform(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = self.dft(psi)?;
        let s = 1.0 / (self.len() as f64).sqrt();
        out.iter_mut().for_each(|x| *x *= s);
        Ok(out)
    }

    /// Applies the multiplier `m(|p|)` given per mode.
    pub fn apply_multiplier(&self, values: &[f64], psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        let mut c = self.dft(psi)?;
        c.iter_mut().zip(values).for_each(|(x, m)| *x *= *m);
        self.transform(&mut c, true);
        Ok(c)
    }

    /// `∫ conj(f) g` by the grid rule.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter().zip(g).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.cell_volume()
    }

    pub fn inner_real(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.cell_volume()
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner_real(f, f).sqrt()
    }
}

/// `T ψ` on the grid.
pub fn apply_t(grid: &SpectralGrid, psi: &[Complex64]) -> Result<Vec<Complex64>> {
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("input to T contains non-finite values".into()));
    }
    grid.apply_multiplier(&grid.symbol, psi)
}

/// `T ψ` for real `ψ`; the symbol is even, so the result is real.
pub fn apply_t_real(grid: &SpectralGrid, psi: &[f64]) -> Result<Vec<f64>> {
    let c: Vec<Complex64> = psi.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    Ok(apply_t(grid, &c)?.into_iter().map(|z| z.re).collect())
}

pub(crate) fn to_complex(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}
