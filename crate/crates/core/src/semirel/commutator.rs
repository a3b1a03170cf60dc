//! Commutators `[T, ζ_R]` and the IMS localization error.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::cutoff::{CutoffFunction, PartitionOfUnity};
use super::grid::{apply_t, apply_t_real, SpectralGrid};
use crate::error::{Error, Result};
use crate::seed::{stream_rng, Stream};

pub const POWER_ITERATIONS: usize = 50;
/// Relative change of the last Rayleigh quotient below which the power
/// iteration counts as settled.
pub const STAGNATION_TOL: f64 = 1e-4;
pub const SHELL_POINTS: f64 = 8.0;

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorEstimate {
    pub scale: f64,
    pub norm: f64,
    /// `(2π)^{−d/2} ‖|q| ζ̂_R‖₁` on the grid.
    pub fourier_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    pub last_relative_change: f64,
}

fn commutator(grid: &SpectralGrid, zeta: &[f64], psi: &[f64]) -> Result<Vec<f64>> {
    let zp: Vec<f64> = psi.iter().zip(zeta).map(|(a, b)| a * b).collect();
    let t_zp = apply_t_real(grid, &zp)?;
    let t_p = apply_t_real(grid, psi)?;
    Ok(t_zp.iter().zip(&t_p).zip(zeta).map(|((a, b), z)| a - z * b).collect())
}

/// Grid version of `(2π)^{−d/2} ∫ |q| |ζ̂(q)| dq`.
pub fn fourier_bound(grid: &SpectralGrid, zeta: &[f64]) -> Result<f64> {
    let d = grid.dim() as i32;
    let c: Vec<Complex64> = zeta.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    let hat = grid.dft(&c)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let dq = (two_pi / (2.0 * grid.half_width())).powi(d);
    // ζ̂(q) = (2π)^{−d/2} h^d Σ e^{−iqx} ζ(x), up to a phase
    let scale = two_pi.powf(-(d as f64) / 2.0) * grid.cell_volume();
    let sum: f64 = hat.iter().zip(grid.momenta()).map(|(z, p)| p * z.norm() * scale).sum();
    Ok(two_pi.powf(-(d as f64) / 2.0) * sum * dq)
}

/// Power iteration on `[T, ζ_R]^* [T, ζ_R] = −[T, ζ_R]²` from a seeded
/// Gaussian start; returns the square root of the final Rayleigh quotient.
/// A run whose quotient still moves by more than [`STAGNATION_TOL`] is
/// reported with `converged = false`.
pub fn commutator_norm(grid: &SpectralGrid, zeta: &CutoffFunction, seed: u64) -> Result<CommutatorEstimate> {
    if !(zeta.scale > 1.0) {
        return Err(Error::Domain(format!("cutoff scale must exceed 1, got {}", zeta.scale)));
    }
    zeta.check_resolved(grid, SHELL_POINTS)?;
    let z = zeta.sample(grid);
    let est = power_iteration(grid, &z, seed)?;
    Ok(CommutatorEstimate { scale: zeta.scale, fourier_bound: fourier_bound(grid, &z)?, ..est })
}

/// [`commutator_norm`] for an arbitrary real multiplication operator.
pub fn power_iteration(grid: &SpectralGrid, zeta: &[f64], seed: u64) -> Result<CommutatorEstimate> {
    let mut rng = stream_rng(seed, Stream::PowerIteration);
    let mut v: Vec<f64> = (0..grid.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let unit = |v: &mut Vec<f64>| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            v.iter_mut().for_each(|x| *x /= n);
        }
        n
    };
    unit(&mut v);
    let mut lambda = 0.0;
    let mut change = f64::INFINITY;
    for _ in 0..POWER_ITERATIONS {
        let c = commutator(grid, zeta, &v)?;
        let mut w: Vec<f64> = commutator(grid, zeta, &c)?.into_iter().map(|x| -x).collect();
        // ⟨v, −C² v⟩ = ‖C v‖²
        let next = c.iter().map(|x| x * x).sum::<f64>();
        change = if next > 0.0 { (next - lambda).abs() / next } else { 0.0 };
        lambda = next;
        if unit(&mut w) == 0.0 {
            break;
        }
        v = w;
    }
    Ok(CommutatorEstimate {
        scale: f64::NAN,
        norm: lambda.sqrt(),
        fourier_bound: f64::NAN,
        iterations: POWER_ITERATIONS,
        converged: change <= STAGNATION_TOL,
        last_relative_change: change,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ImsError {
    pub value: f64,
    /// Imaginary part of the computed error, zero up to rounding.
    pub imaginary: f64,
}

/// `Err[ψ] = ⟨ψ, Tψ⟩ − Σ_i ⟨J_i ψ, T J_i ψ⟩`.
pub fn ims_error(grid: &SpectralGrid, partition: &PartitionOfUnity, psi: &[Complex64]) -> Result<ImsError> {
    if psi.len() != grid.len() || partition.functions[0].len() != grid.len() {
        return Err(Error::Validation("grid function length does not match the grid".into()));
    }
    let mut err = grid.inner(psi, &apply_t(grid, psi)?);
    for j in &partition.functions {
        let jp: Vec<Complex64> = psi.iter().zip(j).map(|(a, b)| a * *b).collect();
        err -= grid.inner(&jp, &apply_t(grid, &jp)?);
    }
    Ok(ImsError { value: err.re, imaginary: err.im })
}
