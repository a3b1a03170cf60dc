//! Lowest eigenpairs of `T + V` on a grid by restarted Lanczos.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::grid::{apply_t_real, SpectralGrid};
use crate::error::{Error, Result};
use crate::seed::{stream_rng, Stream};

pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub seed: u64,
    pub tol: f64,
    /// Krylov basis size before a restart.
    pub basis: usize,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { seed: 0, tol: RESIDUAL_TOL, basis: 32, max_restarts: 300 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Grid-normalized eigenvectors.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    /// `‖(H − λ)v‖` for unit Euclidean `v`.
    pub residuals: Vec<f64>,
    pub restarts: usize,
    pub matvecs: usize,
}

struct Hamiltonian<'a> {
    grid: &'a SpectralGrid,
    potential: &'a [f64],
}

impl Hamiltonian<'_> {
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = apply_t_real(self.grid, v)?;
        out.iter_mut().zip(self.potential).zip(v).for_each(|((o, p), x)| *o += p * x);
        Ok(out)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(u, v)| *u += a * v);
}

/// Orthogonalizes against `basis` twice and normalizes; `None` when the
/// vector lies in the span.
fn orthonormalize(mut w: Vec<f64>, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n0 = dot(&w, &w).sqrt();
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &w);
            axpy(&mut w, -c, b);
        }
    }
    let n = dot(&w, &w).sqrt();
    if n <= 1e-10 * n0 || n == 0.0 {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= n);
    Some(w)
}

pub fn ground_state(grid: &SpectralGrid, potential: &[f64], k: usize) -> Result<Eigenpairs> {
    ground_state_with(grid, potential, k, &LanczosOptions::default())
}

/// Lowest `k` eigenpairs of `T + V`. Each cycle extends a Krylov basis
/// from the current residual, takes Ritz pairs of the projected matrix and
/// keeps the lowest few as the start of the next cycle.
pub fn ground_state_with(grid: &SpectralGrid, potential: &[f64], k: usize, opts: &LanczosOptions) -> Result<Eigenpairs> {
    if potential.len() != grid.len() {
        return Err(Error::Validation("potential length does not match the grid".into()));
    }
    if k == 0 || k + 4 > opts.basis || opts.basis > grid.len() {
        return Err(Error::Domain(format!("need 1 ≤ k ≤ basis − 4 ≤ grid size, got k = {k}, basis = {}", opts.basis)));
    }
    let vmin = potential.iter().cloned().fold(f64::INFINITY, f64::min);
    if !vmin.is_finite() || potential.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("potential must be finite, hence bounded below on the grid".into()));
    }
    // min symbol is 0, so T + V ≥ min V
    let h = Hamiltonian { grid, potential };
    let mut rng = stream_rng(opts.seed, Stream::Lanczos);
    let start: Vec<f64> = (0..grid.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut next = Some(start);
    let mut matvecs = 0;
    let keep = (k + 4).min(opts.basis / 2).max(k);
    for restart in 0..=opts.max_restarts {
        while basis.len() < opts.basis {
            let cand = next.take().and_then(|w| orthonormalize(w, &basis)).or_else(|| {
                let w: Vec<f64> = (0..grid.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                orthonormalize(w, &basis)
            });
            let Some(v) = cand else { break };
            let av = h.apply(&v)?;
            matvecs += 1;
            next = Some(av.clone());
            basis.push(v);
            images.push(av);
        }
        let m = basis.len();
        let proj = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut ritz = Vec::with_capacity(keep);
        let mut ritz_images = Vec::with_capacity(keep);
        let mut residuals = Vec::with_capacity(keep);
        let mut values = Vec::with_capacity(keep);
        for &c in order.iter().take(keep) {
            let s = eig.eigenvectors.column(c);
            let theta = eig.eigenvalues[c];
            let mut y = vec![0.0; grid.len()];
            let mut ay = vec![0.0; grid.len()];
            for j in 0..m {
                axpy(&mut y, s[j], &basis[j]);
                axpy(&mut ay, s[j], &images[j]);
            }
            let mut r = ay.clone();
            axpy(&mut r, -theta, &y);
            residuals.push(r);
            values.push(theta);
            ritz.push(y);
            ritz_images.push(ay);
        }
        let norms: Vec<f64> = residuals.iter().map(|r| dot(r, r).sqrt()).collect();
        let first_open = (0..k).find(|&i| norms[i] > opts.tol);
        match first_open {
            None => {
                let scale = 1.0 / grid.cell_volume().sqrt();
                let vectors = ritz
                    .into_iter()
                    .take(k)
                    .map(|v| v.into_iter().map(|x| x * scale).collect())
                    .collect();
                return Ok(Eigenpairs {
                    values: values[..k].to_vec(),
                    vectors,
                    residuals: norms[..k].to_vec(),
                    restarts: restart,
                    matvecs,
                });
            }
            Some(i) => {
                next = Some(residuals.swap_remove(i));
                basis = ritz;
                images = ritz_images;
            }
        }
    }
    Err(Error::Convergence(format!(
        "Lanczos did not reach residual {} after {} restarts",
        opts.tol, opts.max_restarts
    )))
}

/// `−Z / √(r² + a²)` centred at the origin.
pub fn smoothed_coulomb(grid: &SpectralGrid, charge: f64, softening: f64) -> Vec<f64> {
    grid.sample(|x| -charge / (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + softening * softening).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_operator_has_zero_ground_energy() {
        let g = SpectralGrid::new(1, 128, 8.0).unwrap();
        let r = ground_state(&g, &vec![0.0; g.len()], 1).unwrap();
        assert!(r.values[0].abs() < 1e-9);
        assert!(r.residuals[0] <= RESIDUAL_TOL);
    }

    #[test]
    fn agrees_with_dense_diagonalization_in_1d() {
        let g = SpectralGrid::new(1, 64, 6.0).unwrap();
        let v = g.sample(|x| -2.0 / (x[0] * x[0] + 0.25).sqrt() + 0.1 * x[0]);
        let r = ground_state(&g, &v, 3).unwrap();
        let n = g.len();
        let mut dense = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = Hamiltonian { grid: &g, potential: &v }.apply(&e).unwrap();
            for i in 0..n {
                dense[(i, j)] = col[i];
            }
        }
        let dense = 0.5 * (&dense + dense.transpose());
        let mut ev: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        for i in 0..3 {
            assert!((r.values[i] - ev[i]).abs() < 1e-9, "{i}: {} vs {}", r.values[i], ev[i]);
        }
        assert!(r.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
