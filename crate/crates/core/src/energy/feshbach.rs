//! Feshbach–Schur reduction of a Hermitian matrix onto the range of an
//! orthogonal projector.

use num_complex::Complex64;

use super::toy::{check_hermitian, hermitian_eigen, CMatrix};
use crate::error::{Error, Result};

/// Singular values of `H^⊥ − E` at or below this are rejected.
pub const CONDITIONING_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-10;

/// Splitting of a Hermitian matrix by a projector, with the complement
/// block diagonalized once so `F_P(E)` is cheap to evaluate for many `E`.
#[derive(Debug, Clone)]
pub struct FeshbachSplit {
    /// Orthonormal basis of `ran P` (columns).
    basis: CMatrix,
    /// `W† H W`.
    php: CMatrix,
    /// `W† H W⊥ Q`, with `Q` the eigenvectors of the complement block.
    coupling: CMatrix,
    /// Eigenvalues of the complement block `W⊥† H W⊥`.
    complement: Vec<f64>,
}

impl FeshbachSplit {
    pub fn new(h: &CMatrix, p: &CMatrix) -> Result<Self> {
        check_hermitian(h, "H")?;
        if p.nrows() != h.nrows() || !p.is_square() {
            return Err(Error::Validation("projector and matrix dimensions differ".into()));
        }
        let dev_h = (p - p.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let dev_i = (p * p - p).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if dev_h > PROJECTOR_TOL || dev_i > PROJECTOR_TOL {
            return Err(Error::Validation(format!(
                "P is not an orthogonal projector (|P − P†| = {dev_h:.2e}, |P² − P| = {dev_i:.2e})"
            )));
        }
        let (vals, vecs) = hermitian_eigen(p);
        let n = h.nrows();
        let rank = vals.iter().filter(|v| **v > 0.5).count();
        if rank == 0 {
            return Err(Error::Validation("projector has rank zero".into()));
        }
        // eigenvalues are ascending: complement first, range last
        let w = vecs.columns(n - rank, rank).into_owned();
        let wp = vecs.columns(0, n - rank).into_owned();
        let php = w.adjoint() * h * &w;
        let hperp = wp.adjoint() * h * &wp;
        let (complement, q) = hermitian_eigen(&hperp);
        let coupling = w.adjoint() * h * &wp * q;
        Ok(Self { basis: w, php, coupling, complement })
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Lowest eigenvalue of `H^⊥` on `ran P^⊥`, `+∞` when `P = 1`.
    pub fn complement_min(&self) -> f64 {
        self.complement.first().copied().unwrap_or(f64::INFINITY)
    }

    /// `F_P(E) = W†HW − W†HW⊥ (W⊥†HW⊥ − E)⁻¹ W⊥†HW` in the basis of `ran P`.
    pub fn map(&self, e: f64) -> Result<CMatrix> {
        let smin = self.complement.iter().map(|m| (m - e).abs()).fold(f64::INFINITY, f64::min);
        if smin <= CONDITIONING_TOL {
            return Err(Error::Conditioning(format!(
                "H⊥ − E has smallest singular value {smin:.3e} at E = {e}"
            )));
        }
        let mut scaled = self.coupling.clone();
        for (j, m) in self.complement.iter().enumerate() {
            let s = Complex64::new(1.0 / (m - e), 0.0);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= s;
            }
        }
        let f = &self.php - scaled * self.coupling.adjoint();
        Ok((&f + f.adjoint()).scale(0.5))
    }

    fn lowest(&self, e: f64) -> Result<f64> {
        Ok(hermitian_eigen(&self.map(e)?).0[0])
    }
}

/// `F_P(E)` restricted to `ran P`, expressed in an orthonormal basis of it.
pub fn feshbach_map(h: &CMatrix, p: &CMatrix, e: f64) -> Result<CMatrix> {
    FeshbachSplit::new(h, p)?.map(e)
}

/// Solves `E = λ_min(F_P(E))` by bisection below the bottom of the
/// complement spectrum. `λ_min(F_P(E)) − E` is strictly decreasing there,
/// so the root is unique when it exists.
pub fn ground_state_energy_fixed_point(h: &CMatrix, p: &CMatrix) -> Result<f64> {
    let split = FeshbachSplit::new(h, p)?;
    let mu = split.complement_min();
    if !mu.is_finite() {
        return Ok(hermitian_eigen(h).0[0]);
    }
    let scale = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let g = |e: f64| split.lowest(e).map(|l| l - e);
    let mut hi = mu - 1e3 * CONDITIONING_TOL * scale;
    if g(hi)? > 0.0 {
        return Err(Error::Bracket(format!(
            "λ_min(F_P(E)) − E stays positive up to the complement threshold {mu}"
        )));
    }
    let mut lo = mu - scale - 1.0;
    let mut tries = 0;
    while g(lo)? <= 0.0 {
        lo -= scale * 2f64.powi(tries);
        tries += 1;
        if tries > 60 {
            return Err(Error::Bracket("no lower bracket found".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn proj(n: usize, idx: &[usize]) -> CMatrix {
        let mut p = CMatrix::zeros(n, n);
        for &i in idx {
            p[(i, i)] = c(1.0);
        }
        p
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, cc) = (0.3, Complex64::new(0.4, -0.2), 2.0);
        let h = CMatrix::from_row_slice(2, 2, &[c(a), b, b.conj(), c(cc)]);
        let e = -0.5;
        let f = feshbach_map(&h, &proj(2, &[0]), e).unwrap();
        assert!((f[(0, 0)].re - (a - b.norm_sqr() / (cc - e))).abs() < 1e-14);
        let h0 = CMatrix::from_row_slice(2, 2, &[c(a), c(0.0), c(0.0), c(cc)]);
        for e in [-3.0, 0.0, 1.0] {
            assert!((feshbach_map(&h0, &proj(2, &[0]), e).unwrap()[(0, 0)].re - a).abs() < 1e-15);
        }
        assert!(matches!(feshbach_map(&h, &proj(2, &[0]), cc), Err(Error::Conditioning(_))));
    }

    #[test]
    fn diagonal_fixed_point() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(-1.0), c(0.5)]));
        let e = ground_state_energy_fixed_point(&h, &proj(3, &[1])).unwrap();
        assert!((e + 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_projector_without_gap_fails() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0)]));
        assert!(matches!(
            ground_state_energy_fixed_point(&h, &proj(2, &[0])),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn non_projector_is_rejected() {
        let h = CMatrix::identity(2, 2);
        let mut p = proj(2, &[0]);
        p[(0, 0)] = c(0.9);
        assert!(feshbach_map(&h, &p, 0.0).is_err());
    }
}
