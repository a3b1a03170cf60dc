//! Finite-dimensional model molecules: a Hermitian Hamiltonian and three
//! dipole operators. Used to evaluate the dipole–dipole coupling operator
//! and the van der Waals coefficient exactly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rotations::Rotation;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Hermiticity tolerance for model inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues within this distance of the minimum span the ground space.
pub const GROUND_DEGENERACY_TOL: f64 = 1e-12;
/// Minimum separation between the ground energy and the rest of the
/// spectrum of the non-interacting pair.
pub const GAP_TOL: f64 = 1e-10;

pub(crate) fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Validation(format!("{what} is not square")));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Validation(format!("{what} has non-finite entries")));
    }
    let dev = (m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if dev > HERMITIAN_TOL {
        return Err(Error::Validation(format!("{what} is not Hermitian (deviation {dev:.3e})")));
    }
    Ok(())
}

/// Eigenpairs of a Hermitian matrix sorted by ascending eigenvalue.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let mut vectors = CMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

#[derive(Debug, Clone)]
pub struct ToyMolecule {
    hamiltonian: CMatrix,
    dipoles: [CMatrix; 3],
    ground_energy: f64,
    ground_projector: CMatrix,
    energies: Vec<f64>,
    eigenvectors: CMatrix,
    ground_dim: usize,
}

impl ToyMolecule {
    pub fn new(hamiltonian: CMatrix, dipoles: [CMatrix; 3]) -> Result<Self> {
        check_hermitian(&hamiltonian, "Hamiltonian")?;
        let n = hamiltonian.nrows();
        if n == 0 {
            return Err(Error::Validation("Hamiltonian is empty".into()));
        }
        for (d, name) in dipoles.iter().zip(["Dx", "Dy", "Dz"]) {
            check_hermitian(d, name)?;
            if d.nrows() != n {
                return Err(Error::Validation(format!(
                    "{name} has dimension {} but the Hamiltonian has {n}",
                    d.nrows()
                )));
            }
        }
        let (energies, eigenvectors) = hermitian_eigen(&hamiltonian);
        let ground_energy = energies[0];
        let ground_dim = energies
            .iter()
            .take_while(|e| **e - ground_energy <= GROUND_DEGENERACY_TOL)
            .count();
        let g = eigenvectors.columns(0, ground_dim);
        let ground_projector = g * g.adjoint();
        Ok(Self {
            hamiltonian,
            dipoles,
            ground_energy,
            ground_projector,
            energies,
            eigenvectors,
            ground_dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn dipoles(&self) -> &[CMatrix; 3] {
        &self.dipoles
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn ground_projector(&self) -> &CMatrix {
        &self.ground_projector
    }

    pub fn ground_dim(&self) -> usize {
        self.ground_dim
    }

    /// Ascending eigenvalues of the Hamiltonian.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// `(U·D)_i = Σ_j U_ij D_j`.
    pub fn rotated_dipoles(&self, u: &Rotation<f64>) -> [CMatrix; 3] {
        let m = u.matrix();
        std::array::from_fn(|i| {
            let mut acc = CMatrix::zeros(self.dim(), self.dim());
            for j in 0..3 {
                acc += self.dipoles[j].scale(m[i][j]);
            }
            acc
        })
    }

    /// Truncated isotropic oscillator: three axes, two levels each
    /// (dimension 8), frequency `omega`, unit charge and mass.
    pub fn truncated_oscillator(omega: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::Domain(format!("frequency must be positive, got {omega}")));
        }
        let c = |x: f64| Complex64::new(x, 0.0);
        let id = CMatrix::identity(2, 2);
        let number = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(omega)]);
        let s = (1.0 / (2.0 * omega)).sqrt();
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(s), c(s), c(0.0)]);
        let on_axis = |op: &CMatrix, axis: usize| -> CMatrix {
            let parts: [&CMatrix; 3] = std::array::from_fn(|a| if a == axis { op } else { &id });
            parts[0].kronecker(parts[1]).kronecker(parts[2])
        };
        let h = on_axis(&number, 0) + on_axis(&number, 1) + on_axis(&number, 2);
        Self::new(h, [on_axis(&x, 0), on_axis(&x, 1), on_axis(&x, 2)])
    }
}

/// `f_(U,V) = Σ_ij (δ_ij − 3 δ_i1 δ_j1) (U·D₁)_i ⊗ (V·D₂)_j`.
pub fn dipole_interaction_operator(
    mol1: &ToyMolecule,
    mol2: &ToyMolecule,
    u: &Rotation<f64>,
    v: &Rotation<f64>,
) -> CMatrix {
    let a = mol1.rotated_dipoles(u);
    let b = mol2.rotated_dipoles(v);
    let mut f = CMatrix::zeros(mol1.dim() * mol2.dim(), mol1.dim() * mol2.dim());
    for i in 0..3 {
        let w = if i == 0 { -2.0 } else { 1.0 };
        f += a[i].kronecker(&b[i]).scale(w);
    }
    f
}

/// Non-interacting pair Hamiltonian `H₁ ⊗ I + I ⊗ H₂`.
pub fn pair_hamiltonian(mol1: &ToyMolecule, mol2: &ToyMolecule) -> CMatrix {
    let i1 = CMatrix::identity(mol1.dim(), mol1.dim());
    let i2 = CMatrix::identity(mol2.dim(), mol2.dim());
    mol1.hamiltonian.kronecker(&i2) + i1.kronecker(&mol2.hamiltonian)
}

#[derive(Debug, Clone)]
pub struct VdwResult {
    /// Largest eigenvalue of the resolvent quadratic form on the ground space.
    pub c_max: f64,
    /// Maximizing ground state in the tensor-product space.
    pub phi: CVector,
    /// The full quadratic form in the product ground basis.
    pub form: CMatrix,
}

/// `C_vdW(U,V) = max_φ ⟨f φ, Π^⊥ (H_∞^⊥ − E₁ − E₂)⁻¹ Π^⊥ f φ⟩` over unit
/// ground states `φ` of the non-interacting pair.
///
/// Works in the product eigenbasis of `H_∞`, where the reduced resolvent is
/// diagonal.
pub fn vdw_coefficient(
    mol1: &ToyMolecule,
    mol2: &ToyMolecule,
    u: &Rotation<f64>,
    v: &Rotation<f64>,
) -> Result<VdwResult> {
    let (n1, n2) = (mol1.dim(), mol2.dim());
    let (g1, g2) = (mol1.ground_dim, mol2.ground_dim);
    let e0 = mol1.ground_energy + mol2.ground_energy;
    let in_ground = |i: usize, j: usize| i < g1 && j < g2;
    let mut gap = f64::INFINITY;
    for i in 0..n1 {
        for j in 0..n2 {
            if !in_ground(i, j) {
                gap = gap.min(mol1.energies[i] + mol2.energies[j] - e0);
            }
        }
    }
    if gap.is_finite() && gap <= GAP_TOL {
        return Err(Error::DegenerateThreshold(format!(
            "ground energy {e0} is separated from the complement by only {gap:.3e}"
        )));
    }
    let w1 = &mol1.eigenvectors;
    let w2 = &mol2.eigenvectors;
    let a: Vec<CMatrix> = mol1.rotated_dipoles(u).iter().map(|d| w1.adjoint() * d * w1).collect();
    let b: Vec<CMatrix> = mol2.rotated_dipoles(v).iter().map(|d| w2.adjoint() * d * w2).collect();
    let weights = [-2.0, 1.0, 1.0];
    // f φ_{kl} restricted to the complement, scaled by the inverse square
    // root of the excitation energy.
    let ground: Vec<(usize, usize)> = (0..g1).flat_map(|k| (0..g2).map(move |l| (k, l))).collect();
    let excited: Vec<(usize, usize, f64)> = (0..n1)
        .flat_map(|i| (0..n2).map(move |j| (i, j)))
        .filter(|&(i, j)| !in_ground(i, j))
        .map(|(i, j)| (i, j, mol1.energies[i] + mol2.energies[j] - e0))
        .collect();
    let mut columns = CMatrix::zeros(excited.len(), ground.len());
    for (c, &(k, l)) in ground.iter().enumerate() {
        for (r, &(i, j, de)) in excited.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for ax in 0..3 {
                s += a[ax][(i, k)] * b[ax][(j, l)] * weights[ax];
            }
            columns[(r, c)] = s / de.sqrt();
        }
    }
    let form = columns.adjoint() * &columns;
    let (vals, vecs) = hermitian_eigen(&form);
    let top = vals.len() - 1;
    let coeffs = vecs.column(top);
    let mut phi = CVector::zeros(n1 * n2);
    for (c, &(k, l)) in ground.iter().enumerate() {
        let prod = w1.column(k).kronecker(&w2.column(l));
        phi += prod * coeffs[c];
    }
    Ok(VdwResult { c_max: vals[top].max(0.0), phi, form })
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

fn matrix_to_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_from_json(rows: Vec<Vec<Entry>>, name: &str) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Validation(format!("{name} is not a square array")));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, e) in row.into_iter().enumerate() {
            m[(i, j)] = match e {
                Entry::Real(x) => Complex64::new(x, 0.0),
                Entry::Complex([re, im]) => Complex64::new(re, im),
            };
        }
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
struct RawToy<E> {
    #[serde(rename = "H")]
    h: Vec<Vec<E>>,
    #[serde(rename = "Dx")]
    dx: Vec<Vec<E>>,
    #[serde(rename = "Dy")]
    dy: Vec<Vec<E>>,
    #[serde(rename = "Dz")]
    dz: Vec<Vec<E>>,
}

impl Serialize for ToyMolecule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawToy {
            h: matrix_to_json(&self.hamiltonian),
            dx: matrix_to_json(&self.dipoles[0]),
            dy: matrix_to_json(&self.dipoles[1]),
            dz: matrix_to_json(&self.dipoles[2]),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ToyMolecule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawToy::<Entry>::deserialize(d)?;
        let build = || -> Result<ToyMolecule> {
            ToyMolecule::new(
                matrix_from_json(raw.h, "H")?,
                [
                    matrix_from_json(raw.dx, "Dx")?,
                    matrix_from_json(raw.dy, "Dy")?,
                    matrix_from_json(raw.dz, "Dz")?,
                ],
            )
        };
        build().map_err(D::Error::custom)
    }
}
