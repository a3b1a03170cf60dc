//! Cartesian multipole moments, derivatives of the Coulomb kernel, and the
//! multipolar interaction coefficients `F^(n,m)`.
//!
//! Derivatives of `1/|x|` are carried symbolically as sums of terms
//! `c · x^α / |x|^k` with integer `c`; differentiation maps such a term to
//! `c α_j x^{α-e_j} / |x|^k − c k x^{α+e_j} / |x|^{k+2}`.

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::density::ChargeDensity;
use crate::error::{Error, Result};
use crate::rotations::{Mat3, Rotation};
use crate::scalar::{CompensatedSum, Real};

/// Highest moment order.
pub const MAX_MOMENT_ORDER: usize = 4;
/// Highest `n + m` for interaction coefficients.
pub const MAX_INTERACTION_ORDER: usize = 5;
/// Highest Coulomb derivative order.
pub const MAX_DERIVATIVE_ORDER: usize = 8;
/// Default relative vanishing threshold for moments.
pub const DEFAULT_VANISHING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Monomial {
    alpha: [u32; 3],
    k: u32,
}

/// Σ c · x^α / |x|^k.
#[derive(Debug, Clone, Default)]
struct Rational(BTreeMap<Monomial, i64>);

impl Rational {
    fn inverse_distance() -> Self {
        let mut t = BTreeMap::new();
        t.insert(Monomial { alpha: [0; 3], k: 1 }, 1);
        Rational(t)
    }

    fn derivative(&self, j: usize) -> Self {
        let mut out: BTreeMap<Monomial, i64> = BTreeMap::new();
        for (m, &c) in &self.0 {
            if m.alpha[j] > 0 {
                let mut a = m.alpha;
                a[j] -= 1;
                *out.entry(Monomial { alpha: a, k: m.k }).or_default() += c * m.alpha[j] as i64;
            }
            let mut a = m.alpha;
            a[j] += 1;
            *out.entry(Monomial { alpha: a, k: m.k + 2 }).or_default() -= c * m.k as i64;
        }
        out.retain(|_, c| *c != 0);
        Rational(out)
    }

    fn derivative_along(indices: &[usize]) -> Self {
        indices
            .iter()
            .fold(Self::inverse_distance(), |acc, &j| acc.derivative(j))
    }

    /// Value at `e₁`: only monomials free of `x₂, x₃` survive, each equal to 1.
    fn at_e1(&self) -> i64 {
        self.0
            .iter()
            .filter(|(m, _)| m.alpha[1] == 0 && m.alpha[2] == 0)
            .map(|(_, c)| *c)
            .sum()
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn double_factorial_odd(n: usize) -> u64 {
    // (2n − 1)!!, empty product for n = 0
    (1..=n as u64).map(|i| 2 * i - 1).product()
}

/// All non-decreasing index tuples of length `n` over {0,1,2}.
fn sorted_indices(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..3 {
            cur.push(i);
            rec(n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, &mut Vec::new(), &mut out);
    out
}

fn flat_index(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * 3 + i)
}

fn unflatten(mut f: usize, n: usize) -> Vec<usize> {
    let mut idx = vec![0; n];
    for p in (0..n).rev() {
        idx[p] = f % 3;
        f /= 3;
    }
    idx
}

/// Fully symmetric Cartesian tensor of order `n`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTensor<T> {
    order: usize,
    data: Vec<T>,
}

/// `M^(n)_ρ`.
pub type MultipoleTensor<T> = SymmetricTensor<T>;
/// `∂_{j₁}…∂_{j_k} (1/|z + e₁|)` at `z = 0`.
pub type CoulombDerivativeTensor<T> = SymmetricTensor<T>;

impl<T: Real> SymmetricTensor<T> {
    fn from_sorted(order: usize, mut value: impl FnMut(&[usize]) -> T) -> Self {
        let mut sorted: BTreeMap<Vec<usize>, T> = BTreeMap::new();
        for idx in sorted_indices(order) {
            let v = value(&idx);
            sorted.insert(idx, v);
        }
        let data = (0..3usize.pow(order as u32))
            .map(|f| {
                let mut idx = unflatten(f, order);
                idx.sort_unstable();
                sorted[&idx]
            })
            .collect();
        Self { order, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry at 0-based indices (any order).
    pub fn get(&self, idx: &[usize]) -> T {
        assert_eq!(idx.len(), self.order, "index length must equal tensor order");
        self.data[flat_index(idx)]
    }

    /// Row-major dense storage of all `3^n` entries.
    pub fn dense(&self) -> &[T] {
        &self.data
    }

    /// Sorted multi-index entries keyed `"i1i2…in"` with 1-based digits.
    pub fn entries(&self) -> BTreeMap<String, T> {
        sorted_indices(self.order)
            .into_iter()
            .map(|idx| {
                let key: String = idx.iter().map(|i| char::from(b'1' + *i as u8)).collect();
                (key, self.get(&idx))
            })
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, b| a.max(b.abs()))
    }

    /// `T'_{i₁…iₙ} = Σ U_{i₁j₁}…U_{iₙjₙ} T_{j₁…jₙ}`, i.e. `T'(h…) = T(Uᵀh…)`.
    pub fn rotated(&self, u: &Rotation<T>) -> Self {
        Self { order: self.order, data: rotate_dense(&self.data, self.order, u.matrix()) }
    }

    /// Matrix of the linear map `v ↦ T(v, ·, …, ·)`, shape `3^{n−1} × 3`,
    /// row-major.
    pub fn contraction_map(&self) -> Vec<[T; 3]> {
        let rest = 3usize.pow(self.order.saturating_sub(1) as u32);
        (0..rest)
            .map(|r| [self.data[r], self.data[rest + r], self.data[2 * rest + r]])
            .collect()
    }
}

impl<T: Real> Serialize for SymmetricTensor<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SymmetricTensor", 2)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("entries", &self.entries())?;
        st.end()
    }
}

pub(crate) fn rotate_dense<T: Real>(data: &[T], order: usize, u: &Mat3<T>) -> Vec<T> {
    let mut cur = data.to_vec();
    for mode in 0..order {
        let stride = 3usize.pow((order - 1 - mode) as u32);
        let mut next = vec![T::zero(); cur.len()];
        for (f, slot) in next.iter_mut().enumerate() {
            let i = (f / stride) % 3;
            let base = f - i * stride;
            *slot = u[i][0] * cur[base] + u[i][1] * cur[base + stride] + u[i][2] * cur[base + 2 * stride];
        }
        cur = next;
    }
    cur
}

/// Exact partial derivatives of `1/|x|` at `x = e₁`.
pub fn coulomb_derivatives<T: Real>(order: usize) -> Result<CoulombDerivativeTensor<T>> {
    if order > MAX_DERIVATIVE_ORDER {
        return Err(Error::Domain(format!(
            "Coulomb derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}"
        )));
    }
    Ok(SymmetricTensor::from_sorted(order, |idx| {
        T::lit(Rational::derivative_along(idx).at_e1() as f64)
    }))
}

/// `M^(n)(e_{i₁},…,e_{iₙ}) = ((−1)^n / n!) Σ w |x|^{2n+1} ∂_{i₁}…∂_{iₙ}(1/|x|)(x)`.
///
/// Every term of the derivative times `|x|^{2n+1}` is a polynomial
/// `x^α |x|^{n−|α|}` with `n − |α|` even, so no division occurs.
pub fn multipole_moment<T: Real>(rho: &ChargeDensity<T>, n: usize) -> Result<MultipoleTensor<T>> {
    if n > MAX_MOMENT_ORDER {
        return Err(Error::Domain(format!("moment order {n} exceeds {MAX_MOMENT_ORDER}")));
    }
    if n >= 1 {
        for (i, (p, w)) in rho.points().iter().zip(rho.weights()).enumerate() {
            if *w != T::zero() && p.iter().all(|x| *x == T::zero()) {
                return Err(Error::Singularity(format!(
                    "point {i} with nonzero weight sits at the origin"
                )));
            }
        }
    }
    let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    let norm = sign / T::lit(factorial(n) as f64);
    Ok(SymmetricTensor::from_sorted(n, |idx| {
        let poly: Vec<(T, [u32; 3], u32)> = Rational::derivative_along(idx)
            .0
            .iter()
            .map(|(m, c)| {
                let deg: u32 = m.alpha.iter().sum();
                (T::lit(*c as f64), m.alpha, (n as u32 - deg) / 2)
            })
            .collect();
        let mut acc = CompensatedSum::new();
        for (p, w) in rho.points().iter().zip(rho.weights()) {
            let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            let mut v = T::zero();
            for (c, alpha, half) in &poly {
                v = v + *c
                    * p[0].powi(alpha[0] as i32)
                    * p[1].powi(alpha[1] as i32)
                    * p[2].powi(alpha[2] as i32)
                    * r2.powi(*half as i32);
            }
            acc.add(*w * v);
        }
        acc.value() * norm
    }))
}

/// Prefactor of `F^(n,m)`: `(−1)^n / ((2n−1)!! (2m−1)!!)`, where `n` is the
/// order attached to the density at the origin.
pub fn interaction_prefactor<T: Real>(n: usize, m: usize) -> T {
    let sign = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    sign / T::lit((double_factorial_odd(n) * double_factorial_odd(m)) as f64)
}

/// `F^(n,m)` as a function of the orientations `(U, V)`. Moments and the
/// Coulomb tensor are computed once.
#[derive(Debug, Clone)]
pub struct MultipolarInteraction<T> {
    n: usize,
    m: usize,
    m1: Vec<T>,
    m2: Vec<T>,
    coulomb: Vec<T>,
    prefactor: T,
}

impl<T: Real> MultipolarInteraction<T> {
    pub fn new(n: usize, m: usize, rho1: &ChargeDensity<T>, rho2: &ChargeDensity<T>) -> Result<Self> {
        check_orders(n, m)?;
        let m1 = multipole_moment(rho1, n)?;
        let m2 = multipole_moment(rho2, m)?;
        Ok(Self::from_moments(&m1, &m2))
    }

    pub fn from_moments(m1: &MultipoleTensor<T>, m2: &MultipoleTensor<T>) -> Self {
        let (n, m) = (m1.order(), m2.order());
        let coulomb = coulomb_derivatives::<T>(n + m).expect("order checked by caller").data;
        Self {
            n,
            m,
            m1: m1.data.clone(),
            m2: m2.data.clone(),
            coulomb,
            prefactor: interaction_prefactor(n, m),
        }
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    /// `F^(n,m)(Uρ₁, Vρ₂)`.
    pub fn evaluate(&self, u: &Rotation<T>, v: &Rotation<T>) -> T {
        let a = rotate_dense(&self.m1, self.n, u.matrix());
        let b = rotate_dense(&self.m2, self.m, v.matrix());
        contract(&a, &b, &self.coulomb) * self.prefactor
    }

    /// Largest absolute entries of the two moment tensors multiplied; the
    /// natural scale of `F^(n,m)`.
    pub fn moment_scale(&self) -> T {
        let ma = self.m1.iter().fold(T::zero(), |a, b| a.max(b.abs()));
        let mb = self.m2.iter().fold(T::zero(), |a, b| a.max(b.abs()));
        ma * mb
    }
}

/// `Σ_{J,K} a_J b_K D_{JK}` with compensated accumulation.
pub(crate) fn contract<T: Real>(a: &[T], b: &[T], coulomb: &[T]) -> T {
    let mut acc = CompensatedSum::new();
    let nb = b.len();
    for (i, x) in a.iter().enumerate() {
        if *x == T::zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            acc.add(*x * *y * coulomb[i * nb + j]);
        }
    }
    acc.value()
}

pub(crate) fn check_orders(n: usize, m: usize) -> Result<()> {
    if n > MAX_MOMENT_ORDER || m > MAX_MOMENT_ORDER || n + m > MAX_INTERACTION_ORDER {
        return Err(Error::Domain(format!(
            "interaction orders ({n},{m}) outside n,m ≤ {MAX_MOMENT_ORDER}, n+m ≤ {MAX_INTERACTION_ORDER}"
        )));
    }
    Ok(())
}

/// `F^(n,m)(ρ₁, ρ₂)` with `ρ₁` at the origin and `ρ₂` at `L e₁`.
pub fn interaction_coefficient<T: Real>(
    n: usize,
    m: usize,
    rho1: &ChargeDensity<T>,
    rho2: &ChargeDensity<T>,
) -> Result<T> {
    let id = Rotation::identity();
    Ok(MultipolarInteraction::new(n, m, rho1, rho2)?.evaluate(&id, &id))
}

/// Smallest `n ∈ {1,…,4}` whose moment exceeds `tol · scaleⁿ` in max norm,
/// with `scale` the largest point radius. `None` if all four vanish.
pub fn first_nonvanishing_order<T: Real>(rho: &ChargeDensity<T>, tol: T) -> Result<Option<usize>> {
    let q = rho.total_charge();
    if q.abs() > tol {
        return Err(Error::Domain(format!(
            "first non-vanishing order is defined for neutral densities; total charge {q}"
        )));
    }
    let scale = rho.max_radius();
    for n in 1..=MAX_MOMENT_ORDER {
        let m = multipole_moment(rho, n)?;
        if m.max_abs() > tol * scale.powi(n as i32) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Smallest singular value of `v ↦ M(v, ·, …, ·)` relative to the tensor's
/// largest entry. The moment is non-degenerate when this exceeds `tol`.
pub fn contraction_singular_ratio<T: Real>(moment: &MultipoleTensor<T>) -> f64 {
    let rows = moment.contraction_map();
    let mut gram = nalgebra::Matrix3::<f64>::zeros();
    for r in &rows {
        for i in 0..3 {
            for j in 0..3 {
                gram[(i, j)] += r[i].to_f64_lossy() * r[j].to_f64_lossy();
            }
        }
    }
    let ev = gram.symmetric_eigenvalues();
    let smin = ev.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0).sqrt();
    let scale = moment.max_abs().to_f64_lossy();
    if scale == 0.0 {
        0.0
    } else {
        smin / scale
    }
}

/// Relative singular-value threshold for the octopole condition.
pub const NONDEGENERACY_TOL: f64 = 1e-6;

/// Checks `M(v, ·, ·) ≡ 0 ⇒ v = 0` for the order-`n` moment of `rho`.
pub fn check_nondegenerate<T: Real>(rho: &ChargeDensity<T>, n: usize) -> Result<()> {
    let m = multipole_moment(rho, n)?;
    let ratio = contraction_singular_ratio(&m);
    if ratio <= NONDEGENERACY_TOL {
        return Err(Error::Hypothesis(format!(
            "order-{n} moment of '{}' is degenerate: relative smallest singular value {ratio:.3e}",
            rho.label()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dens(points: Vec<[f64; 3]>, weights: Vec<f64>) -> ChargeDensity<f64> {
        ChargeDensity::new(points, weights, "t").unwrap()
    }

    #[test]
    fn low_order_coulomb_derivatives() {
        let d0 = coulomb_derivatives::<f64>(0).unwrap();
        assert_eq!(d0.get(&[]), 1.0);
        let d1 = coulomb_derivatives::<f64>(1).unwrap();
        assert_eq!(d1.get(&[0]), -1.0);
        assert_eq!(d1.get(&[1]), 0.0);
        let d2 = coulomb_derivatives::<f64>(2).unwrap();
        assert_eq!(d2.get(&[0, 0]), 2.0);
        assert_eq!(d2.get(&[1, 1]), -1.0);
        assert_eq!(d2.get(&[0, 1]), 0.0);
        let d3 = coulomb_derivatives::<f64>(3).unwrap();
        assert_eq!(d3.get(&[0, 0, 0]), -6.0);
        assert!(coulomb_derivatives::<f64>(9).is_err());
    }

    #[test]
    fn coulomb_tensor_is_traceless() {
        for k in 2..=8 {
            let d = coulomb_derivatives::<f64>(k).unwrap();
            for f in 0..3usize.pow(k as u32 - 2) {
                let rest = unflatten(f, k - 2);
                let tr: f64 = (0..3)
                    .map(|i| {
                        let mut idx = vec![i, i];
                        idx.extend(&rest);
                        d.get(&idx)
                    })
                    .sum();
                assert_eq!(tr, 0.0, "order {k}");
            }
        }
    }

    #[test]
    fn dipole_and_charge() {
        let rho = dens(vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], vec![1.0, -1.0]);
        let m1 = multipole_moment(&rho, 1).unwrap();
        assert_eq!(m1.get(&[0]), 2.0);
        assert_eq!(m1.get(&[1]), 0.0);
        assert_eq!(m1.get(&[2]), 0.0);
        assert_eq!(multipole_moment(&rho, 0).unwrap().get(&[]), rho.total_charge());
        let keys: Vec<String> = m1.entries().keys().cloned().collect();
        assert_eq!(keys, ["1", "2", "3"]);
    }

    #[test]
    fn origin_point_is_singular() {
        let rho = dens(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![1.0, -1.0]);
        assert!(matches!(multipole_moment(&rho, 1), Err(Error::Singularity(_))));
        assert!(multipole_moment(&rho, 0).is_ok());
    }

    #[test]
    fn aligned_dipoles_give_minus_two() {
        let d = dens(vec![[0.5, 0.0, 0.0], [-0.5, 0.0, 0.0]], vec![1.0, -1.0]);
        assert!((interaction_coefficient(1, 1, &d, &d).unwrap() + 2.0).abs() < 1e-15);
        let e = dens(vec![[0.0, 0.5, 0.0], [0.0, -0.5, 0.0]], vec![1.0, -1.0]);
        assert!((interaction_coefficient(1, 1, &e, &e).unwrap() - 1.0).abs() < 1e-15);
        assert!(interaction_coefficient(3, 3, &d, &d).is_err());
    }

    #[test]
    fn orders_of_simple_fixtures() {
        let dip = dens(vec![[0.0, 0.0, 0.5], [0.0, 0.0, -0.5]], vec![1.0, -1.0]);
        assert_eq!(first_nonvanishing_order(&dip, 1e-9).unwrap(), Some(1));
        let quad = dens(
            vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [0.0, 0.0, 0.5], [0.0, 0.0, -0.5]],
            vec![1.0, 1.0, -1.0, -1.0],
        );
        assert_eq!(first_nonvanishing_order(&quad, 1e-9).unwrap(), Some(2));
        let ion = dens(vec![[0.0, 0.0, 1.0]], vec![1.0]);
        assert!(matches!(first_nonvanishing_order(&ion, 1e-9), Err(Error::Domain(_))));
    }
}
