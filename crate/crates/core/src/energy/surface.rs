//! The asymptotic interaction energy surface
//! `E(L,U,V) = E_∞ + Σ F^(n,m)(Uρ₁,Vρ₂)/L^{n+m+1} − C_vdW(U,V)/L⁶`.

use serde::{Deserialize, Serialize};

use super::toy::{vdw_coefficient, ToyMolecule};
use crate::coulomb::expansion_orders;
use crate::density::{ChargeDensity, Configuration};
use crate::error::{Error, Result};
use crate::multipole::{
    check_orders, contract, coulomb_derivatives, first_nonvanishing_order, interaction_prefactor,
    multipole_moment, rotate_dense, DEFAULT_VANISHING_TOL, MAX_MOMENT_ORDER,
};
use crate::rotations::Rotation;
use crate::scalar::{CompensatedSum, Real};

/// A real-valued function on the configuration space `(0,∞) × SO(3)²`.
pub trait Landscape<T: Real>: Sync {
    fn energy(&self, tau: &Configuration<T>) -> Result<T>;

    /// Smallest admissible separation.
    fn l_min(&self) -> T;

    fn energy_at(&self, l: T, u: &Rotation<T>, v: &Rotation<T>) -> Result<T> {
        self.energy(&Configuration::new_unchecked(l, *u, *v))
    }
}

/// Source of the `L⁻⁶` coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "T: Real")]
pub enum VdwTerm<T> {
    Constant(T),
    Toy { mol1: Box<ToyMolecule>, mol2: Box<ToyMolecule> },
}

impl<T: Real> VdwTerm<T> {
    pub fn coefficient(&self, u: &Rotation<T>, v: &Rotation<T>) -> Result<T> {
        match self {
            VdwTerm::Constant(c) => Ok(*c),
            VdwTerm::Toy { mol1, mol2 } => {
                let r = vdw_coefficient(mol1, mol2, &u.cast(), &v.cast())?;
                Ok(T::lit(r.c_max))
            }
        }
    }
}

#[derive(Debug, Clone)]
struct OrderTerm<T> {
    n: usize,
    m: usize,
    coulomb: Vec<T>,
    prefactor: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawSurface<T> {
    rho1: ChargeDensity<T>,
    rho2: ChargeDensity<T>,
    e_infinity: T,
    vdw: VdwTerm<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orders: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l_min: Option<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawSurface<T>", into = "RawSurface<T>", bound = "T: Real")]
pub struct EnergySurface<T: Real> {
    rho1: ChargeDensity<T>,
    rho2: ChargeDensity<T>,
    e_infinity: T,
    vdw: VdwTerm<T>,
    orders: Vec<(usize, usize)>,
    l_min: T,
    moments1: Vec<Vec<T>>,
    moments2: Vec<Vec<T>>,
    terms: Vec<OrderTerm<T>>,
}

impl<T: Real> TryFrom<RawSurface<T>> for EnergySurface<T> {
    type Error = Error;
    fn try_from(s: RawSurface<T>) -> Result<Self> {
        let mut out = EnergySurface::new(s.rho1, s.rho2, s.e_infinity, s.vdw)?;
        if let Some(o) = s.orders {
            out = out.with_orders(o)?;
        }
        if let Some(l) = s.l_min {
            out = out.with_l_min(l)?;
        }
        Ok(out)
    }
}

impl<T: Real> From<EnergySurface<T>> for RawSurface<T> {
    fn from(s: EnergySurface<T>) -> Self {
        RawSurface {
            rho1: s.rho1,
            rho2: s.rho2,
            e_infinity: s.e_infinity,
            vdw: s.vdw,
            orders: Some(s.orders),
            l_min: Some(s.l_min),
        }
    }
}

impl<T: Real> EnergySurface<T> {
    /// Surface with all orders `2 ≤ n + m ≤ 5` and `L_min = 8 · max radius`.
    pub fn new(rho1: ChargeDensity<T>, rho2: ChargeDensity<T>, e_infinity: T, vdw: VdwTerm<T>) -> Result<Self> {
        if !e_infinity.is_finite() {
            return Err(Error::Validation("E_∞ must be finite".into()));
        }
        let moments1 = (0..=MAX_MOMENT_ORDER)
            .map(|n| multipole_moment(&rho1, n).map(|m| m.dense().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let moments2 = (0..=MAX_MOMENT_ORDER)
            .map(|n| multipole_moment(&rho2, n).map(|m| m.dense().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        let l_min = T::lit(8.0) * rho1.max_radius().max(rho2.max_radius());
        let mut out = Self {
            rho1,
            rho2,
            e_infinity,
            vdw,
            orders: Vec::new(),
            l_min,
            moments1,
            moments2,
            terms: Vec::new(),
        };
        out = out.with_orders(expansion_orders(6))?;
        Ok(out)
    }

    pub fn with_orders(mut self, orders: Vec<(usize, usize)>) -> Result<Self> {
        let mut terms = Vec::with_capacity(orders.len());
        for &(n, m) in &orders {
            check_orders(n, m)?;
            if n + m < 2 {
                return Err(Error::Domain(format!("order ({n},{m}) has n + m < 2")));
            }
            // terms with an identically zero moment contribute exactly 0
            let zero = |v: &[T]| v.iter().all(|x| *x == T::zero());
            if zero(&self.moments1[n]) || zero(&self.moments2[m]) {
                continue;
            }
            terms.push(OrderTerm {
                n,
                m,
                coulomb: coulomb_derivatives::<T>(n + m)?.dense().to_vec(),
                prefactor: interaction_prefactor(n, m),
            });
        }
        self.orders = orders;
        self.terms = terms;
        Ok(self)
    }

    pub fn with_l_min(mut self, l_min: T) -> Result<Self> {
        if !(l_min > T::zero()) || !l_min.is_finite() {
            return Err(Error::Domain(format!("L_min must be positive, got {l_min}")));
        }
        self.l_min = l_min;
        Ok(self)
    }

    pub fn rho1(&self) -> &ChargeDensity<T> {
        &self.rho1
    }

    pub fn rho2(&self) -> &ChargeDensity<T> {
        &self.rho2
    }

    pub fn e_infinity(&self) -> T {
        self.e_infinity
    }

    pub fn vdw(&self) -> &VdwTerm<T> {
        &self.vdw
    }

    pub fn orders(&self) -> &[(usize, usize)] {
        &self.orders
    }

    /// `(n₁, n₂)`, the first non-vanishing moment orders of the two
    /// densities at the default threshold.
    pub fn leading_orders(&self) -> Result<(Option<usize>, Option<usize>)> {
        let tol = T::lit(DEFAULT_VANISHING_TOL);
        Ok((
            first_nonvanishing_order(&self.rho1, tol)?,
            first_nonvanishing_order(&self.rho2, tol)?,
        ))
    }

    /// `F^(n,m)(Uρ₁, Vρ₂)` using the cached moments.
    pub fn interaction(&self, n: usize, m: usize, u: &Rotation<T>, v: &Rotation<T>) -> Result<T> {
        check_orders(n, m)?;
        let a = rotate_dense(&self.moments1[n], n, u.matrix());
        let b = rotate_dense(&self.moments2[m], m, v.matrix());
        let d = coulomb_derivatives::<T>(n + m)?;
        Ok(contract(&a, &b, d.dense()) * interaction_prefactor(n, m))
    }

    /// `Σ F^(n,m)/L^{n+m+1} − C/L⁶`, i.e. the surface minus `E_∞`.
    pub fn interaction_energy(&self, l: T, u: &Rotation<T>, v: &Rotation<T>) -> Result<T> {
        let mut rot1: Vec<Option<Vec<T>>> = vec![None; MAX_MOMENT_ORDER + 1];
        let mut rot2: Vec<Option<Vec<T>>> = vec![None; MAX_MOMENT_ORDER + 1];
        let mut acc = CompensatedSum::new();
        for t in &self.terms {
            let a = rot1[t.n].get_or_insert_with(|| rotate_dense(&self.moments1[t.n], t.n, u.matrix()));
            let b = rot2[t.m].get_or_insert_with(|| rotate_dense(&self.moments2[t.m], t.m, v.matrix()));
            let f = contract(a, b, &t.coulomb) * t.prefactor;
            acc.add(f / l.powi((t.n + t.m + 1) as i32));
        }
        let c = self.vdw.coefficient(u, v)?;
        acc.add(-c / l.powi(6));
        Ok(acc.value())
    }
}

impl<T: Real> Landscape<T> for EnergySurface<T> {
    fn energy(&self, tau: &Configuration<T>) -> Result<T> {
        surface_energy(self, tau)
    }

    fn l_min(&self) -> T {
        self.l_min
    }
}

pub fn surface_energy<T: Real>(surface: &EnergySurface<T>, tau: &Configuration<T>) -> Result<T> {
    let l = tau.l();
    if l < surface.l_min {
        return Err(Error::Domain(format!(
            "separation {l} below the surface's minimum {}",
            surface.l_min
        )));
    }
    Ok(surface.e_infinity + surface.interaction_energy(l, tau.u(), tau.v())?)
}
