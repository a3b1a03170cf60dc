//! Small neutral point densities whose first non-vanishing moment has unit
//! size.

use crate::density::{ChargeDensity, Configuration};
use crate::energy::Landscape;
use crate::error::Result;
use crate::scalar::Real;

fn build<T: Real>(points: &[[f64; 3]], weights: &[f64], label: &str) -> ChargeDensity<T> {
    ChargeDensity::new(
        points.iter().map(|p| p.map(T::lit)).collect(),
        weights.iter().map(|w| T::lit(*w)).collect(),
        label,
    )
    .expect("fixture is valid")
}

/// `±1` at `±e₃/2`; dipole `e₃`.
pub fn unit_dipole<T: Real>() -> ChargeDensity<T> {
    build(&[[0.0, 0.0, 0.5], [0.0, 0.0, -0.5]], &[1.0, -1.0], "unit dipole")
}

/// `+1` at `±e₃`, `−1` at `±e₃/√2`; no dipole, `M⁽²⁾₃₃ = 1`.
pub fn linear_quadrupole<T: Real>() -> ChargeDensity<T> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    build(
        &[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [0.0, 0.0, h], [0.0, 0.0, -h]],
        &[1.0, 1.0, -1.0, -1.0],
        "linear quadrupole",
    )
}

/// Axial octopole along `e₃` with vanishing dipole and quadrupole, scaled
/// so `M⁽³⁾₃₃₃ = 1`.
pub fn linear_octopole<T: Real>() -> ChargeDensity<T> {
    // ±c at ±e₃ and ∓2c at ±e₃/2 cancel the dipole; Σ q z³ = 2c·3/4
    let c = 2.0 / 3.0;
    build(
        &[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [0.0, 0.0, 0.5], [0.0, 0.0, -0.5]],
        &[c, -c, -2.0 * c, 2.0 * c],
        "linear octopole",
    )
}

/// Alternating charges on a hexagon in the `e₂e₃` plane. Its octopole
/// annihilates `e₁`, so it is degenerate.
pub fn planar_octopole<T: Real>() -> ChargeDensity<T> {
    let pts: Vec<[f64; 3]> = (0..6)
        .map(|k| {
            let phi = std::f64::consts::FRAC_PI_3 * k as f64;
            [0.0, phi.cos(), phi.sin()]
        })
        .collect();
    build(&pts, &[1.0, -1.0, 1.0, -1.0, 1.0, -1.0], "planar octopole")
}

/// Landscape that depends on `L` and on the azimuth `θ` of `U e₁`:
///
/// `E = −cos 3θ + x²/2 + 0.3 x sin²(3θ/2) + 10 (U e₁)₃² + 10 (1 − (V e₁)₁)`
///
/// with `x = L − 2`. Minima sit at `θ ∈ {0, ±2π/3}`, `x = 0`, and the
/// saddles between them at `θ = ±π/3`, `x = −0.3`, level `0.955`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoParameterToy;

impl TwoParameterToy {
    pub const L_MIN: f64 = 0.5;
    pub const SADDLE_LEVEL: f64 = 0.955;

    /// Value on the reduced `(θ, L)` plane.
    pub fn reduced(theta: f64, l: f64) -> f64 {
        let x = l - 2.0;
        -(3.0 * theta).cos() + 0.5 * x * x + 0.3 * x * (1.5 * theta).sin().powi(2)
    }
}

impl<T: Real> Landscape<T> for TwoParameterToy {
    fn energy(&self, tau: &Configuration<T>) -> Result<T> {
        let e1 = [T::one(), T::zero(), T::zero()];
        let u = tau.u().apply(&e1);
        let v = tau.v().apply(&e1);
        let theta = u[1].atan2(u[0]);
        let x = tau.l() - T::lit(2.0);
        let s = (T::lit(1.5) * theta).sin();
        Ok(-(T::lit(3.0) * theta).cos()
            + T::lit(0.5) * x * x
            + T::lit(0.3) * x * s * s
            + T::lit(10.0) * u[2] * u[2]
            + T::lit(10.0) * (T::one() - v[0]))
    }

    fn l_min(&self) -> T {
        T::lit(Self::L_MIN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipole::{check_nondegenerate, first_nonvanishing_order, multipole_moment};

    #[test]
    fn leading_orders_and_normalization() {
        let tol = 1e-9;
        assert_eq!(first_nonvanishing_order(&unit_dipole::<f64>(), tol).unwrap(), Some(1));
        assert_eq!(first_nonvanishing_order(&linear_quadrupole::<f64>(), tol).unwrap(), Some(2));
        assert_eq!(first_nonvanishing_order(&linear_octopole::<f64>(), tol).unwrap(), Some(3));
        assert_eq!(first_nonvanishing_order(&planar_octopole::<f64>(), tol).unwrap(), Some(3));
        assert!((multipole_moment(&unit_dipole::<f64>(), 1).unwrap().get(&[2]) - 1.0).abs() < 1e-15);
        assert!((multipole_moment(&linear_quadrupole::<f64>(), 2).unwrap().get(&[2, 2]) - 1.0).abs() < 1e-15);
        assert!((multipole_moment(&linear_octopole::<f64>(), 3).unwrap().get(&[2, 2, 2]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn octopole_degeneracy() {
        assert!(check_nondegenerate(&linear_octopole::<f64>(), 3).is_ok());
        assert!(check_nondegenerate(&planar_octopole::<f64>(), 3).is_err());
    }
}
