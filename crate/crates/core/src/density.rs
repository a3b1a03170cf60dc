//! Rigid charge distributions as finite signed point measures, and the
//! configuration `(L, U, V)` placing two of them in space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotations::{Rotation, Vec3};
use crate::scalar::{compensated_sum, Real};

/// Finite signed point measure on R³.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity<T>", bound = "T: Real")]
pub struct ChargeDensity<T> {
    label: String,
    points: Vec<Vec3<T>>,
    weights: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawDensity<T> {
    #[serde(default)]
    label: String,
    points: Vec<Vec3<T>>,
    weights: Vec<T>,
}

impl<T: Real> TryFrom<RawDensity<T>> for ChargeDensity<T> {
    type Error = Error;
    fn try_from(raw: RawDensity<T>) -> Result<Self> {
        ChargeDensity::new(raw.points, raw.weights, raw.label)
    }
}

impl<T: Real> ChargeDensity<T> {
    pub fn new(points: Vec<Vec3<T>>, weights: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation("density has no points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::Validation(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::Validation(format!("point {i} has a non-finite coordinate")));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::Validation(format!("weight {i} is not finite")));
        }
        Ok(Self { label: label.into(), points, weights })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Σ weights, compensated, in index order.
    pub fn total_charge(&self) -> T {
        compensated_sum(self.weights.iter().copied())
    }

    /// Largest distance of a point from the origin.
    pub fn max_radius(&self) -> T {
        self.points
            .iter()
            .map(crate::rotations::norm3)
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Same points with new weights.
    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        Self::new(self.points.clone(), weights, self.label.clone())
    }

    /// Points mapped by `x ↦ Ux`, weights unchanged.
    pub fn rotated(&self, u: &Rotation<T>) -> Self {
        Self {
            label: self.label.clone(),
            points: self.points.iter().map(|p| u.apply(p)).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn translated(&self, shift: &Vec3<T>) -> Self {
        Self {
            label: self.label.clone(),
            points: self
                .points
                .iter()
                .map(|p| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]])
                .collect(),
            weights: self.weights.clone(),
        }
    }
}

pub fn total_charge<T: Real>(rho: &ChargeDensity<T>) -> T {
    rho.total_charge()
}

/// The rotated measure `Uρ`, `Uρ(D) = ρ(U⁻¹D)`.
pub fn rotate_density<T: Real>(u: &Rotation<T>, rho: &ChargeDensity<T>) -> Result<ChargeDensity<T>> {
    u.check()?;
    Ok(rho.rotated(u))
}

/// Union of `Uρ₁` and `Vρ₂ + L e₁`.
pub fn place_pair<T: Real>(
    rho1: &ChargeDensity<T>,
    rho2: &ChargeDensity<T>,
    tau: &Configuration<T>,
) -> Result<ChargeDensity<T>> {
    if !(tau.l > T::zero()) {
        return Err(Error::Domain(format!("separation must be positive, got {}", tau.l)));
    }
    let a = rotate_density(&tau.u, rho1)?;
    let b = rotate_density(&tau.v, rho2)?.translated(&[tau.l, T::zero(), T::zero()]);
    let mut points = a.points;
    points.extend(b.points);
    let mut weights = a.weights;
    weights.extend(b.weights);
    ChargeDensity::new(points, weights, format!("{}+{}", rho1.label, rho2.label))
}

/// Nuclear configuration `τ = (L, U, V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration<T>", bound = "T: Real")]
pub struct Configuration<T> {
    #[serde(rename = "L")]
    pub(crate) l: T,
    #[serde(rename = "U")]
    pub(crate) u: Rotation<T>,
    #[serde(rename = "V")]
    pub(crate) v: Rotation<T>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawConfiguration<T> {
    #[serde(rename = "L")]
    l: T,
    #[serde(rename = "U")]
    u: Rotation<T>,
    #[serde(rename = "V")]
    v: Rotation<T>,
}

impl<T: Real> TryFrom<RawConfiguration<T>> for Configuration<T> {
    type Error = Error;
    fn try_from(raw: RawConfiguration<T>) -> Result<Self> {
        Configuration::new(raw.l, raw.u, raw.v)
    }
}

impl<T: Real> Configuration<T> {
    pub fn new(l: T, u: Rotation<T>, v: Rotation<T>) -> Result<Self> {
        if !(l > T::zero()) || !l.is_finite() {
            return Err(Error::Domain(format!("separation must be positive and finite, got {l}")));
        }
        u.check()?;
        v.check()?;
        Ok(Self { l, u, v })
    }

    pub(crate) fn new_unchecked(l: T, u: Rotation<T>, v: Rotation<T>) -> Self {
        Self { l, u, v }
    }

    pub fn l(&self) -> T {
        self.l
    }

    pub fn u(&self) -> &Rotation<T> {
        &self.u
    }

    pub fn v(&self) -> &Rotation<T> {
        &self.v
    }

    pub fn with_l(&self, l: T) -> Result<Self> {
        Self::new(l, self.u, self.v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotations::{exp_map, Generator};

    fn d(points: Vec<[f64; 3]>, weights: Vec<f64>) -> ChargeDensity<f64> {
        ChargeDensity::new(points, weights, "t").unwrap()
    }

    #[test]
    fn charges() {
        assert_eq!(d(vec![[0.0, 0.0, 1.0], [0.0; 3]], vec![1.0, -1.0]).total_charge(), 0.0);
        let r = d(vec![[0.0; 3], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], vec![2.0, -1.0, -1.0]);
        assert_eq!(total_charge(&r), 0.0);
        assert_eq!(d(vec![[0.0; 3]], vec![1.0]).total_charge(), 1.0);
    }

    #[test]
    fn construction_is_validated() {
        assert!(ChargeDensity::<f64>::new(vec![], vec![], "").is_err());
        assert!(ChargeDensity::new(vec![[0.0; 3]], vec![1.0, 2.0], "").is_err());
        assert!(ChargeDensity::new(vec![[f64::NAN, 0.0, 0.0]], vec![1.0], "").is_err());
    }

    #[test]
    fn half_turn_about_e3_swaps_the_pair() {
        let rho = d(vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]], vec![1.0, -1.0]);
        let r = exp_map(&Generator::axis(2), std::f64::consts::PI);
        let out = rotate_density(&r, &rho).unwrap();
        assert!((out.points()[0][0] + 1.0).abs() < 1e-15);
        assert!((out.points()[1][0] - 1.0).abs() < 1e-15);
        assert_eq!(out.weights(), rho.weights());
        let same = rotate_density(&Rotation::identity(), &rho).unwrap();
        assert_eq!(same, rho);
    }

    #[test]
    fn place_pair_shifts_second_molecule() {
        let a = d(vec![[0.0, 1.0, 0.0]], vec![1.0]);
        let b = d(vec![[0.0, 0.0, 1.0], [0.5, 0.0, 0.0]], vec![-1.0, 3.0]);
        let id = Rotation::identity();
        let tau = Configuration::new(7.0, id, id).unwrap();
        let y = place_pair(&a, &b, &tau).unwrap();
        assert_eq!(y.len(), 3);
        assert_eq!(y.points()[1], [7.0, 0.0, 1.0]);
        assert_eq!(y.points()[2], [7.5, 0.0, 0.0]);
        assert_eq!(y.total_charge(), a.total_charge() + b.total_charge());
        assert!(Configuration::new(0.0, id, id).is_err());
        let bad = Configuration::new_unchecked(0.0, id, id);
        assert!(matches!(place_pair(&a, &b, &bad), Err(Error::Domain(_))));
    }

    #[test]
    fn configuration_json_round_trip() {
        let u = exp_map(&Generator::axis(0), 0.4);
        let tau = Configuration::new(3.5, u, Rotation::identity()).unwrap();
        let s = serde_json::to_string(&tau).unwrap();
        let back: Configuration<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, tau);
        let bad = r#"{"L":1.0,"U":[2,0,0,0,1,0,0,0,1],"V":[1,0,0,0,1,0,0,0,1]}"#;
        assert!(serde_json::from_str::<Configuration<f64>>(bad).is_err());
    }
}
