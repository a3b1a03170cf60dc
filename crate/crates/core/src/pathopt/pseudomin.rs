//! Descent to local pseudo-minima on `SO(3)²` and the derivative criterion
//! certifying them.

use rayon::prelude::*;
use serde::Serialize;

use crate::density::ChargeDensity;
use crate::error::{Error, Result};
use crate::multipole::{check_nondegenerate, MultipolarInteraction};
use crate::rotations::{
    combined_directions, generator_basis, geodesic_derivatives, random_generator_pairs, random_rotation,
    GeneratorPair, Rotation,
};
use crate::scalar::Real;
use crate::seed::{indexed_rng, stream_rng, Stream};

/// Geodesic step sizes tried by the descent, largest first.
pub const STEP_LADDER: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
/// Random directions added to the six basis directions.
pub const DEFAULT_RANDOM_DIRECTIONS: usize = 10;
/// Random directions added to the criterion's deterministic sample.
const CRITERION_RANDOM_DIRECTIONS: usize = 10;
const DESCENT_CAP: usize = 100_000;

/// Outcome of [`descend_to_pseudo_minimum`].
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct Descent<T: Real> {
    #[serde(rename = "U")]
    pub u: Rotation<T>,
    #[serde(rename = "V")]
    pub v: Rotation<T>,
    pub value: T,
    /// Orientations after each accepted step; the start is not included.
    #[serde(skip)]
    pub points: Vec<(Rotation<T>, Rotation<T>)>,
    /// Function value after each accepted step.
    pub trace: Vec<T>,
    /// Set when the step cap stopped the descent.
    pub capped: bool,
}

/// Direction set used by the descent: the six basis directions, then `k`
/// seeded random combinations, each in both orientations.
pub fn descent_directions<T: Real>(k: usize, seed: u64) -> Vec<GeneratorPair<T>> {
    let mut rng = stream_rng(seed, Stream::Directions);
    let mut dirs: Vec<GeneratorPair<T>> = generator_basis().to_vec();
    dirs.extend(random_generator_pairs(k, &mut rng));
    dirs.iter().flat_map(|d| [*d, d.negated()]).collect()
}

/// Monotone pattern descent of `f` on `SO(3)²`.
///
/// Each iteration walks the step ladder from the top and takes the best
/// strictly decreasing geodesic step at the first size where one exists.
/// A step is only taken if `f` at 1/4, 1/2 and 3/4 of the way does not
/// exceed the current value, so the traced piecewise-geodesic path never
/// rises above its starting level at those checkpoints.
pub fn descend_to_pseudo_minimum<T, F>(f: &F, u0: &Rotation<T>, v0: &Rotation<T>, seed: u64) -> Descent<T>
where
    T: Real,
    F: Fn(&Rotation<T>, &Rotation<T>) -> T + ?Sized,
{
    descend_with(f, u0, v0, &descent_directions(DEFAULT_RANDOM_DIRECTIONS, seed))
}

pub(crate) fn descend_with<T, F>(f: &F, u0: &Rotation<T>, v0: &Rotation<T>, dirs: &[GeneratorPair<T>]) -> Descent<T>
where
    T: Real,
    F: Fn(&Rotation<T>, &Rotation<T>) -> T + ?Sized,
{
    let (mut u, mut v) = (*u0, *v0);
    let mut value = f(&u, &v);
    let mut points = Vec::new();
    let mut trace = Vec::new();
    let mut capped = false;
    'outer: loop {
        if trace.len() >= DESCENT_CAP {
            capped = true;
            break;
        }
        for &step in &STEP_LADDER {
            let h = T::lit(step);
            let mut cands: Vec<(T, usize)> = dirs
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let (uu, vv) = d.flow(&u, &v, h);
                    (f(&uu, &vv), i)
                })
                .filter(|(y, _)| *y < value)
                .collect();
            // stable sort keeps the first direction among equal values
            cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            for (y, i) in cands {
                let d = &dirs[i];
                let interior_ok = [0.25, 0.5, 0.75].iter().all(|s| {
                    let (uu, vv) = d.flow(&u, &v, h * T::lit(*s));
                    f(&uu, &vv) <= value
                });
                if interior_ok {
                    let (uu, vv) = d.flow(&u, &v, h);
                    u = uu.renormalized();
                    v = vv.renormalized();
                    value = y.min(f(&u, &v));
                    points.push((u, v));
                    trace.push(value);
                    continue 'outer;
                }
            }
        }
        break;
    }
    Descent { u, v, value, points, trace, capped }
}

/// δ-criterion for a local pseudo-minimum at one point.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct PseudoMinReport<T: Real> {
    #[serde(rename = "U")]
    pub u: Rotation<T>,
    #[serde(rename = "V")]
    pub v: Rotation<T>,
    /// Largest `|d/dt f|` over the direction sample.
    pub first_derivative_max: T,
    /// Smallest `d²/dt² f` over the direction sample.
    pub second_derivative_min: T,
    #[serde(rename = "F_value")]
    pub f_value: T,
    pub delta: T,
    pub passed: bool,
    pub directions_checked: usize,
    /// Directions in which both derivatives are within `δ` of zero.
    pub flat_directions: usize,
}

/// Deterministic direction sample of the criterion: basis, the 30 pairwise
/// combinations, and a fixed set of random combinations.
pub fn criterion_directions<T: Real>() -> Vec<GeneratorPair<T>> {
    let mut dirs: Vec<GeneratorPair<T>> = generator_basis().to_vec();
    dirs.extend(combined_directions());
    dirs.extend(random_generator_pairs(CRITERION_RANDOM_DIRECTIONS, &mut stream_rng(0, Stream::Directions)));
    dirs
}

/// Checks `|∂_t f| ≤ δ` and `∂_t² f ≥ −δ` along geodesics through `(U, V)`.
/// Fails with a resolution error when a finite-difference error estimate
/// exceeds `δ/10`.
pub fn pseudo_min_criterion<T, F>(f: &F, u: &Rotation<T>, v: &Rotation<T>, delta: T) -> Result<PseudoMinReport<T>>
where
    T: Real,
    F: Fn(&Rotation<T>, &Rotation<T>) -> T + ?Sized,
{
    if !(delta > T::zero()) {
        return Err(Error::Domain(format!("δ must be positive, got {delta}")));
    }
    let dirs = criterion_directions::<T>();
    let resolution = delta / T::lit(10.0);
    let mut d1max = T::zero();
    let mut d2min = T::infinity();
    let mut flat = 0;
    for (i, dir) in dirs.iter().enumerate() {
        let (d1, d2) = geodesic_derivatives(f, u, v, dir)?;
        if d1.error > resolution || d2.error > resolution {
            return Err(Error::Resolution(format!(
                "direction {i}: derivative error estimates {} and {} exceed δ/10 = {resolution}",
                d1.error, d2.error
            )));
        }
        d1max = d1max.max(d1.value.abs());
        d2min = d2min.min(d2.value);
        if d1.value.abs() <= delta && d2.value.abs() <= delta {
            flat += 1;
        }
    }
    Ok(PseudoMinReport {
        u: *u,
        v: *v,
        first_derivative_max: d1max,
        second_derivative_min: d2min,
        f_value: f(u, v),
        delta,
        passed: d1max <= delta && d2min >= -delta,
        directions_checked: dirs.len(),
        flat_directions: flat,
    })
}

/// Endpoint values of seeded descents on `F^(n,m)`.
#[derive(Debug, Clone, Serialize)]
pub struct NegativityReport {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub trials: usize,
    pub moment_scale: f64,
    pub endpoint_values: Vec<f64>,
    pub min_value: f64,
    pub max_value: f64,
    /// Every endpoint value is `≤ −δ`.
    pub passed: bool,
}

/// Runs [`descend_to_pseudo_minimum`] on `F^(n,m)(Uρ₁, Vρ₂)` from
/// `trials` Haar-random starts and reports the endpoint values.
///
/// `δ` is absolute. Orders involving an octopole require its contraction
/// map to be injective.
pub fn negativity_at_pseudomin<T: Real>(
    rho1: &ChargeDensity<T>,
    rho2: &ChargeDensity<T>,
    n: usize,
    m: usize,
    delta: T,
    trials: usize,
    seed: u64,
) -> Result<NegativityReport> {
    if n == 0 || m == 0 || !(2..=4).contains(&(n + m)) {
        return Err(Error::Domain(format!("need n, m ≥ 1 and n + m ∈ {{2,3,4}}, got ({n},{m})")));
    }
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if n == 3 {
        check_nondegenerate(rho1, 3)?;
    }
    if m == 3 {
        check_nondegenerate(rho2, 3)?;
    }
    let f = MultipolarInteraction::new(n, m, rho1, rho2)?;
    let eval = |u: &Rotation<T>, v: &Rotation<T>| f.evaluate(u, v);
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed, Stream::Starts, i as u64);
            let u0 = random_rotation(&mut rng);
            let v0 = random_rotation(&mut rng);
            descend_to_pseudo_minimum(&eval, &u0, &v0, seed).value.to_f64_lossy()
        })
        .collect();
    let min_value = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_value = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let d = delta.to_f64_lossy();
    Ok(NegativityReport {
        n,
        m,
        delta: d,
        trials,
        moment_scale: f.moment_scale().to_f64_lossy(),
        passed: values.iter().all(|x| *x <= -d),
        endpoint_values: values,
        min_value,
        max_value,
    })
}
