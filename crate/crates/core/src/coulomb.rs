//! Direct Coulomb double sums between two placed densities and the
//! truncated multipole expansion they are compared against.

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{ChargeDensity, Configuration};
use crate::error::{Error, Result};
use crate::multipole::{MultipolarInteraction, MAX_MOMENT_ORDER};
use crate::rotations::Rotation;
use crate::scalar::{linear_fit, CompensatedSum, Real};

/// Remainders below this are treated as exact agreement.
pub const MACHINE_PRECISION_FLOOR: f64 = 1e-14;
/// Slack allowed on the fitted remainder slope.
pub const SLOPE_MARGIN: f64 = 0.3;

fn check_support<T: Real>(rho: &ChargeDensity<T>, l: T, which: &str) -> Result<()> {
    let r = rho.max_radius();
    if r > l / T::lit(8.0) {
        return Err(Error::Precondition(format!(
            "{which} has support radius {r}, larger than L/8 = {}",
            l / T::lit(8.0)
        )));
    }
    Ok(())
}

/// `Σ_x Σ_y w_x w_y / |L e₁ + V y − U x|`.
///
/// Rows are summed in parallel, each with its own compensated
/// accumulator; row totals are then reduced in index order, so the result
/// does not depend on the number of threads.
pub fn coulomb_interaction<T: Real>(
    rho1: &ChargeDensity<T>,
    rho2: &ChargeDensity<T>,
    tau: &Configuration<T>,
) -> Result<T> {
    let l = tau.l();
    check_support(rho1, l, "first density")?;
    check_support(rho2, l, "second density")?;
    let xs: Vec<[T; 3]> = rho1.points().iter().map(|p| tau.u().apply(p)).collect();
    let ys: Vec<[T; 3]> = rho2
        .points()
        .iter()
        .map(|p| {
            let q = tau.v().apply(p);
            [q[0] + l, q[1], q[2]]
        })
        .collect();
    let w1 = rho1.weights();
    let w2 = rho2.weights();
    let rows: Vec<Result<T>> = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut acc = CompensatedSum::new();
            for (j, y) in ys.iter().enumerate() {
                let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
                let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                if r == T::zero() {
                    return Err(Error::Singularity(format!(
                        "point {i} of the first density coincides with point {j} of the second"
                    )));
                }
                acc.add(w1[i] * w2[j] / r);
            }
            Ok(acc.value())
        })
        .collect();
    let mut total = CompensatedSum::new();
    for r in rows {
        total.add(r?);
    }
    Ok(total.value())
}

/// Orders `(n, m)` with `2 ≤ n + m ≤ k − 1` and `n, m ≤ 4`.
pub fn expansion_orders(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for s in 2..k {
        for n in 0..=s {
            let m = s - n;
            if n <= MAX_MOMENT_ORDER && m <= MAX_MOMENT_ORDER {
                out.push((n, m));
            }
        }
    }
    out
}

fn check_truncation(k: usize) -> Result<()> {
    if !(2..=6).contains(&k) {
        return Err(Error::Domain(format!("truncation order K must lie in 2..=6, got {k}")));
    }
    Ok(())
}

/// The values `F^(n,m)(Uρ₁, Vρ₂)` for all orders below `K`, each tagged
/// with its power `n + m + 1`.
fn expansion_terms<T: Real>(
    rho1: &ChargeDensity<T>,
    rho2: &ChargeDensity<T>,
    u: &Rotation<T>,
    v: &Rotation<T>,
    k: usize,
) -> Result<Vec<(i32, T)>> {
    expansion_orders(k)
        .into_iter()
        .map(|(n, m)| {
            let f = MultipolarInteraction::new(n, m, rho1, rho2)?.evaluate(u, v);
            Ok(((n + m + 1) as i32, f))
        })
        .collect()
}

fn sum_terms<T: Real>(terms: &[(i32, T)], l: T) -> T {
    let mut acc = CompensatedSum::new();
    for (p, f) in terms {
        acc.add(*f / l.powi(*p));
    }
    acc.value()
}

/// `Σ_{2 ≤ n+m ≤ K−1} F^(n,m)(Uρ₁, Vρ₂) / L^{n+m+1}`.
pub fn expansion_value<T: Real>(
    rho1: &ChargeDensity<T>,
    rho2: &ChargeDensity<T>,
    tau: &Configuration<T>,
    k: usize,
) -> Result<T> {
    check_truncation(k)?;
    let terms = expansion_terms(rho1, rho2, tau.u(), tau.v(), k)?;
    Ok(sum_terms(&terms, tau.l()))
}

/// Brute force against truncated expansion over a range of separations.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    #[serde(rename = "L_values")]
    pub l_values: Vec<f64>,
    pub exact: Vec<f64>,
    pub truncated: Vec<f64>,
    pub remainder: Vec<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    /// Least-squares slope of `log|exact − truncated|` against `log L`;
    /// absent when the remainder reaches machine precision.
    pub fitted_slope: Option<f64>,
    /// `fitted_slope ≤ −(K+1) + 0.3`.
    pub success: bool,
    pub machine_precision: bool,
    /// Set when either density carries a net charge.
    pub hypothesis_violation: bool,
}

pub fn verify_expansion_order<T: Real>(
    rho1: &ChargeDensity<T>,
    rho2: &ChargeDensity<T>,
    u: &Rotation<T>,
    v: &Rotation<T>,
    k: usize,
    l_values: &[T],
) -> Result<ExpansionReport> {
    check_truncation(k)?;
    if l_values.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 separations, got {}",
            l_values.len()
        )));
    }
    if l_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("separations must be strictly increasing".into()));
    }
    let terms = expansion_terms(rho1, rho2, u, v, k)?;
    let mut exact = Vec::with_capacity(l_values.len());
    let mut truncated = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let tau = Configuration::new(l, *u, *v)?;
        exact.push(coulomb_interaction(rho1, rho2, &tau)?.to_f64_lossy());
        truncated.push(sum_terms(&terms, l).to_f64_lossy());
    }
    let remainder: Vec<f64> = exact.iter().zip(&truncated).map(|(a, b)| (a - b).abs()).collect();
    let machine_precision = remainder.iter().any(|r| *r < MACHINE_PRECISION_FLOOR);
    let fitted_slope = if machine_precision {
        None
    } else {
        let xs: Vec<f64> = l_values.iter().map(|l| l.to_f64_lossy().ln()).collect();
        let ys: Vec<f64> = remainder.iter().map(|r| r.ln()).collect();
        Some(linear_fit(&xs, &ys).0)
    };
    let success = fitted_slope
        .map(|s| s <= -((k + 1) as f64) + SLOPE_MARGIN)
        .unwrap_or(false);
    let hypothesis_violation =
        rho1.total_charge() != T::zero() || rho2.total_charge() != T::zero();
    Ok(ExpansionReport {
        l_values: l_values.iter().map(|l| l.to_f64_lossy()).collect(),
        exact,
        truncated,
        remainder,
        k,
        fitted_slope,
        success,
        machine_precision,
        hypothesis_violation,
    })
}
