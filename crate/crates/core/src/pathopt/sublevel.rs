//! Connectivity of sampled sublevel sets `{F^(n,m) < −δ}` on `SO(3)²`.

use rayon::prelude::*;
use serde::Serialize;

use crate::density::ChargeDensity;
use crate::error::{Error, Result};
use crate::multipole::MultipolarInteraction;
use crate::rotations::{sample_so3_pairs, Rotation};
use crate::scalar::Real;

/// Target probability that a ball of the connection radius around a fixed
/// point contains no sample.
pub const EMPTY_BALL_PROBABILITY: f64 = 1e-3;

/// Haar measure of the geodesic ball of radius `s` in SO(3).
pub fn so3_ball_fraction(s: f64) -> f64 {
    let s = s.clamp(0.0, std::f64::consts::PI);
    (s - s.sin()) / std::f64::consts::PI
}

/// Ball radius `s` in the max-angle metric of SO(3)² such that `n`
/// uniform samples leave a given ball empty with probability at most
/// [`EMPTY_BALL_PROBABILITY`]. Two points of a connected region whose
/// balls of radius `s` both contain a sample are then linked by samples
/// at distance at most `2s`.
pub fn coverage_radius(n: usize) -> f64 {
    let target = |s: f64| {
        let p = so3_ball_fraction(s).powi(2);
        (n as f64) * (-p).ln_1p() - EMPTY_BALL_PROBABILITY.ln()
    };
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
    if target(hi) > 0.0 {
        return hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if target(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Edge radius of the sample graph, `2 · coverage_radius(n)`, capped
/// below `π` so edges stay inside the injectivity radius.
pub fn connection_radius(n: usize) -> f64 {
    (2.0 * coverage_radius(n)).min(std::f64::consts::PI - 1e-3)
}

/// `true` when both relative rotation angles are at most `r`, tested via
/// `tr(AᵀB) ≥ 1 + 2 cos r`.
pub(crate) fn within<T: Real>(a: &(Rotation<T>, Rotation<T>), b: &(Rotation<T>, Rotation<T>), cos_bound: T) -> bool {
    rel_trace(&a.0, &b.0) >= cos_bound && rel_trace(&a.1, &b.1) >= cos_bound
}

fn rel_trace<T: Real>(a: &Rotation<T>, b: &Rotation<T>) -> T {
    let (x, y) = (a.matrix(), b.matrix());
    let mut t = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            t = t + x[i][j] * y[i][j];
        }
    }
    t
}

/// Max-angle distance on SO(3)².
pub fn pair_distance<T: Real>(a: &(Rotation<T>, Rotation<T>), b: &(Rotation<T>, Rotation<T>)) -> T {
    a.0.angle_to(&b.0).max(a.1.angle_to(&b.1))
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Component label per node (labels are consecutive, numbered in order of
/// first appearance) of the graph joining nodes within `radius`.
pub(crate) fn components<T: Real>(nodes: &[(Rotation<T>, Rotation<T>)], radius: f64) -> Vec<usize> {
    let cos_bound = T::lit(1.0 + 2.0 * radius.cos());
    let edges: Vec<Vec<usize>> = (0..nodes.len())
        .into_par_iter()
        .map(|i| ((i + 1)..nodes.len()).filter(|&j| within(&nodes[i], &nodes[j], cos_bound)).collect())
        .collect();
    let mut uf = UnionFind::new(nodes.len());
    for (i, row) in edges.iter().enumerate() {
        for &j in row {
            uf.union(i, j);
        }
    }
    let mut label = vec![usize::MAX; nodes.len()];
    let mut root_label = std::collections::HashMap::new();
    for i in 0..nodes.len() {
        let r = uf.find(i);
        let next = root_label.len();
        label[i] = *root_label.entry(r).or_insert(next);
    }
    label
}

#[derive(Debug, Clone, Serialize)]
pub struct SublevelReport {
    pub n: usize,
    pub m: usize,
    pub delta: f64,
    pub grid_n: usize,
    /// Samples with `F < −δ`.
    pub sublevel_size: usize,
    pub radius: f64,
    pub components: usize,
    pub component_sizes: Vec<usize>,
    /// No sample fell in the sublevel set.
    pub empty: bool,
    /// Exactly one component.
    pub passed: bool,
}

/// Samples `grid_n` Haar pairs, keeps those with `F^(n,m) < −δ` and counts
/// the connected components of the graph joining samples within
/// [`connection_radius`].
pub fn sublevel_connectivity<T: Real>(
    rho1: &ChargeDensity<T>,
    rho2: &ChargeDensity<T>,
    n: usize,
    m: usize,
    delta: T,
    grid_n: usize,
    seed: u64,
) -> Result<SublevelReport> {
    if n == 0 || m == 0 || !(2..=4).contains(&(n + m)) {
        return Err(Error::Domain(format!("need n, m ≥ 1 and n + m ∈ {{2,3,4}}, got ({n},{m})")));
    }
    if !(delta > T::zero()) {
        return Err(Error::Domain(format!("δ must be positive, got {delta}")));
    }
    let f = MultipolarInteraction::new(n, m, rho1, rho2)?;
    let samples = sample_so3_pairs::<T>(grid_n, seed)?;
    let keep: Vec<bool> = samples.par_iter().map(|(u, v)| f.evaluate(u, v) < -delta).collect();
    let nodes: Vec<_> = samples.into_iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s).collect();
    let radius = connection_radius(grid_n);
    let labels = components(&nodes, radius);
    let count = labels.iter().map(|l| l + 1).max().unwrap_or(0);
    let mut sizes = vec![0; count];
    for l in &labels {
        sizes[*l] += 1;
    }
    Ok(SublevelReport {
        n,
        m,
        delta: delta.to_f64_lossy(),
        grid_n,
        sublevel_size: nodes.len(),
        radius,
        components: count,
        component_sizes: sizes,
        empty: nodes.is_empty(),
        passed: count == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathopt::fixtures::unit_dipole;

    #[test]
    fn radius_shrinks_with_samples() {
        let r1 = coverage_radius(500);
        let r2 = coverage_radius(5000);
        assert!(r2 < r1);
        let p = so3_ball_fraction(r2).powi(2);
        assert!((1.0 - p).powi(5000) <= EMPTY_BALL_PROBABILITY * (1.0 + 1e-6));
    }

    #[test]
    fn empty_sublevel_is_reported() {
        let d = unit_dipole::<f64>();
        let r = sublevel_connectivity(&d, &d, 1, 1, 3.0, 200, 1).unwrap();
        assert!(r.empty);
        assert!(!r.passed);
        assert_eq!(r.components, 0);
    }
}
