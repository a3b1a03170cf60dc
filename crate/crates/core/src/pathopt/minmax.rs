//! String-of-nodes relaxation of the path maximum between two minima.

use rayon::prelude::*;
use serde::Serialize;

use super::path::{reduce_maxima, segment_max, segment_maxima, PathOnConfigSpace, ANGLE_MARGIN, DEFAULT_SAMPLES};
use super::pseudomin::{pseudo_min_criterion, PseudoMinReport};
use crate::density::Configuration;
use crate::energy::Landscape;
use crate::error::{Error, Result};
use crate::rotations::{generator_basis, Rotation};
use crate::scalar::Real;

/// Tolerance of the endpoint minimality checks.
pub const ENDPOINT_DELTA: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct MinMaxOptions {
    pub samples_per_segment: usize,
    pub initial_step: f64,
    /// Relaxation stops once no move of at least this size helps.
    pub min_step: f64,
    pub max_moves: usize,
    pub endpoint_delta: f64,
}

impl Default for MinMaxOptions {
    fn default() -> Self {
        Self {
            samples_per_segment: DEFAULT_SAMPLES,
            initial_step: 0.1,
            min_step: 1e-5,
            max_moves: 100_000,
            endpoint_delta: ENDPOINT_DELTA,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct MinMaxResult<T: Real> {
    pub level: T,
    pub argmax_t: T,
    pub path: PathOnConfigSpace<T>,
    /// Accepted node moves.
    pub iterations: usize,
    pub converged: bool,
    /// Path maximum at the end of every step-size sweep.
    pub sweep_levels: Vec<T>,
}

/// Rotational criterion plus the sign of the `L`-derivatives at one
/// configuration.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct LocalMinReport<T: Real> {
    pub rotations: PseudoMinReport<T>,
    #[serde(rename = "dE_dL")]
    pub de_dl: T,
    #[serde(rename = "d2E_dL2")]
    pub d2e_dl2: T,
    /// `L` sits at the surface's lower limit, so only `dE/dL ≥ −δ` is
    /// required.
    pub at_boundary: bool,
    pub passed: bool,
}

fn l_derivatives<T: Real, S: Landscape<T> + ?Sized>(surface: &S, tau: &Configuration<T>) -> Result<(T, T, bool)> {
    let l = tau.l();
    let h0 = T::lit(1e-3) * l.abs().max(T::one());
    let e = |x: T| surface.energy_at(x, tau.u(), tau.v());
    let f0 = e(l)?;
    let two = T::lit(2.0);
    let at_boundary = l - h0 < surface.l_min();
    let mut d1 = [T::zero(); 3];
    let mut d2 = [T::zero(); 3];
    let mut h = h0;
    for k in 0..3 {
        if at_boundary {
            let (f1, f2) = (e(l + h)?, e(l + two * h)?);
            d1[k] = (f1 - f0) / h;
            d2[k] = (f2 - two * f1 + f0) / (h * h);
        } else {
            let (fp, fm) = (e(l + h)?, e(l - h)?);
            d1[k] = (fp - fm) / (two * h);
            d2[k] = (fp - two * f0 + fm) / (h * h);
        }
        h = h / two;
    }
    let rich = |d: [T; 3], p: T| {
        let r0 = (p * d[1] - d[0]) / (p - T::one());
        let r1 = (p * d[2] - d[1]) / (p - T::one());
        r1 + (r1 - r0) / (p * p - T::one())
    };
    if at_boundary {
        Ok((rich(d1, two), rich(d2, two), true))
    } else {
        Ok((rich(d1, T::lit(4.0)), rich(d2, T::lit(4.0)), false))
    }
}

/// Checks that `tau` is a local minimum up to `δ`: the pseudo-minimum
/// criterion in the rotations, and `|∂_L E| ≤ δ`, `∂_L² E ≥ −δ` (only
/// `∂_L E ≥ −δ` at the lower limit of `L`).
pub fn check_local_minimum<T: Real, S: Landscape<T> + ?Sized>(
    surface: &S,
    tau: &Configuration<T>,
    delta: T,
) -> Result<LocalMinReport<T>> {
    surface.energy(tau)?;
    let l = tau.l();
    let f = |u: &Rotation<T>, v: &Rotation<T>| surface.energy_at(l, u, v).unwrap_or(T::nan());
    let rotations = pseudo_min_criterion(&f, tau.u(), tau.v(), delta)?;
    let (d1, d2, at_boundary) = l_derivatives(surface, tau)?;
    let l_ok = if at_boundary { d1 >= -delta } else { d1.abs() <= delta && d2 >= -delta };
    Ok(LocalMinReport { passed: rotations.passed && l_ok, rotations, de_dl: d1, d2e_dl2: d2, at_boundary })
}

fn angles_ok<T: Real>(a: &Configuration<T>, b: &Configuration<T>) -> bool {
    let limit = T::PI() - T::lit(ANGLE_MARGIN);
    a.u().angle_to(b.u()) < limit && a.v().angle_to(b.v()) < limit
}

fn moved<T: Real>(node: &Configuration<T>, mv: usize, step: T, l_ref: T) -> Configuration<T> {
    let basis = generator_basis::<T>();
    if mv < 12 {
        let g = if mv.is_multiple_of(2) { basis[mv / 2] } else { basis[mv / 2].negated() };
        let (u, v) = g.flow(node.u(), node.v(), step);
        Configuration::new_unchecked(node.l(), u.renormalized(), v.renormalized())
    } else {
        let sign = if mv == 12 { T::one() } else { -T::one() };
        Configuration::new_unchecked(node.l() + sign * step * l_ref, *node.u(), *node.v())
    }
}

struct Candidate<T> {
    node: usize,
    config: Configuration<T>,
    left: (T, T),
    right: (T, T),
    global: T,
    local: T,
}

/// Mountain-pass level between two local minima by relaxing a geodesic
/// string of `nodes` configurations.
pub fn minmax_optimize<T: Real, S: Landscape<T> + ?Sized>(
    surface: &S,
    tau0: &Configuration<T>,
    tau1: &Configuration<T>,
    nodes: usize,
    seed: u64,
) -> Result<MinMaxResult<T>> {
    minmax_optimize_with(surface, tau0, tau1, nodes, seed, &MinMaxOptions::default())
}

pub fn minmax_optimize_with<T: Real, S: Landscape<T> + ?Sized>(
    surface: &S,
    tau0: &Configuration<T>,
    tau1: &Configuration<T>,
    nodes: usize,
    seed: u64,
    opts: &MinMaxOptions,
) -> Result<MinMaxResult<T>> {
    if nodes < 3 {
        return Err(Error::Domain(format!("need at least 3 nodes, got {nodes}")));
    }
    let delta = T::lit(opts.endpoint_delta);
    for (name, tau) in [("tau0", tau0), ("tau1", tau1)] {
        let r = check_local_minimum(surface, tau, delta)?;
        if !r.passed {
            return Err(Error::Precondition(format!(
                "{name} is not a local minimum at δ = {delta}: |∂F| ≤ {}, ∂²F ≥ {}, dE/dL = {}, d²E/dL² = {}",
                r.rotations.first_derivative_max, r.rotations.second_derivative_min, r.de_dl, r.d2e_dl2
            )));
        }
    }
    relax(surface, PathOnConfigSpace::geodesic(tau0, tau1, nodes, seed)?, opts)
}

/// Relaxes an existing path with fixed endpoints.
pub fn relax<T: Real, S: Landscape<T> + ?Sized>(
    surface: &S,
    path: PathOnConfigSpace<T>,
    opts: &MinMaxOptions,
) -> Result<MinMaxResult<T>> {
    let samples = opts.samples_per_segment;
    let l_ref = path.start().l().abs().max(path.end().l().abs()).max(T::one());
    let mut nodes = path.into_nodes();
    let mut path = PathOnConfigSpace::new(nodes.clone())?;
    let mut maxima = segment_maxima(surface, &path, samples)?;
    let mut level = reduce_maxima(&path, &maxima).0;
    let mut step = T::lit(opts.initial_step);
    let min_step = T::lit(opts.min_step);
    let mut moves = 0;
    let mut sweep_levels = Vec::new();
    let mut converged = true;
    while step >= min_step {
        loop {
            if moves >= opts.max_moves {
                converged = false;
                break;
            }
            let (_, t_max) = reduce_maxima(&path, &maxima);
            let (k, _) = path.locate(t_max);
            let last = nodes.len() - 1;
            let mut cand_nodes: Vec<usize> = [k.wrapping_sub(1), k, k + 1, k + 2]
                .into_iter()
                .filter(|&i| i >= 1 && i < last)
                .collect();
            cand_nodes.dedup();
            let jobs: Vec<(usize, usize)> =
                cand_nodes.iter().flat_map(|&i| (0..14).map(move |mv| (i, mv))).collect();
            let results: Vec<Option<Candidate<T>>> = jobs
                .par_iter()
                .map(|&(i, mv)| -> Result<Option<Candidate<T>>> {
                    let c = moved(&nodes[i], mv, step, l_ref);
                    if c.l() < surface.l_min() || !angles_ok(&nodes[i - 1], &c) || !angles_ok(&c, &nodes[i + 1]) {
                        return Ok(None);
                    }
                    let left = segment_max(surface, &nodes[i - 1], &c, samples)?;
                    let right = segment_max(surface, &c, &nodes[i + 1], samples)?;
                    let local = left.0.max(right.0);
                    let old_local = maxima[i - 1].0.max(maxima[i].0);
                    if !(local < old_local) {
                        return Ok(None);
                    }
                    let others = maxima
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i - 1 && *j != i)
                        .fold(T::neg_infinity(), |a, (_, m)| a.max(m.0));
                    let global = others.max(local);
                    if global > level {
                        return Ok(None);
                    }
                    Ok(Some(Candidate { node: i, config: c, left, right, global, local }))
                })
                .collect::<Result<_>>()?;
            let mut best: Option<Candidate<T>> = None;
            for c in results.into_iter().flatten() {
                let better = match &best {
                    None => true,
                    Some(b) => c.global < b.global || (c.global == b.global && c.local < b.local),
                };
                if better {
                    best = Some(c);
                }
            }
            let Some(c) = best else { break };
            nodes[c.node] = c.config;
            maxima[c.node - 1] = c.left;
            maxima[c.node] = c.right;
            path = PathOnConfigSpace::new(nodes.clone())?;
            level = c.global;
            moves += 1;
        }
        if !converged {
            break;
        }
        if let Ok(q) = path.reparametrized(nodes.len()) {
            let qm = segment_maxima(surface, &q, samples)?;
            let ql = reduce_maxima(&q, &qm).0;
            if ql <= level {
                nodes = q.nodes().to_vec();
                path = q;
                maxima = qm;
                level = ql;
            }
        }
        sweep_levels.push(level);
        step = step / T::lit(2.0);
    }
    let (level, argmax_t) = reduce_maxima(&path, &maxima);
    Ok(MinMaxResult { level, argmax_t, path, iterations: moves, converged, sweep_levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotations::{exp_map, Generator};

    /// `(L − 2)² + (1 − (Ue₁)·e₁) + (1 − (Ve₁)·e₁)`.
    struct Bowl;
    impl Landscape<f64> for Bowl {
        fn energy(&self, tau: &Configuration<f64>) -> Result<f64> {
            let a = tau.u().apply(&[1.0, 0.0, 0.0])[0];
            let b = tau.v().apply(&[1.0, 0.0, 0.0])[0];
            Ok((tau.l() - 2.0).powi(2) + 2.0 - a - b)
        }
        fn l_min(&self) -> f64 {
            0.5
        }
    }

    #[test]
    fn non_minimum_endpoint_is_rejected() {
        let a = Configuration::new(2.0, Rotation::identity(), Rotation::identity()).unwrap();
        let b = Configuration::new(2.5, Rotation::identity(), Rotation::identity()).unwrap();
        assert!(matches!(minmax_optimize(&Bowl, &a, &b, 5, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn boundary_minimum_needs_only_one_sided_slope() {
        struct Wall;
        impl Landscape<f64> for Wall {
            fn energy(&self, tau: &Configuration<f64>) -> Result<f64> {
                Ok(tau.l())
            }
            fn l_min(&self) -> f64 {
                1.0
            }
        }
        let a = Configuration::new(1.0, Rotation::identity(), Rotation::identity()).unwrap();
        let r = check_local_minimum(&Wall, &a, 1e-6).unwrap();
        assert!(r.at_boundary && r.passed);
        let b = a.with_l(1.5).unwrap();
        assert!(!check_local_minimum(&Wall, &b, 1e-6).unwrap().passed);
    }

    #[test]
    fn same_minimum_gives_its_value() {
        // the roll about e₁ is flat, so a rolled copy of the minimum is
        // another minimum joined by a zero-barrier path
        let a = Configuration::new(2.0, Rotation::identity(), Rotation::identity()).unwrap();
        let roll = exp_map(&Generator::axis(0), 1.0);
        let b = Configuration::new(2.0, roll, Rotation::identity()).unwrap();
        let r = minmax_optimize(&Bowl, &a, &b, 5, 0).unwrap();
        assert!(r.level.abs() < 1e-12, "{}", r.level);
        assert!(r.converged);
        assert!(r.sweep_levels.windows(2).all(|w| w[1] <= w[0]));
    }
}
