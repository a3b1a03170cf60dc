//! Replaces the large-separation part of a path by a route at fixed
//! `L_cut` through the attractive region of the leading multipolar term.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use super::path::{interpolate, path_max, PathOnConfigSpace, DEFAULT_SAMPLES};
use super::pseudomin::{descend_to_pseudo_minimum, Descent};
use super::sublevel::{components, connection_radius, within};
use crate::density::Configuration;
use crate::energy::{EnergySurface, Landscape};
use crate::error::{Error, Result};
use crate::multipole::{coulomb_derivatives, interaction_prefactor, multipole_moment, MultipolarInteraction};
use crate::rotations::{sample_so3_pairs, Rotation};
use crate::scalar::Real;

/// Slack on the energy bound of the spliced path.
pub const BOUND_TOL: f64 = 1e-9;
/// Checkpoints per graph edge.
pub const EDGE_CHECKS: usize = 16;
/// Times the working δ is halved before a splice failure is reported.
pub const DELTA_HALVINGS: usize = 4;

#[derive(Debug, Clone)]
pub struct BoundedOptions {
    /// Haar samples for the sublevel graph.
    pub grid_n: usize,
    pub samples_per_segment: usize,
}

impl Default for BoundedOptions {
    fn default() -> Self {
        Self { grid_n: 3000, samples_per_segment: DEFAULT_SAMPLES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpliceMode {
    /// The input never exceeds `L_cut`.
    Unchanged,
    /// Rebuilt through `{F^(n₁,n₂) < −δ}` at `L_cut`.
    Spliced,
    /// No multipolar term competes with the van der Waals term; the
    /// crossing points are joined by a plain geodesic at `L_cut`.
    VdwDominated,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct BoundedPathReport<T: Real> {
    pub path: PathOnConfigSpace<T>,
    pub mode: SpliceMode,
    #[serde(rename = "L_cut")]
    pub l_cut: T,
    pub input_max: T,
    pub output_max: T,
    #[serde(rename = "input_max_L")]
    pub input_max_l: T,
    #[serde(rename = "output_max_L")]
    pub output_max_l: T,
    pub e_infinity: T,
    pub t0: Option<T>,
    pub t1: Option<T>,
    /// Working δ of the sublevel set, when one was used.
    pub delta: Option<T>,
    /// `F^(n₁,n₂)` at the two descent endpoints.
    pub pseudo_min_values: Option<(T, T)>,
    /// `max L ≤ L_cut` and `output_max ≤ max(E_∞, input_max) + 1e-9`.
    pub bound_holds: bool,
}

fn frobenius<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, b| a + *b * *b).sqrt()
}

/// Leading orders `(n₁, n₂)` of the surface, or `None` when the van der
/// Waals term dominates (`n₁ + n₂ ≥ 6` or a density has no low moment).
fn leading<T: Real>(surface: &EnergySurface<T>) -> Result<Option<(usize, usize)>> {
    match surface.leading_orders()? {
        (Some(a), Some(b)) if a + b <= 4 => Ok(Some((a, b))),
        (Some(a), Some(b)) if a + b == 5 => Err(Error::Hypothesis(format!(
            "leading orders ({a},{b}) put the multipolar term at the van der Waals power L⁻⁶"
        ))),
        _ => Ok(None),
    }
}

/// Smallest `L ≥ L_min` at which a leading term with `F^(n₁,n₂) ≤ −δ`
/// outweighs twice a Cauchy–Schwarz bound on all higher multipolar terms
/// of the surface.
pub fn select_l_cut<T: Real>(surface: &EnergySurface<T>, delta: T) -> Result<T> {
    if !(delta > T::zero()) {
        return Err(Error::Domain(format!("δ must be positive, got {delta}")));
    }
    let Some((n1, n2)) = leading(surface)? else {
        return Ok(surface.l_min());
    };
    let k = n1 + n2;
    let mut bound = T::zero();
    for &(n, m) in surface.orders() {
        if n + m <= k {
            continue;
        }
        let a = multipole_moment(surface.rho1(), n)?;
        let b = multipole_moment(surface.rho2(), m)?;
        let d = coulomb_derivatives::<T>(n + m)?;
        bound = bound
            + interaction_prefactor::<T>(n, m).abs() * frobenius(a.dense()) * frobenius(b.dense()) * frobenius(d.dense());
    }
    Ok((T::lit(2.0) * bound / delta).max(surface.l_min()).max(T::one()))
}

/// First and last crossings of `L = L_cut` as `(segment, local s)`.
fn crossings<T: Real>(path: &PathOnConfigSpace<T>, l_cut: T) -> ((usize, T), (usize, T)) {
    let nodes = path.nodes();
    let k0 = (0..nodes.len() - 1).find(|&k| nodes[k + 1].l() > l_cut).expect("path exceeds L_cut");
    let k1 = (0..nodes.len() - 1).rev().find(|&k| nodes[k].l() > l_cut).expect("path exceeds L_cut");
    let s = |a: T, b: T| ((l_cut - a) / (b - a)).max(T::zero()).min(T::one());
    ((k0, s(nodes[k0].l(), nodes[k0 + 1].l())), (k1, s(nodes[k1].l(), nodes[k1 + 1].l())))
}

#[derive(Clone, Copy)]
struct Open {
    f: f64,
    idx: usize,
}

impl PartialEq for Open {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Open {
    // min-heap on (f, idx)
    fn cmp(&self, o: &Self) -> Ordering {
        o.f.total_cmp(&self.f).then_with(|| o.idx.cmp(&self.idx))
    }
}

fn product_distance<T: Real>(a: &(Rotation<T>, Rotation<T>), b: &(Rotation<T>, Rotation<T>)) -> f64 {
    let (x, y) = (a.0.angle_to(&b.0).to_f64_lossy(), a.1.angle_to(&b.1).to_f64_lossy());
    (x * x + y * y).sqrt()
}

struct SublevelRoute<'a, T: Real> {
    surface: &'a EnergySurface<T>,
    f: MultipolarInteraction<T>,
    l_cut: T,
    delta: T,
    cos_bound: T,
}

impl<T: Real> SublevelRoute<'_, T> {
    fn edge_ok(&self, a: &(Rotation<T>, Rotation<T>), b: &(Rotation<T>, Rotation<T>)) -> bool {
        if !within(a, b, self.cos_bound) {
            return false;
        }
        let e_inf = self.surface.e_infinity();
        (1..=EDGE_CHECKS).all(|j| {
            let s = T::from_usize_lossy(j) / T::from_usize_lossy(EDGE_CHECKS + 1);
            let (u, v) = (a.0.geodesic(&b.0, s), a.1.geodesic(&b.1, s));
            self.f.evaluate(&u, &v) < -self.delta
                && self.surface.energy_at(self.l_cut, &u, &v).map(|e| e <= e_inf).unwrap_or(false)
        })
    }

    /// Lazy A* from node 0 to node 1; edges are validated when first
    /// relaxed.
    fn search(&self, nodes: &[(Rotation<T>, Rotation<T>)]) -> Option<Vec<usize>> {
        let n = nodes.len();
        let h: Vec<f64> = nodes.iter().map(|x| product_distance(x, &nodes[1])).collect();
        let mut g = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut closed = vec![false; n];
        let mut checked: HashMap<(usize, usize), bool> = HashMap::new();
        let mut open = BinaryHeap::new();
        g[0] = 0.0;
        open.push(Open { f: h[0], idx: 0 });
        while let Some(Open { idx: x, .. }) = open.pop() {
            if closed[x] {
                continue;
            }
            if x == 1 {
                let mut route = vec![1];
                let mut c = 1;
                while c != 0 {
                    c = prev[c];
                    route.push(c);
                }
                route.reverse();
                return Some(route);
            }
            closed[x] = true;
            for y in 0..n {
                if closed[y] || y == x {
                    continue;
                }
                let cand = g[x] + product_distance(&nodes[x], &nodes[y]);
                if cand >= g[y] {
                    continue;
                }
                let key = (x.min(y), x.max(y));
                let ok = *checked.entry(key).or_insert_with(|| self.edge_ok(&nodes[x], &nodes[y]));
                if ok {
                    g[y] = cand;
                    prev[y] = x;
                    open.push(Open { f: cand + h[y], idx: y });
                }
            }
        }
        None
    }

    /// Drops intermediate nodes wherever a direct edge is admissible.
    fn shortcut(&self, route: Vec<(Rotation<T>, Rotation<T>)>) -> Vec<(Rotation<T>, Rotation<T>)> {
        let mut out = vec![route[0]];
        let mut i = 0;
        while i + 1 < route.len() {
            let mut j = route.len() - 1;
            while j > i + 1 && !self.edge_ok(&route[i], &route[j]) {
                j -= 1;
            }
            out.push(route[j]);
            i = j;
        }
        out
    }
}

/// Bounded replacement of a path that leaves `L ≤ L_cut`.
///
/// The path is cut at its first and last crossings of `L_cut`; from each
/// crossing a monotone descent of the surface at fixed `L_cut` reaches a
/// pseudo-minimum; the two pseudo-minima are joined through the sampled
/// sublevel set `{F^(n₁,n₂) < −δ}` with `δ` half the smaller of the two
/// endpoint magnitudes (halved again, up to four times, if the endpoints
/// fall into different sampled components).
pub fn bounded_minmax_path<T: Real>(
    surface: &EnergySurface<T>,
    path: &PathOnConfigSpace<T>,
    l_cut: T,
    seed: u64,
) -> Result<BoundedPathReport<T>> {
    bounded_minmax_path_with(surface, path, l_cut, seed, &BoundedOptions::default())
}

pub fn bounded_minmax_path_with<T: Real>(
    surface: &EnergySurface<T>,
    path: &PathOnConfigSpace<T>,
    l_cut: T,
    seed: u64,
    opts: &BoundedOptions,
) -> Result<BoundedPathReport<T>> {
    if l_cut < surface.l_min() {
        return Err(Error::Domain(format!(
            "L_cut = {l_cut} is below the surface minimum {}",
            surface.l_min()
        )));
    }
    if path.start().l() >= l_cut || path.end().l() >= l_cut {
        return Err(Error::Precondition(format!(
            "path endpoints must lie below L_cut = {l_cut} (have {} and {})",
            path.start().l(),
            path.end().l()
        )));
    }
    let samples = opts.samples_per_segment;
    let (input_max, _) = path_max(surface, path, samples)?;
    let input_max_l = path.max_l();
    let e_inf = surface.e_infinity();
    let finish = |out: PathOnConfigSpace<T>, mode, t0, t1, delta, pm| -> Result<BoundedPathReport<T>> {
        let (output_max, _) = path_max(surface, &out, samples)?;
        let output_max_l = out.max_l();
        let bound_holds =
            output_max <= e_inf.max(input_max) + T::lit(BOUND_TOL) && output_max_l <= l_cut;
        Ok(BoundedPathReport {
            path: out,
            mode,
            l_cut,
            input_max,
            output_max,
            input_max_l,
            output_max_l,
            e_infinity: e_inf,
            t0,
            t1,
            delta,
            pseudo_min_values: pm,
            bound_holds,
        })
    };
    if input_max_l <= l_cut {
        return finish(path.clone(), SpliceMode::Unchanged, None, None, None, None);
    }

    let nodes = path.nodes();
    let ((k0, s0), (k1, s1)) = crossings(path, l_cut);
    let at_cut = |k: usize, s: T| {
        let c = interpolate(&nodes[k], &nodes[k + 1], s);
        Configuration::new_unchecked(l_cut, *c.u(), *c.v())
    };
    let (c0, c1) = (at_cut(k0, s0), at_cut(k1, s1));
    let t0 = path.parameter(k0, s0);
    let t1 = path.parameter(k1, s1);
    let mut out: Vec<Configuration<T>> = nodes[..=k0].to_vec();
    out.push(c0);

    let Some((n1, n2)) = leading(surface)? else {
        let bridge = PathOnConfigSpace::geodesic(&c0, &c1, 3, seed)?;
        out.extend(bridge.nodes()[1..].iter().copied());
        out.extend(nodes[k1 + 1..].iter().copied());
        return finish(PathOnConfigSpace::new(out)?, SpliceMode::VdwDominated, Some(t0), Some(t1), None, None);
    };

    surface.energy(&c0)?;
    let e_at_cut = |u: &Rotation<T>, v: &Rotation<T>| surface.energy_at(l_cut, u, v).unwrap_or(T::nan());
    let d0: Descent<T> = descend_to_pseudo_minimum(&e_at_cut, c0.u(), c0.v(), seed);
    let d1: Descent<T> = descend_to_pseudo_minimum(&e_at_cut, c1.u(), c1.v(), seed);
    let f = MultipolarInteraction::new(n1, n2, surface.rho1(), surface.rho2())?;
    let (f0, f1) = (f.evaluate(&d0.u, &d0.v), f.evaluate(&d1.u, &d1.v));
    if !(f0 < T::zero() && f1 < T::zero()) {
        return Err(Error::Hypothesis(format!(
            "descent at L_cut = {l_cut} ended where F^({n1},{n2}) is not negative ({f0}, {f1}); L_cut is too small"
        )));
    }
    let start = (d0.u, d0.v);
    let goal = (d1.u, d1.v);
    let samples_so3 = sample_so3_pairs::<T>(opts.grid_n, seed)?;
    let radius = connection_radius(opts.grid_n);
    let mut delta = f0.abs().min(f1.abs()) / T::lit(2.0);
    let mut connection = None;
    for _ in 0..=DELTA_HALVINGS {
        let route = SublevelRoute {
            surface,
            f: f.clone(),
            l_cut,
            delta,
            cos_bound: T::lit(1.0 + 2.0 * radius.cos()),
        };
        let mut graph = vec![start, goal];
        graph.extend(samples_so3.iter().copied().filter(|(u, v)| f.evaluate(u, v) < -delta));
        if let Some(idx) = route.search(&graph) {
            let pts: Vec<_> = idx.into_iter().map(|i| graph[i]).collect();
            connection = Some(route.shortcut(pts));
            break;
        }
        delta = delta / T::lit(2.0);
    }
    let Some(connection) = connection else {
        let delta0 = f0.abs().min(f1.abs()) / T::lit(2.0);
        let mut graph = vec![start, goal];
        graph.extend(samples_so3.iter().copied().filter(|(u, v)| f.evaluate(u, v) < -delta0));
        let labels = components(&graph, radius);
        return Err(Error::Hypothesis(format!(
            "splice failure: the pseudo-minima lie in sublevel components {} and {} at δ = {delta0}",
            labels[0], labels[1]
        )));
    };
    let at = |(u, v): (Rotation<T>, Rotation<T>)| Configuration::new_unchecked(l_cut, u, v);
    out.extend(d0.points.iter().copied().map(at));
    out.extend(connection[1..].iter().copied().map(at));
    out.extend(d1.points.iter().rev().skip(1).copied().map(at));
    if !d1.points.is_empty() {
        out.push(c1);
    }
    out.extend(nodes[k1 + 1..].iter().copied());
    finish(
        PathOnConfigSpace::new(out)?,
        SpliceMode::Spliced,
        Some(t0),
        Some(t1),
        Some(delta),
        Some((f0, f1)),
    )
}
