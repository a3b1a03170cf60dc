//! Piecewise-geodesic paths in `(0,∞) × SO(3)²` and their maximal energy.

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::density::Configuration;
use crate::energy::Landscape;
use crate::error::{Error, Result};
use crate::rotations::{random_rotation, Rotation};
use crate::scalar::Real;
use crate::seed::{stream_rng, Stream};

/// Consecutive rotations must be closer than `π − ANGLE_MARGIN`.
pub const ANGLE_MARGIN: f64 = 1e-6;
/// Default samples per segment when locating a path maximum.
pub const DEFAULT_SAMPLES: usize = 8;
/// Golden-section iterations used to refine a sampled maximum.
const GOLDEN_ITERATIONS: usize = 48;

/// Nodes `τ₀, …, τ_{N−1}` at parameters `i/(N−1)`, joined by geodesics in
/// each rotation factor and linearly in `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOnConfigSpace<T> {
    nodes: Vec<Configuration<T>>,
}

impl<T: Real> Serialize for PathOnConfigSpace<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PathOnConfigSpace", 2)?;
        st.serialize_field("interpolation", "geodesic")?;
        st.serialize_field("nodes", &self.nodes)?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct RawPath<T> {
    #[serde(default)]
    interpolation: Option<String>,
    nodes: Vec<Configuration<T>>,
}

impl<'de, T: Real> Deserialize<'de> for PathOnConfigSpace<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawPath::<T>::deserialize(d)?;
        if let Some(kind) = raw.interpolation.as_deref() {
            if kind != "geodesic" {
                return Err(serde::de::Error::custom(format!("unknown interpolation {kind:?}")));
            }
        }
        PathOnConfigSpace::new(raw.nodes).map_err(serde::de::Error::custom)
    }
}

fn segment_ok<T: Real>(a: &Configuration<T>, b: &Configuration<T>) -> bool {
    let limit = T::PI() - T::lit(ANGLE_MARGIN);
    a.u().angle_to(b.u()) < limit && a.v().angle_to(b.v()) < limit
}

/// Interpolated configuration at fraction `s` of the segment `a → b`.
pub fn interpolate<T: Real>(a: &Configuration<T>, b: &Configuration<T>, s: T) -> Configuration<T> {
    Configuration::new_unchecked(
        a.l() + (b.l() - a.l()) * s,
        a.u().geodesic(b.u(), s),
        a.v().geodesic(b.v(), s),
    )
}

/// Segment length in the product metric `√(ΔL² + θ_U² + θ_V²)`.
pub fn segment_length<T: Real>(a: &Configuration<T>, b: &Configuration<T>) -> T {
    let dl = b.l() - a.l();
    let tu = a.u().angle_to(b.u());
    let tv = a.v().angle_to(b.v());
    (dl * dl + tu * tu + tv * tv).sqrt()
}

impl<T: Real> PathOnConfigSpace<T> {
    pub fn new(nodes: Vec<Configuration<T>>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Validation(format!("a path needs at least 2 nodes, got {}", nodes.len())));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !segment_ok(&w[0], &w[1]) {
                return Err(Error::Validation(format!(
                    "nodes {i} and {} are separated by a rotation angle of π or more",
                    i + 1
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// Geodesic path with `n_nodes` equally spaced nodes. When a relative
    /// rotation angle between the endpoints is too close to `π` for the
    /// logarithm to be well defined, the path is routed through a seeded
    /// random intermediate configuration.
    pub fn geodesic(tau0: &Configuration<T>, tau1: &Configuration<T>, n_nodes: usize, seed: u64) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::Domain("a path needs at least 2 nodes".into()));
        }
        let safe = T::PI() - T::lit(0.1);
        let direct = tau0.u().angle_to(tau1.u()) < safe && tau0.v().angle_to(tau1.v()) < safe;
        if direct {
            let last = T::from_usize_lossy(n_nodes - 1);
            let mut nodes: Vec<_> = (0..n_nodes)
                .map(|i| interpolate(tau0, tau1, T::from_usize_lossy(i) / last))
                .collect();
            nodes[0] = *tau0;
            nodes[n_nodes - 1] = *tau1;
            return Self::new(nodes);
        }
        let mut rng = stream_rng(seed, Stream::Midpoint);
        let u = pick_midpoint(tau0.u(), tau1.u(), safe, &mut rng);
        let v = pick_midpoint(tau0.v(), tau1.v(), safe, &mut rng);
        let mid = Configuration::new_unchecked((tau0.l() + tau1.l()) / T::lit(2.0), u, v);
        let first = n_nodes / 2 + 1;
        let second = n_nodes + 1 - first;
        let a = Self::geodesic(tau0, &mid, first.max(2), seed)?;
        let b = Self::geodesic(&mid, tau1, second.max(2), seed)?;
        let mut nodes = a.nodes;
        nodes.extend(b.nodes.into_iter().skip(1));
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[Configuration<T>] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<Configuration<T>> {
        self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> &Configuration<T> {
        &self.nodes[0]
    }

    pub fn end(&self) -> &Configuration<T> {
        &self.nodes[self.nodes.len() - 1]
    }

    /// Configuration at parameter `t ∈ [0, 1]`.
    pub fn point(&self, t: T) -> Configuration<T> {
        let (k, s) = self.locate(t);
        interpolate(&self.nodes[k], &self.nodes[k + 1], s)
    }

    /// Segment index and local parameter of `t`.
    pub fn locate(&self, t: T) -> (usize, T) {
        let segs = self.segments();
        let x = t.max(T::zero()).min(T::one()) * T::from_usize_lossy(segs);
        let k = (x.floor().to_usize().unwrap_or(0)).min(segs - 1);
        (k, x - T::from_usize_lossy(k))
    }

    /// Global parameter of local position `s` in segment `k`.
    pub fn parameter(&self, k: usize, s: T) -> T {
        (T::from_usize_lossy(k) + s) / T::from_usize_lossy(self.segments())
    }

    /// Largest separation along the path (attained at a node since `L` is
    /// linear on segments).
    pub fn max_l(&self) -> T {
        self.nodes.iter().map(|n| n.l()).fold(T::neg_infinity(), |a, b| a.max(b))
    }

    pub fn length(&self) -> T {
        self.nodes.windows(2).map(|w| segment_length(&w[0], &w[1])).fold(T::zero(), |a, b| a + b)
    }

    /// Path with an extra node at parameter `t`; the traced curve is the
    /// same.
    pub fn with_node_inserted(&self, t: T) -> Self {
        let (k, s) = self.locate(t);
        let mut nodes = self.nodes.clone();
        nodes.insert(k + 1, interpolate(&self.nodes[k], &self.nodes[k + 1], s));
        Self { nodes }
    }

    /// Resamples to `n` nodes equally spaced in arclength.
    pub fn reparametrized(&self, n: usize) -> Result<Self> {
        let n = n.max(2);
        let lens: Vec<T> = self.nodes.windows(2).map(|w| segment_length(&w[0], &w[1])).collect();
        let total = lens.iter().fold(T::zero(), |a, b| a + *b);
        if !(total > T::zero()) {
            return Ok(self.clone());
        }
        let mut nodes = Vec::with_capacity(n);
        nodes.push(self.nodes[0]);
        let mut k = 0;
        let mut before = T::zero();
        for i in 1..n - 1 {
            let target = total * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
            while k + 1 < lens.len() && before + lens[k] < target {
                before = before + lens[k];
                k += 1;
            }
            let s = if lens[k] > T::zero() {
                ((target - before) / lens[k]).max(T::zero()).min(T::one())
            } else {
                T::zero()
            };
            nodes.push(interpolate(&self.nodes[k], &self.nodes[k + 1], s));
        }
        nodes.push(*self.end());
        Self::new(nodes)
    }
}

fn pick_midpoint<T: Real, R: Rng + ?Sized>(a: &Rotation<T>, b: &Rotation<T>, safe: T, rng: &mut R) -> Rotation<T> {
    if a.angle_to(b) < safe {
        return a.geodesic(b, T::lit(0.5));
    }
    loop {
        let m: Rotation<T> = random_rotation(rng);
        if a.angle_to(&m) < safe && m.angle_to(b) < safe {
            return m;
        }
    }
}

/// Maximum of one segment: dense sampling, then golden-section refinement
/// in the bracket around the best sample. Returns `(value, local s)`.
pub(crate) fn segment_max<T: Real, S: Landscape<T> + ?Sized>(
    surface: &S,
    a: &Configuration<T>,
    b: &Configuration<T>,
    samples: usize,
) -> Result<(T, T)> {
    let samples = samples.max(1);
    let eval = |s: T| -> Result<T> {
        let c = interpolate(a, b, s);
        if c.l() < surface.l_min() {
            return Err(Error::Domain(format!(
                "path reaches L = {} below the surface minimum {}",
                c.l(),
                surface.l_min()
            )));
        }
        surface.energy(&c)
    };
    let n = T::from_usize_lossy(samples);
    let mut best = (eval(T::zero())?, T::zero());
    let mut best_j = 0;
    for j in 1..=samples {
        let s = T::from_usize_lossy(j) / n;
        let e = eval(s)?;
        if e > best.0 {
            best = (e, s);
            best_j = j;
        }
    }
    let lo = T::from_usize_lossy(best_j.saturating_sub(1)) / n;
    let hi = T::from_usize_lossy((best_j + 1).min(samples)) / n;
    let (mut x0, mut x3) = (lo, hi);
    let r = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = x3 - r * (x3 - x0);
    let mut x2 = x0 + r * (x3 - x0);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 >= f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - r * (x3 - x0);
            f1 = eval(x1)?;
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + r * (x3 - x0);
            f2 = eval(x2)?;
        }
    }
    for (f, x) in [(f1, x1), (f2, x2)] {
        if f > best.0 {
            best = (f, x);
        }
    }
    Ok(best)
}

/// Per-segment maxima `(value, local s)`.
pub(crate) fn segment_maxima<T: Real, S: Landscape<T> + ?Sized>(
    surface: &S,
    path: &PathOnConfigSpace<T>,
    samples: usize,
) -> Result<Vec<(T, T)>> {
    use rayon::prelude::*;
    path.nodes
        .par_windows(2)
        .map(|w| segment_max(surface, &w[0], &w[1], samples))
        .collect()
}

/// First maximum over segment maxima as `(level, global t)`.
pub(crate) fn reduce_maxima<T: Real>(path: &PathOnConfigSpace<T>, maxima: &[(T, T)]) -> (T, T) {
    let mut best = (maxima[0].0, path.parameter(0, maxima[0].1));
    for (k, (v, s)) in maxima.iter().enumerate().skip(1) {
        if *v > best.0 {
            best = (*v, path.parameter(k, *s));
        }
    }
    best
}

/// Maximum of the surface along the path and the first parameter where it
/// is attained. Every segment is sampled at `samples_per_segment + 1`
/// points and the best sample refined by golden section.
pub fn path_max<T: Real, S: Landscape<T> + ?Sized>(
    surface: &S,
    path: &PathOnConfigSpace<T>,
    samples_per_segment: usize,
) -> Result<(T, T)> {
    let maxima = segment_maxima(surface, path, samples_per_segment)?;
    Ok(reduce_maxima(path, &maxima))
}
