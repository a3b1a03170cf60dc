use std::f64::consts::PI;

use dispersia::energy::VdwTerm;
use dispersia::pathopt::fixtures::{linear_quadrupole, unit_dipole, TwoParameterToy};
use dispersia::pathopt::*;
use dispersia::rotations::{exp_map, random_rotation};
use dispersia::{Configuration, EnergySurface, Generator, PathOnConfigSpace, Rotation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a] = b;
        }
    }
}

/// Lowest level at which cells containing `a` and `b` become connected on
/// a periodic-in-θ grid over `[−π, π) × [l0, l1]`.
fn grid_minmax(f: impl Fn(f64, f64) -> f64, n: usize, l0: f64, l1: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let theta = |i: usize| -PI + 2.0 * PI * i as f64 / n as f64;
    let ell = |j: usize| l0 + (l1 - l0) * j as f64 / (n - 1) as f64;
    let idx = |i: usize, j: usize| i * n + j;
    let nearest = |p: (f64, f64)| {
        let i = (((p.0 + PI) / (2.0 * PI) * n as f64).round() as usize) % n;
        let j = ((p.1 - l0) / (l1 - l0) * (n - 1) as f64).round() as usize;
        idx(i, j)
    };
    let values: Vec<f64> = (0..n * n).map(|k| f(theta(k / n), ell(k % n))).collect();
    let mut order: Vec<usize> = (0..n * n).collect();
    order.sort_by(|x, y| values[*x].total_cmp(&values[*y]));
    let mut active = vec![false; n * n];
    let mut uf = UnionFind::new(n * n);
    let (sa, sb) = (nearest(a), nearest(b));
    for k in order {
        active[k] = true;
        let (i, j) = (k / n, k % n);
        let mut nb = vec![idx((i + 1) % n, j), idx((i + n - 1) % n, j)];
        if j > 0 {
            nb.push(idx(i, j - 1));
        }
        if j + 1 < n {
            nb.push(idx(i, j + 1));
        }
        for m in nb {
            if active[m] {
                uf.union(k, m);
            }
        }
        if active[sa] && active[sb] && uf.find(sa) == uf.find(sb) {
            return values[k];
        }
    }
    f64::INFINITY
}

#[test]
fn toy_minmax_matches_grid_oracle() {
    let oracle = grid_minmax(TwoParameterToy::reduced, 200, 0.5, 4.0, (0.0, 2.0), (2.0 * PI / 3.0, 2.0));
    assert!((oracle - TwoParameterToy::SADDLE_LEVEL).abs() < 1e-3, "{oracle}");
    let a = Configuration::new(2.0, Rotation::identity(), Rotation::identity()).unwrap();
    let rz = exp_map(&Generator::axis(2), 2.0 * PI / 3.0);
    let b = Configuration::new(2.0, rz, Rotation::identity()).unwrap();
    let r = minmax_optimize(&TwoParameterToy, &a, &b, 16, 3).unwrap();
    assert!((r.level - oracle).abs() <= 1e-3, "{} vs {oracle}", r.level);
}

#[test]
fn descent_reaches_cosine_minimum() {
    let e1 = [1.0, 0.0, 0.0];
    let f = |u: &Rotation, _v: &Rotation| u.apply(&e1)[0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..5 {
        let u0: Rotation = random_rotation(&mut rng);
        let d = descend_to_pseudo_minimum(&f, &u0, &Rotation::identity(), seed);
        assert!((d.value + 1.0).abs() < 1e-3, "{}", d.value);
        assert!(d.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn criterion_accepts_minimum_and_rejects_repulsive_pair() {
    let d = unit_dipole::<f64>();
    let s = EnergySurface::new(d.clone(), d, 0.0, VdwTerm::Constant(0.0)).unwrap();
    let f = |u: &Rotation, v: &Rotation| s.interaction(1, 1, u, v).unwrap();
    // dipoles along the separation axis
    let along = exp_map(&Generator::axis(1), PI / 2.0);
    let against = exp_map(&Generator::axis(1), -PI / 2.0);
    let attractive = pseudo_min_criterion(&f, &along, &along, 1e-3).unwrap();
    assert!(attractive.passed, "{attractive:?}");
    assert!((attractive.f_value + 2.0).abs() < 1e-12);
    let repulsive = pseudo_min_criterion(&f, &along, &against, 1e-3).unwrap();
    assert!(!repulsive.passed);
    assert!((repulsive.f_value - 2.0).abs() < 1e-12);
}

#[test]
fn negativity_for_low_orders() {
    let d = unit_dipole::<f64>();
    let q = linear_quadrupole::<f64>();
    for (n, m, a, b) in [(1, 1, &d, &d), (1, 2, &d, &q), (2, 2, &q, &q)] {
        let r = negativity_at_pseudomin(a, b, n, m, 0.1, 50, 7).unwrap();
        assert!(r.passed, "({n},{m}) max {}", r.max_value);
        assert_eq!(r.endpoint_values.len(), 50);
    }
}

#[test]
fn sublevel_components() {
    let d = unit_dipole::<f64>();
    let q = linear_quadrupole::<f64>();
    let one = sublevel_connectivity(&d, &d, 1, 1, 0.1, 5000, 11).unwrap();
    assert_eq!(one.components, 1);
    assert!(one.passed);
    // near the bottom the set splits into the two aligned wells
    let split = sublevel_connectivity(&d, &d, 1, 1, 1.5, 5000, 11).unwrap();
    assert!(split.components > 1, "{split:?}");
    let empty = sublevel_connectivity(&d, &d, 1, 1, 3.0, 2000, 11).unwrap();
    assert!(empty.empty);
    let quad = sublevel_connectivity(&q, &q, 2, 2, 0.05, 5000, 11).unwrap();
    assert_eq!(quad.components, 1);
}

fn dipole_surface() -> EnergySurface {
    let d = unit_dipole::<f64>();
    EnergySurface::new(d.clone(), d, 0.0, VdwTerm::Constant(0.75)).unwrap()
}

#[test]
fn bounded_path_removes_excursion() {
    let s = dipole_surface();
    let ry = exp_map(&Generator::axis(1), PI / 2.0);
    // both ends have the dipoles aligned along the separation axis
    let rz = exp_map(&Generator::axis(2), PI);
    let a = Configuration::new(4.0, ry, ry).unwrap();
    let b = Configuration::new(4.0, rz.compose(&ry), rz.compose(&ry)).unwrap();
    let l_cut = select_l_cut(&s, 0.1).unwrap();
    let mut nodes = PathOnConfigSpace::geodesic(&a, &b, 9, 0).unwrap().into_nodes();
    nodes[4] = nodes[4].with_l(10.0 * l_cut).unwrap();
    let path = PathOnConfigSpace::new(nodes).unwrap();
    let rep = bounded_minmax_path(&s, &path, l_cut, 5).unwrap();
    assert_eq!(rep.mode, SpliceMode::Spliced);
    assert!(rep.bound_holds);
    let max_l = rep.path.nodes().iter().map(|c| c.l()).fold(f64::MIN, f64::max);
    assert!(max_l <= l_cut + 1e-12, "{max_l} vs {l_cut}");
    assert!(rep.output_max <= rep.e_infinity.max(rep.input_max) + BOUND_TOL);
}

#[test]
fn bounded_path_leaves_short_paths_alone() {
    let s = dipole_surface();
    let ry = exp_map(&Generator::axis(1), PI / 2.0);
    let a = Configuration::new(4.0, ry, ry).unwrap();
    let b = Configuration::new(5.0, ry, ry).unwrap();
    let path = PathOnConfigSpace::geodesic(&a, &b, 3, 0).unwrap();
    let rep = bounded_minmax_path(&s, &path, 100.0, 5).unwrap();
    assert_eq!(rep.mode, SpliceMode::Unchanged);
    assert_eq!(rep.path.nodes().len(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn path_max_survives_node_insertion(seed in any::<u64>(), s in 0.05f64..0.95) {
        let surface = dipole_surface();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = |rng: &mut ChaCha8Rng| {
            Configuration::new(rng.random_range(5.0..8.0), random_rotation(rng), random_rotation(rng)).unwrap()
        };
        let (a, b) = (cfg(&mut rng), cfg(&mut rng));
        let nodes = PathOnConfigSpace::geodesic(&a, &b, 2, seed).unwrap().into_nodes();
        let path = PathOnConfigSpace::new(nodes[..2].to_vec()).unwrap();
        let mid = interpolate(&nodes[0], &nodes[1], s);
        let refined = PathOnConfigSpace::new(vec![nodes[0], mid, nodes[1]]).unwrap();
        let (m0, _) = path_max(&surface, &path, 64).unwrap();
        let (m1, _) = path_max(&surface, &refined, 64).unwrap();
        prop_assert!((m0 - m1).abs() <= 1e-6 * (1.0 + m0.abs()), "{m0} vs {m1}");
    }
}
