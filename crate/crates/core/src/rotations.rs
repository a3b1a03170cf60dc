//! SO(3) geometry: rotation matrices, the bounded generator set, geodesic
//! derivatives of functions on SO(3)², and Haar sampling.
//!
//! Rotations are stored as 3×3 matrices. A generator is an antisymmetric
//! matrix with entries bounded by one in absolute value; the pair
//! `(A, B)` acts on a configuration `(U, V)` as `(e^{tA} U, e^{tB} V)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Vec3<T> = [T; 3];
pub type Mat3<T> = [[T; 3]; 3];

pub(crate) fn mat_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut c = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

pub(crate) fn transpose<T: Real>(a: &Mat3<T>) -> Mat3<T> {
    let mut t = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub(crate) fn mat_vec<T: Real>(a: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

fn det<T: Real>(a: &Mat3<T>) -> T {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn identity<T: Real>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

/// Antisymmetric matrix `[w]_×` with `[w]_× x = w × x`.
pub(crate) fn hat<T: Real>(w: &Vec3<T>) -> Mat3<T> {
    let z = T::zero();
    [[z, -w[2], w[1]], [w[2], z, -w[0]], [-w[1], w[0], z]]
}

pub(crate) fn norm3<T: Real>(v: &Vec3<T>) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation<T> {
    m: Mat3<T>,
}

impl<T: Real> Rotation<T> {
    pub fn identity() -> Self {
        Self { m: identity() }
    }

    /// Validating constructor.
    pub fn from_matrix(m: Mat3<T>) -> Result<Self> {
        let r = Self { m };
        r.check()?;
        Ok(r)
    }

    pub fn from_row_major(v: &[T]) -> Result<Self> {
        if v.len() != 9 {
            return Err(Error::Validation(format!(
                "rotation needs 9 row-major entries, got {}",
                v.len()
            )));
        }
        Self::from_matrix([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    /// Entrywise conversion to another scalar type.
    pub fn cast<S: Real>(&self) -> Rotation<S> {
        Rotation { m: self.m.map(|row| row.map(|x| S::lit(x.to_f64_lossy()))) }
    }

    /// Rotation of a unit quaternion `(w, x, y, z)`; the input is normalized.
    pub fn from_quaternion(q: [T; 4]) -> Result<Self> {
        let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::Validation("quaternion has zero or non-finite norm".into()));
        }
        let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
        let two = T::lit(2.0);
        let o = T::one();
        Ok(Self {
            m: [
                [o - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
                [two * (x * y + w * z), o - two * (x * x + z * z), two * (y * z - w * x)],
                [two * (x * z - w * y), two * (y * z + w * x), o - two * (x * x + y * y)],
            ],
        })
    }

    /// Rotation by `angle` about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Result<Self> {
        let n = norm3(&axis);
        if !(n > T::zero()) {
            return Err(Error::Validation("rotation axis has zero length".into()));
        }
        Ok(exp_vec(&[axis[0] / n * angle, axis[1] / n * angle, axis[2] / n * angle]))
    }

    /// Checks `‖RᵀR − I‖_max` and `det R` against the scalar's tolerance.
    pub fn check(&self) -> Result<()> {
        let tol = T::rotation_tolerance();
        if self.m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Validation("rotation has non-finite entries".into()));
        }
        let rtr = mat_mul(&transpose(&self.m), &self.m);
        let id: Mat3<T> = identity();
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((rtr[i][j] - id[i][j]).abs());
            }
        }
        if worst > tol {
            return Err(Error::Validation(format!(
                "matrix is not orthogonal: max |RᵀR - I| = {worst}"
            )));
        }
        let d = det(&self.m);
        if (d - T::one()).abs() > tol {
            return Err(Error::Validation(format!("determinant {d} is not 1")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &Mat3<T> {
        &self.m
    }

    pub fn row_major(&self) -> [T; 9] {
        let m = &self.m;
        [m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2]]
    }

    pub fn apply(&self, v: &Vec3<T>) -> Vec3<T> {
        mat_vec(&self.m, v)
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { m: mat_mul(&self.m, &other.m) }
    }

    pub fn inverse(&self) -> Self {
        Self { m: transpose(&self.m) }
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> T {
        let c = ((self.trace() - T::one()) / T::lit(2.0)).max(-T::one()).min(T::one());
        c.acos()
    }

    /// Angle of `other · selfᵀ`, the geodesic distance between the two.
    pub fn angle_to(&self, other: &Self) -> T {
        other.compose(&self.inverse()).angle()
    }

    /// Axis-angle vector `w` with `exp([w]_×) = self`, `|w| ≤ π`.
    pub fn log(&self) -> Vec3<T> {
        let m = &self.m;
        let theta = self.angle();
        let skew = [m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]];
        let half = T::lit(0.5);
        if theta < T::lit(1e-4) {
            // θ/(2 sin θ) ≈ 1/2 + θ²/12
            let f = half + theta * theta / T::lit(12.0);
            return [skew[0] * f, skew[1] * f, skew[2] * f];
        }
        if theta < T::PI() - T::lit(1e-3) {
            let f = theta / (T::lit(2.0) * theta.sin());
            return [skew[0] * f, skew[1] * f, skew[2] * f];
        }
        // Near π: (R + Rᵀ)/2 - cos θ I = (1 - cos θ) n nᵀ.
        let c = theta.cos();
        let b = |i: usize, j: usize| (m[i][j] + m[j][i]) * half - if i == j { c } else { T::zero() };
        let k = (0..3)
            .max_by(|&i, &j| b(i, i).partial_cmp(&b(j, j)).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        let mut n = [b(0, k), b(1, k), b(2, k)];
        let len = norm3(&n);
        for x in n.iter_mut() {
            *x = *x / len;
        }
        let s = n[0] * skew[0] + n[1] * skew[1] + n[2] * skew[2];
        let sign = if s < T::zero() { -T::one() } else { T::one() };
        [n[0] * theta * sign, n[1] * theta * sign, n[2] * theta * sign]
    }

    /// Point at fraction `s` of the geodesic from `self` to `other`:
    /// `exp(s · log(other selfᵀ)) · self`.
    pub fn geodesic(&self, other: &Self, s: T) -> Self {
        let w = other.compose(&self.inverse()).log();
        exp_vec(&[w[0] * s, w[1] * s, w[2] * s]).compose(self)
    }

    /// Gram–Schmidt re-orthonormalization, used after long products.
    pub fn renormalized(&self) -> Self {
        let r0 = self.m[0];
        let n0 = norm3(&r0);
        let a = [r0[0] / n0, r0[1] / n0, r0[2] / n0];
        let r1 = self.m[1];
        let d = a[0] * r1[0] + a[1] * r1[1] + a[2] * r1[2];
        let mut b = [r1[0] - d * a[0], r1[1] - d * a[1], r1[2] - d * a[2]];
        let n1 = norm3(&b);
        for x in b.iter_mut() {
            *x = *x / n1;
        }
        let c = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        Self { m: [a, b, c] }
    }
}

impl<T: Real> Serialize for Rotation<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.row_major().serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Rotation<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<T> = Vec::deserialize(d)?;
        Rotation::from_row_major(&v).map_err(D::Error::custom)
    }
}

/// Element of Γ: antisymmetric 3×3 matrix with all entries in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator<T> {
    w: Vec3<T>,
}

impl<T: Real> Generator<T> {
    pub fn zero() -> Self {
        Self { w: [T::zero(); 3] }
    }

    /// Generator `[w]_×`; every component must satisfy `|w_i| ≤ 1`.
    pub fn from_vector(w: Vec3<T>) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite() || x.abs() > T::one()) {
            return Err(Error::Validation(format!(
                "generator components must lie in [-1, 1], got {:?}",
                w
            )));
        }
        Ok(Self { w })
    }

    pub fn from_matrix(a: &Mat3<T>) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                if a[i][j] + a[j][i] != T::zero() {
                    return Err(Error::Validation("generator matrix is not antisymmetric".into()));
                }
            }
        }
        Self::from_vector([a[2][1], a[0][2], a[1][0]])
    }

    /// Generator of rotations about coordinate axis `axis` (0, 1 or 2).
    pub fn axis(axis: usize) -> Self {
        let mut w = [T::zero(); 3];
        w[axis] = T::one();
        Self { w }
    }

    pub fn vector(&self) -> Vec3<T> {
        self.w
    }

    pub fn matrix(&self) -> Mat3<T> {
        hat(&self.w)
    }

    pub fn is_zero(&self) -> bool {
        self.w.iter().all(|x| *x == T::zero())
    }
}

/// A direction `(A, B)` in the Lie algebra of SO(3)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorPair<T> {
    pub a: Generator<T>,
    pub b: Generator<T>,
}

impl<T: Real> GeneratorPair<T> {
    pub fn new(a: Generator<T>, b: Generator<T>) -> Self {
        Self { a, b }
    }

    /// `(e^{tA} U, e^{tB} V)`.
    pub fn flow(&self, u: &Rotation<T>, v: &Rotation<T>, t: T) -> (Rotation<T>, Rotation<T>) {
        (exp_map(&self.a, t).compose(u), exp_map(&self.b, t).compose(v))
    }

    pub fn negated(&self) -> Self {
        let n = |g: &Generator<T>| Generator { w: [-g.w[0], -g.w[1], -g.w[2]] };
        Self { a: n(&self.a), b: n(&self.b) }
    }
}

/// `exp([w]_×)` by Rodrigues' formula.
pub fn exp_vec<T: Real>(w: &Vec3<T>) -> Rotation<T> {
    let theta2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let theta = theta2.sqrt();
    let (a, b) = if theta < T::lit(1e-4) {
        (
            T::one() - theta2 / T::lit(6.0) + theta2 * theta2 / T::lit(120.0),
            T::lit(0.5) - theta2 / T::lit(24.0) + theta2 * theta2 / T::lit(720.0),
        )
    } else {
        (theta.sin() / theta, (T::one() - theta.cos()) / theta2)
    };
    let k = hat(w);
    let k2 = mat_mul(&k, &k);
    let mut m: Mat3<T> = identity();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = m[i][j] + a * k[i][j] + b * k2[i][j];
        }
    }
    Rotation { m }
}

/// `e^{tA}`.
pub fn exp_map<T: Real>(a: &Generator<T>, t: T) -> Rotation<T> {
    exp_vec(&[a.w[0] * t, a.w[1] * t, a.w[2] * t])
}

/// The six coordinate directions of so(3)²: `(A_x,0), (A_y,0), (A_z,0),
/// (0,A_x), (0,A_y), (0,A_z)`.
pub fn generator_basis<T: Real>() -> [GeneratorPair<T>; 6] {
    let z = Generator::zero();
    [
        GeneratorPair::new(Generator::axis(0), z),
        GeneratorPair::new(Generator::axis(1), z),
        GeneratorPair::new(Generator::axis(2), z),
        GeneratorPair::new(z, Generator::axis(0)),
        GeneratorPair::new(z, Generator::axis(1)),
        GeneratorPair::new(z, Generator::axis(2)),
    ]
}

/// Pairwise sums and differences of the basis directions (30 directions).
/// Second derivatives along these, together with the basis, determine the
/// full 6×6 second-order form.
pub fn combined_directions<T: Real>() -> Vec<GeneratorPair<T>> {
    let basis: Vec<[T; 6]> = (0..6)
        .map(|i| {
            let mut e = [T::zero(); 6];
            e[i] = T::one();
            e
        })
        .collect();
    let mut out = Vec::with_capacity(30);
    for i in 0..6 {
        for j in (i + 1)..6 {
            for sign in [T::one(), -T::one()] {
                let mut c = [T::zero(); 6];
                for k in 0..6 {
                    c[k] = basis[i][k] + sign * basis[j][k];
                }
                out.push(pair_from_components(&c));
            }
        }
    }
    out
}

pub(crate) fn pair_from_components<T: Real>(c: &[T; 6]) -> GeneratorPair<T> {
    GeneratorPair::new(Generator { w: [c[0], c[1], c[2]] }, Generator { w: [c[3], c[4], c[5]] })
}

/// `k` random directions with components uniform in `[-1, 1]`.
pub fn random_generator_pairs<T: Real, R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<GeneratorPair<T>> {
    (0..k)
        .map(|_| {
            let mut c = [T::zero(); 6];
            for x in c.iter_mut() {
                *x = T::lit(rng.random_range(-1.0..=1.0));
            }
            pair_from_components(&c)
        })
        .collect()
}

/// Haar-distributed rotation from a normalized Gaussian quaternion.
pub fn random_rotation<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Rotation<T> {
    loop {
        let q: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if let Ok(r) = Rotation::from_quaternion(q.map(T::lit)) {
            return r;
        }
    }
}

/// `n` Haar samples on SO(3)², deterministic in `seed`.
pub fn sample_so3_pairs<T: Real>(n: usize, seed: u64) -> Result<Vec<(Rotation<T>, Rotation<T>)>> {
    if n == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let mut rng = crate::seed::stream_rng(seed, crate::seed::Stream::Sampling);
    Ok((0..n)
        .map(|_| {
            let u = random_rotation(&mut rng);
            let v = random_rotation(&mut rng);
            (u, v)
        })
        .collect())
}

/// Finite-difference derivative with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivative<T> {
    pub value: T,
    pub error: T,
}

/// Step used by all geodesic finite differences.
pub const FD_STEP: f64 = 1e-3;

/// First and second derivatives of `t ↦ f(e^{tA}U, e^{tB}V)` at `t = 0`.
///
/// Central differences at `h`, `h/2`, `h/4` feed a two-level Richardson
/// table; the error estimate is the difference between the two levels.
pub fn geodesic_derivatives<T, F>(
    f: &F,
    u: &Rotation<T>,
    v: &Rotation<T>,
    dir: &GeneratorPair<T>,
) -> Result<(Derivative<T>, Derivative<T>)>
where
    T: Real,
    F: Fn(&Rotation<T>, &Rotation<T>) -> T + ?Sized,
{
    let eval = |t: T| -> Result<T> {
        let (uu, vv) = dir.flow(u, v, t);
        let y = f(&uu, &vv);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite(format!("function value {y} at t = {t}")))
        }
    };
    let g0 = eval(T::zero())?;
    let two = T::lit(2.0);
    let mut d1 = [T::zero(); 3];
    let mut d2 = [T::zero(); 3];
    let mut h = T::lit(FD_STEP);
    for k in 0..3 {
        let (gp, gm) = (eval(h)?, eval(-h)?);
        d1[k] = (gp - gm) / (two * h);
        d2[k] = (gp - two * g0 + gm) / (h * h);
        h = h / two;
    }
    let table = |d: [T; 3]| {
        let three = T::lit(3.0);
        let r0 = (T::lit(4.0) * d[1] - d[0]) / three;
        let r1 = (T::lit(4.0) * d[2] - d[1]) / three;
        let r2 = (T::lit(16.0) * r1 - r0) / T::lit(15.0);
        Derivative { value: r2, error: (r2 - r1).abs() }
    };
    Ok((table(d1), table(d2)))
}

/// `d^k/dt^k f(e^{tA}U, e^{tB}V)` at `t = 0` for `k ∈ {1, 2}`.
pub fn directional_derivatives<T, F>(
    f: &F,
    u: &Rotation<T>,
    v: &Rotation<T>,
    a: &Generator<T>,
    b: &Generator<T>,
    order: usize,
) -> Result<Derivative<T>>
where
    T: Real,
    F: Fn(&Rotation<T>, &Rotation<T>) -> T + ?Sized,
{
    let (d1, d2) = geodesic_derivatives(f, u, v, &GeneratorPair::new(*a, *b))?;
    match order {
        1 => Ok(d1),
        2 => Ok(d2),
        _ => Err(Error::Domain(format!("derivative order must be 1 or 2, got {order}"))),
    }
}
