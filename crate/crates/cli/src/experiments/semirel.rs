//! Grid experiments for `T = √(1 − Δ) − 1`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use dispersia::semirel::*;
use dispersia::seed::{stream_rng, Stream};
use dispersia::{Error, Result};

use super::{series, Outcome, Row};
use crate::cli::{Experiment, SemirelArgs};

pub const SYMBOL_TOLERANCE: f64 = 1e-12;
pub const KERNEL_TOLERANCE: f64 = 0.01;
pub const MIN_KERNEL_RATE: f64 = 0.9;
pub const COMMUTATOR_RATIO: f64 = 0.6;
pub const IMS_RATIO: f64 = 0.7;
pub const IMAGINARY_TOLERANCE: f64 = 1e-12;

/// `(dim, points per axis, box side)` used when flags are absent.
pub fn defaults(e: Experiment) -> (usize, usize, f64) {
    match e {
        Experiment::Symbol => (3, 16, 8.0),
        Experiment::Kernel => (3, 64, 24.0),
        Experiment::Commutator | Experiment::Ims => (1, 8192, 128.0),
        Experiment::Decay => (3, 64, 16.0),
        Experiment::Zhislin => (1, 8192, 2048.0),
    }
}

pub fn run(args: &SemirelArgs, seed: u64) -> Result<Outcome> {
    let (dim, n, side) = defaults(args.experiment);
    let grid = SpectralGrid::new(dim, args.grid.unwrap_or(n), 0.5 * args.box_len.unwrap_or(side))?;
    match args.experiment {
        Experiment::Symbol => symbol_check(&grid, seed),
        Experiment::Kernel => kernel(&grid),
        Experiment::Commutator => commutator(&grid, seed),
        Experiment::Ims => ims(&grid),
        Experiment::Decay => decay(&grid, seed),
        Experiment::Zhislin => zhislin(&grid),
    }
}

#[derive(Serialize)]
struct GridInfo {
    dim: usize,
    n: usize,
    half_width: f64,
    spacing: f64,
}

fn info(g: &SpectralGrid) -> GridInfo {
    GridInfo { dim: g.dim(), n: g.n(), half_width: g.half_width(), spacing: g.spacing() }
}

#[derive(Serialize)]
struct PlaneWave {
    mode: [usize; 3],
    momentum: f64,
    symbol: f64,
    max_error: f64,
}

#[derive(Serialize)]
struct SymbolOutput {
    grid: GridInfo,
    plane_waves: Vec<PlaneWave>,
    max_error: f64,
    /// `max(symbol − p²/2)` over the grid momenta, never positive.
    max_excess_over_quadratic: f64,
    /// `⟨ψ, Tψ⟩` for a seeded random `ψ`.
    random_form: f64,
}

fn symbol_check(g: &SpectralGrid, seed: u64) -> Result<Outcome> {
    let ks = g.axis_momenta();
    let n = g.n();
    let picks = [0, 1, 2, n / 4, n / 2 - 1, n / 2, n - 1];
    let modes: Vec<[usize; 3]> = if g.dim() == 1 {
        picks.iter().map(|&a| [a, 0, 0]).collect()
    } else {
        picks.iter().enumerate().map(|(i, &a)| [a, picks[(i + 2) % picks.len()], picks[(i + 5) % picks.len()]]).collect()
    };
    let points = g.points();
    let mut waves = Vec::with_capacity(modes.len());
    for mode in modes {
        let k = [ks[mode[0]], if g.dim() == 3 { ks[mode[1]] } else { 0.0 }, if g.dim() == 3 { ks[mode[2]] } else { 0.0 }];
        let psi: Vec<Complex64> =
            points.iter().map(|x| Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2])).collect();
        let p2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let exact = (1.0 + p2).sqrt() - 1.0;
        let t = apply_t(g, &psi)?;
        let max_error = t.iter().zip(&psi).map(|(a, b)| (a - b * exact).norm()).fold(0.0, f64::max);
        waves.push(PlaneWave { mode, momentum: p2.sqrt(), symbol: exact, max_error });
    }
    let max_error = waves.iter().map(|w| w.max_error).fold(0.0, f64::max);
    let excess = g
        .momenta()
        .iter()
        .zip(g.symbol_values())
        .map(|(p, s)| s - 0.5 * p * p)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut rng = stream_rng(seed, Stream::Sampling);
    let psi: Vec<Complex64> =
        (0..g.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let random_form = g.inner(&psi, &apply_t(g, &psi)?).re;
    let rows = waves.iter().map(|w| Row::new("error", w.momentum, w.max_error)).collect();
    let passed = max_error <= SYMBOL_TOLERANCE && excess <= 1e-15 && random_form >= 0.0;
    let out = SymbolOutput { grid: info(g), plane_waves: waves, max_error, max_excess_over_quadratic: excess, random_form };
    Outcome::new(passed, &out, rows)
}

const BUMP_RADIUS: f64 = 2.0;
const BUMP_POWER: i32 = 8;
const COMPARISON_SEPARATION: f64 = 5.0;
const DECAY_SEPARATIONS: [f64; 4] = [4.0, 6.0, 8.0, 10.0];

#[derive(Serialize)]
struct KernelOutput {
    grid: GridInfo,
    bump_radius: f64,
    bump_power: i32,
    comparison: KernelComparison,
    decay: KernelDecay,
}

fn kernel(g: &SpectralGrid) -> Result<Outcome> {
    let comparison = compare_forms(g, COMPARISON_SEPARATION, BUMP_RADIUS, BUMP_POWER)?;
    let decay = kernel_decay(g, &DECAY_SEPARATIONS, BUMP_RADIUS, BUMP_POWER)?;
    let passed = comparison.relative_difference <= KERNEL_TOLERANCE && decay.rate >= MIN_KERNEL_RATE;
    let rows = series("normalized_form", &decay.separations, &decay.normalized_values);
    let out = KernelOutput { grid: info(g), bump_radius: BUMP_RADIUS, bump_power: BUMP_POWER, comparison, decay };
    Outcome::new(passed, &out, rows)
}

const COMMUTATOR_SCALES: [f64; 4] = [8.0, 16.0, 32.0, 64.0];

#[derive(Serialize)]
struct CommutatorOutput {
    grid: GridInfo,
    estimates: Vec<CommutatorEstimate>,
    /// `‖[T, ζ_{2R}]‖ / ‖[T, ζ_R]‖`.
    ratios: Vec<f64>,
    /// Scale-invariant products `R ‖[T, ζ_R]‖`.
    scaled_norms: Vec<f64>,
    within_fourier_bound: bool,
}

fn commutator(g: &SpectralGrid, seed: u64) -> Result<Outcome> {
    let mut estimates = Vec::new();
    for r in COMMUTATOR_SCALES {
        estimates.push(commutator_norm(g, &CutoffFunction::new(r)?, seed)?);
    }
    let ratios: Vec<f64> = estimates.windows(2).map(|w| w[1].norm / w[0].norm).collect();
    let scaled_norms = estimates.iter().map(|e| e.scale * e.norm).collect();
    let within = estimates.iter().all(|e| e.norm <= e.fourier_bound);
    let passed = within && ratios.iter().all(|r| *r <= COMMUTATOR_RATIO);
    let mut rows: Vec<Row> = estimates.iter().map(|e| Row::new("norm", e.scale, e.norm)).collect();
    rows.extend(estimates.iter().map(|e| Row::new("fourier_bound", e.scale, e.fourier_bound)));
    let out = CommutatorOutput { grid: info(g), estimates, ratios, scaled_norms, within_fourier_bound: within };
    Outcome::new(passed, &out, rows)
}

const IMS_SCALES: [f64; 3] = [8.0, 16.0, 32.0];
/// Centre of the test Gaussian in units of `R`, inside the transition
/// shell of `J₁`.
const IMS_CENTER: f64 = 0.1125;
const IMS_WIDTH: f64 = 0.05;

#[derive(Serialize)]
struct ImsPoint {
    scale: f64,
    error: ImsError,
    partition_defect: f64,
}

#[derive(Serialize)]
struct ImsOutput {
    grid: GridInfo,
    center_over_r: f64,
    width_over_r: f64,
    points: Vec<ImsPoint>,
    ratios: Vec<f64>,
}

fn ims(g: &SpectralGrid) -> Result<Outcome> {
    if g.dim() != 1 {
        return Err(Error::Domain("the IMS sweep runs on a 1D grid".into()));
    }
    let mut points = Vec::new();
    for r in IMS_SCALES {
        let p = PartitionOfUnity::new(g, r, [1.0, 0.0, 0.0])?;
        let (x0, sigma) = (IMS_CENTER * r, IMS_WIDTH * r);
        let psi: Vec<Complex64> = g
            .sample(|x| (-((x[0] - x0) / sigma).powi(2) / 2.0).exp() / sigma.sqrt())
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        points.push(ImsPoint { scale: r, error: ims_error(g, &p, &psi)?, partition_defect: p.defect() });
    }
    let ratios: Vec<f64> = points.windows(2).map(|w| w[1].error.value.abs() / w[0].error.value.abs()).collect();
    let passed = ratios.iter().all(|r| *r <= IMS_RATIO)
        && points.iter().all(|p| p.error.imaginary.abs() <= IMAGINARY_TOLERANCE);
    let rows = points.iter().map(|p| Row::new("error", p.scale, p.error.value)).collect();
    let out = ImsOutput { grid: info(g), center_over_r: IMS_CENTER, width_over_r: IMS_WIDTH, points, ratios };
    Outcome::new(passed, &out, rows)
}

const DECAY_CHARGES: [f64; 2] = [1.0, 2.0];
/// Fit window `[DECAY_INNER, DECAY_OUTER · half-width]`.
const DECAY_INNER: f64 = 1.0;
const DECAY_OUTER: f64 = 0.75;

#[derive(Serialize)]
struct DecayPoint {
    charge: f64,
    softening: f64,
    energy: f64,
    residual: f64,
    restarts: usize,
    fit: DecayFit,
}

#[derive(Serialize)]
struct DecayOutput {
    grid: GridInfo,
    points: Vec<DecayPoint>,
    /// Decay rate grows with the nuclear charge.
    monotone_in_charge: bool,
}

fn decay(g: &SpectralGrid, seed: u64) -> Result<Outcome> {
    if g.dim() != 3 {
        return Err(Error::Domain("the decay experiment runs on a 3D grid".into()));
    }
    let softening = 2.0 * g.spacing();
    let opts = LanczosOptions { seed, ..LanczosOptions::default() };
    let mut points = Vec::new();
    for z in DECAY_CHARGES {
        let v = smoothed_coulomb(g, z, softening);
        let e = ground_state_with(g, &v, 1, &opts)?;
        let fit = decay_rate(g, &e.vectors[0], DECAY_INNER, DECAY_OUTER * g.half_width())?;
        points.push(DecayPoint {
            charge: z,
            softening,
            energy: e.values[0],
            residual: e.residuals[0],
            restarts: e.restarts,
            fit,
        });
    }
    let monotone = points.windows(2).all(|w| w[1].fit.rate < w[0].fit.rate);
    let passed = points.iter().all(|p| p.energy < 0.0 && p.fit.applicable);
    let mut rows = Vec::new();
    for p in &points {
        rows.extend(series(&format!("shell_mean_Z{}", p.charge), &p.fit.radii, &p.fit.shell_means));
    }
    let out = DecayOutput { grid: info(g), points, monotone_in_charge: monotone };
    Outcome::new(passed, &out, rows)
}

const ZHISLIN_SCALES: usize = 10;
const ZHISLIN_FAMILY: [f64; 4] = [40.0, 80.0, 160.0, 320.0];

#[derive(Serialize)]
struct ZhislinOutput {
    grid: GridInfo,
    free: ZhislinReport,
    bound: ZhislinReport,
    family: TrialFamily,
}

fn zhislin(g: &SpectralGrid) -> Result<Outcome> {
    let scales: Vec<f64> = (0..ZHISLIN_SCALES).map(|k| 8.0 * 1.5f64.powi(k as i32)).collect();
    let free = zhislin_trial_bound(g, &NuclearPotential { charge: 0.0, softening: 1.0 }, &scales)?;
    let nucleus = NuclearPotential { charge: 1.0, softening: 2.0 * g.spacing() };
    let bound = zhislin_trial_bound(g, &nucleus, &scales)?;
    let family = trial_family(g, &nucleus, &ZHISLIN_FAMILY)?;
    let passed = bound.dips_below_floor && family.all_negative;
    let r: Vec<f64> = bound.values.iter().map(|v| v.r).collect();
    let total: Vec<f64> = bound.values.iter().map(|v| v.total).collect();
    let mut rows = series("total", &r, &total);
    rows.extend(series("rayleigh_quotient", &family.scales, &family.rayleigh_quotients));
    let out = ZhislinOutput { grid: info(g), free, bound, family };
    Outcome::new(passed, &out, rows)
}
