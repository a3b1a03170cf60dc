//! Moments, expansion remainders and the matrix models.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use dispersia::coulomb::verify_expansion_order;
use dispersia::energy::toy::{dipole_interaction_operator, pair_hamiltonian, vdw_coefficient, CMatrix, ToyMolecule};
use dispersia::energy::ground_state_energy_fixed_point;
use dispersia::io::read_json;
use dispersia::multipole::multipole_moment;
use dispersia::rotations::random_rotation;
use dispersia::seed::{indexed_rng, stream_rng, Stream};
use dispersia::{Error, Result, Rotation};

use super::{series, Outcome, Row};
use crate::cli::{ExpandArgs, FeshbachArgs, MultipoleArgs, VdwArgs};
use crate::inputs;

#[derive(Serialize)]
struct MultipoleOutput {
    label: String,
    order: usize,
    total_charge: f64,
    entries: std::collections::BTreeMap<String, f64>,
}

pub fn multipole(args: &MultipoleArgs) -> Result<Outcome> {
    let rho = inputs::density(&args.density)?;
    let m = multipole_moment(&rho, args.order)?;
    let entries = m.entries();
    let rows = entries.iter().enumerate().map(|(i, (_, v))| Row::new("entry", i as f64, *v)).collect();
    let out = MultipoleOutput {
        label: rho.label().to_string(),
        order: args.order,
        total_charge: rho.total_charge(),
        entries,
    };
    Outcome::new(true, &out, rows)
}

pub fn expand(args: &ExpandArgs) -> Result<Outcome> {
    let rho1 = inputs::density(&args.rho1)?;
    let rho2 = inputs::density(&args.rho2)?;
    let u = inputs::rotation(&args.u)?;
    let v = inputs::rotation(&args.v)?;
    let report = verify_expansion_order(&rho1, &rho2, &u, &v, args.k, &args.l)?;
    let rows = series("remainder", &report.l_values, &report.remainder);
    Outcome::new(report.success && !report.hypothesis_violation, &report, rows)
}

/// Hermitian matrix with entries uniform in `[−1, 1]`.
pub(crate) fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let re = rng.random_range(-1.0..1.0);
            let im = if i == j { 0.0 } else { rng.random_range(-1.0..1.0) };
            m[(i, j)] = Complex64::new(re, im);
            m[(j, i)] = Complex64::new(re, -im);
        }
    }
    m
}

fn random_molecule<R: Rng>(rng: &mut R, n: usize) -> Result<ToyMolecule> {
    let h = random_hermitian(rng, n);
    let d = [random_hermitian(rng, n), random_hermitian(rng, n), random_hermitian(rng, n)];
    ToyMolecule::new(h, d)
}

fn lowest_eigenvalue(m: &CMatrix) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[derive(Serialize)]
struct DiagonalizationFit {
    #[serde(rename = "L")]
    l: f64,
    /// `(E_∞ − E(L)) L⁶` from the lowest eigenvalue of the coupled pair.
    fitted: f64,
    coefficient: f64,
    relative_error: f64,
}

#[derive(Serialize)]
struct VdwOutput {
    model: String,
    coefficients: Vec<f64>,
    min: f64,
    max: f64,
    spread: f64,
    fit: Option<DiagonalizationFit>,
    random_models: Vec<f64>,
}

const FIT_TOLERANCE: f64 = 0.01;
const POSITIVITY_FLOOR: f64 = 1e-12;

pub fn vdw(args: &VdwArgs, seed: u64) -> Result<Outcome> {
    let (mol1, mol2, model) = match (&args.mol1, &args.mol2) {
        (Some(a), Some(b)) => (read_json::<ToyMolecule>(a)?, read_json::<ToyMolecule>(b)?, "files".to_string()),
        _ => {
            let m = ToyMolecule::truncated_oscillator(args.omega)?;
            (m.clone(), m, format!("truncated oscillator, omega = {}", args.omega))
        }
    };
    if args.samples == 0 {
        return Err(Error::Domain("at least one orientation sample is required".into()));
    }
    let mut rng = stream_rng(seed, Stream::Sampling);
    let mut coefficients = Vec::with_capacity(args.samples);
    let mut orientations = Vec::with_capacity(args.samples);
    for _ in 0..args.samples {
        let u: Rotation = random_rotation(&mut rng);
        let v: Rotation = random_rotation(&mut rng);
        coefficients.push(vdw_coefficient(&mol1, &mol2, &u, &v)?.c_max);
        orientations.push((u, v));
    }
    let min = coefficients.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = coefficients.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let fit = match args.fit_l {
        Some(l) => {
            let (u, v) = orientations[0];
            let h0 = pair_hamiltonian(&mol1, &mol2);
            let f = dipole_interaction_operator(&mol1, &mol2, &u, &v);
            let e_inf = lowest_eigenvalue(&h0);
            let e = lowest_eigenvalue(&(&h0 + f.scale(l.powi(-3))));
            let fitted = (e_inf - e) * l.powi(6);
            let c = coefficients[0];
            Some(DiagonalizationFit { l, fitted, coefficient: c, relative_error: (fitted - c).abs() / c })
        }
        None => None,
    };
    let mut random_models = Vec::with_capacity(args.random_models);
    for i in 0..args.random_models {
        let mut r = indexed_rng(seed, Stream::ToyModel, i as u64);
        let n = r.random_range(3..=5);
        let a = random_molecule(&mut r, n)?;
        let b = random_molecule(&mut r, n)?;
        let u: Rotation = random_rotation(&mut r);
        let v: Rotation = random_rotation(&mut r);
        random_models.push(vdw_coefficient(&a, &b, &u, &v)?.c_max);
    }
    let passed = min > POSITIVITY_FLOOR
        && random_models.iter().all(|c| *c > POSITIVITY_FLOOR)
        && fit.as_ref().map(|f| f.relative_error <= FIT_TOLERANCE).unwrap_or(true);
    let mut rows: Vec<Row> = coefficients.iter().enumerate().map(|(i, c)| Row::new("orientation", i as f64, *c)).collect();
    rows.extend(random_models.iter().enumerate().map(|(i, c)| Row::new("random_model", i as f64, *c)));
    let out = VdwOutput { model, spread: max - min, coefficients, min, max, fit, random_models };
    Outcome::new(passed, &out, rows)
}

#[derive(Serialize)]
struct FeshbachTrial {
    rank: usize,
    fixed_point: f64,
    dense: f64,
    gap: f64,
    error: f64,
}

#[derive(Serialize)]
struct FeshbachOutput {
    dim: usize,
    trials: Vec<FeshbachTrial>,
    /// Draws whose complement gap was below the threshold.
    skipped: usize,
    max_error: f64,
}

const GAP_THRESHOLD: f64 = 1e-6;
const FESHBACH_TOLERANCE: f64 = 1e-8;

/// Random Hermitian `H` with `P` projecting onto the first `k ≤ 3`
/// coordinates; draws whose complement block is not gapped above the
/// ground energy are skipped.
pub fn feshbach(args: &FeshbachArgs, seed: u64) -> Result<Outcome> {
    if args.dim < 2 || args.trials == 0 {
        return Err(Error::Domain("need dim ≥ 2 and at least one trial".into()));
    }
    let mut trials = Vec::with_capacity(args.trials);
    let mut skipped = 0;
    let mut draw = 0u64;
    while trials.len() < args.trials {
        let mut rng = indexed_rng(seed, Stream::Fixture, draw);
        draw += 1;
        if draw > 100 * args.trials as u64 {
            return Err(Error::Convergence("too few gapped draws".into()));
        }
        let n = args.dim;
        let h = random_hermitian(&mut rng, n);
        let k = rng.random_range(1..=3.min(n - 1));
        let mut p = CMatrix::zeros(n, n);
        for i in 0..k {
            p[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let mu = lowest_eigenvalue(&h.view((k, k), (n - k, n - k)).into_owned());
        let dense = lowest_eigenvalue(&h);
        if mu - dense < GAP_THRESHOLD {
            skipped += 1;
            continue;
        }
        let e = ground_state_energy_fixed_point(&h, &p)?;
        trials.push(FeshbachTrial { rank: k, fixed_point: e, dense, gap: mu - dense, error: (e - dense).abs() });
    }
    let max_error = trials.iter().map(|t| t.error).fold(0.0, f64::max);
    let rows = trials.iter().enumerate().map(|(i, t)| Row::new("error", i as f64, t.error)).collect();
    let out = FeshbachOutput { dim: args.dim, trials, skipped, max_error };
    Outcome::new(max_error <= FESHBACH_TOLERANCE, &out, rows)
}
