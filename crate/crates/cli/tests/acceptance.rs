//! Acceptance suite. Each criterion runs CLI invocations (or library calls
//! where no subcommand exposes the quantity), prints one PASS/FAIL line and
//! the suite fails if any criterion does.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;

use dispersia::coulomb::coulomb_interaction;
use dispersia::multipole::interaction_coefficient;
use dispersia::pathopt::fixtures::TwoParameterToy;
use dispersia::seed::{indexed_rng, Stream};
use dispersia::{ChargeDensity, Configuration, Rotation};

const SLOPE_MAX: f64 = -4.7;
const EXPAND_RUNTIME: Duration = Duration::from_secs(5);
const DIPOLE_CLOSED_FORM_TOL: f64 = 1e-10;
const DIPOLE_BRUTE_FORCE_REL: f64 = 0.02;
const DRUDE_C6: f64 = 0.75;
const DRUDE_TOL: f64 = 1e-10;
const DIAG_FIT_REL: f64 = 0.01;
const FESHBACH_TOL: f64 = 1e-8;
const POSITIVITY_FLOOR: f64 = 1e-12;
const NEGATIVITY_DELTA: f64 = 0.1;
const NEGATIVITY_RUNTIME: Duration = Duration::from_secs(60);
const BOUND_TOL: f64 = 1e-9;
const MINMAX_TOL: f64 = 1e-3;
const SYMBOL_TOL: f64 = 1e-12;
const KERNEL_REL: f64 = 0.01;
const KERNEL_RATE_MIN: f64 = 0.9;
const COMMUTATOR_RATIO_MAX: f64 = 0.6;
const IMS_RATIO_MAX: f64 = 0.7;
const DECAY_R2_MIN: f64 = 0.95;

const H: &str = "0.7071067811865476";
const IDENTITY: &str = "[1,0,0,0,1,0,0,0,1]";
const RY: &str = "[0,0,1,0,1,0,-1,0,0]";
const RZ_PI_RY: &str = "[0,0,-1,0,-1,0,-1,0,0]";
const RZ_120: &str = "[-0.5,-0.8660254037844386,0,0.8660254037844386,-0.5,0,0,0,1]";

struct Run {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
    elapsed: Duration,
    args: Vec<String>,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.stdout).unwrap_or(Value::Null)
    }
}

fn exec(args: &[String], threads: usize) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_dispersia"))
        .env("DISPERSIA_THREADS", threads.to_string())
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        elapsed: start.elapsed(),
        args: args.to_vec(),
    }
}

fn owned(args: &[&str]) -> Vec<String> {
    args.iter().map(|s| s.to_string()).collect()
}

fn cfg(l: f64, u: &str, v: &str) -> String {
    format!(r#"{{"L": {l}, "U": {u}, "V": {v}}}"#)
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

/// Outcome of one criterion: a verdict, a short detail line and every CLI
/// run it made (rechecked for determinism at the end).
struct Verdict {
    pass: bool,
    detail: String,
    runs: Vec<Vec<String>>,
}

fn verdict(pass: bool, mut detail: String, runs: &[&Run]) -> Verdict {
    for r in runs.iter().filter(|r| r.code == 1) {
        detail.push_str(&format!(" [{}]", r.stderr.trim()));
    }
    Verdict { pass, detail, runs: runs.iter().map(|r| r.args.clone()).collect() }
}

fn c1() -> Verdict {
    let q = format!("{H},0,{H},0");
    let r = exec(
        &owned(&["expand", "--rho1", "fixture:dipole", "--rho2", "fixture:dipole", "--u", &q, "--v", &q, "--K", "4", "--L", "40,80,160,320"]),
        4,
    );
    let j = r.json();
    let slope = f(&j["result"]["fitted_slope"]);
    let pass = r.code == 0 && slope <= SLOPE_MAX && r.elapsed < EXPAND_RUNTIME;
    verdict(pass, format!("slope {slope:.4} (≤ {SLOPE_MAX}), {:.2?}", r.elapsed), &[&r])
}

fn c2() -> Verdict {
    let mut worst_closed: f64 = 0.0;
    let mut worst_bf: f64 = 0.0;
    let id = Rotation::identity();
    let tau = Configuration::new(200.0, id, id).unwrap();
    for i in 0..20 {
        let mut rng = indexed_rng(2, Stream::Fixture, i);
        let mut unit = || {
            let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            v.map(|x| x / n)
        };
        let (d1, d2) = (unit(), unit());
        let pair = |d: [f64; 3]| {
            ChargeDensity::new(vec![d.map(|x| 0.5 * x), d.map(|x| -0.5 * x)], vec![1.0, -1.0], "dipole").unwrap()
        };
        let (r1, r2) = (pair(d1), pair(d2));
        let closed = d1[0] * d2[0] + d1[1] * d2[1] + d1[2] * d2[2] - 3.0 * d1[0] * d2[0];
        let coeff = interaction_coefficient(1, 1, &r1, &r2).unwrap();
        worst_closed = worst_closed.max((coeff - closed).abs());
        let bf = coulomb_interaction(&r1, &r2, &tau).unwrap() * 200f64.powi(3);
        worst_bf = worst_bf.max((bf - coeff).abs() / coeff.abs().max(1e-2));
    }
    let pass = worst_closed <= DIPOLE_CLOSED_FORM_TOL && worst_bf <= DIPOLE_BRUTE_FORCE_REL;
    verdict(pass, format!("closed-form err {worst_closed:.1e}, brute-force rel {worst_bf:.1e}"), &[])
}

fn c3() -> Verdict {
    let r = exec(&owned(&["vdw", "--omega", "1", "--samples", "10", "--fit-L", "80"]), 4);
    let j = &r.json()["result"];
    let cs: Vec<f64> = j["coefficients"].as_array().map(|a| a.iter().map(f).collect()).unwrap_or_default();
    let dev = cs.iter().map(|c| (c - DRUDE_C6).abs()).fold(0.0, f64::max);
    let spread = f(&j["spread"]);
    let fit = f(&j["fit"]["relative_error"]);
    let pass = r.code == 0 && cs.len() == 10 && dev <= DRUDE_TOL && spread <= DRUDE_TOL && fit <= DIAG_FIT_REL;
    verdict(pass, format!("max |C − 0.75| {dev:.1e}, spread {spread:.1e}, L=80 fit rel {fit:.1e}"), &[&r])
}

fn c4() -> Verdict {
    let r = exec(&owned(&["feshbach", "--trials", "100", "--dim", "8"]), 4);
    let j = &r.json()["result"];
    let n = j["trials"].as_array().map(|a| a.len()).unwrap_or(0);
    let err = f(&j["max_error"]);
    let pass = r.code == 0 && n == 100 && err <= FESHBACH_TOL;
    verdict(pass, format!("{n} gapped draws, max error {err:.1e}"), &[&r])
}

fn c5() -> Verdict {
    let r = exec(&owned(&["vdw", "--samples", "1", "--random-models", "20"]), 4);
    let j = &r.json()["result"];
    let cs: Vec<f64> = j["random_models"].as_array().map(|a| a.iter().map(f).collect()).unwrap_or_default();
    let min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let pass = r.code == 0 && cs.len() == 20 && min > POSITIVITY_FLOOR;
    verdict(pass, format!("{} models, min C_vdW {min:.3e}", cs.len()), &[&r])
}

fn c6() -> Verdict {
    let (d, q) = ("fixture:dipole", "fixture:quadrupole");
    let mut runs = Vec::new();
    let mut detail = Vec::new();
    let mut pass = true;
    let mut total = Duration::ZERO;
    for (n, m, a, b) in [("1", "1", d, d), ("1", "2", d, q), ("2", "2", q, q)] {
        let r = exec(
            &owned(&["negativity", "--rho1", a, "--rho2", b, "--n", n, "--m", m, "--delta", "0.1", "--trials", "50"]),
            4,
        );
        let j = &r.json()["result"];
        let vals: Vec<f64> = j["endpoint_values"].as_array().map(|a| a.iter().map(f).collect()).unwrap_or_default();
        let scale = f(&j["moment_scale"]);
        let worst = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        pass &= r.code == 0 && vals.len() == 50 && worst <= -NEGATIVITY_DELTA * scale;
        total += r.elapsed;
        detail.push(format!("({n},{m}) max {worst:.3}"));
        runs.push(r);
    }
    pass &= total < NEGATIVITY_RUNTIME;
    let refs: Vec<&Run> = runs.iter().collect();
    verdict(pass, format!("{}, {total:.2?}", detail.join(", ")), &refs)
}

fn c7() -> Verdict {
    let r = exec(
        &owned(&["sublevel", "--rho1", "fixture:dipole", "--rho2", "fixture:dipole", "--n", "1", "--m", "1", "--delta", "0.1", "--samples", "5000"]),
        4,
    );
    let j = &r.json()["result"];
    let comps = j["components"].as_u64().unwrap_or(0);
    let size = j["sublevel_size"].as_u64().unwrap_or(0);
    let pass = r.code == 0 && comps == 1 && j["grid_n"].as_u64() == Some(5000);
    verdict(pass, format!("{comps} component(s) over {size} sublevel samples"), &[&r])
}

fn dipole_surface(dir: &Path) -> PathBuf {
    let p = dir.join("dipole_surface.json");
    std::fs::write(
        &p,
        r#"{"rho1": {"label": "dipole", "points": [[0,0,0.5],[0,0,-0.5]], "weights": [1,-1]},
            "rho2": {"label": "dipole", "points": [[0,0,0.5],[0,0,-0.5]], "weights": [1,-1]},
            "e_infinity": 0.0, "vdw": {"constant": 0.75}}"#,
    )
    .unwrap();
    p
}

fn c8(dir: &Path) -> Verdict {
    let surface = dipole_surface(dir);
    let r = exec(
        &owned(&[
            "boundpath", "--surface", surface.to_str().unwrap(), "--tau0", &cfg(4.0, RY, RY), "--tau1",
            &cfg(4.0, RZ_PI_RY, RZ_PI_RY), "--nodes", "9", "--lift", "10",
        ]),
        4,
    );
    let j = &r.json()["result"];
    let l_cut = f(&j["L_cut"]);
    let max_l = f(&j["output_max_L"]);
    let input_l = f(&j["input_max_L"]);
    let bound = f(&j["e_infinity"]).max(f(&j["input_max"])) + BOUND_TOL;
    let out = f(&j["output_max"]);
    let pass = r.code == 0 && input_l >= 10.0 * l_cut - 1e-9 && max_l <= l_cut && out <= bound;
    verdict(pass, format!("L_cut {l_cut:.3}, max L {input_l:.1} → {max_l:.3}, max E {out:.3e} ≤ {bound:.3e}"), &[&r])
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Lowest level at which the two endpoint cells join in the superlevel
/// flooding of an `n × n` grid over θ ∈ [−π, π) (periodic) × L ∈ [l0, l1].
fn grid_minmax(n: usize, l0: f64, l1: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let theta = |i: usize| -PI + 2.0 * PI * i as f64 / n as f64;
    let ell = |j: usize| l0 + (l1 - l0) * j as f64 / (n - 1) as f64;
    let cell = |p: (f64, f64)| {
        let i = (((p.0 + PI) / (2.0 * PI) * n as f64).round() as usize) % n;
        let j = ((p.1 - l0) / (l1 - l0) * (n - 1) as f64).round() as usize;
        i * n + j
    };
    let values: Vec<f64> = (0..n * n).map(|k| TwoParameterToy::reduced(theta(k / n), ell(k % n))).collect();
    let mut order: Vec<usize> = (0..n * n).collect();
    order.sort_by(|x, y| values[*x].total_cmp(&values[*y]));
    let mut on = vec![false; n * n];
    let mut uf = UnionFind((0..n * n).collect());
    let (sa, sb) = (cell(a), cell(b));
    for k in order {
        on[k] = true;
        let (i, j) = (k / n, k % n);
        let mut nb = vec![((i + 1) % n) * n + j, ((i + n - 1) % n) * n + j];
        if j > 0 {
            nb.push(k - 1);
        }
        if j + 1 < n {
            nb.push(k + 1);
        }
        for m in nb {
            if on[m] {
                uf.union(k, m);
            }
        }
        if on[sa] && on[sb] && uf.find(sa) == uf.find(sb) {
            return values[k];
        }
    }
    f64::INFINITY
}

fn c9() -> Verdict {
    let r = exec(
        &owned(&["mountainpass", "--toy", "--tau0", &cfg(2.0, IDENTITY, IDENTITY), "--tau1", &cfg(2.0, RZ_120, IDENTITY), "--nodes", "16"]),
        4,
    );
    let level = f(&r.json()["result"]["level"]);
    let oracle = grid_minmax(200, TwoParameterToy::L_MIN, 4.0, (0.0, 2.0), (2.0 * PI / 3.0, 2.0));
    let pass = r.code == 0 && (level - oracle).abs() <= MINMAX_TOL;
    verdict(pass, format!("level {level:.6}, grid oracle {oracle:.6}"), &[&r])
}

fn c10() -> Verdict {
    let r = exec(&owned(&["semirel", "--experiment", "symbol"]), 4);
    let j = &r.json()["result"];
    let waves = j["plane_waves"].as_array().map(|a| a.len()).unwrap_or(0);
    let err = f(&j["max_error"]);
    let pass = r.code == 0 && waves > 0 && err <= SYMBOL_TOL;
    verdict(pass, format!("{waves} plane waves, max error {err:.1e}"), &[&r])
}

fn c11() -> Verdict {
    let r = exec(&owned(&["semirel", "--experiment", "kernel", "--grid", "64"]), 4);
    let j = &r.json()["result"];
    let rel = f(&j["comparison"]["relative_difference"]);
    let rate = f(&j["decay"]["rate"]);
    let seps: Vec<f64> = j["decay"]["separations"].as_array().map(|a| a.iter().map(f).collect()).unwrap_or_default();
    let pass = r.code == 0
        && j["grid"]["n"].as_u64() == Some(64)
        && f(&j["comparison"]["separation"]) == 5.0
        && seps == [4.0, 6.0, 8.0, 10.0]
        && rel <= KERNEL_REL
        && rate >= KERNEL_RATE_MIN;
    verdict(pass, format!("relative difference {rel:.1e}, decay rate {rate:.3}"), &[&r])
}

fn c12() -> Verdict {
    let r = exec(&owned(&["semirel", "--experiment", "commutator"]), 4);
    let j = &r.json()["result"];
    let ratios: Vec<f64> = j["ratios"].as_array().map(|a| a.iter().map(f).collect()).unwrap_or_default();
    let est = j["estimates"].as_array().cloned().unwrap_or_default();
    let scales: Vec<f64> = est.iter().map(|e| f(&e["scale"])).collect();
    let within = est.iter().all(|e| f(&e["norm"]) <= f(&e["fourier_bound"]));
    let worst = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pass = r.code == 0 && scales == [8.0, 16.0, 32.0, 64.0] && ratios.len() == 3 && worst <= COMMUTATOR_RATIO_MAX && within;
    verdict(pass, format!("max ratio {worst:.3}, within Fourier bound {within}"), &[&r])
}

fn c13() -> Verdict {
    let r = exec(&owned(&["semirel", "--experiment", "ims"]), 4);
    let j = &r.json()["result"];
    let ratios: Vec<f64> = j["ratios"].as_array().map(|a| a.iter().map(f).collect()).unwrap_or_default();
    let scales: Vec<f64> = j["points"].as_array().map(|a| a.iter().map(|p| f(&p["scale"])).collect()).unwrap_or_default();
    let worst = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pass = r.code == 0 && scales == [8.0, 16.0, 32.0] && ratios.len() == 2 && worst <= IMS_RATIO_MAX;
    verdict(pass, format!("max ratio {worst:.3}"), &[&r])
}

fn c14() -> Verdict {
    let decay = exec(&owned(&["semirel", "--experiment", "decay"]), 4);
    let zhislin = exec(&owned(&["semirel", "--experiment", "zhislin"]), 4);
    let d = &decay.json()["result"];
    let points = d["points"].as_array().cloned().unwrap_or_default();
    let mut detail = Vec::new();
    let mut pass = decay.code == 0 && zhislin.code == 0 && !points.is_empty();
    for p in &points {
        let e = f(&p["energy"]);
        let slope = f(&p["fit"]["fit"]["slope"]);
        let r2 = f(&p["fit"]["fit"]["r2"]);
        pass &= e < 0.0 && p["fit"]["applicable"].as_bool() == Some(true) && slope < 0.0 && r2 >= DECAY_R2_MIN;
        detail.push(format!("Z={} E {e:.3} slope {slope:.3} R² {r2:.4}", f(&p["charge"])));
    }
    let z = &zhislin.json()["result"];
    let dips = z["bound"]["dips_below_floor"].as_bool() == Some(true);
    let quotients: Vec<f64> =
        z["family"]["rayleigh_quotients"].as_array().map(|a| a.iter().map(f).collect()).unwrap_or_default();
    let negative = quotients.len() == 4 && quotients.iter().all(|q| *q < 0.0);
    pass &= dips && negative;
    detail.push(format!("Zhislin dip {dips}, {} negative trial quotients", quotients.iter().filter(|q| **q < 0.0).count()));
    verdict(pass, detail.join("; "), &[&decay, &zhislin])
}

/// Reruns every invocation twice with four threads and once with one; all
/// three outputs must match byte for byte.
fn c15(runs: &[Vec<String>]) -> Verdict {
    let mismatches: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = runs
            .iter()
            .map(|args| {
                s.spawn(move || {
                    let a = exec(args, 4);
                    let b = exec(args, 4);
                    let c = exec(args, 1);
                    (a.stdout == b.stdout && a.stdout == c.stdout && a.code == c.code).then_some(()).ok_or(args[0].clone())
                })
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().unwrap().err()).collect()
    });
    verdict(mismatches.is_empty(), format!("{} runs, mismatched: {mismatches:?}", runs.len()), &[])
}

type Criterion<'a> = Box<dyn Fn() -> Verdict + Send + Sync + 'a>;

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("expansion order", Box::new(c1)),
        ("dipole coefficient", Box::new(c2)),
        ("Drude C6", Box::new(c3)),
        ("Feshbach equivalence", Box::new(c4)),
        ("C_vdW positivity", Box::new(c5)),
        ("pseudo-minimum negativity", Box::new(c6)),
        ("sublevel connectivity", Box::new(c7)),
        ("bounded path", Box::new(move || c8(dir))),
        ("mountain-pass level", Box::new(c9)),
        ("semirelativistic symbol", Box::new(c10)),
        ("Bessel kernel", Box::new(c11)),
        ("commutator scaling", Box::new(c12)),
        ("IMS error scaling", Box::new(c13)),
        ("decay and binding", Box::new(c14)),
    ];
    let verdicts: Vec<Verdict> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria.iter().map(|(_, run)| s.spawn(run)).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let all_runs: Vec<Vec<String>> = verdicts.iter().flat_map(|v| v.runs.clone()).collect();
    let determinism = c15(&all_runs);

    let mut failed = Vec::new();
    let names = criteria.iter().map(|(n, _)| *n).chain(std::iter::once("determinism"));
    for (i, (name, v)) in names.zip(verdicts.iter().chain(std::iter::once(&determinism))).enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {:>2} {name}: {}", i + 1, v.detail);
        if !v.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
