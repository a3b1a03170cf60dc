use dispersia::semirel::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complex(f: &[f64]) -> Vec<Complex64> {
    f.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

/// `K₂(x) = ∫₀^∞ e^{−x cosh t} cosh 2t dt` by the trapezoid rule, which
/// converges geometrically for this integrand.
fn k2_quadrature(x: f64) -> f64 {
    let h: f64 = 1e-3;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let term = (-x * t.cosh()).exp() * (2.0 * t).cosh();
        sum += term;
        if term < 1e-300 || (t > 1.0 && term < 1e-20 * sum) {
            break;
        }
        t += h;
    }
    sum * h
}

#[test]
fn k2_matches_integral_representation() {
    for k in 0..20 {
        let x = 0.05 * 1.4f64.powi(k);
        let exact = k2_quadrature(x);
        let got = bessel_k2(x).unwrap();
        assert!((got - exact).abs() <= 1e-10 * exact, "x = {x}: {got} vs {exact}");
    }
}

#[test]
fn plane_waves_are_eigenfunctions() {
    let g = SpectralGrid::new(3, 16, 4.0).unwrap();
    let ks = g.axis_momenta();
    for (a, b, c) in [(1usize, 0usize, 0usize), (3, 5, 2), (15, 8, 9)] {
        let k = [ks[a], ks[b], ks[c]];
        let psi: Vec<Complex64> = g
            .points()
            .iter()
            .map(|x| Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]))
            .collect();
        let expected = symbol((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt());
        let t = apply_t(&g, &psi).unwrap();
        for (u, v) in t.iter().zip(&psi) {
            assert!((u - v * expected).norm() < 1e-12);
        }
    }
}

#[test]
fn parseval_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (dim, n) in [(1, 512), (3, 16)] {
        let g = SpectralGrid::new(dim, n, 5.0).unwrap();
        let psi: Vec<Complex64> = (0..g.len()).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let hat = g.fourier_transform(&psi).unwrap();
        let a: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let b: f64 = hat.iter().map(|z| z.norm_sqr()).sum();
        assert!((a - b).abs() <= 1e-12 * a);
        let back = g.idft(&g.dft(&psi).unwrap()).unwrap();
        assert!(back.iter().zip(&psi).all(|(u, v)| (u - v).norm() < 1e-12));
    }
}

#[test]
fn symbol_is_below_nonrelativistic_kinetic() {
    for g in [SpectralGrid::new(1, 1024, 8.0).unwrap(), SpectralGrid::new(3, 16, 2.0).unwrap()] {
        for (p, s) in g.momenta().iter().zip(g.symbol_values()) {
            assert!(*s >= 0.0 && *s <= 0.5 * p * p + 1e-15);
            assert!((s - ((1.0 + p * p).sqrt() - 1.0)).abs() <= 1e-12 * (1.0 + p));
        }
    }
}

/// Continuum energy of `e^{−r²/(2w²)}` in the smoothed Coulomb field, by
/// radial quadrature in position and momentum space.
fn gaussian_energy(w: f64, charge: f64, softening: f64) -> f64 {
    let steps = 20_000;
    let (rmax, pmax) = (12.0 * w, 12.0 / w);
    let (mut kin, mut kn, mut pot, mut pn) = (0.0, 0.0, 0.0, 0.0);
    for i in 1..steps {
        let p = pmax * i as f64 / steps as f64;
        let wp = p * p * (-(p * w).powi(2)).exp();
        kin += wp * ((1.0 + p * p).sqrt() - 1.0);
        kn += wp;
        let r = rmax * i as f64 / steps as f64;
        let wr = r * r * (-(r / w).powi(2)).exp();
        pot += wr * (-charge / (r * r + softening * softening).sqrt());
        pn += wr;
    }
    kin / kn + pot / pn
}

#[test]
fn lanczos_ground_state_is_below_gaussian_bound() {
    let g = SpectralGrid::new(3, 32, 8.0).unwrap();
    let a = 2.0 * g.spacing();
    let bound = (1..40).map(|k| gaussian_energy(0.25 * k as f64, 1.0, a)).fold(f64::INFINITY, f64::min);
    assert!(bound < 0.0);
    let v = smoothed_coulomb(&g, 1.0, a);
    let r = ground_state(&g, &v, 1).unwrap();
    assert!(r.residuals[0] <= RESIDUAL_TOL);
    // the grid energy differs from the continuum one by discretization only
    assert!(r.values[0] <= bound + 1e-3, "{} vs {bound}", r.values[0]);
    // Rayleigh–Ritz on the grid itself is exact
    let trial = g.sample(|x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 8.0).exp());
    let tv = apply_t_real(&g, &trial).unwrap();
    let e = (g.inner_real(&trial, &tv) + trial.iter().zip(&v).map(|(t, p)| t * t * p).sum::<f64>() * g.cell_volume())
        / g.inner_real(&trial, &trial);
    assert!(r.values[0] <= e + 1e-10);
}

#[test]
fn kernel_matches_fourier_and_decays() {
    let g = SpectralGrid::new(3, 64, 12.0).unwrap();
    let c = compare_forms(&g, 5.0, 2.0, 8).unwrap();
    assert!(c.relative_difference <= 0.01, "{c:?}");
    assert!(c.kernel < 0.0);
    let d = kernel_decay(&g, &[4.0, 6.0, 8.0, 10.0], 2.0, 8).unwrap();
    assert!(d.rate >= 0.9, "{d:?}");
}

#[test]
fn commutator_scales_inversely() {
    let g = SpectralGrid::new(1, 8192, 64.0).unwrap();
    let est: Vec<_> = [8.0, 16.0, 32.0]
        .iter()
        .map(|r| commutator_norm(&g, &CutoffFunction::new(*r).unwrap(), 3).unwrap())
        .collect();
    for e in &est {
        assert!(e.norm <= e.fourier_bound, "{e:?}");
    }
    for w in est.windows(2) {
        assert!(w[1].norm / w[0].norm <= 0.6);
    }
}

#[test]
fn ims_error_shrinks_and_vanishes_in_flat_region() {
    let g = SpectralGrid::new(1, 8192, 64.0).unwrap();
    let mut errs = Vec::new();
    for r in [8.0, 16.0, 32.0] {
        let p = PartitionOfUnity::new(&g, r, [1.0, 0.0, 0.0]).unwrap();
        assert!(p.defect() < 1e-12);
        let (x0, sig) = (0.1125 * r, r / 20.0);
        let psi = complex(&g.sample(|x| (-((x[0] - x0) / sig).powi(2) / 2.0).exp() / sig.sqrt()));
        let e = ims_error(&g, &p, &psi).unwrap();
        assert!(e.imaginary.abs() <= 1e-12);
        errs.push(e.value.abs());
    }
    for w in errs.windows(2) {
        assert!(w[1] / w[0] <= 0.7, "{errs:?}");
    }
    let p = PartitionOfUnity::new(&g, 32.0, [1.0, 0.0, 0.0]).unwrap();
    let flat = complex(&g.sample(|x| (-(x[0] / 0.4).powi(2) / 2.0).exp()));
    assert!(ims_error(&g, &p, &flat).unwrap().value.abs() <= 1e-8);
}

#[test]
fn decay_rate_grows_with_charge() {
    let g = SpectralGrid::new(3, 32, 8.0).unwrap();
    let mut rates = Vec::new();
    for z in [1.0, 2.0] {
        let v = smoothed_coulomb(&g, z, 2.0 * g.spacing());
        let r = ground_state(&g, &v, 1).unwrap();
        let fit = decay_rate(&g, &r.vectors[0], 1.0, 6.0).unwrap();
        assert!(fit.applicable, "{fit:?}");
        rates.push(-fit.rate);
    }
    assert!(rates[1] > rates[0], "{rates:?}");
}

#[test]
fn shell_trials_dip_below_the_floor() {
    let g = SpectralGrid::new(1, 8192, 1024.0).unwrap();
    let rs: Vec<f64> = (0..10).map(|k| 8.0 * 1.5f64.powi(k)).collect();
    let free = zhislin_trial_bound(&g, &NuclearPotential { charge: 0.0, softening: 1.0 }, &rs).unwrap();
    assert!((free.kinetic_fit.slope + 2.0).abs() < 0.1, "{:?}", free.kinetic_fit);
    assert!(!free.dips_below_floor);
    let nuc = NuclearPotential { charge: 1.0, softening: 2.0 * g.spacing() };
    let bound = zhislin_trial_bound(&g, &nuc, &rs).unwrap();
    assert!(bound.dips_below_floor);
    assert!(bound.c > 0.0);
    let fam = trial_family(&g, &nuc, &[40.0, 80.0, 160.0, 320.0]).unwrap();
    assert!(fam.all_negative, "{fam:?}");
    assert!(fam.max_overlap < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kinetic_form_is_nonnegative(seed in any::<u64>()) {
        let g = SpectralGrid::new(1, 256, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi: Vec<Complex64> = (0..g.len()).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let v = g.inner(&psi, &apply_t(&g, &psi).unwrap());
        prop_assert!(v.re >= -1e-12);
        prop_assert!(v.im.abs() <= 1e-10 * (1.0 + v.re));
    }
}
