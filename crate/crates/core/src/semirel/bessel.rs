//! Modified Bessel functions of the second kind of orders 0, 1, 2.
//!
//! Power series below `x = 2`; above, Steed's continued fraction for
//! `K₀, K₁` (the convergent form of the asymptotic expansion). `K₂` follows
//! from `K₂ = K₀ + (2/x) K₁`.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

fn series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();
    // K₀ = −(ln(x/2) + γ) I₀ + Σ_{k≥1} y^k/(k!)² H_k
    // K₁ = 1/x + ln(x/2) I₁ − (x/4) Σ_{k≥0} y^k/(k!(k+1)!) (ψ(k+1) + ψ(k+2))
    let mut i0 = 1.0;
    let mut i1 = 0.5 * x;
    let mut s0 = 0.0;
    let mut s1 = -2.0 * EULER_GAMMA + 1.0;
    let mut t0 = 1.0; // y^k/(k!)²
    let mut t1 = 1.0; // y^k/(k!(k+1)!)
    let mut harmonic = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        harmonic += 1.0 / kf;
        let psi_k1 = -EULER_GAMMA + harmonic;
        let psi_k2 = psi_k1 + 1.0 / (kf + 1.0);
        i0 += t0;
        i1 += 0.5 * x * t1;
        s0 += t0 * harmonic;
        s1 += t1 * (psi_k1 + psi_k2);
        if t0 < 1e-18 * i0 && t1 < 1e-18 * i1.max(1.0) {
            break;
        }
    }
    let k0 = -(ln_half + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + ln_half * i1 - 0.25 * x * s1;
    (k0, k1)
}

fn continued_fraction(x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let (mut q1, mut q2) = (0.0, 1.0);
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `(K₀(x), K₁(x))` for `x > 0`.
pub fn bessel_k01(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("K_ν needs a positive finite argument, got {x}")));
    }
    Ok(if x < SERIES_LIMIT { series(x) } else { continued_fraction(x) })
}

/// `K₂(x)` for `x > 0`.
pub fn bessel_k2(x: f64) -> Result<f64> {
    let (k0, k1) = bessel_k01(x)?;
    Ok(k0 + 2.0 * k1 / x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        // Abramowitz & Stegun table 9.8
        let (k0, k1) = bessel_k01(1.0).unwrap();
        assert!((k0 - 0.421_024_438_240_708_3).abs() < 1e-15);
        assert!((k1 - 0.601_907_230_197_234_6).abs() < 1e-15);
        assert!((bessel_k2(1.0).unwrap() - 1.624_838_898_635_177_5).abs() < 1e-14);
    }

    #[test]
    fn branches_meet_at_the_switch() {
        let below = series(SERIES_LIMIT);
        let above = continued_fraction(SERIES_LIMIT);
        assert!((below.0 - above.0).abs() < 1e-15);
        assert!((below.1 - above.1).abs() < 1e-15);
    }

    #[test]
    fn small_argument_limit() {
        let x = 1e-4;
        assert!((bessel_k2(x).unwrap() * x * x / 2.0 - 1.0).abs() < 1e-7);
        assert!(bessel_k2(0.0).is_err());
    }
}
