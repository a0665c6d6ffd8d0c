//! Seeded random inputs for property checks.

use std::f64::consts::TAU;

use rand::Rng;

use crate::numeric::{cx, Cx, Mat2};
use crate::riley::{solve_t, RileyPoint, TraceU};

/// Points with `|2 - u|` below this are skipped by [`variety_samples`].
pub const MIN_DISTANCE_FROM_U2: f64 = 1e-3;

/// `|s|` log-uniform in `[0.3, 3]`, argument uniform.
pub fn random_s(rng: &mut impl Rng) -> Cx {
    let r = rng.gen_range(0.3f64.ln()..3f64.ln()).exp();
    Cx::from_polar(r, rng.gen_range(0.0..TAU))
}

/// `n` random values of `s`, each contributing both branches of the variety.
pub fn variety_samples(rng: &mut impl Rng, n: usize) -> Vec<RileyPoint> {
    let mut out = Vec::with_capacity(2 * n);
    while out.len() < 2 * n {
        let s = random_s(rng);
        if (s + s.inv() - 2.0).norm() < MIN_DISTANCE_FROM_U2 {
            continue;
        }
        let Ok(pair) = solve_t(s) else { continue };
        out.push(pair.plus);
        out.push(pair.minus);
    }
    out
}

/// `u` uniform in the square `|re|, |im| <= 3`, keeping `|u^2 (u^2 - 5)|`
/// at least `margin`.
pub fn random_u(rng: &mut impl Rng, margin: f64) -> TraceU {
    loop {
        let u = cx(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if (u * u * (u * u - 5.0)).norm() >= margin {
            return TraceU(u);
        }
    }
}

/// Two commuting matrices of `SL(2, C)`, simultaneously diagonalized by a
/// random change of basis, with eigenvalues bounded away from 0.
pub fn commuting_pair(rng: &mut impl Rng) -> (Mat2, Mat2) {
    let mut rc = || cx(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
    loop {
        let conj = Mat2::new(rc(), rc(), rc(), rc());
        if conj.det().norm() < 0.1 {
            continue;
        }
        let Ok(inv) = conj.inverse() else { continue };
        let (a, b) = (rc(), rc());
        if a.norm() < 0.2 || b.norm() < 0.2 {
            continue;
        }
        let diag = |z: Cx| Mat2::new(z, cx(0.0, 0.0), cx(0.0, 0.0), z.inv());
        return (conj * diag(a) * inv, conj * diag(b) * inv);
    }
}
