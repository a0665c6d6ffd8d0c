//! The self-verification suite: every closed form against its oracle on
//! seeded random samples, plus fixed fixtures.
//!
//! Each check reports the largest residual it saw and the threshold it was
//! held to. Output depends only on the configuration, never on timing.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::fixtures::random_acyclic;
use crate::config::Tolerances;
use crate::error::Error;
use crate::numeric::{cx, rel_diff, Cx};
use crate::riley::{self, longitude_word, solve_t, Branch, RileyPoint, TraceU};
use crate::sampling;
use crate::surgery::{self, GridSpec, SurgerySlope};
use crate::torsion;

/// Largest `|p|` and `|q|` covered by the surgery checks.
pub const SURGERY_SLOPE_BOUND: i64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Random values of `s`; each contributes both branches.
    pub samples: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub grid: GridSpec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 200,
            seed: 7,
            tol: Tolerances::default(),
            grid: GridSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, residuals: impl IntoIterator<Item = f64>, threshold: f64) -> Self {
        let (mut cases, mut max, mut passed) = (0, 0.0f64, true);
        for r in residuals {
            cases += 1;
            if r.is_nan() || r > threshold {
                passed = false;
            }
            max = if r.is_nan() { f64::NAN } else { max.max(r) };
        }
        CheckResult {
            name: name.to_string(),
            cases,
            max_residual: max,
            threshold,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify: samples={} seed={}", self.samples, self.seed)?;
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<32} cases={:<6} max={:<10.3e} threshold={:.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.max_residual,
                c.threshold
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

/// Check names, in report order.
pub mod names {
    pub const GEOMETRIC_POINT: &str = "geometric_point";
    pub const U_ONE_NOT_ACYCLIC: &str = "u_one_not_acyclic";
    pub const DEGENERATE_FLAGGED: &str = "degenerate_u_flagged";
    pub const EXTERIOR_MAGNITUDE: &str = "exterior_oracle_magnitude";
    pub const EXTERIOR_RATIO: &str = "exterior_ratio_signed";
    pub const TRACE_IDENTITY: &str = "trace_identity";
    pub const LONGITUDE_ENTRIES: &str = "longitude_entries";
    pub const LONGITUDE_L21: &str = "longitude_l21";
    pub const SOLID_TORUS: &str = "solid_torus_circle_complex";
    pub const CHAIN_BASIS: &str = "chain_basis_independence";
    pub const TORUS_UNIT: &str = "torus_torsion_unit";
    pub const PRODUCT_IDENTITY: &str = "product_identity";
    pub const SURGERY_MERIDIAN: &str = "surgery_meridian_empty";
    pub const SURGERY_RESIDUALS: &str = "surgery_residuals";
    pub const SURGERY_TORSION: &str = "surgery_torsion";
    pub const SURGERY_DEGENERATE_FLAGS: &str = "surgery_degenerate_flags";
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `|a - b| / max(|a|, |b|)`, 0 when both vanish.
fn rel(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

fn bad() -> f64 {
    f64::INFINITY
}

/// The `u = 2` chain at `s = 1`: every quantity against its exact value.
fn geometric_point(tol: &Tolerances) -> CheckResult {
    let run = || -> crate::Result<Vec<f64>> {
        let p = RileyPoint::on_branch(cx(1.0, 0.0), Branch::Plus)?;
        let omega = cx(-0.5, 3f64.sqrt() / 2.0);
        let u = p.trace_u()?;
        let report = torsion::full_report(&p, tol)?;
        let tr = riley::longitude_trace(p.s, p.t)?;
        let tr_word = p.evaluate(&longitude_word())?.trace();
        let mut r = vec![
            (p.t - omega).norm(),
            p.residual * 100.0, // held to 1e-12
            (tr + 2.0).norm(),
            (tr_word + 2.0).norm(),
            (torsion::torsion_exterior_closed(u) + 2.0).norm(),
            (torsion::torsion_solid_torus_from_trace(&p, tol)? - 0.25).norm(),
            (torsion::torsion_solid_torus_closed(u, tol)? - 0.25).norm(),
            (torsion::torsion_surgered(u, tol)? + 0.5).norm(),
            (report.tau_m.unwrap_or(cx(f64::NAN, 0.0)) + 0.5).norm(),
        ];
        if !report.all_flags_pass() || !report.acyclic {
            r.push(bad());
        }
        Ok(r)
    };
    CheckResult::new(
        names::GEOMETRIC_POINT,
        run().unwrap_or_else(|_| vec![bad()]),
        1e-10,
    )
}

/// `u = 1`: the oracle must refuse and the report must say 0.
fn u_one(tol: &Tolerances) -> CheckResult {
    let run = || -> crate::Result<Vec<f64>> {
        let s = Cx::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let mut out = Vec::new();
        for b in [Branch::Plus, Branch::Minus] {
            let p = solve_t(s)?.get(b);
            let refused = matches!(torsion::exterior_oracle(&p, tol), Err(Error::NotAcyclic));
            out.push(if refused { 0.0 } else { bad() });
            let r = torsion::full_report(&p, tol)?;
            out.push(if r.acyclic {
                bad()
            } else {
                r.tau_m.map_or(bad(), |z| z.norm())
            });
        }
        Ok(out)
    };
    CheckResult::new(
        names::U_ONE_NOT_ACYCLIC,
        run().unwrap_or_else(|_| vec![bad()]),
        0.0,
    )
}

/// `u^2 = 5`: the report is marked degenerate and omits the torsion.
fn degenerate(tol: &Tolerances) -> CheckResult {
    let run = || -> crate::Result<Vec<f64>> {
        let s = cx((5f64.sqrt() + 1.0) / 2.0, 0.0);
        let mut out = Vec::new();
        for b in [Branch::Plus, Branch::Minus] {
            let r = torsion::full_report(&RileyPoint::on_branch(s, b)?, tol)?;
            out.push(if r.degenerate && r.tau_m.is_none() {
                0.0
            } else {
                bad()
            });
        }
        Ok(out)
    };
    CheckResult::new(
        names::DEGENERATE_FLAGGED,
        run().unwrap_or_else(|_| vec![bad()]),
        0.0,
    )
}

fn sample_checks(points: &[RileyPoint], tol: &Tolerances) -> Vec<CheckResult> {
    let mut magnitude = Vec::new();
    let mut ratio = Vec::new();
    let mut identity = Vec::new();
    let mut entries = Vec::new();
    let mut l21 = Vec::new();
    let mut solid = Vec::new();
    for p in points {
        let Ok(u) = p.trace_u() else {
            magnitude.push(bad());
            continue;
        };
        let closed = torsion::torsion_exterior_closed(u);
        match torsion::exterior_oracle(p, tol) {
            Ok(o) => {
                magnitude.push(rel(o.chain.value.norm(), closed.norm()));
                if let Some(r) = o.ratio {
                    ratio.push((r - closed).norm() / closed.norm());
                }
            }
            Err(_) => magnitude.push(bad()),
        }
        let uv = u.value();
        let expected = -uv.powi(4) + uv * uv * 5.0;
        match riley::longitude_trace(p.s, p.t) {
            Ok(tr) => identity.push(rel_diff(2.0 - tr, expected)),
            Err(_) => identity.push(bad()),
        }
        match (
            riley::longitude_matrix_closed(p, tol.variety),
            p.evaluate(&longitude_word()),
        ) {
            (Ok(c), Ok(w)) => {
                entries.push(c.max_abs_diff(&w));
                l21.push(c.a21.norm());
            }
            _ => {
                entries.push(bad());
                l21.push(bad());
            }
        }
        match (
            torsion::torsion_solid_torus_oracle(p, tol),
            torsion::torsion_solid_torus_from_trace(p, tol),
        ) {
            (Ok(chain), Ok(trace)) => solid.push(rel_diff(chain.value, trace)),
            _ => solid.push(bad()),
        }
    }
    vec![
        CheckResult::new(names::EXTERIOR_MAGNITUDE, magnitude, tol.compare),
        CheckResult::new(names::EXTERIOR_RATIO, ratio, tol.compare),
        CheckResult::new(names::TRACE_IDENTITY, identity, tol.compare),
        CheckResult::new(names::LONGITUDE_ENTRIES, entries, 1e-9),
        CheckResult::new(names::LONGITUDE_L21, l21, 1e-8),
        CheckResult::new(names::SOLID_TORUS, solid, tol.compare),
    ]
}

/// Basis independence on 20 random acyclic complexes, 10 seeds each.
fn chain_basis(seed: u64, tol: &Tolerances) -> CheckResult {
    let mut rng = rng_for(seed, 4);
    let shapes: [&[usize]; 5] = [&[1], &[2, 1], &[1, 2, 1], &[3, 2], &[2, 2, 1]];
    let mut residuals = Vec::new();
    for k in 0..20 {
        let complex = random_acyclic(&mut rng, shapes[k % shapes.len()]);
        let Ok(base) = complex.torsion(tol.rank) else {
            residuals.push(bad());
            continue;
        };
        for j in 0..10u64 {
            match complex.torsion_with_basis_perturbation(seed ^ (k as u64 * 1000 + j), tol.rank) {
                Ok(v) => residuals.push(rel_diff(v.value, base.value)),
                Err(_) => residuals.push(bad()),
            }
        }
    }
    CheckResult::new(names::CHAIN_BASIS, residuals, tol.compare)
}

/// `|tau(T^2)| = 1` for 100 commuting pairs.
fn torus_unit(seed: u64, tol: &Tolerances) -> CheckResult {
    let mut rng = rng_for(seed, 5);
    let residuals = (0..100).map(|_| {
        let (a, b) = sampling::commuting_pair(&mut rng);
        torsion::torsion_torus_oracle(&a, &b, tol).map_or(bad(), |t| (t.value.norm() - 1.0).abs())
    });
    CheckResult::new(
        names::TORUS_UNIT,
        residuals.collect::<Vec<_>>(),
        tol.compare,
    )
}

/// The surgery formula against the product of its factors.
fn product_identity(seed: u64, count: usize, tol: &Tolerances) -> CheckResult {
    let mut rng = rng_for(seed, 6);
    let residuals: Vec<f64> = (0..count)
        .map(|_| {
            let u: TraceU = sampling::random_u(&mut rng, 1e-3);
            let product = torsion::torsion_solid_torus_closed(u, tol)
                .map(|solid| torsion::torsion_exterior_closed(u) * solid);
            match (product, torsion::torsion_surgered(u, tol)) {
                (Ok(a), Ok(b)) => rel_diff(a, b),
                _ => bad(),
            }
        })
        .collect();
    CheckResult::new(names::PRODUCT_IDENTITY, residuals, 1e-12)
}

fn surgery_checks(grid: &GridSpec, tol: &Tolerances) -> Vec<CheckResult> {
    let meridian = SurgerySlope::new(1, 0)
        .and_then(|s| surgery::solve_surgery(s, grid, tol))
        .map_or(bad(), |o| o.solutions.len() as f64);

    let (mut residuals, mut torsions, mut flags) = (Vec::new(), Vec::new(), Vec::new());
    let b = SURGERY_SLOPE_BOUND;
    for p in -b..=b {
        for q in -b..=b {
            let Ok(slope) = SurgerySlope::new(p, q) else {
                continue;
            };
            let Ok(out) = surgery::solve_surgery(slope, grid, tol) else {
                residuals.push(bad());
                continue;
            };
            for sol in &out.solutions {
                residuals.push(sol.relation_residual.max(sol.variety_residual));
                let u = sol.u;
                let near5 = (u * u - 5.0).norm() <= surgery::DEGENERATE_U2_TOL;
                flags.push(if near5 == sol.is_degenerate() {
                    0.0
                } else {
                    bad()
                });
                if let Some(tau) = sol.torsion {
                    // Exterior times solid torus, the latter from the trace of
                    // the word-evaluated longitude at the solution itself.
                    let independent = sol
                        .point
                        .evaluate(&longitude_word())
                        .map(|l| -2.0 * (u - 1.0) / (2.0 - l.trace()));
                    torsions.push(
                        independent.map_or(bad(), |v| (tau - v).norm() / tau.norm().max(1.0)),
                    );
                }
                if sol.flags.iter().any(|f| f == "cross-check-failed") {
                    torsions.push(bad());
                }
            }
        }
    }
    vec![
        CheckResult::new(names::SURGERY_MERIDIAN, [meridian], 0.0),
        CheckResult::new(names::SURGERY_RESIDUALS, residuals, 1e-9),
        CheckResult::new(names::SURGERY_TORSION, torsions, tol.compare),
        CheckResult::new(names::SURGERY_DEGENERATE_FLAGS, flags, 0.0),
    ]
}

/// Runs every check. Random checks draw from independent streams of
/// `config.seed`; with `samples = 0` only fixtures run.
pub fn run(config: &VerifyConfig) -> VerifySummary {
    let tol = &config.tol;
    let points = sampling::variety_samples(&mut rng_for(config.seed, 1), config.samples);
    let mut checks = vec![geometric_point(tol), u_one(tol), degenerate(tol)];
    checks.extend(sample_checks(&points, tol));
    checks.push(chain_basis(config.seed, tol));
    checks.push(torus_unit(config.seed, tol));
    checks.push(product_identity(config.seed, 5 * config.samples, tol));
    checks.extend(surgery_checks(&config.grid, tol));
    VerifySummary {
        samples: config.samples,
        seed: config.seed,
        checks,
    }
}
