//! Variety points whose representation factors through a Dehn surgery.
//!
//! A `p/q` surgery adds the relation `x^p l^q = 1`. On the variety `rho(x)`
//! and `rho(l)` are both upper triangular, so away from `s^2 = 1` the
//! relation reduces to the scalar equation `s^p l11^q = 1`. Newton's method
//! runs on the square system `(R12, s^p l11^q - 1)` and every candidate is
//! then checked against the matrix relation, which is authoritative.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::numeric::{cx_json, fmt_f64, is_finite, Cx, Mat2};
use crate::riley::{self, longitude_word, solve_t, Branch, RileyPoint};
use crate::torsion::{self, torsion_surgered};

/// `|u^2 - 5|` at or below this marks a row "degenerate".
pub const DEGENERATE_U2_TOL: f64 = 1e-6;

/// `|l21|` allowed before a point is rejected, relative to `max(1, max|l_ij|)`.
pub const L21_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct SurgerySlope {
    p: i64,
    q: i64,
}

impl SurgerySlope {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if (p, q) == (0, 0) || gcd(p.unsigned_abs(), q.unsigned_abs()) != 1 {
            return Err(Error::InvalidSlope { p, q });
        }
        Ok(SurgerySlope { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// The representative of `{(p, q), (-p, -q)}` with `p > 0`, or `q > 0`
    /// when `p = 0`. Both describe the same relation.
    pub fn canonical(&self) -> Self {
        if self.p < 0 || (self.p == 0 && self.q < 0) {
            SurgerySlope {
                p: -self.p,
                q: -self.q,
            }
        } else {
            *self
        }
    }
}

impl TryFrom<(i64, i64)> for SurgerySlope {
    type Error = Error;
    fn try_from((p, q): (i64, i64)) -> Result<Self> {
        SurgerySlope::new(p, q)
    }
}

impl From<SurgerySlope> for (i64, i64) {
    fn from(s: SurgerySlope) -> Self {
        (s.p, s.q)
    }
}

impl std::fmt::Display for SurgerySlope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The eigenvalue `l11` of `rho(l)` that pairs with the eigenvalue `s` of
/// `rho(x)`. Fails when `rho(l)` is not upper triangular.
pub fn aligned_longitude_eigenvalue(p: &RileyPoint) -> Result<Cx> {
    let l = riley::longitude_entries(p.s, p.t)?;
    if l.a21.norm() > L21_TOL * l.max_abs().max(1.0) {
        return Err(Error::OffVariety(l.a21.norm()));
    }
    Ok(l.a11)
}

/// `(s^p l11^q - 1, ||rho(x)^p rho(l)^q - E||)` with the Frobenius norm and
/// `rho(l)` evaluated from its word.
pub fn surgery_residual(p: &RileyPoint, slope: SurgerySlope) -> Result<(Cx, f64)> {
    let l = riley::longitude_entries(p.s, p.t)?;
    let scalar = p.s.powi(slope.p as i32) * l.a11.powi(slope.q as i32) - 1.0;
    let (x, _) = p.rep_matrices()?;
    let lw = p.evaluate(&longitude_word())?;
    let m = x.powi(slope.p)?.checked_mul(&lw.powi(slope.q)?)?;
    Ok((scalar, (m - Mat2::identity()).norm()))
}

/// Starting points: `s` on circles of the given radii at `angles` evenly
/// spaced arguments (offset by half a step so the real axis is avoided),
/// each paired with both roots `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub radii: Vec<f64>,
    pub angles: usize,
    pub max_iter: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            radii: vec![0.5, 1.0, 2.0],
            angles: 24,
            max_iter: 50,
        }
    }
}

impl GridSpec {
    pub fn seeds(&self) -> Vec<(Cx, Branch)> {
        let mut out = Vec::with_capacity(self.radii.len() * self.angles * 2);
        for &r in &self.radii {
            for k in 0..self.angles {
                let theta = TAU * (k as f64 + 0.5) / self.angles as f64;
                let s = Cx::from_polar(r, theta);
                out.push((s, Branch::Plus));
                out.push((s, Branch::Minus));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.angles == 0 || self.max_iter == 0 || self.radii.is_empty() {
            return Err(Error::parse(
                "grid",
                "needs at least one radius, angle and iteration",
            ));
        }
        if let Some(r) = self.radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::parse("grid", format!("radius {r} must be positive")));
        }
        Ok(())
    }
}

/// The Newton system and its Jacobian at `(s, t)`.
pub fn newton_system(s: Cx, t: Cx, slope: SurgerySlope) -> Result<([Cx; 2], [[Cx; 2]; 2])> {
    let r = riley::riley_poly(s, t)?;
    let l = riley::longitude_entries(s, t)?.a11;
    let (is, s2, t2) = (s.inv(), s * s, t * t);
    let (is2, is3) = (is * is, is * is * is);
    let (is4, is5) = (is3 * is, is3 * is2);

    let dr_ds = is3 * 2.0 - s * 2.0 + t * is3 * 2.0 - s * t * 2.0;
    let dr_dt = 3.0 - is2 - s2 + t * 2.0;
    let dl_ds = t * is3 * 2.0 + s * t * 2.0 - t2 * is5 * 4.0
        + t2 * is3 * 2.0
        + s * t2 * 2.0
        + t2 * t * is3 * 2.0;
    let dl_dt = -is2 + s2 - t * 2.0 + t * is4 * 2.0 - t * is2 * 2.0 + s2 * t * 2.0
        - t2 * 3.0
        - t2 * is2 * 3.0;

    let (pe, qe) = (slope.p as i32, slope.q as i32);
    let sp = s.powi(pe);
    let lq = l.powi(qe);
    let f2 = sp * lq - 1.0;
    // d(s^p l^q) = s^p l^q (p/s ds + q/l dl)
    let g = sp * lq;
    let (ps, ql) = (is * slope.p as f64, l.inv() * slope.q as f64);
    let d2_ds = g * (ps + ql * dl_ds);
    let d2_dt = g * ql * dl_dt;
    let f = [r, f2];
    if !f.iter().all(|z| is_finite(*z)) {
        return Err(Error::Overflow);
    }
    Ok((f, [[dr_ds, dr_dt], [d2_ds, d2_dt]]))
}

fn fnorm(f: &[Cx; 2]) -> f64 {
    f[0].norm().max(f[1].norm())
}

/// Damped Newton from `(s, t)`; returns the last iterate.
fn newton(mut s: Cx, mut t: Cx, slope: SurgerySlope, max_iter: usize) -> Result<(Cx, Cx)> {
    let (mut f, mut j) = newton_system(s, t, slope)?;
    for _ in 0..max_iter {
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.norm() == 0.0 || !is_finite(det) {
            return Err(Error::NoConvergence("singular Jacobian".into()));
        }
        let ds = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dt = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let current = fnorm(&f);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..20 {
            let (sn, tn) = (s - ds * lambda, t - dt * lambda);
            if let Ok(next) = newton_system(sn, tn, slope) {
                if sn.norm() > riley::S_ZERO_TOL && fnorm(&next.0) <= current {
                    accepted = Some((sn, tn, next));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((sn, tn, next)) = accepted else {
            // No decrease along the Newton direction: a local minimum or
            // already at rounding level.
            break;
        };
        let step = (sn - s).norm() + (tn - t).norm();
        (s, t, (f, j)) = (sn, tn, next);
        if fnorm(&f) == 0.0 || step <= 1e-15 * (1.0 + s.norm() + t.norm()) {
            break;
        }
    }
    Ok((s, t))
}

/// One character solving the surgery relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgerySolution {
    pub point: RileyPoint,
    #[serde(with = "cx_json")]
    pub u: Cx,
    #[serde(with = "cx_json")]
    pub trace_l: Cx,
    #[serde(with = "cx_json")]
    pub lambda: Cx,
    pub variety_residual: f64,
    pub relation_residual: f64,
    /// `2(u-1)/(u^2(u^2-5))`; absent at degenerate `u`.
    #[serde(with = "cx_json::option")]
    pub torsion: Option<Cx>,
    pub flags: Vec<String>,
}

impl SurgerySolution {
    pub fn is_degenerate(&self) -> bool {
        self.flags.iter().any(|f| f == "degenerate")
    }

    pub fn is_parabolic(&self) -> bool {
        self.flags.iter().any(|f| f == "parabolic")
    }
}

/// A seed that did not produce a verified solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    #[serde(with = "cx_json")]
    pub s0: Cx,
    pub branch: Branch,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryOutcome {
    pub slope: SurgerySlope,
    pub solutions: Vec<SurgerySolution>,
    pub failures: Vec<SeedFailure>,
}

/// Replaces `s` by `1/s` when `|s| < 1`; `(1/s, t)` carries the same
/// character since `R12` and `tr rho(l)` are symmetric under `s -> 1/s`.
fn canonical_point(s: Cx, t: Cx) -> Result<RileyPoint> {
    let s = if s.norm() < 1.0 { s.inv() } else { s };
    RileyPoint::new(s, t)
}

fn certify(s: Cx, t: Cx, slope: SurgerySlope, tol: &Tolerances) -> Result<SurgerySolution> {
    let point = canonical_point(s, t)?;
    let variety_residual = point.residual;
    if variety_residual > tol.solver {
        return Err(Error::NoConvergence(format!(
            "|R12| = {variety_residual:.3e}"
        )));
    }
    let (_, relation_residual) = surgery_residual(&point, slope)?;
    // NaN residuals fail too
    if relation_residual.is_nan() || relation_residual > tol.solver {
        return Err(Error::NoConvergence(format!(
            "matrix relation residual {relation_residual:.3e}"
        )));
    }
    let lambda = aligned_longitude_eigenvalue(&point)?;
    let u = point.trace_u()?;
    let trace_l = riley::longitude_trace(point.s, point.t)?;

    let mut flags = Vec::new();
    let uv = u.value();
    if (uv * uv - 5.0).norm() <= DEGENERATE_U2_TOL {
        flags.push("degenerate".to_string());
    }
    if (point.s * point.s - 1.0).norm() <= tol.parabolic {
        flags.push("parabolic".to_string());
    }
    if point.is_reducible(tol.reducible) {
        flags.push("reducible".to_string());
    }
    // The report recomputes the torsion through the trace and chain-complex
    // routes; any disagreement is surfaced as a flag.
    let report = torsion::full_report(&point, tol)?;
    if !report.degenerate && !report.acyclic {
        flags.push("non-acyclic".to_string());
    }
    if !report.all_flags_pass() {
        flags.push("cross-check-failed".to_string());
    }
    let torsion = torsion_surgered(u, tol).ok();
    Ok(SurgerySolution {
        point,
        u: uv,
        trace_l,
        lambda,
        variety_residual,
        relation_residual,
        torsion,
        flags,
    })
}

/// `|u|`, then `arg u` in `(-pi, pi]`, both rounded to 1e-8 so rounding
/// noise in `u` cannot reorder ties; then `s` and `t` as tie-breakers.
fn order_key(a: &SurgerySolution, b: &SurgerySolution) -> Ordering {
    let quantize = |x: f64| (x * 1e8).round() as i64;
    let coarse = |x: &SurgerySolution| {
        let mut arg = x.u.arg();
        if arg <= -PI + 1e-9 {
            arg = PI;
        }
        (quantize(x.u.norm()), quantize(arg))
    };
    let fine = |x: &SurgerySolution| [x.point.s.re, x.point.s.im, x.point.t.re, x.point.t.im];
    coarse(a).cmp(&coarse(b)).then_with(|| {
        fine(a)
            .iter()
            .zip(fine(b).iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn same_character(a: &SurgerySolution, b: &SurgerySolution, tol: f64) -> bool {
    let scale = |z: Cx, w: Cx| 1f64.max(z.norm()).max(w.norm());
    (a.u - b.u).norm() <= tol * scale(a.u, b.u)
        && (a.trace_l - b.trace_l).norm() <= tol * scale(a.trace_l, b.trace_l)
}

/// Keeps one solution per character (the one with the smallest relation
/// residual) and sorts by `|u|`, then `arg u`.
pub fn canonical_order(mut solutions: Vec<SurgerySolution>, tol: f64) -> Vec<SurgerySolution> {
    solutions.sort_by(order_key);
    let mut kept: Vec<SurgerySolution> = Vec::new();
    for s in solutions {
        match kept.iter_mut().find(|k| same_character(k, &s, 10.0 * tol)) {
            Some(k) if s.relation_residual < k.relation_residual => *k = s,
            Some(_) => {}
            None => kept.push(s),
        }
    }
    kept.sort_by(order_key);
    kept
}

/// Newton from every grid seed; verified solutions are deduplicated by
/// `(u, tr rho(l))` and returned in canonical order.
pub fn solve_surgery(
    slope: SurgerySlope,
    grid: &GridSpec,
    tol: &Tolerances,
) -> Result<SurgeryOutcome> {
    grid.validate()?;
    let work = slope.canonical();
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for (s0, branch) in grid.seeds() {
        let attempt = solve_t(s0)
            .and_then(|pair| {
                let start = pair.get(branch);
                newton(start.s, start.t, work, grid.max_iter)
            })
            .and_then(|(s, t)| certify(s, t, slope, tol));
        match attempt {
            Ok(sol) => found.push(sol),
            Err(e) => failures.push(SeedFailure {
                s0,
                branch,
                reason: e.to_string(),
            }),
        }
    }
    Ok(SurgeryOutcome {
        slope,
        solutions: canonical_order(found, tol.solver),
        failures,
    })
}

/// Column names of the surgery table.
pub const CSV_HEADER: [&str; 16] = [
    "s_re",
    "s_im",
    "t_re",
    "t_im",
    "branch",
    "u_re",
    "u_im",
    "trl_re",
    "trl_im",
    "lambda_re",
    "lambda_im",
    "tau_re",
    "tau_im",
    "res_variety",
    "res_relation",
    "flags",
];

impl SurgerySolution {
    pub fn csv_record(&self) -> Vec<String> {
        let pair = |z: Cx| [fmt_f64(z.re), fmt_f64(z.im)];
        let mut rec = Vec::with_capacity(CSV_HEADER.len());
        rec.extend(pair(self.point.s));
        rec.extend(pair(self.point.t));
        rec.push(self.point.branch.to_string());
        rec.extend(pair(self.u));
        rec.extend(pair(self.trace_l));
        rec.extend(pair(self.lambda));
        match self.torsion {
            Some(z) => rec.extend(pair(z)),
            None => rec.extend([String::new(), String::new()]),
        }
        rec.push(fmt_f64(self.variety_residual));
        rec.push(fmt_f64(self.relation_residual));
        rec.push(self.flags.join(";"));
        rec
    }
}

/// The solutions of `slope` on the default grid, as table rows.
pub fn surgery_table(slope: SurgerySlope, tol: &Tolerances) -> Result<Vec<SurgerySolution>> {
    Ok(solve_surgery(slope, &GridSpec::default(), tol)?.solutions)
}

/// Writes `rows` as CSV with [`CSV_HEADER`].
pub fn write_csv<W: std::io::Write>(rows: &[SurgerySolution], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::parse("csv", e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.csv_record()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::parse("csv", e.to_string()))?;
    Ok(())
}
