//! Riley's normal form for representations of the figure-eight knot group
//!
//! ```text
//!     pi_1 = < x, y | w x = y w >,   w = x y^-1 x^-1 y
//!     rho(x) = [[s, 1], [0, 1/s]],   rho(y) = [[s, 0], [-t, 1/s]]
//! ```
//!
//! `rho` is a homomorphism exactly when `R12(s, t) = 0`. The longitude is
//! `l = w^-1 w~` with `w~ = x^-1 y x y^-1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::numeric::{cx, cx_json, solve_quadratic, Cx, Mat2};
use crate::words::GroupWord;

/// `|s|` at or below this is treated as zero.
pub const S_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-", alias = "\u{2212}")]
    Minus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" => Ok(Branch::Plus),
            "-" | "\u{2212}" | "minus" => Ok(Branch::Minus),
            other => Err(Error::parse(
                "branch",
                format!("expected + or -, got {other:?}"),
            )),
        }
    }
}

fn check_s(s: Cx) -> Result<()> {
    if s.norm() <= S_ZERO_TOL || !s.is_finite() {
        Err(Error::SingularParameter)
    } else {
        Ok(())
    }
}

/// `R12(s,t) = 3 - 1/s^2 - s^2 + 3t - t/s^2 - s^2 t + t^2`.
pub fn riley_poly(s: Cx, t: Cx) -> Result<Cx> {
    check_s(s)?;
    let s2 = s * s;
    let is2 = s2.inv();
    Ok(3.0 - is2 - s2 + t * 3.0 - t * is2 - s2 * t + t * t)
}

/// `R21(s,t)`, which equals `t R12(s,t)`.
pub fn riley_companion(s: Cx, t: Cx) -> Result<Cx> {
    check_s(s)?;
    let s2 = s * s;
    let is2 = s2.inv();
    let t2 = t * t;
    Ok(t * 3.0 - t * is2 - s2 * t + t2 * 3.0 - t2 * is2 - s2 * t2 + t2 * t)
}

/// Scale against which `|R12|` is compared: `max(1, |s|^2, |s|^-2, |t|^2)`.
pub fn variety_scale(s: Cx, t: Cx) -> f64 {
    let s2 = s.norm_sqr();
    1f64.max(s2).max(s2.recip()).max(t.norm_sqr())
}

/// `rho(x)` and `rho(y)` for parameters `(s, t)`.
pub fn rep_matrices(s: Cx, t: Cx) -> Result<(Mat2, Mat2)> {
    check_s(s)?;
    let zero = cx(0.0, 0.0);
    let x = Mat2::new(s, cx(1.0, 0.0), zero, s.inv());
    let y = Mat2::new(s, zero, -t, s.inv());
    Ok((x, y))
}

/// `u = tr rho(x) = s + 1/s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceU(#[serde(with = "cx_json")] pub Cx);

impl TraceU {
    pub fn value(self) -> Cx {
        self.0
    }
}

pub fn trace_u(s: Cx) -> Result<TraceU> {
    check_s(s)?;
    Ok(TraceU(s + s.inv()))
}

/// A parameter pair with its branch label and `|R12|`.
///
/// Points need not lie on the variety (reducible points such as `t = 0`
/// are representable); operations that require membership check it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RileyPoint {
    #[serde(with = "cx_json")]
    pub s: Cx,
    #[serde(with = "cx_json")]
    pub t: Cx,
    pub branch: Branch,
    pub residual: f64,
}

/// Both solutions of `R12(s, t) = 0` in `t` for fixed `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPair {
    pub plus: RileyPoint,
    pub minus: RileyPoint,
    /// The discriminant vanishes and the two branches coincide.
    pub coincident: bool,
}

impl BranchPair {
    pub fn get(&self, b: Branch) -> RileyPoint {
        match b {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        }
    }
}

/// Solves `R12 = 0` for `t`:
/// `t = (1 - 3s^2 + s^4 +- sqrt(1 - 2s^2 - s^4 - 2s^6 + s^8)) / (2s^2)`,
/// the `+` branch taking the principal square root.
pub fn solve_t(s: Cx) -> Result<BranchPair> {
    check_s(s)?;
    // s^2 t^2 + b t + b = 0 with b = 3s^2 - 1 - s^4; discriminant b^2 - 4 s^2 b
    // is exactly 1 - 2s^2 - s^4 - 2s^6 + s^8.
    let s2 = s * s;
    let b = s2 * 3.0 - 1.0 - s2 * s2;
    let (tp, tm) = solve_quadratic(s2, b, b).map_err(|_| Error::SingularParameter)?;
    let coincident = (tp - tm).norm() <= 1e-8 * 1f64.max(tp.norm());
    Ok(BranchPair {
        plus: RileyPoint::with_branch(s, tp, Branch::Plus)?,
        minus: RileyPoint::with_branch(s, tm, Branch::Minus)?,
        coincident,
    })
}

impl RileyPoint {
    /// A point labelled with the branch of [`solve_t`] nearest to `t`.
    pub fn new(s: Cx, t: Cx) -> Result<Self> {
        let pair = solve_t(s)?;
        let branch = if (pair.minus.t - t).norm() < (pair.plus.t - t).norm() {
            Branch::Minus
        } else {
            Branch::Plus
        };
        RileyPoint::with_branch(s, t, branch)
    }

    pub fn with_branch(s: Cx, t: Cx, branch: Branch) -> Result<Self> {
        let residual = riley_poly(s, t)?.norm();
        Ok(RileyPoint {
            s,
            t,
            branch,
            residual,
        })
    }

    pub fn on_branch(s: Cx, branch: Branch) -> Result<Self> {
        Ok(solve_t(s)?.get(branch))
    }

    pub fn is_on_variety(&self, tol: f64) -> bool {
        self.residual <= tol * variety_scale(self.s, self.t)
    }

    pub fn require_variety(&self, tol: f64) -> Result<()> {
        if self.is_on_variety(tol) {
            Ok(())
        } else {
            Err(Error::OffVariety(self.residual))
        }
    }

    /// `t = 0` makes `rho(x)` and `rho(y)` share the eigenvector `e_1`.
    pub fn is_reducible(&self, tol: f64) -> bool {
        self.t.norm() <= tol
    }

    pub fn rep_matrices(&self) -> Result<(Mat2, Mat2)> {
        rep_matrices(self.s, self.t)
    }

    pub fn trace_u(&self) -> Result<TraceU> {
        trace_u(self.s)
    }

    /// `rho(g)` by direct word evaluation.
    pub fn evaluate(&self, word: &GroupWord) -> Result<Mat2> {
        let (x, y) = self.rep_matrices()?;
        Ok(word.evaluate(&x, &y))
    }
}

/// `w = x y^-1 x^-1 y`.
pub fn w_word() -> GroupWord {
    GroupWord::parse("xYXy").expect("static word")
}

/// `w~ = x^-1 y x y^-1`.
pub fn w_tilde_word() -> GroupWord {
    GroupWord::parse("XyxY").expect("static word")
}

/// The relator `w x w^-1 y^-1` of `w x = y w`.
pub fn knot_relator() -> GroupWord {
    let w = w_word();
    w.concat(&GroupWord::parse("x").expect("static word"))
        .concat(&w.inverse())
        .concat(&GroupWord::parse("Y").expect("static word"))
}

/// The longitude `l = w^-1 w~`, reduced: `YxyXXyxY`.
pub fn longitude_word() -> GroupWord {
    w_word().inverse().concat(&w_tilde_word())
}

/// Closed-form longitude entries, valid on the variety.
pub fn longitude_entries(s: Cx, t: Cx) -> Result<Mat2> {
    check_s(s)?;
    let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
    let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
    let (is, is2, is3, is4) = (s.inv(), s2.inv(), s3.inv(), s4.inv());
    let l11 = 1.0 - t * is2 + s2 * t - t2 + t2 * is4 - t2 * is2 + s2 * t2 - t3 - t3 * is2;
    let l12 = t * is3 + s3 * t - t2 * is - s * t2;
    let l21 =
        t2 * is3 - t2 * is * 2.0 - s * t2 * 2.0 + s3 * t2 + t3 * is3 - t3 * is * 2.0 - s * t3 * 2.0
            + s3 * t3
            - t4 * is
            - s * t4;
    let l22 = 1.0 + t * is2 - s2 * t - t2 + t2 * is2 - s2 * t2 + s4 * t2 - t3 - s2 * t3;
    Ok(Mat2::new(l11, l12, l21, l22))
}

/// `rho(l)` from the closed form; the point must lie on the variety.
pub fn longitude_matrix_closed(p: &RileyPoint, tol: f64) -> Result<Mat2> {
    p.require_variety(tol)?;
    longitude_entries(p.s, p.t)
}

/// `tr rho(l) = 2 - 2t^2 + t^2/s^4 + s^4 t^2 - 2t^3 - t^3/s^2 - s^2 t^3`.
pub fn longitude_trace(s: Cx, t: Cx) -> Result<Cx> {
    check_s(s)?;
    let (s2, s4) = (s * s, s * s * s * s);
    let (t2, t3) = (t * t, t * t * t);
    Ok(2.0 - t2 * 2.0 + t2 / s4 + s4 * t2 - t3 * 2.0 - t3 / s2 - s2 * t3)
}

/// True iff some peripheral element among `x`, `l`, `x l` has trace away
/// from 2, which is the acyclicity criterion on the boundary torus.
pub fn is_peripherally_acyclic(p: &RileyPoint, tol: &Tolerances) -> bool {
    let Ok(x) = p.rep_matrices().map(|m| m.0) else {
        return false;
    };
    let Ok(l) = p.evaluate(&longitude_word()) else {
        return false;
    };
    [x.trace(), l.trace(), (x * l).trace()]
        .iter()
        .any(|tr| (tr - 2.0).norm() > tol.trace)
}
