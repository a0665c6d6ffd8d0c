//! Closed-form torsions for surgeries on the figure-eight knot and the
//! chain-complex oracles that check them.
//!
//! With `u = tr rho(x)`:
//!
//! ```text
//!     tau(E(K)) = -2(u - 1)
//!     tau(N)    = 1 / (2 - tr rho(l)) = -1 / (u^2 (u^2 - 5))
//!     tau(M)    = tau(E(K)) tau(N)    = 2(u - 1) / (u^2 (u^2 - 5))
//! ```
//!
//! Twisted complexes of a two-generator presentation with one relator `r`
//! use the transposed Fox matrices so that boundaries act on column
//! vectors:
//!
//! ```text
//!     C_2 = C^2 --[F(dr/dx)^T ; F(dr/dy)^T]--> C_1 = C^4 --[F(x-1)^T, F(y-1)^T]--> C_0 = C^2
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainComplex, TorsionValue};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::CxMatrix;
use crate::numeric::{cx, cx_json, fmt_f64, rel_diff, Cx, Mat2};
use crate::riley::{self, RileyPoint, TraceU};
use crate::words::{Generator, GroupWord};

pub fn torsion_exterior_closed(u: TraceU) -> Cx {
    -2.0 * (u.value() - 1.0)
}

fn degeneracy(u: TraceU, tol: &Tolerances) -> Result<Cx> {
    let u = u.value();
    let d = u * u * (u * u - 5.0);
    if d.norm() <= tol.degeneracy {
        Err(Error::DegenerateU { re: u.re, im: u.im })
    } else {
        Ok(d)
    }
}

/// `-1 / (u^2 (u^2 - 5))`.
pub fn torsion_solid_torus_closed(u: TraceU, tol: &Tolerances) -> Result<Cx> {
    Ok(-degeneracy(u, tol)?.inv())
}

/// `2(u - 1) / (u^2 (u^2 - 5))`.
pub fn torsion_surgered(u: TraceU, tol: &Tolerances) -> Result<Cx> {
    let d = degeneracy(u, tol)?;
    Ok(2.0 * (u.value() - 1.0) / d)
}

/// `1 / (2 - tr rho(l))` with the trace from its closed form.
pub fn torsion_solid_torus_from_trace(p: &RileyPoint, tol: &Tolerances) -> Result<Cx> {
    let tr = riley::longitude_trace(p.s, p.t)?;
    let gap = 2.0 - tr;
    if gap.norm() <= tol.trace {
        return Err(Error::NotAcyclic);
    }
    Ok(gap.inv())
}

/// Twisted complex of the presentation 2-complex of `<x, y | relator>`.
pub fn presentation_complex(
    relator: &GroupWord,
    imgx: &Mat2,
    imgy: &Mat2,
    tol: &Tolerances,
) -> Result<ChainComplex> {
    let e = Mat2::identity();
    let dx = relator.fox_derivative(Generator::X).evaluate(imgx, imgy);
    let dy = relator.fox_derivative(Generator::Y).evaluate(imgx, imgy);
    let d2 = CxMatrix::from_blocks(&[vec![dx.transpose()], vec![dy.transpose()]])?;
    let d1 = CxMatrix::from_blocks(&[vec![(*imgx - e).transpose(), (*imgy - e).transpose()]])?;
    ChainComplex::with_tolerance(vec![2, 4, 2], vec![d1, d2], tol.complex)
}

/// The twisted complex of the knot exterior at a variety point.
pub fn exterior_complex(p: &RileyPoint, tol: &Tolerances) -> Result<ChainComplex> {
    p.require_variety(tol.variety)?;
    let (x, y) = p.rep_matrices()?;
    presentation_complex(&riley::knot_relator(), &x, &y, tol)
}

/// `det F(dr/dy) / det F(x - 1)`; needs `det(rho(x) - E) = 2 - u` away from 0.
pub fn exterior_ratio(p: &RileyPoint, tol: &Tolerances) -> Result<Cx> {
    p.require_variety(tol.variety)?;
    let (x, y) = p.rep_matrices()?;
    let denom = (x - Mat2::identity()).det();
    if denom.norm() <= tol.trace {
        return Err(Error::NotAcyclic);
    }
    let dy = riley::knot_relator()
        .fox_derivative(Generator::Y)
        .evaluate(&x, &y);
    Ok(dy.det() / denom)
}

/// Both oracle routes for the exterior torsion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorOracle {
    /// Torsion of the full twisted chain complex.
    pub chain: TorsionValue,
    /// The determinant ratio, when `2 - u` is not zero.
    #[serde(with = "cx_json::option")]
    pub ratio: Option<Cx>,
}

impl ExteriorOracle {
    pub fn routes_agree(&self, tol: f64) -> bool {
        self.ratio.is_none_or(|r| self.chain.agrees_with(r, tol))
    }
}

/// Both routes at once. A torsion of magnitude at most `tol.degeneracy` is
/// reported as `NotAcyclic`: the basis change is then numerically singular,
/// which is what happens near `u = 1` where the closed form vanishes.
pub fn exterior_oracle(p: &RileyPoint, tol: &Tolerances) -> Result<ExteriorOracle> {
    let complex = exterior_complex(p, tol)?;
    let chain = complex.torsion(tol.rank)?;
    if chain.value.norm() <= tol.degeneracy {
        return Err(Error::NotAcyclic);
    }
    let ratio = match exterior_ratio(p, tol) {
        Ok(r) => Some(r),
        Err(Error::NotAcyclic) => None,
        Err(e) => return Err(e),
    };
    Ok(ExteriorOracle {
        chain: TorsionValue::up_to_sign(chain.value),
        ratio,
    })
}

/// Exterior torsion from Fox calculus, defined up to sign.
pub fn torsion_exterior_oracle(p: &RileyPoint, tol: &Tolerances) -> Result<TorsionValue> {
    exterior_oracle(p, tol).map(|o| o.chain)
}

/// `0 -> C^2 --(L - E)--> C^2 -> 0`, the twisted complex of a circle.
pub fn circle_complex(image: &Mat2, tol: &Tolerances) -> Result<ChainComplex> {
    let d = CxMatrix::from_blocks(&[vec![*image - Mat2::identity()]])?;
    ChainComplex::with_tolerance(vec![2, 2], vec![d], tol.complex)
}

/// Solid-torus torsion from the circle complex of `rho(l)` (word evaluation).
pub fn torsion_solid_torus_oracle(p: &RileyPoint, tol: &Tolerances) -> Result<TorsionValue> {
    let l = p.evaluate(&riley::longitude_word())?;
    circle_complex(&l, tol)?.torsion(tol.rank)
}

/// The relator `x y x^-1 y^-1` of the torus group.
pub fn torus_relator() -> GroupWord {
    GroupWord::parse("xyXY").expect("static word")
}

/// Torsion of the torus for commuting peripheral images.
pub fn torsion_torus_oracle(a: &Mat2, b: &Mat2, tol: &Tolerances) -> Result<TorsionValue> {
    let complex = presentation_complex(&torus_relator(), a, b, tol)?;
    Ok(TorsionValue::up_to_sign(complex.torsion(tol.rank)?.value))
}

/// Names of the consistency checks recorded in a [`TorsionReport`].
pub mod flags {
    pub const CLOSED_VS_ORACLE: &str = "exterior_closed_vs_oracle";
    pub const RATIO_VS_CHAIN: &str = "exterior_ratio_vs_chain";
    pub const SOLID_TRACE_VS_U: &str = "solid_trace_vs_u_closed";
    pub const SOLID_TRACE_VS_CHAIN: &str = "solid_trace_vs_circle_complex";
    pub const PRODUCT_VS_THEOREM: &str = "product_vs_surgery_formula";
}

/// All torsion quantities at one point with their cross-checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub point: RileyPoint,
    #[serde(with = "cx_json")]
    pub u: Cx,
    #[serde(with = "cx_json")]
    pub tau_exterior_closed: Cx,
    pub tau_exterior_oracle: Option<TorsionValue>,
    #[serde(with = "cx_json::option")]
    pub tau_solid_closed: Option<Cx>,
    #[serde(with = "cx_json::option")]
    pub tau_solid_trace: Option<Cx>,
    #[serde(with = "cx_json::option")]
    pub tau_surgered: Option<Cx>,
    /// Torsion of `M` as reported: 0 for non-acyclic, absent when degenerate.
    #[serde(with = "cx_json::option")]
    pub tau_m: Option<Cx>,
    pub acyclic: bool,
    pub degenerate: bool,
    pub consistency_flags: BTreeMap<String, bool>,
    pub notes: Vec<String>,
}

impl TorsionReport {
    pub fn all_flags_pass(&self) -> bool {
        self.consistency_flags.values().all(|v| *v)
    }

    pub const CSV_HEADER: [&'static str; 21] = [
        "s_re",
        "s_im",
        "t_re",
        "t_im",
        "branch",
        "u_re",
        "u_im",
        "tau_ext_closed_re",
        "tau_ext_closed_im",
        "tau_ext_oracle_re",
        "tau_ext_oracle_im",
        "tau_solid_closed_re",
        "tau_solid_closed_im",
        "tau_solid_trace_re",
        "tau_solid_trace_im",
        "tau_surgered_re",
        "tau_surgered_im",
        "tau_m_re",
        "tau_m_im",
        "status",
        "flags",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let pair = |z: Option<Cx>| match z {
            Some(z) => [fmt_f64(z.re), fmt_f64(z.im)],
            None => [String::new(), String::new()],
        };
        let mut rec = Vec::with_capacity(Self::CSV_HEADER.len());
        rec.extend(pair(Some(self.point.s)));
        rec.extend(pair(Some(self.point.t)));
        rec.push(self.point.branch.to_string());
        rec.extend(pair(Some(self.u)));
        rec.extend(pair(Some(self.tau_exterior_closed)));
        rec.extend(pair(self.tau_exterior_oracle.map(|t| t.value)));
        rec.extend(pair(self.tau_solid_closed));
        rec.extend(pair(self.tau_solid_trace));
        rec.extend(pair(self.tau_surgered));
        rec.extend(pair(self.tau_m));
        rec.push(self.status().to_string());
        rec.push(
            self.consistency_flags
                .iter()
                .map(|(k, v)| format!("{k}={}", if *v { "pass" } else { "fail" }))
                .collect::<Vec<_>>()
                .join(";"),
        );
        rec
    }

    pub fn status(&self) -> &'static str {
        if self.degenerate {
            "degenerate"
        } else if !self.acyclic {
            "non-acyclic"
        } else {
            "acyclic"
        }
    }
}

/// Assembles every torsion quantity at `p`.
///
/// Degenerate `u` (`u^2 (u^2 - 5) = 0`) suppresses `tau_m`; reducible or
/// otherwise non-acyclic points report `tau_m = 0`. Only an off-variety
/// irreducible point is an error.
pub fn full_report(p: &RileyPoint, tol: &Tolerances) -> Result<TorsionReport> {
    let u = p.trace_u()?;
    let mut report = TorsionReport {
        point: *p,
        u: u.value(),
        tau_exterior_closed: torsion_exterior_closed(u),
        tau_exterior_oracle: None,
        tau_solid_closed: None,
        tau_solid_trace: None,
        tau_surgered: None,
        tau_m: None,
        acyclic: false,
        degenerate: false,
        consistency_flags: BTreeMap::new(),
        notes: Vec::new(),
    };

    match torsion_solid_torus_closed(u, tol) {
        Ok(v) => report.tau_solid_closed = Some(v),
        Err(e) => {
            report.degenerate = true;
            report.notes.push(format!("degenerate: {e}"));
        }
    }
    report.tau_surgered = torsion_surgered(u, tol).ok();

    if p.is_reducible(tol.reducible) {
        report
            .notes
            .push("reducible point (t = 0): representation is not acyclic".into());
        if !report.degenerate {
            report.tau_m = Some(cx(0.0, 0.0));
        }
        return Ok(report);
    }
    p.require_variety(tol.variety)?;

    let peripheral = riley::is_peripherally_acyclic(p, tol);
    if !peripheral {
        report.notes.push("boundary torus is not acyclic".into());
    }

    let mut exterior_acyclic = true;
    match exterior_oracle(p, tol) {
        Ok(o) => {
            report.tau_exterior_oracle = Some(o.chain);
            report.consistency_flags.insert(
                flags::CLOSED_VS_ORACLE.into(),
                o.chain.agrees_with(report.tau_exterior_closed, tol.compare),
            );
            if o.ratio.is_some() {
                report
                    .consistency_flags
                    .insert(flags::RATIO_VS_CHAIN.into(), o.routes_agree(tol.compare));
            } else {
                report
                    .notes
                    .push("det(rho(x) - E) = 0: ratio route skipped".into());
            }
        }
        Err(Error::NotAcyclic) => {
            exterior_acyclic = false;
            report
                .notes
                .push("exterior: twisted complex is not acyclic".into());
        }
        Err(e) => return Err(e),
    }

    let mut solid_acyclic = true;
    match torsion_solid_torus_from_trace(p, tol) {
        Ok(v) => {
            report.tau_solid_trace = Some(v);
            if let Some(c) = report.tau_solid_closed {
                report.consistency_flags.insert(
                    flags::SOLID_TRACE_VS_U.into(),
                    rel_diff(v, c) <= tol.compare,
                );
            }
            if let Ok(chain) = torsion_solid_torus_oracle(p, tol) {
                report.consistency_flags.insert(
                    flags::SOLID_TRACE_VS_CHAIN.into(),
                    rel_diff(chain.value, v) <= tol.compare,
                );
            }
        }
        Err(Error::NotAcyclic) => {
            solid_acyclic = false;
            report
                .notes
                .push("solid torus: tr rho(l) = 2, not acyclic".into());
        }
        Err(e) => return Err(e),
    }

    if let (Some(solid), Some(surgered)) = (report.tau_solid_closed, report.tau_surgered) {
        report.consistency_flags.insert(
            flags::PRODUCT_VS_THEOREM.into(),
            rel_diff(report.tau_exterior_closed * solid, surgered) <= tol.compare,
        );
    }

    report.acyclic = peripheral && exterior_acyclic && solid_acyclic;
    if !report.degenerate {
        report.tau_m = Some(if report.acyclic {
            report
                .tau_surgered
                .expect("non-degenerate u has a surgery torsion")
        } else {
            cx(0.0, 0.0)
        });
    }
    Ok(report)
}
