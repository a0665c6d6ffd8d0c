//! Tolerances shared by the library and the command line.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on `|R12(s,t)|`, scaled by `max(1, |s|^2, |s|^-2, |t|^2)`.
    pub variety: f64,
    /// Relative agreement required between independently computed values.
    pub compare: f64,
    /// `|u^2 (u^2 - 5)|` at or below this is degenerate.
    pub degeneracy: f64,
    /// Relative pivot threshold for rank decisions.
    pub rank: f64,
    /// Relative bound on `d_i d_{i+1}` for chain complexes.
    pub complex: f64,
    /// Residual bound for surgery solutions (variety and relation).
    pub solver: f64,
    /// `|s^2 - 1|` at or below this marks a parabolic meridian.
    pub parabolic: f64,
    /// `|t|` at or below this marks a reducible point.
    pub reducible: f64,
    /// Distance from 2 below which a trace counts as 2.
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            variety: 1e-10,
            compare: 1e-8,
            degeneracy: 1e-8,
            rank: 1e-9,
            complex: 1e-10,
            solver: 1e-9,
            parabolic: 1e-6,
            reducible: 1e-8,
            trace: 1e-9,
        }
    }
}

impl Tolerances {
    /// Names of non-positive (or non-finite) fields.
    pub fn invalid_fields(&self) -> Vec<&'static str> {
        [
            ("variety", self.variety),
            ("compare", self.compare),
            ("degeneracy", self.degeneracy),
            ("rank", self.rank),
            ("complex", self.complex),
            ("solver", self.solver),
            ("parabolic", self.parabolic),
            ("reducible", self.reducible),
            ("trace", self.trace),
        ]
        .into_iter()
        .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
        .map(|(k, _)| k)
        .collect()
    }
}
