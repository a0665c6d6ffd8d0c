//! Torsion of finite based chain complexes over the complex numbers.
//!
//! A complex `0 -> C_m -> ... -> C_1 -> C_0 -> 0` is stored as the list of
//! dimensions `dim C_0, ..., dim C_m` together with the boundary matrices
//! `d_1, ..., d_m`, where `d_i` is a `dim C_{i-1} x dim C_i` matrix in the
//! preferred (standard) bases.
//!
//! For every `i` pick a basis `b_i` of `B_i = Im d_{i+1}` and lift
//! `b_{i-1}` into `C_i`. Then `(b_i, lift b_{i-1})` is a basis of `C_i` and
//! the torsion is
//!
//! ```text
//!     tau = prod_i [b_i, b_{i-1} / c_i] ^ ((-1)^(i+1))
//! ```
//!
//! where `[b / c]` is the determinant of the matrix whose columns are the
//! vectors `b` written in the preferred basis `c`. With this convention
//! `0 -> C_1 --A--> C_0 -> 0` has torsion `1 / det A`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CxMatrix;
use crate::numeric::{cx, cx_json, is_finite, Cx};

/// Relative bound on `|d_i d_{i+1}|` accepted at construction.
pub const DEFAULT_COMPLEX_TOL: f64 = 1e-10;

/// A torsion value. Oracle constructions whose sign depends on unpinned
/// orientation choices set `sign_ambiguous`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorsionValue {
    #[serde(with = "cx_json")]
    pub value: Cx,
    pub sign_ambiguous: bool,
}

impl TorsionValue {
    pub fn exact(value: Cx) -> Self {
        TorsionValue {
            value,
            sign_ambiguous: false,
        }
    }

    pub fn up_to_sign(value: Cx) -> Self {
        TorsionValue {
            value,
            sign_ambiguous: true,
        }
    }

    /// Relative agreement with `other`, modulo sign when ambiguous.
    pub fn agrees_with(&self, other: Cx, tol: f64) -> bool {
        let scale = 1f64.max(self.value.norm()).max(other.norm());
        let d = (self.value - other).norm();
        let d = if self.sign_ambiguous {
            d.min((self.value + other).norm())
        } else {
            d
        };
        d <= tol * scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainComplex {
    dims: Vec<usize>,
    boundaries: Vec<CxMatrix>,
}

impl ChainComplex {
    /// Validates shapes and `d_i d_{i+1} = 0` to [`DEFAULT_COMPLEX_TOL`].
    pub fn new(dims: Vec<usize>, boundaries: Vec<CxMatrix>) -> Result<Self> {
        Self::with_tolerance(dims, boundaries, DEFAULT_COMPLEX_TOL)
    }

    pub fn with_tolerance(dims: Vec<usize>, boundaries: Vec<CxMatrix>, tol: f64) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::DimensionMismatch(
                "complex needs at least C_0".into(),
            ));
        }
        if boundaries.len() + 1 != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} spaces need {} boundary maps, got {}",
                dims.len(),
                dims.len() - 1,
                boundaries.len()
            )));
        }
        for (k, d) in boundaries.iter().enumerate() {
            if d.rows() != dims[k] || d.cols() != dims[k + 1] {
                return Err(Error::DimensionMismatch(format!(
                    "d_{} is {}x{}, expected {}x{}",
                    k + 1,
                    d.rows(),
                    d.cols(),
                    dims[k],
                    dims[k + 1]
                )));
            }
            if d.entries().iter().any(|z| !is_finite(*z)) {
                return Err(Error::Overflow);
            }
        }
        for k in 0..boundaries.len().saturating_sub(1) {
            let (lo, hi) = (&boundaries[k], &boundaries[k + 1]);
            let norm = lo.mul(hi)?.max_abs();
            let scale = 1f64.max(lo.max_abs() * hi.max_abs());
            if norm > tol * scale {
                return Err(Error::NotAComplex { index: k + 1, norm });
            }
        }
        Ok(ChainComplex { dims, boundaries })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Top degree `m`.
    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    /// `d_i : C_i -> C_{i-1}` for `1 <= i <= m`.
    pub fn boundary(&self, i: usize) -> Option<&CxMatrix> {
        if i == 0 {
            None
        } else {
            self.boundaries.get(i - 1)
        }
    }

    fn rank_of(&self, i: usize, tol: f64) -> usize {
        self.boundary(i).map_or(0, |d| d.rank(tol))
    }

    /// Exactness test: `rank d_i + rank d_{i+1} = dim C_i` in every degree.
    pub fn is_acyclic(&self, tol: f64) -> bool {
        (0..=self.top()).all(|i| self.rank_of(i, tol) + self.rank_of(i + 1, tol) == self.dims[i])
    }

    /// Torsion with image bases picked by greedy column pivoting.
    ///
    /// `b_i` is a set of pivot columns of `d_{i+1}`, so its lift is the
    /// corresponding set of standard basis vectors of `C_{i+1}`.
    pub fn torsion(&self, tol: f64) -> Result<TorsionValue> {
        if !self.is_acyclic(tol) {
            return Err(Error::NotAcyclic);
        }
        let m = self.top();
        // pivot[i] = chosen columns of d_{i+1}, i.e. the lift of b_i in C_{i+1}
        let pivots: Vec<Vec<usize>> = (0..=m)
            .map(|i| {
                self.boundary(i + 1)
                    .map_or_else(Vec::new, |d| d.pivot_columns(tol))
            })
            .collect();
        let mut tau = cx(1.0, 0.0);
        for i in 0..=m {
            let dim = self.dims[i];
            let b = match self.boundary(i + 1) {
                Some(d) => d.select_columns(&pivots[i]),
                None => CxMatrix::zeros(dim, 0),
            };
            let lift = if i == 0 {
                CxMatrix::zeros(dim, 0)
            } else {
                CxMatrix::identity(dim).select_columns(&pivots[i - 1])
            };
            let det = b.hstack(&lift)?.det()?;
            tau = apply_factor(tau, det, i)?;
        }
        Ok(TorsionValue::exact(tau))
    }

    /// Torsion from random (seeded) bases of the images and random lifts.
    ///
    /// `b_i = d_{i+1} G_i` for a random `G_i`, and `b_{i-1}` is lifted to
    /// `G_{i-1} + d_{i+1} H_i` for a random `H_i`.
    pub fn torsion_with_basis_perturbation(&self, seed: u64, tol: f64) -> Result<TorsionValue> {
        if !self.is_acyclic(tol) {
            return Err(Error::NotAcyclic);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = self.top();
        let ranks: Vec<usize> = (0..=m).map(|i| self.rank_of(i + 1, tol)).collect();
        // gens[i] spans a complement of ker d_{i+1} inside C_{i+1}
        let mut gens: Vec<CxMatrix> = Vec::with_capacity(m + 1);
        let mut images: Vec<CxMatrix> = Vec::with_capacity(m + 1);
        for (i, &rank) in ranks.iter().enumerate() {
            match self.boundary(i + 1) {
                Some(d) => {
                    let (g, b) = loop {
                        let g = random_matrix(&mut rng, d.cols(), rank);
                        let b = d.mul(&g)?;
                        if b.rank(tol) == rank {
                            break (g, b);
                        }
                    };
                    gens.push(g);
                    images.push(b);
                }
                None => {
                    gens.push(CxMatrix::zeros(0, 0));
                    images.push(CxMatrix::zeros(self.dims[i], 0));
                }
            }
        }
        let mut tau = cx(1.0, 0.0);
        for i in 0..=m {
            let lift = if i == 0 {
                CxMatrix::zeros(self.dims[0], 0)
            } else {
                let mut lift = gens[i - 1].clone();
                if let Some(d) = self.boundary(i + 1) {
                    let h = random_matrix(&mut rng, d.cols(), ranks[i - 1]);
                    lift = lift.add(&d.mul(&h)?)?;
                }
                lift
            };
            let det = images[i].hstack(&lift)?.det()?;
            tau = apply_factor(tau, det, i)?;
        }
        Ok(TorsionValue::exact(tau))
    }
}

fn apply_factor(tau: Cx, det: Cx, degree: usize) -> Result<Cx> {
    if det.norm() == 0.0 || !is_finite(det) {
        return Err(Error::NotAcyclic);
    }
    let next = if degree.is_multiple_of(2) {
        tau / det
    } else {
        tau * det
    };
    if is_finite(next) {
        Ok(next)
    } else {
        Err(Error::Overflow)
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CxMatrix {
    let data = (0..rows * cols)
        .map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    CxMatrix::new(rows, cols, data).expect("shape matches data")
}

/// Random acyclic complexes for property checks.
pub mod fixtures {
    use super::*;

    /// Builds an acyclic complex where `d_{i+1}` has rank `ranks[i]`.
    ///
    /// `C_i` splits as `B_i + H_i` with `d_i` mapping `H_i` isomorphically
    /// onto `B_{i-1}`; each space is then hit by a random change of basis.
    pub fn random_acyclic(rng: &mut impl Rng, ranks: &[usize]) -> ChainComplex {
        let m = ranks.len();
        let rank = |i: isize| -> usize {
            if i < 0 || i as usize >= m {
                0
            } else {
                ranks[i as usize]
            }
        };
        let dims: Vec<usize> = (0..=m as isize).map(|i| rank(i) + rank(i - 1)).collect();
        let mut chacha = ChaCha8Rng::seed_from_u64(rng.gen());
        let changes: Vec<CxMatrix> = dims
            .iter()
            .map(|&n| loop {
                let p = random_matrix(&mut chacha, n, n);
                if n == 0 || p.det().map(|d| d.norm() > 0.05).unwrap_or(false) {
                    break p;
                }
            })
            .collect();
        let mut boundaries = Vec::with_capacity(m);
        for i in 1..=m {
            let (lo, hi) = (dims[i - 1], dims[i]);
            let r = rank(i as isize - 1);
            let mut d = CxMatrix::zeros(lo, hi);
            let offset = rank(i as isize);
            for k in 0..r {
                d[(k, offset + k)] = cx(1.0, 0.0);
            }
            let conj = changes[i - 1]
                .mul(&d)
                .and_then(|x| x.mul(&changes[i].inverse()?))
                .expect("shapes agree");
            boundaries.push(conj);
        }
        ChainComplex::new(dims, boundaries).expect("construction is exact")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DEFAULT_PIVOT_TOL;

    const TOL: f64 = DEFAULT_PIVOT_TOL;

    fn one_map(rows: &[&[f64]]) -> ChainComplex {
        let d = CxMatrix::from_real_rows(rows).unwrap();
        ChainComplex::new(vec![d.rows(), d.cols()], vec![d]).unwrap()
    }

    #[test]
    fn identity_complex() {
        let c = one_map(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(c.is_acyclic(TOL));
        assert_eq!(c.torsion(TOL).unwrap().value, cx(1.0, 0.0));
        for seed in 0..10 {
            let t = c.torsion_with_basis_perturbation(seed, TOL).unwrap();
            assert!((t.value - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_map_is_not_acyclic() {
        let c = one_map(&[&[0.0]]);
        assert!(!c.is_acyclic(TOL));
        assert_eq!(c.torsion(TOL), Err(Error::NotAcyclic));
        assert_eq!(
            c.torsion_with_basis_perturbation(0, TOL),
            Err(Error::NotAcyclic)
        );
    }

    #[test]
    fn scalar_map_gives_reciprocal() {
        let c = one_map(&[&[2.0]]);
        assert_eq!(c.torsion(TOL).unwrap().value, cx(0.5, 0.0));
        for seed in 0..10 {
            let t = c.torsion_with_basis_perturbation(seed, TOL).unwrap();
            assert!((t.value - 0.5).norm() < 1e-12, "seed {seed}: {}", t.value);
        }
    }

    #[test]
    fn two_step_complex_by_explicit_bases() {
        // 0 -> C --[1,0]^T--> C^2 --[0,3]--> C -> 0
        let d1 = CxMatrix::from_real_rows(&[&[0.0, 3.0]]).unwrap();
        let d2 = CxMatrix::from_real_rows(&[&[1.0], &[0.0]]).unwrap();
        let c = ChainComplex::new(vec![1, 2, 1], vec![d1, d2]).unwrap();
        assert!(c.is_acyclic(TOL));

        // Brute force over explicit choices b_0 = (beta), b_1 = (alpha, 0)
        // with lifts gamma e_1 + (beta/3) e_2 in C_1 and alpha in C_2.
        let mut values = Vec::new();
        for (alpha, beta, gamma) in [(1.0, 3.0, 0.0), (2.0, -1.0, 5.0), (-0.5, 7.0, 1.0)] {
            let f0 = beta;
            let c1 = CxMatrix::from_real_rows(&[&[alpha, gamma], &[0.0, beta / 3.0]]).unwrap();
            let f1 = c1.det().unwrap().re;
            let f2 = alpha;
            values.push(f1 / (f0 * f2));
        }
        for v in &values {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
        assert!((c.torsion(TOL).unwrap().value - 1.0 / 3.0).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_complex() {
        let d1 = CxMatrix::from_real_rows(&[&[1.0, 0.0]]).unwrap();
        let d2 = CxMatrix::from_real_rows(&[&[1.0], &[0.0]]).unwrap();
        assert!(matches!(
            ChainComplex::new(vec![1, 2, 1], vec![d1, d2]),
            Err(Error::NotAComplex { index: 1, .. })
        ));
    }

    #[test]
    fn rejects_bad_shapes() {
        let d = CxMatrix::from_real_rows(&[&[1.0, 0.0]]).unwrap();
        assert!(matches!(
            ChainComplex::new(vec![1, 1], vec![d.clone()]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            ChainComplex::new(vec![1, 2, 3], vec![d]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(ChainComplex::new(vec![], vec![]).is_err());
    }

    #[test]
    fn basis_independence_on_random_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for ranks in [
            vec![1],
            vec![2, 1],
            vec![1, 2, 1],
            vec![2, 2],
            vec![3, 1, 2],
        ] {
            let c = fixtures::random_acyclic(&mut rng, &ranks);
            assert!(c.is_acyclic(TOL));
            let base = c.torsion(TOL).unwrap();
            for seed in 0..10 {
                let t = c.torsion_with_basis_perturbation(seed, TOL).unwrap();
                assert!(
                    base.agrees_with(t.value, 1e-8),
                    "{ranks:?}: {} vs {}",
                    base.value,
                    t.value
                );
            }
        }
    }

    #[test]
    fn rescaling_a_preferred_basis_vector() {
        // replacing c_k in C_i by lambda c_k multiplies torsion by lambda^((-1)^i)
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let lambda = cx(1.5, -0.7);
        let c = fixtures::random_acyclic(&mut rng, &[2, 1, 1]);
        let base = c.torsion(TOL).unwrap().value;
        for i in 0..=c.top() {
            let mut bounds: Vec<CxMatrix> = c.boundaries.clone();
            // new coordinates v' with v = D v', D = diag(.., lambda at k=0, ..)
            if let Some(d) = bounds.get_mut(i.wrapping_sub(1)).filter(|_| i >= 1) {
                for r in 0..d.rows() {
                    d[(r, 0)] *= lambda;
                }
            }
            if let Some(d) = bounds.get_mut(i) {
                for col in 0..d.cols() {
                    d[(0, col)] /= lambda;
                }
            }
            let scaled = ChainComplex::new(c.dims.clone(), bounds).unwrap();
            let got = scaled.torsion(TOL).unwrap().value;
            let expected = if i % 2 == 0 {
                base * lambda
            } else {
                base / lambda
            };
            assert!(
                (got - expected).norm() < 1e-10 * expected.norm(),
                "degree {i}"
            );
        }
    }

    #[test]
    fn sign_ambiguous_comparison() {
        let t = TorsionValue::up_to_sign(cx(-2.0, 0.0));
        assert!(t.agrees_with(cx(2.0, 0.0), 1e-12));
        assert!(!TorsionValue::exact(cx(-2.0, 0.0)).agrees_with(cx(2.0, 0.0), 1e-12));
    }
}
