//! Complex scalars, 2x2 complex matrices and quadratic roots.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Cx = Complex64;

#[inline]
pub fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

pub fn is_finite(z: Cx) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub(crate) fn check_finite(z: Cx) -> Result<Cx> {
    if is_finite(z) {
        Ok(z)
    } else {
        Err(Error::Overflow)
    }
}

/// Relative distance `|a - b| / max(1, |a|, |b|)`.
pub fn rel_diff(a: Cx, b: Cx) -> f64 {
    (a - b).norm() / 1f64.max(a.norm()).max(b.norm())
}

/// Shortest round-trip text for a CSV field: plain decimals for moderate
/// magnitudes, exponent notation for tiny or huge ones.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Parses `"re,im"` (or a bare real `"re"`).
pub fn parse_cx(text: &str) -> Result<Cx> {
    let text = text.trim();
    let mut parts = text.split(',');
    let re = parts.next().unwrap_or("").trim();
    let im = parts.next().map(str::trim);
    if parts.next().is_some() {
        return Err(Error::parse(
            "complex number",
            format!("too many components in {text:?}"),
        ));
    }
    let re: f64 = re
        .parse()
        .map_err(|_| Error::parse("complex number", format!("bad real part in {text:?}")))?;
    let im: f64 = match im {
        Some(im) => im.parse().map_err(|_| {
            Error::parse("complex number", format!("bad imaginary part in {text:?}"))
        })?,
        None => 0.0,
    };
    check_finite(cx(re, im)).map_err(|_| Error::parse("complex number", "non-finite value"))
}

/// Serde adapter writing a [`Cx`] as `{"re": .., "im": ..}`.
pub mod cx_json {
    use super::Cx;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Cx, ser: S) -> Result<S::Ok, S::Error> {
        Repr { re: z.re, im: z.im }.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Cx, D::Error> {
        let r = Repr::deserialize(de)?;
        Ok(Cx::new(r.re, r.im))
    }

    pub mod option {
        use super::{Cx, Repr};
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(z: &Option<Cx>, ser: S) -> Result<S::Ok, S::Error> {
            z.map(|z| Repr { re: z.re, im: z.im }).serialize(ser)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Cx>, D::Error> {
            Ok(Option::<Repr>::deserialize(de)?.map(|r| Cx::new(r.re, r.im)))
        }
    }
}

/// A 2x2 complex matrix `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    #[serde(with = "cx_json")]
    pub a11: Cx,
    #[serde(with = "cx_json")]
    pub a12: Cx,
    #[serde(with = "cx_json")]
    pub a21: Cx,
    #[serde(with = "cx_json")]
    pub a22: Cx,
}

impl Mat2 {
    pub const fn new(a11: Cx, a12: Cx, a21: Cx, a22: Cx) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Mat2::scalar(Cx::new(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Mat2::scalar(Cx::new(0.0, 0.0))
    }

    pub fn scalar(z: Cx) -> Self {
        let o = Cx::new(0.0, 0.0);
        Mat2::new(z, o, o, z)
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        Mat2::new(
            cx(rows[0][0], 0.0),
            cx(rows[0][1], 0.0),
            cx(rows[1][0], 0.0),
            cx(rows[1][1], 0.0),
        )
    }

    pub fn det(&self) -> Cx {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> Cx {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// The adjugate; equals the inverse for unimodular matrices.
    pub fn adjugate(&self) -> Self {
        Mat2::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    pub fn entries(&self) -> [Cx; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| is_finite(*z))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        (self.det() - 1.0).norm() <= tol
    }

    pub fn scale(&self, k: Cx) -> Self {
        Mat2::new(self.a11 * k, self.a12 * k, self.a21 * k, self.a22 * k)
    }

    /// Matrix product, failing if any entry overflows.
    pub fn checked_mul(&self, rhs: &Mat2) -> Result<Mat2> {
        let m = *self * *rhs;
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::Overflow)
        }
    }

    /// Inverse via adjugate over determinant.
    ///
    /// A matrix counts as singular when `|det| <= 1e-14 * max(1, max|a_ij|^2)`.
    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        let scale = 1f64.max(self.max_abs().powi(2));
        if !is_finite(det) || det.norm() <= 1e-14 * scale {
            return Err(Error::SingularMatrix(det.norm()));
        }
        let inv = self.adjugate().scale(det.inv());
        if inv.is_finite() {
            Ok(inv)
        } else {
            Err(Error::Overflow)
        }
    }

    /// Integer power; negative exponents go through [`Mat2::inverse`].
    pub fn powi(&self, n: i64) -> Result<Mat2> {
        let mut base = if n < 0 { self.inverse()? } else { *self };
        let mut k = n.unsigned_abs();
        let mut acc = Mat2::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, b: Mat2) -> Mat2 {
        let a = self;
        Mat2::new(
            a.a11 * b.a11 + a.a12 * b.a21,
            a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21,
            a.a21 * b.a12 + a.a22 * b.a22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + b.a11,
            self.a12 + b.a12,
            self.a21 + b.a21,
            self.a22 + b.a22,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 - b.a11,
            self.a12 - b.a12,
            self.a21 - b.a21,
            self.a22 - b.a22,
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(cx(-1.0, 0.0))
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

/// Roots of `a r^2 + b r + c`, labelled `(plus, minus)`.
///
/// `plus` is `(-b + sqrt(b^2 - 4ac)) / 2a` with the principal square root;
/// the root of larger magnitude is computed directly and the other one
/// through Vieta to avoid cancellation, without changing the labels.
pub fn solve_quadratic(a: Cx, b: Cx, c: Cx) -> Result<(Cx, Cx)> {
    let scale = b.norm().max(c.norm());
    if a.norm() == 0.0 || a.norm() <= 1e-14 * scale {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    let disc = b * b - a * c * 4.0;
    let root = disc.sqrt();
    let num_plus = -b + root;
    let num_minus = -b - root;
    let two_a = a * 2.0;
    let (plus, minus) = if num_plus.norm() >= num_minus.norm() {
        let plus = num_plus / two_a;
        let minus = if num_plus.norm() == 0.0 {
            plus
        } else {
            c * 2.0 / num_plus
        };
        (plus, minus)
    } else {
        let minus = num_minus / two_a;
        (c * 2.0 / num_minus, minus)
    };
    Ok((check_finite(plus)?, check_finite(minus)?))
}
