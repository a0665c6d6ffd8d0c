//! Words in the free group on `x, y`, the integral group ring, and Fox
//! free derivatives.
//!
//! Text format: `x`, `y` for the generators and `X`, `Y` for their
//! inverses (`"xYXy"` is `x y^-1 x^-1 y`). Input also accepts a caret
//! form such as `"x y^-1 x^-1 y"` or `"x*y^-1"`; whitespace is ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Cx, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: Generator,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(generator: Generator, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter::new(self.generator, !self.inverse)
    }

    fn as_char(self) -> char {
        match (self.generator, self.inverse) {
            (Generator::X, false) => 'x',
            (Generator::X, true) => 'X',
            (Generator::Y, false) => 'y',
            (Generator::Y, true) => 'Y',
        }
    }
}

/// A freely reduced word.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn generator(g: Generator) -> Self {
        GroupWord {
            letters: vec![Letter::new(g, false)],
        }
    }

    /// Reduces `letters` freely.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        GroupWord { letters: out }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let chars: Vec<char> = text
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*')
            .collect();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let mut letter = match chars[i] {
                'x' => Letter::new(Generator::X, false),
                'X' => Letter::new(Generator::X, true),
                'y' => Letter::new(Generator::Y, false),
                'Y' => Letter::new(Generator::Y, true),
                '1' if chars.len() == 1 => return Ok(GroupWord::identity()),
                c => return Err(Error::parse("word", format!("unexpected character {c:?}"))),
            };
            i += 1;
            if chars.get(i) == Some(&'^') {
                let rest: String = chars[i + 1..].iter().collect();
                let exp_len = rest
                    .char_indices()
                    .take_while(|(k, c)| c.is_ascii_digit() || (*k == 0 && *c == '-'))
                    .count();
                let exp: i64 = rest[..exp_len]
                    .parse()
                    .map_err(|_| Error::parse("word", format!("bad exponent after {letter:?}")))?;
                i += 1 + exp_len;
                if exp < 0 {
                    letter = letter.inv();
                }
                letters.extend(std::iter::repeat_n(letter, exp.unsigned_abs() as usize));
            } else {
                letters.push(letter);
            }
        }
        Ok(GroupWord::from_letters(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn inverse(&self) -> Self {
        GroupWord {
            letters: self.letters.iter().rev().map(|l| l.inv()).collect(),
        }
    }

    pub fn concat(&self, other: &GroupWord) -> Self {
        GroupWord::from_letters(self.letters.iter().chain(&other.letters).copied())
    }

    pub fn pow(&self, n: i64) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        (0..n.unsigned_abs()).fold(GroupWord::identity(), |acc, _| acc.concat(&base))
    }

    /// Exponent sum of `g` (image in the abelianization).
    pub fn exponent_sum(&self, g: Generator) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.generator == g)
            .map(|l| if l.inverse { -1 } else { 1 })
            .sum()
    }

    /// Image under the homomorphism sending `x, y` to unimodular `imgx, imgy`.
    ///
    /// Inverse letters use the adjugate, which is the inverse when det = 1.
    pub fn evaluate(&self, imgx: &Mat2, imgy: &Mat2) -> Mat2 {
        let (xi, yi) = (imgx.adjugate(), imgy.adjugate());
        self.letters.iter().fold(Mat2::identity(), |acc, l| {
            acc * match (l.generator, l.inverse) {
                (Generator::X, false) => *imgx,
                (Generator::X, true) => xi,
                (Generator::Y, false) => *imgy,
                (Generator::Y, true) => yi,
            }
        })
    }

    /// Fox derivative `d(self)/d(g)`, by one left-to-right pass:
    /// a letter `g` at position k contributes `+prefix`, a letter `g^-1`
    /// contributes `-prefix g^-1`.
    pub fn fox_derivative(&self, g: Generator) -> GroupRingElement {
        let mut out = GroupRingElement::zero();
        let mut prefix = GroupWord::identity();
        for &l in &self.letters {
            let next = prefix.concat(&GroupWord { letters: vec![l] });
            if l.generator == g {
                if l.inverse {
                    out.add_term(next.clone(), -1);
                } else {
                    out.add_term(prefix.clone(), 1);
                }
            }
            prefix = next;
        }
        out
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for GroupWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GroupWord::parse(s)
    }
}

impl Mul for &GroupWord {
    type Output = GroupWord;
    fn mul(self, rhs: &GroupWord) -> GroupWord {
        self.concat(rhs)
    }
}

/// Finite integer combination of reduced words, i.e. an element of Z[F_2].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<GroupWord, i64>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    word: String,
    coeff: i64,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        GroupRingElement::default()
    }

    pub fn one() -> Self {
        GroupRingElement::from_word(GroupWord::identity())
    }

    pub fn from_word(w: GroupWord) -> Self {
        let mut e = GroupRingElement::zero();
        e.add_term(w, 1);
        e
    }

    pub fn add_term(&mut self, w: GroupWord, coeff: i64) {
        let entry = self.terms.entry(w).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.retain(|_, c| *c != 0);
        }
    }

    pub fn coefficient(&self, w: &GroupWord) -> i64 {
        self.terms.get(w).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GroupWord, i64)> {
        self.terms.iter().map(|(w, c)| (w, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Linear extension of word evaluation.
    pub fn evaluate(&self, imgx: &Mat2, imgy: &Mat2) -> Mat2 {
        self.terms.iter().fold(Mat2::zero(), |acc, (w, c)| {
            acc + w.evaluate(imgx, imgy).scale(Cx::new(*c as f64, 0.0))
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(w, c)| TermRepr {
                word: w.to_string(),
                coeff: *c,
            })
            .collect();
        serde_json::to_value(terms).expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let terms: Vec<TermRepr> = serde_json::from_value(value.clone())
            .map_err(|e| Error::parse("group ring element", e.to_string()))?;
        let mut out = GroupRingElement::zero();
        for t in terms {
            out.add_term(GroupWord::parse(&t.word)?, t.coeff);
        }
        Ok(out)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            match (k, *c < 0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if c.abs() != 1 {
                write!(f, "{}", c.abs())?;
            }
            if w.is_identity() {
                write!(f, "1")?;
            } else {
                write!(f, "{w}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for GroupRingElement {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for GroupRingElement {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        GroupRingElement::from_json(&v).map_err(serde::de::Error::custom)
    }
}

impl Add for &GroupRingElement {
    type Output = GroupRingElement;
    fn add(self, rhs: &GroupRingElement) -> GroupRingElement {
        let mut out = self.clone();
        for (w, c) in rhs.terms() {
            out.add_term(w.clone(), c);
        }
        out
    }
}

impl Sub for &GroupRingElement {
    type Output = GroupRingElement;
    fn sub(self, rhs: &GroupRingElement) -> GroupRingElement {
        self + &(-rhs)
    }
}

impl Neg for &GroupRingElement {
    type Output = GroupRingElement;
    fn neg(self) -> GroupRingElement {
        GroupRingElement {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}

impl Mul for &GroupRingElement {
    type Output = GroupRingElement;
    fn mul(self, rhs: &GroupRingElement) -> GroupRingElement {
        let mut out = GroupRingElement::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in rhs.terms() {
                out.add_term(a.concat(b), ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::cx;
    use proptest::prelude::*;

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s).unwrap()
    }

    fn rho_x() -> Mat2 {
        Mat2::from_real([[2.0, 1.0], [0.0, 0.5]])
    }

    fn rho_y() -> Mat2 {
        Mat2::from_real([[2.0, 0.0], [-1.0, 0.5]])
    }

    #[test]
    fn parse_examples() {
        let l = |g, i| Letter::new(g, i);
        assert_eq!(
            w("xYXy").letters(),
            &[
                l(Generator::X, false),
                l(Generator::Y, true),
                l(Generator::X, true),
                l(Generator::Y, false)
            ]
        );
        assert!(w("").is_identity());
        assert!(w("xX").is_identity());
        assert!(w("1").is_identity());
        assert_eq!(w("x y^-1 x^-1 y"), w("xYXy"));
        assert_eq!(w("x^3 X^2"), w("x"));
        assert_eq!(w("x*y"), w("xy"));
        assert!(matches!(GroupWord::parse("xz"), Err(Error::Parse { .. })));
        assert!(GroupWord::parse("x^").is_err());
    }

    #[test]
    fn inverse_and_concat() {
        assert_eq!(w("xYXy").inverse().to_string(), "YxyX");
        let l = w("YxyX").concat(&w("XyxY"));
        assert_eq!(l.to_string(), "YxyXXyxY");
        assert!(w("xYXy").concat(&w("xYXy").inverse()).is_identity());
        assert_eq!(w("xy").pow(-2).to_string(), "YXYX");
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(
            GroupWord::identity().evaluate(&rho_x(), &rho_y()),
            Mat2::identity()
        );
        assert_eq!(w("x").evaluate(&rho_x(), &rho_y()), rho_x());
        let p = w("xX").evaluate(&rho_x(), &rho_y());
        assert_eq!(p, Mat2::identity());
    }

    #[test]
    fn fox_examples() {
        assert_eq!(w("x").fox_derivative(Generator::X), GroupRingElement::one());
        assert_eq!(
            w("xy").fox_derivative(Generator::Y),
            GroupRingElement::from_word(w("x"))
        );
        assert!(w("y").fox_derivative(Generator::X).is_zero());
        let mut expected = GroupRingElement::one();
        expected.add_term(w("xYX"), -1);
        assert_eq!(w("xYXy").fox_derivative(Generator::X), expected);
        let mut inv = GroupRingElement::zero();
        inv.add_term(w("X"), -1);
        assert_eq!(w("X").fox_derivative(Generator::X), inv);
    }

    #[test]
    fn group_ring_evaluation() {
        assert_eq!(
            GroupRingElement::one().evaluate(&rho_x(), &rho_y()),
            Mat2::identity()
        );
        let e = &GroupRingElement::one() - &GroupRingElement::from_word(w("x"));
        let m = e.evaluate(&rho_x(), &rho_y());
        assert!(m.max_abs_diff(&Mat2::from_real([[-1.0, -1.0], [0.0, 0.5]])) < 1e-15);
    }

    #[test]
    fn ring_arithmetic() {
        let a = &GroupRingElement::one() + &GroupRingElement::from_word(w("x"));
        let b = &GroupRingElement::one() - &GroupRingElement::from_word(w("x"));
        // (1 + x)(1 - x) = 1 - x^2
        let p = &a * &b;
        assert_eq!(p.coefficient(&GroupWord::identity()), 1);
        assert_eq!(p.coefficient(&w("xx")), -1);
        assert_eq!(p.coefficient(&w("x")), 0);
        assert_eq!(p.terms().count(), 2);
    }

    #[test]
    fn json_shape() {
        let e = w("xYXy").fox_derivative(Generator::X);
        let v = e.to_json();
        assert_eq!(
            v,
            serde_json::json!([{"word": "", "coeff": 1}, {"word": "xYX", "coeff": -1}])
        );
        assert_eq!(GroupRingElement::from_json(&v).unwrap(), e);
        assert!(
            GroupRingElement::from_json(&serde_json::json!([{"word": "q", "coeff": 1}])).is_err()
        );
        assert_eq!(e.to_string(), "1 - xYX");
    }

    fn letter_strategy() -> impl Strategy<Value = char> {
        prop::sample::select(vec!['x', 'X', 'y', 'Y'])
    }

    fn word_strategy() -> impl Strategy<Value = GroupWord> {
        prop::collection::vec(letter_strategy(), 0..14)
            .prop_map(|cs| GroupWord::parse(&cs.into_iter().collect::<String>()).unwrap())
    }

    fn unimodular_strategy() -> impl Strategy<Value = Mat2> {
        prop::array::uniform8(-1.5f64..1.5).prop_filter_map("near-singular", |v| {
            let m = Mat2::new(
                cx(v[0], v[1]),
                cx(v[2], v[3]),
                cx(v[4], v[5]),
                cx(v[6], v[7]),
            );
            let d = m.det();
            (d.norm() > 0.2).then(|| m.scale(d.sqrt().inv()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn print_parse_roundtrip(word in word_strategy()) {
            prop_assert_eq!(GroupWord::parse(&word.to_string()).unwrap(), word);
        }

        #[test]
        fn evaluation_is_homomorphic(a in word_strategy(), b in word_strategy(),
                                     mx in unimodular_strategy(), my in unimodular_strategy()) {
            let lhs = a.concat(&b).evaluate(&mx, &my);
            let rhs = a.evaluate(&mx, &my) * b.evaluate(&mx, &my);
            let scale = 1f64.max(lhs.max_abs()).max(rhs.max_abs());
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * scale);
        }

        #[test]
        fn fundamental_formula(r in word_strategy(), mx in unimodular_strategy(), my in unimodular_strategy()) {
            // dr/dx (x - 1) + dr/dy (y - 1) = r - 1
            let e = Mat2::identity();
            let lhs = r.fox_derivative(Generator::X).evaluate(&mx, &my) * (mx - e)
                + r.fox_derivative(Generator::Y).evaluate(&mx, &my) * (my - e);
            let rhs = r.evaluate(&mx, &my) - e;
            let scale = 1f64.max(lhs.max_abs()).max(rhs.max_abs());
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9 * scale);
        }
    }
}
