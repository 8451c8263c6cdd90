//! The rank-one grading group of a weighted projective line.
//!
//! A [`WeightType`] `(p1, ..., pt)` determines the abelian group generated by
//! `x1, ..., xt` subject to `p1*x1 = ... = pt*xt = c`. Every element has a
//! unique normal form `sum li*xi + l*c` with `0 <= li < pi`, and [`LElement`]
//! is always stored that way.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("invalid weight type: {0}")]
    InvalidWeights(String),
    #[error("mismatched weight types {0} and {1}")]
    MismatchedWeights(String, String),
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// Weight data `(p1, ..., pt)` of a weighted projective line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightType {
    weights: Vec<i64>,
    pbar: i64,
}

impl WeightType {
    pub fn new(weights: Vec<i64>) -> Result<Arc<Self>, LatticeError> {
        if weights.is_empty() {
            return Err(LatticeError::InvalidWeights("at least one weight is required".into()));
        }
        if let Some(p) = weights.iter().find(|&&p| p < 1) {
            return Err(LatticeError::InvalidWeights(format!("weight {p} is not positive")));
        }
        let pbar = weights.iter().fold(1i64, |acc, &p| acc.lcm(&p));
        Ok(Arc::new(WeightType { weights, pbar }))
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn t(&self) -> usize {
        self.weights.len()
    }

    /// Rank of the i-th exceptional tube (1-based).
    pub fn weight(&self, i: usize) -> i64 {
        self.weights[i - 1]
    }

    /// Least common multiple of the weights.
    pub fn pbar(&self) -> i64 {
        self.pbar
    }

    /// Rank of the Grothendieck group: `sum (pi - 1) + 2`.
    pub fn rank_g0(&self) -> usize {
        self.weights.iter().map(|&p| (p - 1) as usize).sum::<usize>() + 2
    }

    /// `g = 1 + ((t - 2) * pbar - sum pbar / pi) / 2`.
    ///
    /// A single weight `(p)` behaves as `(p, 1)`; the formula is invariant under
    /// appending weights equal to one.
    pub fn genus(&self) -> GenusClass {
        let t = self.t() as i64;
        let s: i64 = self.weights.iter().map(|&p| self.pbar / p).sum();
        let genus = Ratio::from_integer(1) + Ratio::new((t - 2) * self.pbar - s, 2);
        let kind = match genus.cmp(&Ratio::from_integer(1)) {
            Ordering::Less => GenusKind::Domestic,
            Ordering::Equal => GenusKind::Tubular,
            Ordering::Greater => GenusKind::Wild,
        };
        GenusClass { kind, genus }
    }
}

impl fmt::Display for WeightType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Parses `"(p1,p2,...,pt)"`; the parentheses are optional.
pub fn parse_weights(s: &str) -> Result<Arc<WeightType>, LatticeError> {
    let inner = s.trim();
    let inner = inner
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .unwrap_or(inner);
    let weights = inner
        .split(',')
        .map(|w| w.trim().parse::<i64>().map_err(|_| LatticeError::Parse(s.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    WeightType::new(weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GenusKind {
    Domestic,
    Tubular,
    Wild,
}

impl fmt::Display for GenusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GenusKind::Domestic => "domestic",
            GenusKind::Tubular => "tubular",
            GenusKind::Wild => "wild",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenusClass {
    pub kind: GenusKind,
    pub genus: Ratio<i64>,
}

/// An element of the grading group, held in normal form.
#[derive(Debug, Clone)]
pub struct LElement {
    weight: Arc<WeightType>,
    li: Vec<i64>,
    l: i64,
}

impl LElement {
    /// Reduces `sum raw[i]*xi + raw_l*c` to normal form.
    pub fn normal_form(
        weight: &Arc<WeightType>,
        raw: &[i64],
        raw_l: i64,
    ) -> Result<Self, LatticeError> {
        if raw.len() != weight.t() {
            return Err(LatticeError::LengthMismatch { expected: weight.t(), got: raw.len() });
        }
        let mut l = raw_l;
        let li = raw
            .iter()
            .zip(&weight.weights)
            .map(|(&a, &p)| {
                l += a.div_euclid(p);
                a.rem_euclid(p)
            })
            .collect();
        Ok(LElement { weight: Arc::clone(weight), li, l })
    }

    pub fn zero(weight: &Arc<WeightType>) -> Self {
        LElement { weight: Arc::clone(weight), li: vec![0; weight.t()], l: 0 }
    }

    /// The generator `xi` (1-based).
    pub fn x(weight: &Arc<WeightType>, i: usize) -> Self {
        let mut raw = vec![0; weight.t()];
        raw[i - 1] = 1;
        Self::normal_form(weight, &raw, 0).expect("length matches")
    }

    /// The canonical element `c`.
    pub fn canonical(weight: &Arc<WeightType>) -> Self {
        Self::c_multiple(weight, 1)
    }

    pub fn c_multiple(weight: &Arc<WeightType>, l: i64) -> Self {
        LElement { weight: Arc::clone(weight), li: vec![0; weight.t()], l }
    }

    /// The dualizing element `(t - 2)c - sum xi`.
    pub fn omega(weight: &Arc<WeightType>) -> Self {
        let t = weight.t() as i64;
        Self::normal_form(weight, &vec![-1; weight.t()], t - 2).expect("length matches")
    }

    pub fn weight(&self) -> &Arc<WeightType> {
        &self.weight
    }

    pub fn li(&self) -> &[i64] {
        &self.li
    }

    /// Coefficient of `c` in the normal form.
    pub fn l(&self) -> i64 {
        self.l
    }

    pub fn is_zero(&self) -> bool {
        self.l == 0 && self.li.iter().all(|&a| a == 0)
    }

    fn check_same(&self, other: &Self) -> Result<(), LatticeError> {
        if Arc::ptr_eq(&self.weight, &other.weight) || self.weight == other.weight {
            Ok(())
        } else {
            Err(LatticeError::MismatchedWeights(self.weight.to_string(), other.weight.to_string()))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LatticeError> {
        self.check_same(other)?;
        let raw: Vec<i64> = self.li.iter().zip(&other.li).map(|(a, b)| a + b).collect();
        Self::normal_form(&self.weight, &raw, self.l + other.l)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, LatticeError> {
        self.try_add(&other.negate())
    }

    pub fn negate(&self) -> Self {
        self.scalar_mul(-1)
    }

    pub fn scalar_mul(&self, n: i64) -> Self {
        let raw: Vec<i64> = self.li.iter().map(|a| a * n).collect();
        Self::normal_form(&self.weight, &raw, self.l * n).expect("length matches")
    }

    /// Componentwise comparison of normal forms.
    pub fn leq(&self, other: &Self) -> Result<bool, LatticeError> {
        Ok(other.try_sub(self)?.is_effective())
    }

    /// `0 <= self`.
    pub fn is_effective(&self) -> bool {
        self.l >= 0
    }

    /// Dimension of the graded piece `R_x` of the coordinate ring.
    pub fn graded_dim(&self) -> u64 {
        if self.l < 0 {
            0
        } else {
            self.l as u64 + 1
        }
    }

    /// `c`-coefficient of `sum sign * part` without materialising the sum.
    pub fn c_coeff_of_sum(parts: &[(&LElement, i64)]) -> i64 {
        let Some((first, _)) = parts.first() else {
            return 0;
        };
        let wt = &first.weight;
        let mut l: i64 = parts.iter().map(|(e, s)| s * e.l).sum();
        for (i, &p) in wt.weights.iter().enumerate() {
            let a: i64 = parts.iter().map(|(e, s)| s * e.li[i]).sum();
            l += a.div_euclid(p);
        }
        l
    }

    /// Parses `"l1*x1+...+lt*xt+l*c"`. Terms may appear in any order and be
    /// repeated; `w` denotes the dualizing element and a bare `0` is zero.
    pub fn parse(weight: &Arc<WeightType>, s: &str) -> Result<Self, LatticeError> {
        let err = || LatticeError::Parse(s.to_string());
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if text.is_empty() {
            return Err(err());
        }
        let mut acc = Self::zero(weight);
        let bytes = text.as_bytes();
        let mut pos = 0;
        while pos < bytes.len() {
            let mut sign = 1;
            while pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
                if bytes[pos] == b'-' {
                    sign = -sign;
                }
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let coeff: Option<i64> = if pos > start {
                Some(text[start..pos].parse().map_err(|_| err())?)
            } else {
                None
            };
            if pos < bytes.len() && bytes[pos] == b'*' {
                pos += 1;
            }
            let atom = match bytes.get(pos) {
                Some(b'x') => {
                    pos += 1;
                    let s0 = pos;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let i: usize = text[s0..pos].parse().map_err(|_| err())?;
                    if i == 0 || i > weight.t() {
                        return Err(err());
                    }
                    Self::x(weight, i)
                }
                Some(b'c') => {
                    pos += 1;
                    Self::canonical(weight)
                }
                Some(b'w') => {
                    pos += 1;
                    Self::omega(weight)
                }
                _ => {
                    // bare integer: only zero is meaningful
                    if coeff == Some(0) {
                        Self::zero(weight)
                    } else {
                        return Err(err());
                    }
                }
            };
            if pos < bytes.len() && bytes[pos] != b'+' && bytes[pos] != b'-' {
                return Err(err());
            }
            acc = &acc + &atom.scalar_mul(sign * coeff.unwrap_or(1));
        }
        Ok(acc)
    }
}

impl PartialEq for LElement {
    fn eq(&self, other: &Self) -> bool {
        self.l == other.l && self.li == other.li && *self.weight == *other.weight
    }
}

impl Eq for LElement {}

impl Hash for LElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.li.hash(state);
        self.l.hash(state);
    }
}

/// Orders by the `c`-coefficient first, then the `xi`-coefficients.
impl Ord for LElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.l
            .cmp(&other.l)
            .then_with(|| self.li.cmp(&other.li))
            .then_with(|| self.weight.weights.cmp(&other.weight.weights))
    }
}

impl PartialOrd for LElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.li.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{a}*x{}", i + 1)?;
        }
        if self.l < 0 {
            write!(f, "-{}*c", -self.l)
        } else {
            write!(f, "+{}*c", self.l)
        }
    }
}

/// Panics on mismatched weight types; use [`LElement::try_add`] otherwise.
impl Add for &LElement {
    type Output = LElement;
    fn add(self, rhs: &LElement) -> LElement {
        self.try_add(rhs).expect("mismatched weight types")
    }
}

impl Sub for &LElement {
    type Output = LElement;
    fn sub(self, rhs: &LElement) -> LElement {
        self.try_sub(rhs).expect("mismatched weight types")
    }
}

impl Neg for &LElement {
    type Output = LElement;
    fn neg(self) -> LElement {
        self.negate()
    }
}

impl FromStr for GenusKind {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "domestic" => Ok(GenusKind::Domestic),
            "tubular" => Ok(GenusKind::Tubular),
            "wild" => Ok(GenusKind::Wild),
            _ => Err(LatticeError::Parse(s.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(ws: &[i64]) -> Arc<WeightType> {
        WeightType::new(ws.to_vec()).unwrap()
    }

    fn nf(wt: &Arc<WeightType>, raw: &[i64], l: i64) -> LElement {
        LElement::normal_form(wt, raw, l).unwrap()
    }

    #[test]
    fn normal_form_examples() {
        let wt = w(&[2, 3]);
        let x = nf(&wt, &[1, 4], 0);
        assert_eq!((x.li(), x.l()), (&[1, 1][..], 1));
        assert!(nf(&wt, &[0, 0], 0).is_zero());

        // c - x1 - x2 - x3 with -xi = (pi - 1)xi - c
        let wt = w(&[2, 3, 5]);
        let om = nf(&wt, &[-1, -1, -1], 1);
        assert_eq!((om.li(), om.l()), (&[1, 2, 4][..], -2));
        assert_eq!(om, LElement::omega(&wt));
    }

    #[test]
    fn rejects_empty_and_nonpositive_weights() {
        assert!(WeightType::new(vec![]).is_err());
        assert!(WeightType::new(vec![2, 0]).is_err());
        assert!(parse_weights("()").is_err());
    }

    #[test]
    fn group_law_examples() {
        let wt = w(&[2, 3]);
        let x1 = LElement::x(&wt, 1);
        assert_eq!(&x1 + &x1, LElement::canonical(&wt));
        assert!((&x1 + &-&x1).is_zero());
        let two_omega = LElement::omega(&wt).scalar_mul(2);
        assert_eq!((two_omega.li(), two_omega.l()), (&[0, 1][..], -2));
    }

    #[test]
    fn mismatched_weights_error() {
        let a = LElement::x(&w(&[2, 3]), 1);
        let b = LElement::x(&w(&[2, 4]), 1);
        assert!(matches!(a.try_add(&b), Err(LatticeError::MismatchedWeights(..))));
        assert!(a.leq(&b).is_err());
    }

    #[test]
    fn omega_examples() {
        let om = LElement::omega(&w(&[1, 1]));
        assert_eq!((om.li(), om.l()), (&[0, 0][..], -2));
        let om = LElement::omega(&w(&[2, 3]));
        assert_eq!((om.li(), om.l()), (&[1, 2][..], -2));
        let om = LElement::omega(&w(&[2, 2, 2, 2]));
        assert_eq!((om.li(), om.l()), (&[1, 1, 1, 1][..], -2));
    }

    #[test]
    fn order_examples() {
        let wt = w(&[2, 3]);
        assert!(LElement::zero(&wt).leq(&LElement::x(&wt, 1)).unwrap());
        assert!(!LElement::omega(&wt).is_effective());
    }

    #[test]
    fn genus_examples() {
        let g = w(&[2, 3, 5]).genus();
        assert_eq!((g.kind, g.genus), (GenusKind::Domestic, Ratio::new(1, 2)));
        let g = w(&[2, 3, 6]).genus();
        assert_eq!((g.kind, g.genus), (GenusKind::Tubular, Ratio::from_integer(1)));
        let g = w(&[2, 3, 7]).genus();
        assert_eq!((g.kind, g.genus), (GenusKind::Wild, Ratio::new(3, 2)));
        for tubular in [&[2, 2, 2, 2][..], &[3, 3, 3], &[2, 4, 4]] {
            assert_eq!(w(tubular).genus().kind, GenusKind::Tubular);
        }
        assert_eq!(w(&[1, 1]).genus().kind, GenusKind::Domestic);
    }

    #[test]
    fn rank_g0_examples() {
        assert_eq!(w(&[1, 1]).rank_g0(), 2);
        assert_eq!(w(&[2, 3, 5]).rank_g0(), 9);
        assert_eq!(w(&[2, 2, 2, 2]).rank_g0(), 6);
        assert_eq!(w(&[2, 3, 6]).rank_g0(), 10);
    }

    #[test]
    fn graded_dim_examples() {
        let wt = w(&[2, 3]);
        assert_eq!(LElement::zero(&wt).graded_dim(), 1);
        assert_eq!(LElement::canonical(&wt).graded_dim(), 2);
        assert_eq!(LElement::canonical(&w(&[2, 2, 2])).graded_dim(), 2);
    }

    #[test]
    fn parse_and_render() {
        let wt = w(&[2, 3, 5]);
        let om = LElement::omega(&wt);
        assert_eq!(om.to_string(), "1*x1+2*x2+4*x3-2*c");
        assert_eq!(LElement::parse(&wt, &om.to_string()).unwrap(), om);
        assert_eq!(LElement::parse(&wt, "w").unwrap(), om);
        assert_eq!(LElement::parse(&wt, "c - x1 - x2 - x3").unwrap(), om);
        assert_eq!(LElement::parse(&wt, "0").unwrap(), LElement::zero(&wt));
        assert_eq!(LElement::parse(&wt, "2x1").unwrap(), LElement::canonical(&wt));
        assert!(LElement::parse(&wt, "x4").is_err());
        assert!(LElement::parse(&wt, "3").is_err());
        assert!(LElement::parse(&wt, "").is_err());
        assert_eq!(parse_weights("(2,3,5)").unwrap(), wt);
        assert_eq!(wt.to_string(), "(2,3,5)");
    }

    fn weight_types() -> impl Strategy<Value = Arc<WeightType>> {
        prop::collection::vec(1i64..6, 1..5).prop_map(|ws| WeightType::new(ws).unwrap())
    }

    fn elements(wt: Arc<WeightType>) -> impl Strategy<Value = LElement> {
        let t = wt.t();
        (prop::collection::vec(-20i64..20, t), -20i64..20)
            .prop_map(move |(raw, l)| LElement::normal_form(&wt, &raw, l).unwrap())
    }

    fn triple() -> impl Strategy<Value = (LElement, LElement, LElement)> {
        weight_types().prop_flat_map(|wt| {
            (elements(wt.clone()), elements(wt.clone()), elements(wt))
        })
    }

    proptest! {
        #[test]
        fn group_laws((x, y, z) in triple()) {
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert!((&x + &-&x).is_zero());
            prop_assert_eq!(&x - &y, &x + &-&y);
        }

        #[test]
        fn normal_form_idempotent((x, _, _) in triple()) {
            let again = LElement::normal_form(x.weight(), x.li(), x.l()).unwrap();
            prop_assert_eq!(again, x);
        }

        #[test]
        fn order_translation_invariant((x, y, z) in triple()) {
            if x.leq(&y).unwrap() {
                prop_assert!((&x + &z).leq(&(&y + &z)).unwrap());
            }
        }

        #[test]
        fn trichotomy((x, _, _) in triple()) {
            let wt = x.weight().clone();
            let bound = &LElement::canonical(&wt) + &LElement::omega(&wt);
            prop_assert!(x.is_effective() != x.leq(&bound).unwrap());
        }

        #[test]
        fn render_parse_round_trip((x, _, _) in triple()) {
            prop_assert_eq!(LElement::parse(x.weight(), &x.to_string()).unwrap(), x);
        }

        #[test]
        fn positive_dim_iff_effective((x, _, _) in triple()) {
            prop_assert_eq!(x.graded_dim() > 0, x.is_effective());
        }
    }
}
