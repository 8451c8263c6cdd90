//! Laurent polynomials with arbitrary-precision integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A Laurent polynomial in `nvars` variables: exponent vector -> nonzero
/// coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    nvars: usize,
    terms: BTreeMap<Vec<i32>, BigInt>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize) -> Self {
        LaurentPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(vec![0; nvars], BigInt::one())
    }

    /// The variable `x_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, BigInt::one())
    }

    pub fn monomial(exponents: Vec<i32>, coeff: BigInt) -> Self {
        let mut p = Self::zero(exponents.len());
        if !coeff.is_zero() {
            p.terms.insert(exponents, coeff);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i32>, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Componentwise minimum exponent, i.e. the denominator monomial.
    fn min_exponents(&self) -> Vec<i32> {
        let mut m = vec![i32::MAX; self.nvars];
        for e in self.terms.keys() {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).min(*b);
            }
        }
        if self.terms.is_empty() {
            m.fill(0);
        }
        m
    }

    fn shifted(&self, by: &[i32]) -> Self {
        LaurentPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(by).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    /// Exponents of the denominator `x^d` in the reduced form
    /// `f / x^d` with `f` a polynomial not divisible by any variable.
    pub fn denominator_vector(&self) -> Vec<i32> {
        self.min_exponents().iter().map(|m| -m).collect()
    }

    /// `self / other` when the quotient is again a Laurent polynomial.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        if other.is_zero() {
            return None;
        }
        let mb = other.min_exponents();
        let neg = |v: &[i32]| v.iter().map(|x| -x).collect::<Vec<_>>();
        let divisor = other.shifted(&neg(&mb));
        let numer = self.shifted(&neg(&mb));
        let ma = numer.min_exponents();
        let mut rem = numer.shifted(&neg(&ma));
        let (lead_e, lead_c) = divisor.terms.iter().next_back().expect("nonzero");
        let mut quot = Self::zero(self.nvars);
        while let Some((e, c)) = rem.terms.iter().next_back() {
            if e.iter().zip(lead_e).any(|(a, b)| a < b) {
                return None;
            }
            let (q, r) = c.div_rem(lead_c);
            if !r.is_zero() {
                return None;
            }
            let shift: Vec<i32> = e.iter().zip(lead_e).map(|(a, b)| a - b).collect();
            let term = Self::monomial(shift, q);
            rem = &rem - &(&term * &divisor);
            quot = &quot + &term;
        }
        Some(quot.shifted(&ma))
    }

    fn add_term(&mut self, e: Vec<i32>, c: BigInt) {
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;

    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;

    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.iter().zip(eb).map(|(a, b)| a + b).collect(), ca * cb);
            }
        }
        out
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, e: &[i32]) -> fmt::Result {
    let mut first = true;
    for (i, &k) in e.iter().enumerate() {
        if k <= 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "x{}", i + 1)?;
        if k > 1 {
            write!(f, "^{k}")?;
        }
    }
    Ok(())
}

/// Renders as `numerator` or `(numerator)/denominator`, where the numerator
/// is a polynomial listed in descending lexicographic exponent order.
impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let d: Vec<i32> = self.denominator_vector().iter().map(|&x| x.max(0)).collect();
        let numer = self.shifted(&d);
        let has_denominator = d.iter().any(|&x| x > 0);
        let wrap = has_denominator && numer.terms.len() > 1;
        if wrap {
            write!(f, "(")?;
        }
        for (idx, (e, c)) in numer.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if idx > 0 {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            } else if negative {
                write!(f, "-")?;
            }
            let constant = e.iter().all(|&k| k == 0);
            if constant {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                write_monomial(f, e)?;
            }
        }
        if wrap {
            write!(f, ")")?;
        }
        if has_denominator {
            write!(f, "/")?;
            let several = d.iter().filter(|&&x| x > 0).count() > 1;
            if several {
                write!(f, "(")?;
            }
            write_monomial(f, &d)?;
            if several {
                write!(f, ")")?;
            }
        }
        Ok(())
    }
}
