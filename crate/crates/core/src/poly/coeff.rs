use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{fmt_rational, Int, Rational};

/// Power product of named parameters, e.g. `R^2*s^-1`. Zero exponents are
/// never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamMono(BTreeMap<String, Rational>);

impl ParamMono {
    pub fn one() -> Self {
        ParamMono(BTreeMap::new())
    }

    pub fn var(name: &str) -> Self {
        Self::power(name, Rational::one())
    }

    pub fn power(name: &str, e: Rational) -> Self {
        let mut m = BTreeMap::new();
        if !e.is_zero() {
            m.insert(name.to_string(), e);
        }
        ParamMono(m)
    }

    pub fn from_map(map: BTreeMap<String, Rational>) -> Self {
        ParamMono(map.into_iter().filter(|(_, e)| !e.is_zero()).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &BTreeMap<String, Rational> {
        &self.0
    }

    pub fn exponent(&self, name: &str) -> Rational {
        self.0.get(name).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn mul(&self, other: &ParamMono) -> ParamMono {
        let mut out = self.0.clone();
        for (k, e) in &other.0 {
            let v = out.entry(k.clone()).or_insert_with(Rational::zero);
            *v += e;
            if v.is_zero() {
                out.remove(k);
            }
        }
        ParamMono(out)
    }

    pub fn pow(&self, e: &Rational) -> ParamMono {
        if e.is_zero() {
            return ParamMono::one();
        }
        ParamMono(self.0.iter().map(|(k, v)| (k.clone(), v * e)).collect())
    }

    pub fn inv(&self) -> ParamMono {
        self.pow(&-Rational::one())
    }

    pub fn is_integral(&self) -> bool {
        self.0.values().all(|e| e.is_integer())
    }
}

impl fmt::Display for ParamMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, e)| fmt_power(k, e)).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// `x`, `x^3`, `x^-1`, `x^(1/2)`.
pub fn fmt_power(name: &str, e: &Rational) -> String {
    if e.is_one() {
        name.to_string()
    } else if e.is_integer() {
        format!("{name}^{}", e.numer())
    } else {
        format!("{name}^({})", fmt_rational(e))
    }
}

/// Coefficient: a finite sum of rational multiples of parameter power
/// products. Plain rationals are the common case.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coeff {
    terms: BTreeMap<ParamMono, Rational>,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn one() -> Self {
        Coeff::from(Rational::one())
    }

    pub fn param(name: &str) -> Self {
        Coeff::monomial(Rational::one(), ParamMono::var(name))
    }

    pub fn monomial(scalar: Rational, mono: ParamMono) -> Self {
        let mut terms = BTreeMap::new();
        if !scalar.is_zero() {
            terms.insert(mono, scalar);
        }
        Coeff { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (ParamMono, Rational)>) -> Self {
        let mut c = Coeff::zero();
        for (m, q) in it {
            c.add_term(m, q);
        }
        c
    }

    fn add_term(&mut self, m: ParamMono, q: Rational) {
        if q.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += q;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, q);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ParamMono, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The plain rational value, if no parameters occur.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, q) = self.terms.iter().next().unwrap();
                m.is_one().then(|| q.clone())
            }
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<(Rational, ParamMono)> {
        if self.terms.len() == 1 {
            let (m, q) = self.terms.iter().next().unwrap();
            Some((q.clone(), m.clone()))
        } else {
            None
        }
    }

    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .terms
            .keys()
            .flat_map(|m| m.exponents().keys().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn scale(&self, q: &Rational) -> Coeff {
        if q.is_zero() {
            return Coeff::zero();
        }
        Coeff {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * q)).collect(),
        }
    }

    pub fn mul_mono(&self, mono: &ParamMono) -> Coeff {
        Coeff {
            terms: self.terms.iter().map(|(m, v)| (m.mul(mono), v.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Coeff {
        let mut out = Coeff::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Integer or rational power. Sums only admit non-negative integer
    /// powers; monomials admit any power whose scalar root is exact.
    pub fn pow_rational(&self, e: &Rational) -> Result<Coeff> {
        if e.is_zero() {
            return Ok(Coeff::one());
        }
        if let Some((q, m)) = self.as_monomial() {
            let scalar = rational_pow(&q, e).ok_or_else(|| {
                Error::Unsupported(format!("{} ^ {} is not rational", fmt_rational(&q), fmt_rational(e)))
            })?;
            return Ok(Coeff::monomial(scalar, m.pow(e)));
        }
        if self.is_zero() {
            return if e.is_positive() {
                Ok(Coeff::zero())
            } else {
                Err(Error::Invalid("zero raised to a non-positive power".into()))
            };
        }
        if e.is_integer() && e.is_positive() {
            let n: u32 = e
                .numer()
                .try_into()
                .map_err(|_| Error::Unsupported("exponent too large".into()))?;
            return Ok(self.pow(n));
        }
        Err(Error::Unsupported(format!(
            "cannot raise the sum ({self}) to the power {}",
            fmt_rational(e)
        )))
    }

    /// Exact division; the divisor must be a single term.
    pub fn div(&self, other: &Coeff) -> Result<Coeff> {
        let (q, m) = other
            .as_monomial()
            .ok_or_else(|| Error::Unsupported(format!("cannot divide by the sum ({other})")))?;
        Ok(self.mul_mono(&m.inv()).scale(&q.recip()))
    }

    /// Substitutes rational values for the named parameters; the rest stay
    /// symbolic.
    pub fn eval(&self, values: &BTreeMap<String, Rational>) -> Result<Coeff> {
        let mut out = Coeff::zero();
        for (m, q) in &self.terms {
            let mut scalar = q.clone();
            let mut rest = BTreeMap::new();
            for (name, e) in m.exponents() {
                match values.get(name) {
                    Some(v) => {
                        let p = rational_pow(v, e).ok_or_else(|| {
                            Error::Unsupported(format!(
                                "{name} = {} raised to {} is not rational",
                                fmt_rational(v),
                                fmt_rational(e)
                            ))
                        })?;
                        scalar *= p;
                    }
                    None => {
                        rest.insert(name.clone(), e.clone());
                    }
                }
            }
            out.add_term(ParamMono::from_map(rest), scalar);
        }
        Ok(out)
    }

    /// Renders as a factor: parenthesized when it is a sum.
    pub fn fmt_factor(&self) -> String {
        if self.terms.len() > 1 {
            format!("({self})")
        } else {
            self.to_string()
        }
    }
}

/// `base^e` when the result is rational.
pub fn rational_pow(base: &Rational, e: &Rational) -> Option<Rational> {
    if e.is_zero() {
        return Some(Rational::one());
    }
    let n: i32 = e.numer().try_into().ok()?;
    let d: u32 = e.denom().try_into().ok()?;
    let root = if d == 1 {
        base.clone()
    } else {
        let num = exact_root(base.numer(), d)?;
        let den = exact_root(base.denom(), d)?;
        Rational::new(num, den)
    };
    if root.is_zero() {
        return (n > 0).then(Rational::zero);
    }
    Some(num_traits::pow::Pow::pow(&root, n))
}

fn exact_root(x: &Int, d: u32) -> Option<Int> {
    if x.is_negative() {
        if d % 2 == 0 {
            return None;
        }
        return exact_root(&-x, d).map(|r| -r);
    }
    let r = x.nth_root(d);
    (num_traits::pow::Pow::pow(&r, d) == *x).then_some(r)
}

impl From<Rational> for Coeff {
    fn from(q: Rational) -> Self {
        Coeff::monomial(q, ParamMono::one())
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::from(Rational::from_integer(Int::from(n)))
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        let mut out = self.clone();
        for (m, q) in &rhs.terms {
            out.add_term(m.clone(), q.clone());
        }
        out
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        let mut out = self.clone();
        for (m, q) in &rhs.terms {
            out.add_term(m.clone(), -q.clone());
        }
        out
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        let mut out = Coeff::zero();
        for (m1, q1) in &self.terms {
            for (m2, q2) in &rhs.terms {
                out.add_term(m1.mul(m2), q1 * q2);
            }
        }
        out
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            terms: self.terms.iter().map(|(m, q)| (m.clone(), -q.clone())).collect(),
        }
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(self, rhs: Coeff) -> Coeff {
        &self + &rhs
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, rhs: Coeff) -> Coeff {
        &self - &rhs
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, rhs: Coeff) -> Coeff {
        &self * &rhs
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // constant term last reads more naturally: "R*s - 1"
        let mut ordered: Vec<(&ParamMono, &Rational)> = self.terms.iter().filter(|(m, _)| !m.is_one()).collect();
        ordered.extend(self.terms.iter().filter(|(m, _)| m.is_one()));
        for (m, q) in ordered {
            let neg = q.is_negative();
            let abs = q.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{}", fmt_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&abs))?;
            }
        }
        Ok(())
    }
}
