//! Dense-exponent sparse polynomials used by division and Buchberger. Terms are
//! kept sorted in strictly decreasing monomial order.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::{MonomialOrder, Poly};
use crate::error::{Error, Result};
use crate::exactmath::{Int, Rational};

pub type Mono = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SPoly {
    pub terms: Vec<(Mono, Rational)>,
}

pub fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn lcm(a: &[u32], b: &[u32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

pub fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

fn mono_div(a: &[u32], b: &[u32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn mono_mul(a: &[u32], b: &[u32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl SPoly {
    pub fn zero() -> Self {
        SPoly { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lm(&self) -> &Mono {
        &self.terms[0].0
    }

    pub fn lc(&self) -> &Rational {
        &self.terms[0].1
    }

    pub fn from_terms(mut terms: Vec<(Mono, Rational)>, ord: MonomialOrder) -> Self {
        terms.retain(|(_, c)| !c.is_zero());
        terms.sort_by(|a, b| ord.cmp(&b.0, &a.0));
        let mut out: Vec<(Mono, Rational)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc += c,
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        SPoly { terms: out }
    }

    pub fn from_poly(p: &Poly, ord: MonomialOrder) -> Result<Self> {
        let mut terms = Vec::with_capacity(p.num_terms());
        for (e, c) in p.terms() {
            let mut m = Vec::with_capacity(e.len());
            for x in e {
                if !x.is_integer() || x < &Rational::zero() {
                    return Err(Error::Invalid(
                        "Gröbner engine requires non-negative exponents".into(),
                    ));
                }
                m.push(u32::try_from(x.numer()).map_err(|_| Error::Unsupported("exponent too large".into()))?);
            }
            let q = c.as_rational().ok_or_else(|| {
                Error::Invalid(format!(
                    "coefficient {c} carries parameters; promote them to indeterminates first"
                ))
            })?;
            terms.push((m, q));
        }
        Ok(SPoly::from_terms(terms, ord))
    }

    pub fn to_poly(&self, vars: &[String]) -> Poly {
        Poly::from_terms(
            vars.to_vec(),
            self.terms.iter().map(|(m, c)| {
                (
                    m.iter().map(|x| Rational::from_integer(Int::from(*x))).collect(),
                    c.clone().into(),
                )
            }),
        )
    }

    pub fn monic(mut self) -> Self {
        if self.is_zero() {
            return self;
        }
        let inv = self.lc().recip();
        if !inv.is_one() {
            for (_, c) in self.terms.iter_mut() {
                *c *= &inv;
            }
        }
        self
    }

    /// `self - c * x^m * g`, merging sorted term lists.
    pub fn sub_scaled(&self, c: &Rational, m: &[u32], g: &SPoly, ord: MonomialOrder) -> SPoly {
        let mut out = Vec::with_capacity(self.terms.len() + g.terms.len());
        let mut i = 0;
        let shifted = g.terms.iter().map(|(gm, gc)| (mono_mul(gm, m), -(gc * c)));
        let mut shifted = shifted.peekable();
        while i < self.terms.len() || shifted.peek().is_some() {
            let take_self = match (self.terms.get(i), shifted.peek()) {
                (Some(a), Some(b)) => match ord.cmp(&a.0, &b.0) {
                    Ordering::Greater => Some(true),
                    Ordering::Less => Some(false),
                    Ordering::Equal => None,
                },
                (Some(_), None) => Some(true),
                (None, Some(_)) => Some(false),
                (None, None) => unreachable!(),
            };
            match take_self {
                Some(true) => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Some(false) => out.push(shifted.next().unwrap()),
                None => {
                    let (bm, bc) = shifted.next().unwrap();
                    let s = &self.terms[i].1 + bc;
                    if !s.is_zero() {
                        out.push((bm, s));
                    }
                    i += 1;
                }
            }
        }
        SPoly { terms: out }
    }

    pub fn s_poly(f: &SPoly, g: &SPoly, ord: MonomialOrder) -> SPoly {
        let l = lcm(f.lm(), g.lm());
        let mf = mono_div(&l, f.lm());
        let mg = mono_div(&l, g.lm());
        // lc(f) = lc(g) = 1 for basis elements, but stay general
        let a = SPoly::zero().sub_scaled(&-f.lc().recip(), &mf, f, ord);
        a.sub_scaled(&g.lc().recip(), &mg, g, ord)
    }
}

/// Full normal form of `f` modulo `basis`: no term of the result is divisible
/// by any leading monomial. Divisors are tried in list order.
pub fn normal_form(f: &SPoly, basis: &[SPoly], ord: MonomialOrder) -> SPoly {
    let mut p = f.clone();
    let mut rem: Vec<(Mono, Rational)> = Vec::new();
    while !p.is_zero() {
        let (lm, lc) = p.terms[0].clone();
        match basis.iter().find(|g| !g.is_zero() && divides(g.lm(), &lm)) {
            Some(g) => {
                let q = &lc / g.lc();
                let m = mono_div(&lm, g.lm());
                p = p.sub_scaled(&q, &m, g, ord);
            }
            None => {
                rem.push((lm, lc));
                p.terms.remove(0);
            }
        }
    }
    SPoly { terms: rem }
}
