use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::exactmath::{fmt_rational, Rational};
use crate::poly::fmt_power;

/// Truncated Puiseux series `Σ c_e t^e + O(t^ω)`. `omega = None` marks an
/// exact (finite) sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuiseuxSeries {
    var: String,
    terms: BTreeMap<Rational, Rational>,
    omega: Option<Rational>,
}

fn min_opt(a: Option<Rational>, b: Option<Rational>) -> Option<Rational> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl PuiseuxSeries {
    pub fn zero(var: &str) -> Self {
        PuiseuxSeries { var: var.to_string(), terms: BTreeMap::new(), omega: None }
    }

    pub fn one(var: &str) -> Self {
        Self::monomial(var, Rational::one(), Rational::zero())
    }

    pub fn monomial(var: &str, c: Rational, e: Rational) -> Self {
        let mut s = Self::zero(var);
        if !c.is_zero() {
            s.terms.insert(e, c);
        }
        s
    }

    pub fn from_terms(var: &str, it: impl IntoIterator<Item = (Rational, Rational)>, omega: Option<Rational>) -> Self {
        let mut s = Self::zero(var);
        for (e, c) in it {
            s.add_term(e, c);
        }
        s.omega = omega;
        s.truncate_terms();
        s
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn omega(&self) -> Option<&Rational> {
        self.omega.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.omega.is_none()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &Rational) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn lead(&self) -> Option<(&Rational, &Rational)> {
        self.terms.iter().next()
    }

    pub fn lead_exponent(&self) -> Option<Rational> {
        self.lead().map(|(e, _)| e.clone())
    }

    pub fn add_term(&mut self, e: Rational, c: Rational) {
        if c.is_zero() {
            return;
        }
        let v = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn with_omega(mut self, omega: Option<Rational>) -> Self {
        self.omega = omega;
        self.truncate_terms();
        self
    }

    /// Truncates to `O(t^ω)` (keeping the tighter bound).
    pub fn truncate(&self, omega: &Rational) -> Self {
        self.clone().with_omega(min_opt(self.omega.clone(), Some(omega.clone())))
    }

    fn truncate_terms(&mut self) {
        if let Some(w) = &self.omega {
            self.terms.retain(|e, _| e < w);
        }
    }

    fn check_var(&self, other: &PuiseuxSeries) {
        assert_eq!(self.var, other.var, "series in different variables");
    }

    pub fn add(&self, other: &PuiseuxSeries) -> PuiseuxSeries {
        self.check_var(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out.with_omega(min_opt(self.omega.clone(), other.omega.clone()))
    }

    pub fn neg(&self) -> PuiseuxSeries {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &PuiseuxSeries) -> PuiseuxSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> PuiseuxSeries {
        if k.is_zero() {
            return PuiseuxSeries::zero(&self.var).with_omega(self.omega.clone());
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= k;
        }
        out
    }

    /// Multiplies by `t^e`.
    pub fn shift(&self, e: &Rational) -> PuiseuxSeries {
        PuiseuxSeries {
            var: self.var.clone(),
            terms: self.terms.iter().map(|(x, c)| (x + e, c.clone())).collect(),
            omega: self.omega.as_ref().map(|w| w + e),
        }
    }

    /// Product, known up to `min(ω_a + lead_b, ω_b + lead_a)`.
    pub fn mul(&self, other: &PuiseuxSeries) -> PuiseuxSeries {
        self.check_var(other);
        let bound = |w: &Option<Rational>, s: &PuiseuxSeries| -> Option<Rational> {
            let w = w.as_ref()?;
            Some(match s.lead_exponent() {
                Some(l) => w + l,
                // only the O() part of s remains
                None => match &s.omega {
                    Some(ws) => w + ws,
                    None => return None,
                },
            })
        };
        let omega = min_opt(bound(&self.omega, other), bound(&other.omega, self));
        let mut out = PuiseuxSeries::zero(&self.var);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out.with_omega(omega)
    }

    pub fn pow(&self, n: u32) -> PuiseuxSeries {
        let mut out = PuiseuxSeries::one(&self.var);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// `d/dt`.
    pub fn derivative(&self) -> PuiseuxSeries {
        let mut out = PuiseuxSeries::zero(&self.var);
        for (e, c) in &self.terms {
            out.add_term(e - Rational::one(), c * e);
        }
        out.with_omega(self.omega.as_ref().map(|w| w - Rational::one()))
    }

    pub fn nth_derivative(&self, k: u32) -> PuiseuxSeries {
        (0..k).fold(self.clone(), |s, _| s.derivative())
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let mono = if e.is_zero() { String::new() } else { fmt_power(&self.var, e) };
            let abs = c.abs();
            let body = match (abs.is_one(), mono.is_empty()) {
                (_, true) => fmt_rational(&abs),
                (true, false) => mono,
                (false, false) => format!("{}*{mono}", fmt_rational(&abs)),
            };
            if i == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        if let Some(w) = &self.omega {
            if !out.is_empty() {
                out.push_str(" + ");
            }
            out.push_str(&format!("O({})", fmt_power(&self.var, w)));
        }
        if out.is_empty() {
            out.push('0');
        }
        write!(f, "{out}")
    }
}
