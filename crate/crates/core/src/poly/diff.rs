//! Polynomial differential forms `Σ c · x^α · y^β · d^s y/dx^s` with at most one
//! derivative factor per term.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{render_mono, render_term, Coeff, ExpVector, MonomialOrder, Poly};
use crate::error::{Error, Result};
use crate::exactmath::Rational;

/// Term key: variable exponents and the derivative order (`None` for a
/// derivative-free term). `Some(0)` never occurs.
pub type DiffKey = (ExpVector, Option<u32>);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffPoly {
    vars: Vec<String>,
    indep: Option<String>,
    dep: Option<String>,
    terms: BTreeMap<DiffKey, Coeff>,
}

impl DiffPoly {
    pub fn new(vars: Vec<String>, indep: Option<String>, dep: Option<String>) -> Result<Self> {
        for v in indep.iter().chain(dep.iter()) {
            if !vars.contains(v) {
                return Err(Error::Invalid(format!("`{v}` is not an indeterminate")));
            }
        }
        if indep.is_some() && indep == dep {
            return Err(Error::Invalid("dependent and independent variable coincide".into()));
        }
        Ok(DiffPoly { vars, indep, dep, terms: BTreeMap::new() })
    }

    pub fn from_poly(p: &Poly) -> Self {
        let mut out = DiffPoly { vars: p.vars().to_vec(), indep: None, dep: None, terms: BTreeMap::new() };
        for (e, c) in p.terms() {
            out.terms.insert((e.clone(), None), c.clone());
        }
        out
    }

    /// Same form with empty term list.
    pub fn empty_like(&self) -> Self {
        DiffPoly { vars: self.vars.clone(), indep: self.indep.clone(), dep: self.dep.clone(), terms: BTreeMap::new() }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn indep(&self) -> Option<&str> {
        self.indep.as_deref()
    }

    pub fn dep(&self) -> Option<&str> {
        self.dep.as_deref()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpVector, Option<u32>, &Coeff)> {
        self.terms.iter().map(|((e, s), c)| (e, *s, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[Rational], deriv: Option<u32>) -> Coeff {
        self.terms.get(&(e.to_vec(), deriv)).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn max_order(&self) -> u32 {
        self.terms.keys().filter_map(|(_, s)| *s).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, mut e: ExpVector, deriv: Option<u32>, c: Coeff) -> Result<()> {
        if e.len() != self.vars.len() {
            return Err(Error::Invalid("exponent vector length mismatch".into()));
        }
        let deriv = match deriv {
            Some(0) => {
                let d = self.dep_index().ok_or_else(|| Error::Invalid("no dependent variable".into()))?;
                e[d] += Rational::one();
                None
            }
            Some(s) => {
                if self.indep.is_none() || self.dep.is_none() {
                    return Err(Error::Invalid("derivative term without declared variables".into()));
                }
                Some(s)
            }
            None => None,
        };
        if c.is_zero() {
            return Ok(());
        }
        let key = (e, deriv);
        let sum = match self.terms.get(&key) {
            Some(old) => old + &c,
            None => c,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
        Ok(())
    }

    pub fn dep_index(&self) -> Option<usize> {
        self.dep.as_deref().and_then(|d| self.var_index(d))
    }

    pub fn indep_index(&self) -> Option<usize> {
        self.indep.as_deref().and_then(|d| self.var_index(d))
    }

    pub fn has_derivatives(&self) -> bool {
        self.terms.keys().any(|(_, s)| s.is_some())
    }

    pub fn to_poly(&self) -> Option<Poly> {
        if self.has_derivatives() {
            return None;
        }
        Some(Poly::from_terms(self.vars.clone(), self.terms.iter().map(|((e, _), c)| (e.clone(), c.clone()))))
    }

    /// Kruskal point of a term: a derivative factor `d^s y/dx^s` moves the
    /// `x` coordinate by `-s` and the `y` coordinate by `+1`.
    pub fn kruskal_point(&self, e: &[Rational], deriv: Option<u32>) -> ExpVector {
        let mut p = e.to_vec();
        if let Some(s) = deriv {
            let (i, d) = (self.indep_index().unwrap(), self.dep_index().unwrap());
            p[i] -= Rational::from_integer(s.into());
            p[d] += Rational::one();
        }
        p
    }

    pub fn add(&self, other: &DiffPoly) -> Result<DiffPoly> {
        self.check_same(other)?;
        let mut out = self.clone();
        for ((e, s), c) in &other.terms {
            out.add_term(e.clone(), *s, c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffPoly) -> Result<DiffPoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffPoly {
        self.scale(&-Coeff::one())
    }

    pub fn scale(&self, k: &Coeff) -> DiffPoly {
        let mut out = self.empty_like();
        for ((e, s), c) in &self.terms {
            out.add_term(e.clone(), *s, c * k).expect("same shape");
        }
        out
    }

    fn check_same(&self, other: &DiffPoly) -> Result<()> {
        if self.vars != other.vars || self.indep != other.indep || self.dep != other.dep {
            return Err(Error::Invalid("differential forms over different variables".into()));
        }
        Ok(())
    }

    pub fn eval_params(&self, values: &BTreeMap<String, Rational>) -> Result<DiffPoly> {
        let mut out = self.empty_like();
        for ((e, s), c) in &self.terms {
            out.add_term(e.clone(), *s, c.eval(values)?)?;
        }
        Ok(out)
    }

    /// Keeps only the terms selected by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&ExpVector, Option<u32>) -> bool) -> DiffPoly {
        let mut out = self.empty_like();
        for ((e, s), c) in &self.terms {
            if keep(e, *s) {
                out.terms.insert((e.clone(), *s), c.clone());
            }
        }
        out
    }

    /// Renames indeterminates (derivative variables follow).
    pub fn rename(&self, map: &BTreeMap<String, String>) -> DiffPoly {
        let f = |v: &String| map.get(v).cloned().unwrap_or_else(|| v.clone());
        DiffPoly {
            vars: self.vars.iter().map(f).collect(),
            indep: self.indep.as_ref().map(f),
            dep: self.dep.as_ref().map(f),
            terms: self.terms.clone(),
        }
    }

    /// Same form over a reordered indeterminate list (a superset is allowed).
    pub fn with_vars(&self, vars: &[String]) -> Result<DiffPoly> {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::Invalid(format!("indeterminate `{v}` missing from target ring")))
            })
            .collect::<Result<_>>()?;
        let mut out = DiffPoly::new(vars.to_vec(), self.indep.clone(), self.dep.clone())?;
        for ((e, s), c) in &self.terms {
            let mut ne = vec![Rational::zero(); vars.len()];
            for (i, x) in e.iter().enumerate() {
                ne[map[i]] = x.clone();
            }
            out.add_term(ne, *s, c.clone())?;
        }
        Ok(out)
    }

    /// Terms in display order: higher derivatives first, then decreasing
    /// graded reverse lex.
    pub fn sorted_terms(&self) -> Vec<(&ExpVector, Option<u32>, &Coeff)> {
        let mut v: Vec<_> = self.terms().collect();
        v.sort_by(|a, b| display_cmp(b, a));
        v
    }

    fn deriv_factor(&self, s: u32) -> String {
        format!("D({},{},{})", self.dep.as_deref().unwrap_or("?"), self.indep.as_deref().unwrap_or("?"), s)
    }

    fn render_with(&self, expand: bool) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut pieces: Vec<(bool, String)> = Vec::new();
        for (e, s, c) in self.sorted_terms() {
            let mut mono = render_mono(&self.vars, e);
            if let Some(s) = s {
                if !mono.is_empty() {
                    mono.push('*');
                }
                mono.push_str(&self.deriv_factor(s));
            }
            if expand && c.num_terms() > 1 {
                let parts = c.terms().filter(|(m, _)| !m.is_one()).chain(c.terms().filter(|(m, _)| m.is_one()));
                for (pm, q) in parts {
                    pieces.push(render_term(&Coeff::monomial(q.clone(), pm.clone()), &mono));
                }
            } else {
                pieces.push(render_term(c, &mono));
            }
        }
        let mut out = String::new();
        for (i, (neg, body)) in pieces.into_iter().enumerate() {
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }

    /// Every coefficient written out term by term, so the text is a plain sum
    /// of monomials.
    pub fn render_expanded(&self) -> String {
        self.render_with(true)
    }
}

fn display_cmp(a: &(&ExpVector, Option<u32>, &Coeff), b: &(&ExpVector, Option<u32>, &Coeff)) -> Ordering {
    a.1.cmp(&b.1).then_with(|| MonomialOrder::GrevLex.cmp(a.0, b.0))
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render_with(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::exp_from_ints;

    fn vdp() -> DiffPoly {
        let vars = vec!["x".to_string(), "y".to_string()];
        let mut p = DiffPoly::new(vars, Some("x".into()), Some("y".into())).unwrap();
        p.add_term(exp_from_ints(&[0, 0]), Some(2), Coeff::one()).unwrap();
        p.add_term(exp_from_ints(&[0, 2]), Some(1), Coeff::param("mu")).unwrap();
        p.add_term(exp_from_ints(&[0, 0]), Some(1), -Coeff::param("mu")).unwrap();
        p.add_term(exp_from_ints(&[0, 1]), None, Coeff::param("w").pow(2)).unwrap();
        p
    }

    #[test]
    fn kruskal_points_of_oscillator() {
        let p = vdp();
        let mut pts: Vec<ExpVector> = p.terms().map(|(e, s, _)| p.kruskal_point(e, s)).collect();
        pts.sort();
        assert_eq!(pts, vec![exp_from_ints(&[-2, 1]), exp_from_ints(&[-1, 1]), exp_from_ints(&[-1, 3]), exp_from_ints(&[0, 1])]);
    }

    #[test]
    fn zeroth_derivative_folds_into_power() {
        let mut p = DiffPoly::new(vec!["x".into(), "y".into()], Some("x".into()), Some("y".into())).unwrap();
        p.add_term(exp_from_ints(&[1, 0]), Some(0), Coeff::one()).unwrap();
        assert_eq!(p.terms().next().unwrap().0, &exp_from_ints(&[1, 1]));
        assert!(!p.has_derivatives());
    }

    #[test]
    fn rendering() {
        assert_eq!(vdp().to_string(), "D(y,x,2) + mu*y^2*D(y,x,1) - mu*D(y,x,1) + w^2*y");
        let mut q = DiffPoly::new(vec!["x".into()], None, None).unwrap();
        q.add_term(exp_from_ints(&[1]), None, Coeff::param("a") + Coeff::one()).unwrap();
        assert_eq!(q.to_string(), "(a + 1)*x");
        assert_eq!(q.render_expanded(), "a*x + x");
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = vdp();
        assert!(p.sub(&p).unwrap().is_zero());
    }
}
