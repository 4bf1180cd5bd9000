//! Multivariate Laurent polynomials with parameter-carrying coefficients.
//!
//! Exponents are rationals so that substitutions like `x_j = s·x_1^(1/2)`
//! stay inside the same type. Integer exponents are the normal case, and the
//! Gröbner engine insists on non-negative integer ones.

mod coeff;
pub mod diff;
mod order;
pub(crate) mod sparse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

pub use coeff::{fmt_power, rational_pow, Coeff, ParamMono};
pub use diff::DiffPoly;
pub use order::MonomialOrder;

use crate::error::{Error, Result};
use crate::exactmath::{fmt_rational, Int, Rational};

pub type ExpVector = Vec<Rational>;

pub fn exp_from_ints(v: &[i64]) -> ExpVector {
    v.iter().map(|x| Rational::from_integer(Int::from(*x))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    vars: Vec<String>,
    terms: BTreeMap<ExpVector, Coeff>,
}

impl Poly {
    pub fn zero(vars: Vec<String>) -> Self {
        Poly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Vec<String>, c: Coeff) -> Self {
        let n = vars.len();
        Poly::from_terms(vars, [(vec![Rational::zero(); n], c)])
    }

    pub fn var(vars: Vec<String>, name: &str) -> Result<Self> {
        let idx = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::Invalid(format!("unknown indeterminate `{name}`")))?;
        let mut e = vec![Rational::zero(); vars.len()];
        e[idx] = Rational::one();
        Ok(Poly::from_terms(vars, [(e, Coeff::one())]))
    }

    pub fn monomial(vars: Vec<String>, exps: ExpVector, c: Coeff) -> Self {
        Poly::from_terms(vars, [(exps, c)])
    }

    pub fn from_terms(vars: Vec<String>, it: impl IntoIterator<Item = (ExpVector, Coeff)>) -> Self {
        let mut p = Poly::zero(vars);
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    /// Builds from integer exponent rows and rational coefficients.
    pub fn from_int_terms(vars: &[&str], terms: &[(i64, &[i64])]) -> Self {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        Poly::from_terms(
            vars,
            terms.iter().map(|(c, e)| (exp_from_ints(e), Coeff::from(*c))),
        )
    }

    pub fn add_term(&mut self, e: ExpVector, c: Coeff) {
        assert_eq!(e.len(), self.vars.len(), "exponent length mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpVector, &Coeff)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[Rational]) -> Coeff {
        self.terms.get(e).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Exponent vectors with nonzero coefficient.
    pub fn support(&self) -> BTreeSet<ExpVector> {
        self.terms.keys().cloned().collect()
    }

    /// Support as integer points; fails on fractional exponents.
    pub fn integer_support(&self) -> Result<Vec<Vec<i64>>> {
        self.terms
            .keys()
            .map(|e| {
                e.iter()
                    .map(|x| {
                        crate::exactmath::to_i64(x)
                            .ok_or_else(|| Error::Invalid("fractional exponent in support".into()))
                    })
                    .collect()
            })
            .collect()
    }

    /// Non-negative integer exponents and rational coefficients only.
    pub fn is_polynomial(&self) -> bool {
        self.terms
            .iter()
            .all(|(e, c)| e.iter().all(|x| x.is_integer() && !x.is_negative()) && c.as_rational().is_some())
    }

    fn check_vars(&self, other: &Poly) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::Invalid(format!(
                "mismatched indeterminates: [{}] vs [{}]",
                self.vars.join(", "),
                other.vars.join(", ")
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.check_vars(other)?;
        let mut out = Poly::zero(self.vars.clone());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: ExpVector = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Coeff) -> Poly {
        let mut out = Poly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::constant(self.vars.clone(), Coeff::one());
        for _ in 0..n {
            out = out.mul(self).expect("same indeterminates");
        }
        out
    }

    /// Substitutes `x_j = s · x_1^r` where `x_1` is the first indeterminate.
    /// `x_j` leaves the indeterminate list; each of its exponents `α_j`
    /// becomes a factor `s^α_j` and adds `α_j·r` to the `x_1` exponent.
    pub fn substitute_power(&self, var: &str, s: &Coeff, r: &Rational) -> Result<Poly> {
        let j = self
            .var_index(var)
            .ok_or_else(|| Error::Invalid(format!("unknown indeterminate `{var}`")))?;
        if j == 0 {
            return Err(Error::Invalid(
                "cannot substitute the expansion variable into itself".into(),
            ));
        }
        let mut vars = self.vars.clone();
        vars.remove(j);
        let mut out = Poly::zero(vars);
        for (e, c) in &self.terms {
            let aj = &e[j];
            let mut ne = e.clone();
            ne.remove(j);
            ne[0] += aj * r;
            out.add_term(ne, c * &s.pow_rational(aj)?);
        }
        Ok(out)
    }

    /// Replaces parameters by rational values in every coefficient.
    pub fn eval_params(&self, values: &BTreeMap<String, Rational>) -> Result<Poly> {
        let mut out = Poly::zero(self.vars.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.eval(values)?);
        }
        Ok(out)
    }

    /// Same polynomial over a different ordering/superset of indeterminates.
    pub fn with_vars(&self, vars: &[String]) -> Result<Poly> {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::Invalid(format!("indeterminate `{v}` missing from target ring")))
            })
            .collect::<Result<_>>()?;
        let mut out = Poly::zero(vars.to_vec());
        for (e, c) in &self.terms {
            let mut ne = vec![Rational::zero(); vars.len()];
            for (i, x) in e.iter().enumerate() {
                ne[map[i]] = x.clone();
            }
            out.add_term(ne, c.clone());
        }
        Ok(out)
    }

    /// Terms sorted by decreasing `ord`.
    pub fn sorted_terms(&self, ord: MonomialOrder) -> Vec<(&ExpVector, &Coeff)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| ord.cmp(b.0, a.0));
        v
    }

    /// Canonical text rendering under `ord`.
    pub fn render(&self, ord: MonomialOrder) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.sorted_terms(ord).into_iter().enumerate() {
            let mono = render_mono(&self.vars, e);
            let (neg, body) = render_term(c, &mono);
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
}

pub(crate) fn render_mono(vars: &[String], e: &[Rational]) -> String {
    let parts: Vec<String> = vars
        .iter()
        .zip(e)
        .filter(|(_, x)| !x.is_zero())
        .map(|(v, x)| fmt_power(v, x))
        .collect();
    parts.join("*")
}

/// Splits a term into sign and body, e.g. `(true, "2*R*x^2")`.
pub(crate) fn render_term(c: &Coeff, mono: &str) -> (bool, String) {
    let (neg, cstr) = match c.as_monomial() {
        Some((q, m)) => {
            let abs = q.abs();
            let scalar = if abs.is_one() { String::new() } else { fmt_rational(&abs) };
            let params = m.to_string();
            let joined: Vec<&str> = [scalar.as_str(), params.as_str()]
                .into_iter()
                .filter(|s| !s.is_empty())
                .collect();
            (q.is_negative(), joined.join("*"))
        }
        None => (false, c.fmt_factor()),
    };
    let body = match (cstr.is_empty(), mono.is_empty()) {
        (true, true) => "1".to_string(),
        (true, false) => mono.to_string(),
        (false, true) => cstr,
        (false, false) => format!("{cstr}*{mono}"),
    };
    (neg, body)
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(MonomialOrder::GrevLex))
    }
}

/// Multivariate division: remainder of `f` modulo `divisors` under `ord`.
pub fn reduce(f: &Poly, divisors: &[Poly], ord: MonomialOrder) -> Result<Poly> {
    if divisors.is_empty() {
        return Err(Error::Invalid("reduce needs at least one divisor".into()));
    }
    let sf = sparse::SPoly::from_poly(f, ord)?;
    let basis: Vec<sparse::SPoly> = divisors
        .iter()
        .map(|g| {
            g.check_vars(f)?;
            sparse::SPoly::from_poly(g, ord)
        })
        .collect::<Result<_>>()?;
    Ok(sparse::normal_form(&sf, &basis, ord).to_poly(f.vars()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{rat, rat_int};

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    #[test]
    fn support_of_quadratic() {
        let vars = ["x1", "x2"];
        let f = Poly::from_int_terms(
            &vars,
            &[(1, &[0, 0]), (2, &[1, 0]), (3, &[0, 1]), (4, &[2, 0]), (5, &[1, 1]), (6, &[0, 2])],
        );
        let expected: BTreeSet<ExpVector> = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
            .iter()
            .map(|e| exp_from_ints(e))
            .collect();
        assert_eq!(f.support(), expected);
        assert!(Poly::zero(xy()).support().is_empty());

        let g = Poly::from_int_terms(&["x", "y"], &[(1, &[0, 1]), (-1, &[1, 0]), (-1, &[2, 2])]);
        let expected: BTreeSet<ExpVector> = [[0, 1], [1, 0], [2, 2]].iter().map(|e| exp_from_ints(e)).collect();
        assert_eq!(g.support(), expected);
    }

    #[test]
    fn ring_arithmetic() {
        let x = Poly::var(xy(), "x").unwrap();
        let y = Poly::var(xy(), "y").unwrap();
        let p = x.sub(&y).unwrap().mul(&x.add(&y).unwrap()).unwrap();
        assert_eq!(p.render(MonomialOrder::Lex), "x^2 - y^2");
        assert_eq!(p.add(&Poly::zero(xy())).unwrap(), p);
        let other = Poly::zero(vec!["z".into()]);
        assert!(p.add(&other).is_err());
    }

    #[test]
    fn division_steps() {
        let g = Poly::from_int_terms(&["x", "y"], &[(1, &[2, 0]), (-1, &[0, 0])]);
        assert!(reduce(&g, &[g.clone()], MonomialOrder::Lex).unwrap().is_zero());
        let f = Poly::from_int_terms(&["x", "y"], &[(1, &[2, 1])]);
        let r = reduce(&f, &[g.clone()], MonomialOrder::Lex).unwrap();
        assert_eq!(r.render(MonomialOrder::Lex), "y");
        let laurent = Poly::from_int_terms(&["x", "y"], &[(1, &[-1, 1])]);
        let err = reduce(&laurent, &[g], MonomialOrder::Lex).unwrap_err();
        assert!(err.to_string().contains("non-negative exponents"));
    }

    #[test]
    fn substitution_into_power() {
        let f = Poly::from_int_terms(&["x1", "x2"], &[(1, &[1, 1])]);
        let s = Coeff::param("s");
        let g = f.substitute_power("x2", &s, &rat(1, 2)).unwrap();
        assert_eq!(g.vars(), &["x1".to_string()]);
        assert_eq!(g.to_string(), "s*x1^(3/2)");
        // r = 0, s = 1 leaves the x1-part unchanged
        let h = Poly::from_int_terms(&["x1", "x2"], &[(3, &[2, 0]), (-1, &[0, 0])]);
        let same = h.substitute_power("x2", &Coeff::one(), &rat_int(0)).unwrap();
        assert_eq!(same, Poly::from_int_terms(&["x1"], &[(3, &[2]), (-1, &[0])]));
    }

    #[test]
    fn riccati_algebraic_part_substitution() {
        // -R x y with x = s eps^(1/2), vars (eps, x, y)
        let vars: Vec<String> = ["eps", "x", "y"].iter().map(|s| s.to_string()).collect();
        let t = Poly::monomial(vars, exp_from_ints(&[0, 1, 1]), -Coeff::param("R"));
        let out = t.substitute_power("x", &Coeff::param("s"), &rat(1, 2)).unwrap();
        assert_eq!(out.to_string(), "-R*s*eps^(1/2)*y");
    }

    #[test]
    fn rendering_is_canonical() {
        let vars: Vec<String> = vec!["x".into(), "y".into()];
        let p = Poly::from_terms(
            vars,
            [
                (exp_from_ints(&[3, -1]), Coeff::from(rat(1, 2))),
                (exp_from_ints(&[0, 0]), Coeff::param("R").pow(2)),
                (exp_from_ints(&[1, 0]), &Coeff::param("a") + &Coeff::one()),
            ],
        );
        assert_eq!(p.to_string(), "1/2*x^3*y^-1 + (a + 1)*x + R^2");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn poly() -> impl Strategy<Value = Poly> {
            proptest::collection::vec((-3i64..=3, 0i64..3, 0i64..3), 0..5).prop_map(|ts| {
                let vars: Vec<String> = vec!["x".into(), "y".into()];
                Poly::from_terms(vars, ts.into_iter().map(|(c, a, b)| (exp_from_ints(&[a, b]), Coeff::from(c))))
            })
        }

        proptest! {
            #[test]
            fn ring_axioms(f in poly(), g in poly(), h in poly()) {
                let lhs = f.add(&g).unwrap().mul(&h).unwrap();
                let rhs = f.mul(&h).unwrap().add(&g.mul(&h).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
                prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
                prop_assert_eq!(f.mul(&g).unwrap().mul(&h).unwrap(), f.mul(&g.mul(&h).unwrap()).unwrap());
            }

            #[test]
            fn support_of_product_in_minkowski_sum(f in poly(), g in poly()) {
                let sums: BTreeSet<ExpVector> = f.support().iter().flat_map(|a| {
                    g.support().into_iter().map(move |b| a.iter().zip(&b).map(|(x, y)| x + y).collect::<ExpVector>())
                }).collect();
                prop_assert!(f.mul(&g).unwrap().support().is_subset(&sums));
            }

            #[test]
            fn membership_by_construction(q1 in poly(), q2 in poly()) {
                let g1 = Poly::from_int_terms(&["x", "y"], &[(1, &[2, 0]), (-1, &[0, 1])]);
                let g2 = Poly::from_int_terms(&["x", "y"], &[(1, &[1, 1]), (-1, &[0, 0])]);
                let f = q1.mul(&g1).unwrap().add(&q2.mul(&g2).unwrap()).unwrap();
                // {g1, g2} is not a Gröbner basis, so compare against one
                let gb = crate::groebner::groebner_basis(&[g1, g2], MonomialOrder::GrevLex).unwrap();
                prop_assert!(reduce(&f, gb.generators(), MonomialOrder::GrevLex).unwrap().is_zero());
            }
        }
    }
}
