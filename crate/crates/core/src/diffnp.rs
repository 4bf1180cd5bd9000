//! Differential equations: Kruskal facet split, power-law change of the
//! independent variable, power-law facet solutions, the restricted
//! iteration, and the perturbation equation for a trial `y0 (1 + … + z)`.
//!
//! Equations are [`DiffPoly`] values with at most one derivative factor
//! `d^s y/dx^s` per term and derivative order at most 2.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{fmt_rational, Rational};
use crate::npexpand::{eval_poly, facet_roots, falling_factorial_poly, iterate, Expansion, ExpansionEquation};
use crate::poly::{fmt_power, Coeff, DiffPoly, ExpVector, Poly};
use crate::polytope::DistinguishedFacet;

fn rat_u32(n: u32) -> Rational {
    Rational::from_integer(n.into())
}

/// Change of independent variable `old = s · new^r`, applied with the
/// chain rule. If `new` is already an indeterminate the two merge; the old
/// independent variable disappears.
pub fn scale_independent(eq: &DiffPoly, new_var: &str, s: &Coeff, r: &Rational) -> Result<DiffPoly> {
    if r.is_zero() {
        return Err(Error::Invalid("scaling exponent must be nonzero".into()));
    }
    if s.is_zero() {
        return Err(Error::Invalid("scaling factor must be nonzero".into()));
    }
    if eq.max_order() > 2 {
        return Err(Error::Unsupported(format!(
            "derivative order {} exceeds 2 under a change of variable",
            eq.max_order()
        )));
    }
    let xi = eq.indep_index().ok_or_else(|| Error::Invalid("equation has no independent variable".into()))?;
    if eq.dep() == Some(new_var) {
        return Err(Error::Invalid(format!("`{new_var}` is the dependent variable")));
    }
    let old = eq.vars()[xi].clone();
    let merge = eq.var_index(new_var).filter(|&i| i != xi);
    let vars: Vec<String> = match merge {
        Some(_) => eq.vars().iter().filter(|v| **v != old).cloned().collect(),
        None => eq.vars().iter().map(|v| if *v == old { new_var.to_string() } else { v.clone() }).collect(),
    };
    let ui = vars.iter().position(|v| v == new_var).unwrap();
    let mut out = DiffPoly::new(vars.clone(), Some(new_var.to_string()), eq.dep().map(str::to_string))?;

    let inv_sr = Coeff::one().div(&s.scale(r))?;
    let one = Rational::one();
    for (e, deriv, c) in eq.terms() {
        let mut ne = vec![Rational::zero(); vars.len()];
        for (k, x) in e.iter().enumerate() {
            if k == xi {
                continue;
            }
            let pos = vars.iter().position(|v| *v == eq.vars()[k]).unwrap();
            ne[pos] += x;
        }
        ne[ui] += r * &e[xi];
        let base = c * &s.pow_rational(&e[xi])?;
        match deriv {
            None => out.add_term(ne, None, base)?,
            Some(1) => {
                let mut e1 = ne.clone();
                e1[ui] += &one - r;
                out.add_term(e1, Some(1), &base * &inv_sr)?;
            }
            Some(2) => {
                let k = &inv_sr * &inv_sr;
                let mut e2 = ne.clone();
                e2[ui] += Rational::from_integer(2.into()) * (&one - r);
                out.add_term(e2, Some(2), &base * &k)?;
                let mut e1 = ne;
                e1[ui] += &one - Rational::from_integer(2.into()) * r;
                out.add_term(e1, Some(1), (&base * &k).scale(&(&one - r)))?;
            }
            Some(s) => return Err(Error::Unsupported(format!("derivative order {s} exceeds 2"))),
        }
    }
    Ok(out)
}

/// Facet terms and the off-facet terms moved to the other side:
/// `ftilde = gtilde`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetSplitDiff {
    pub ftilde: DiffPoly,
    pub gtilde: DiffPoly,
    pub gap: Option<Rational>,
}

fn on_facet(df: &DistinguishedFacet, p: &[Rational]) -> bool {
    let v: Rational = df.normal.iter().zip(p).map(|(m, x)| Rational::from_integer(m.clone()) * x).sum();
    v == df.offset
}

pub fn facet_split_diff(eq: &DiffPoly, df: &DistinguishedFacet) -> FacetSplitDiff {
    let ftilde = eq.filter(|e, s| on_facet(df, &eq.kruskal_point(e, s)));
    let gtilde = eq.filter(|e, s| !on_facet(df, &eq.kruskal_point(e, s))).neg();
    FacetSplitDiff { ftilde, gtilde, gap: df.gap.clone() }
}

/// Facet split followed by the facet's power-law substitution for every
/// middle indeterminate, so that the result lives in `(x1, y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetOde {
    /// Full equation after substitution.
    pub equation: DiffPoly,
    pub split: FacetSplitDiff,
    /// `(name, parameter, exponent)` for every substituted indeterminate.
    pub substitutions: Vec<(String, String, Rational)>,
}

/// Parameter names for the middle indeterminates: `s` when there is only
/// one (or the given name), otherwise `s_<var>`.
pub fn ancillary_names(eq: &DiffPoly, single: &str) -> Vec<String> {
    let d = eq.vars().len();
    let middle = &eq.vars()[1..d.saturating_sub(1).max(1)];
    if middle.len() == 1 {
        vec![single.to_string()]
    } else {
        middle.iter().map(|v| format!("s_{v}")).collect()
    }
}

fn substitute_middle(eq: &DiffPoly, var: &str, s: &Coeff, r: &Rational, x1: &str) -> Result<DiffPoly> {
    if eq.indep() == Some(var) {
        return scale_independent(eq, x1, s, r);
    }
    let j = eq.var_index(var).unwrap();
    let i = eq.var_index(x1).unwrap();
    let vars: Vec<String> = eq.vars().iter().filter(|v| *v != var).cloned().collect();
    let mut out = DiffPoly::new(vars.clone(), eq.indep().map(str::to_string), eq.dep().map(str::to_string))?;
    for (e, d, c) in eq.terms() {
        let mut ne = e.clone();
        ne[i] += r * &e[j];
        ne.remove(j);
        out.add_term(ne, d, c * &s.pow_rational(&e[j])?)?;
    }
    Ok(out)
}

pub fn facet_ode(eq: &DiffPoly, df: &DistinguishedFacet, param: &str) -> Result<FacetOde> {
    let split = facet_split_diff(eq, df);
    let d = eq.vars().len();
    if d <= 2 {
        return Ok(FacetOde { equation: eq.clone(), split, substitutions: Vec::new() });
    }
    let exps = df
        .exponents
        .clone()
        .ok_or_else(|| Error::Invalid("facet normal has zero first component".into()))?;
    let names = ancillary_names(eq, param);
    let x1 = eq.vars()[0].clone();
    let (mut full, mut f, mut g) = (eq.clone(), split.ftilde, split.gtilde);
    let mut subs = Vec::new();
    for (k, var) in eq.vars()[1..d - 1].iter().enumerate() {
        let s = Coeff::param(&names[k]);
        full = substitute_middle(&full, var, &s, &exps[k], &x1)?;
        f = substitute_middle(&f, var, &s, &exps[k], &x1)?;
        g = substitute_middle(&g, var, &s, &exps[k], &x1)?;
        subs.push((var.clone(), names[k].clone(), exps[k].clone()));
    }
    Ok(FacetOde { equation: full, split: FacetSplitDiff { ftilde: f, gtilde: g, gap: split.gap }, substitutions: subs })
}

fn indep_dep(eq: &DiffPoly) -> Result<(usize, usize)> {
    match (eq.indep_index(), eq.dep_index()) {
        (Some(t), Some(y)) => Ok((t, y)),
        _ if !eq.has_derivatives() && eq.vars().len() == 2 => Ok((0, 1)),
        _ => Err(Error::Invalid("equation needs independent and dependent variables".into())),
    }
}

/// Per-term data of the ansatz `y = σ t^ρ`: exponent `a + kρ - s` and the
/// coefficient of `σ^k`.
struct AnsatzTerm {
    intercept: Rational,
    slope: u32,
    coeff: Coeff,
    deriv: u32,
}

fn ansatz_terms(eq: &DiffPoly) -> Result<Vec<AnsatzTerm>> {
    let (t, y) = indep_dep(eq)?;
    let mut out = Vec::new();
    for (e, d, c) in eq.terms() {
        for (i, x) in e.iter().enumerate() {
            if i != t && i != y && !x.is_zero() {
                return Err(Error::Invalid(format!("`{}` must be substituted first", eq.vars()[i])));
            }
        }
        if !e[y].is_integer() || e[y].is_negative() {
            return Err(Error::Unsupported("dependent variable needs a non-negative integer power".into()));
        }
        let b: u32 = e[y].to_integer().try_into().map_err(|_| Error::Unsupported("power too large".into()))?;
        let s = d.unwrap_or(0);
        out.push(AnsatzTerm {
            intercept: &e[t] - rat_u32(s),
            slope: b + u32::from(d.is_some()),
            coeff: c.clone(),
            deriv: s,
        });
    }
    Ok(out)
}

fn fmt_affine(intercept: &Rational, slope: u32) -> String {
    let lin = match slope {
        0 => String::new(),
        1 => "rho".to_string(),
        k => format!("{k}*rho"),
    };
    match (lin.is_empty(), intercept.is_zero()) {
        (true, _) => fmt_rational(intercept),
        (false, true) => lin,
        (false, false) if intercept.is_negative() => format!("{lin} - {}", fmt_rational(&-intercept)),
        (false, false) => format!("{lin} + {}", fmt_rational(intercept)),
    }
}

/// Outcome of the ansatz `y = σ t^ρ` on a facet equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PowerLaw {
    /// Amplitudes for the unique matching exponent.
    Solution { rho: Rational, sigmas: Vec<Coeff> },
    /// Exponents at which every amplitude solves the equation.
    Family { rhos: Vec<Rational> },
    Refusal { exponents: Vec<String>, reason: String },
}

impl fmt::Display for PowerLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerLaw::Solution { rho, sigmas } => {
                let s: Vec<String> = sigmas.iter().map(|c| c.to_string()).collect();
                write!(f, "rho = {}, sigma = {}", fmt_rational(rho), s.join(" | "))
            }
            PowerLaw::Family { rhos } => {
                let r: Vec<String> = rhos.iter().map(fmt_rational).collect();
                write!(f, "rho = {}, sigma free", r.join(" | "))
            }
            PowerLaw::Refusal { exponents, reason } => {
                write!(f, "no power-law solution: {reason} (exponents {})", exponents.join(", "))
            }
        }
    }
}

fn numeric_roots(coeffs: &BTreeMap<u32, Coeff>, var: &str, keep_zero: bool) -> Result<Option<Vec<Rational>>> {
    let mut rat = Vec::new();
    for (k, c) in coeffs {
        match c.as_rational() {
            Some(q) => rat.push((*k, q)),
            None => return Ok(None),
        }
    }
    let p = Poly::from_terms(vec![var.to_string()], rat.iter().map(|(k, q)| (vec![rat_u32(*k)], Coeff::from(q.clone()))));
    if p.is_zero() {
        return Ok(Some(Vec::new()));
    }
    let mut roots: Vec<Rational> = facet_roots(&p)?.roots.into_iter().map(|(r, _)| r).collect();
    if keep_zero && rat.iter().all(|(k, q)| *k > 0 || q.is_zero()) {
        roots.push(Rational::zero());
    }
    roots.sort();
    Ok(Some(roots))
}

/// Solves the facet equation with `y = σ t^ρ`. Works with symbolic
/// coefficients as long as the amplitude equation is linear.
pub fn powerlaw_facet_solution(ft: &DiffPoly) -> Result<PowerLaw> {
    let terms = ansatz_terms(ft)?;
    if terms.is_empty() {
        return Err(Error::Invalid("facet equation is empty".into()));
    }
    let exponents = || -> Vec<String> {
        let mut v: Vec<(u32, Rational)> = terms.iter().map(|t| (t.slope, t.intercept.clone())).collect();
        v.sort();
        v.dedup();
        v.iter().map(|(k, a)| fmt_affine(a, *k)).collect()
    };
    let t0 = &terms[0];
    let Some(other) = terms.iter().find(|t| t.slope != t0.slope) else {
        if terms.iter().any(|t| t.intercept != t0.intercept) {
            return Ok(PowerLaw::Refusal {
                exponents: exponents(),
                reason: "no exponent balances the terms".into(),
            });
        }
        // common exponent for every ρ: Σ c (ρ)_s σ^k = 0 fixes ρ
        let mut p: BTreeMap<u32, Coeff> = BTreeMap::new();
        for t in &terms {
            for (i, f) in falling_factorial_poly(t.deriv).into_iter().enumerate() {
                let slot = p.entry(i as u32).or_insert_with(Coeff::zero);
                *slot = &*slot + &t.coeff.scale(&f);
            }
        }
        p.retain(|_, c| !c.is_zero());
        return match numeric_roots(&p, "rho", true)? {
            Some(r) if !r.is_empty() => Ok(PowerLaw::Family { rhos: r }),
            Some(_) => Ok(PowerLaw::Refusal { exponents: exponents(), reason: "no rational exponent".into() }),
            None if p.len() == 2 && p.contains_key(&0) && p.contains_key(&1) => {
                let rho = (-&p[&0]).div(&p[&1])?.as_rational().ok_or_else(|| {
                    Error::Unsupported("exponent depends on the parameters".into())
                })?;
                Ok(PowerLaw::Family { rhos: vec![rho] })
            }
            None => Err(Error::Unsupported("exponent equation with symbolic coefficients".into())),
        };
    };
    let rho = (&other.intercept - &t0.intercept) / (rat_u32(t0.slope) - rat_u32(other.slope));
    let at = |t: &AnsatzTerm| &t.intercept + rat_u32(t.slope) * &rho;
    let e0 = at(t0);
    if terms.iter().any(|t| at(t) != e0) {
        return Ok(PowerLaw::Refusal { exponents: exponents(), reason: "no exponent balances the terms".into() });
    }
    let mut amp: BTreeMap<u32, Coeff> = BTreeMap::new();
    for t in &terms {
        let ff = eval_poly(&falling_factorial_poly(t.deriv), &rho);
        let slot = amp.entry(t.slope).or_insert_with(Coeff::zero);
        *slot = &*slot + &t.coeff.scale(&ff);
    }
    amp.retain(|_, c| !c.is_zero());
    let Some(&kmin) = amp.keys().next() else {
        return Ok(PowerLaw::Family { rhos: vec![rho] });
    };
    let amp: BTreeMap<u32, Coeff> = amp.into_iter().map(|(k, c)| (k - kmin, c)).collect();
    let sigmas = match amp.len() {
        1 => {
            return Ok(PowerLaw::Refusal {
                exponents: exponents(),
                reason: format!("amplitude equation {} has no nonzero root", fmt_sigma_poly(&amp)),
            })
        }
        2 if amp.contains_key(&1) => vec![(-&amp[&0]).div(&amp[&1])?],
        _ => match numeric_roots(&amp, "sigma", false)? {
            Some(r) if !r.is_empty() => r.into_iter().map(Coeff::from).collect(),
            Some(_) => {
                return Ok(PowerLaw::Refusal {
                    exponents: exponents(),
                    reason: format!("amplitude equation {} has no rational root", fmt_sigma_poly(&amp)),
                })
            }
            None => {
                return Err(Error::Unsupported(format!(
                    "amplitude equation {} is nonlinear with symbolic coefficients",
                    fmt_sigma_poly(&amp)
                )))
            }
        },
    };
    Ok(PowerLaw::Solution { rho, sigmas })
}

fn fmt_sigma_poly(p: &BTreeMap<u32, Coeff>) -> String {
    let terms: Vec<String> = p
        .iter()
        .rev()
        .map(|(k, c)| match k {
            0 => c.fmt_factor(),
            _ => format!("{}*{}", c.fmt_factor(), fmt_power("sigma", &rat_u32(*k))),
        })
        .collect();
    format!("{} = 0", terms.join(" + "))
}

/// `eq` evaluated at `y = σ t^ρ`, grouped by power of `t`.
pub fn substitute_powerlaw(eq: &DiffPoly, sigma: &Coeff, rho: &Rational) -> Result<BTreeMap<Rational, Coeff>> {
    let mut out: BTreeMap<Rational, Coeff> = BTreeMap::new();
    for t in ansatz_terms(eq)? {
        let ff = eval_poly(&falling_factorial_poly(t.deriv), rho);
        let c = (&t.coeff * &sigma.pow(t.slope)).scale(&ff);
        let slot = out.entry(&t.intercept + rat_u32(t.slope) * rho).or_insert_with(Coeff::zero);
        *slot = &*slot + &c;
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// Restricted iteration from `σ t^ρ` with numeric parameter values. The
/// equation must be in `(t, y)`; derivative terms enter each step through
/// the linear coefficient of `t^p`.
pub fn np_expand_diff(
    eq: &DiffPoly,
    sigma: &Coeff,
    rho: &Rational,
    n: usize,
    params: &BTreeMap<String, Rational>,
) -> Result<Expansion> {
    let eqv = eq.eval_params(params)?;
    let s = sigma.eval(params)?.as_rational().ok_or_else(|| {
        Error::Invalid(format!("leading coefficient {sigma} needs values for all its parameters"))
    })?;
    let ex = ExpansionEquation::from_diff(&eqv)?;
    iterate(&ex, &s, rho, n)
}

/// Leading factor of a trial solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrialLead {
    /// Unknown function; it and its derivatives become parameters
    /// `name`, `name_d1`, `name_d2`.
    Opaque(String),
    PowerLaw { sigma: Coeff, rho: Rational },
}

fn lead_derivative(lead: &TrialLead, j: u32, t: usize, nvars: usize) -> Vec<(ExpVector, Coeff)> {
    let mut e = vec![Rational::zero(); nvars];
    match lead {
        TrialLead::Opaque(name) => {
            let p = if j == 0 { name.clone() } else { format!("{name}_d{j}") };
            vec![(e, Coeff::param(&p))]
        }
        TrialLead::PowerLaw { sigma, rho } => {
            let ff = eval_poly(&falling_factorial_poly(j), rho);
            e[t] = rho - rat_u32(j);
            vec![(e, sigma.scale(&ff))]
        }
    }
}

fn binom(n: u32, k: u32) -> Rational {
    (0..k).fold(Rational::one(), |acc, i| acc * rat_u32(n - i) / rat_u32(i + 1))
}

fn dp_mul(a: &DiffPoly, b: &DiffPoly) -> Result<DiffPoly> {
    let mut out = a.empty_like();
    for (ea, sa, ca) in a.terms() {
        for (eb, sb, cb) in b.terms() {
            let s = match (sa, sb) {
                (Some(_), Some(_)) => return Err(Error::Invariant("product of two derivative factors".into())),
                (x, None) | (None, x) => x,
            };
            let e: ExpVector = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            out.add_term(e, s, ca * cb)?;
        }
    }
    Ok(out)
}

/// Exact equation for `z` after `y = y0 · (1 + Σ c_k t^(e_k) + z)`; the
/// known corrections are `(e_k, c_k)`.
pub fn emit_perturbation_equation(
    eq: &DiffPoly,
    lead: &TrialLead,
    known: &[(Rational, Coeff)],
    z: &str,
) -> Result<DiffPoly> {
    if eq.max_order() > 2 {
        return Err(Error::Unsupported(format!("derivative order {} exceeds 2", eq.max_order())));
    }
    let (ti, yi) = indep_dep(eq)?;
    if eq.vars().len() != 2 {
        return Err(Error::Invalid("perturbation equation needs an equation in two indeterminates".into()));
    }
    if eq.vars().iter().any(|v| v == z) {
        return Err(Error::Invalid(format!("`{z}` is already an indeterminate")));
    }
    let tname = eq.vars()[ti].clone();
    let vars = vec![tname.clone(), z.to_string()];
    let base = DiffPoly::new(vars.clone(), Some(tname), Some(z.to_string()))?;
    let (t, zi) = (0, 1);
    let constant = |terms: Vec<(ExpVector, Coeff)>| -> Result<DiffPoly> {
        let mut p = base.clone();
        for (e, c) in terms {
            p.add_term(e, None, c)?;
        }
        Ok(p)
    };
    let order = eq.max_order();
    let lead_d: Vec<DiffPoly> = (0..=order).map(|j| constant(lead_derivative(lead, j, t, 2))).collect::<Result<_>>()?;
    // B = 1 + Σ c_k t^(e_k) and its derivatives
    let b_d: Vec<DiffPoly> = (0..=order)
        .map(|j| {
            let mut terms = Vec::new();
            if j == 0 {
                terms.push((vec![Rational::zero(); 2], Coeff::one()));
            }
            for (ek, ck) in known {
                let ff = eval_poly(&falling_factorial_poly(j), ek);
                let mut e = vec![Rational::zero(); 2];
                e[t] = ek - rat_u32(j);
                terms.push((e, ck.scale(&ff)));
            }
            constant(terms)
        })
        .collect::<Result<_>>()?;
    // D^j y = Σ_i C(j,i) y0^(i) (B^(j-i) + D^(j-i) z)
    let mut y_d = Vec::new();
    for j in 0..=order {
        let mut acc = base.clone();
        for i in 0..=j {
            let mut inner = b_d[(j - i) as usize].clone();
            let mut ez = vec![Rational::zero(); 2];
            let dz = if j == i {
                ez[zi] = Rational::one();
                None
            } else {
                Some(j - i)
            };
            inner.add_term(ez, dz, Coeff::one())?;
            let term = dp_mul(&lead_d[i as usize], &inner)?.scale(&Coeff::from(binom(j, i)));
            acc = acc.add(&term)?;
        }
        y_d.push(acc);
    }
    let mut out = base.clone();
    let mut powers: BTreeMap<u32, DiffPoly> = BTreeMap::new();
    for (e, d, c) in eq.terms() {
        if !e[yi].is_integer() || e[yi].is_negative() {
            return Err(Error::Unsupported("dependent variable needs a non-negative integer power".into()));
        }
        let b: u32 = e[yi].to_integer().try_into().map_err(|_| Error::Unsupported("power too large".into()))?;
        let yb = match powers.get(&b) {
            Some(p) => p.clone(),
            None => {
                let mut p = constant(vec![(vec![Rational::zero(); 2], Coeff::one())])?;
                for _ in 0..b {
                    p = dp_mul(&p, &y_d[0])?;
                }
                powers.insert(b, p.clone());
                p
            }
        };
        let mut te = vec![Rational::zero(); 2];
        te[t] = e[ti].clone();
        let mut term = dp_mul(&constant(vec![(te, c.clone())])?, &yb)?;
        if let Some(s) = d {
            term = dp_mul(&term, &y_d[s as usize])?;
        }
        out = out.add(&term)?;
    }
    Ok(out)
}

/// Parameters introduced by an opaque lead up to derivative order `k`.
pub fn opaque_params(name: &str, k: u32) -> Vec<String> {
    (0..=k).map(|j| if j == 0 { name.to_string() } else { format!("{name}_d{j}") }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{rat, rat_int};
    use crate::polytope::{distinguished_facets, kruskal_points, kruskal_polytope};

    fn dp(vars: &[&str], indep: &str, dep: &str, terms: &[(Coeff, &[i64], Option<u32>)]) -> DiffPoly {
        let mut p = DiffPoly::new(vars.iter().map(|s| s.to_string()).collect(), Some(indep.into()), Some(dep.into())).unwrap();
        for (c, e, s) in terms {
            p.add_term(e.iter().map(|x| rat_int(*x)).collect(), *s, c.clone()).unwrap();
        }
        p
    }

    fn k(n: i64) -> Coeff {
        Coeff::from(n)
    }

    fn par(name: &str) -> Coeff {
        Coeff::param(name)
    }

    fn riccati() -> DiffPoly {
        dp(
            &["eps", "x", "y"],
            "x",
            "y",
            &[
                (k(1), &[1, 0, 0], Some(1)),
                (k(-1), &[0, 0, 2], None),
                (-par("R"), &[0, 1, 1], None),
                (k(1), &[0, 1, 2], None),
            ],
        )
    }

    fn vanderpol() -> DiffPoly {
        dp(
            &["x", "y"],
            "x",
            "y",
            &[
                (k(1), &[0, 0], Some(2)),
                (-par("mu"), &[0, 0], Some(1)),
                (par("mu"), &[0, 2], Some(1)),
                (par("w").pow(2), &[0, 1], None),
            ],
        )
    }

    fn riccati_facet() -> DistinguishedFacet {
        let eq = riccati();
        let p = kruskal_polytope(&eq).unwrap();
        distinguished_facets(&p)
            .into_iter()
            .find(|d| d.normal.iter().map(|x| x.to_string()).collect::<Vec<_>>() == ["2", "1", "1"])
            .unwrap()
    }

    #[test]
    fn chain_rule_cases() {
        let eq = riccati();
        let out = scale_independent(&eq, "eps", &par("s"), &rat(1, 2)).unwrap();
        assert_eq!(out.vars(), ["eps", "y"]);
        assert_eq!(out.to_string(), "2*s^-1*eps^(3/2)*D(y,eps,1) + s*eps^(1/2)*y^2 - y^2 - R*s*eps^(1/2)*y");
        assert_eq!(scale_independent(&eq, "x", &k(1), &rat_int(1)).unwrap(), eq);

        let second = dp(&["x", "y"], "x", "y", &[(k(1), &[0, 0], Some(2))]);
        let u = scale_independent(&second, "u", &k(1), &rat_int(2)).unwrap();
        assert_eq!(u.to_string(), "1/4*u^-2*D(y,u,2) - 1/4*u^-3*D(y,u,1)");

        let third = dp(&["x", "y"], "x", "y", &[(k(1), &[0, 0], Some(3))]);
        assert!(matches!(scale_independent(&third, "u", &k(1), &rat_int(2)), Err(Error::Unsupported(_))));
        assert!(matches!(scale_independent(&second, "u", &k(1), &rat_int(0)), Err(Error::Invalid(_))));
    }

    #[test]
    fn chain_rule_on_monomials() {
        // y = u^k with x = u^2: d²y/dx² computed in x must match the
        // transformed operator applied in u
        for kk in 1..6i64 {
            let kq = rat_int(kk);
            // y = x^(k/2): y'' = (k/2)(k/2 - 1) x^(k/2 - 2) = c u^(k - 4)
            let expect = &kq / rat_int(2) * (&kq / rat_int(2) - rat_int(1));
            // operator: 1/4 u^-2 D² - 1/4 u^-3 D on u^k
            let got = rat(1, 4) * &kq * (&kq - rat_int(1)) - rat(1, 4) * &kq;
            assert_eq!(expect, got);
        }
    }

    #[test]
    fn composition_of_scalings() {
        let eq = dp(&["x", "y"], "x", "y", &[(k(1), &[1, 0], Some(1)), (k(3), &[2, 1], Some(2)), (k(1), &[0, 2], None)]);
        let (r1, r2) = (rat(1, 2), rat(3, 1));
        let once = scale_independent(&scale_independent(&eq, "u", &par("a"), &r1).unwrap(), "w", &par("b"), &r2).unwrap();
        let s = &par("a") * &par("b").pow_rational(&r1).unwrap();
        let direct = scale_independent(&eq, "w", &s, &(&r1 * &r2)).unwrap();
        assert_eq!(once, direct);
    }

    #[test]
    fn riccati_facet_ode() {
        let eq = riccati();
        let pts: Vec<String> = kruskal_points(&eq).iter().map(|p| format!("{:?}", p.iter().map(fmt_rational).collect::<Vec<_>>())).collect();
        assert!(pts.contains(&"[\"1\", \"-1\", \"1\"]".to_string()));
        let df = riccati_facet();
        assert_eq!(df.gap, Some(rat(1, 2)));
        let ode = facet_ode(&eq, &df, "s").unwrap();
        assert_eq!(ode.split.ftilde.to_string(), "2*s^-1*eps^(3/2)*D(y,eps,1) - y^2 - R*s*eps^(1/2)*y");
        assert_eq!(ode.split.gtilde.to_string(), "-s*eps^(1/2)*y^2");
        match powerlaw_facet_solution(&ode.split.ftilde).unwrap() {
            PowerLaw::Solution { rho, sigmas } => {
                assert_eq!(rho, rat(1, 2));
                let expect = &(&Coeff::one() - &(&par("s").pow(2) * &par("R"))) * &par("s").pow_rational(&rat_int(-1)).unwrap();
                assert_eq!(sigmas, vec![expect.clone()]);
                assert!(substitute_powerlaw(&ode.split.ftilde, &expect, &rho).unwrap().is_empty());
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn riccati_iteration() {
        let eq = riccati();
        let ode = facet_ode(&eq, &riccati_facet(), "s").unwrap();
        for (s, r) in [(rat_int(1), rat_int(2)), (rat_int(1), rat_int(3)), (rat_int(2), rat(1, 2))] {
            let params: BTreeMap<String, Rational> = [("s".to_string(), s.clone()), ("R".to_string(), r.clone())].into();
            let sigma = (&Coeff::one() - &(&par("s").pow(2) * &par("R"))).div(&par("s")).unwrap();
            let mut last = None;
            for n in 1..=3 {
                let e = np_expand_diff(&ode.equation, &sigma, &rat(1, 2), n, &params).unwrap();
                let z1 = e.relative_corrections()[0].1.clone();
                let sig = (rat_int(1) - &s * &s * &r) / &s;
                assert_eq!(z1, -&sig / &r, "z1 at s={s}, R={r}");
                let bound = e.residual.bound().cloned().expect("nonzero residual");
                if let Some(prev) = last {
                    assert!(bound > prev);
                }
                last = Some(bound);
            }
        }
    }

    #[test]
    fn family_and_refusal() {
        let eq = dp(&["eps", "y"], "eps", "y", &[(k(1), &[1, 0], Some(1)), (k(-1), &[0, 1], None)]);
        assert_eq!(powerlaw_facet_solution(&eq).unwrap(), PowerLaw::Family { rhos: vec![rat_int(1)] });
        let vdp = vanderpol();
        let p = kruskal_polytope(&vdp).unwrap();
        let ds = distinguished_facets(&p);
        let df = ds.iter().find(|d| d.off_vertex.is_some() && p.points[d.off_vertex.unwrap()] == vec![rat_int(-1), rat_int(3)]).unwrap();
        let split = facet_split_diff(&vdp, df);
        assert_eq!(split.ftilde.to_string(), "D(y,x,2) - mu*D(y,x,1) + w^2*y");
        assert_eq!(split.gtilde.to_string(), "-mu*y^2*D(y,x,1)");
        match powerlaw_facet_solution(&split.ftilde).unwrap() {
            PowerLaw::Refusal { exponents, .. } => assert_eq!(exponents, ["rho - 2", "rho - 1", "rho"]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn derivative_free_matches_algebraic() {
        let p = Poly::from_int_terms(&["x", "y"], &[(1, &[0, 1]), (-1, &[1, 0]), (-1, &[2, 2])]);
        let eq = DiffPoly::from_poly(&p);
        let e = np_expand_diff(&eq, &k(1), &rat_int(1), 4, &BTreeMap::new()).unwrap();
        assert_eq!(e.series.to_string(), "x + x^4 + 2*x^7 + 5*x^10 + 14*x^13 + O(x^16)");
    }

    #[test]
    fn perturbation_of_linear() {
        let p = Poly::from_int_terms(&["x", "y"], &[(1, &[0, 1]), (-1, &[1, 0])]);
        let eq = DiffPoly::from_poly(&p);
        let z = emit_perturbation_equation(&eq, &TrialLead::Opaque("y0".into()), &[], "z").unwrap();
        assert_eq!(z.to_string(), "-x + y0*z + y0");
    }

    #[test]
    fn perturbation_matches_iteration() {
        // the z-equation at the power-law lead has the same lowest-order
        // linear coefficient the iteration uses
        let eq = riccati();
        let ode = facet_ode(&eq, &riccati_facet(), "s").unwrap();
        let params: BTreeMap<String, Rational> = [("s".to_string(), rat_int(1)), ("R".to_string(), rat_int(2))].into();
        let full = ode.equation.eval_params(&params).unwrap();
        let lead = TrialLead::PowerLaw { sigma: k(-1), rho: rat(1, 2) };
        let zeq = emit_perturbation_equation(&full, &lead, &[], "z").unwrap();
        // substitute z = z1 eps^(1/2): residual drops from order 3/2 to 2
        let z1 = np_expand_diff(&full, &k(-1), &rat(1, 2), 1, &BTreeMap::new()).unwrap().relative_corrections()[0].1.clone();
        let res = substitute_powerlaw(&zeq, &Coeff::from(z1), &rat(1, 2)).unwrap();
        assert!(res.keys().next().unwrap() >= &rat_int(2));
        let res0 = substitute_powerlaw(&zeq, &Coeff::zero(), &rat(1, 2)).unwrap();
        assert_eq!(res0.keys().next(), Some(&rat(3, 2)));
    }
}
