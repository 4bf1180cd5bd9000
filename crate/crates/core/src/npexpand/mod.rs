//! Newton-Puiseux expansion: facet equations, rational facet roots and the
//! iteration that refines a leading power term into a fractional power
//! series.
//!
//! The iteration works on equations `Σ q · t^a · y^b · (d^s y/dt^s)` in one
//! expansion variable `t` and one unknown `y`. Each step substitutes the
//! current partial sum `Y`, reads off the lowest residual term `r·t^e`,
//! linearises in a correction `ζ·t^p` and solves for `ζ` from the lowest
//! order of the linearisation. Derivative factors enter the linear
//! coefficient through `p(p-1)…(p-s+1)`.

mod series;

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use series::PuiseuxSeries;

use crate::error::{Error, Result};
use crate::exactmath::{fmt_rational, Int, Rational};
use crate::poly::{Coeff, DiffPoly, ExpVector, Poly};
use crate::polytope::DistinguishedFacet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqTerm {
    pub coeff: Rational,
    pub t_exp: Rational,
    pub y_exp: u32,
    pub deriv: Option<u32>,
}

/// Equation in the expansion variable `t` and the unknown `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionEquation {
    pub var: String,
    pub terms: Vec<EqTerm>,
}

fn rational_coeff(c: &Coeff) -> Result<Rational> {
    c.as_rational().ok_or_else(|| {
        Error::Invalid(format!("coefficient {c} still carries parameters; supply their values"))
    })
}

fn y_power(e: &Rational) -> Result<u32> {
    if !e.is_integer() || e.is_negative() {
        return Err(Error::Unsupported(format!(
            "unknown appears with exponent {}; only non-negative integer powers expand",
            fmt_rational(e)
        )));
    }
    e.to_integer().to_u32().ok_or_else(|| Error::Unsupported("exponent too large".into()))
}

impl ExpansionEquation {
    /// From a polynomial in exactly two indeterminates `(t, y)`.
    pub fn from_poly(f: &Poly) -> Result<Self> {
        if f.vars().len() != 2 {
            return Err(Error::Invalid("expansion needs a polynomial in (t, y)".into()));
        }
        let mut terms = Vec::new();
        for (e, c) in f.terms() {
            terms.push(EqTerm { coeff: rational_coeff(c)?, t_exp: e[0].clone(), y_exp: y_power(&e[1])?, deriv: None });
        }
        Ok(ExpansionEquation { var: f.vars()[0].clone(), terms })
    }

    /// From a differential form whose only indeterminates are the
    /// independent variable `t` and the dependent variable `y`.
    pub fn from_diff(eq: &DiffPoly) -> Result<Self> {
        let (t, y) = match (eq.indep_index(), eq.dep_index()) {
            (Some(t), Some(y)) => (t, y),
            _ if !eq.has_derivatives() && eq.vars().len() == 2 => (0, 1),
            _ => return Err(Error::Invalid("expansion needs independent and dependent variables".into())),
        };
        let mut terms = Vec::new();
        for (e, s, c) in eq.terms() {
            for (i, x) in e.iter().enumerate() {
                if i != t && i != y && !x.is_zero() {
                    return Err(Error::Invalid(format!(
                        "`{}` must be substituted before expanding",
                        eq.vars()[i]
                    )));
                }
            }
            terms.push(EqTerm { coeff: rational_coeff(c)?, t_exp: e[t].clone(), y_exp: y_power(&e[y])?, deriv: s });
        }
        Ok(ExpansionEquation { var: eq.vars()[t].clone(), terms })
    }

    /// `E(Y)` for a finite partial sum `Y` (its `O()` part is ignored).
    pub fn evaluate(&self, y: &PuiseuxSeries) -> PuiseuxSeries {
        let y = y.clone().with_omega(None);
        let mut powers: BTreeMap<u32, PuiseuxSeries> = BTreeMap::new();
        let mut derivs: BTreeMap<u32, PuiseuxSeries> = BTreeMap::new();
        let mut out = PuiseuxSeries::zero(&self.var);
        for t in &self.terms {
            let p = powers.entry(t.y_exp).or_insert_with(|| y.pow(t.y_exp)).clone();
            let mut term = p.shift(&t.t_exp).scale(&t.coeff);
            if let Some(s) = t.deriv {
                let d = derivs.entry(s).or_insert_with(|| y.nth_derivative(s)).clone();
                term = term.mul(&d);
            }
            out = out.add(&term);
        }
        out
    }

    /// Linearisation at `Y` applied to `t^p`, grouped by the exponent shift:
    /// `L[t^p] = Σ_μ λ_μ(p) t^(p+μ)` with `λ_μ` a polynomial in `p`
    /// (coefficients in ascending degree).
    pub fn linearization(&self, y: &PuiseuxSeries) -> BTreeMap<Rational, Vec<Rational>> {
        let y = y.clone().with_omega(None);
        let mut out: BTreeMap<Rational, Vec<Rational>> = BTreeMap::new();
        let mut add = |shift: Rational, poly: Vec<Rational>| {
            let slot = out.entry(shift).or_default();
            if slot.len() < poly.len() {
                slot.resize(poly.len(), Rational::zero());
            }
            for (a, b) in slot.iter_mut().zip(poly) {
                *a += b;
            }
        };
        for t in &self.terms {
            // ∂/∂y of y^b, times the derivative factor if present
            if t.y_exp > 0 {
                let mut u = y.pow(t.y_exp - 1).scale(&Rational::from_integer(t.y_exp.into()));
                if let Some(s) = t.deriv {
                    u = u.mul(&y.nth_derivative(s));
                }
                for (e, c) in u.terms() {
                    add(&t.t_exp + e, vec![c * &t.coeff]);
                }
            }
            // y^b times d^s/dt^s of the correction
            if let Some(s) = t.deriv {
                let falling = falling_factorial_poly(s);
                for (e, c) in y.pow(t.y_exp).terms() {
                    let k = c * &t.coeff;
                    add(&t.t_exp + e - Rational::from_integer(s.into()), falling.iter().map(|x| x * &k).collect());
                }
            }
        }
        out.retain(|_, p| p.iter().any(|c| !c.is_zero()));
        out
    }
}

/// `p(p-1)…(p-s+1)` as ascending coefficients.
pub(crate) fn falling_factorial_poly(s: u32) -> Vec<Rational> {
    let mut poly = vec![Rational::one()];
    for k in 0..s {
        let mut next = vec![Rational::zero(); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * Rational::from_integer(k.into());
        }
        poly = next;
    }
    poly
}

pub(crate) fn eval_poly(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Least exponent of the residual, or the bound below which it vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResidualOrder {
    Exactly(Rational),
    AtLeast(Rational),
    /// The residual is identically zero.
    Vanishes,
}

impl ResidualOrder {
    /// Lower bound on the residual order; `None` when it vanishes.
    pub fn bound(&self) -> Option<&Rational> {
        match self {
            ResidualOrder::Exactly(r) | ResidualOrder::AtLeast(r) => Some(r),
            ResidualOrder::Vanishes => None,
        }
    }

    /// Residual order strictly above `x`.
    pub fn exceeds(&self, x: &Rational) -> bool {
        self.bound().map_or(true, |b| b > x)
    }
}

impl fmt::Display for ResidualOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResidualOrder::Exactly(r) => write!(f, "{}", fmt_rational(r)),
            ResidualOrder::AtLeast(r) => write!(f, ">= {}", fmt_rational(r)),
            ResidualOrder::Vanishes => write!(f, "none (exact solution)"),
        }
    }
}

/// Order of `E(series)` in `t`, examined below `bound`.
pub fn residual_order(eq: &ExpansionEquation, series: &PuiseuxSeries, bound: &Rational) -> ResidualOrder {
    match eq.evaluate(series).lead_exponent() {
        Some(e) if &e < bound => ResidualOrder::Exactly(e),
        _ => ResidualOrder::AtLeast(bound.clone()),
    }
}

/// One correction `ζ·t^p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub exponent: Rational,
    pub coefficient: Rational,
    /// Residual order of the partial sum the step corrected.
    pub residual_before: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub series: PuiseuxSeries,
    pub lead_coefficient: Rational,
    pub lead_exponent: Rational,
    pub steps: Vec<Step>,
    /// Residual order of the returned partial sum.
    pub residual: ResidualOrder,
}

impl Expansion {
    /// Corrections relative to the leading term, `(p - ρ, ζ/σ)`, i.e. the
    /// `z_k δ^k` of `y = σ t^ρ (1 + Σ z_k δ^k)`.
    pub fn relative_corrections(&self) -> Vec<(Rational, Rational)> {
        self.steps
            .iter()
            .map(|s| (&s.exponent - &self.lead_exponent, &s.coefficient / &self.lead_coefficient))
            .collect()
    }
}

/// Next correction for the partial sum `y`, or `None` if `E(y) = 0`.
fn newton_step(eq: &ExpansionEquation, y: &PuiseuxSeries) -> Result<Option<Step>> {
    let residual = eq.evaluate(y);
    let Some((er, r)) = residual.lead().map(|(e, c)| (e.clone(), c.clone())) else {
        return Ok(None);
    };
    let lin = eq.linearization(y);
    let (mu, lambda) = lin
        .iter()
        .next()
        .ok_or_else(|| Error::Unsupported("iteration stalls: the equation does not depend on the unknown".into()))?;
    let p = &er - mu;
    let l = eval_poly(lambda, &p);
    if l.is_zero() {
        return Err(Error::Unsupported(format!(
            "iteration stalls: linear coefficient vanishes at exponent {}",
            fmt_rational(&p)
        )));
    }
    Ok(Some(Step { exponent: p, coefficient: -(r / l), residual_before: er }))
}

/// Refines `σ·t^ρ` by `n` corrections. The result's `ω` is the exponent of
/// the next correction, so every kept term is final; an exact solution is
/// returned without `O()`.
pub fn iterate(eq: &ExpansionEquation, sigma: &Rational, rho: &Rational, n: usize) -> Result<Expansion> {
    if sigma.is_zero() {
        return Err(Error::Invalid("leading coefficient must be nonzero".into()));
    }
    let mut y = PuiseuxSeries::monomial(&eq.var, sigma.clone(), rho.clone());
    let mut steps = Vec::new();
    let mut last = rho.clone();
    let mut omega = None;
    for k in 0..=n {
        let Some(step) = newton_step(eq, &y)? else {
            break;
        };
        if step.exponent <= last {
            return Err(Error::Invariant(format!(
                "correction exponent {} does not exceed {}",
                fmt_rational(&step.exponent),
                fmt_rational(&last)
            )));
        }
        if k == n {
            omega = Some(step.exponent.clone());
            break;
        }
        y.add_term(step.exponent.clone(), step.coefficient.clone());
        last = step.exponent.clone();
        steps.push(step);
    }
    let residual = match eq.evaluate(&y).lead_exponent() {
        Some(e) => ResidualOrder::Exactly(e),
        None => ResidualOrder::Vanishes,
    };
    Ok(Expansion {
        series: y.with_omega(omega),
        lead_coefficient: sigma.clone(),
        lead_exponent: rho.clone(),
        steps,
        residual,
    })
}

/// Facet equation and the rest of the substituted polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetData {
    /// `F(s)` in the single indeterminate `s`.
    pub f: Poly,
    /// Off-facet part over `(t, s)`, with `t` exponents relative to the
    /// facet order.
    pub g: Poly,
    pub gap: Option<Rational>,
    /// `t` exponent of the facet terms after substitution.
    pub base_order: Rational,
    pub lead_exponent: Rational,
    pub ancillary: Vec<Coeff>,
    /// The substituted polynomial in `(t, y)`.
    pub reduced: Poly,
}

/// Substitutes `x_j = s_j · x_1^(r_j)` for the middle coordinates, keeping
/// `x_1` and the last indeterminate.
pub fn substitute_ancillary(f: &Poly, exponents: &[Rational], ancillary: &[Coeff]) -> Result<Poly> {
    let d = f.vars().len();
    if d < 2 {
        return Err(Error::Invalid("expansion needs at least two indeterminates".into()));
    }
    if ancillary.len() != d - 2 || exponents.len() != d - 1 {
        return Err(Error::Invalid(format!("expected {} ancillary values", d - 2)));
    }
    let mut g = f.clone();
    for (j, s) in ancillary.iter().enumerate() {
        if s.is_zero() {
            return Err(Error::Invalid(format!("ancillary value for `{}` must be nonzero", f.vars()[j + 1])));
        }
        g = g.substitute_power(&f.vars()[j + 1], s, &exponents[j])?;
    }
    Ok(g)
}

pub fn facet_data(f: &Poly, df: &DistinguishedFacet, ancillary: &[Coeff]) -> Result<FacetData> {
    let exps = df
        .exponents
        .clone()
        .ok_or_else(|| Error::Invalid("facet normal has zero first component".into()))?;
    let reduced = substitute_ancillary(f, &exps, ancillary)?;
    let rd = exps.last().cloned().expect("d >= 2");
    let t = reduced.vars()[0].clone();
    let mut orders: BTreeMap<Rational, Vec<(ExpVector, Coeff)>> = BTreeMap::new();
    for (e, c) in reduced.terms() {
        orders.entry(&e[0] + &e[1] * &rd).or_default().push((e.clone(), c.clone()));
    }
    let (base, facet_terms) = orders.iter().next().map(|(k, v)| (k.clone(), v.clone())).ok_or_else(|| {
        Error::Invalid("zero polynomial".into())
    })?;
    let s = vec!["s".to_string()];
    let fpoly = Poly::from_terms(s, facet_terms.into_iter().map(|(e, c)| (vec![e[1].clone()], c)));
    let g = Poly::from_terms(
        vec![t, "s".to_string()],
        orders.iter().skip(1).flat_map(|(k, v)| {
            let rel = k - &base;
            v.iter().map(move |(e, c)| (vec![rel.clone(), e[1].clone()], -c.clone()))
        }),
    );
    let gap = orders.keys().nth(1).map(|k| k - &base);
    Ok(FacetData { f: fpoly, g, gap, base_order: base, lead_exponent: rd, ancillary: ancillary.to_vec(), reduced })
}

/// Rational roots of a univariate facet polynomial with multiplicities, and
/// the factor left after removing them (constant when fully split).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetRoots {
    pub roots: Vec<(Rational, u32)>,
    pub residual: Poly,
}

fn divisors(n: &Int) -> Vec<Int> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut d = Int::one();
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            let q = &n / &d;
            if q != d {
                out.push(q);
            }
        }
        d += 1;
    }
    out.sort();
    out
}

/// Ascending integer coefficients of `F` after removing any power of `s`.
fn integer_coefficients(f: &Poly) -> Result<Vec<Int>> {
    if f.vars().len() != 1 {
        return Err(Error::Invalid("facet polynomial must be univariate".into()));
    }
    let mut by_exp: BTreeMap<Int, Rational> = BTreeMap::new();
    for (e, c) in f.terms() {
        if !e[0].is_integer() {
            return Err(Error::Unsupported("facet polynomial has fractional exponents".into()));
        }
        by_exp.insert(e[0].to_integer(), rational_coeff(c)?);
    }
    let Some(low) = by_exp.keys().next().cloned() else {
        return Ok(Vec::new());
    };
    let high = by_exp.keys().last().cloned().unwrap();
    let deg = (&high - &low).to_usize().ok_or_else(|| Error::Unsupported("degree too large".into()))?;
    let l = by_exp.values().fold(Int::one(), |l, c| l.lcm(c.denom()));
    let mut out = vec![Int::zero(); deg + 1];
    for (e, c) in by_exp {
        let i = (&e - &low).to_usize().unwrap();
        out[i] = (c * Rational::from_integer(l.clone())).to_integer();
    }
    Ok(out)
}

fn deflate(p: &[Rational], r: &Rational) -> Option<Vec<Rational>> {
    // synthetic division by (s - r); None if r is not a root
    let n = p.len();
    let mut q = vec![Rational::zero(); n - 1];
    let mut carry = Rational::zero();
    for i in (0..n).rev() {
        let v = &p[i] + &carry * r;
        if i == 0 {
            return v.is_zero().then_some(q);
        }
        q[i - 1] = v.clone();
        carry = v;
    }
    unreachable!()
}

/// Nonzero rational roots of `F(s)` by the rational root theorem with exact
/// deflation. `s = 0` is excluded because the substitution needs `s ≠ 0`.
pub fn facet_roots(f: &Poly) -> Result<FacetRoots> {
    let ints = integer_coefficients(f)?;
    if ints.is_empty() {
        return Err(Error::Invalid("facet polynomial is zero".into()));
    }
    let mut p: Vec<Rational> = ints.iter().cloned().map(Rational::from_integer).collect();
    let mut candidates: Vec<Rational> = Vec::new();
    for a in divisors(&ints[0]) {
        for b in divisors(ints.last().unwrap()) {
            let q = Rational::new(a.clone(), b);
            candidates.push(q.clone());
            candidates.push(-q);
        }
    }
    candidates.sort();
    candidates.dedup();
    let mut roots = Vec::new();
    for c in candidates {
        let mut mult = 0;
        while p.len() > 1 {
            match deflate(&p, &c) {
                Some(q) => {
                    p = q;
                    mult += 1;
                }
                None => break,
            }
        }
        if mult > 0 {
            roots.push((c, mult));
        }
    }
    let residual = Poly::from_terms(
        f.vars().to_vec(),
        p.into_iter().enumerate().map(|(i, c)| (vec![Rational::from_integer(i.into())], Coeff::from(c))),
    );
    Ok(FacetRoots { roots, residual })
}

/// Expansion of the last indeterminate of `f` in the first, starting from
/// `root · x_1^(r_d)` on the facet `df`.
pub fn np_expand(
    f: &Poly,
    df: &DistinguishedFacet,
    root: &Rational,
    n: usize,
    ancillary: &[Coeff],
) -> Result<Expansion> {
    let data = facet_data(f, df, ancillary)?;
    let fr = facet_roots(&data.f)?;
    match fr.roots.iter().find(|(r, _)| r == root) {
        None => {
            return Err(Error::Invalid(format!("{} is not a root of the facet equation {}", fmt_rational(root), data.f)))
        }
        Some((_, m)) if *m > 1 => {
            return Err(Error::Unsupported("degenerate facet root; not supported".into()));
        }
        _ => {}
    }
    let eq = ExpansionEquation::from_poly(&data.reduced)?;
    iterate(&eq, root, &data.lead_exponent, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{rat, rat_int};
    use crate::polytope::{distinguished_facets, newton_polytope};

    fn catalan() -> Poly {
        Poly::from_int_terms(&["x", "y"], &[(1, &[0, 1]), (-1, &[1, 0]), (-1, &[2, 2])])
    }

    fn first_facet(f: &Poly) -> DistinguishedFacet {
        distinguished_facets(&newton_polytope(f).unwrap()).into_iter().find(|d| d.is_dominant()).unwrap()
    }

    #[test]
    fn catalan_series() {
        let f = catalan();
        let df = first_facet(&f);
        let data = facet_data(&f, &df, &[]).unwrap();
        assert_eq!(data.f.to_string(), "s - 1");
        assert_eq!(data.gap, Some(rat_int(3)));
        let e = np_expand(&f, &df, &rat_int(1), 4, &[]).unwrap();
        assert_eq!(e.series.to_string(), "x + x^4 + 2*x^7 + 5*x^10 + 14*x^13 + O(x^16)");
        assert!(e.residual.exceeds(&rat_int(14)));
        let eq = ExpansionEquation::from_poly(&f).unwrap();
        let trunc = PuiseuxSeries::from_terms("x", [(rat_int(1), rat_int(1)), (rat_int(4), rat_int(1))], None);
        assert_eq!(residual_order(&eq, &trunc, &rat_int(100)), ResidualOrder::Exactly(rat_int(7)));
    }

    #[test]
    fn exact_and_geometric() {
        let f = Poly::from_int_terms(&["x", "y"], &[(1, &[0, 1]), (-1, &[1, 0])]);
        let df = first_facet(&f);
        let e = np_expand(&f, &df, &rat_int(1), 3, &[]).unwrap();
        assert_eq!(e.series.to_string(), "x");
        assert!(e.series.is_exact());

        let g = Poly::from_int_terms(&["x", "y"], &[(1, &[0, 1]), (-1, &[1, 0]), (-1, &[1, 1])]);
        let e = np_expand(&g, &first_facet(&g), &rat_int(1), 2, &[]).unwrap();
        assert_eq!(e.series.to_string(), "x + x^2 + x^3 + O(x^4)");
    }

    #[test]
    fn roots() {
        let p = |t: &[(i64, i64)]| Poly::from_terms(vec!["s".into()], t.iter().map(|(c, e)| (vec![rat_int(*e)], Coeff::from(*c))));
        assert_eq!(facet_roots(&p(&[(1, 1), (-1, 0)])).unwrap().roots, vec![(rat_int(1), 1)]);
        let irr = facet_roots(&p(&[(1, 2), (-2, 0)])).unwrap();
        assert!(irr.roots.is_empty());
        assert_eq!(irr.residual.to_string(), "s^2 - 2");
        assert_eq!(facet_roots(&p(&[(1, 2), (-4, 1), (4, 0)])).unwrap().roots, vec![(rat_int(2), 2)]);
        let mixed = facet_roots(&p(&[(6, 3), (-5, 2), (1, 1)])).unwrap();
        assert_eq!(mixed.roots, vec![(rat(1, 3), 1), (rat(1, 2), 1)]);
    }

    #[test]
    fn multiple_root_refused() {
        // y^2 - 4xy + 4x^2 + x^3: facet (s - 2)^2
        let f = Poly::from_int_terms(&["x", "y"], &[(1, &[0, 2]), (-4, &[1, 1]), (4, &[2, 0]), (1, &[3, 0])]);
        let df = first_facet(&f);
        match np_expand(&f, &df, &rat_int(2), 2, &[]) {
            Err(Error::Unsupported(m)) => assert!(m.contains("degenerate facet root")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn three_variable_facet() {
        // x1 x2 + x1 x2^2 x3 + x1^2 x2 x3^2 + x1^2 x2^2 x3^2 with the facet
        // through the first three points
        let f = Poly::from_int_terms(
            &["x1", "x2", "x3"],
            &[(1, &[1, 1, 0]), (1, &[1, 2, 1]), (-2, &[2, 1, 2]), (1, &[2, 2, 2])],
        );
        let p = newton_polytope(&f).unwrap();
        let ds = distinguished_facets(&p);
        let df = ds.iter().find(|d| d.normal.iter().map(|x| x.to_string()).collect::<Vec<_>>() == ["2", "1", "-1"]).unwrap();
        let data = facet_data(&f, df, &[Coeff::one()]).unwrap();
        assert_eq!(data.f.num_terms(), 3);
        assert_eq!(data.g.num_terms(), 1);
    }

    #[test]
    fn falling_factorials() {
        assert_eq!(falling_factorial_poly(0), vec![rat_int(1)]);
        assert_eq!(falling_factorial_poly(2), vec![rat_int(0), rat_int(-1), rat_int(1)]);
    }
}
