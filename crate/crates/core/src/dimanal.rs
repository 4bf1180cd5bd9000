//! Dimensional analysis of polynomial and differential equations: homogeneity,
//! constants' dimensions, the variable-constant toric ideal, group selection
//! and non-dimensionalisation.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{
    fmt_rational, hermite_normal_form, pivot_rows, solve_rational, Int, IntMatrix, Rational,
};
use crate::groebner::{toric_ideal, Binomial, Ideal};
use crate::poly::{fmt_power, Coeff, DiffPoly, ExpVector, ParamMono};

/// Exponent per base dimension.
pub type DimVector = Vec<Rational>;

/// One additive term `scalar · consts · vars^exps · (d^s y/dx^s)` exactly as
/// written in the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub scalar: Rational,
    pub consts: ParamMono,
    pub exps: ExpVector,
    pub deriv: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub dim: Option<DimVector>,
}

impl Symbol {
    pub fn new(name: &str, dim: Option<DimVector>) -> Self {
        Symbol { name: name.to_string(), dim }
    }
}

/// An equation `Σ terms = 0` over declared variables and constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionedSystem {
    pub base_dims: Vec<String>,
    pub vars: Vec<Symbol>,
    pub consts: Vec<Symbol>,
    pub terms: Vec<Term>,
    pub indep: Option<String>,
    pub dep: Option<String>,
    pub small: Vec<String>,
}

impl DimensionedSystem {
    pub fn var_names(&self) -> Vec<String> {
        self.vars.iter().map(|s| s.name.clone()).collect()
    }

    pub fn const_names(&self) -> Vec<String> {
        self.consts.iter().map(|s| s.name.clone()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|s| s.name == name)
    }

    /// The equation as a differential form; constants become coefficient
    /// parameters and equal terms merge.
    pub fn equation(&self) -> Result<DiffPoly> {
        let mut eq = DiffPoly::new(self.var_names(), self.indep.clone(), self.dep.clone())?;
        for t in &self.terms {
            eq.add_term(t.exps.clone(), t.deriv, Coeff::monomial(t.scalar.clone(), t.consts.clone()))?;
        }
        Ok(eq)
    }

    pub fn render_term(&self, t: &Term) -> String {
        let mut parts: Vec<String> = Vec::new();
        if !t.scalar.abs().is_one() || (t.consts.is_one() && t.exps.iter().all(Zero::is_zero) && t.deriv.is_none()) {
            parts.push(fmt_rational(&t.scalar.abs()));
        }
        for c in &self.consts {
            let e = t.consts.exponent(&c.name);
            if !e.is_zero() {
                parts.push(fmt_power(&c.name, &e));
            }
        }
        for (v, e) in self.vars.iter().zip(&t.exps) {
            if !e.is_zero() {
                parts.push(fmt_power(&v.name, e));
            }
        }
        if let Some(s) = t.deriv {
            parts.push(format!(
                "D({},{},{})",
                self.dep.as_deref().unwrap_or("?"),
                self.indep.as_deref().unwrap_or("?"),
                s
            ));
        }
        let body = parts.join("*");
        if t.scalar.is_negative() {
            format!("-{body}")
        } else {
            body
        }
    }

    /// `lhs = 0` in source term order.
    pub fn render_equation(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let r = self.render_term(t);
            match (i, r.strip_prefix('-')) {
                (0, _) => out.push_str(&r),
                (_, Some(rest)) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                (_, None) => {
                    out.push_str(" + ");
                    out.push_str(&r);
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

pub fn fmt_dim(base: &[String], v: &[Rational]) -> String {
    let parts: Vec<String> = base
        .iter()
        .zip(v)
        .filter(|(_, e)| !e.is_zero())
        .map(|(b, e)| fmt_power(b, e))
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

fn zero_dim(n: usize) -> DimVector {
    vec![Rational::zero(); n]
}

fn axpy(acc: &mut DimVector, k: &Rational, v: &[Rational]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += k * b;
    }
}

/// Term dimensions that disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneityReport {
    pub base_dims: Vec<String>,
    pub terms: Vec<(String, DimVector)>,
}

impl HomogeneityReport {
    /// Terms whose dimension differs from the first term's.
    pub fn offending(&self) -> Vec<&(String, DimVector)> {
        let first = &self.terms[0].1;
        self.terms.iter().filter(|(_, d)| d != first).collect()
    }
}

impl fmt::Display for HomogeneityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let first = self.terms.first().map(|t| t.1.clone());
        for (i, (t, d)) in self.terms.iter().enumerate() {
            let mark = if Some(d) != first.as_ref() { "  <- differs" } else { "" };
            writeln!(f, "  term {}: {t}  [{}]{mark}", i + 1, fmt_dim(&self.base_dims, d))?;
        }
        Ok(())
    }
}

/// Dimension of a term: constants and variables add their dimensions times
/// exponents, and a derivative factor adds `[y] - s[x]`.
pub fn term_dimension(
    sys: &DimensionedSystem,
    term: &Term,
    dims: &BTreeMap<String, DimVector>,
) -> Result<DimVector> {
    let get = |name: &str| {
        dims.get(name)
            .ok_or_else(|| Error::Invalid(format!("symbol `{name}` has no dimension")))
    };
    let mut out = zero_dim(sys.base_dims.len());
    for (c, e) in term.consts.exponents() {
        axpy(&mut out, e, get(c)?);
    }
    for (v, e) in sys.vars.iter().zip(&term.exps) {
        if !e.is_zero() {
            axpy(&mut out, e, get(&v.name)?);
        }
    }
    if let Some(s) = term.deriv {
        let y = sys.dep.as_deref().ok_or_else(|| Error::Invalid("derivative without dependent variable".into()))?;
        let x = sys.indep.as_deref().ok_or_else(|| Error::Invalid("derivative without independent variable".into()))?;
        axpy(&mut out, &Rational::one(), get(y)?);
        axpy(&mut out, &-Rational::from_integer(s.into()), get(x)?);
    }
    Ok(out)
}

/// Common dimension of all terms.
pub fn check_homogeneity(sys: &DimensionedSystem, dims: &BTreeMap<String, DimVector>) -> Result<DimVector> {
    let mut seen: Vec<(String, DimVector)> = Vec::new();
    for t in &sys.terms {
        seen.push((sys.render_term(t), term_dimension(sys, t, dims)?));
    }
    let Some(first) = seen.first().map(|t| t.1.clone()) else {
        return Ok(zero_dim(sys.base_dims.len()));
    };
    if seen.iter().all(|(_, d)| *d == first) {
        Ok(first)
    } else {
        Err(Error::Inhomogeneous(Box::new(HomogeneityReport { base_dims: sys.base_dims.clone(), terms: seen })))
    }
}

/// Common dimension used for inference: the dimension of the first term
/// free of unknown constants, else zero.
pub fn choose_beta(sys: &DimensionedSystem, known: &BTreeMap<String, DimVector>) -> Result<DimVector> {
    for t in &sys.terms {
        if t.consts.exponents().keys().all(|c| known.contains_key(c)) {
            return term_dimension(sys, t, known);
        }
    }
    Ok(zero_dim(sys.base_dims.len()))
}

/// Dimensions forced on the constants without declared dimension so that
/// every term has dimension `beta`.
pub fn infer_constant_dimensions(
    sys: &DimensionedSystem,
    known: &BTreeMap<String, DimVector>,
    beta: &[Rational],
) -> Result<BTreeMap<String, DimVector>> {
    let mut dims = known.clone();
    let mut inferred: BTreeMap<String, DimVector> = BTreeMap::new();
    loop {
        let mut progress = false;
        for t in &sys.terms {
            let unknown: Vec<(&String, &Rational)> =
                t.consts.exponents().iter().filter(|(c, _)| !dims.contains_key(*c)).collect();
            if unknown.len() != 1 {
                continue;
            }
            let (name, e) = (unknown[0].0.clone(), unknown[0].1.clone());
            let mut partial = t.clone();
            partial.consts = ParamMono::from_map(
                t.consts.exponents().iter().filter(|(c, _)| **c != name).map(|(c, x)| (c.clone(), x.clone())).collect(),
            );
            let rest = term_dimension(sys, &partial, &dims)?;
            let d: DimVector = beta.iter().zip(&rest).map(|(b, r)| (b - r) / &e).collect();
            dims.insert(name.clone(), d.clone());
            inferred.insert(name, d);
            progress = true;
        }
        if !progress {
            break;
        }
    }
    for c in &sys.consts {
        if !dims.contains_key(&c.name) && sys.terms.iter().any(|t| !t.consts.exponent(&c.name).is_zero()) {
            return Err(Error::Invalid(format!("cannot infer the dimension of constant `{}`", c.name)));
        }
    }
    // a second pass detects constants forced to two different values
    for t in &sys.terms {
        for (name, e) in t.consts.exponents() {
            if !inferred.contains_key(name) {
                continue;
            }
            let mut partial = t.clone();
            partial.consts = ParamMono::from_map(
                t.consts.exponents().iter().filter(|(c, _)| *c != name).map(|(c, x)| (c.clone(), x.clone())).collect(),
            );
            let rest = term_dimension(sys, &partial, &dims)?;
            let d: DimVector = beta.iter().zip(&rest).map(|(b, r)| (b - r) / e).collect();
            if d != inferred[name] {
                return Err(Error::InconsistentConstant {
                    name: name.clone(),
                    first: fmt_dim(&sys.base_dims, &inferred[name]),
                    second: fmt_dim(&sys.base_dims, &d),
                });
            }
        }
    }
    Ok(inferred)
}

/// Fully resolved dimensions of a system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolved {
    pub dims: BTreeMap<String, DimVector>,
    pub inferred: BTreeMap<String, DimVector>,
    pub beta: DimVector,
    pub notices: Vec<String>,
}

/// Assigns every symbol a dimension, infers the constants and checks
/// homogeneity.
pub fn resolve_dimensions(sys: &DimensionedSystem) -> Result<Resolved> {
    let n = sys.base_dims.len();
    let mut dims = BTreeMap::new();
    let mut notices = Vec::new();
    for (i, v) in sys.vars.iter().enumerate() {
        match &v.dim {
            Some(d) => {
                dims.insert(v.name.clone(), d.clone());
            }
            None => {
                let degree = |t: &Term| {
                    let mut k = t.exps[i].clone();
                    if t.deriv.is_some() && sys.dep.as_deref() == Some(v.name.as_str()) {
                        k += Rational::one();
                    }
                    k
                };
                let first = sys.terms.first().map(degree);
                if sys.terms.iter().all(|t| Some(degree(t)) == first) {
                    notices.push(format!(
                        "`{}` has the same degree in every term; its dimension cancels and is taken as 1",
                        v.name
                    ));
                    dims.insert(v.name.clone(), zero_dim(n));
                } else {
                    return Err(Error::Invalid(format!("variable `{}` has no declared dimension", v.name)));
                }
            }
        }
    }
    for c in &sys.consts {
        if let Some(d) = &c.dim {
            dims.insert(c.name.clone(), d.clone());
        }
    }
    let beta = choose_beta(sys, &dims)?;
    let inferred = infer_constant_dimensions(sys, &dims, &beta)?;
    dims.extend(inferred.iter().map(|(k, v)| (k.clone(), v.clone())));
    let beta = check_homogeneity(sys, &dims)?;
    Ok(Resolved { dims, inferred, beta, notices })
}

/// Symbol order used by the toric computations: variables then constants.
pub fn symbol_names(sys: &DimensionedSystem) -> Vec<String> {
    let mut names = sys.var_names();
    names.extend(sys.const_names());
    names
}

/// Integer dimension matrix, one row per symbol; each column is scaled by
/// the lcm of its denominators.
pub fn dimension_matrix(sys: &DimensionedSystem, dims: &BTreeMap<String, DimVector>) -> Result<IntMatrix> {
    let names = symbol_names(sys);
    let n = sys.base_dims.len();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for s in &names {
        rows.push(dims.get(s).cloned().ok_or_else(|| Error::Invalid(format!("symbol `{s}` has no dimension")))?);
    }
    let mut out = IntMatrix::zeros(names.len(), n);
    for j in 0..n {
        let l = rows.iter().fold(Int::one(), |l, r| l.lcm(r[j].denom()));
        for (i, r) in rows.iter().enumerate() {
            out[(i, j)] = (&r[j] * Rational::from_integer(l.clone())).to_integer();
        }
    }
    Ok(out)
}

/// Toric ideal of the dimension matrix over variables and constants.
pub fn variable_constant_ideal(sys: &DimensionedSystem, dims: &BTreeMap<String, DimVector>) -> Result<Ideal> {
    toric_ideal(&dimension_matrix(sys, dims)?, &symbol_names(sys))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Variable(String),
    Constant,
}

/// A dimensionless power product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub kind: GroupKind,
    /// Nonzero exponents, variables first, in declaration order.
    pub exponents: Vec<(String, Rational)>,
}

impl Group {
    pub fn exponent(&self, symbol: &str) -> Rational {
        self.exponents
            .iter()
            .find(|(s, _)| s == symbol)
            .map(|(_, e)| e.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// Builds a group from exponents and classifies it against `sys`.
    pub fn from_exponents(
        sys: &DimensionedSystem,
        name: &str,
        exps: impl IntoIterator<Item = (String, Rational)>,
    ) -> Result<Group> {
        let map: BTreeMap<String, Rational> = exps.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        for k in map.keys() {
            if sys.var_index(k).is_none() && !sys.consts.iter().any(|c| &c.name == k) {
                return Err(Error::Invalid(format!("group `{name}` uses undeclared symbol `{k}`")));
            }
        }
        let exponents: Vec<(String, Rational)> = symbol_names(sys)
            .into_iter()
            .filter_map(|s| map.get(&s).map(|e| (s.clone(), e.clone())))
            .collect();
        let vars: Vec<&String> = exponents.iter().map(|(s, _)| s).filter(|s| sys.var_index(s).is_some()).collect();
        let kind = match vars.as_slice() {
            [] => GroupKind::Constant,
            [v] => GroupKind::Variable((*v).clone()),
            _ => {
                return Err(Error::Invalid(format!("group `{name}` mixes several variables")));
            }
        };
        Ok(Group { name: name.to_string(), kind, exponents })
    }

    pub fn dimension(&self, dims: &BTreeMap<String, DimVector>, n: usize) -> Result<DimVector> {
        let mut out = zero_dim(n);
        for (s, e) in &self.exponents {
            let d = dims.get(s).ok_or_else(|| Error::Invalid(format!("symbol `{s}` has no dimension")))?;
            axpy(&mut out, e, d);
        }
        Ok(out)
    }

    pub fn is_dimensionless(&self, dims: &BTreeMap<String, DimVector>, n: usize) -> Result<bool> {
        Ok(self.dimension(dims, n)?.iter().all(Zero::is_zero))
    }

    /// Power product as a fraction, e.g. `a^2*y/b`.
    pub fn render(&self) -> String {
        let num: Vec<String> =
            self.exponents.iter().filter(|(_, e)| e.is_positive()).map(|(s, e)| fmt_power(s, e)).collect();
        let den: Vec<String> =
            self.exponents.iter().filter(|(_, e)| e.is_negative()).map(|(s, e)| fmt_power(s, &-e)).collect();
        let num = if num.is_empty() { "1".to_string() } else { num.join("*") };
        match den.len() {
            0 => num,
            1 => format!("{num}/{}", den[0]),
            _ => format!("{num}/({})", den.join("*")),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.name, self.render())
    }
}

/// Groups chosen from the toric generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSelection {
    pub groups: Vec<Group>,
    pub unseparated: Vec<String>,
}

fn symmetric_quotient(a: &Int, p: &Int) -> Int {
    // q with a - q·p in (-p/2, p/2]
    let two = Int::from(2);
    let (q, r) = a.div_mod_floor(p);
    if &r * &two > *p {
        q + 1
    } else {
        q
    }
}

/// Column HNF of the lattice with rows permuted by `order`, reduced so
/// that entries below each pivot are symmetric residues modulo the later
/// pivots. Columns are returned in the original row indexing.
fn reduced_echelon(lattice: &IntMatrix, order: &[usize]) -> Vec<(usize, Vec<Int>)> {
    let mut permuted = IntMatrix::zeros(lattice.rows(), lattice.cols());
    for (new, &old) in order.iter().enumerate() {
        for j in 0..lattice.cols() {
            permuted[(new, j)] = lattice[(old, j)].clone();
        }
    }
    let (h, _) = hermite_normal_form(&permuted);
    let pivots = pivot_rows(&h);
    let mut cols: Vec<Vec<Int>> = (0..pivots.len()).map(|j| h.column(j)).collect();
    for j in (0..cols.len()).rev() {
        for k in j + 1..cols.len() {
            let p = &cols[k][pivots[k]].clone();
            let q = symmetric_quotient(&cols[j][pivots[k]], p);
            if !q.is_zero() {
                let later = cols[k].clone();
                for (x, y) in cols[j].iter_mut().zip(&later) {
                    *x -= &q * y;
                }
            }
        }
    }
    pivots
        .into_iter()
        .zip(cols)
        .map(|(p, col)| {
            let mut orig = vec![Int::zero(); col.len()];
            for (new, &old) in order.iter().enumerate() {
                orig[old] = col[new].clone();
            }
            (p, orig)
        })
        .collect()
}

fn capitalized(name: &str) -> String {
    let mut c = name.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn fresh_name(base: String, taken: &[String]) -> String {
    let mut n = base;
    while taken.contains(&n) {
        n.push('_');
    }
    n
}

/// One group per variable, `v^k · (constants)` with the least `k > 0`, and
/// a basis of constant-only groups. Rows are ordered with the other
/// variables first and the constants last in reverse declaration order, so
/// the Hermite pivots favour early constants; remaining entries are reduced
/// to symmetric residues.
pub fn select_groups(gens: &[Binomial], sys: &DimensionedSystem) -> Result<GroupSelection> {
    let names = symbol_names(sys);
    let nv = sys.vars.len();
    let n = names.len();
    let cols: Vec<Vec<Int>> = gens
        .iter()
        .map(|b| {
            if b.vplus.len() != n {
                return Err(Error::Invalid("generator over a different symbol list".into()));
            }
            Ok(b.difference().into_iter().map(Int::from).collect())
        })
        .collect::<Result<_>>()?;
    let lattice = IntMatrix::from_columns(n, &cols);
    let consts_rev: Vec<usize> = (nv..n).rev().collect();
    let mut taken = names.clone();
    let mut groups = Vec::new();
    let mut unseparated = Vec::new();
    for i in 0..nv {
        let mut order: Vec<usize> = (0..nv).filter(|&k| k != i).collect();
        order.push(i);
        order.extend(&consts_rev);
        let found = reduced_echelon(&lattice, &order).into_iter().find(|(p, _)| *p == nv - 1);
        match found {
            Some((_, col)) => {
                let name = fresh_name(capitalized(&names[i]), &taken);
                taken.push(name.clone());
                let exps = names.iter().cloned().zip(col.into_iter().map(Rational::from_integer));
                groups.push(Group::from_exponents(sys, &name, exps)?);
            }
            None => unseparated.push(names[i].clone()),
        }
    }
    let mut order: Vec<usize> = (0..nv).collect();
    order.extend(&consts_rev);
    let const_cols: Vec<Vec<Int>> =
        reduced_echelon(&lattice, &order).into_iter().filter(|(p, _)| *p >= nv).map(|(_, c)| c).collect();
    let single = const_cols.len() == 1;
    for (k, col) in const_cols.into_iter().enumerate() {
        let base = if single { "R".to_string() } else { format!("R{}", k + 1) };
        let name = fresh_name(base, &taken);
        taken.push(name.clone());
        let exps = names.iter().cloned().zip(col.into_iter().map(Rational::from_integer));
        groups.push(Group::from_exponents(sys, &name, exps)?);
    }
    Ok(GroupSelection { groups, unseparated })
}

/// `g^(1/k)`; a variable group must carry its variable at exponent `±k`.
pub fn root_extract_group(g: &Group, k: u32) -> Result<Group> {
    if k == 0 {
        return Err(Error::Invalid("root index must be positive".into()));
    }
    let kq = Rational::from_integer(k.into());
    if let GroupKind::Variable(v) = &g.kind {
        let e = g.exponent(v);
        if e.abs() != kq {
            return Err(Error::Invalid(format!(
                "exponent {} of `{v}` in group `{}` is not ±{k}",
                fmt_rational(&e),
                g.name
            )));
        }
    }
    Ok(Group {
        name: g.name.clone(),
        kind: g.kind.clone(),
        exponents: g.exponents.iter().map(|(s, e)| (s.clone(), e / &kq)).collect(),
    })
}

/// Outcome of non-dimensionalisation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nondimensional {
    pub equation: DiffPoly,
    /// Variable groups after root extraction, then the constant groups.
    pub groups: Vec<Group>,
    /// Parameter monomial divided out of every term.
    pub divided_by: ParamMono,
}

/// Substitutes `v = C⁻¹·V` for each variable group `V = v·C`, divides by the
/// first term's constant monomial and rewrites the remaining coefficients
/// in the constant-only groups. Scalars are then scaled to coprime
/// integers, keeping the first term's sign.
pub fn nondimensionalize(
    sys: &DimensionedSystem,
    dims: &BTreeMap<String, DimVector>,
    groups: &[Group],
) -> Result<Nondimensional> {
    let nb = sys.base_dims.len();
    for g in groups {
        if !g.is_dimensionless(dims, nb)? {
            return Err(Error::Invalid(format!(
                "group {g} has dimension {}",
                fmt_dim(&sys.base_dims, &g.dimension(dims, nb)?)
            )));
        }
    }
    let mut var_groups: Vec<Group> = Vec::new();
    let mut scale: Vec<ParamMono> = Vec::new();
    for v in &sys.vars {
        let g = groups
            .iter()
            .find(|g| g.kind == GroupKind::Variable(v.name.clone()))
            .ok_or_else(|| Error::Unsupported(format!("cannot separate variable `{}`", v.name)))?;
        let mut g = g.clone();
        let e = g.exponent(&v.name);
        if e.is_negative() {
            g.exponents = g.exponents.iter().map(|(s, x)| (s.clone(), -x)).collect();
        }
        let e = e.abs();
        if !e.is_integer() {
            return Err(Error::Invalid(format!("group `{}` has a fractional variable exponent", g.name)));
        }
        let k: u32 = e.to_integer().try_into().map_err(|_| Error::Unsupported("exponent too large".into()))?;
        let g = root_extract_group(&g, k)?;
        // v = C^-1 V
        let c = ParamMono::from_map(
            g.exponents.iter().filter(|(s, _)| *s != v.name).map(|(s, x)| (s.clone(), -x)).collect(),
        );
        scale.push(c);
        var_groups.push(g);
    }
    let const_groups: Vec<&Group> = groups.iter().filter(|g| g.kind == GroupKind::Constant).collect();

    let dep = sys.dep.as_deref().and_then(|d| sys.var_index(d));
    let indep = sys.indep.as_deref().and_then(|d| sys.var_index(d));
    let mut monos: Vec<(Rational, ParamMono)> = Vec::new();
    for t in &sys.terms {
        let mut m = t.consts.clone();
        for (i, e) in t.exps.iter().enumerate() {
            m = m.mul(&scale[i].pow(e));
        }
        if let Some(s) = t.deriv {
            let (d, x) = (dep.unwrap(), indep.unwrap());
            m = m.mul(&scale[d]).mul(&scale[x].pow(&-Rational::from_integer(s.into())));
        }
        monos.push((t.scalar.clone(), m));
    }
    let divided_by = monos.first().map(|(_, m)| m.clone()).unwrap_or_else(ParamMono::one);

    let const_names = sys.const_names();
    let basis: Vec<Vec<Rational>> =
        const_names.iter().map(|c| const_groups.iter().map(|g| g.exponent(c)).collect()).collect();
    let mut rewritten: Vec<(Rational, ParamMono)> = Vec::new();
    for (q, m) in &monos {
        let rest = m.mul(&divided_by.inv());
        let target: Vec<Rational> = const_names.iter().map(|c| rest.exponent(c)).collect();
        let coords = if target.iter().all(Zero::is_zero) {
            vec![Rational::zero(); const_groups.len()]
        } else {
            solve_rational(&basis, &target).ok_or_else(|| {
                Error::Invalid(format!("coefficient {rest} is not a power product of the constant groups"))
            })?
        };
        let gm = ParamMono::from_map(const_groups.iter().zip(coords).map(|(g, k)| (g.name.clone(), k)).collect());
        rewritten.push((q.clone(), gm));
    }

    let l = rewritten.iter().fold(Int::one(), |l, (q, _)| l.lcm(q.denom()));
    let g = rewritten.iter().fold(Int::zero(), |g, (q, _)| g.gcd(q.numer()));
    let factor = if g.is_zero() { Rational::one() } else { Rational::new(l, g) };

    let new_vars: Vec<String> = var_groups.iter().map(|g| g.name.clone()).collect();
    let rename = |o: &Option<String>| {
        o.as_deref().and_then(|n| sys.var_index(n)).map(|i| new_vars[i].clone())
    };
    let mut eq = DiffPoly::new(new_vars.clone(), rename(&sys.indep), rename(&sys.dep))?;
    for (t, (q, gm)) in sys.terms.iter().zip(rewritten) {
        eq.add_term(t.exps.clone(), t.deriv, Coeff::monomial(q * &factor, gm))?;
    }
    let mut all = var_groups;
    all.extend(const_groups.into_iter().cloned());
    Ok(Nondimensional { equation: eq, groups: all, divided_by })
}
