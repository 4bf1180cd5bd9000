//! Buchberger's algorithm and the ideal operations built on it: elimination,
//! saturation and toric ideals of integer matrices.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::Sign;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::{integer_kernel, Int, IntMatrix, Rational};
use crate::poly::sparse::{self, coprime, divides, lcm, normal_form, SPoly};
use crate::poly::{exp_from_ints, render_mono, Coeff, MonomialOrder, Poly};

/// `x^vplus - x^vminus` with disjoint supports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Binomial {
    pub vplus: Vec<i64>,
    pub vminus: Vec<i64>,
}

impl Binomial {
    /// Splits an integer vector into positive and negative parts.
    pub fn from_difference(v: &[i64]) -> Self {
        Binomial {
            vplus: v.iter().map(|x| (*x).max(0)).collect(),
            vminus: v.iter().map(|x| (-*x).max(0)).collect(),
        }
    }

    pub fn difference(&self) -> Vec<i64> {
        self.vplus.iter().zip(&self.vminus).map(|(a, b)| a - b).collect()
    }

    pub fn to_poly(&self, vars: &[String]) -> Poly {
        Poly::from_terms(
            vars.to_vec(),
            [
                (exp_from_ints(&self.vplus), Coeff::one()),
                (exp_from_ints(&self.vminus), -Coeff::one()),
            ],
        )
    }

    pub fn render(&self, vars: &[String]) -> String {
        let side = |v: &[i64]| {
            let s = render_mono(vars, &exp_from_ints(v));
            if s.is_empty() {
                "1".to_string()
            } else {
                s
            }
        };
        format!("{} - {}", side(&self.vplus), side(&self.vminus))
    }

    fn from_poly(p: &Poly) -> Option<Self> {
        let terms: Vec<_> = p.sorted_terms(MonomialOrder::GrevLex);
        if terms.len() != 2 {
            return None;
        }
        let (e1, c1) = terms[0];
        let (e2, c2) = terms[1];
        if !c1.is_one() || (-c2) != Coeff::one() {
            return None;
        }
        let to_ints = |e: &Vec<Rational>| -> Option<Vec<i64>> { e.iter().map(crate::exactmath::to_i64).collect() };
        let a = to_ints(e1)?;
        let b = to_ints(e2)?;
        // cancel common factors so supports are disjoint
        let common: Vec<i64> = a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect();
        if common.iter().any(|c| *c != 0) {
            return None;
        }
        Some(Binomial { vplus: a, vminus: b })
    }
}

/// Ideal given by generators. `reduced` marks a reduced Gröbner basis under
/// `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    vars: Vec<String>,
    generators: Vec<Poly>,
    order: MonomialOrder,
    reduced: bool,
}

impl Ideal {
    pub fn new(vars: Vec<String>, generators: Vec<Poly>) -> Result<Self> {
        for g in &generators {
            if g.vars() != vars.as_slice() {
                return Err(Error::Invalid("generator over a different ring".into()));
            }
        }
        Ok(Ideal {
            vars,
            generators: generators.into_iter().filter(|g| !g.is_zero()).collect(),
            order: MonomialOrder::GrevLex,
            reduced: false,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// Reduced Gröbner basis of this ideal (itself if already reduced under
    /// `ord`).
    pub fn basis(&self, ord: MonomialOrder) -> Result<Ideal> {
        if self.reduced && self.order == ord {
            return Ok(self.clone());
        }
        let mut gb = groebner_basis(&self.generators, ord)?;
        gb.vars = self.vars.clone();
        Ok(gb)
    }

    pub fn contains(&self, f: &Poly) -> Result<bool> {
        ideal_membership(f, self)
    }

    /// Every generator of `other` lies in `self`.
    pub fn contains_ideal(&self, other: &Ideal) -> Result<bool> {
        let gb = self.basis(self.order)?;
        for g in other.generators() {
            if !ideal_membership(&g.with_vars(&self.vars)?, &gb)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equals(&self, other: &Ideal) -> Result<bool> {
        Ok(self.contains_ideal(other)? && other.contains_ideal(self)?)
    }

    /// Generators as binomials, when every generator is one.
    pub fn binomials(&self) -> Option<Vec<Binomial>> {
        self.generators.iter().map(Binomial::from_poly).collect()
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| g.render(self.order)).collect();
        write!(f, "<{}>", gens.join(", "))
    }
}

fn basis_cmp(ord: MonomialOrder) -> impl Fn(&SPoly, &SPoly) -> std::cmp::Ordering {
    move |a, b| ord.cmp(b.lm(), a.lm())
}

/// Reduced Gröbner basis by Buchberger's algorithm with the coprime and chain
/// criteria and the normal selection strategy. The output is sorted by
/// decreasing leading monomial, so it does not depend on input order.
pub fn groebner_basis(gens: &[Poly], ord: MonomialOrder) -> Result<Ideal> {
    let vars: Vec<String> = match gens.first() {
        Some(g) => g.vars().to_vec(),
        None => Vec::new(),
    };
    let mut basis: Vec<SPoly> = Vec::new();
    for g in gens {
        if g.vars() != vars.as_slice() {
            return Err(Error::Invalid("generators over different rings".into()));
        }
        let s = SPoly::from_poly(g, ord)?;
        if !s.is_zero() {
            basis.push(s.monic());
        }
    }
    let basis = buchberger(basis, ord);
    Ok(Ideal {
        generators: basis.iter().map(|g| g.to_poly(&vars)).collect(),
        vars,
        order: ord,
        reduced: true,
    })
}

pub(crate) fn buchberger(mut basis: Vec<SPoly>, ord: MonomialOrder) -> Vec<SPoly> {
    // Deterministic start: sort inputs by leading monomial, then contents.
    basis.sort_by(|a, b| basis_cmp(ord)(a, b).then_with(|| format!("{a:?}").cmp(&format!("{b:?}"))));
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.insert((i, j));
        }
    }
    while let Some(&(i, j)) = pairs.iter().min_by(|&&(a, b), &&(c, d)| {
        let l1 = lcm(basis[a].lm(), basis[b].lm());
        let l2 = lcm(basis[c].lm(), basis[d].lm());
        ord.cmp(&l1, &l2).then((b, a).cmp(&(d, c)))
    }) {
        pairs.remove(&(i, j));
        if coprime(basis[i].lm(), basis[j].lm()) {
            continue;
        }
        let l = lcm(basis[i].lm(), basis[j].lm());
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && divides(basis[k].lm(), &l)
                && !pairs.contains(&key(i, k))
                && !pairs.contains(&key(j, k))
        });
        if chain {
            continue;
        }
        let s = SPoly::s_poly(&basis[i], &basis[j], ord);
        let r = normal_form(&s, &basis, ord);
        if !r.is_zero() {
            let n = basis.len();
            basis.push(r.monic());
            for k in 0..n {
                pairs.insert((k, n));
            }
        }
    }
    reduce_basis(basis, ord)
}

/// Minimal, inter-reduced, monic and sorted.
fn reduce_basis(basis: Vec<SPoly>, ord: MonomialOrder) -> Vec<SPoly> {
    let mut minimal: Vec<SPoly> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(k, h)| {
            k != i && divides(h.lm(), g.lm()) && (h.lm() != g.lm() || k < i)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<SPoly> = minimal
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, g)| g.clone())
            .collect();
        out.push(normal_form(&minimal[i], &others, ord).monic());
    }
    out.sort_by(basis_cmp(ord));
    out
}

/// `I ∩ k[remaining]` where `first_block` are eliminated. The result is the
/// reduced Gröbner basis of the elimination ideal under grevlex.
pub fn eliminate(ideal: &Ideal, first_block: &[&str]) -> Result<Ideal> {
    let vars = ideal.vars();
    for v in first_block {
        if !vars.iter().any(|w| w == v) {
            return Err(Error::Invalid(format!("unknown indeterminate `{v}`")));
        }
    }
    let elim: Vec<String> = vars.iter().filter(|v| first_block.contains(&v.as_str())).cloned().collect();
    let rest: Vec<String> = vars.iter().filter(|v| !first_block.contains(&v.as_str())).cloned().collect();
    let mut ordered = elim.clone();
    ordered.extend(rest.iter().cloned());
    let ord = MonomialOrder::Block { split: elim.len() };
    let gens: Vec<Poly> = ideal
        .generators()
        .iter()
        .map(|g| g.with_vars(&ordered))
        .collect::<Result<_>>()?;
    let gb = groebner_basis(&gens, ord)?;
    let k = elim.len();
    let kept: Vec<Poly> = gb
        .generators()
        .iter()
        .filter(|g| g.terms().all(|(e, _)| e[..k].iter().all(Zero::is_zero)))
        .map(|g| {
            Poly::from_terms(rest.clone(), g.terms().map(|(e, c)| (e[k..].to_vec(), c.clone())))
        })
        .collect();
    Ok(Ideal {
        vars: rest,
        generators: kept,
        order: MonomialOrder::GrevLex,
        reduced: true,
    })
}

/// `(I : m^∞)` by adjoining `t·m - 1` for a fresh `t` and eliminating `t`.
pub fn saturate(ideal: &Ideal, monomial: &[i64]) -> Result<Ideal> {
    if monomial.len() != ideal.vars().len() || monomial.iter().any(|e| *e < 0) {
        return Err(Error::Invalid("saturating monomial must be a power product of the ring".into()));
    }
    let mut t = "t".to_string();
    while ideal.vars().contains(&t) {
        t.push('_');
    }
    let mut vars = vec![t.clone()];
    vars.extend(ideal.vars().iter().cloned());
    let mut gens: Vec<Poly> = ideal
        .generators()
        .iter()
        .map(|g| g.with_vars(&vars))
        .collect::<Result<_>>()?;
    let mut e = vec![1i64];
    e.extend_from_slice(monomial);
    gens.push(Poly::from_terms(
        vars.clone(),
        [
            (exp_from_ints(&e), Coeff::one()),
            (exp_from_ints(&vec![0; vars.len()]), -Coeff::one()),
        ],
    ));
    let extended = Ideal::new(vars, gens)?;
    eliminate(&extended, &[t.as_str()])
}

/// Lattice ideal generated by the columns of `basis` (not yet saturated).
pub fn lattice_ideal(basis: &IntMatrix, names: &[String]) -> Result<Ideal> {
    let gens: Vec<Poly> = basis
        .columns()
        .iter()
        .map(|col| {
            let v: Vec<i64> = col.iter().map(to_small).collect::<Result<_>>()?;
            Ok(Binomial::from_difference(&v).to_poly(names))
        })
        .collect::<Result<_>>()?;
    Ideal::new(names.to_vec(), gens)
}

fn to_small(x: &Int) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::Unsupported("kernel entry too large".into()))
}

/// Toric ideal of `A` (row `i` = dimension exponents of variable `i`): the
/// lattice ideal of an integer kernel basis of `Aᵀ`, saturated by the product
/// of all variables.
pub fn toric_ideal(a: &IntMatrix, names: &[String]) -> Result<Ideal> {
    if names.len() != a.rows() {
        return Err(Error::Invalid("one name per matrix row required".into()));
    }
    let k = integer_kernel(a);
    if k.cols() == 0 {
        return Ok(Ideal {
            vars: names.to_vec(),
            generators: Vec::new(),
            order: MonomialOrder::GrevLex,
            reduced: true,
        });
    }
    let lattice = lattice_ideal(&k, names)?;
    saturate(&lattice, &vec![1; names.len()])
}

/// Same ideal via `x_i - z^{a_i}`, with `z_j w_j - 1` adjoined so that
/// negative entries stay polynomial, eliminating all `z` and `w`.
pub fn toric_ideal_by_elimination(a: &IntMatrix, names: &[String]) -> Result<Ideal> {
    let k = a.cols();
    let mut vars: Vec<String> = Vec::new();
    for j in 0..k {
        vars.push(format!("_z{j}"));
    }
    for j in 0..k {
        vars.push(format!("_w{j}"));
    }
    vars.extend(names.iter().cloned());
    let n = vars.len();
    let mut gens = Vec::new();
    for i in 0..a.rows() {
        let mut lhs = vec![0i64; n];
        lhs[2 * k + i] = 1;
        let mut rhs = vec![0i64; n];
        for j in 0..k {
            let e = to_small(&a[(i, j)])?;
            match a[(i, j)].sign() {
                Sign::Plus => rhs[j] = e,
                Sign::Minus => rhs[k + j] = -e,
                Sign::NoSign => {}
            }
        }
        gens.push(Poly::from_terms(
            vars.clone(),
            [(exp_from_ints(&lhs), Coeff::one()), (exp_from_ints(&rhs), -Coeff::one())],
        ));
    }
    for j in 0..k {
        let mut e = vec![0i64; n];
        e[j] = 1;
        e[k + j] = 1;
        gens.push(Poly::from_terms(
            vars.clone(),
            [(exp_from_ints(&e), Coeff::one()), (exp_from_ints(&vec![0; n]), -Coeff::one())],
        ));
    }
    let ideal = Ideal::new(vars.clone(), gens)?;
    let block: Vec<&str> = vars[..2 * k].iter().map(String::as_str).collect();
    eliminate(&ideal, &block)
}

/// `f ∈ I`, decided by reduction against a reduced Gröbner basis.
pub fn ideal_membership(f: &Poly, ideal: &Ideal) -> Result<bool> {
    let gb = if ideal.reduced {
        ideal.clone()
    } else {
        ideal.basis(MonomialOrder::GrevLex)?
    };
    if f.is_zero() {
        return Ok(true);
    }
    if gb.generators.is_empty() {
        return Ok(false);
    }
    let f = f.with_vars(gb.vars())?;
    let sf = SPoly::from_poly(&f, gb.order)?;
    let basis: Vec<SPoly> = gb
        .generators
        .iter()
        .map(|g| SPoly::from_poly(g, gb.order))
        .collect::<Result<_>>()?;
    Ok(sparse::normal_form(&sf, &basis, gb.order).is_zero())
}

/// Exponent vectors `v⁺ - v⁻` of every generator must lie in `ker Aᵀ`.
pub fn binomial_in_kernel(a: &IntMatrix, b: &Binomial) -> bool {
    let d = b.difference();
    (0..a.cols()).all(|j| {
        let s: Int = (0..a.rows()).map(|i| &a[(i, j)] * Int::from(d[i])).sum();
        s.is_zero()
    })
}
