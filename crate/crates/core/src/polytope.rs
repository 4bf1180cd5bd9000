//! Newton polytopes, Kruskal point sets, facet normals and distinguished
//! facets.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{integer_kernel, primitive, solve_rational, Int, IntMatrix, Rational};
use crate::poly::{DiffPoly, ExpVector, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    /// Indices of every support point on the facet, ascending.
    pub vertices: Vec<usize>,
    /// Primitive normal pointing into the polytope.
    pub normal: Vec<Int>,
    /// `m·p = offset` on the facet.
    pub offset: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePolytope {
    /// Support points, deduplicated and sorted ascending.
    pub points: Vec<ExpVector>,
    pub affine_dim: usize,
    pub vertices: Vec<usize>,
    /// Facets sorted by their vertex index lists. A support lying in a
    /// hyperplane yields that hyperplane as its only facet.
    pub facets: Vec<Facet>,
}

impl LatticePolytope {
    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn vertex_points(&self) -> Vec<&ExpVector> {
        self.vertices.iter().map(|&i| &self.points[i]).collect()
    }

    pub fn index_of(&self, p: &[Rational]) -> Option<usize> {
        self.points.iter().position(|q| q.as_slice() == p)
    }
}

fn dot(m: &[Int], p: &[Rational]) -> Rational {
    m.iter().zip(p).map(|(a, b)| Rational::from_integer(a.clone()) * b).sum()
}

fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Integer matrix whose columns are the given rational vectors, each scaled
/// by the lcm of its denominators.
fn integer_columns(rows: usize, vs: &[Vec<Rational>]) -> IntMatrix {
    let cols: Vec<Vec<Int>> = vs
        .iter()
        .map(|v| {
            let l = v.iter().fold(Int::one(), |l, x| l.lcm(x.denom()));
            v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    IntMatrix::from_columns(rows, &cols)
}

fn rank(vs: &[Vec<Rational>], rows: usize) -> usize {
    if vs.is_empty() {
        return 0;
    }
    integer_columns(rows, vs).rank()
}

/// Primitive normal to the affine span of `vertices`, first nonzero entry
/// positive.
pub fn facet_normal(vertices: &[ExpVector]) -> Result<Vec<Int>> {
    let degenerate = || Error::Invalid("facet does not span a hyperplane".into());
    let first = vertices.first().ok_or_else(degenerate)?;
    let d = first.len();
    let diffs: Vec<Vec<Rational>> = vertices[1..].iter().map(|v| sub(v, first)).collect();
    let k = if diffs.is_empty() { IntMatrix::identity(d) } else { integer_kernel(&integer_columns(d, &diffs)) };
    if k.cols() != 1 {
        return Err(degenerate());
    }
    primitive(&k.column(0))
}

/// Orders points lexicographically and removes duplicates.
fn normalize_points(mut pts: Vec<ExpVector>) -> Vec<ExpVector> {
    pts.sort();
    pts.dedup();
    pts
}

/// k-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Supporting hyperplanes of a full-dimensional point set, as
/// `(points on it, inward normal, offset)`.
fn full_dim_facets(pts: &[ExpVector]) -> Vec<Facet> {
    let d = pts[0].len();
    let mut facets: Vec<Facet> = Vec::new();
    for subset in combinations(pts.len(), d) {
        let chosen: Vec<ExpVector> = subset.iter().map(|&i| pts[i].clone()).collect();
        let Ok(mut m) = facet_normal(&chosen) else { continue };
        let mut h = dot(&m, &pts[subset[0]]);
        let vals: Vec<Rational> = pts.iter().map(|p| dot(&m, p)).collect();
        let above = vals.iter().any(|v| *v > h);
        let below = vals.iter().any(|v| *v < h);
        if above && below {
            continue;
        }
        if below {
            m = m.iter().map(|x| -x).collect();
            h = -h;
        }
        let on: Vec<usize> = (0..pts.len()).filter(|&i| dot(&m, &pts[i]) == h).collect();
        if !facets.iter().any(|f| f.vertices == on) {
            facets.push(Facet { vertices: on, normal: m, offset: h });
        }
    }
    facets.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    facets
}

/// Convex hull data of a finite point set.
pub fn polytope_from_points(points: Vec<ExpVector>) -> Result<LatticePolytope> {
    let pts = normalize_points(points);
    let Some(p0) = pts.first().cloned() else {
        return Err(Error::Invalid("empty point set".into()));
    };
    let d = p0.len();
    if pts.iter().any(|p| p.len() != d) {
        return Err(Error::Invalid("points of different dimension".into()));
    }
    // affine basis of the span
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    for p in &pts[1..] {
        let v = sub(p, &p0);
        let mut trial = basis.clone();
        trial.push(v);
        if rank(&trial, d) > basis.len() {
            basis = trial;
        }
    }
    let k = basis.len();
    // coordinates in the affine hull, full-dimensional in R^k
    let local: Vec<ExpVector> = pts
        .iter()
        .map(|p| {
            let a: Vec<Vec<Rational>> = (0..d).map(|i| basis.iter().map(|b| b[i].clone()).collect()).collect();
            solve_rational(&a, &sub(p, &p0)).expect("point lies in its affine hull")
        })
        .collect();
    let vertices: Vec<usize> = if k == 0 {
        vec![0]
    } else {
        let local_facets = full_dim_facets(&local);
        (0..pts.len())
            .filter(|i| {
                let normals: Vec<Vec<Rational>> = local_facets
                    .iter()
                    .filter(|f| f.vertices.contains(i))
                    .map(|f| f.normal.iter().map(|x| Rational::from_integer(x.clone())).collect())
                    .collect();
                rank(&normals, k) == k
            })
            .collect()
    };
    let facets = if k == d {
        full_dim_facets(&pts)
    } else if k + 1 == d {
        let m = facet_normal(&pts)?;
        let h = dot(&m, &p0);
        vec![Facet { vertices: (0..pts.len()).collect(), normal: m, offset: h }]
    } else {
        Vec::new()
    };
    Ok(LatticePolytope { points: pts, affine_dim: k, vertices, facets })
}

pub fn newton_polytope(f: &Poly) -> Result<LatticePolytope> {
    if f.is_zero() {
        return Err(Error::Invalid("zero polynomial has no Newton polytope".into()));
    }
    polytope_from_points(f.terms().map(|(e, _)| e.clone()).collect())
}

/// One point per term: a derivative factor of order `s` contributes
/// `(α - s, β + 1)`, derivative-free terms their exponent vector.
pub fn kruskal_points(eq: &DiffPoly) -> Vec<ExpVector> {
    let mut pts: Vec<ExpVector> = eq.terms().map(|(e, s, _)| eq.kruskal_point(e, s)).collect();
    pts.sort();
    pts
}

pub fn kruskal_polytope(eq: &DiffPoly) -> Result<LatticePolytope> {
    if eq.is_zero() {
        return Err(Error::Invalid("zero equation has no Newton polytope".into()));
    }
    polytope_from_points(kruskal_points(eq))
}

/// `r_j = m_j / m_1` for `j ≥ 2`.
pub fn substitution_exponents(m: &[Int]) -> Result<Vec<Rational>> {
    let m1 = m.first().filter(|x| !x.is_zero()).ok_or_else(|| {
        Error::Invalid("facet normal has zero first component; choose a different input variable".into())
    })?;
    Ok(m[1..].iter().map(|x| Rational::new(x.clone(), m1.clone())).collect())
}

/// A facet with at most one support point off it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistinguishedFacet {
    pub facet: usize,
    pub vertices: Vec<usize>,
    /// Normal with positive first component when that component is nonzero.
    pub normal: Vec<Int>,
    pub offset: Rational,
    /// `None` when the whole support lies on the facet.
    pub off_vertex: Option<usize>,
    /// `c = (m·off - h)/m_1`.
    pub gap: Option<Rational>,
    /// `m·off - h` for the inward normal.
    pub normal_gap: Option<Rational>,
    /// `m_j/m_1`, absent when `m_1 = 0`.
    pub exponents: Option<Vec<Rational>>,
    /// Why the facet cannot drive an expansion in the first coordinate.
    pub non_dominant: Option<String>,
}

impl DistinguishedFacet {
    pub fn is_dominant(&self) -> bool {
        self.non_dominant.is_none()
    }
}

/// Every facet leaving exactly one support point off it (or none, for a
/// support inside a hyperplane), with gap and substitution exponents.
pub fn distinguished_facets(p: &LatticePolytope) -> Vec<DistinguishedFacet> {
    let mut out = Vec::new();
    for (fi, f) in p.facets.iter().enumerate() {
        let off: Vec<usize> = (0..p.points.len()).filter(|i| !f.vertices.contains(i)).collect();
        if off.len() > 1 {
            continue;
        }
        let off_vertex = off.first().copied();
        let normal_gap = off_vertex.map(|o| dot(&f.normal, &p.points[o]) - &f.offset);
        let m1 = f.normal[0].clone();
        let mut normal = f.normal.clone();
        let mut offset = f.offset.clone();
        if m1.is_negative() {
            normal = normal.iter().map(|x| -x).collect();
            offset = -offset;
        }
        let (gap, exponents, non_dominant) = if m1.is_zero() {
            (None, None, Some("facet normal has zero first component".to_string()))
        } else {
            let r = substitution_exponents(&normal).expect("m1 nonzero");
            let gap = normal_gap.as_ref().map(|g| g / Rational::from_integer(m1.clone()));
            let bad = match &gap {
                Some(c) if !c.is_positive() => {
                    Some("off-facet term is not of higher order as the first variable tends to 0".to_string())
                }
                _ => None,
            };
            (gap, Some(r), bad)
        };
        out.push(DistinguishedFacet {
            facet: fi,
            vertices: f.vertices.clone(),
            normal,
            offset,
            off_vertex,
            gap,
            normal_gap,
            exponents,
            non_dominant,
        });
    }
    out
}
