//! Exact integers, rationals and integer-matrix linear algebra.
//!
//! Everything here is exact. The Hermite normal form is the workhorse: integer
//! kernels, lattice membership and group selection in `dimanal` all go through
//! it.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Int {
    Int::from(n)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

/// Parses `p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().ok()?;
            let d: Int = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<Int>().ok().map(Rational::from_integer),
    }
}

/// `p/q` text with `q` omitted when it is 1.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.numer().to_i64()
    } else {
        None
    }
}

pub fn floor_div(a: &Int, b: &Int) -> Int {
    a.div_floor(b)
}

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = Int::from(*v);
            }
        }
        m
    }

    pub fn from_int_rows(rows: Vec<Vec<Int>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend(row);
        }
        IntMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<Int>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Int> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Int>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// col[dst] -= factor * col[src]
    fn sub_col_multiple(&mut self, dst: usize, src: usize, factor: &Int) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self[(i, src)] * factor;
            self[(i, dst)] -= v;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -&self[(i, j)];
            self[(i, j)] = v;
        }
    }

    /// Exact determinant by fraction-free elimination (Bareiss).
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a: Vec<Vec<Int>> = (0..n).map(|i| self.row(i)).collect();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let (h, _) = hermite_normal_form(self);
        (0..h.cols)
            .filter(|&j| (0..h.rows).any(|i| !h[(i, j)].is_zero()))
            .count()
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Column-style Hermite normal form.
///
/// Returns `(H, U)` with `U` unimodular and `M·U = H`. `H` is in column echelon
/// form: pivot rows strictly increase from left to right, pivots are positive,
/// entries to the left of a pivot in its row lie in `[0, pivot)`, and zero
/// columns come last.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.cols);
    let mut pivot_col = 0;
    for row in 0..h.rows {
        if pivot_col == h.cols {
            break;
        }
        // Euclid across the columns pivot_col.. until only one nonzero entry
        // remains in this row.
        loop {
            let smallest = (pivot_col..h.cols)
                .filter(|&j| !h[(row, j)].is_zero())
                .min_by(|&a, &b| h[(row, a)].abs().cmp(&h[(row, b)].abs()).then(a.cmp(&b)));
            let Some(j) = smallest else { break };
            h.swap_cols(pivot_col, j);
            u.swap_cols(pivot_col, j);
            let mut done = true;
            for k in pivot_col + 1..h.cols {
                if h[(row, k)].is_zero() {
                    continue;
                }
                let q = floor_div(&h[(row, k)], &h[(row, pivot_col)]);
                h.sub_col_multiple(k, pivot_col, &q);
                u.sub_col_multiple(k, pivot_col, &q);
                if !h[(row, k)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(row, pivot_col)].is_zero() {
            continue;
        }
        if h[(row, pivot_col)].is_negative() {
            h.negate_col(pivot_col);
            u.negate_col(pivot_col);
        }
        let pivot = h[(row, pivot_col)].clone();
        for k in 0..pivot_col {
            let q = floor_div(&h[(row, k)], &pivot);
            h.sub_col_multiple(k, pivot_col, &q);
            u.sub_col_multiple(k, pivot_col, &q);
        }
        pivot_col += 1;
    }
    (h, u)
}

/// Pivot rows of a matrix in column Hermite form, one per nonzero column.
pub fn pivot_rows(h: &IntMatrix) -> Vec<usize> {
    let mut out = Vec::new();
    for j in 0..h.cols {
        match (0..h.rows).find(|&i| !h[(i, j)].is_zero()) {
            Some(i) => out.push(i),
            None => break,
        }
    }
    out
}

/// Integer basis of `{v : Aᵀ v = 0}` as the columns of a `d × (d − rank A)`
/// matrix. Columns are primitive with their first nonzero entry positive.
pub fn integer_kernel(a: &IntMatrix) -> IntMatrix {
    let at = a.transpose();
    let (h, u) = hermite_normal_form(&at);
    let rank = pivot_rows(&h).len();
    let cols: Vec<Vec<Int>> = (rank..u.cols)
        .map(|j| primitive(&u.column(j)).expect("unimodular column is nonzero"))
        .collect();
    IntMatrix::from_columns(a.rows, &cols)
}

/// Divides out the content and makes the first nonzero entry positive.
pub fn primitive(v: &[Int]) -> Result<Vec<Int>> {
    let g = v.iter().fold(Int::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return Err(Error::Invalid("zero vector has no primitive form".into()));
    }
    let lead_negative = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if lead_negative { -g } else { g };
    Ok(v.iter().map(|x| x / &g).collect())
}

pub fn primitive_i64(v: &[i64]) -> Result<Vec<i64>> {
    let big: Vec<Int> = v.iter().map(|x| Int::from(*x)).collect();
    Ok(primitive(&big)?
        .iter()
        .map(|x| x.to_i64().expect("primitive entries shrink"))
        .collect())
}

/// Clears denominators of a rational vector and returns the primitive
/// integer vector on the same ray (sign of the input preserved).
pub fn primitive_ray(v: &[Rational]) -> Option<Vec<Int>> {
    let l = v.iter().fold(Int::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<Int> = v.iter().map(|x| (x * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(Int::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return None;
    }
    Some(ints.iter().map(|x| x / &g).collect())
}

/// Whether `v` is an integer combination of the columns of `basis`.
pub fn lattice_contains(basis: &IntMatrix, v: &[Int]) -> bool {
    lattice_coordinates(basis, v).is_some()
}

/// Integer coefficients expressing `v` in the column lattice of `basis`, if
/// they exist. Coordinates are with respect to the Hermite basis `H = B·U`
/// mapped back through `U`, so they refer to the original columns.
pub fn lattice_coordinates(basis: &IntMatrix, v: &[Int]) -> Option<Vec<Int>> {
    assert_eq!(basis.rows, v.len());
    let (h, u) = hermite_normal_form(basis);
    let pivots = pivot_rows(&h);
    let mut rest: Vec<Int> = v.to_vec();
    let mut coords = vec![Int::zero(); h.cols];
    for (j, &p) in pivots.iter().enumerate() {
        let (q, r) = rest[p].div_rem(&h[(p, j)]);
        if !r.is_zero() {
            return None;
        }
        for i in 0..h.rows {
            rest[i] -= &h[(i, j)] * &q;
        }
        coords[j] = q;
    }
    if rest.iter().any(|x| !x.is_zero()) {
        return None;
    }
    // v = H c = B (U c)
    let out = (0..u.rows)
        .map(|i| (0..u.cols).map(|j| &u[(i, j)] * &coords[j]).sum())
        .collect();
    Some(out)
}

/// Solves `A x = b` over the rationals, returning one solution if consistent.
pub fn solve_rational(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..=cols {
                    let v = &m[r][k] * &f;
                    m[i][k] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Some(x)
}
