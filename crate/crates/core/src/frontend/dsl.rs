//! Line-oriented equation language.
//!
//! ```text
//! # comment
//! dimensions: M L T
//! var x = L
//! var y = M L^-3
//! var eps = 1
//! const a, b
//! const m = M
//! small: eps
//! eq: a*y^3 + b*x*y^2 = -c*x^2*y - d*x^4
//! group X = x*b/a
//! ```
//!
//! A term is a product of an optional rational scalar, symbol powers and at
//! most one derivative factor `D(y, x, s)`. Exponents are integers, or
//! rationals in parentheses: `x^(1/2)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::dimanal::{fmt_dim, DimVector, DimensionedSystem, Group, Symbol, Term};
use crate::error::{Error, Result};
use crate::exactmath::{Int, Rational};
use crate::poly::{rational_pow, DiffPoly, ParamMono};

/// Parsed file: the system, its explicit groups and where each name was
/// declared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSystem {
    pub text: String,
    pub system: DimensionedSystem,
    pub groups: Vec<Group>,
    pub spans: BTreeMap<String, (usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(Int),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex(line: &str, lineno: usize, offset: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = offset + i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Int(s.parse().unwrap()), col });
        } else if "+-*/^(),=:".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
        } else {
            return Err(Error::parse(lineno, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], line: usize, end_col: usize) -> Self {
        Cursor { toks, pos: 0, line, end_col }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.end_col)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col(), msg)
    }

    fn expected(&self, what: &str) -> Error {
        let found = match self.peek() {
            None => "end of line".to_string(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Int(n)) => format!("`{n}`"),
            Some(Tok::Sym(c)) => format!("`{c}`"),
        };
        self.err(format!("expected {what}, found {found}"))
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{c}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, usize)> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, col))
            }
            _ => Err(self.expected("a name")),
        }
    }

    fn int(&mut self) -> Result<Int> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.expected("an integer")),
        }
    }

    fn done(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            Err(self.expected("end of line"))
        } else {
            Ok(())
        }
    }

    /// `int`, `-int`, or `(p/q)` with optional sign inside.
    fn exponent(&mut self) -> Result<Rational> {
        if self.eat('(') {
            let neg = self.eat('-');
            let p = self.int()?;
            let q = if self.eat('/') { self.int()? } else { Int::one() };
            if q.is_zero() {
                return Err(self.err("zero denominator"));
            }
            self.expect(')')?;
            let r = Rational::new(p, q);
            return Ok(if neg { -r } else { r });
        }
        let neg = self.eat('-');
        let n = Rational::from_integer(self.int()?);
        Ok(if neg { -n } else { n })
    }
}

/// Product of a scalar, symbol powers and an optional derivative.
#[derive(Default)]
struct Product {
    scalar: Option<Rational>,
    powers: BTreeMap<String, Rational>,
    deriv: Option<(String, String, u32, usize)>,
}

impl Product {
    fn scalar(&self) -> Rational {
        self.scalar.clone().unwrap_or_else(Rational::one)
    }
}

fn parse_product(cur: &mut Cursor, allow_deriv: bool) -> Result<Product> {
    let mut prod = Product::default();
    let mut first = true;
    loop {
        let divide = if first {
            false
        } else if cur.eat('*') {
            false
        } else if cur.eat('/') {
            true
        } else {
            break;
        };
        first = false;
        parse_factor(cur, &mut prod, divide, allow_deriv)?;
    }
    Ok(prod)
}

fn mul_scalar(prod: &mut Product, q: Rational) {
    prod.scalar = Some(prod.scalar() * q);
}

fn parse_factor(cur: &mut Cursor, prod: &mut Product, divide: bool, allow_deriv: bool) -> Result<()> {
    let col = cur.col();
    let sign = if divide { -Rational::one() } else { Rational::one() };
    match cur.peek().cloned() {
        Some(Tok::Int(n)) => {
            cur.pos += 1;
            let mut q = Rational::from_integer(n);
            if cur.eat('^') {
                let e = cur.exponent()?;
                q = rational_pow(&q, &e).ok_or_else(|| Error::parse(cur.line, col, "power of the number is not rational"))?;
            }
            if divide {
                if q.is_zero() {
                    return Err(Error::parse(cur.line, col, "division by zero"));
                }
                q = q.recip();
            }
            mul_scalar(prod, q);
        }
        Some(Tok::Ident(name)) if name == "D" && cur.toks.get(cur.pos + 1).map(|t| &t.tok) == Some(&Tok::Sym('(')) => {
            cur.pos += 2;
            if !allow_deriv {
                return Err(Error::parse(cur.line, col, "derivative not allowed here"));
            }
            if divide {
                return Err(Error::parse(cur.line, col, "cannot divide by a derivative"));
            }
            let (y, _) = cur.ident()?;
            cur.expect(',')?;
            let (x, _) = cur.ident()?;
            cur.expect(',')?;
            let scol = cur.col();
            let s = cur.int()?;
            cur.expect(')')?;
            let s: u32 = s.try_into().map_err(|_| Error::parse(cur.line, scol, "derivative order out of range"))?;
            if s == 0 {
                return Err(Error::parse(cur.line, scol, "derivative order must be positive"));
            }
            if cur.peek() == Some(&Tok::Sym('^')) {
                return Err(cur.err("a derivative factor cannot be raised to a power"));
            }
            if prod.deriv.is_some() {
                return Err(Error::parse(cur.line, col, "at most one derivative factor per term"));
            }
            prod.deriv = Some((y, x, s, col));
        }
        Some(Tok::Ident(name)) => {
            cur.pos += 1;
            let e = if cur.eat('^') { cur.exponent()? } else { Rational::one() };
            *prod.powers.entry(name).or_insert_with(Rational::zero) += &sign * e;
        }
        Some(Tok::Sym('(')) => {
            cur.pos += 1;
            let inner = parse_product(cur, false)?;
            cur.expect(')')?;
            let e = if cur.eat('^') { cur.exponent()? } else { Rational::one() };
            let e = &sign * e;
            if inner.scalar.is_some() {
                let q = rational_pow(&inner.scalar(), &e)
                    .ok_or_else(|| Error::parse(cur.line, col, "power of the number is not rational"))?;
                mul_scalar(prod, q);
            }
            for (k, v) in inner.powers {
                *prod.powers.entry(k).or_insert_with(Rational::zero) += v * &e;
            }
        }
        _ => return Err(cur.expected("a number, name or `D(`")),
    }
    Ok(())
}

/// Signed products separated by `+`/`-`, up to `=` or end of line.
fn parse_sum(cur: &mut Cursor) -> Result<Vec<(usize, Product)>> {
    let mut out = Vec::new();
    let mut neg = if cur.eat('-') {
        true
    } else {
        cur.eat('+');
        false
    };
    loop {
        let col = cur.col();
        let mut p = parse_product(cur, true)?;
        if neg {
            p.scalar = Some(-p.scalar());
        }
        out.push((col, p));
        if cur.eat('+') {
            neg = false;
        } else if cur.eat('-') {
            neg = true;
        } else {
            break;
        }
    }
    Ok(out)
}

struct Decls {
    base: Vec<String>,
    vars: Vec<Symbol>,
    consts: Vec<Symbol>,
    small: Vec<String>,
    spans: BTreeMap<String, (usize, usize)>,
}

impl Decls {
    fn declare(&mut self, name: &str, line: usize, col: usize) -> Result<()> {
        if name == "D" {
            return Err(Error::parse(line, col, "`D` is reserved for derivatives"));
        }
        if let Some((l, c)) = self.spans.get(name) {
            return Err(Error::parse(line, col, format!("`{name}` is already declared at {l}:{c}")));
        }
        self.spans.insert(name.to_string(), (line, col));
        Ok(())
    }

    fn parse_dim(&self, cur: &mut Cursor) -> Result<DimVector> {
        let mut v = vec![Rational::zero(); self.base.len()];
        if let Some(Tok::Int(n)) = cur.peek() {
            if n.is_one() {
                cur.pos += 1;
                cur.done()?;
                return Ok(v);
            }
        }
        loop {
            let (name, col) = cur.ident()?;
            let i = self
                .base
                .iter()
                .position(|b| *b == name)
                .ok_or_else(|| Error::parse(cur.line, col, format!("`{name}` is not a declared base dimension")))?;
            let e = if cur.eat('^') { cur.exponent()? } else { Rational::one() };
            v[i] += e;
            if cur.peek().is_none() {
                break;
            }
        }
        Ok(v)
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// Parses a whole file.
pub fn parse_system(text: &str) -> Result<SourceSystem> {
    let mut decls = Decls { base: Vec::new(), vars: Vec::new(), consts: Vec::new(), small: Vec::new(), spans: BTreeMap::new() };
    let mut eq_line: Option<(usize, Vec<Token>)> = None;
    let mut group_lines: Vec<(usize, Vec<Token>)> = Vec::new();
    let mut small_lines: Vec<(usize, Vec<Token>)> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = strip_comment(raw);
        let toks = lex(body, line, 0)?;
        if toks.is_empty() {
            continue;
        }
        let end = body.chars().count() + 1;
        let mut cur = Cursor::new(&toks, line, end);
        let (kw, kcol) = cur.ident()?;
        match kw.as_str() {
            "dimensions" => {
                cur.expect(':')?;
                if !decls.base.is_empty() || !decls.vars.is_empty() || !decls.consts.is_empty() {
                    return Err(Error::parse(line, kcol, "`dimensions:` must come first and only once"));
                }
                while cur.peek().is_some() {
                    let (name, col) = cur.ident()?;
                    if decls.base.contains(&name) {
                        return Err(Error::parse(line, col, format!("base dimension `{name}` repeated")));
                    }
                    decls.base.push(name);
                }
            }
            "var" | "const" => {
                let mut names = Vec::new();
                loop {
                    let (name, col) = cur.ident()?;
                    decls.declare(&name, line, col)?;
                    names.push(name);
                    if !cur.eat(',') {
                        break;
                    }
                }
                let dim = if cur.eat('=') { Some(decls.parse_dim(&mut cur)?) } else { None };
                cur.done()?;
                for n in names {
                    let sym = Symbol::new(&n, dim.clone());
                    if kw == "var" {
                        decls.vars.push(sym);
                    } else {
                        decls.consts.push(sym);
                    }
                }
            }
            "small" => {
                cur.expect(':')?;
                small_lines.push((line, toks[cur.pos..].to_vec()));
            }
            "eq" => {
                cur.expect(':')?;
                if eq_line.is_some() {
                    return Err(Error::parse(line, kcol, "only one equation per file"));
                }
                eq_line = Some((line, toks[cur.pos..].to_vec()));
            }
            "group" => group_lines.push((line, toks[cur.pos..].to_vec())),
            _ => {
                return Err(Error::parse(
                    line,
                    kcol,
                    format!("expected one of `dimensions:`, `var`, `const`, `small:`, `eq:`, `group`, found `{kw}`"),
                ))
            }
        }
    }

    for (line, toks) in &small_lines {
        let mut cur = Cursor::new(toks, *line, usize::MAX);
        loop {
            let (name, col) = cur.ident()?;
            if !decls.vars.iter().any(|v| v.name == name) {
                return Err(Error::parse(*line, col, format!("`{name}` is not a declared variable")));
            }
            if !decls.small.contains(&name) {
                decls.small.push(name);
            }
            if !cur.eat(',') {
                break;
            }
        }
        cur.done()?;
    }

    let (eline, etoks) = eq_line.ok_or_else(|| Error::parse(text.lines().count().max(1), 1, "missing `eq:` line"))?;
    let mut sys = DimensionedSystem {
        base_dims: decls.base.clone(),
        vars: decls.vars.clone(),
        consts: decls.consts.clone(),
        terms: Vec::new(),
        indep: None,
        dep: None,
        small: decls.small.clone(),
    };
    let end = etoks.last().map(|t| t.col + 1).unwrap_or(1);
    let mut cur = Cursor::new(&etoks, eline, end);
    let lhs = parse_sum(&mut cur)?;
    cur.expect('=')?;
    let rhs = parse_sum(&mut cur)?;
    cur.done()?;
    let rhs = rhs.into_iter().map(|(c, mut p)| {
        p.scalar = Some(-p.scalar());
        (c, p)
    });
    for (col, p) in lhs.into_iter().chain(rhs) {
        if let Some(t) = build_term(&mut sys, p, eline, col)? {
            sys.terms.push(t);
        }
    }

    let mut groups = Vec::new();
    let mut spans = decls.spans.clone();
    for (line, toks) in &group_lines {
        let end = toks.last().map(|t| t.col + 1).unwrap_or(1);
        let mut cur = Cursor::new(toks, *line, end);
        let (name, col) = cur.ident()?;
        if groups.iter().any(|g: &Group| g.name == name) {
            return Err(Error::parse(*line, col, format!("group `{name}` is already defined")));
        }
        cur.expect('=')?;
        let pcol = cur.col();
        let p = parse_product(&mut cur, false)?;
        cur.done()?;
        if !p.scalar().is_one() {
            return Err(Error::parse(*line, pcol, "a group is a pure power product"));
        }
        for k in p.powers.keys() {
            if !decls.spans.contains_key(k) {
                return Err(Error::parse(*line, pcol, format!("undeclared symbol `{k}`")));
            }
        }
        let g = Group::from_exponents(&sys, &name, p.powers).map_err(|e| Error::parse(*line, col, e.to_string()))?;
        spans.insert(format!("group {name}"), (*line, col));
        groups.push(g);
    }
    Ok(SourceSystem { text: text.to_string(), system: sys, groups, spans })
}

fn build_term(sys: &mut DimensionedSystem, p: Product, line: usize, col: usize) -> Result<Option<Term>> {
    let scalar = p.scalar();
    if scalar.is_zero() {
        return Ok(None);
    }
    let mut exps = vec![Rational::zero(); sys.vars.len()];
    let mut consts = BTreeMap::new();
    for (name, e) in p.powers {
        if let Some(i) = sys.var_index(&name) {
            exps[i] += e;
        } else if sys.consts.iter().any(|c| c.name == name) {
            if !e.is_zero() {
                consts.insert(name, e);
            }
        } else {
            return Err(Error::parse(line, col, format!("undeclared symbol `{name}`")));
        }
    }
    let deriv = match p.deriv {
        None => None,
        Some((y, x, s, dcol)) => {
            for v in [&y, &x] {
                if sys.var_index(v).is_none() {
                    return Err(Error::parse(line, dcol, format!("`{v}` in a derivative must be a variable")));
                }
            }
            if y == x {
                return Err(Error::parse(line, dcol, "a variable cannot be differentiated by itself"));
            }
            match (&sys.dep, &sys.indep) {
                (Some(d), Some(i)) if *d != y || *i != x => {
                    return Err(Error::parse(
                        line,
                        dcol,
                        format!("all derivatives must be D({d},{i},·); found D({y},{x},·)"),
                    ))
                }
                _ => {
                    sys.dep = Some(y);
                    sys.indep = Some(x);
                }
            }
            Some(s)
        }
    };
    Ok(Some(Term { scalar, consts: ParamMono::from_map(consts), exps, deriv }))
}

fn fmt_dim_decl(base: &[String], d: &Option<DimVector>) -> String {
    match d {
        None => String::new(),
        Some(v) => format!(" = {}", fmt_dim(base, v)),
    }
}

/// Canonical text: declarations, the equation in source term order with
/// `= 0`, then groups.
pub fn print_system(src: &SourceSystem) -> String {
    print_parts(&src.system, &src.groups)
}

pub fn print_parts(sys: &DimensionedSystem, groups: &[Group]) -> String {
    let mut out = String::new();
    if !sys.base_dims.is_empty() {
        out.push_str(&format!("dimensions: {}\n", sys.base_dims.join(" ")));
    }
    for v in &sys.vars {
        out.push_str(&format!("var {}{}\n", v.name, fmt_dim_decl(&sys.base_dims, &v.dim)));
    }
    let mut plain: Vec<&str> = Vec::new();
    let flush = |plain: &mut Vec<&str>, out: &mut String| {
        if !plain.is_empty() {
            out.push_str(&format!("const {}\n", plain.join(", ")));
            plain.clear();
        }
    };
    for c in &sys.consts {
        if c.dim.is_none() {
            plain.push(&c.name);
        } else {
            flush(&mut plain, &mut out);
            out.push_str(&format!("const {}{}\n", c.name, fmt_dim_decl(&sys.base_dims, &c.dim)));
        }
    }
    flush(&mut plain, &mut out);
    if !sys.small.is_empty() {
        out.push_str(&format!("small: {}\n", sys.small.join(", ")));
    }
    out.push_str(&format!("eq: {} = 0\n", sys.render_equation()));
    for g in groups {
        out.push_str(&format!("group {g}\n"));
    }
    out
}

/// A differential form written back as a file; parameters become
/// undimensioned constants.
pub fn diffpoly_to_dsl(eq: &DiffPoly, small: &[String]) -> String {
    let mut params: Vec<String> = Vec::new();
    for (_, _, c) in eq.terms() {
        for p in c.params() {
            if !params.contains(&p) {
                params.push(p);
            }
        }
    }
    params.sort();
    let mut out = String::new();
    for v in eq.vars() {
        out.push_str(&format!("var {v}\n"));
    }
    if !params.is_empty() {
        out.push_str(&format!("const {}\n", params.join(", ")));
    }
    if !small.is_empty() {
        out.push_str(&format!("small: {}\n", small.join(", ")));
    }
    out.push_str(&format!("eq: {} = 0\n", eq.render_expanded()));
    out
}

impl SourceSystem {
    /// The equation with the small variable first and the dependent (or
    /// last declared) variable last, as the expansion routines expect.
    pub fn expansion_equation(&self) -> Result<DiffPoly> {
        let eq = self.system.equation()?;
        let names = self.system.var_names();
        let last = self.system.dep.clone().or_else(|| names.last().cloned());
        let mut order: Vec<String> = self.system.small.iter().take(1).cloned().collect();
        for n in &names {
            if !order.contains(n) && Some(n) != last.as_ref() {
                order.push(n.clone());
            }
        }
        if let Some(l) = last {
            if !order.contains(&l) {
                order.push(l);
            }
        }
        eq.with_vars(&order)
    }
}

/// `name=value` pairs separated by commas.
pub fn parse_assignments(s: &str) -> Result<BTreeMap<String, Rational>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("expected name=value, found `{part}`")))?;
        let q = crate::exactmath::parse_rational(v.trim())
            .ok_or_else(|| Error::Invalid(format!("`{}` is not a rational number", v.trim())))?;
        out.insert(k.trim().to_string(), q);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;

    const EXAMPLE1: &str = "dimensions: M L T\nvar x = M L^-3\nvar y = L\nconst a, b, c, d\neq: a*y^3 + b*x*y^2 + c*x^2*y + d*x^4 = 0\n";

    #[test]
    fn parses_example1() {
        let s = parse_system(EXAMPLE1).unwrap();
        assert_eq!(s.system.vars.len(), 2);
        assert_eq!(s.system.consts.len(), 4);
        assert_eq!(s.system.terms.len(), 4);
        assert_eq!(print_system(&s), EXAMPLE1);
    }

    #[test]
    fn derivative_and_rhs() {
        let s = parse_system("var x\nvar y\nconst R\neq: D(y,x,1) = (1 - x)*y^2 + R*x*y\n");
        // sums inside parentheses are not allowed
        assert!(matches!(s, Err(Error::Parse { .. })));
        let s = parse_system("var x\nvar y\nconst R\neq: D(y,x,1) = y^2 - x*y^2 + R*x*y\n").unwrap();
        assert_eq!(s.system.indep.as_deref(), Some("x"));
        assert_eq!(s.system.render_equation(), "D(y,x,1) - y^2 + x*y^2 - R*x*y");
    }

    #[test]
    fn errors_carry_positions() {
        match parse_system("dimensions: M L\nvar x = M L^-3\nvar x = L\neq: x = 0\n") {
            Err(Error::Parse { line, col, message }) => {
                assert_eq!((line, col), (3, 5));
                assert!(message.contains("already declared"));
            }
            other => panic!("{other:?}"),
        }
        match parse_system("var x\nvar y\neq: D(y,x,1)*D(y,x,1) = 0\n") {
            Err(Error::Parse { line: 3, message, .. }) => assert!(message.contains("at most one derivative")),
            other => panic!("{other:?}"),
        }
        match parse_system("var x\nvar y\neq: D(y,x,1)^2 = 0\n") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("power")),
            other => panic!("{other:?}"),
        }
        match parse_system("var x\neq: x + q = 0\n") {
            Err(Error::Parse { line: 2, col: 9, message }) => assert!(message.contains("undeclared")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rational_exponents_and_groups() {
        let s = parse_system(
            "dimensions: M L T\nvar x = L\nconst m = M\nconst w = T^-1\nconst hbar = M L^2 T^-1\neq: 1/2*x^(1/2)*m - x = 0\ngroup X = x*(m*w/hbar)^(1/2)\n",
        )
        .unwrap();
        assert_eq!(s.system.terms[0].scalar, rat(1, 2));
        assert_eq!(s.groups[0].to_string(), "X = x*m^(1/2)*w^(1/2)/hbar^(1/2)");
        let again = parse_system(&print_system(&s)).unwrap();
        assert_eq!(again.system, s.system);
        assert_eq!(again.groups, s.groups);
    }

    #[test]
    fn assignments() {
        let m = parse_assignments("R=2, s=1/2").unwrap();
        assert_eq!(m["s"], rat(1, 2));
        assert!(parse_assignments("R").is_err());
    }
}
