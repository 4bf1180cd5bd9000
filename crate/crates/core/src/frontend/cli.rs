//! `npdim` command dispatch. Every command produces a text report and a JSON
//! mirror; errors map to exit codes through [`Error::exit_code`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::diffnp::{
    emit_perturbation_equation, facet_ode, np_expand_diff, powerlaw_facet_solution, FacetOde, PowerLaw, TrialLead,
};
use crate::dimanal::{
    fmt_dim, nondimensionalize, resolve_dimensions, select_groups, variable_constant_ideal, GroupKind,
};
use crate::error::{Error, Result};
use crate::exactmath::{fmt_rational, integer_kernel, parse_rational, Int, IntMatrix, Rational};
use crate::frontend::dsl::{diffpoly_to_dsl, parse_assignments, parse_system, SourceSystem};
use crate::frontend::report::{error_json, fmt_point, rat_json, Report};
use crate::groebner::toric_ideal;
use crate::npexpand::{facet_data, facet_roots, np_expand, Expansion};
use crate::poly::{Coeff, DiffPoly};
use crate::polytope::{distinguished_facets, kruskal_polytope, DistinguishedFacet, LatticePolytope};

#[derive(Parser, Debug)]
#[command(name = "npdim", version, about = "Toric dimensional analysis and Newton-Puiseux expansions")]
pub struct Cli {
    /// JSON output instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct FacetArg {
    /// Facet index as listed by `polytope`; defaults to the first dominant
    /// distinguished facet.
    #[arg(long)]
    pub facet: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dimensions, toric ideal, groups and the dimensionless equation.
    Nondim {
        file: PathBuf,
        /// Ignore groups given in the file and select them automatically.
        #[arg(long)]
        auto: bool,
    },
    /// Toric ideal of an integer matrix (one row per variable).
    Toric {
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated variable names.
        #[arg(long)]
        names: Option<String>,
    },
    /// Integer basis of the kernel of the transposed matrix.
    Kernel {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Newton (or Kruskal) polytope with its distinguished facets.
    Polytope {
        file: PathBuf,
        /// Use Kruskal points even for derivative-free equations.
        #[arg(long)]
        diff: bool,
    },
    /// Newton-Puiseux expansion of an algebraic equation.
    Expand {
        file: PathBuf,
        #[command(flatten)]
        facet: FacetArg,
        /// Root of the facet equation to expand from.
        #[arg(long)]
        root: Option<String>,
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Parameter values, e.g. `R=2,s=1/2`.
        #[arg(long)]
        params: Option<String>,
        /// Ancillary values for the middle indeterminates, comma-separated.
        #[arg(long)]
        anc: Option<String>,
    },
    /// Facet differential equation and its power-law solution.
    FacetOde {
        file: PathBuf,
        #[command(flatten)]
        facet: FacetArg,
        /// Name of the substitution constant.
        #[arg(long, default_value = "s")]
        s: String,
    },
    /// Restricted iteration for a differential equation.
    ExpandDiff {
        file: PathBuf,
        #[command(flatten)]
        facet: FacetArg,
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value = "s")]
        s: String,
    },
    /// Exact equation for the perturbation z of a trial solution.
    EmitZ {
        file: PathBuf,
        #[command(flatten)]
        facet: FacetArg,
        /// Opaque leading function name.
        #[arg(long, conflicts_with = "powerlaw")]
        y0: Option<String>,
        /// Use the facet's power-law solution as leading term.
        #[arg(long)]
        powerlaw: bool,
        /// Known relative corrections `exponent:coefficient`, comma-separated.
        #[arg(long)]
        known: Option<String>,
        #[arg(long, default_value = "z")]
        z: String,
        #[arg(long, default_value = "s")]
        s: String,
    },
}

/// Parses `argv` (program name first) and runs the command. Returns the exit
/// code and the text for standard output and standard error.
pub fn run_command<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (0, text, String::new()) } else { (code, String::new(), text) };
        }
    };
    let json = cli.json;
    match dispatch(&cli.command) {
        Ok(r) => {
            if json {
                (0, format!("{}\n", serde_json::to_string_pretty(&r.json).unwrap()), String::new())
            } else {
                (0, r.text, String::new())
            }
        }
        Err(e) => {
            let code = e.exit_code();
            if json {
                (code, format!("{}\n", serde_json::to_string_pretty(&error_json(&e)).unwrap()), String::new())
            } else {
                (code, String::new(), format!("error: {e}\n"))
            }
        }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn load(path: &PathBuf) -> Result<SourceSystem> {
    parse_system(&read(path)?)
}

pub fn dispatch(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Nondim { file, auto } => nondim(&load(file)?, *auto),
        Command::Toric { matrix, names } => toric(&read(matrix)?, names.as_deref()),
        Command::Kernel { matrix } => kernel(&read(matrix)?),
        Command::Polytope { file, diff } => polytope(&load(file)?, *diff),
        Command::Expand { file, facet, root, order, params, anc } => {
            expand(&load(file)?, facet.facet, root.as_deref(), *order, params.as_deref(), anc.as_deref())
        }
        Command::FacetOde { file, facet, s } => facet_ode_cmd(&load(file)?, facet.facet, s),
        Command::ExpandDiff { file, facet, params, order, s } => {
            expand_diff(&load(file)?, facet.facet, params.as_deref(), *order, s)
        }
        Command::EmitZ { file, facet, y0, powerlaw, known, z, s } => {
            emit_z(&load(file)?, facet.facet, y0.as_deref(), *powerlaw, known.as_deref(), z, s)
        }
    }
}

pub fn nondim(src: &SourceSystem, auto: bool) -> Result<Report> {
    let sys = &src.system;
    let resolved = resolve_dimensions(sys)?;
    let ideal = variable_constant_ideal(sys, &resolved.dims)?;
    let (groups, unseparated, how) = if auto || src.groups.is_empty() {
        let gens = ideal.binomials().ok_or_else(|| Error::Invariant("toric generator is not a binomial".into()))?;
        let sel = select_groups(&gens, sys)?;
        (sel.groups, sel.unseparated, "automatic")
    } else {
        (src.groups.clone(), Vec::new(), "given")
    };
    let mut r = Report::new("nondim");
    r.line(format!("equation: {} = 0", sys.render_equation()));
    r.line("dimensions:");
    let mut dims_json = serde_json::Map::new();
    for name in sys.var_names().iter().chain(sys.const_names().iter()) {
        let d = &resolved.dims[name];
        let inferred = resolved.inferred.contains_key(name);
        let tag = if inferred { "  (inferred)" } else { "" };
        r.line(format!("  {name} = {}{tag}", fmt_dim(&sys.base_dims, d)));
        dims_json.insert(name.clone(), json!({ "dimension": fmt_dim(&sys.base_dims, d), "inferred": inferred }));
    }
    for n in &resolved.notices {
        r.line(format!("note: {n}"));
    }
    r.line(format!("term dimension: {}", fmt_dim(&sys.base_dims, &resolved.beta)));
    r.line(format!("toric ideal: {ideal}"));
    r.line(format!("groups ({how}):"));
    for g in &groups {
        r.line(format!("  {g}"));
    }
    if !unseparated.is_empty() {
        r.line(format!("unseparated variables: {}", unseparated.join(", ")));
    }
    let gens: Vec<String> = ideal.generators().iter().map(|g| g.render(ideal.order())).collect();
    let groups_json: Vec<Value> = groups
        .iter()
        .map(|g| {
            json!({
                "name": g.name,
                "kind": match &g.kind { GroupKind::Variable(v) => format!("variable {v}"), GroupKind::Constant => "constant".into() },
                "expression": g.render(),
            })
        })
        .collect();
    let mut j = json!({
        "equation": sys.render_equation(),
        "dimensions": dims_json,
        "notices": resolved.notices,
        "term_dimension": fmt_dim(&sys.base_dims, &resolved.beta),
        "toric_ideal": gens,
        "groups": groups_json,
        "group_source": how,
        "unseparated": unseparated,
    });
    match nondimensionalize(sys, &resolved.dims, &groups) {
        Ok(nd) => {
            r.line("after root extraction:");
            for g in &nd.groups {
                r.line(format!("  {g}"));
            }
            r.line(format!("nondimensional: {} = 0", nd.equation));
            j["nondimensional"] = json!(nd.equation.to_string());
            j["final_groups"] = json!(nd.groups.iter().map(|g| g.to_string()).collect::<Vec<_>>());
            j["divided_by"] = json!(nd.divided_by.to_string());
        }
        Err(e) if unseparated.is_empty() => return Err(e),
        Err(e) => {
            r.line(format!("nondimensional: not available ({e})"));
            j["nondimensional"] = Value::Null;
        }
    }
    r.merge(j);
    Ok(r)
}

/// Integer rows, whitespace separated; `#` starts a comment.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let mut rows: Vec<Vec<Int>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let mut row = Vec::new();
        for (col, tok) in body.split_whitespace().enumerate() {
            let v: Int = tok
                .trim_matches(|c| c == '[' || c == ']' || c == ',')
                .parse()
                .map_err(|_| Error::parse(ln + 1, col + 1, format!("`{tok}` is not an integer")))?;
            row.push(v);
        }
        if row.is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(ln + 1, 1, format!("row has {} entries, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, 1, "empty matrix"));
    }
    Ok(IntMatrix::from_int_rows(rows))
}

fn matrix_names(a: &IntMatrix, names: Option<&str>) -> Result<Vec<String>> {
    match names {
        Some(s) => {
            let v: Vec<String> = s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
            if v.len() != a.rows() {
                return Err(Error::Invalid(format!("{} names for {} rows", v.len(), a.rows())));
            }
            Ok(v)
        }
        None => Ok((1..=a.rows()).map(|i| format!("x{i}")).collect()),
    }
}

pub fn toric(text: &str, names: Option<&str>) -> Result<Report> {
    let a = parse_matrix(text)?;
    let names = matrix_names(&a, names)?;
    let ideal = toric_ideal(&a, &names)?;
    let mut r = Report::new("toric");
    r.line(format!("matrix: {} x {}", a.rows(), a.cols()));
    r.line(format!("variables: {}", names.join(", ")));
    r.line("generators:");
    let gens: Vec<String> = ideal.generators().iter().map(|g| g.render(ideal.order())).collect();
    for g in &gens {
        r.line(format!("  {g}"));
    }
    r.merge(json!({ "variables": names, "generators": gens, "order": "grevlex" }));
    Ok(r)
}

pub fn kernel(text: &str) -> Result<Report> {
    let a = parse_matrix(text)?;
    let k = integer_kernel(&a);
    let mut r = Report::new("kernel");
    r.line(format!("matrix: {} x {}", a.rows(), a.cols()));
    r.line(format!("kernel basis ({} columns):", k.cols()));
    let cols: Vec<Vec<String>> = k.columns().iter().map(|c| c.iter().map(|x| x.to_string()).collect()).collect();
    for c in &cols {
        r.line(format!("  ({})", c.join(", ")));
    }
    r.merge(json!({ "columns": cols }));
    Ok(r)
}

fn build_polytope(eq: &DiffPoly, kruskal: bool) -> Result<LatticePolytope> {
    if kruskal || eq.has_derivatives() {
        kruskal_polytope(eq)
    } else {
        let p = eq.to_poly().expect("derivative-free");
        crate::polytope::newton_polytope(&p)
    }
}

fn choose_facet(p: &LatticePolytope, idx: Option<usize>) -> Result<DistinguishedFacet> {
    let ds = distinguished_facets(p);
    match idx {
        Some(i) => {
            if i >= p.facets.len() {
                return Err(Error::Invalid(format!("no facet {i}; the polytope has {}", p.facets.len())));
            }
            ds.into_iter()
                .find(|d| d.facet == i)
                .ok_or_else(|| Error::Invalid(format!("facet {i} leaves more than one point off")))
        }
        None => ds
            .into_iter()
            .find(|d| d.is_dominant())
            .ok_or_else(|| Error::Unsupported("no dominant distinguished facet".into())),
    }
}

fn facet_summary(p: &LatticePolytope, d: &DistinguishedFacet) -> String {
    let gap = d.gap.as_ref().map(fmt_rational).unwrap_or_else(|| "none".into());
    format!("facet {}: normal {}, gap {gap}", d.facet, fmt_int_vec(&d.normal))
        + &d.off_vertex.map(|o| format!(", off point {}", fmt_point(&p.points[o]))).unwrap_or_default()
}

fn fmt_int_vec(v: &[Int]) -> String {
    format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn facet_json(p: &LatticePolytope, d: &DistinguishedFacet) -> Value {
    json!({
        "index": d.facet,
        "normal": d.normal.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "offset": fmt_rational(&d.offset),
        "off_point": d.off_vertex.map(|o| fmt_point(&p.points[o])),
        "gap": d.gap.as_ref().map(fmt_rational),
        "exponents": d.exponents.as_ref().map(|e| e.iter().map(fmt_rational).collect::<Vec<_>>()),
        "dominant": d.is_dominant(),
        "reason": d.non_dominant,
    })
}

pub fn polytope(src: &SourceSystem, diff: bool) -> Result<Report> {
    let eq = src.expansion_equation()?;
    let p = build_polytope(&eq, diff)?;
    let kind = if diff || eq.has_derivatives() { "Kruskal" } else { "Newton" };
    let mut r = Report::new("polytope");
    r.line(format!("{kind} polytope in ({})", eq.vars().join(", ")));
    r.line(format!("points: {}", p.points.iter().map(|x| fmt_point(x)).collect::<Vec<_>>().join(" ")));
    r.line(format!("dimension: {}", p.affine_dim));
    r.line(format!(
        "vertices: {}",
        p.vertices.iter().map(|&i| fmt_point(&p.points[i])).collect::<Vec<_>>().join(" ")
    ));
    r.line("facets:");
    for (i, f) in p.facets.iter().enumerate() {
        let pts: Vec<String> = f.vertices.iter().map(|&v| fmt_point(&p.points[v])).collect();
        r.line(format!("  {i}: {} normal {} offset {}", pts.join(" "), fmt_int_vec(&f.normal), fmt_rational(&f.offset)));
    }
    let ds = distinguished_facets(&p);
    r.line("distinguished facets:");
    for d in &ds {
        let exps = d
            .exponents
            .as_ref()
            .map(|e| format!(", exponents ({})", e.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")))
            .unwrap_or_default();
        let status = match &d.non_dominant {
            None => "dominant".to_string(),
            Some(why) => format!("not dominant: {why}"),
        };
        r.line(format!("  {}{exps}; {status}", facet_summary(&p, d)));
    }
    r.merge(json!({
        "kind": kind,
        "variables": eq.vars(),
        "points": p.points.iter().map(|x| fmt_point(x)).collect::<Vec<_>>(),
        "dimension": p.affine_dim,
        "vertices": p.vertices.iter().map(|&i| fmt_point(&p.points[i])).collect::<Vec<_>>(),
        "facets": p.facets.iter().map(|f| json!({
            "points": f.vertices.iter().map(|&v| fmt_point(&p.points[v])).collect::<Vec<_>>(),
            "normal": f.normal.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "offset": fmt_rational(&f.offset),
        })).collect::<Vec<_>>(),
        "distinguished": ds.iter().map(|d| facet_json(&p, d)).collect::<Vec<_>>(),
    }));
    Ok(r)
}

fn parse_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| parse_rational(x).ok_or_else(|| Error::Invalid(format!("`{x}` is not a rational number"))))
        .collect()
}

fn params_of(s: Option<&str>) -> Result<BTreeMap<String, Rational>> {
    s.map(parse_assignments).transpose().map(Option::unwrap_or_default)
}

fn expansion_lines(r: &mut Report, e: &Expansion) -> Value {
    r.line(format!("series: {}", e.series));
    let corr: Vec<String> = e
        .relative_corrections()
        .iter()
        .map(|(d, z)| format!("{} at {}", fmt_rational(z), fmt_rational(d)))
        .collect();
    if !corr.is_empty() {
        r.line(format!("relative corrections: {}", corr.join(", ")));
    }
    r.line(format!("residual order: {}", e.residual));
    json!({
        "series": e.series.to_string(),
        "terms": e.series.terms().map(|(x, c)| json!([fmt_rational(x), fmt_rational(c)])).collect::<Vec<_>>(),
        "omega": e.series.omega().map(fmt_rational),
        "relative_corrections": e.relative_corrections().iter().map(|(d, z)| json!([fmt_rational(d), fmt_rational(z)])).collect::<Vec<_>>(),
        "residual_order": e.residual.bound().map(rat_json),
        "residual_exact": matches!(e.residual, crate::npexpand::ResidualOrder::Exactly(_)),
        "residual_vanishes": e.residual == crate::npexpand::ResidualOrder::Vanishes,
    })
}

pub fn expand(
    src: &SourceSystem,
    facet: Option<usize>,
    root: Option<&str>,
    order: usize,
    params: Option<&str>,
    anc: Option<&str>,
) -> Result<Report> {
    let eq = src.expansion_equation()?;
    let f = eq
        .to_poly()
        .ok_or_else(|| Error::Invalid("equation has derivatives; use expand-diff".into()))?
        .eval_params(&params_of(params)?)?;
    let p = crate::polytope::newton_polytope(&f)?;
    let df = choose_facet(&p, facet)?;
    if let Some(why) = &df.non_dominant {
        return Err(Error::Invalid(format!("facet {} is not dominant: {why}", df.facet)));
    }
    let d = f.vars().len();
    let anc: Vec<Coeff> = match anc {
        Some(s) => parse_list(s)?.into_iter().map(Coeff::from).collect(),
        None => vec![Coeff::one(); d.saturating_sub(2)],
    };
    let data = facet_data(&f, &df, &anc)?;
    let roots = facet_roots(&data.f)?;
    let root = match root {
        Some(s) => parse_rational(s).ok_or_else(|| Error::Invalid(format!("`{s}` is not a rational number")))?,
        // smallest root by default
        None => roots.roots.iter().map(|(r, _)| r).min().cloned().ok_or_else(|| {
            Error::Unsupported(format!("facet equation {} = 0 has no nonzero rational root", data.f))
        })?,
    };
    let e = np_expand(&f, &df, &root, order, &anc)?;
    let mut r = Report::new("expand");
    r.line(format!("equation: {} = 0", f));
    r.line(facet_summary(&p, &df));
    r.line(format!("facet equation: {} = 0", data.f));
    let rl: Vec<String> = roots
        .roots
        .iter()
        .map(|(x, m)| if *m > 1 { format!("{} (x{m})", fmt_rational(x)) } else { fmt_rational(x) })
        .collect();
    r.line(format!("rational roots: {}", if rl.is_empty() { "none".into() } else { rl.join(", ") }));
    if roots.residual.num_terms() > 1 {
        r.line(format!("irrational factor: {}", roots.residual));
    }
    r.line(format!("lead: {} * {}", fmt_rational(&root), crate::poly::fmt_power(&f.vars()[0], &data.lead_exponent)));
    let ej = expansion_lines(&mut r, &e);
    r.merge(json!({
        "equation": f.to_string(),
        "facet": facet_json(&p, &df),
        "facet_equation": data.f.to_string(),
        "roots": roots.roots.iter().map(|(x, m)| json!({"root": fmt_rational(x), "multiplicity": m})).collect::<Vec<_>>(),
        "root": fmt_rational(&root),
        "lead_exponent": fmt_rational(&data.lead_exponent),
        "expansion": ej,
    }));
    Ok(r)
}

fn ode_for(src: &SourceSystem, facet: Option<usize>, s: &str) -> Result<(LatticePolytope, DistinguishedFacet, FacetOde)> {
    let eq = src.expansion_equation()?;
    if eq.max_order() > 2 {
        return Err(Error::Unsupported(format!("derivative order {} exceeds 2", eq.max_order())));
    }
    let p = kruskal_polytope(&eq)?;
    if facet.is_some() {
        let df = choose_facet(&p, facet)?;
        let ode = facet_ode(&eq, &df, s)?;
        return Ok((p, df, ode));
    }
    // first dominant facet whose substitution is a genuine change of variable
    let mut last = None;
    for df in distinguished_facets(&p).into_iter().filter(|d| d.is_dominant()) {
        match facet_ode(&eq, &df, s) {
            Ok(ode) => return Ok((p, df, ode)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Unsupported("no dominant distinguished facet".into())))
}

pub fn facet_ode_cmd(src: &SourceSystem, facet: Option<usize>, s: &str) -> Result<Report> {
    let (p, df, ode) = ode_for(src, facet, s)?;
    let mut r = Report::new("facet-ode");
    r.line(facet_summary(&p, &df));
    if let Some(why) = &df.non_dominant {
        r.line(format!("note: {why}"));
    }
    for (v, name, e) in &ode.substitutions {
        r.line(format!("substitution: {v} = {name}*{}^({})", ode.equation.vars()[0], fmt_rational(e)));
    }
    r.line(format!("equation: {} = 0", ode.equation));
    r.line(format!("F: {}", ode.split.ftilde));
    r.line(format!("G: {}", ode.split.gtilde));
    r.line("facet equation: F = 0");
    let pl = powerlaw_facet_solution(&ode.split.ftilde)?;
    r.line(format!("power law: {pl}"));
    r.merge(json!({
        "facet": facet_json(&p, &df),
        "substitutions": ode.substitutions.iter().map(|(v, n, e)| json!({"variable": v, "constant": n, "exponent": fmt_rational(e)})).collect::<Vec<_>>(),
        "equation": ode.equation.to_string(),
        "ftilde": ode.split.ftilde.to_string(),
        "gtilde": ode.split.gtilde.to_string(),
        "gap": ode.split.gap.as_ref().map(fmt_rational),
        "power_law": powerlaw_json(&pl),
    }));
    Ok(r)
}

fn powerlaw_json(pl: &PowerLaw) -> Value {
    match pl {
        PowerLaw::Solution { rho, sigmas } => json!({
            "kind": "solution", "rho": fmt_rational(rho), "sigma": sigmas.iter().map(|c| c.to_string()).collect::<Vec<_>>()
        }),
        PowerLaw::Family { rhos } => json!({ "kind": "family", "rho": rhos.iter().map(fmt_rational).collect::<Vec<_>>() }),
        PowerLaw::Refusal { exponents, reason } => json!({ "kind": "refusal", "exponents": exponents, "reason": reason }),
    }
}

fn powerlaw_lead(ode: &FacetOde) -> Result<(Coeff, Rational)> {
    match powerlaw_facet_solution(&ode.split.ftilde)? {
        PowerLaw::Solution { rho, sigmas } => Ok((sigmas[0].clone(), rho)),
        PowerLaw::Family { rhos } => Err(Error::Unsupported(format!(
            "facet equation admits every amplitude at exponent {}; no unique leading term",
            rhos.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
        ))),
        PowerLaw::Refusal { exponents, reason } => Err(Error::Unsupported(format!(
            "non-power-law facet: {reason} (exponents {})",
            exponents.join(", ")
        ))),
    }
}

pub fn expand_diff(src: &SourceSystem, facet: Option<usize>, params: Option<&str>, order: usize, s: &str) -> Result<Report> {
    let (p, df, ode) = ode_for(src, facet, s)?;
    let params = params_of(params)?;
    let (sigma, rho) = powerlaw_lead(&ode)?;
    let e = np_expand_diff(&ode.equation, &sigma, &rho, order, &params)?;
    let mut r = Report::new("expand-diff");
    r.line(facet_summary(&p, &df));
    r.line(format!("equation: {} = 0", ode.equation));
    let pv: Vec<String> = params.iter().map(|(k, v)| format!("{k} = {}", fmt_rational(v))).collect();
    if !pv.is_empty() {
        r.line(format!("parameters: {}", pv.join(", ")));
    }
    r.line(format!("lead: ({sigma}) * {}", crate::poly::fmt_power(&ode.equation.vars()[0], &rho)));
    let ej = expansion_lines(&mut r, &e);
    r.merge(json!({
        "facet": facet_json(&p, &df),
        "equation": ode.equation.to_string(),
        "parameters": params.iter().map(|(k, v)| (k.clone(), json!(fmt_rational(v)))).collect::<serde_json::Map<_, _>>(),
        "sigma": sigma.to_string(),
        "rho": fmt_rational(&rho),
        "expansion": ej,
    }));
    Ok(r)
}

fn parse_known(s: &str) -> Result<Vec<(Rational, Coeff)>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|part| {
            let (e, c) = part
                .split_once(':')
                .ok_or_else(|| Error::Invalid(format!("expected exponent:coefficient, found `{part}`")))?;
            let e = parse_rational(e.trim()).ok_or_else(|| Error::Invalid(format!("`{e}` is not rational")))?;
            let c = parse_rational(c.trim()).ok_or_else(|| Error::Invalid(format!("`{c}` is not rational")))?;
            Ok((e, Coeff::from(c)))
        })
        .collect()
}

pub fn emit_z(
    src: &SourceSystem,
    facet: Option<usize>,
    y0: Option<&str>,
    powerlaw: bool,
    known: Option<&str>,
    z: &str,
    s: &str,
) -> Result<Report> {
    let eq = src.expansion_equation()?;
    let (base, lead) = if powerlaw {
        let (_, _, ode) = ode_for(src, facet, s)?;
        let (sigma, rho) = powerlaw_lead(&ode)?;
        (ode.equation, TrialLead::PowerLaw { sigma, rho })
    } else {
        let base = if eq.vars().len() > 2 { ode_for(src, facet, s)?.2.equation } else { eq };
        (base, TrialLead::Opaque(y0.unwrap_or("y0").to_string()))
    };
    let known = known.map(parse_known).transpose()?.unwrap_or_default();
    let zeq = emit_perturbation_equation(&base, &lead, &known, z)?;
    let small: Vec<String> = src.system.small.iter().filter(|v| zeq.vars().contains(v)).cloned().collect();
    let dsl = diffpoly_to_dsl(&zeq, &small);
    let mut r = Report::new("emit-z");
    r.text.push_str(&dsl);
    let lead_json = match &lead {
        TrialLead::Opaque(n) => json!({ "kind": "opaque", "name": n }),
        TrialLead::PowerLaw { sigma, rho } => json!({ "kind": "power_law", "sigma": sigma.to_string(), "rho": fmt_rational(rho) }),
    };
    r.merge(json!({
        "source": base.to_string(),
        "lead": lead_json,
        "known": known.iter().map(|(e, c)| json!([fmt_rational(e), c.to_string()])).collect::<Vec<_>>(),
        "equation": zeq.to_string(),
        "dsl": dsl,
    }));
    Ok(r)
}
