use npdim::run_command;
use serde_json::Value;

fn fx(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_command(std::iter::once("npdim").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    let (code, out, err) = run(&a);
    let text = if out.trim().is_empty() { err } else { out };
    (code, serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")))
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["nondim", &fx("riccati.npb")]).0, 0);
    assert_eq!(run(&["nondim", &fx("schrodinger_literal.npb")]).0, 3);
    assert_eq!(run(&["nondim", &fx("vanderpol_dimensional.npb")]).0, 3);
    assert_eq!(run(&["facet-ode", &fx("vanderpol.npb")]).0, 4);
    assert_eq!(run(&["expand", &fx("catalan.npb"), "--root", "2"]).0, 1);
    assert_ne!(run(&["no-such-command"]).0, 0);
}

#[test]
fn parse_error_position() {
    let dir = std::env::temp_dir().join(format!("npdim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("bad.npb");
    std::fs::write(&p, "var x\nvar y\neq: x + z = 0\n").unwrap();
    let (code, v) = json(&["polytope", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["line"], 3);
    assert_eq!(v["error"]["column"], 9);
    let (_, _, err) = run(&["polytope", p.to_str().unwrap()]);
    assert!(err.contains("3:9"), "{err}");
}

#[test]
fn inhomogeneous_report_names_terms() {
    let (code, v) = json(&["nondim", &fx("schrodinger_literal.npb")]);
    assert_eq!(code, 3);
    let terms = v["error"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 3);
    assert_eq!(terms.iter().filter(|t| t["differs"] == true).count(), 2);
}

#[test]
fn nondim_json() {
    let (code, v) = json(&["nondim", &fx("riccati.npb")]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "nondim");
    assert_eq!(v["nondimensional"], "D(Y,X,1) + X*Y^2 - R*X*Y - Y^2");
    assert_eq!(v["dimensions"]["c"]["dimension"], "T^-2");
    assert_eq!(v["dimensions"]["c"]["inferred"], true);
}

#[test]
fn given_groups_are_used() {
    let (_, out, _) = run(&["nondim", &fx("example1_groups.npb")]);
    assert!(out.contains("groups (given):"));
    assert!(out.contains("nondimensional: X^4 + R*X^2*Y + X*Y^2 + Y^3 = 0"), "{out}");
    let (_, auto, _) = run(&["nondim", "--auto", &fx("example1_groups.npb")]);
    assert!(auto.contains("groups (automatic):"));
}

#[test]
fn toric_and_kernel() {
    let (code, v) = json(&["toric", "--matrix", &fx("eq4.matrix")]);
    assert_eq!(code, 0);
    assert_eq!(v["generators"].as_array().map(Vec::len), Some(4), "{v}");
    let (_, k) = json(&["kernel", "--matrix", &fx("eq4.matrix")]);
    assert_eq!(k["columns"].as_array().unwrap().len(), 2);
}

#[test]
fn catalan_expansion() {
    let (code, v) = json(&["expand", &fx("catalan.npb"), "--order", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["expansion"]["series"], "x + x^4 + 2*x^7 + 5*x^10 + 14*x^13 + O(x^16)");
    assert_eq!(v["facet"]["gap"], "3");
}

#[test]
fn riccati_expand_diff() {
    let (code, out, err) =
        run(&["expand-diff", &fx("riccati_perturbed.npb"), "--params", "R=2,s=1", "--order", "3"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("relative corrections: 1/2 at 1/2"), "{out}");
    assert!(out.contains("lead: (-R*s + s^-1) * eps^(1/2)"), "{out}");
}

#[test]
fn vanderpol_z_golden() {
    let (code, out, err) = run(&["emit-z", &fx("vanderpol.npb")]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, std::fs::read_to_string(fx("vanderpol_z.npb")).unwrap());
}

#[test]
fn vanderpol_refusal_on_explicit_facet() {
    let (code, v) = json(&["facet-ode", &fx("vanderpol.npb"), "--facet", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["power_law"]["kind"], "refusal", "{v}");
}
