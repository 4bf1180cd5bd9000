use std::collections::BTreeMap;

use npdim::diffnp::{facet_split_diff, scale_independent};
use npdim::exactmath::{integer_kernel, primitive, rat, rat_int, IntMatrix, Int, Rational};
use npdim::groebner::{binomial_in_kernel, eliminate, groebner_basis, saturate, toric_ideal, Ideal};
use npdim::npexpand::np_expand;
use npdim::poly::{exp_from_ints, Coeff, DiffPoly, MonomialOrder, Poly};
use npdim::polytope::{distinguished_facets, kruskal_points, kruskal_polytope, newton_polytope, polytope_from_points};
use npdim::run_command;
use proptest::prelude::*;

fn dot(m: &[Int], p: &[Rational]) -> Rational {
    m.iter().zip(p).map(|(a, b)| Rational::from_integer(a.clone()) * b).sum()
}

fn arb_poly(vars: &'static [&'static str], deg: i64) -> impl Strategy<Value = Poly> {
    let n = vars.len();
    proptest::collection::vec((-3i64..=3, proptest::collection::vec(0..=deg, n)), 1..4).prop_map(move |ts| {
        let refs: Vec<(i64, &[i64])> = ts.iter().map(|(c, e)| (*c, e.as_slice())).collect();
        Poly::from_int_terms(vars, &refs)
    })
}

fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = IntMatrix> {
    proptest::collection::vec(-2i64..=2, rows * cols)
        .prop_map(move |v| IntMatrix::from_rows(&v.chunks(cols).map(|c| c.to_vec()).collect::<Vec<_>>()))
}

fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// Terms `c · x^a · y^b · D^s y`.
fn arb_diff_terms() -> impl Strategy<Value = Vec<(i64, i64, i64, Option<u32>)>> {
    proptest::collection::vec(
        (1i64..=3, -2i64..=3, 0i64..=2, prop_oneof![Just(None), Just(Some(1u32)), Just(Some(2u32))]),
        1..5,
    )
}

fn build_diff(terms: &[(i64, i64, i64, Option<u32>)]) -> DiffPoly {
    let mut eq = DiffPoly::new(vec!["x".into(), "y".into()], Some("x".into()), Some("y".into())).unwrap();
    for (c, a, b, s) in terms {
        eq.add_term(exp_from_ints(&[*a, *b]), *s, Coeff::from(*c)).unwrap();
    }
    eq
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn groebner_basis_ignores_generator_order(
        gens in proptest::collection::vec(arb_poly(&["x", "y", "z"], 2), 2..4),
        rot in 0usize..3,
    ) {
        let mut permuted = gens.clone();
        permuted.reverse();
        let r = rot % permuted.len();
        permuted.rotate_left(r);
        let a = groebner_basis(&gens, MonomialOrder::GrevLex).unwrap();
        let b = groebner_basis(&permuted, MonomialOrder::GrevLex).unwrap();
        prop_assert_eq!(a.generators(), b.generators());
        prop_assert!(a.is_reduced());
    }

    #[test]
    fn toric_generators_lie_in_the_kernel(a in arb_matrix(4, 2)) {
        let ideal = toric_ideal(&a, &names(4)).unwrap();
        for b in ideal.binomials().unwrap() {
            prop_assert!(binomial_in_kernel(&a, &b));
        }
        let k = integer_kernel(&a);
        prop_assert!(a.transpose().mul(&k).is_zero());
    }

    #[test]
    fn elimination_drops_the_block(gens in proptest::collection::vec(arb_poly(&["t", "x", "y"], 2), 2..4)) {
        let ideal = Ideal::new(gens[0].vars().to_vec(), gens).unwrap();
        let out = eliminate(&ideal, &["t"]).unwrap();
        for g in out.generators() {
            let t = g.var_index("t");
            prop_assert!(g.terms().all(|(e, _)| t.is_none_or(|i| e[i] == rat_int(0))));
        }
    }

    #[test]
    fn saturation_is_idempotent(gens in proptest::collection::vec(arb_poly(&["x", "y"], 2), 1..3)) {
        let ideal = Ideal::new(gens[0].vars().to_vec(), gens).unwrap();
        let once = saturate(&ideal, &[1, 1]).unwrap();
        let twice = saturate(&once, &[1, 1]).unwrap();
        prop_assert!(once.equals(&twice).unwrap());
    }

    #[test]
    fn facet_normals_support_the_hull(pts in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 3), 4..9)) {
        let points: Vec<Vec<Rational>> = pts.iter().map(|p| p.iter().map(|x| rat_int(*x)).collect()).collect();
        let Ok(p) = polytope_from_points(points) else { return Ok(()); };
        for f in &p.facets {
            let prim = primitive(&f.normal).unwrap();
            let neg: Vec<Int> = f.normal.iter().map(|x| -x).collect();
            prop_assert!(prim == f.normal || prim == neg);
            for (i, q) in p.points.iter().enumerate() {
                let v = dot(&f.normal, q);
                if f.vertices.contains(&i) {
                    prop_assert_eq!(&v, &f.offset);
                } else {
                    prop_assert!(v > f.offset);
                }
            }
        }
        for d in distinguished_facets(&p) {
            if let (Some(off), Some(gap), true) = (d.off_vertex, d.normal_gap.clone(), d.is_dominant()) {
                prop_assert!(gap > rat_int(0));
                prop_assert_eq!(dot(&d.normal, &p.points[off]) - &d.offset, gap);
            }
        }
    }

    #[test]
    fn kruskal_points_without_derivatives_are_the_support(f in arb_poly(&["x", "y"], 3)) {
        let eq = DiffPoly::from_poly(&f);
        let support: Vec<Vec<Rational>> = f.support().into_iter().collect();
        let mut got = kruskal_points(&eq);
        got.sort();
        got.dedup();
        prop_assert_eq!(got, support);
    }

    #[test]
    fn facet_split_reassembles(terms in arb_diff_terms()) {
        let eq = build_diff(&terms);
        let Ok(p) = kruskal_polytope(&eq) else { return Ok(()); };
        for df in distinguished_facets(&p) {
            let split = facet_split_diff(&eq, &df);
            prop_assert_eq!(split.ftilde.sub(&split.gtilde).unwrap(), eq.clone());
        }
    }

    #[test]
    fn scalings_compose(terms in arb_diff_terms(), r1 in 1i64..=3, q1 in 1i64..=2, r2 in -2i64..=2) {
        prop_assume!(r2 != 0);
        let eq = build_diff(&terms);
        let (r1, r2) = (rat(r1, q1), rat_int(r2));
        let a = Coeff::param("a");
        let b = Coeff::param("b");
        let twice = scale_independent(&scale_independent(&eq, "u", &a, &r1).unwrap(), "w", &b, &r2).unwrap();
        let s = &a * &b.pow_rational(&r1).unwrap();
        let once = scale_independent(&eq, "w", &s, &(&r1 * &r2)).unwrap();
        prop_assert_eq!(twice, once);
        prop_assert_eq!(scale_independent(&eq, "x", &Coeff::one(), &rat_int(1)).unwrap(), eq);
    }

    /// `y = r t + ...` for `y - r t - c t^a y^b`: exponents stay on `1 + gap·N`.
    #[test]
    fn expansion_exponents_on_the_lattice(r in prop_oneof![-3i64..=-1, 1i64..=3], c in 1i64..=3, a in 0i64..=3, b in 0i64..=3) {
        prop_assume!(a + b >= 2);
        let f = Poly::from_int_terms(&["t", "y"], &[(1, &[0, 1]), (-r, &[1, 0]), (-c, &[a, b])]);
        let p = newton_polytope(&f).unwrap();
        let n: Vec<Int> = vec![Int::from(1), Int::from(1)];
        let Some(df) = distinguished_facets(&p).into_iter().find(|d| d.normal == n && d.is_dominant()) else {
            return Ok(());
        };
        let gap = df.gap.clone().unwrap();
        let e = np_expand(&f, &df, &rat_int(r), 4, &[]).unwrap();
        let mut prev = None;
        for (x, _) in e.series.terms() {
            let k = (x - rat_int(1)) / &gap;
            prop_assert!(k.is_integer() && k >= rat_int(0));
            prop_assert!(prev.is_none_or(|p: Rational| &p < x));
            prev = Some(x.clone());
        }
        prop_assert_eq!(e.series.lead().map(|(x, c)| (x.clone(), c.clone())), Some((rat_int(1), rat_int(r))));
    }
}

#[test]
fn reports_are_deterministic() {
    let fx = |n: &str| format!("{}/fixtures/{n}", env!("CARGO_MANIFEST_DIR"));
    let cases: Vec<Vec<String>> = vec![
        vec!["nondim".into(), fx("example1.npb")],
        vec!["--json".into(), "polytope".into(), fx("riccati_perturbed.npb"), "--diff".into()],
        vec!["expand".into(), fx("catalan.npb")],
        vec!["emit-z".into(), fx("vanderpol.npb")],
    ];
    for c in cases {
        let argv = || std::iter::once("npdim".to_string()).chain(c.iter().cloned());
        assert_eq!(run_command(argv()), run_command(argv()));
    }
}

#[test]
fn derivative_terms_carry_the_dependent_dimension() {
    use npdim::dimanal::{term_dimension, DimensionedSystem, Symbol, Term};
    use npdim::poly::ParamMono;
    let sys = DimensionedSystem {
        base_dims: vec!["L".into(), "T".into()],
        vars: vec![Symbol::new("x", Some(vec![rat_int(0), rat_int(1)])), Symbol::new("y", Some(vec![rat_int(1), rat_int(0)]))],
        consts: vec![],
        terms: vec![],
        indep: Some("x".into()),
        dep: Some("y".into()),
        small: vec![],
    };
    let dims: BTreeMap<String, Vec<Rational>> =
        sys.vars.iter().map(|v| (v.name.clone(), v.dim.clone().unwrap())).collect();
    for s in 0..=2u32 {
        let t = Term {
            scalar: rat_int(1),
            consts: ParamMono::one(),
            exps: exp_from_ints(&[s as i64, if s == 0 { 1 } else { 0 }]),
            deriv: (s > 0).then_some(s),
        };
        assert_eq!(term_dimension(&sys, &t, &dims).unwrap(), vec![rat_int(1), rat_int(0)]);
    }
}
