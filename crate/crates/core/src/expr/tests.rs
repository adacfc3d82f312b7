use super::*;
use crate::oracle::{bernstein_check, cm_check, log_grid};
use proptest::prelude::*;

fn cat(name: &str) -> FunctionExpr {
    FunctionExpr::catalog(name, example_params(name).unwrap()).unwrap()
}

fn pw(a: f64) -> FunctionExpr {
    FunctionExpr::monomial(a)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

/// `1 - (1+x)^{-1} = x / (1+x)`, the λ-ratio with `λ = 1`.
fn one_minus_inverse() -> FunctionExpr {
    FunctionExpr::catalog("lambda_ratio", [("lambda", 1.0)]).unwrap()
}

#[test]
fn catalog_examples() {
    let cauchy = FunctionExpr::catalog("cauchy", [("alpha", 1.0), ("beta", 1.0)]).unwrap();
    assert_eq!(cauchy.eval(0.0).unwrap(), 0.0);
    let dagum = FunctionExpr::catalog("dagum", [("rho", 0.5), ("gamma", 0.5)]).unwrap();
    assert!(close(dagum.eval(1.0).unwrap(), 0.5f64.sqrt(), 1e-14));
    let matern = FunctionExpr::catalog("matern", [("alpha", 1.0), ("nu", 0.5)]).unwrap();
    assert!(close(matern.eval(1.0).unwrap(), 1.0 - (-1.0f64).exp(), 1e-10));
}

#[test]
fn catalog_tags() {
    for name in ["matern", "cauchy", "dagum"] {
        let f = cat(name);
        assert!(f.has_tag(ClassTag::BF) && !f.has_tag(ClassTag::CBF), "{name}");
    }
    for name in TABLE1_NAMES {
        assert!(cat(name).has_tag(ClassTag::CBF), "{name}");
    }
    let pole = cat("cm_pole");
    assert_eq!(pole.tags(), ClassTags::of(&[ClassTag::CM]));
}

#[test]
fn catalog_rejects_bad_input() {
    assert!(matches!(FunctionExpr::catalog("nope", []), Err(Error::UnknownAtom(_))));
    assert!(matches!(
        FunctionExpr::catalog("dagum", [("rho", 1.0), ("gamma", 0.5)]),
        Err(Error::ParameterRange { .. })
    ));
    assert!(matches!(
        FunctionExpr::catalog("cauchy", [("alpha", 1.5), ("beta", 1.0)]),
        Err(Error::ParameterRange { .. })
    ));
    assert!(matches!(
        FunctionExpr::catalog("power", []),
        Err(Error::MissingParameter { .. })
    ));
}

#[test]
fn every_catalog_entry_has_example_params() {
    for name in CATALOG_NAMES {
        let f = cat(name);
        for x in [1e-3, 0.5, 2.0, 50.0] {
            assert!(f.eval(x).unwrap().is_finite(), "{name} at {x}");
        }
    }
}

#[test]
fn eval_examples() {
    assert_eq!(pw(0.5).eval(4.0).unwrap(), 2.0);
    assert_eq!(FunctionExpr::exp_one_minus(1.0).eval(0.0).unwrap(), 0.0);
    let lr = FunctionExpr::catalog("t1_log_ratio", [("a", 1.0)]).unwrap();
    assert!(close(lr.eval(1.0).unwrap(), 1.0 - 2f64.ln(), 1e-14));
}

#[test]
fn euler_entry_reference_values() {
    let e = cat("t1_euler");
    assert!(close(e.eval(3.0).unwrap(), 0.293_734_374_266_024_59, 1e-12));
    assert!(close(e.eval(100.0).unwrap(), 0.356_700_893_850_924_11, 1e-9));
}

#[test]
fn eval_rejects_negative_and_nan() {
    assert!(matches!(pw(0.5).eval(-1.0), Err(Error::Domain(_))));
    assert!(matches!(pw(0.5).eval(f64::NAN), Err(Error::Domain(_))));
    assert!(matches!(FunctionExpr::reciprocal().eval(0.0), Err(Error::Overflow(_))));
}

#[test]
fn compose_examples() {
    let q = compose(&pw(0.5), &pw(0.5));
    assert!(q.has_tag(ClassTag::CBF) && q.has_tag(ClassTag::BF));
    assert!(close(q.eval(16.0).unwrap(), 2.0, 1e-15));

    let c = compose(&FunctionExpr::exp_neg(1.0), &FunctionExpr::log1p());
    assert!(c.has_tag(ClassTag::CM));
    for x in [0.0, 0.5, 3.0] {
        assert!(close(c.eval(x).unwrap(), 1.0 / (1.0 + x), 1e-14));
    }

    let s = FunctionExpr::reciprocal();
    let id = compose(&s, &s);
    assert!(id.has_tag(ClassTag::CBF));
    for x in [0.25, 1.0, 7.0] {
        assert!(close(id.eval(x).unwrap(), x, 1e-15));
    }
}

#[test]
fn mixed_stieltjes_composition_is_stieltjes() {
    // σ ∘ id = σ is Stieltjes, not complete Bernstein
    let f = compose(&FunctionExpr::reciprocal(), &FunctionExpr::identity());
    assert!(f.has_tag(ClassTag::S));
    assert!(!f.has_tag(ClassTag::CBF));
}

#[test]
fn combine_examples() {
    let x = FunctionExpr::identity();
    let h = combine(&x, &x, CombineRule::PowerMean, -1.0).unwrap();
    assert!(h.has_tag(ClassTag::CBF));
    for t in [0.3, 1.0, 8.0] {
        assert!(close(h.eval(t).unwrap(), t / 2.0, 1e-14));
    }
    let g = combine(&x, &pw(0.5), CombineRule::Geometric, 0.5).unwrap();
    assert!(g.has_tag(ClassTag::CBF));
    for t in [0.3, 1.0, 8.0] {
        assert!(close(g.eval(t).unwrap(), t.powf(0.75), 1e-14));
    }
    assert!(matches!(
        combine(&x, &x, CombineRule::PowerMean, 0.0),
        Err(Error::ParameterRange { .. })
    ));
    assert!(matches!(
        combine(&x, &x, CombineRule::SplitPower, 1.5),
        Err(Error::ParameterRange { .. })
    ));
}

#[test]
fn geometric_limit_of_normalized_power_mean() {
    let f = FunctionExpr::identity();
    let g = one_minus_inverse();
    let m = combine(&f, &g, CombineRule::NormalizedPowerMean, 1e-3).unwrap();
    let limit = (f.eval(1.0).unwrap() * g.eval(1.0).unwrap()).sqrt();
    assert!((m.eval(1.0).unwrap() - limit).abs() < 1e-4);
}

#[test]
fn uchiyama_examples() {
    let x = FunctionExpr::identity();
    let u = uchiyama(&x, &pw(0.5), &x).unwrap();
    for t in [0.2, 1.0, 9.0] {
        assert!(close(u.eval(t).unwrap(), t, 1e-14));
    }
    let v = uchiyama(&pw(0.5), &x, &pw(0.5)).unwrap();
    for t in [0.2, 1.0, 9.0] {
        assert!(close(v.eval(t).unwrap(), t.sqrt(), 1e-14));
    }
    let w = uchiyama(&FunctionExpr::log1p(), &pw(0.5), &one_minus_inverse()).unwrap();
    assert!(w.has_tag(ClassTag::CBF));
    assert!(bernstein_check(&w, &log_grid(1e-2, 1e2, 40), 6, 1e-8).unwrap().passed());
    assert!(matches!(
        uchiyama(&x, &FunctionExpr::constant(0.0), &x),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn dualize_examples() {
    let one = dualize(&FunctionExpr::identity(), DualRule::XOverF).unwrap();
    assert!(one.has_tag(ClassTag::CBF));
    assert_eq!(one.eval(3.0).unwrap(), 1.0);
    assert_eq!(one.eval(0.0).unwrap(), 1.0);

    let r = dualize(&pw(0.5), DualRule::Reciprocal).unwrap();
    assert!(r.has_tag(ClassTag::S));
    assert!(close(r.eval(4.0).unwrap(), 0.5, 1e-15));

    let l = dualize(&FunctionExpr::log1p(), DualRule::FOverX).unwrap();
    assert!(l.has_tag(ClassTag::S));
    assert!(cm_check(&l, &log_grid(1e-2, 1e2, 40), 8, 1e-8).unwrap().passed());
    assert!(close(l.eval(0.0).unwrap(), 1.0, 1e-12));

    assert!(matches!(
        dualize(&FunctionExpr::constant(0.0), DualRule::XOverF),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn infer_class_examples() {
    let p = FunctionExpr::product(vec![FunctionExpr::exp_neg(1.0), FunctionExpr::exp_neg(2.0)]);
    assert!(infer_class(&p).contains(ClassTag::CM));
    let s = FunctionExpr::sum(vec![FunctionExpr::identity(), FunctionExpr::exp_one_minus(1.0)]);
    assert!(infer_class(&s).contains(ClassTag::BF));
    assert!(infer_class(&cat("sin")).is_empty());
    assert!(FunctionExpr::scale(-1.0, FunctionExpr::identity()).tags().is_empty());
}

#[test]
fn levy_examples() {
    assert_eq!(levy_eval(&LevyTriple::drift(1.0), 3.0).unwrap(), 3.0);
    let unit = LevyTriple::new(0.0, 0.0, LevyMeasure::Atoms(vec![(1.0, 1.0)])).unwrap();
    assert!(close(levy_eval(&unit, 1.0).unwrap(), 1.0 - (-1.0f64).exp(), 1e-15));
    let log = FunctionExpr::log1p().levy_triple().unwrap();
    assert!(close(levy_eval(&log, 1.0).unwrap(), 2f64.ln(), 1e-9));
}

#[test]
fn levy_data_matches_atoms() {
    let atoms = [
        FunctionExpr::exp_one_minus(2.0),
        FunctionExpr::log1p(),
        pw(0.5),
        cat("lambda_ratio"),
    ];
    for f in atoms {
        let t = f.levy_triple().unwrap();
        for x in log_grid(1e-2, 1e2, 15) {
            let (a, b) = (f.eval(x).unwrap(), levy_eval(&t, x).unwrap());
            assert!(close(a, b, 1e-6), "{f} at {x}: {a} vs {b}");
        }
    }
}

#[test]
fn levy_node_tags() {
    let log = FunctionExpr::levy(FunctionExpr::log1p().levy_triple().unwrap());
    assert!(log.has_tag(ClassTag::CBF));
    let atom = FunctionExpr::levy(LevyTriple::new(0.0, 0.0, LevyMeasure::Atoms(vec![(1.0, 1.0)])).unwrap());
    assert!(atom.has_tag(ClassTag::BF) && !atom.has_tag(ClassTag::CBF));
}

#[test]
fn sigma_g_sigma_identity() {
    let s = FunctionExpr::reciprocal();
    for name in ["log1p", "t1_euler", "t1_sqrt_exp", "power"] {
        let g = cat(name);
        let h = compose(&s, &compose(&g, &s));
        for x in [0.01, 0.7, 3.0, 90.0] {
            let direct = 1.0 / g.eval(1.0 / x).unwrap();
            assert_eq!(h.eval(x).unwrap(), direct, "{name} at {x}");
        }
        assert!(h.eval(0.0).unwrap().is_finite());
    }
}

#[test]
fn tag_soundness_on_catalog_and_rules() {
    let grid = log_grid(1e-3, 1e3, 40);
    let x = FunctionExpr::identity();
    let mut exprs: Vec<FunctionExpr> = CATALOG_NAMES.iter().map(|n| cat(n)).collect();
    exprs.extend([
        compose(&FunctionExpr::exp_neg(1.0), &FunctionExpr::log1p()),
        combine(&cat("t1_euler"), &x, CombineRule::PowerMean, 0.5).unwrap(),
        combine(&cat("t1_dagum"), &cat("log1p"), CombineRule::ArgPowerMean, -0.5).unwrap(),
        dualize(&cat("t1_sqrt_exp"), DualRule::XOverF).unwrap(),
        dualize(&cat("log1p"), DualRule::Reciprocal).unwrap(),
        uchiyama(&cat("log1p"), &pw(0.5), &cat("t1_cauchy")).unwrap(),
        schur(&cat("matern"), &cat("dagum"), 0.25, 0.5).unwrap(),
    ]);
    for f in exprs {
        if f.has_tag(ClassTag::CM) {
            let r = cm_check(&f, &grid, 8, 1e-9).unwrap();
            assert!(r.passed(), "CM tag of {f} not confirmed: {:?}", r.checks);
        }
        if f.has_tag(ClassTag::BF) {
            let r = bernstein_check(&f, &grid, 7, 1e-9).unwrap();
            assert!(r.passed(), "BF tag of {f} not confirmed: {:?}", r.checks);
        }
    }
}

#[test]
fn dsl_examples_parse() {
    let text = r#"{"op": "combine", "rule": "power_mean", "alpha": 0.5,
        "args": [{"atom": "log1p", "params": {}}, {"atom": "power", "params": {"a": 0.5}}]}"#;
    let f = from_json_str(text).unwrap();
    assert!(f.has_tag(ClassTag::CBF));
    assert!(from_json_str(r#"{"op": "frobnicate", "args": []}"#).is_err());
    assert!(from_json_str(r#"{"atom": "dagum", "params": {"rho": 2.0, "gamma": 0.5}}"#).is_err());
    let levy = r#"{"levy": {"alpha": 0.5, "beta": 0.0, "atoms": [[1.0, 2.0]]}}"#;
    let f = from_json_str(levy).unwrap();
    assert!(close(f.eval(1.0).unwrap(), 0.5 + 2.0 * (1.0 - (-1.0f64).exp()), 1e-15));
}

fn leaf() -> impl Strategy<Value = FunctionExpr> {
    prop_oneof![
        (0.1f64..=1.0).prop_map(FunctionExpr::monomial),
        Just(FunctionExpr::log1p()),
        Just(cat("t1_euler")),
        Just(cat("t1_dagum")),
        Just(cat("matern")),
        (0.5f64..3.0).prop_map(FunctionExpr::exp_one_minus),
        (0.5f64..3.0).prop_map(FunctionExpr::exp_neg),
        Just(FunctionExpr::reciprocal()),
        Just(cat("cm_pole")),
    ]
}

fn expr() -> impl Strategy<Value = FunctionExpr> {
    leaf().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..3).prop_map(FunctionExpr::sum),
            prop::collection::vec(inner.clone(), 1..3).prop_map(FunctionExpr::product),
            (0.1f64..4.0, inner.clone()).prop_map(|(c, f)| FunctionExpr::scale(c, f)),
            (inner.clone(), inner.clone()).prop_map(|(f, g)| compose(&f, &g)),
            (inner.clone(), inner.clone(), 0.1f64..1.0)
                .prop_map(|(f, g, a)| combine(&f, &g, CombineRule::PowerMean, a).unwrap()),
            (inner.clone(), inner.clone(), 0.0f64..=1.0)
                .prop_map(|(f, g, a)| combine(&f, &g, CombineRule::Geometric, a).unwrap()),
            (inner.clone(), inner.clone(), 0.0f64..0.5, 0.0f64..0.5)
                .prop_map(|(f, g, a, b)| schur(&f, &g, a, b).unwrap()),
        ]
    })
}

fn tag_set() -> impl Strategy<Value = ClassTags> {
    prop::collection::vec(prop::sample::select(ClassTag::ALL.to_vec()), 0..4).prop_map(|v| ClassTags::of(&v))
}

fn rule_op() -> impl Strategy<Value = (RuleOp, usize)> {
    prop_oneof![
        (1usize..4).prop_map(|n| (RuleOp::Sum, n)),
        (1usize..4).prop_map(|n| (RuleOp::Product, n)),
        (-1.0f64..2.0).prop_map(|c| (RuleOp::Scale(c), 1)),
        Just((RuleOp::Compose, 2)),
        (-1.0f64..1.0).prop_map(|a| (RuleOp::Combine(CombineRule::PowerMean, a), 2)),
        (0.0f64..1.0).prop_map(|a| (RuleOp::Combine(CombineRule::SplitPower, a), 2)),
        prop::sample::select(vec![DualRule::XOverF, DualRule::FOverX, DualRule::Reciprocal])
            .prop_map(|r| (RuleOp::Dualize(r), 1)),
        Just((RuleOp::Uchiyama, 3)),
        (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| (RuleOp::Schur(a, b), 2)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tag_rules_are_monotone(
        (op, n) in rule_op(),
        tags in prop::collection::vec(tag_set(), 3),
        extra in prop::sample::select(ClassTag::ALL.to_vec()),
        which in 0usize..3,
    ) {
        let children = &tags[..n];
        let base = rule_tags(op, children);
        let mut grown = children.to_vec();
        grown[which % n].insert(extra);
        let bigger = rule_tags(op, &grown);
        prop_assert!(base.is_subset(&bigger), "{:?}: {:?} -> {:?}", op, base, bigger);
    }

    #[test]
    fn tags_respect_inclusions(f in expr()) {
        let t = f.tags();
        prop_assert!(!t.contains(ClassTag::CBF) || t.contains(ClassTag::BF));
        prop_assert!(!t.contains(ClassTag::S) || t.contains(ClassTag::CM));
    }

    #[test]
    fn dsl_round_trip(f in expr()) {
        let back = from_json(&to_json(&f)).unwrap();
        prop_assert_eq!(back.tags(), f.tags());
        for x in [0.01, 0.5, 3.0] {
            match (f.eval(x), back.eval(x)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }
    }

    #[test]
    fn combinators_match_formulas(
        x in 1e-3f64..1e3,
        a in 0.05f64..1.0,
        i in 0usize..4,
        j in 0usize..4,
    ) {
        let pool = [FunctionExpr::log1p(), pw(0.5), cat("t1_euler"), cat("t1_sqrt_exp")];
        let (f, g) = (&pool[i], &pool[j]);
        let (fx, gx) = (f.eval(x).unwrap(), g.eval(x).unwrap());
        let rel = 1e-12;

        let v = combine(f, g, CombineRule::PowerMean, a).unwrap().eval(x).unwrap();
        prop_assert!(close(v, (fx.powf(a) + gx.powf(a)).powf(1.0 / a), rel));
        let v = combine(f, g, CombineRule::PowerMean, -a).unwrap().eval(x).unwrap();
        prop_assert!(close(v, (fx.powf(-a) + gx.powf(-a)).powf(-1.0 / a), rel));
        let v = combine(f, g, CombineRule::ArgPowerMean, a).unwrap().eval(x).unwrap();
        let expect = (f.eval(x.powf(a)).unwrap() + g.eval(x.powf(a)).unwrap()).powf(1.0 / a);
        prop_assert!(close(v, expect, rel));
        let v = combine(f, g, CombineRule::SplitPower, a).unwrap().eval(x).unwrap();
        let expect = f.eval(x.powf(a)).unwrap() * g.eval(x.powf(1.0 - a)).unwrap();
        prop_assert!(close(v, expect, rel));
        let v = combine(f, g, CombineRule::Geometric, a).unwrap().eval(x).unwrap();
        prop_assert!(close(v, fx.powf(a) * gx.powf(1.0 - a), rel));

        let v = uchiyama(&pool[(i + 1) % 4], f, g).unwrap().eval(x).unwrap();
        let expect = pool[(i + 1) % 4].eval(fx).unwrap() * g.eval(x / fx).unwrap();
        prop_assert!(close(v, expect, rel));
        let v = dualize(f, DualRule::XOverF).unwrap().eval(x).unwrap();
        prop_assert!(close(v, x / fx, rel));
        let v = compose(f, g).eval(x).unwrap();
        prop_assert!(close(v, f.eval(gx).unwrap(), rel));
        let v = schur(f, g, a / 2.0, a / 2.0).unwrap().eval(x).unwrap();
        let expect = f.eval(x.powf(a / 2.0)).unwrap() * g.eval(x.powf(a / 2.0)).unwrap();
        prop_assert!(close(v, expect, rel));
    }
}
