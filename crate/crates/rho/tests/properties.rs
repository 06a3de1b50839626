//! Randomized property checks for the module invariants: variable laws,
//! substitution laws, gate monotonicity, evaluation accounting, combinator
//! totality and the set-propagation counterexample.

mod common;

use common::*;
use rho::combinators::{make_recursor, make_sds, RecursorKind};
use rho::debruijn::alpha_eq;
use rho::eval::{normalize, reduction_graph, successors, NormalizeKind, ReductionConfig, RuleName};
use rho::gate::{fire_allowed, StrategyGate};
use rho::matching::{match_syntactic, MatchOutcome};
use rho::subst::{alpha_rename, apply_subst, graft, Substitution};
use rho::term::{Term, VarSet};
use rho::typing::{infer_type, Context, Type};

fn contains_rule(t: &Term) -> bool {
    t.subterms().any(|s| matches!(s, Term::Rule(..)))
}

fn contains_empty_set(t: &Term) -> bool {
    t.subterms().any(Term::is_empty_set)
}

#[test]
fn canonicalization_is_idempotent_and_order_blind() {
    let mut rng = Rng::new(11);
    for _ in 0..500 {
        let n = 1 + rng.below(4);
        let mut elems = Vec::new();
        for _ in 0..n {
            let sz = 1 + rng.below(5);
            elems.push(gen_rho_term(&mut rng, &["x", "y"], sz));
        }
        let s1 = Term::set(elems.clone());
        elems.reverse();
        let s2 = Term::set(elems);
        assert_eq!(s1, s2);
        if let Term::Set(inner) = &s1 {
            assert_eq!(Term::set(inner.clone()), s1);
        }
    }
}

#[test]
fn free_vars_of_replacement_are_bounded() {
    // On binder-free terms, FV(replace(t, p, s)) is within FV(t) + FV(s).
    let mut rng = Rng::new(12);
    for _ in 0..500 {
        let sz = 3 + rng.below(6);
        let t = gen_fo_term(&mut rng, &["x", "y"], sz);
        let ssz = 1 + rng.below(4);
        let s = gen_fo_term(&mut rng, &["z"], ssz);
        let positions = collect_positions(&t);
        let pos = positions[rng.below(positions.len())].clone();
        let replaced = t.replace_at(&pos, s.clone()).unwrap();
        let mut bound = t.free_vars();
        bound.extend(s.free_vars());
        assert!(replaced.free_vars().is_subset(&bound));
    }
}

fn collect_positions(t: &Term) -> Vec<rho::term::Position> {
    fn walk(t: &Term, prefix: &rho::term::Position, out: &mut Vec<rho::term::Position>) {
        out.push(prefix.clone());
        if let Term::Fun(_, args) = t {
            for (i, a) in args.iter().enumerate() {
                walk(a, &prefix.child(i + 1), out);
            }
        }
    }
    let mut out = Vec::new();
    walk(t, &rho::term::Position::root(), &mut out);
    out
}

#[test]
fn present_vars_within_free_vars_unless_empty_set() {
    let mut rng = Rng::new(13);
    for _ in 0..1000 {
        let sz = 2 + rng.below(8);
        let t = gen_rho_term(&mut rng, &["x", "y", "z"], sz);
        match t.present_vars() {
            VarSet::Top => assert!(contains_empty_set(&t)),
            VarSet::Names(pv) => {
                if !contains_empty_set(&t) {
                    assert!(
                        pv.is_subset(&t.free_vars()),
                        "PV not within FV for {}",
                        rho::syntax::print(&t)
                    );
                }
            }
        }
    }
}

#[test]
fn matching_outcome_is_order_independent() {
    let mut rng = Rng::new(14);
    for _ in 0..2000 {
        let nvars = rng.below(4);
        let vars: Vec<&str> = TEST_VARS[..nvars].to_vec();
        let psz = 2 + rng.below(5);
        let pattern = gen_fo_term(&mut rng, &vars, psz);
        let ssz = 2 + rng.below(6);
        let subject = gen_fo_term(&mut rng, &vars, ssz);
        let reference = match_syntactic(&pattern, &subject).unwrap();
        for _ in 0..4 {
            let randomized = randomized_order_match(&mut rng, &pattern, &subject);
            match (&reference, &randomized) {
                (MatchOutcome::Success(sigma), Some(bindings)) => {
                    for (v, t) in bindings {
                        let image = sigma
                            .get(v)
                            .cloned()
                            .unwrap_or_else(|| Term::var(v.clone()));
                        assert_eq!(&image, t);
                    }
                }
                (MatchOutcome::Failure(_), None) => {}
                other => panic!("order-dependent outcome: {other:?}"),
            }
        }
    }
}

#[test]
fn graft_equals_subst_on_rule_free_terms() {
    let mut rng = Rng::new(15);
    for _ in 0..1000 {
        let sz = 2 + rng.below(8);
        let t = gen_fo_term(&mut rng, &["x", "y", "z"], sz);
        assert!(!contains_rule(&t));
        let mut sigma = Substitution::identity();
        for v in ["x", "y"] {
            if rng.chance(70) {
                let isz = 1 + rng.below(4);
                sigma.bind(v, gen_fo_term(&mut rng, &["z"], isz));
            }
        }
        assert_eq!(graft(&sigma, &t), apply_subst(&sigma, &t));
    }
}

#[test]
fn substitution_free_variable_law() {
    // FV(sigma t) = (FV(t) - Dom) + union of FV(sigma x) over substituted
    // free occurrences.
    let mut rng = Rng::new(16);
    for _ in 0..1000 {
        let sz = 2 + rng.below(8);
        let t = gen_rho_term(&mut rng, &["x", "y", "z"], sz);
        let mut sigma = Substitution::identity();
        for v in ["x", "y"] {
            if rng.chance(60) {
                let isz = 1 + rng.below(3);
                sigma.bind(v, gen_fo_term(&mut rng, &["w"], isz));
            }
        }
        let result = apply_subst(&sigma, &t);
        let fv_t = t.free_vars();
        let mut expected: std::collections::BTreeSet<String> = fv_t
            .iter()
            .filter(|v| sigma.get(v).is_none())
            .cloned()
            .collect();
        for v in &fv_t {
            if let Some(image) = sigma.get(v) {
                expected.extend(image.free_vars());
            }
        }
        assert_eq!(
            result.free_vars(),
            expected,
            "free-variable law broken for {} under {}",
            rho::syntax::print(&t),
            sigma
        );
    }
}

#[test]
fn alpha_renaming_preserves_alpha_class_and_free_vars() {
    let mut rng = Rng::new(17);
    for _ in 0..500 {
        let sz = 2 + rng.below(8);
        let t = gen_closed_rho_term(&mut rng, sz);
        let avoid = t
            .free_vars()
            .union(&["x".to_string(), "y".to_string()].into())
            .cloned()
            .collect();
        let renamed = alpha_rename(&t, &avoid);
        assert_eq!(renamed.free_vars(), t.free_vars());
        assert!(
            alpha_eq(&renamed, &t),
            "alpha class changed for {}",
            rho::syntax::print(&t)
        );
    }
}

#[test]
fn gate_monotonicity_on_random_triples() {
    // FirstOrder implies ConfStrat implies ConfStratLin as permission sets.
    let mut rng = Rng::new(18);
    for _ in 0..2000 {
        let nvars = rng.below(3);
        let vars: Vec<&str> = TEST_VARS[..nvars].to_vec();
        let lsz = 1 + rng.below(4);
        let l = gen_fo_term(&mut rng, &vars, lsz);
        let rsz = 1 + rng.below(5);
        let r = gen_rho_term(&mut rng, &vars, rsz);
        let tsz = 1 + rng.below(6);
        let t = gen_rho_term(&mut rng, &vars, tsz);
        if fire_allowed(StrategyGate::FirstOrder, &l, &r, &t) {
            assert!(fire_allowed(StrategyGate::ConfStrat, &l, &r, &t));
        }
        if fire_allowed(StrategyGate::ConfStrat, &l, &r, &t) {
            assert!(
                fire_allowed(StrategyGate::ConfStratLin, &l, &r, &t),
                "ConfStrat allowed but ConfStratLin refused: {} -> {} on {}",
                rho::syntax::print(&l),
                rho::syntax::print(&r),
                rho::syntax::print(&t)
            );
        }
    }
}

#[test]
fn set_count_tracks_fire_and_congruence_steps() {
    // On derivations that never hit a failure and never merge sets, the
    // growth in set nodes equals the number of Fire and Congruence steps,
    // with Flat steps discounted.
    let samples = vec![
        Term::app(
            Term::rule(Term::var("x"), Term::fun("f", vec![Term::var("x")])),
            Term::app(Term::rule(Term::var("y"), Term::var("y")), Term::cst("a")),
        ),
        Term::app(
            Term::fun(
                "f",
                vec![
                    Term::rule(Term::cst("a"), Term::cst("b")),
                    Term::rule(Term::cst("a"), Term::cst("c")),
                ],
            ),
            Term::fun("f", vec![Term::cst("a"), Term::cst("a")]),
        ),
        Term::app(Term::rule(Term::cst("a"), Term::cst("b")), Term::cst("a")),
    ];
    let cfg = ReductionConfig {
        trace: true,
        ..ReductionConfig::default()
    };
    for t in samples {
        let res = normalize(&t, &cfg);
        assert!(res.is_normal_form());
        let trace = res.trace.unwrap();
        let mut fired = 0usize;
        let mut flattened = 0usize;
        for info in &trace {
            match info.rule_name {
                RuleName::Fire | RuleName::Congruence => fired += 1,
                RuleName::Flat => flattened += 1,
                _ => {}
            }
        }
        let count_sets = |t: &Term| t.subterms().filter(|s| matches!(s, Term::Set(_))).count();
        let gained = count_sets(&res.term) as isize - count_sets(&t) as isize;
        // Each Flat merges two set nodes into one.
        assert_eq!(
            gained + flattened as isize,
            fired as isize,
            "set accounting failed for {}",
            rho::syntax::print(&t)
        );
    }
}

#[test]
fn failure_strictness_under_the_gate() {
    // A ground first-order term applied to a failing rule collapses to the
    // empty set whenever the failure sits outside a set.
    let mut rng = Rng::new(19);
    let cfg = ReductionConfig::default();
    for _ in 0..300 {
        let sz = 1 + rng.below(4);
        let inner = gen_ground_term(&mut rng, sz);
        // Build g(..., [a -> b](c), ...): the failure must absorb the term.
        let failing = Term::app(Term::rule(Term::cst("a"), Term::cst("b")), Term::cst("c"));
        let t = Term::fun("f", vec![inner, failing]);
        let res = normalize(&t, &cfg);
        assert!(res.is_normal_form());
        assert_eq!(res.term, Term::empty_set());
    }
}

#[test]
fn normalize_agrees_with_graph_normal_forms() {
    let mut rng = Rng::new(20);
    let cfg = ReductionConfig::default();
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < 300 {
        attempts += 1;
        assert!(attempts < 3000);
        let vars: Vec<&str> = TEST_VARS[..rng.below(2)].to_vec();
        let sz = 2 + rng.below(8);
        let t = gen_rho_term(&mut rng, &vars, sz);
        let res = normalize(&t, &cfg);
        if res.kind != NormalizeKind::NormalForm {
            continue;
        }
        let g = reduction_graph(&t, cfg.gate, 2000, 10);
        if g.truncated {
            continue;
        }
        assert!(
            g.normal_forms().iter().any(|nf| **nf == res.term),
            "normalize result missing from the graph for {}",
            rho::syntax::print(&t)
        );
        checked += 1;
    }
}

#[test]
fn repeat_star_never_fails_on_ground_subjects() {
    let mut rng = Rng::new(21);
    let cfg = ReductionConfig {
        max_steps: 100_000,
        ..ReductionConfig::default()
    };
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < 100 {
        attempts += 1;
        assert!(attempts < 1000);
        let rules = gen_trs(&mut rng);
        let ssz = 1 + rng.below(4);
        let subject = gen_ground_term(&mut rng, ssz);
        let Some(closure) = trs_closure(&subject, &rules, 200) else {
            continue;
        };
        if !closure.is_acyclic() {
            continue;
        }
        let rule_set = Term::set(
            rules
                .iter()
                .map(|r| Term::rule(r.lhs.clone(), r.rhs.clone()))
                .collect(),
        );
        let t = Term::app(
            make_recursor(RecursorKind::RepeatStar, rule_set),
            subject.clone(),
        );
        let res = normalize(&t, &cfg);
        if res.kind != NormalizeKind::NormalForm {
            continue;
        }
        assert_ne!(
            res.term,
            Term::empty_set(),
            "repeat* failed on ground subject {}",
            rho::syntax::print(&subject)
        );
        checked += 1;
    }
}

#[test]
fn sds_propagates_sets_where_sd_does_not() {
    // The unguarded spread-down generator distributes a two-element rule
    // set before the fixed point is taken: its ungated graph diverges into
    // several normal forms, which is what the guard prevents.
    let rules = Term::set(vec![
        Term::rule(Term::cst("a"), Term::cst("b")),
        Term::rule(Term::var("x"), Term::var("x")),
    ]);
    let sds = make_sds(rules.clone());
    // The generator itself (before applying theta) splits under the
    // ungated set rules.
    let Term::App(_, generator) = &sds else {
        panic!("sds is an application")
    };
    let g = reduction_graph(generator, StrategyGate::None, 400, 6);
    let splits = g
        .nodes
        .iter()
        .any(|n| matches!(n, Term::Set(es) if es.len() > 1));
    assert!(
        splits,
        "the unguarded generator should split into a rule set"
    );
    // The guarded generator stays a single rule under the same exploration.
    let sd = make_recursor(RecursorKind::Sd, rules);
    let Term::App(_, guarded) = &sd else {
        panic!("sd is an application")
    };
    let g2 = reduction_graph(guarded, StrategyGate::None, 400, 6);
    let splits2 = g2
        .nodes
        .iter()
        .any(|n| matches!(n, Term::Set(es) if es.len() > 1));
    assert!(!splits2, "the guarded generator must not split");
}

#[test]
fn lambda_translations_invert() {
    // delta after phi is the identity on lambda-terms; phi after delta
    // erases singleton set braces.
    let mut rng = Rng::new(23);
    for _ in 0..500 {
        let sz = 2 + rng.below(10);
        let lam = gen_lambda(&mut rng, &[], sz);
        let image = rho::encodings::lambda_to_rho(&lam);
        let back =
            rho::encodings::rho_to_lambda(&image).expect("images stay in the lambda fragment");
        assert_eq!(back, lam);
        // Insert singleton braces at a few positions; phi of delta strips
        // them back off.
        let mut braced = image.clone();
        for _ in 0..3 {
            braced = Term::set(vec![braced]);
        }
        let stripped = rho::encodings::rho_to_lambda(&braced).unwrap();
        assert_eq!(rho::encodings::lambda_to_rho(&stripped), image);
    }
}

#[test]
fn context_consistency_is_alpha_invariant() {
    let sig = typed_signature();
    let mut local = Context::empty();
    local.insert("x", Type::atomic("A")).unwrap();
    let rule = Term::rule_in(
        Term::fun("f", vec![Term::var("x"), Term::var("x")]),
        Term::var("x"),
        local,
    );
    let ty = infer_type(&Context::empty(), &rule, &sig).unwrap();
    let avoid = ["x".to_string()].into();
    let renamed = alpha_rename(&rule, &avoid);
    assert_ne!(renamed, rule, "renaming must act");
    let ty2 = infer_type(&Context::empty(), &renamed, &sig).unwrap();
    assert_eq!(ty, ty2);
}

#[test]
fn trace_lines_have_the_pinned_format() {
    let t = Term::fun(
        "g",
        vec![Term::app(
            Term::rule(Term::cst("a"), Term::cst("b")),
            Term::cst("a"),
        )],
    );
    let cfg = ReductionConfig {
        trace: true,
        ..ReductionConfig::default()
    };
    let res = normalize(&t, &cfg);
    let trace = res.trace.unwrap();
    assert_eq!(
        trace[0].trace_line(1),
        "step 1: Fire @ 1 : g([a -> b](a)) ==> g({b})"
    );
    assert_eq!(
        trace[1].trace_line(2),
        "step 2: OpOnSet @ eps : g({b}) ==> {g(b)}"
    );
}

#[test]
fn parser_never_panics_on_garbage() {
    let mut rng = Rng::new(24);
    let alphabet: Vec<char> = "abxy fg(){}[]<>,;:/*->#123%'_".chars().collect();
    let sig = test_signature();
    for _ in 0..2000 {
        let len = rng.below(40);
        let src: String = (0..len).map(|_| *rng.pick(&alphabet)).collect();
        // Any outcome is fine as long as it is a Result, not a panic.
        let _ = rho::syntax::parse_term(&src, &sig, rho::syntax::ParseOptions::default());
    }
}

#[test]
fn graph_successor_positions_are_valid() {
    let mut rng = Rng::new(22);
    let cfg = ReductionConfig::default();
    for _ in 0..200 {
        let sz = 2 + rng.below(8);
        let t = gen_rho_term(&mut rng, &["x"], sz);
        for (_, pos, succ) in successors(&t, &cfg) {
            assert!(t.subterm_at(&pos).is_ok());
            assert_ne!(succ, t);
        }
    }
}
