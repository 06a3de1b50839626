//! Simple types for the first-order-pattern calculus: consistent contexts,
//! the type checker of the rule/application/set rules, typed matching and
//! type-preserving evaluation.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::eval::{NormalizeResult, ReductionConfig, StepInfo};
use crate::matching::{match_syntactic, ClashKind};
use crate::subst::Substitution;
use crate::term::{Signature, Term};

/// `A`, or `A -o B` (right-associative).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Atomic(String),
    Arrow(Box<Type>, Box<Type>),
}

impl Type {
    pub fn atomic(name: impl Into<String>) -> Type {
        Type::Atomic(name.into())
    }

    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), Box::new(cod))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Atomic(n) => write!(f, "{n}"),
            Type::Arrow(d, c) => {
                match d.as_ref() {
                    Type::Arrow(..) => write!(f, "({d})")?,
                    Type::Atomic(_) => write!(f, "{d}")?,
                }
                write!(f, " -> {c}")
            }
        }
    }
}

/// A consistent set of variable typings: no variable carries two distinct
/// types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Context {
    entries: BTreeMap<String, Type>,
}

impl Context {
    pub fn empty() -> Context {
        Context::default()
    }

    pub fn insert(&mut self, var: impl Into<String>, ty: Type) -> Result<(), TypeError> {
        let var = var.into();
        match self.entries.get(&var) {
            Some(old) if *old != ty => Err(TypeError::InconsistentContext {
                var,
                first: old.clone(),
                second: ty,
            }),
            _ => {
                self.entries.insert(var, ty);
                Ok(())
            }
        }
    }

    pub(crate) fn insert_unchecked(&mut self, var: &str, ty: Type) {
        self.entries.insert(var.to_string(), ty);
    }

    pub fn get(&self, var: &str) -> Option<&Type> {
        self.entries.get(var)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Type)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `E|_vars`: the context restricted to the given variables.
    pub fn restrict<'a, I: IntoIterator<Item = &'a str>>(&self, vars: I) -> Context {
        let mut out = Context::empty();
        for v in vars {
            if let Some(ty) = self.entries.get(v) {
                out.entries.insert(v.to_string(), ty.clone());
            }
        }
        out
    }

    /// `self . other` with a consistency check.
    pub fn merged(&self, other: &Context) -> Result<Context, TypeError> {
        let mut out = self.clone();
        for (v, ty) in other.entries() {
            out.insert(v, ty.clone())?;
        }
        Ok(out)
    }

    /// Merge where `other` shadows `self` (entering a binder's scope).
    pub fn shadowed_by(&self, other: &Context) -> Context {
        let mut out = self.clone();
        for (v, ty) in other.entries() {
            out.entries.insert(v.to_string(), ty.clone());
        }
        out
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, ty)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}:{ty}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeError {
    InconsistentContext {
        var: String,
        first: Type,
        second: Type,
    },
    UnboundVariable(String),
    NoProfile {
        symbol: String,
        args: Vec<Option<Type>>,
    },
    AmbiguousProfile {
        symbol: String,
    },
    SetElementTypeMismatch {
        expected: Type,
        found: Type,
    },
    RuleContextMismatch {
        var: String,
    },
    UntypableApplication {
        fun: Option<Type>,
        arg: Option<Type>,
    },
    /// A bare empty set (or a set of empty sets) with no expected type.
    NeedsAnnotation,
    /// Operator forms sit outside the typed fragment.
    UntypedForm,
    SubjectReductionViolation {
        before: Type,
        after: Option<Type>,
    },
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::InconsistentContext { var, first, second } => {
                write!(
                    f,
                    "inconsistent context: {var} typed both {first} and {second}"
                )
            }
            TypeError::UnboundVariable(v) => write!(f, "variable {v} has no type in the context"),
            TypeError::NoProfile { symbol, .. } => {
                write!(f, "no profile of `{symbol}` accepts the argument types")
            }
            TypeError::AmbiguousProfile { symbol } => {
                write!(f, "several profiles of `{symbol}` apply")
            }
            TypeError::SetElementTypeMismatch { expected, found } => {
                write!(f, "set elements must share one type: {expected} vs {found}")
            }
            TypeError::RuleContextMismatch { var } => {
                write!(f, "rule binder {var} lacks a type annotation")
            }
            TypeError::UntypableApplication { fun, arg } => match (fun, arg) {
                (Some(ft), Some(at)) => {
                    write!(f, "cannot apply a term of type {ft} to a term of type {at}")
                }
                _ => write!(f, "untypable application"),
            },
            TypeError::NeedsAnnotation => {
                write!(
                    f,
                    "an empty set needs an expected type; annotate the context"
                )
            }
            TypeError::UntypedForm => {
                write!(f, "operator forms are not part of the typed fragment")
            }
            TypeError::SubjectReductionViolation { before, after } => match after {
                Some(a) => write!(f, "subject reduction violated: {before} became {a}"),
                None => write!(f, "subject reduction violated: {before} became untypable"),
            },
        }
    }
}

impl std::error::Error for TypeError {}

/// Overload-resolving type checker. Profiles are closed under the arrow
/// lifting both ways, computed on demand and memoized per (symbol, shape).
type ProfileCache = HashMap<(String, Vec<Option<Type>>), Vec<Type>>;

pub struct Typer<'a> {
    sig: &'a Signature,
    cache: RefCell<ProfileCache>,
}

impl<'a> Typer<'a> {
    pub fn new(sig: &'a Signature) -> Typer<'a> {
        Typer {
            sig,
            cache: RefCell::new(HashMap::new()),
        }
    }

    /// Result types of `symbol` for the given argument types; `None` stands
    /// for an argument whose type is unconstrained (an empty set).
    fn profile_results(&self, symbol: &str, args: &[Option<Type>]) -> Vec<Type> {
        let key = (symbol.to_string(), args.to_vec());
        if let Some(hit) = self.cache.borrow().get(&key) {
            return hit.clone();
        }
        let mut results: Vec<Type> = Vec::new();
        for p in self.sig.profiles(symbol) {
            let fits = p
                .args
                .iter()
                .zip(args.iter())
                .all(|(want, got)| got.as_ref().is_none_or(|g| g == want));
            if fits && p.args.len() == args.len() && !results.contains(&p.result) {
                results.push(p.result.clone());
            }
        }
        // Arrow lifting: f over (A1 -o B1) x ... gives A -o B whenever f has
        // results over the domains and the codomains.
        type Shape = Vec<Option<Type>>;
        let split: Option<(Shape, Shape)> = args
            .iter()
            .map(|a| match a {
                None => Some((None, None)),
                Some(Type::Arrow(d, c)) => Some((Some((**d).clone()), Some((**c).clone()))),
                Some(Type::Atomic(_)) => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(|pairs| pairs.into_iter().unzip());
        if let Some((doms, cods)) = split {
            // Zero-arity lifting would recurse forever; constants only take
            // their declared profiles.
            if !args.is_empty() {
                for d in self.profile_results(symbol, &doms) {
                    for c in self.profile_results(symbol, &cods) {
                        let lifted = Type::arrow(d.clone(), c);
                        if !results.contains(&lifted) {
                            results.push(lifted);
                        }
                    }
                }
            }
        }
        self.cache.borrow_mut().insert(key, results.clone());
        results
    }

    /// Synthesizes a type; empty sets synthesize as `None` (any type).
    fn synth(&self, ctx: &Context, t: &Term) -> Result<Option<Type>, TypeError> {
        match t {
            Term::Var(x) => ctx
                .get(x)
                .cloned()
                .map(Some)
                .ok_or_else(|| TypeError::UnboundVariable(x.clone())),
            Term::Fun(f, args) => {
                let arg_tys: Vec<Option<Type>> = args
                    .iter()
                    .map(|a| self.synth(ctx, a))
                    .collect::<Result<_, _>>()?;
                let results = self.profile_results(f, &arg_tys);
                match results.len() {
                    0 => Err(TypeError::NoProfile {
                        symbol: f.clone(),
                        args: arg_tys,
                    }),
                    1 => Ok(Some(results.into_iter().next().unwrap())),
                    _ => Err(TypeError::AmbiguousProfile { symbol: f.clone() }),
                }
            }
            Term::Set(es) => {
                let mut found: Option<Type> = None;
                for e in es {
                    if let Some(ty) = self.synth(ctx, e)? {
                        match &found {
                            Some(prev) if *prev != ty => {
                                return Err(TypeError::SetElementTypeMismatch {
                                    expected: prev.clone(),
                                    found: ty,
                                })
                            }
                            _ => found = Some(ty),
                        }
                    }
                }
                Ok(found)
            }
            Term::Rule(l, r, local) => {
                let fv_l = l.free_vars();
                let local = local.clone().unwrap_or_default();
                for v in &fv_l {
                    if local.get(v).is_none() {
                        return Err(TypeError::RuleContextMismatch { var: v.clone() });
                    }
                }
                let local = local.restrict(fv_l.iter().map(String::as_str));
                let lhs_ty = self.synth(&local, l)?.ok_or(TypeError::NeedsAnnotation)?;
                let rule_ctx = local.merged(ctx)?;
                // An empty-set right side types at any B; synthesis needs
                // the annotation instead of guessing.
                let rhs_ty = self
                    .synth(&rule_ctx, r)?
                    .ok_or(TypeError::NeedsAnnotation)?;
                Ok(Some(Type::arrow(lhs_ty, rhs_ty)))
            }
            Term::App(u, v) => {
                let fun_ty = self.synth(ctx, u)?;
                match fun_ty {
                    Some(Type::Arrow(dom, cod)) => {
                        self.check(ctx, v, &dom)?;
                        Ok(Some(*cod))
                    }
                    Some(other) => Err(TypeError::UntypableApplication {
                        fun: Some(other),
                        arg: self.synth(ctx, v).ok().flatten(),
                    }),
                    None => Err(TypeError::NeedsAnnotation),
                }
            }
            _ => Err(TypeError::UntypedForm),
        }
    }

    /// Checks against an expected type; empty sets check at any type.
    pub fn check(&self, ctx: &Context, t: &Term, expected: &Type) -> Result<(), TypeError> {
        match t {
            Term::Set(es) => {
                for e in es {
                    self.check(ctx, e, expected)?;
                }
                Ok(())
            }
            _ => match self.synth(ctx, t)? {
                None => Ok(()),
                Some(ty) if ty == *expected => Ok(()),
                Some(ty) => Err(TypeError::UntypableApplication {
                    fun: Some(ty),
                    arg: Some(expected.clone()),
                }),
            },
        }
    }
}

/// Infers the type of `t` in `ctx`. A bare empty set is reported as needing
/// an annotation.
pub fn infer_type(ctx: &Context, t: &Term, sig: &Signature) -> Result<Type, TypeError> {
    Typer::new(sig)
        .synth(ctx, t)?
        .ok_or(TypeError::NeedsAnnotation)
}

/// Outcome of typed matching: syntactic matching plus the variable-clash
/// check of the typed matching rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypedMatchOutcome {
    Success(Substitution),
    Failure(TypedClash),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypedClash {
    Syntactic(ClashKind),
    /// A binding (or a trivial x << x equation) whose sides have different
    /// types in their contexts.
    TypeClash {
        var: String,
        pattern_type: Type,
        subject_type: Option<Type>,
    },
}

impl TypedMatchOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, TypedMatchOutcome::Success(_))
    }
}

/// Collects every variable/subject pair of a structurally successful match,
/// the trivial `x << x` pairs included.
fn binding_pairs<'t>(l: &Term, t: &'t Term, out: &mut Vec<(String, &'t Term)>) {
    match (l, t) {
        (Term::Var(x), _) => out.push((x.clone(), t)),
        (Term::Fun(_, largs), Term::Fun(_, targs)) => {
            for (li, ti) in largs.iter().zip(targs.iter()) {
                binding_pairs(li, ti, out);
            }
        }
        _ => unreachable!("called only after a successful syntactic match"),
    }
}

/// Typed syntactic matching (the typed matching rule set): a binding whose
/// subject type differs from the pattern variable's declared type fails.
pub fn match_typed(
    lctx: &Context,
    l: &Term,
    tctx: &Context,
    t: &Term,
    sig: &Signature,
) -> Result<TypedMatchOutcome, TypeError> {
    let outcome = match_syntactic(l, t).map_err(|_| TypeError::UntypedForm)?;
    let subst = match outcome {
        crate::matching::MatchOutcome::Failure(k) => {
            return Ok(TypedMatchOutcome::Failure(TypedClash::Syntactic(k)))
        }
        crate::matching::MatchOutcome::Success(s) => s,
    };
    let typer = Typer::new(sig);
    let mut pairs = Vec::new();
    binding_pairs(l, t, &mut pairs);
    for (x, img) in pairs {
        let want = lctx
            .get(&x)
            .cloned()
            .ok_or_else(|| TypeError::RuleContextMismatch { var: x.clone() })?;
        match typer.synth(tctx, img)? {
            None => {}
            Some(got) if got == want => {}
            Some(got) => {
                return Ok(TypedMatchOutcome::Failure(TypedClash::TypeClash {
                    var: x,
                    pattern_type: want,
                    subject_type: Some(got),
                }))
            }
        }
    }
    Ok(TypedMatchOutcome::Success(subst))
}

/// One typed evaluation step: the evaluator with Fire solving typed matching
/// problems and local rule contexts threaded down the term.
pub fn typed_step(
    ctx: &Context,
    t: &Term,
    cfg: &ReductionConfig,
    sig: &Signature,
) -> Option<(Term, StepInfo)> {
    crate::eval::step_in_env(t, cfg, Some((ctx, sig)))
}

/// Iterated typed steps with a subject-reduction assertion in debug builds.
pub fn typed_normalize(
    ctx: &Context,
    t: &Term,
    cfg: &ReductionConfig,
    sig: &Signature,
) -> Result<NormalizeResult, TypeError> {
    let ty = infer_type(ctx, t, sig)?;
    let mut current = t.clone();
    let mut steps = 0usize;
    let mut trace = cfg.trace.then(Vec::new);
    while steps < cfg.max_steps {
        match typed_step(ctx, &current, cfg, sig) {
            None => {
                return Ok(NormalizeResult::normal_form(current, steps, trace));
            }
            Some((next, info)) => {
                if cfg!(debug_assertions) {
                    match infer_type(ctx, &next, sig) {
                        Ok(ty2) if ty2 == ty => {}
                        // An empty set in result position types at any A.
                        Err(TypeError::NeedsAnnotation) => {}
                        Ok(ty2) => {
                            return Err(TypeError::SubjectReductionViolation {
                                before: ty,
                                after: Some(ty2),
                            })
                        }
                        Err(_) => {
                            return Err(TypeError::SubjectReductionViolation {
                                before: ty,
                                after: None,
                            })
                        }
                    }
                }
                if let Some(tr) = trace.as_mut() {
                    tr.push(info);
                }
                current = next;
                steps += 1;
            }
        }
    }
    Ok(NormalizeResult::step_limit(current, steps, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig_ab() -> Signature {
        let mut sig = Signature::new();
        sig.declare("a", 0).unwrap();
        sig.declare("b", 0).unwrap();
        sig.declare("f", 1).unwrap();
        sig.declare_profile(
            "a",
            crate::term::Profile {
                args: vec![],
                result: ta(),
            },
        )
        .unwrap();
        sig.declare_profile(
            "b",
            crate::term::Profile {
                args: vec![],
                result: ta(),
            },
        )
        .unwrap();
        sig.declare_profile(
            "f",
            crate::term::Profile {
                args: vec![ta()],
                result: ta(),
            },
        )
        .unwrap();
        sig
    }

    fn ta() -> Type {
        Type::atomic("A")
    }

    fn annotated_id() -> Term {
        let mut local = Context::empty();
        local.insert("x", ta()).unwrap();
        Term::rule_in(Term::var("x"), Term::var("x"), local)
    }

    #[test]
    fn var_rule() {
        let mut ctx = Context::empty();
        ctx.insert("x", ta()).unwrap();
        assert_eq!(infer_type(&ctx, &Term::var("x"), &sig_ab()).unwrap(), ta());
    }

    #[test]
    fn rule_types_as_arrow() {
        let ty = infer_type(&Context::empty(), &annotated_id(), &sig_ab()).unwrap();
        assert_eq!(ty, Type::arrow(ta(), ta()));
    }

    #[test]
    fn self_application_is_rejected() {
        let omega = Term::app(annotated_id(), annotated_id());
        assert!(infer_type(&Context::empty(), &omega, &sig_ab()).is_err());
    }

    #[test]
    fn set_elements_share_a_type() {
        let sig = sig_ab();
        let ok = Term::set(vec![Term::cst("a"), Term::cst("b")]);
        assert_eq!(infer_type(&Context::empty(), &ok, &sig).unwrap(), ta());
        let bad = Term::set(vec![Term::cst("a"), annotated_id()]);
        assert!(matches!(
            infer_type(&Context::empty(), &bad, &sig),
            Err(TypeError::SetElementTypeMismatch { .. })
        ));
    }

    #[test]
    fn bare_empty_set_needs_annotation() {
        assert_eq!(
            infer_type(&Context::empty(), &Term::empty_set(), &sig_ab()),
            Err(TypeError::NeedsAnnotation)
        );
        // In argument position the expected type is known.
        let app = Term::app(annotated_id(), Term::empty_set());
        assert_eq!(
            infer_type(&Context::empty(), &app, &sig_ab()).unwrap(),
            ta()
        );
    }

    #[test]
    fn arrow_lifted_profile_types_congruence_functions() {
        let sig = sig_ab();
        // f(a -> a) : A -> A via the lifted profile (A -o A) -o (A -o A)...
        // here f over an A -o A argument.
        let mut local = Context::empty();
        local.insert("x", ta()).unwrap();
        let rule = Term::rule_in(Term::var("x"), Term::var("x"), local);
        let t = Term::fun("f", vec![rule]);
        let ty = infer_type(&Context::empty(), &t, &sig).unwrap();
        assert_eq!(ty, Type::arrow(ta(), ta()));
    }

    #[test]
    fn typed_matching_checks_variable_types() {
        let sig = sig_ab();
        let mut lctx = Context::empty();
        lctx.insert("x", ta()).unwrap();
        // x:A << x:B fails even though the terms are identical.
        let mut tctx = Context::empty();
        tctx.insert("x", Type::atomic("B")).unwrap();
        let out = match_typed(&lctx, &Term::var("x"), &tctx, &Term::var("x"), &sig).unwrap();
        assert!(matches!(
            out,
            TypedMatchOutcome::Failure(TypedClash::TypeClash { .. })
        ));
        // Against a:A it succeeds.
        let out = match_typed(
            &lctx,
            &Term::var("x"),
            &Context::empty(),
            &Term::cst("a"),
            &sig,
        )
        .unwrap();
        assert!(out.is_success());
        // Under a function symbol: {x:A} |- f(x) against |- f(a) with a:A.
        let pat = Term::fun("f", vec![Term::var("x")]);
        let subj = Term::fun("f", vec![Term::cst("a")]);
        let out = match_typed(&lctx, &pat, &Context::empty(), &subj, &sig).unwrap();
        match out {
            TypedMatchOutcome::Success(s) => assert_eq!(s.get("x"), Some(&Term::cst("a"))),
            other => panic!("expected success, got {other:?}"),
        }
        // An arrow-typed pattern variable matches a rule of that type.
        let mut arrow_ctx = Context::empty();
        arrow_ctx.insert("x", Type::arrow(ta(), ta())).unwrap();
        let out = match_typed(
            &arrow_ctx,
            &Term::var("x"),
            &Context::empty(),
            &annotated_id(),
            &sig,
        )
        .unwrap();
        assert!(out.is_success());
        // But not a constant of a different type.
        let out = match_typed(
            &arrow_ctx,
            &Term::var("x"),
            &Context::empty(),
            &Term::cst("a"),
            &sig,
        )
        .unwrap();
        assert!(matches!(
            out,
            TypedMatchOutcome::Failure(TypedClash::TypeClash { .. })
        ));
    }

    #[test]
    fn switch_r_keeps_the_local_context() {
        // [x:A -> {a, b}](a) splits the right side without losing the
        // binder annotation, and the type is preserved throughout.
        let sig = sig_ab();
        let mut local = Context::empty();
        local.insert("x", ta()).unwrap();
        let rule = Term::rule_in(
            Term::var("x"),
            Term::set(vec![Term::cst("a"), Term::cst("b")]),
            local,
        );
        let app = Term::app(rule, Term::cst("a"));
        let cfg = ReductionConfig::default();
        let res = typed_normalize(&Context::empty(), &app, &cfg, &sig).unwrap();
        assert_eq!(res.term, Term::set(vec![Term::cst("a"), Term::cst("b")]));
    }

    #[test]
    fn typed_fire_preserves_types() {
        let sig = sig_ab();
        let cfg = ReductionConfig::default();
        let app = Term::app(annotated_id(), Term::cst("a"));
        let result = typed_normalize(&Context::empty(), &app, &cfg, &sig).unwrap();
        assert_eq!(result.term, Term::set(vec![Term::cst("a")]));
    }

    #[test]
    fn failing_typed_fire_yields_empty_set() {
        let sig = sig_ab();
        let cfg = ReductionConfig::default();
        let app = Term::app(Term::rule(Term::cst("a"), Term::cst("b")), Term::cst("b"));
        let result = typed_normalize(&Context::empty(), &app, &cfg, &sig).unwrap();
        assert_eq!(result.term, Term::empty_set());
    }
}
