//! Decidable structural predicates over (pattern, subject) pairs and the
//! Fire-gating strategies built from them. A gate decides, at each Fire
//! attempt, whether reducing `[l -> r](t)` now can break confluence later.

use std::collections::BTreeSet;

use crate::matching::{match_syntactic, MalformedPattern, MatchOutcome};
use crate::term::Term;

/// Which condition set gates the Fire rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrategyGate {
    /// No restriction.
    None,
    /// Fire only on ground first-order subjects.
    Strict,
    /// Prefilterable pattern and safe subject.
    #[default]
    ConfStrat,
    /// Quasi-regular rules may fire on failing subjects, strictly
    /// right-linear rules on multi-element-set subjects.
    ConfStratLin,
    /// ConfStratLin plus stability of the rules inside the right-hand side.
    ConfStratStable,
    /// First-order rule sides and ground first-order subject.
    FirstOrder,
}

impl StrategyGate {
    pub fn parse(s: &str) -> Option<StrategyGate> {
        Some(match s {
            "none" => StrategyGate::None,
            "strict" => StrategyGate::Strict,
            "confstrat" => StrategyGate::ConfStrat,
            "confstratlin" => StrategyGate::ConfStratLin,
            "confstratstable" => StrategyGate::ConfStratStable,
            "firstorder" => StrategyGate::FirstOrder,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyGate::None => "none",
            StrategyGate::Strict => "strict",
            StrategyGate::ConfStrat => "confstrat",
            StrategyGate::ConfStratLin => "confstratlin",
            StrategyGate::ConfStratStable => "confstratstable",
            StrategyGate::FirstOrder => "firstorder",
        }
    }
}

/// Weak subsumption: every functional position of `l` that is also a position of `t`
/// is a functional position of `t`.
pub fn weakly_subsumes(l: &Term, t: &Term) -> bool {
    if matches!(l, Term::Fun(..)) && !matches!(t, Term::Fun(..)) {
        return false;
    }
    let n = child_count(l);
    for i in 0..n {
        if let (Some(lc), Some(tc)) = (child_at(l, i), child_at(t, i)) {
            if !weakly_subsumes(lc, tc) {
                return false;
            }
        }
    }
    true
}

fn child_count(t: &Term) -> usize {
    match t {
        Term::Var(_) => 0,
        Term::Fun(_, args)
        | Term::Set(args)
        | Term::First(args)
        | Term::Choice(args)
        | Term::Dc(args)
        | Term::UChoice(args) => args.len(),
        Term::Rule(..) | Term::App(..) => 2,
        Term::Phi(_) | Term::Psi(_) => 1,
    }
}

fn child_at(t: &Term, i: usize) -> Option<&Term> {
    match t {
        Term::Var(_) => None,
        Term::Fun(_, args)
        | Term::Set(args)
        | Term::First(args)
        | Term::Choice(args)
        | Term::Dc(args)
        | Term::UChoice(args) => args.get(i),
        Term::Rule(l, r, _) => [l.as_ref(), r.as_ref()].into_iter().nth(i),
        Term::App(f, a) => [f.as_ref(), a.as_ref()].into_iter().nth(i),
        Term::Phi(a) | Term::Psi(a) => (i == 0).then_some(a.as_ref()),
    }
}

/// Prefilterability: the subject is ground first-order, or the pattern is linear and
/// weakly subsumes it.
pub fn is_prefilterable(l: &Term, t: &Term) -> Result<bool, MalformedPattern> {
    if !l.is_first_order() {
        return Err(MalformedPattern(l.clone()));
    }
    Ok(t.is_ground_first_order() || (l.is_linear() && weakly_subsumes(l, t)))
}

/// The literal safety predicate: no set of size other than one anywhere, every
/// application function is an abstraction, and every rule application's
/// pattern subsumes its argument.
pub fn is_safe(t: &Term) -> bool {
    t.subterms().all(|s| match s {
        Term::Set(es) => es.len() == 1,
        Term::App(f, a) => match f.as_ref() {
            Term::Rule(l, _, _) => {
                matches!(match_syntactic(l, a), Ok(out) if out.is_success())
            }
            _ => false,
        },
        _ => true,
    })
}

/// Calculability: a prefilterable pair with a safe subject.
pub fn is_calculable(l: &Term, t: &Term) -> Result<bool, MalformedPattern> {
    Ok(is_prefilterable(l, t)? && is_safe(t))
}

/// Quasi-regularity: the free variables of the left side are all present in the
/// right side, recursively for the rules of the right side.
pub fn is_quasi_regular(lhs: &Term, rhs: &Term) -> bool {
    rhs.present_vars().contains_all(&lhs.free_vars()) && rules_quasi_regular(rhs)
}

fn rules_quasi_regular(t: &Term) -> bool {
    match t {
        Term::Rule(l, r, _) => is_quasi_regular(l, r),
        _ => (0..child_count(t)).all(|i| rules_quasi_regular(child_at(t, i).unwrap())),
    }
}

/// Counts free occurrences of `var` in `t` (rule left sides bind).
fn free_occurrences(t: &Term, var: &str) -> usize {
    match t {
        Term::Var(x) => usize::from(x == var),
        Term::Rule(l, r, _) => {
            if l.free_vars().contains(var) {
                0
            } else {
                free_occurrences(r, var)
            }
        }
        _ => (0..child_count(t))
            .map(|i| free_occurrences(child_at(t, i).unwrap(), var))
            .sum(),
    }
}

/// Strict right-linearity: every non-set subterm of the right side is linear with respect
/// to the left side's free variables; nested rules recursively so.
pub fn is_strictly_right_linear(lhs: &Term, rhs: &Term) -> bool {
    let lvars = lhs.free_vars();
    srl_walk(rhs, &lvars)
}

fn srl_walk(s: &Term, lvars: &BTreeSet<String>) -> bool {
    if !matches!(s, Term::Set(_)) && lvars.iter().any(|v| free_occurrences(s, v) > 1) {
        return false;
    }
    if let Term::Rule(l, r, _) = s {
        if !is_strictly_right_linear(l, r) {
            return false;
        }
    }
    (0..child_count(s)).all(|i| srl_walk(child_at(s, i).unwrap(), lvars))
}

/// Stability: `FV(r) ∩ FV(l) = FV(r) ∩ PV(l)`, recursively for the rules of
/// the right side.
pub fn is_stable(lhs: &Term, rhs: &Term) -> bool {
    let fv_r = rhs.free_vars();
    let fv_l = lhs.free_vars();
    let pv_l = lhs.present_vars();
    let lhs_side: BTreeSet<&String> = fv_r.iter().filter(|v| fv_l.contains(*v)).collect();
    let pv_side: BTreeSet<&String> = fv_r.iter().filter(|v| pv_l.contains(v.as_str())).collect();
    if lhs_side != pv_side {
        return false;
    }
    rules_stable(rhs)
}

pub(crate) fn rules_stable(t: &Term) -> bool {
    match t {
        Term::Rule(l, r, _) => is_stable(l, r),
        _ => (0..child_count(t)).all(|i| rules_stable(child_at(t, i).unwrap())),
    }
}

/// Structural subject analysis shared by the gate implementations. This is
/// the decidable over-approximation of "the subject cannot reduce to an
/// empty or multi-element set":
///
/// - set conditions do not look inside the operator forms (first, dc, the
///   pending choices, the traversals): no evaluation rule propagates a set
///   out of their argument slots;
/// - a rule-headed application must subsume its argument;
/// - a Fun-headed application function can clash and is rejected;
/// - a variable-headed application is stuck if the variable is free in the
///   subject; if it is bound by the rule of an enclosing application within
///   the subject, the variable's actual match image is checked instead;
/// - an application-headed function is checked by bounded unfolding of the
///   value it reduces to.
#[derive(Debug, Clone, Copy)]
struct SubjectShape {
    no_empty_set: bool,
    no_multi_set: bool,
    apps_ok: bool,
}

/// How many nested unfoldings the head-value analysis may perform.
const VALUE_DEPTH: usize = 16;

/// The value a function position reduces to, as far as the bounded
/// analysis can tell.
enum HeadValue {
    Known(Term),
    /// A permanently stuck spine (free variable at the bottom).
    Stuck,
    Unknown,
}

/// Bindings of activatable variables: variables bound by the rule of a live
/// application within the subject, mapped to their match images.
type ActiveEnv = std::collections::BTreeMap<String, Term>;

fn head_value(u: &Term, env: &ActiveEnv, depth: usize) -> HeadValue {
    if depth == 0 {
        return HeadValue::Unknown;
    }
    match u {
        Term::Rule(..) => HeadValue::Known(u.clone()),
        Term::Var(x) => match env.get(x) {
            None => HeadValue::Stuck,
            Some(image) => head_value(image, &ActiveEnv::new(), depth - 1),
        },
        Term::Set(es) if es.len() == 1 => head_value(&es[0], env, depth - 1),
        Term::App(f, a) => match head_value(f, env, depth - 1) {
            HeadValue::Known(Term::Rule(l, r, _)) => match match_syntactic(&l, a) {
                Ok(MatchOutcome::Success(sigma)) => head_value(
                    &crate::subst::apply_subst(&sigma, &r),
                    &ActiveEnv::new(),
                    depth - 1,
                ),
                _ => HeadValue::Unknown,
            },
            HeadValue::Stuck => HeadValue::Stuck,
            _ => HeadValue::Unknown,
        },
        _ => HeadValue::Unknown,
    }
}

/// Can `u`, used as the function of an application to `v`, be trusted not
/// to produce a failure at that node?
fn function_ok(u: &Term, v: &Term, env: &ActiveEnv, depth: usize) -> bool {
    match u {
        Term::Rule(l, _, _) => {
            matches!(match_syntactic(l, v), Ok(out) if out.is_success())
        }
        Term::Var(x) => match env.get(x) {
            None => true,
            Some(image) => function_ok(image, v, &ActiveEnv::new(), depth.saturating_sub(1)),
        },
        Term::Fun(..) => false,
        Term::Set(es) => es.len() == 1 && function_ok(&es[0], v, env, depth),
        Term::App(..) => match head_value(u, env, depth) {
            HeadValue::Known(value) => function_ok(&value, v, &ActiveEnv::new(), depth),
            HeadValue::Stuck => true,
            HeadValue::Unknown => false,
        },
        // Operator forms sit outside the base calculus; their failure
        // behavior is guarded by the choice operators themselves.
        Term::First(_) | Term::Dc(_) | Term::Choice(_) | Term::UChoice(_) => true,
        Term::Phi(_) | Term::Psi(_) => true,
    }
}

fn subject_shape(t: &Term) -> SubjectShape {
    let mut shape = SubjectShape {
        no_empty_set: true,
        no_multi_set: true,
        apps_ok: true,
    };
    shape_walk(t, &ActiveEnv::new(), &mut shape);
    shape
}

fn shape_walk(t: &Term, env: &ActiveEnv, shape: &mut SubjectShape) {
    match t {
        Term::First(_) | Term::Dc(_) | Term::Phi(_) | Term::Psi(_) => {}
        Term::Set(es) => {
            if es.is_empty() {
                shape.no_empty_set = false;
            } else if es.len() > 1 {
                shape.no_multi_set = false;
            }
            for e in es {
                shape_walk(e, env, shape);
            }
        }
        Term::App(f, a) => {
            if !function_ok(f, a, env, VALUE_DEPTH) {
                shape.apps_ok = false;
            }
            shape_walk(a, env, shape);
            // A live rule application activates its binders inside its own
            // right side: their images are the matched subterms of `a`.
            if let Term::Rule(l, r, _) = f.as_ref() {
                let mut inner = env.clone();
                for b in l.free_vars() {
                    inner.remove(&b);
                }
                if let Ok(MatchOutcome::Success(sigma)) = match_syntactic(l, a) {
                    for (x, image) in sigma.bindings() {
                        inner.insert(x.to_string(), image.clone());
                    }
                }
                shape_walk(r, &inner, shape);
            } else {
                shape_walk(f, env, shape);
            }
        }
        Term::Rule(l, r, _) => {
            // A rule in value position shields its binders.
            let mut inner = env.clone();
            for b in l.free_vars() {
                inner.remove(&b);
            }
            shape_walk(l, env, shape);
            shape_walk(r, &inner, shape);
        }
        _ => {
            for i in 0..child_count(t) {
                shape_walk(child_at(t, i).unwrap(), env, shape);
            }
        }
    }
}

/// Decides whether Fire may reduce `[l -> r](t)` under the given gate.
///
/// The clause tree of the linear strategy, whose and/or nesting is easy to
/// misread: the subject is ground first-order, OR
///
/// ```text
/// l linear
/// AND l weakly subsumes t
/// AND ( l -> r quasi-regular
///       OR (no empty set in t AND application heads cannot fail) )
/// AND ( l -> r strictly right-linear
///       OR no multi-element set in t )
/// ```
///
/// Quasi-regularity excuses failing subjects (the failure is preserved by
/// the instantiated right side); strict right-linearity excuses
/// multi-element-set subjects (no variable duplicates the set).
pub fn fire_allowed(gate: StrategyGate, l: &Term, r: &Term, t: &Term) -> bool {
    // Syntactic matching is only defined for first-order patterns; a rule
    // whose left side is not first-order is never a Fire redex (Switch_L
    // splits set left sides first).
    if !l.is_first_order() {
        return false;
    }
    match gate {
        StrategyGate::None => true,
        StrategyGate::Strict => t.is_ground_first_order(),
        StrategyGate::FirstOrder => r.is_first_order() && t.is_ground_first_order(),
        StrategyGate::ConfStrat => {
            if t.is_ground_first_order() {
                return true;
            }
            if !(l.is_linear() && weakly_subsumes(l, t)) {
                return false;
            }
            let shape = subject_shape(t);
            shape.no_empty_set && shape.no_multi_set && shape.apps_ok
        }
        StrategyGate::ConfStratLin | StrategyGate::ConfStratStable => {
            if gate == StrategyGate::ConfStratStable && !rules_stable(r) {
                return false;
            }
            if t.is_ground_first_order() {
                return true;
            }
            if !(l.is_linear() && weakly_subsumes(l, t)) {
                return false;
            }
            let shape = subject_shape(t);
            let failure_ok = is_quasi_regular(l, r) || (shape.no_empty_set && shape.apps_ok);
            let set_ok = shape.no_multi_set || is_strictly_right_linear(l, r);
            failure_ok && set_ok
        }
    }
}
