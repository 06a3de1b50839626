//! Syntactic first-order matching. Matching is unitary: a problem has at
//! most one solution, computed by decomposing equations to a normal form.

use std::fmt;

use crate::subst::Substitution;
use crate::term::Term;

/// A single matching equation `lhs << rhs` with a first-order pattern side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchEquation {
    pub lhs: Term,
    pub rhs: Term,
}

/// Why a matching problem has no solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClashKind {
    /// Two distinct function symbols at the same position.
    SymbolClash,
    /// The same variable would need two distinct values.
    MergingClash,
    /// A function symbol in the pattern faces a variable in the subject.
    SymbolVariableClash,
}

impl fmt::Display for ClashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClashKind::SymbolClash => "SymbolClash",
            ClashKind::MergingClash => "MergingClash",
            ClashKind::SymbolVariableClash => "SymbolVariableClash",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchOutcome {
    Success(Substitution),
    Failure(ClashKind),
}

impl MatchOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, MatchOutcome::Success(_))
    }

    pub fn substitution(self) -> Option<Substitution> {
        match self {
            MatchOutcome::Success(s) => Some(s),
            MatchOutcome::Failure(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalformedPattern(pub Term);

impl fmt::Display for MalformedPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pattern is not a first-order term")
    }
}

impl std::error::Error for MalformedPattern {}

/// Matches the first-order pattern `l` against the subject `t`.
///
/// Decomposition runs leftmost-first, so the failure reported is the first
/// clash found in that order; success or failure itself does not depend on
/// the order. Any non-variable, non-functional subject node facing a `Fun`
/// pattern is a symbol clash: sets, rules and applications are not function
/// symbols.
pub fn match_syntactic(l: &Term, t: &Term) -> Result<MatchOutcome, MalformedPattern> {
    if !l.is_first_order() {
        return Err(MalformedPattern(l.clone()));
    }
    let mut bindings: Vec<(String, Term)> = Vec::new();
    match decompose(l, t, &mut bindings) {
        Some(clash) => Ok(MatchOutcome::Failure(clash)),
        None => {
            let mut subst = Substitution::identity();
            for (x, v) in bindings {
                subst.bind(x, v);
            }
            Ok(MatchOutcome::Success(subst))
        }
    }
}

fn decompose(l: &Term, t: &Term, bindings: &mut Vec<(String, Term)>) -> Option<ClashKind> {
    match l {
        Term::Var(x) => {
            // A repeated variable with two distinct values is a merging
            // clash. Trivial equations x << x take part in that check and
            // are only dropped afterwards (the identity binding never makes
            // it into the substitution).
            if let Some((_, prev)) = bindings.iter().find(|(name, _)| name == x) {
                if prev != t {
                    return Some(ClashKind::MergingClash);
                }
                return None;
            }
            bindings.push((x.clone(), t.clone()));
            None
        }
        Term::Fun(f, largs) => match t {
            Term::Fun(g, targs) if f == g && largs.len() == targs.len() => {
                for (li, ti) in largs.iter().zip(targs.iter()) {
                    if let Some(clash) = decompose(li, ti, bindings) {
                        return Some(clash);
                    }
                }
                None
            }
            Term::Fun(..) => Some(ClashKind::SymbolClash),
            Term::Var(_) => Some(ClashKind::SymbolVariableClash),
            _ => Some(ClashKind::SymbolClash),
        },
        _ => unreachable!("pattern checked first-order"),
    }
}

/// `Solution(l << t)`: the set of matches, empty on failure, a singleton
/// otherwise (the identity for trivial problems). The set return type is the
/// hook for future equational matching theories.
pub fn solution(l: &Term, t: &Term) -> Result<Vec<Substitution>, MalformedPattern> {
    Ok(match match_syntactic(l, t)? {
        MatchOutcome::Success(s) => vec![s],
        MatchOutcome::Failure(_) => Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Term {
        Term::cst("a")
    }
    fn b() -> Term {
        Term::cst("b")
    }
    fn x() -> Term {
        Term::var("x")
    }
    fn y() -> Term {
        Term::var("y")
    }

    #[test]
    fn nonlinear_pattern_matches_when_consistent() {
        // f(x, g(x, y)) << f(a, g(a, b)) = {x/a, y/b}
        let l = Term::fun("f", vec![x(), Term::fun("g", vec![x(), y()])]);
        let t = Term::fun("f", vec![a(), Term::fun("g", vec![a(), b()])]);
        let out = match_syntactic(&l, &t).unwrap();
        let s = out.substitution().expect("match succeeds");
        assert_eq!(s.get("x"), Some(&a()));
        assert_eq!(s.get("y"), Some(&b()));
        assert_eq!(s.domain().count(), 2);
    }

    #[test]
    fn merging_clash_on_inconsistent_duplicates() {
        let l = Term::fun("f", vec![x(), x()]);
        let t = Term::fun("f", vec![a(), b()]);
        assert_eq!(
            match_syntactic(&l, &t).unwrap(),
            MatchOutcome::Failure(ClashKind::MergingClash)
        );
    }

    #[test]
    fn identical_terms_match_with_identity() {
        let out = match_syntactic(&x(), &x()).unwrap();
        assert_eq!(out, MatchOutcome::Success(Substitution::identity()));
    }

    #[test]
    fn symbol_variable_clash() {
        assert_eq!(
            match_syntactic(&a(), &x()).unwrap(),
            MatchOutcome::Failure(ClashKind::SymbolVariableClash)
        );
    }

    #[test]
    fn fun_pattern_against_structured_subject_is_symbol_clash() {
        let clash = |t: &Term| match_syntactic(&a(), t).unwrap();
        assert_eq!(
            clash(&Term::set(vec![a()])),
            MatchOutcome::Failure(ClashKind::SymbolClash)
        );
        assert_eq!(
            clash(&Term::rule(a(), b())),
            MatchOutcome::Failure(ClashKind::SymbolClash)
        );
        assert_eq!(
            clash(&Term::app(Term::rule(a(), b()), a())),
            MatchOutcome::Failure(ClashKind::SymbolClash)
        );
    }

    #[test]
    fn variable_pattern_binds_structured_subjects() {
        let t = Term::app(Term::rule(a(), b()), a());
        let out = match_syntactic(&x(), &t).unwrap();
        assert_eq!(out.substitution().unwrap().get("x"), Some(&t));
    }

    #[test]
    fn solution_is_empty_singleton_or_identity() {
        assert!(solution(&a(), &b()).unwrap().is_empty());
        let sols = solution(&x(), &Term::fun("f", vec![a()])).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].get("x"), Some(&Term::fun("f", vec![a()])));
        assert_eq!(
            solution(&a(), &a()).unwrap(),
            vec![Substitution::identity()]
        );
    }

    #[test]
    fn solution_binds_higher_order_images_under_fun_patterns() {
        // f(x) against f([a -> b](a)): the image is the application itself,
        // and instantiating the pattern reproduces the subject.
        let inner = Term::app(Term::rule(a(), b()), a());
        let pattern = Term::fun("f", vec![x()]);
        let subject = Term::fun("f", vec![inner.clone()]);
        let sols = solution(&pattern, &subject).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].get("x"), Some(&inner));
        assert_eq!(crate::subst::apply_subst(&sols[0], &pattern), subject);
    }

    #[test]
    fn malformed_pattern_rejected() {
        let l = Term::set(vec![a()]);
        assert!(match_syntactic(&l, &a()).is_err());
    }
}
