//! Translations between lambda-terms and rho-terms, the encoding of
//! rewriting derivations, and the conditional-rule encodings built on the
//! innermost normalizer.

use std::collections::BTreeSet;
use std::fmt;

use crate::combinators::{
    make_im_recursive, make_normalizer, CombinatorError, ConditionalRule, NormalizerKind,
};
use crate::matching::{match_syntactic, MatchOutcome};
use crate::subst::{apply_subst, fresh_name};
use crate::term::{Position, Signature, Term};

/// Lambda-terms with constants and applied function symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LambdaTerm {
    Var(String),
    Const(String),
    Abs(String, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
    Fun(String, Vec<LambdaTerm>),
}

impl LambdaTerm {
    pub fn var(name: impl Into<String>) -> LambdaTerm {
        LambdaTerm::Var(name.into())
    }

    pub fn abs(var: impl Into<String>, body: LambdaTerm) -> LambdaTerm {
        LambdaTerm::Abs(var.into(), Box::new(body))
    }

    pub fn app(fun: LambdaTerm, arg: LambdaTerm) -> LambdaTerm {
        LambdaTerm::App(Box::new(fun), Box::new(arg))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            LambdaTerm::Var(x) => BTreeSet::from([x.clone()]),
            LambdaTerm::Const(_) => BTreeSet::new(),
            LambdaTerm::Abs(x, b) => {
                let mut fv = b.free_vars();
                fv.remove(x);
                fv
            }
            LambdaTerm::App(f, a) => {
                let mut fv = f.free_vars();
                fv.extend(a.free_vars());
                fv
            }
            LambdaTerm::Fun(_, args) => args.iter().flat_map(LambdaTerm::free_vars).collect(),
        }
    }

    fn all_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            LambdaTerm::Var(x) => {
                out.insert(x.clone());
            }
            LambdaTerm::Const(_) => {}
            LambdaTerm::Abs(x, b) => {
                out.insert(x.clone());
                b.all_vars(out);
            }
            LambdaTerm::App(f, a) => {
                f.all_vars(out);
                a.all_vars(out);
            }
            LambdaTerm::Fun(_, args) => {
                for a in args {
                    a.all_vars(out)
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            LambdaTerm::Var(_) | LambdaTerm::Const(_) => 1,
            LambdaTerm::Abs(_, b) => 1 + b.size(),
            LambdaTerm::App(f, a) => 1 + f.size() + a.size(),
            LambdaTerm::Fun(_, args) => 1 + args.iter().map(LambdaTerm::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for LambdaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaTerm::Var(x) => write!(f, "{x}"),
            LambdaTerm::Const(c) => write!(f, "{c}"),
            LambdaTerm::Abs(x, b) => write!(f, "\\{x}.{b}"),
            LambdaTerm::App(fun, a) => write!(f, "({fun} {a})"),
            LambdaTerm::Fun(sym, args) => {
                write!(f, "{sym}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Capture-avoiding substitution on lambda-terms; the independent side of
/// the beta oracle.
fn lambda_subst(t: &LambdaTerm, var: &str, image: &LambdaTerm) -> LambdaTerm {
    match t {
        LambdaTerm::Var(x) => {
            if x == var {
                image.clone()
            } else {
                t.clone()
            }
        }
        LambdaTerm::Const(_) => t.clone(),
        LambdaTerm::Abs(x, body) => {
            if x == var {
                return t.clone();
            }
            if image.free_vars().contains(x) {
                let mut avoid = image.free_vars();
                t.all_vars(&mut avoid);
                avoid.insert(var.to_string());
                let fresh = fresh_name(&avoid);
                let renamed = lambda_subst(body, x, &LambdaTerm::var(fresh.clone()));
                LambdaTerm::abs(fresh, lambda_subst(&renamed, var, image))
            } else {
                LambdaTerm::abs(x.clone(), lambda_subst(body, var, image))
            }
        }
        LambdaTerm::App(fun, arg) => {
            LambdaTerm::app(lambda_subst(fun, var, image), lambda_subst(arg, var, image))
        }
        LambdaTerm::Fun(sym, args) => LambdaTerm::Fun(
            sym.clone(),
            args.iter().map(|a| lambda_subst(a, var, image)).collect(),
        ),
    }
}

/// One leftmost-outermost beta step.
pub fn beta_step(t: &LambdaTerm) -> Option<LambdaTerm> {
    match t {
        LambdaTerm::Var(_) | LambdaTerm::Const(_) => None,
        LambdaTerm::App(fun, arg) => {
            if let LambdaTerm::Abs(x, body) = fun.as_ref() {
                return Some(lambda_subst(body, x, arg));
            }
            if let Some(next) = beta_step(fun) {
                return Some(LambdaTerm::app(next, (**arg).clone()));
            }
            beta_step(arg).map(|next| LambdaTerm::app((**fun).clone(), next))
        }
        LambdaTerm::Abs(x, body) => beta_step(body).map(|next| LambdaTerm::abs(x.clone(), next)),
        LambdaTerm::Fun(sym, args) => {
            for (i, a) in args.iter().enumerate() {
                if let Some(next) = beta_step(a) {
                    let mut inner = args.clone();
                    inner[i] = next;
                    return Some(LambdaTerm::Fun(sym.clone(), inner));
                }
            }
            None
        }
    }
}

/// Normal-order beta normalization with a step budget.
pub fn beta_normalize(t: &LambdaTerm, max_steps: usize) -> Option<(LambdaTerm, usize)> {
    let mut current = t.clone();
    for steps in 0..=max_steps {
        match beta_step(&current) {
            None => return Some((current, steps)),
            Some(next) => current = next,
        }
    }
    None
}

/// The lambda-to-rho translation: abstraction becomes a variable rule,
/// application stays explicit.
pub fn lambda_to_rho(t: &LambdaTerm) -> Term {
    match t {
        LambdaTerm::Var(x) => Term::var(x.clone()),
        LambdaTerm::Const(c) => Term::cst(c.clone()),
        LambdaTerm::Abs(x, body) => Term::rule(Term::var(x.clone()), lambda_to_rho(body)),
        LambdaTerm::App(f, a) => Term::app(lambda_to_rho(f), lambda_to_rho(a)),
        LambdaTerm::Fun(sym, args) => {
            Term::fun(sym.clone(), args.iter().map(lambda_to_rho).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentError(pub Term);

impl fmt::Display for FragmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "term is outside the lambda fragment (variable-rule, singleton-set terms)"
        )
    }
}

impl std::error::Error for FragmentError {}

/// The rho-to-lambda translation, defined on the lambda fragment: rules with
/// a variable left side, singleton sets (braces erased).
pub fn rho_to_lambda(t: &Term) -> Result<LambdaTerm, FragmentError> {
    match t {
        Term::Var(x) => Ok(LambdaTerm::var(x.clone())),
        Term::Fun(f, args) => {
            if args.is_empty() {
                Ok(LambdaTerm::Const(f.clone()))
            } else {
                let inner: Result<Vec<LambdaTerm>, _> = args.iter().map(rho_to_lambda).collect();
                Ok(LambdaTerm::Fun(f.clone(), inner?))
            }
        }
        Term::Set(es) if es.len() == 1 => rho_to_lambda(&es[0]),
        Term::Rule(l, r, _) => match l.as_ref() {
            Term::Var(x) => Ok(LambdaTerm::abs(x.clone(), rho_to_lambda(r)?)),
            _ => Err(FragmentError(t.clone())),
        },
        Term::App(f, a) => Ok(LambdaTerm::app(rho_to_lambda(f)?, rho_to_lambda(a)?)),
        _ => Err(FragmentError(t.clone())),
    }
}

/// One rewrite step of a derivation: the rule applied and where.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationStep {
    pub lhs: Term,
    pub rhs: Term,
    pub position: Position,
}

/// A first-order rewriting derivation: an initial term and the steps taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteDerivation {
    pub initial: Term,
    pub steps: Vec<DerivationStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IllFormedDerivation {
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for IllFormedDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "derivation step {} is ill-formed: {}",
            self.step, self.reason
        )
    }
}

impl std::error::Error for IllFormedDerivation {}

impl RewriteDerivation {
    /// Replays the derivation, returning every intermediate term (initial
    /// first, final last).
    pub fn replay(&self) -> Result<Vec<Term>, IllFormedDerivation> {
        let mut terms = vec![self.initial.clone()];
        for (i, step) in self.steps.iter().enumerate() {
            let current = terms.last().unwrap();
            let sub = current
                .subterm_at(&step.position)
                .map_err(|e| IllFormedDerivation {
                    step: i,
                    reason: e.to_string(),
                })?;
            let sigma = match match_syntactic(&step.lhs, sub) {
                Ok(MatchOutcome::Success(s)) => s,
                _ => {
                    return Err(IllFormedDerivation {
                        step: i,
                        reason: "rule left side does not match the addressed subterm".into(),
                    })
                }
            };
            let new_sub = apply_subst(&sigma, &step.rhs);
            let next =
                current
                    .replace_at(&step.position, new_sub)
                    .map_err(|e| IllFormedDerivation {
                        step: i,
                        reason: e.to_string(),
                    })?;
            terms.push(next);
        }
        Ok(terms)
    }

    pub fn final_term(&self) -> Result<Term, IllFormedDerivation> {
        Ok(self.replay()?.pop().unwrap())
    }
}

/// Encodes a derivation as nested applications `[u_n](...[u_1](t)...)`,
/// each `u_i` the pre-step term with the rule planted at the step's
/// position; the result normalizes to the singleton of the final term.
/// The zero-step derivation is `[id](t)`.
pub fn derivation_to_rho(d: &RewriteDerivation) -> Result<Term, IllFormedDerivation> {
    let terms = d.replay()?;
    if d.steps.is_empty() {
        return Ok(Term::app(crate::combinators::make_id(), d.initial.clone()));
    }
    let mut acc = d.initial.clone();
    for (i, step) in d.steps.iter().enumerate() {
        let planted = terms[i]
            .replace_at(
                &step.position,
                Term::rule(step.lhs.clone(), step.rhs.clone()),
            )
            .expect("replay validated the position");
        acc = Term::app(planted, acc);
    }
    Ok(acc)
}

/// The Fire-only variant: each step becomes a whole-term rule
/// `t[l]_p -> t[r]_p`.
pub fn derivation_to_rho_fire_only(d: &RewriteDerivation) -> Result<Term, IllFormedDerivation> {
    let terms = d.replay()?;
    if d.steps.is_empty() {
        return Ok(Term::app(crate::combinators::make_id(), d.initial.clone()));
    }
    let mut acc = d.initial.clone();
    for (i, step) in d.steps.iter().enumerate() {
        let lhs = terms[i]
            .replace_at(&step.position, step.lhs.clone())
            .expect("replay validated the position");
        let rhs = terms[i]
            .replace_at(&step.position, step.rhs.clone())
            .expect("replay validated the position");
        acc = Term::app(Term::rule(lhs, rhs), acc);
    }
    Ok(acc)
}

/// Encodes `l -> r if cond` with its condition normalized by the innermost
/// normalizer over `norm_rules`: `l -> [True -> r]([im(norm_rules)](cond))`.
pub fn encode_conditional_rule(
    l: Term,
    r: Term,
    cond: Term,
    norm_rules: Term,
    sig: &Signature,
) -> Result<Term, CombinatorError> {
    if sig.arity("True") != Some(0) {
        return Err(CombinatorError::MissingTrueSymbol);
    }
    let im = make_normalizer(NormalizerKind::Im, norm_rules)?;
    let guard = Term::rule(Term::cst("True"), r);
    Ok(Term::rule(l, Term::app(guard, Term::app(im, cond))))
}

/// Encodes a mutually conditional system as the recursive normalizer term.
pub fn encode_conditional_system(
    rules: &[ConditionalRule],
    sig: &Signature,
) -> Result<Term, CombinatorError> {
    make_im_recursive(rules, sig)
}
