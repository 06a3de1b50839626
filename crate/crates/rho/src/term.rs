//! The rho-term data model: variables, function applications, result sets,
//! rewrite rules, explicit application and the first/dc operator forms,
//! together with signatures, positions and the basic variable analyses.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::typing::{Context, Type};

/// Prefix reserved for machine-generated variable names (alpha-conversion,
/// combinator binders). The parser rejects it in user input.
pub const FRESH_PREFIX: char = '#';

/// Maps each declared symbol to its arity, and optionally to typing profiles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    arities: BTreeMap<String, usize>,
    profiles: BTreeMap<String, Vec<Profile>>,
}

/// A typing profile `A1 x ... x An -o A` for a function symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Profile {
    pub args: Vec<Type>,
    pub result: Type,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignatureError {
    ArityConflict {
        symbol: String,
        old: usize,
        new: usize,
    },
    ProfileArityMismatch {
        symbol: String,
        arity: usize,
        profile_len: usize,
    },
    UnknownSymbol(String),
}

impl fmt::Display for SignatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureError::ArityConflict { symbol, old, new } => {
                write!(
                    f,
                    "symbol `{symbol}` declared with arity {new} but already has arity {old}"
                )
            }
            SignatureError::ProfileArityMismatch {
                symbol,
                arity,
                profile_len,
            } => {
                write!(f, "profile for `{symbol}` has {profile_len} argument types but the symbol has arity {arity}")
            }
            SignatureError::UnknownSymbol(s) => write!(f, "unknown symbol `{s}`"),
        }
    }
}

impl std::error::Error for SignatureError {}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    /// Declares a symbol. Each symbol has exactly one arity.
    pub fn declare(&mut self, symbol: &str, arity: usize) -> Result<(), SignatureError> {
        match self.arities.get(symbol) {
            Some(&old) if old != arity => Err(SignatureError::ArityConflict {
                symbol: symbol.to_string(),
                old,
                new: arity,
            }),
            _ => {
                self.arities.insert(symbol.to_string(), arity);
                Ok(())
            }
        }
    }

    /// Attaches a typing profile to an already-declared symbol.
    pub fn declare_profile(
        &mut self,
        symbol: &str,
        profile: Profile,
    ) -> Result<(), SignatureError> {
        let arity = self
            .arity(symbol)
            .ok_or_else(|| SignatureError::UnknownSymbol(symbol.to_string()))?;
        if profile.args.len() != arity {
            return Err(SignatureError::ProfileArityMismatch {
                symbol: symbol.to_string(),
                arity,
                profile_len: profile.args.len(),
            });
        }
        self.profiles
            .entry(symbol.to_string())
            .or_default()
            .push(profile);
        Ok(())
    }

    pub fn arity(&self, symbol: &str) -> Option<usize> {
        self.arities.get(symbol).copied()
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.arities.contains_key(symbol)
    }

    pub fn profiles(&self, symbol: &str) -> &[Profile] {
        self.profiles
            .get(symbol)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arities.iter().map(|(s, a)| (s.as_str(), *a))
    }

    /// Constants first, then proper function symbols, both in name order.
    pub fn constants(&self) -> Vec<String> {
        self.symbols()
            .filter(|(_, a)| *a == 0)
            .map(|(s, _)| s.to_string())
            .collect()
    }

    pub fn non_constants(&self) -> Vec<(String, usize)> {
        self.symbols()
            .filter(|(_, a)| *a > 0)
            .map(|(s, a)| (s.to_string(), a))
            .collect()
    }
}

/// A rho-term. Sets and unordered choices keep their elements in canonical
/// order (sorted, deduplicated): the comma of `{...}` and `<<...>>` is
/// associative, commutative and idempotent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Fun(String, Vec<Term>),
    Set(Vec<Term>),
    Rule(Box<Term>, Box<Term>, Option<Context>),
    App(Box<Term>, Box<Term>),
    First(Vec<Term>),
    /// The ordered pending-choice operator `<...>`.
    Choice(Vec<Term>),
    Dc(Vec<Term>),
    /// The unordered pending-choice operator `<<...>>`, canonical like sets.
    UChoice(Vec<Term>),
    /// Generic one-argument congruence traversal.
    Phi(Box<Term>),
    /// Generic all-arguments congruence traversal.
    Psi(Box<Term>),
}

fn variant_rank(t: &Term) -> u8 {
    match t {
        Term::Var(_) => 0,
        Term::Fun(..) => 1,
        Term::Set(_) => 2,
        Term::Rule(..) => 3,
        Term::App(..) => 4,
        Term::First(_) => 5,
        Term::Choice(_) => 6,
        Term::Dc(_) => 7,
        Term::UChoice(_) => 8,
        Term::Phi(_) => 9,
        Term::Psi(_) => 10,
    }
}

fn cmp_slices(a: &[Term], b: &[Term]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Total structural order: variant tag, then symbol name, then arity, then
/// lexicographically on children. Keeps canonical sets and traces stable.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match variant_rank(self).cmp(&variant_rank(other)) {
            Ordering::Equal => {}
            o => return o,
        }
        match (self, other) {
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (Term::Fun(f, xs), Term::Fun(g, ys)) => f
                .cmp(g)
                .then_with(|| xs.len().cmp(&ys.len()))
                .then_with(|| cmp_slices(xs, ys)),
            (Term::Set(xs), Term::Set(ys))
            | (Term::First(xs), Term::First(ys))
            | (Term::Choice(xs), Term::Choice(ys))
            | (Term::Dc(xs), Term::Dc(ys))
            | (Term::UChoice(xs), Term::UChoice(ys)) => cmp_slices(xs, ys),
            (Term::Rule(l1, r1, c1), Term::Rule(l2, r2, c2)) => {
                l1.cmp(l2).then_with(|| r1.cmp(r2)).then_with(|| c1.cmp(c2))
            }
            (Term::App(f1, a1), Term::App(f2, a2)) => f1.cmp(f2).then_with(|| a1.cmp(a2)),
            (Term::Phi(a), Term::Phi(b)) | (Term::Psi(a), Term::Psi(b)) => a.cmp(b),
            _ => unreachable!("variant ranks matched"),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn fun(symbol: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Fun(symbol.into(), args)
    }

    pub fn cst(symbol: impl Into<String>) -> Term {
        Term::Fun(symbol.into(), Vec::new())
    }

    /// Builds a set in canonical form (sorted, duplicates removed).
    pub fn set(elements: Vec<Term>) -> Term {
        Term::Set(canonicalize(elements))
    }

    pub fn empty_set() -> Term {
        Term::Set(Vec::new())
    }

    pub fn rule(lhs: Term, rhs: Term) -> Term {
        Term::Rule(Box::new(lhs), Box::new(rhs), None)
    }

    pub fn rule_in(lhs: Term, rhs: Term, ctx: Context) -> Term {
        Term::Rule(Box::new(lhs), Box::new(rhs), Some(ctx))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn first(args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "first takes at least one argument");
        Term::First(args)
    }

    pub fn choice(args: Vec<Term>) -> Term {
        Term::Choice(args)
    }

    pub fn dc(args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "dc takes at least one argument");
        Term::Dc(args)
    }

    pub fn uchoice(args: Vec<Term>) -> Term {
        Term::UChoice(canonicalize(args))
    }

    pub fn is_empty_set(&self) -> bool {
        matches!(self, Term::Set(es) if es.is_empty())
    }

    /// A term built only from variables and function symbols.
    pub fn is_first_order(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Fun(_, args) => args.iter().all(Term::is_first_order),
            _ => false,
        }
    }

    /// A first-order term without variables.
    pub fn is_ground_first_order(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Fun(_, args) => args.iter().all(Term::is_ground_first_order),
            _ => false,
        }
    }

    /// The default term profile: every rule's left side is first-order.
    /// Terms outside it (set or rule patterns) belong to the permissive
    /// profile and are only confluent under the stable-rule strategy.
    pub fn is_rho0_profile(&self) -> bool {
        self.subterms().all(|s| match s {
            Term::Rule(l, _, _) => l.is_first_order(),
            _ => true,
        })
    }

    fn child_count(&self) -> usize {
        match self {
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

    fn child_at(&self, i: usize) -> Option<&Term> {
        match self {
            Term::Var(_) => None,
            Term::Fun(_, args)
            | Term::Set(args)
            | Term::First(args)
            | Term::Choice(args)
            | Term::Dc(args)
            | Term::UChoice(args) => args.get(i),
            Term::Rule(l, r, _) => match i {
                0 => Some(l),
                1 => Some(r),
                _ => None,
            },
            Term::App(f, a) => match i {
                0 => Some(f),
                1 => Some(a),
                _ => None,
            },
            Term::Phi(a) | Term::Psi(a) => (i == 0).then_some(a.as_ref()),
        }
    }

    /// Iterates over every subterm, the term itself included.
    pub fn subterms(&self) -> SubtermIter<'_> {
        SubtermIter { stack: vec![self] }
    }

    pub fn size(&self) -> usize {
        self.subterms().count()
    }

    /// Set of free variables: the lhs of a rule binds its free
    /// variables in the rhs; operator forms behave like sets.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut out);
        out
    }

    fn collect_free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Rule(l, r, _) => {
                let bound = l.free_vars();
                for v in r.free_vars() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            _ => {
                for i in 0..self.child_count() {
                    self.child_at(i).unwrap().collect_free_vars(out);
                }
            }
        }
    }

    /// Variables of a term regardless of binding, in first occurrence order.
    pub fn vars_in_order(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars_in_order(&mut out);
        out
    }

    fn collect_vars_in_order(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            _ => {
                for i in 0..self.child_count() {
                    self.child_at(i).unwrap().collect_vars_in_order(out);
                }
            }
        }
    }

    /// No variable occurs twice.
    pub fn is_linear(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.linear_walk(&mut seen)
    }

    fn linear_walk(&self, seen: &mut BTreeSet<String>) -> bool {
        match self {
            Term::Var(x) => seen.insert(x.clone()),
            _ => (0..self.child_count()).all(|i| self.child_at(i).unwrap().linear_walk(seen)),
        }
    }

    /// Present variables: the variables guaranteed to survive in
    /// every nondeterministic branch. `PV({}) = X` (all variables).
    pub fn present_vars(&self) -> VarSet {
        match self {
            Term::Var(x) => VarSet::names([x.clone()]),
            Term::Fun(_, args) => args
                .iter()
                .fold(VarSet::empty(), |acc, t| acc.union(&t.present_vars())),
            Term::Set(es) | Term::UChoice(es) => es
                .iter()
                .fold(VarSet::Top, |acc, t| acc.intersection(&t.present_vars())),
            Term::App(f, a) => f.present_vars().union(&a.present_vars()),
            Term::Rule(l, r, _) => r.present_vars().minus(&l.free_vars()),
            // first/dc/<...> behave like sets: one branch survives.
            Term::First(es) | Term::Choice(es) | Term::Dc(es) => es
                .iter()
                .fold(VarSet::Top, |acc, t| acc.intersection(&t.present_vars())),
            Term::Phi(a) | Term::Psi(a) => a.present_vars(),
        }
    }

    pub fn subterm_at(&self, pos: &Position) -> Result<&Term, PositionError> {
        let mut cur = self;
        for (depth, &i) in pos.0.iter().enumerate() {
            if i == 0 {
                return Err(PositionError::at(pos, depth));
            }
            cur = cur
                .child_at(i - 1)
                .ok_or_else(|| PositionError::at(pos, depth))?;
        }
        Ok(cur)
    }

    /// Replaces the subterm at `pos` and re-canonicalizes set-like parents on
    /// the way back up.
    pub fn replace_at(&self, pos: &Position, replacement: Term) -> Result<Term, PositionError> {
        self.replace_walk(&pos.0, 0, replacement)
            .map_err(|depth| PositionError::at(pos, depth))
    }

    fn replace_walk(&self, path: &[usize], depth: usize, replacement: Term) -> Result<Term, usize> {
        if depth == path.len() {
            return Ok(replacement);
        }
        let i = path[depth];
        if i == 0 || i > self.child_count() {
            return Err(depth);
        }
        let k = i - 1;
        let rebuilt = self
            .child_at(k)
            .unwrap()
            .replace_walk(path, depth + 1, replacement)?;
        Ok(match self {
            Term::Fun(f, args) => Term::Fun(f.clone(), replaced(args, k, rebuilt)),
            Term::Set(es) => Term::set(replaced(es, k, rebuilt)),
            Term::First(es) => Term::First(replaced(es, k, rebuilt)),
            Term::Choice(es) => Term::Choice(replaced(es, k, rebuilt)),
            Term::Dc(es) => Term::Dc(replaced(es, k, rebuilt)),
            Term::UChoice(es) => Term::uchoice(replaced(es, k, rebuilt)),
            Term::Rule(l, r, c) => {
                if k == 0 {
                    Term::Rule(Box::new(rebuilt), r.clone(), c.clone())
                } else {
                    Term::Rule(l.clone(), Box::new(rebuilt), c.clone())
                }
            }
            Term::App(f, a) => {
                if k == 0 {
                    Term::app(rebuilt, (**a).clone())
                } else {
                    Term::app((**f).clone(), rebuilt)
                }
            }
            Term::Phi(_) => Term::Phi(Box::new(rebuilt)),
            Term::Psi(_) => Term::Psi(Box::new(rebuilt)),
            Term::Var(_) => unreachable!(),
        })
    }

    /// Checks that every `Fun` node matches the signature's arity.
    pub fn check_arities(&self, sig: &Signature) -> Result<(), SignatureError> {
        for t in self.subterms() {
            if let Term::Fun(f, args) = t {
                match sig.arity(f) {
                    Some(a) if a == args.len() => {}
                    Some(a) => {
                        return Err(SignatureError::ProfileArityMismatch {
                            symbol: f.clone(),
                            arity: a,
                            profile_len: args.len(),
                        })
                    }
                    None => return Err(SignatureError::UnknownSymbol(f.clone())),
                }
            }
        }
        Ok(())
    }
}

fn replaced(args: &[Term], k: usize, t: Term) -> Vec<Term> {
    let mut out = args.to_vec();
    out[k] = t;
    out
}

fn canonicalize(mut elements: Vec<Term>) -> Vec<Term> {
    elements.sort();
    elements.dedup();
    elements
}

pub struct SubtermIter<'a> {
    stack: Vec<&'a Term>,
}

impl<'a> Iterator for SubtermIter<'a> {
    type Item = &'a Term;

    fn next(&mut self) -> Option<&'a Term> {
        let t = self.stack.pop()?;
        for i in (0..t.child_count()).rev() {
            self.stack.push(t.child_at(i).unwrap());
        }
        Some(t)
    }
}

/// A set of variable names with a distinguished top element ("all
/// variables"), as required by `PV({}) = X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarSet {
    Top,
    Names(BTreeSet<String>),
}

impl VarSet {
    pub fn empty() -> VarSet {
        VarSet::Names(BTreeSet::new())
    }

    pub fn names<I: IntoIterator<Item = String>>(names: I) -> VarSet {
        VarSet::Names(names.into_iter().collect())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, VarSet::Top)
    }

    pub fn contains(&self, name: &str) -> bool {
        match self {
            VarSet::Top => true,
            VarSet::Names(s) => s.contains(name),
        }
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        match (self, other) {
            (VarSet::Top, _) | (_, VarSet::Top) => VarSet::Top,
            (VarSet::Names(a), VarSet::Names(b)) => VarSet::Names(a.union(b).cloned().collect()),
        }
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        match (self, other) {
            (VarSet::Top, x) | (x, VarSet::Top) => x.clone(),
            (VarSet::Names(a), VarSet::Names(b)) => {
                VarSet::Names(a.intersection(b).cloned().collect())
            }
        }
    }

    pub fn minus(&self, names: &BTreeSet<String>) -> VarSet {
        match self {
            // Top absorbs: removing finitely many names still leaves every
            // candidate variable of interest, so Top is kept.
            VarSet::Top => VarSet::Top,
            VarSet::Names(s) => VarSet::Names(s.difference(names).cloned().collect()),
        }
    }

    pub fn contains_all(&self, names: &BTreeSet<String>) -> bool {
        names.iter().all(|n| self.contains(n))
    }
}

/// A path into a term; the empty path is the head position. Indices are
/// 1-based as usual for term positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, i: usize) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "eps");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionError {
    pub position: Position,
    pub failed_depth: usize,
}

impl PositionError {
    fn at(pos: &Position, depth: usize) -> PositionError {
        PositionError {
            position: pos.clone(),
            failed_depth: depth,
        }
    }
}

impl fmt::Display for PositionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "position {} is not valid (fails at depth {})",
            self.position, self.failed_depth
        )
    }
}

impl std::error::Error for PositionError {}
