//! Shared helpers for the integration suites: a deterministic RNG, random
//! term generators, and the independent oracles the properties are checked
//! against.

#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use rho::debruijn::{DbTerm, ExplicitSubst};
use rho::encodings::LambdaTerm;
use rho::subst::{graft, Substitution};
use rho::term::{Position, Profile, Signature, Term};
use rho::typing::{Context, Type};

/// xorshift64* — deterministic across runs and platforms.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, percent: usize) -> bool {
        self.below(100) < percent
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len())]
    }
}

/// The signature used throughout the random suites.
pub fn test_signature() -> Signature {
    let mut sig = Signature::new();
    for (s, n) in [("a", 0), ("b", 0), ("c", 0), ("g", 1), ("f", 2)] {
        sig.declare(s, n).unwrap();
    }
    sig
}

pub const TEST_VARS: [&str; 4] = ["x", "y", "z", "w"];

/// A random first-order term over the test signature and the given
/// variables. `budget` bounds the node count.
pub fn gen_fo_term(rng: &mut Rng, vars: &[&str], budget: usize) -> Term {
    if budget <= 1 {
        return if !vars.is_empty() && rng.chance(40) {
            Term::var(*rng.pick(vars))
        } else {
            Term::cst(*rng.pick(&["a", "b", "c"]))
        };
    }
    match rng.below(10) {
        0 | 1 | 2 if !vars.is_empty() => Term::var(*rng.pick(vars)),
        3 | 4 => Term::cst(*rng.pick(&["a", "b", "c"])),
        5 | 6 | 7 => Term::fun("g", vec![gen_fo_term(rng, vars, budget - 1)]),
        _ => {
            let left = gen_fo_term(rng, vars, (budget - 1) / 2);
            let right = gen_fo_term(rng, vars, (budget - 1) / 2);
            Term::fun("f", vec![left, right])
        }
    }
}

pub fn gen_ground_term(rng: &mut Rng, budget: usize) -> Term {
    gen_fo_term(rng, &[], budget)
}

/// A random term of the first-order-pattern calculus: rules have
/// first-order left sides; no operator forms.
pub fn gen_rho_term(rng: &mut Rng, vars: &[&str], budget: usize) -> Term {
    if budget <= 1 {
        return gen_fo_term(rng, vars, 1);
    }
    match rng.below(12) {
        0 | 1 => gen_fo_term(rng, vars, budget),
        2 | 3 => {
            let n = 1 + rng.below(2);
            let elems = (0..n)
                .map(|_| gen_rho_term(rng, vars, (budget - 1) / n))
                .collect();
            Term::set(elems)
        }
        4 => Term::empty_set(),
        5 | 6 | 7 => {
            let lhs = gen_fo_term(rng, vars, (budget - 1) / 2);
            let rhs = gen_rho_term(rng, vars, (budget - 1) / 2);
            Term::rule(lhs, rhs)
        }
        _ => {
            let fun = gen_rho_term(rng, vars, (budget - 1) / 2);
            let arg = gen_rho_term(rng, vars, (budget - 1) / 2);
            Term::app(fun, arg)
        }
    }
}

/// Closed variant: rule right sides only use the rule's own binders.
pub fn gen_closed_rho_term(rng: &mut Rng, budget: usize) -> Term {
    if budget <= 1 {
        return Term::cst(*rng.pick(&["a", "b", "c"]));
    }
    match rng.below(10) {
        0 | 1 | 2 => gen_ground_term(rng, budget),
        3 => {
            let n = 1 + rng.below(2);
            let elems = (0..n)
                .map(|_| gen_closed_rho_term(rng, (budget - 1) / n))
                .collect();
            Term::set(elems)
        }
        4 | 5 => {
            // A closed rule: binders drawn from the pattern's variables.
            let nvars = 1 + rng.below(2);
            let vars: Vec<&str> = TEST_VARS[..nvars].to_vec();
            let lhs = gen_fo_term(rng, &vars, (budget - 1) / 2);
            let lhs_vars: Vec<String> = lhs.free_vars().into_iter().collect();
            let usable: Vec<&str> = lhs_vars.iter().map(String::as_str).collect();
            let rhs = gen_closed_rhs(rng, &usable, (budget - 1) / 2);
            Term::rule(lhs, rhs)
        }
        _ => {
            let fun = gen_closed_rho_term(rng, (budget - 1) / 2);
            let arg = gen_closed_rho_term(rng, (budget - 1) / 2);
            Term::app(fun, arg)
        }
    }
}

fn gen_closed_rhs(rng: &mut Rng, vars: &[&str], budget: usize) -> Term {
    if budget <= 1 || rng.chance(60) {
        return gen_fo_term(rng, vars, budget.max(1));
    }
    gen_closed_rho_term(rng, budget)
}

/// Brute-force matching oracle: enumerate every mapping of the pattern's
/// variables to subterms of the subject and test it by grafting.
pub fn oracle_match_exists(pattern: &Term, subject: &Term) -> bool {
    let vars: Vec<String> = pattern.free_vars().into_iter().collect();
    if vars.is_empty() {
        return pattern == subject;
    }
    let mut candidates: Vec<Term> = subject.subterms().cloned().collect();
    candidates.sort();
    candidates.dedup();
    let k = vars.len();
    let n = candidates.len();
    let total = n.pow(k as u32);
    for code in 0..total {
        let mut sigma = Substitution::identity();
        let mut c = code;
        for v in &vars {
            sigma.bind(v.clone(), candidates[c % n].clone());
            c /= n;
        }
        if graft(&sigma, pattern) == *subject {
            return true;
        }
    }
    false
}

/// A matcher that processes equations in a randomized order; used to check
/// that the outcome never depends on decomposition order.
pub fn randomized_order_match(
    rng: &mut Rng,
    pattern: &Term,
    subject: &Term,
) -> Option<BTreeMap<String, Term>> {
    let mut queue: Vec<(Term, Term)> = vec![(pattern.clone(), subject.clone())];
    let mut bindings: BTreeMap<String, Term> = BTreeMap::new();
    while !queue.is_empty() {
        let i = rng.below(queue.len());
        let (l, t) = queue.swap_remove(i);
        match l {
            Term::Var(x) => match bindings.get(&x) {
                Some(prev) if *prev != t => return None,
                Some(_) => {}
                None => {
                    bindings.insert(x, t);
                }
            },
            Term::Fun(fname, largs) => match t {
                Term::Fun(gname, targs) if fname == gname && largs.len() == targs.len() => {
                    queue.extend(largs.into_iter().zip(targs));
                }
                _ => return None,
            },
            _ => return None,
        }
    }
    Some(bindings)
}

// ---------------------------------------------------------------------
// Independent first-order rewriting oracle (self-contained: its own
// matcher and replacer, no engine machinery).

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrsRule {
    pub lhs: Term,
    pub rhs: Term,
}

fn trs_match(pattern: &Term, subject: &Term, out: &mut BTreeMap<String, Term>) -> bool {
    match pattern {
        Term::Var(x) => match out.get(x) {
            Some(prev) => prev == subject,
            None => {
                out.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::Fun(f, pargs) => match subject {
            Term::Fun(g, sargs) if f == g && pargs.len() == sargs.len() => pargs
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| trs_match(p, s, out)),
            _ => false,
        },
        _ => false,
    }
}

fn trs_instantiate(t: &Term, bindings: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Var(x) => bindings.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Fun(f, args) => Term::Fun(
            f.clone(),
            args.iter().map(|a| trs_instantiate(a, bindings)).collect(),
        ),
        _ => unreachable!("first-order rewriting only"),
    }
}

fn positions_of(t: &Term) -> Vec<Position> {
    let mut out = vec![Position::root()];
    if let Term::Fun(_, args) = t {
        for (i, a) in args.iter().enumerate() {
            for p in positions_of(a) {
                let mut path = vec![i + 1];
                path.extend(p.0);
                out.push(Position(path));
            }
        }
    }
    out
}

/// All one-step rewrites of a ground first-order term.
pub fn trs_successors(t: &Term, rules: &[TrsRule]) -> Vec<Term> {
    let mut out = Vec::new();
    for pos in positions_of(t) {
        let sub = t.subterm_at(&pos).unwrap();
        for rule in rules {
            let mut bindings = BTreeMap::new();
            if trs_match(&rule.lhs, sub, &mut bindings) {
                let replaced = t
                    .replace_at(&pos, trs_instantiate(&rule.rhs, &bindings))
                    .unwrap();
                if !out.contains(&replaced) {
                    out.push(replaced);
                }
            }
        }
    }
    out
}

pub struct TrsClosure {
    pub nodes: Vec<Term>,
    pub successors: Vec<Vec<usize>>,
}

/// Exhaustive reachability closure; `None` when the budget is exceeded.
pub fn trs_closure(t: &Term, rules: &[TrsRule], budget: usize) -> Option<TrsClosure> {
    let mut nodes = vec![t.clone()];
    let mut index: BTreeMap<Term, usize> = BTreeMap::from([(t.clone(), 0)]);
    let mut successors: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(id) = queue.pop_front() {
        while successors.len() <= id {
            successors.push(Vec::new());
        }
        for succ in trs_successors(&nodes[id].clone(), rules) {
            let sid = match index.get(&succ) {
                Some(&sid) => sid,
                None => {
                    if nodes.len() >= budget {
                        return None;
                    }
                    let sid = nodes.len();
                    nodes.push(succ.clone());
                    index.insert(succ, sid);
                    queue.push_back(sid);
                    sid
                }
            };
            successors[id].push(sid);
        }
    }
    while successors.len() < nodes.len() {
        successors.push(Vec::new());
    }
    Some(TrsClosure { nodes, successors })
}

impl TrsClosure {
    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm over the successor graph.
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for succs in &self.successors {
            for &s in succs {
                indegree[s] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for &s in &self.successors[i] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    queue.push_back(s);
                }
            }
        }
        seen == n
    }

    pub fn normal_forms(&self) -> Vec<&Term> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.successors[*i].is_empty())
            .map(|(_, t)| t)
            .collect()
    }
}

/// A random candidate rule system; callers vet termination/confluence per
/// subject through `trs_closure`.
pub fn gen_trs(rng: &mut Rng) -> Vec<TrsRule> {
    let nrules = 1 + rng.below(4);
    let mut rules = Vec::new();
    for _ in 0..nrules {
        let nvars = rng.below(3);
        let vars: Vec<&str> = TEST_VARS[..nvars].to_vec();
        let lhs = loop {
            let csz = 2 + rng.below(3);
            let cand = gen_fo_term(rng, &vars, csz);
            if !matches!(cand, Term::Var(_)) {
                break cand;
            }
        };
        let lhs_vars: Vec<String> = lhs.free_vars().into_iter().collect();
        let usable: Vec<&str> = lhs_vars.iter().map(String::as_str).collect();
        let rsz = 1 + rng.below(3);
        let rhs = gen_fo_term(rng, &usable, rsz);
        rules.push(TrsRule { lhs, rhs });
    }
    rules
}

// ---------------------------------------------------------------------
// Lambda-term generation.

/// A random closed pure lambda-term. Purity matters: the lambda encodings
/// live in the fragment without function symbols, where the congruence
/// rules never fire.
pub fn gen_lambda(rng: &mut Rng, env: &[String], budget: usize) -> LambdaTerm {
    if budget <= 1 {
        return if !env.is_empty() {
            LambdaTerm::var(rng.pick(env).clone())
        } else {
            let var = format!("v{}", env.len());
            LambdaTerm::abs(var.clone(), LambdaTerm::var(var))
        };
    }
    match rng.below(10) {
        0 | 1 | 2 | 3 => {
            let var = format!("v{}", env.len());
            let mut inner = env.to_vec();
            inner.push(var.clone());
            LambdaTerm::abs(var, gen_lambda(rng, &inner, budget - 1))
        }
        4 | 5 | 6 | 7 => LambdaTerm::app(
            gen_lambda(rng, env, (budget - 1) / 2),
            gen_lambda(rng, env, (budget - 1) / 2),
        ),
        _ => {
            if env.is_empty() {
                let var = format!("v{}", env.len());
                LambdaTerm::abs(var.clone(), LambdaTerm::var(var))
            } else {
                LambdaTerm::var(rng.pick(env).clone())
            }
        }
    }
}

// ---------------------------------------------------------------------
// Explicit-substitution term generation.

pub fn gen_db_term(rng: &mut Rng, budget: usize) -> DbTerm {
    if budget <= 1 {
        return match rng.below(4) {
            0 => DbTerm::Index(1 + rng.below(3) as u32),
            1 => DbTerm::MetaVar(format!("m{}", rng.below(2))),
            _ => DbTerm::cst(*rng.pick(&["a", "b", "c"])),
        };
    }
    match rng.below(12) {
        0 | 1 => DbTerm::Index(1 + rng.below(3) as u32),
        2 => DbTerm::cst(*rng.pick(&["a", "b", "c"])),
        3 => DbTerm::fun("g", vec![gen_db_term(rng, budget - 1)]),
        4 => {
            let l = gen_db_term(rng, (budget - 1) / 2);
            let r = gen_db_term(rng, (budget - 1) / 2);
            DbTerm::fun("f", vec![l, r])
        }
        5 => {
            let n = 1 + rng.below(2);
            DbTerm::set((0..n).map(|_| gen_db_term(rng, (budget - 1) / n)).collect())
        }
        6 => {
            let lhs = gen_db_pattern(rng, (budget - 1) / 2);
            let binders = lhs.max_index();
            DbTerm::rule_n(lhs, binders, gen_db_term(rng, (budget - 1) / 2))
        }
        7 | 8 => DbTerm::app(
            gen_db_term(rng, (budget - 1) / 2),
            gen_db_term(rng, (budget - 1) / 2),
        ),
        _ => DbTerm::closure(
            gen_db_term(rng, (budget - 1) / 2),
            gen_db_subst(rng, (budget - 1) / 2),
        ),
    }
}

fn gen_db_pattern(rng: &mut Rng, budget: usize) -> DbTerm {
    if budget <= 1 {
        return match rng.below(2) {
            0 => DbTerm::Index(1 + rng.below(2) as u32),
            _ => DbTerm::cst(*rng.pick(&["a", "b"])),
        };
    }
    match rng.below(4) {
        0 => DbTerm::Index(1 + rng.below(2) as u32),
        1 => DbTerm::cst(*rng.pick(&["a", "b"])),
        2 => DbTerm::fun("g", vec![gen_db_pattern(rng, budget - 1)]),
        _ => {
            let l = gen_db_pattern(rng, (budget - 1) / 2);
            let r = gen_db_pattern(rng, (budget - 1) / 2);
            DbTerm::fun("f", vec![l, r])
        }
    }
}

pub fn gen_db_subst(rng: &mut Rng, budget: usize) -> ExplicitSubst {
    if budget <= 1 {
        return match rng.below(3) {
            0 => ExplicitSubst::Id,
            1 => ExplicitSubst::Shift,
            _ => ExplicitSubst::MetaVar(format!("s{}", rng.below(2))),
        };
    }
    match rng.below(6) {
        0 => ExplicitSubst::Id,
        1 => ExplicitSubst::Shift,
        2 => ExplicitSubst::lift(gen_db_subst(rng, budget - 1)),
        3 | 4 => ExplicitSubst::cons(
            gen_db_term(rng, (budget - 1) / 2),
            gen_db_subst(rng, (budget - 1) / 2),
        ),
        _ => ExplicitSubst::comp(
            gen_db_subst(rng, (budget - 1) / 2),
            gen_db_subst(rng, (budget - 1) / 2),
        ),
    }
}

// ---------------------------------------------------------------------
// Typed-term generation.

pub fn typed_signature() -> Signature {
    let mut sig = Signature::new();
    let a = Type::atomic("A");
    let b = Type::atomic("B");
    for (s, n) in [("a", 0), ("b", 0), ("c", 0), ("g", 1), ("f", 2)] {
        sig.declare(s, n).unwrap();
    }
    sig.declare_profile(
        "a",
        Profile {
            args: vec![],
            result: a.clone(),
        },
    )
    .unwrap();
    sig.declare_profile(
        "b",
        Profile {
            args: vec![],
            result: a.clone(),
        },
    )
    .unwrap();
    sig.declare_profile(
        "c",
        Profile {
            args: vec![],
            result: b.clone(),
        },
    )
    .unwrap();
    sig.declare_profile(
        "g",
        Profile {
            args: vec![a.clone()],
            result: b.clone(),
        },
    )
    .unwrap();
    sig.declare_profile(
        "f",
        Profile {
            args: vec![a.clone(), a.clone()],
            result: a,
        },
    )
    .unwrap();
    sig
}

fn atomic_types() -> Vec<Type> {
    vec![Type::atomic("A"), Type::atomic("B")]
}

pub fn gen_type(rng: &mut Rng, depth: usize) -> Type {
    if depth == 0 || rng.chance(70) {
        rng.pick(&atomic_types()).clone()
    } else {
        Type::arrow(gen_type(rng, depth - 1), gen_type(rng, depth - 1))
    }
}

fn leaf_of_type(rng: &mut Rng, ctx: &Context, target: &Type, fresh: &mut usize) -> Term {
    let in_ctx: Vec<String> = ctx
        .entries()
        .filter(|(_, ty)| *ty == target)
        .map(|(v, _)| v.to_string())
        .collect();
    if !in_ctx.is_empty() && rng.chance(50) {
        return Term::var(rng.pick(&in_ctx).clone());
    }
    match target {
        Type::Atomic(n) if n == "A" => Term::cst(*rng.pick(&["a", "b"])),
        Type::Atomic(_) => Term::cst("c"),
        Type::Arrow(d, c) => {
            // An identity-shaped rule: v:D -> <leaf of C>.
            let var = format!("t{fresh}");
            *fresh += 1;
            let mut local = Context::empty();
            local.insert(var.clone(), (**d).clone()).unwrap();
            let mut inner = ctx.clone();
            let _ = inner.insert(var.clone(), (**d).clone());
            let body = if **d == **c {
                Term::var(var.clone())
            } else {
                leaf_of_type(rng, &inner, c, fresh)
            };
            Term::rule_in(Term::var(var), body, local)
        }
    }
}

/// A random well-typed term of the given type.
pub fn gen_typed_term(
    rng: &mut Rng,
    ctx: &Context,
    target: &Type,
    budget: usize,
    fresh: &mut usize,
) -> Term {
    if budget <= 1 {
        return leaf_of_type(rng, ctx, target, fresh);
    }
    match rng.below(10) {
        0 | 1 => leaf_of_type(rng, ctx, target, fresh),
        2 | 3 => {
            // Application at a random domain type.
            let dom = gen_type(rng, 1);
            let fun_ty = Type::arrow(dom.clone(), target.clone());
            let fun = gen_typed_term(rng, ctx, &fun_ty, (budget - 1) / 2, fresh);
            let arg = gen_typed_term(rng, ctx, &dom, (budget - 1) / 2, fresh);
            Term::app(fun, arg)
        }
        4 | 5 => {
            let n = 1 + rng.below(2);
            let elems = (0..n)
                .map(|_| gen_typed_term(rng, ctx, target, (budget - 1) / n, fresh))
                .collect();
            Term::set(elems)
        }
        6 | 7 if matches!(target, Type::Arrow(..)) => {
            let Type::Arrow(dom, cod) = target else {
                unreachable!()
            };
            // First-order pattern with annotated binders.
            let var = format!("t{fresh}");
            *fresh += 1;
            let (lhs, mut local) = gen_typed_pattern(rng, dom, &var);
            let mut inner = ctx.clone();
            for (v, ty) in local.clone().entries() {
                if inner.insert(v, ty.clone()).is_err() {
                    // Ambient name collision: fall back to a leaf.
                    return leaf_of_type(rng, ctx, target, fresh);
                }
            }
            let rhs = gen_typed_term(rng, &inner, cod, (budget - 1) / 2, fresh);
            for v in lhs.free_vars() {
                if local.get(&v).is_none() {
                    let _ = local.insert(v, Type::atomic("A"));
                }
            }
            Term::rule_in(lhs, rhs, local)
        }
        _ => {
            // Function symbols at their declared profiles.
            match target {
                Type::Atomic(n) if n == "A" => {
                    let left = gen_typed_term(rng, ctx, target, (budget - 1) / 2, fresh);
                    let right = gen_typed_term(rng, ctx, target, (budget - 1) / 2, fresh);
                    Term::fun("f", vec![left, right])
                }
                Type::Atomic(_) => {
                    let arg = gen_typed_term(rng, ctx, &Type::atomic("A"), budget - 1, fresh);
                    Term::fun("g", vec![arg])
                }
                _ => leaf_of_type(rng, ctx, target, fresh),
            }
        }
    }
}

fn gen_typed_pattern(rng: &mut Rng, target: &Type, var: &str) -> (Term, Context) {
    let mut local = Context::empty();
    match target {
        Type::Atomic(n) if n == "A" => match rng.below(3) {
            0 => {
                local.insert(var.to_string(), target.clone()).unwrap();
                (Term::var(var), local)
            }
            1 => (Term::cst(*rng.pick(&["a", "b"])), local),
            _ => {
                let v2 = format!("{var}q");
                local.insert(var.to_string(), Type::atomic("A")).unwrap();
                local.insert(v2.clone(), Type::atomic("A")).unwrap();
                (Term::fun("f", vec![Term::var(var), Term::var(v2)]), local)
            }
        },
        _ => {
            local.insert(var.to_string(), target.clone()).unwrap();
            (Term::var(var), local)
        }
    }
}
