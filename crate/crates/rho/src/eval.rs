//! The small-step reduction engine: the core application/set rules, the
//! first/dc operator rules, the generic traversal rules, strategy-gated
//! Fire, and a bounded exhaustive reduction-graph explorer used as a
//! confluence oracle.

use std::collections::HashMap;
use std::fmt;

use crate::gate::{fire_allowed, StrategyGate};
use crate::matching::{match_syntactic, MatchOutcome};
use crate::subst::apply_subst;
use crate::term::{Position, Signature, Term};
use crate::typing::{Context, TypedMatchOutcome};

/// Which evaluation-rule families are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RuleFamilies {
    Core,
    CoreFirst,
    #[default]
    CoreFirstTraverse,
}

impl RuleFamilies {
    fn first_enabled(self) -> bool {
        !matches!(self, RuleFamilies::Core)
    }

    fn traverse_enabled(self) -> bool {
        matches!(self, RuleFamilies::CoreFirstTraverse)
    }
}

#[derive(Debug, Clone)]
pub struct ReductionConfig {
    pub gate: StrategyGate,
    pub max_steps: usize,
    pub trace: bool,
    pub rule_set: RuleFamilies,
    /// When set, a gate-blocked rule application counts as a radical, so a
    /// pending-choice head containing one never commits.
    pub strict_radicals: bool,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            gate: StrategyGate::default(),
            max_steps: 10_000,
            trace: false,
            rule_set: RuleFamilies::default(),
            strict_radicals: false,
        }
    }
}

impl ReductionConfig {
    pub fn with_gate(gate: StrategyGate) -> Self {
        ReductionConfig {
            gate,
            ..Default::default()
        }
    }
}

/// Names of the evaluation rules, as they appear in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleName {
    Fire,
    Congruence,
    CongruenceFail,
    Distrib,
    Batch,
    SwitchL,
    SwitchR,
    OpOnSet,
    Flat,
    First,
    FirstFail,
    FirstSuccess,
    FirstSingle,
    Dc,
    DcFail,
    DcSuccess,
    DcSingle,
    TraverseSeq,
    TraversePar,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleName::Fire => "Fire",
            RuleName::Congruence => "Congruence",
            RuleName::CongruenceFail => "Congruence_fail",
            RuleName::Distrib => "Distrib",
            RuleName::Batch => "Batch",
            RuleName::SwitchL => "Switch_L",
            RuleName::SwitchR => "Switch_R",
            RuleName::OpOnSet => "OpOnSet",
            RuleName::Flat => "Flat",
            RuleName::First => "First",
            RuleName::FirstFail => "First_fail",
            RuleName::FirstSuccess => "First_success",
            RuleName::FirstSingle => "First_single",
            RuleName::Dc => "DC",
            RuleName::DcFail => "DC_fail",
            RuleName::DcSuccess => "DC_success",
            RuleName::DcSingle => "DC_single",
            RuleName::TraverseSeq => "Traverse_seq",
            RuleName::TraversePar => "Traverse_par",
        };
        write!(f, "{s}")
    }
}

/// One recorded step: the rule applied, where, and the whole term before and
/// after.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepInfo {
    pub rule_name: RuleName,
    pub position: Position,
    pub before: Term,
    pub after: Term,
}

impl StepInfo {
    /// The bit-exact trace line format.
    pub fn trace_line(&self, step_index: usize) -> String {
        format!(
            "step {}: {} @ {} : {} ==> {}",
            step_index,
            self.rule_name,
            self.position,
            crate::syntax::print(&self.before),
            crate::syntax::print(&self.after)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeKind {
    NormalForm,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct NormalizeResult {
    pub kind: NormalizeKind,
    pub term: Term,
    pub steps: usize,
    pub trace: Option<Vec<StepInfo>>,
}

impl NormalizeResult {
    pub(crate) fn normal_form(term: Term, steps: usize, trace: Option<Vec<StepInfo>>) -> Self {
        NormalizeResult {
            kind: NormalizeKind::NormalForm,
            term,
            steps,
            trace,
        }
    }

    pub(crate) fn step_limit(term: Term, steps: usize, trace: Option<Vec<StepInfo>>) -> Self {
        NormalizeResult {
            kind: NormalizeKind::StepLimit,
            term,
            steps,
            trace,
        }
    }

    pub fn is_normal_form(&self) -> bool {
        self.kind == NormalizeKind::NormalForm
    }
}

type Env<'a> = Option<(&'a Context, &'a Signature)>;

/// A first/dc expansion waits until its argument is instantiated: variables
/// and pending applications are not ready.
fn arg_ready(v: &Term) -> bool {
    !matches!(v, Term::Var(_) | Term::App(..))
}

fn fire_result(l: &Term, r: &Term, subject: &Term) -> Term {
    match match_syntactic(l, subject) {
        Ok(MatchOutcome::Success(sigma)) => Term::set(vec![apply_subst(&sigma, r)]),
        _ => Term::empty_set(),
    }
}

/// Applies one evaluation rule at the head of `t`, deterministically (the
/// first applicable rule in the priority order of the rule figures).
fn reduce_head(t: &Term, cfg: &ReductionConfig, env: Env<'_>) -> Option<(RuleName, Term)> {
    match t {
        Term::App(u, v) => {
            if let Term::Rule(l, r, local) = u.as_ref() {
                if fire_allowed(cfg.gate, l, r, v) {
                    let reduced = match env {
                        None => fire_result(l, r, v),
                        Some((ctx, sig)) => {
                            let fv: Vec<String> = l.free_vars().into_iter().collect();
                            let local = local
                                .clone()
                                .unwrap_or_default()
                                .restrict(fv.iter().map(String::as_str));
                            match crate::typing::match_typed(&local, l, ctx, v, sig) {
                                Ok(TypedMatchOutcome::Success(sigma)) => {
                                    Term::set(vec![apply_subst(&sigma, r)])
                                }
                                _ => Term::empty_set(),
                            }
                        }
                    };
                    return Some((RuleName::Fire, reduced));
                }
            }
            if let (Term::Fun(f, fargs), Term::Fun(g, gargs)) = (u.as_ref(), v.as_ref()) {
                if f == g && fargs.len() == gargs.len() {
                    let inner: Vec<Term> = fargs
                        .iter()
                        .zip(gargs.iter())
                        .map(|(ui, vi)| Term::app(ui.clone(), vi.clone()))
                        .collect();
                    return Some((
                        RuleName::Congruence,
                        Term::set(vec![Term::Fun(f.clone(), inner)]),
                    ));
                }
                return Some((RuleName::CongruenceFail, Term::empty_set()));
            }
            if let Term::Set(us) = u.as_ref() {
                let apps: Vec<Term> = us
                    .iter()
                    .map(|ui| Term::app(ui.clone(), (**v).clone()))
                    .collect();
                return Some((RuleName::Distrib, Term::set(apps)));
            }
            if let Term::Set(vs) = v.as_ref() {
                let apps: Vec<Term> = vs
                    .iter()
                    .map(|vi| Term::app((**u).clone(), vi.clone()))
                    .collect();
                return Some((RuleName::Batch, Term::set(apps)));
            }
            if cfg.rule_set.first_enabled() && arg_ready(v) {
                if let Term::First(ss) = u.as_ref() {
                    let apps: Vec<Term> = ss
                        .iter()
                        .map(|si| Term::app(si.clone(), (**v).clone()))
                        .collect();
                    return Some((RuleName::First, Term::Choice(apps)));
                }
                if let Term::Dc(ss) = u.as_ref() {
                    let apps: Vec<Term> = ss
                        .iter()
                        .map(|si| Term::app(si.clone(), (**v).clone()))
                        .collect();
                    return Some((RuleName::Dc, Term::uchoice(apps)));
                }
            }
            if cfg.rule_set.traverse_enabled() {
                if let (Term::Phi(r), Term::Fun(f, args)) = (u.as_ref(), v.as_ref()) {
                    let branches: Vec<Term> = (0..args.len())
                        .map(|i| {
                            let mut inner = args.clone();
                            inner[i] = Term::app((**r).clone(), args[i].clone());
                            Term::set(vec![Term::Fun(f.clone(), inner)])
                        })
                        .collect();
                    return Some((RuleName::TraverseSeq, Term::Choice(branches)));
                }
                if let (Term::Psi(r), Term::Fun(f, args)) = (u.as_ref(), v.as_ref()) {
                    let inner: Vec<Term> = args
                        .iter()
                        .map(|a| Term::app((**r).clone(), a.clone()))
                        .collect();
                    return Some((
                        RuleName::TraversePar,
                        Term::set(vec![Term::Fun(f.clone(), inner)]),
                    ));
                }
            }
            None
        }
        Term::Rule(l, r, local) => {
            if let Term::Set(ls) = l.as_ref() {
                let rules: Vec<Term> = ls
                    .iter()
                    .map(|li| Term::Rule(Box::new(li.clone()), r.clone(), local.clone()))
                    .collect();
                return Some((RuleName::SwitchL, Term::set(rules)));
            }
            if let Term::Set(rs) = r.as_ref() {
                let rules: Vec<Term> = rs
                    .iter()
                    .map(|ri| Term::Rule(l.clone(), Box::new(ri.clone()), local.clone()))
                    .collect();
                return Some((RuleName::SwitchR, Term::set(rules)));
            }
            None
        }
        Term::Set(es) => {
            let nested = es.iter().position(|e| matches!(e, Term::Set(_)))?;
            Some((RuleName::Flat, flatten_at(es, nested)))
        }
        Term::Fun(f, args) => {
            let k = args.iter().position(|a| matches!(a, Term::Set(_)))?;
            let Term::Set(ss) = &args[k] else {
                unreachable!()
            };
            let spread: Vec<Term> = ss
                .iter()
                .map(|s| {
                    let mut inner = args.clone();
                    inner[k] = s.clone();
                    Term::Fun(f.clone(), inner)
                })
                .collect();
            Some((RuleName::OpOnSet, Term::set(spread)))
        }
        Term::Choice(es) => {
            if es.is_empty() {
                return Some((RuleName::FirstSingle, Term::empty_set()));
            }
            if es[0].is_empty_set() {
                return Some((RuleName::FirstFail, Term::Choice(es[1..].to_vec())));
            }
            if committable(&es[0], cfg) {
                return Some((RuleName::FirstSuccess, Term::set(vec![es[0].clone()])));
            }
            None
        }
        Term::UChoice(es) => {
            if es.is_empty() {
                return Some((RuleName::DcSingle, Term::empty_set()));
            }
            if let Some(k) = es.iter().position(Term::is_empty_set) {
                let mut rest = es.clone();
                rest.remove(k);
                return Some((RuleName::DcFail, Term::uchoice(rest)));
            }
            if let Some(e) = es.iter().find(|e| committable(e, cfg)) {
                return Some((RuleName::DcSuccess, Term::set(vec![e.clone()])));
            }
            None
        }
        _ => None,
    }
}

/// Every head rule applicable at `t`, with every nondeterministic variant.
/// Used by the exhaustive graph explorer.
fn head_alternatives(t: &Term, cfg: &ReductionConfig) -> Vec<(RuleName, Term)> {
    let mut out = Vec::new();
    match t {
        Term::App(u, v) => {
            if let Term::Rule(l, r, _) = u.as_ref() {
                if fire_allowed(cfg.gate, l, r, v) {
                    out.push((RuleName::Fire, fire_result(l, r, v)));
                }
            }
            if let (Term::Fun(f, fargs), Term::Fun(g, gargs)) = (u.as_ref(), v.as_ref()) {
                if f == g && fargs.len() == gargs.len() {
                    let inner: Vec<Term> = fargs
                        .iter()
                        .zip(gargs.iter())
                        .map(|(ui, vi)| Term::app(ui.clone(), vi.clone()))
                        .collect();
                    out.push((
                        RuleName::Congruence,
                        Term::set(vec![Term::Fun(f.clone(), inner)]),
                    ));
                } else {
                    out.push((RuleName::CongruenceFail, Term::empty_set()));
                }
            }
            if let Term::Set(us) = u.as_ref() {
                let apps: Vec<Term> = us
                    .iter()
                    .map(|ui| Term::app(ui.clone(), (**v).clone()))
                    .collect();
                out.push((RuleName::Distrib, Term::set(apps)));
            }
            if let Term::Set(vs) = v.as_ref() {
                let apps: Vec<Term> = vs
                    .iter()
                    .map(|vi| Term::app((**u).clone(), vi.clone()))
                    .collect();
                out.push((RuleName::Batch, Term::set(apps)));
            }
            if cfg.rule_set.first_enabled() && arg_ready(v) {
                if let Term::First(ss) = u.as_ref() {
                    let apps: Vec<Term> = ss
                        .iter()
                        .map(|si| Term::app(si.clone(), (**v).clone()))
                        .collect();
                    out.push((RuleName::First, Term::Choice(apps)));
                }
                if let Term::Dc(ss) = u.as_ref() {
                    let apps: Vec<Term> = ss
                        .iter()
                        .map(|si| Term::app(si.clone(), (**v).clone()))
                        .collect();
                    out.push((RuleName::Dc, Term::uchoice(apps)));
                }
            }
            if cfg.rule_set.traverse_enabled() {
                if let Some((rn, reduced)) = reduce_head(t, cfg, None) {
                    if matches!(rn, RuleName::TraverseSeq | RuleName::TraversePar) {
                        out.push((rn, reduced));
                    }
                }
            }
        }
        Term::Rule(l, r, local) => {
            if let Term::Set(ls) = l.as_ref() {
                let rules: Vec<Term> = ls
                    .iter()
                    .map(|li| Term::Rule(Box::new(li.clone()), r.clone(), local.clone()))
                    .collect();
                out.push((RuleName::SwitchL, Term::set(rules)));
            }
            if let Term::Set(rs) = r.as_ref() {
                let rules: Vec<Term> = rs
                    .iter()
                    .map(|ri| Term::Rule(l.clone(), Box::new(ri.clone()), local.clone()))
                    .collect();
                out.push((RuleName::SwitchR, Term::set(rules)));
            }
        }
        Term::Set(es) => {
            for (k, e) in es.iter().enumerate() {
                if matches!(e, Term::Set(_)) {
                    out.push((RuleName::Flat, flatten_at(es, k)));
                }
            }
        }
        Term::Fun(f, args) => {
            for (k, a) in args.iter().enumerate() {
                if let Term::Set(ss) = a {
                    let spread: Vec<Term> = ss
                        .iter()
                        .map(|s| {
                            let mut inner = args.clone();
                            inner[k] = s.clone();
                            Term::Fun(f.clone(), inner)
                        })
                        .collect();
                    out.push((RuleName::OpOnSet, Term::set(spread)));
                }
            }
        }
        Term::Choice(es) => {
            if es.is_empty() {
                out.push((RuleName::FirstSingle, Term::empty_set()));
            } else {
                if es[0].is_empty_set() {
                    out.push((RuleName::FirstFail, Term::Choice(es[1..].to_vec())));
                }
                if committable(&es[0], cfg) {
                    out.push((RuleName::FirstSuccess, Term::set(vec![es[0].clone()])));
                }
            }
        }
        Term::UChoice(es) => {
            if es.is_empty() {
                out.push((RuleName::DcSingle, Term::empty_set()));
            } else {
                if let Some(k) = es.iter().position(Term::is_empty_set) {
                    let mut rest = es.clone();
                    rest.remove(k);
                    out.push((RuleName::DcFail, Term::uchoice(rest)));
                }
                for e in es {
                    if committable(e, cfg) {
                        out.push((RuleName::DcSuccess, Term::set(vec![e.clone()])));
                    }
                }
            }
        }
        _ => {}
    }
    out
}

fn flatten_at(es: &[Term], k: usize) -> Term {
    let mut merged: Vec<Term> = Vec::with_capacity(es.len());
    for (i, e) in es.iter().enumerate() {
        if i == k {
            if let Term::Set(inner) = e {
                merged.extend(inner.iter().cloned());
            }
        } else {
            merged.push(e.clone());
        }
    }
    Term::set(merged)
}

/// A closed, failure-free term with no remaining radical: the commit
/// condition of the pending-choice success rules.
fn committable(t: &Term, cfg: &ReductionConfig) -> bool {
    !t.is_empty_set() && t.free_vars().is_empty() && !has_any_redex(t, cfg)
}

/// True when some reachable position of `t` admits an evaluation rule.
/// Operator arguments are inert and not searched. Under
/// `cfg.strict_radicals`, a gate-blocked rule application also counts.
pub fn has_any_redex(t: &Term, cfg: &ReductionConfig) -> bool {
    if reduce_head(t, cfg, None).is_some() {
        return true;
    }
    if cfg.strict_radicals {
        if let Term::App(u, _) = t {
            if matches!(u.as_ref(), Term::Rule(..)) {
                return true;
            }
        }
    }
    match t {
        Term::First(_) | Term::Dc(_) | Term::Phi(_) | Term::Psi(_) => false,
        Term::App(u, v) => has_any_redex(u, cfg) || has_any_redex(v, cfg),
        Term::Rule(l, r, _) => has_any_redex(l, cfg) || has_any_redex(r, cfg),
        Term::Fun(_, es) | Term::Set(es) | Term::Choice(es) | Term::UChoice(es) => {
            es.iter().any(|e| has_any_redex(e, cfg))
        }
        Term::Var(_) => false,
    }
}

/// Which evaluation rule, if any, applies at the head of `t` under `gate`.
pub fn head_redex(t: &Term, gate: StrategyGate) -> Option<RuleName> {
    let cfg = ReductionConfig::with_gate(gate);
    reduce_head(t, &cfg, None).map(|(rn, _)| rn)
}

/// One deterministic step: head rules first; at an application the argument
/// is reduced before the function; pending choices reduce their head member;
/// operator arguments are inert; elsewhere leftmost-outermost.
fn find_step(
    t: &Term,
    cfg: &ReductionConfig,
    env: Env<'_>,
    pos: &Position,
) -> Option<(RuleName, Position, Term)> {
    // Pending choices are handled inline: the commit check walks the whole
    // head, so it only runs once the head has no step left.
    match t {
        Term::Choice(es) => {
            if es.is_empty() {
                return Some((RuleName::FirstSingle, pos.clone(), Term::empty_set()));
            }
            if es[0].is_empty_set() {
                return Some((
                    RuleName::FirstFail,
                    pos.clone(),
                    Term::Choice(es[1..].to_vec()),
                ));
            }
            if let Some(found) = find_step(&es[0], cfg, env, &pos.child(1)) {
                return Some(found);
            }
            if committable(&es[0], cfg) {
                return Some((
                    RuleName::FirstSuccess,
                    pos.clone(),
                    Term::set(vec![es[0].clone()]),
                ));
            }
            return None;
        }
        Term::UChoice(es) => {
            if es.is_empty() {
                return Some((RuleName::DcSingle, pos.clone(), Term::empty_set()));
            }
            if let Some(k) = es.iter().position(Term::is_empty_set) {
                let mut rest = es.clone();
                rest.remove(k);
                return Some((RuleName::DcFail, pos.clone(), Term::uchoice(rest)));
            }
            if let Some(found) = find_step(&es[0], cfg, env, &pos.child(1)) {
                return Some(found);
            }
            if let Some(e) = es.iter().find(|e| committable(e, cfg)) {
                return Some((RuleName::DcSuccess, pos.clone(), Term::set(vec![e.clone()])));
            }
            return None;
        }
        _ => {}
    }
    if let Some((rn, reduced)) = reduce_head(t, cfg, env) {
        return Some((rn, pos.clone(), reduced));
    }
    match t {
        Term::App(u, v) => {
            find_step(v, cfg, env, &pos.child(2)).or_else(|| find_step(u, cfg, env, &pos.child(1)))
        }
        Term::Rule(l, r, local) => {
            if let Some(found) = find_step(l, cfg, env, &pos.child(1)) {
                return Some(found);
            }
            match env {
                None => find_step(r, cfg, None, &pos.child(2)),
                Some((ctx, sig)) => {
                    let fv: Vec<String> = l.free_vars().into_iter().collect();
                    let local = local
                        .clone()
                        .unwrap_or_default()
                        .restrict(fv.iter().map(String::as_str));
                    let inner = ctx.shadowed_by(&local);
                    find_step(r, cfg, Some((&inner, sig)), &pos.child(2))
                }
            }
        }
        Term::Fun(_, es) | Term::Set(es) => {
            for (i, e) in es.iter().enumerate() {
                if let Some(found) = find_step(e, cfg, env, &pos.child(i + 1)) {
                    return Some(found);
                }
            }
            None
        }
        _ => None,
    }
}

pub(crate) fn step_in_env(
    t: &Term,
    cfg: &ReductionConfig,
    env: Env<'_>,
) -> Option<(Term, StepInfo)> {
    let (rule_name, position, reduced) = find_step(t, cfg, env, &Position::root())?;
    let after = t
        .replace_at(&position, reduced)
        .expect("position comes from the walk");
    Some((
        after.clone(),
        StepInfo {
            rule_name,
            position,
            before: t.clone(),
            after,
        },
    ))
}

/// Applies exactly one evaluation rule at the deterministically selected
/// redex, if any.
pub fn step(t: &Term, cfg: &ReductionConfig) -> Option<(Term, StepInfo)> {
    step_in_env(t, cfg, None)
}

/// Iterates `step` until a normal form or the step budget is hit.
pub fn normalize(t: &Term, cfg: &ReductionConfig) -> NormalizeResult {
    let mut current = t.clone();
    let mut steps = 0usize;
    let mut trace = cfg.trace.then(Vec::new);
    while steps < cfg.max_steps {
        let Some((rule_name, position, reduced)) =
            find_step(&current, cfg, None, &Position::root())
        else {
            return NormalizeResult::normal_form(current, steps, trace);
        };
        let after = current
            .replace_at(&position, reduced)
            .expect("valid position");
        if let Some(tr) = trace.as_mut() {
            tr.push(StepInfo {
                rule_name,
                position,
                before: current.clone(),
                after: after.clone(),
            });
        }
        current = after;
        steps += 1;
    }
    NormalizeResult::step_limit(current, steps, trace)
}

/// The exhaustive one-step successor relation: every applicable rule at
/// every reachable position (operator arguments stay inert), Fire still
/// gate-filtered, dc enumerated over all branches.
pub fn successors(t: &Term, cfg: &ReductionConfig) -> Vec<(RuleName, Position, Term)> {
    let mut out = Vec::new();
    collect_successors(t, t, cfg, &Position::root(), &mut out);
    out
}

fn collect_successors(
    root: &Term,
    t: &Term,
    cfg: &ReductionConfig,
    pos: &Position,
    out: &mut Vec<(RuleName, Position, Term)>,
) {
    for (rn, reduced) in head_alternatives(t, cfg) {
        let whole = root.replace_at(pos, reduced).expect("valid position");
        out.push((rn, pos.clone(), whole));
    }
    match t {
        Term::First(_) | Term::Dc(_) | Term::Phi(_) | Term::Psi(_) | Term::Var(_) => {}
        Term::App(u, v) => {
            collect_successors(root, u, cfg, &pos.child(1), out);
            collect_successors(root, v, cfg, &pos.child(2), out);
        }
        Term::Rule(l, r, _) => {
            collect_successors(root, l, cfg, &pos.child(1), out);
            collect_successors(root, r, cfg, &pos.child(2), out);
        }
        Term::Fun(_, es) | Term::Set(es) | Term::Choice(es) | Term::UChoice(es) => {
            for (i, e) in es.iter().enumerate() {
                collect_successors(root, e, cfg, &pos.child(i + 1), out);
            }
        }
    }
}

/// The reduction graph explored breadth-first up to the given limits.
#[derive(Debug, Clone)]
pub struct ReductionGraph {
    pub nodes: Vec<Term>,
    pub edges: Vec<(usize, RuleName, usize)>,
    /// Nodes whose successors were computed.
    pub expanded: Vec<bool>,
    /// Set when a limit cut exploration short.
    pub truncated: bool,
}

impl ReductionGraph {
    /// Expanded nodes with no outgoing edge.
    pub fn normal_forms(&self) -> Vec<&Term> {
        let mut has_out = vec![false; self.nodes.len()];
        for (src, _, _) in &self.edges {
            has_out[*src] = true;
        }
        self.nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.expanded[*i] && !has_out[*i])
            .map(|(_, t)| t)
            .collect()
    }
}

/// Exhaustively enumerates reductions from `t`, breadth-first, bounded by a
/// node budget and a depth budget.
pub fn reduction_graph(
    t: &Term,
    gate: StrategyGate,
    node_limit: usize,
    depth_limit: usize,
) -> ReductionGraph {
    let cfg = ReductionConfig::with_gate(gate);
    let mut nodes: Vec<Term> = vec![t.clone()];
    let mut ids: HashMap<Term, usize> = HashMap::from([(t.clone(), 0)]);
    let mut edges = Vec::new();
    let mut expanded = vec![false];
    let mut truncated = false;
    let mut frontier: Vec<usize> = vec![0];

    for _depth in 0..depth_limit {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for id in frontier.drain(..) {
            if expanded[id] {
                continue;
            }
            expanded[id] = true;
            let from = nodes[id].clone();
            for (rn, _pos, succ) in successors(&from, &cfg) {
                let sid = match ids.get(&succ) {
                    Some(&sid) => sid,
                    None => {
                        if nodes.len() >= node_limit {
                            truncated = true;
                            continue;
                        }
                        let sid = nodes.len();
                        nodes.push(succ.clone());
                        ids.insert(succ, sid);
                        expanded.push(false);
                        next.push(sid);
                        sid
                    }
                };
                edges.push((id, rn, sid));
            }
        }
        frontier = next;
    }
    if frontier.iter().any(|&id| !expanded[id]) {
        truncated = true;
    }
    ReductionGraph {
        nodes,
        edges,
        expanded,
        truncated,
    }
}
