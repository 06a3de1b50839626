//! Concrete syntax: a lexer, a recursive-descent parser for signature
//! declarations, type profiles and terms, and the pretty-printer the
//! engine's traces and results use.

use std::fmt;

use crate::combinators::{
    make_fixpoint, make_id, make_normalizer, make_recursor, make_seq, make_traverse, make_try,
    NormalizerKind, RecursorKind, TraverseKind,
};
use crate::term::{Profile, Signature, Term, FRESH_PREFIX};
use crate::typing::{Context, Type};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at {}:{}: {}",
            self.line, self.col, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Reserved(String),
    Arrow,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Lt,
    Shl,
    Gt,
    Shr,
    Comma,
    Semi,
    Colon,
    Slash,
    Star,
    Nat(usize),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok| {
            out.push(Spanned {
                tok,
                line: tline,
                col: tcol,
            })
        };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '%' => {
                // comment to end of line
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '-' if bytes.get(i + 1) == Some(&'>') => {
                push(Tok::Arrow);
                i += 1;
                col += 1;
            }
            '(' => push(Tok::LParen),
            ')' => push(Tok::RParen),
            '[' => push(Tok::LBrack),
            ']' => push(Tok::RBrack),
            '{' => push(Tok::LBrace),
            '}' => push(Tok::RBrace),
            '<' if bytes.get(i + 1) == Some(&'<') => {
                push(Tok::Shl);
                i += 1;
                col += 1;
            }
            '<' => push(Tok::Lt),
            '>' if bytes.get(i + 1) == Some(&'>') => {
                push(Tok::Shr);
                i += 1;
                col += 1;
            }
            '>' => push(Tok::Gt),
            ',' => push(Tok::Comma),
            ';' => push(Tok::Semi),
            ':' => push(Tok::Colon),
            '/' => push(Tok::Slash),
            '*' => push(Tok::Star),
            FRESH_PREFIX => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(ParseError {
                        line,
                        col,
                        message: format!("stray `{FRESH_PREFIX}`"),
                    });
                }
                let name: String = bytes[i..j].iter().collect();
                col += j - i - 1;
                i = j - 1;
                out.push(Spanned {
                    tok: Tok::Reserved(name),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let n: usize = bytes[i..j].iter().collect::<String>().parse().unwrap();
                col += j - i - 1;
                i = j - 1;
                out.push(Spanned {
                    tok: Tok::Nat(n),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_alphanumeric() || bytes[j] == '_' || bytes[j] == '\'')
                {
                    j += 1;
                }
                let name: String = bytes[i..j].iter().collect();
                col += j - i - 1;
                i = j - 1;
                out.push(Spanned {
                    tok: Tok::Ident(name),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "id", "fail", "try", "first", "dc", "phi", "psi", "theta", "bottomup", "topdown", "oncebu",
    "oncetd", "repeat", "im", "om", "seq",
];

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    pub typed: bool,
    pub expand_traverse: bool,
    /// Accept reserved (machine-generated) variable names; used to
    /// round-trip engine output.
    pub allow_reserved: bool,
}

/// One parsed item: declarations update the parser's signature in place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Declaration,
    Term(Term),
}

pub struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    pub sig: Signature,
    opts: ParseOptions,
}

impl Parser {
    pub fn new(src: &str, opts: ParseOptions) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            sig: Signature::new(),
            opts,
        })
    }

    pub fn with_signature(
        src: &str,
        sig: Signature,
        opts: ParseOptions,
    ) -> Result<Parser, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            sig,
            opts,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// Parses the next `;`-terminated item, or `None` at end of input.
    pub fn next_statement(&mut self) -> Result<Option<Statement>, ParseError> {
        if self.at_end() {
            return Ok(None);
        }
        match self.peek() {
            Some(Tok::Ident(kw)) if kw == "sig" => {
                self.bump();
                self.parse_sig_decl()?;
                Ok(Some(Statement::Declaration))
            }
            Some(Tok::Ident(kw)) if kw == "prof" => {
                self.bump();
                self.parse_prof_decl()?;
                Ok(Some(Statement::Declaration))
            }
            _ => {
                let t = self.parse_term()?;
                self.eat(&Tok::Semi, "`;` after term")?;
                Ok(Some(Statement::Term(t)))
            }
        }
    }

    fn parse_sig_decl(&mut self) -> Result<(), ParseError> {
        loop {
            let name = match self.bump() {
                Some(Tok::Ident(n)) => n,
                _ => return Err(self.error("expected symbol name")),
            };
            if KEYWORDS.contains(&name.as_str()) {
                return Err(self.error(format!("`{name}` is a reserved keyword")));
            }
            self.eat(&Tok::Slash, "`/` and an arity")?;
            let arity = match self.bump() {
                Some(Tok::Nat(n)) => n,
                _ => return Err(self.error("expected an arity")),
            };
            self.sig
                .declare(&name, arity)
                .map_err(|e| self.error(e.to_string()))?;
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(Tok::Semi) => return Ok(()),
                _ => return Err(self.error("expected `,` or `;`")),
            }
        }
    }

    fn parse_prof_decl(&mut self) -> Result<(), ParseError> {
        let name = match self.bump() {
            Some(Tok::Ident(n)) => n,
            _ => return Err(self.error("expected symbol name")),
        };
        self.eat(&Tok::Colon, "`:`")?;
        let profile = if self.peek() == Some(&Tok::LParen) {
            // (T1, ..., Tn) -> T
            self.bump();
            let mut args = Vec::new();
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.parse_type()?);
                    match self.bump() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RParen) => break,
                        _ => return Err(self.error("expected `,` or `)`")),
                    }
                }
            } else {
                self.bump();
            }
            self.eat(&Tok::Arrow, "`->` and a result type")?;
            let result = self.parse_type()?;
            Profile { args, result }
        } else {
            Profile {
                args: Vec::new(),
                result: self.parse_type()?,
            }
        };
        self.eat(&Tok::Semi, "`;`")?;
        self.sig
            .declare_profile(&name, profile)
            .map_err(|e| self.error(e.to_string()))?;
        Ok(())
    }

    fn parse_type(&mut self) -> Result<Type, ParseError> {
        let head = self.parse_type_atom()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rest = self.parse_type()?;
            Ok(Type::arrow(head, rest))
        } else {
            Ok(head)
        }
    }

    fn parse_type_atom(&mut self) -> Result<Type, ParseError> {
        match self.bump() {
            Some(Tok::Ident(n)) => Ok(Type::atomic(n)),
            Some(Tok::LParen) => {
                let t = self.parse_type()?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.error("expected a type")),
        }
    }

    /// Parses one term (rules are right-associative and bind loosest).
    pub fn parse_term(&mut self) -> Result<Term, ParseError> {
        let mut anns = Vec::new();
        let t = self.parse_rule(&mut anns)?;
        if let Some((v, _)) = anns.first() {
            return Err(self.error(format!("annotation on `{v}` outside a rule left-hand side")));
        }
        Ok(t)
    }

    fn parse_rule(&mut self, anns: &mut Vec<(String, Type)>) -> Result<Term, ParseError> {
        let mut lhs_anns = Vec::new();
        let lhs = self.parse_primary(&mut lhs_anns)?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let mut rhs_anns = Vec::new();
            let rhs = self.parse_rule(&mut rhs_anns)?;
            if let Some((v, _)) = rhs_anns.first() {
                return Err(
                    self.error(format!("annotation on `{v}` outside a rule left-hand side"))
                );
            }
            let ctx = if lhs_anns.is_empty() {
                None
            } else {
                let mut ctx = Context::empty();
                for (v, ty) in lhs_anns {
                    ctx.insert(v, ty).map_err(|e| self.error(e.to_string()))?;
                }
                Some(ctx)
            };
            Ok(Term::Rule(Box::new(lhs), Box::new(rhs), ctx))
        } else {
            anns.extend(lhs_anns);
            Ok(lhs)
        }
    }

    fn parse_term_list(
        &mut self,
        close: &Tok,
        what: &str,
        anns: &mut Vec<(String, Type)>,
    ) -> Result<Vec<Term>, ParseError> {
        let mut out = Vec::new();
        if self.peek() == Some(close) {
            self.bump();
            return Ok(out);
        }
        loop {
            out.push(self.parse_rule(anns)?);
            if self.peek() == Some(&Tok::Comma) {
                self.bump();
                continue;
            }
            self.eat(close, what)?;
            return Ok(out);
        }
    }

    fn close_choice(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Gt) => {
                self.bump();
                Ok(())
            }
            Some(Tok::Shr) => {
                // Split `>>` into two `>`: consume one half.
                self.toks[self.pos].tok = Tok::Gt;
                Ok(())
            }
            _ => Err(self.error("expected `>`")),
        }
    }

    fn close_uchoice(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Shr) => {
                self.bump();
                Ok(())
            }
            Some(Tok::Gt) => {
                self.bump();
                self.close_choice()
            }
            _ => Err(self.error("expected `>>`")),
        }
    }

    fn parse_choice_list(
        &mut self,
        unordered: bool,
        anns: &mut Vec<(String, Type)>,
    ) -> Result<Vec<Term>, ParseError> {
        let mut out = Vec::new();
        let closes =
            |p: &mut Parser| -> bool { matches!(p.peek(), Some(Tok::Gt) | Some(Tok::Shr)) };
        if closes(self) {
            if unordered {
                self.close_uchoice()?;
            } else {
                self.close_choice()?;
            }
            return Ok(out);
        }
        loop {
            out.push(self.parse_rule(anns)?);
            if self.peek() == Some(&Tok::Comma) {
                self.bump();
                continue;
            }
            if unordered {
                self.close_uchoice()?;
            } else {
                self.close_choice()?;
            }
            return Ok(out);
        }
    }

    fn parse_args(&mut self, anns: &mut Vec<(String, Type)>) -> Result<Vec<Term>, ParseError> {
        self.eat(&Tok::LParen, "`(`")?;
        self.parse_term_list(&Tok::RParen, "`)`", anns)
    }

    fn parse_keyword(
        &mut self,
        kw: &str,
        anns: &mut Vec<(String, Type)>,
    ) -> Result<Term, ParseError> {
        let arg_count = |args: &[Term], n: usize, p: &Parser| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(p.error(format!("`{kw}` takes {n} argument(s)")))
            }
        };
        match kw {
            "id" => Ok(make_id()),
            "fail" => Ok(crate::combinators::make_fail()),
            "theta" => Ok(make_fixpoint()),
            "try" => {
                let mut args = self.parse_args(anns)?;
                arg_count(&args, 1, self)?;
                Ok(make_try(args.remove(0)))
            }
            "seq" => {
                let mut args = self.parse_args(anns)?;
                arg_count(&args, 2, self)?;
                let v = args.remove(1);
                let u = args.remove(0);
                Ok(make_seq(u, v))
            }
            "first" => {
                let args = self.parse_args(anns)?;
                if args.is_empty() {
                    return Err(self.error("`first` takes at least one argument"));
                }
                Ok(Term::first(args))
            }
            "dc" => {
                let args = self.parse_args(anns)?;
                if args.is_empty() {
                    return Err(self.error("`dc` takes at least one argument"));
                }
                Ok(Term::dc(args))
            }
            "phi" | "psi" => {
                let mut args = self.parse_args(anns)?;
                arg_count(&args, 1, self)?;
                let kind = if kw == "phi" {
                    TraverseKind::Phi
                } else {
                    TraverseKind::Psi
                };
                make_traverse(kind, args.remove(0), &self.sig, self.opts.expand_traverse)
                    .map_err(|e| self.error(e.to_string()))
            }
            "bottomup" | "topdown" | "oncebu" | "oncetd" => {
                let mut args = self.parse_args(anns)?;
                arg_count(&args, 1, self)?;
                let kind = match kw {
                    "bottomup" => RecursorKind::BottomUp,
                    "topdown" => RecursorKind::TopDown,
                    "oncebu" => RecursorKind::OnceBu,
                    _ => RecursorKind::OnceTd,
                };
                Ok(make_recursor(kind, args.remove(0)))
            }
            "repeat" => {
                self.eat(&Tok::Star, "`*` (the keyword is `repeat*`)")?;
                let mut args = self.parse_args(anns)?;
                arg_count(&args, 1, self)?;
                Ok(make_recursor(RecursorKind::RepeatStar, args.remove(0)))
            }
            "im" | "om" => {
                let mut args = self.parse_args(anns)?;
                arg_count(&args, 1, self)?;
                let kind = if kw == "im" {
                    NormalizerKind::Im
                } else {
                    NormalizerKind::Om
                };
                make_normalizer(kind, args.remove(0)).map_err(|e| self.error(e.to_string()))
            }
            _ => unreachable!("keyword list covers all cases"),
        }
    }

    fn parse_primary(&mut self, anns: &mut Vec<(String, Type)>) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LBrack) => {
                self.bump();
                let fun = self.parse_rule(anns)?;
                self.eat(&Tok::RBrack, "`]`")?;
                self.eat(&Tok::LParen, "`(` after `[...]`")?;
                let arg = self.parse_rule(anns)?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(Term::app(fun, arg))
            }
            Some(Tok::LBrace) => {
                self.bump();
                let elems = self.parse_term_list(&Tok::RBrace, "`}`", anns)?;
                Ok(Term::set(elems))
            }
            Some(Tok::Lt) => {
                self.bump();
                let elems = self.parse_choice_list(false, anns)?;
                Ok(Term::Choice(elems))
            }
            Some(Tok::Shl) => {
                self.bump();
                let elems = self.parse_choice_list(true, anns)?;
                Ok(Term::uchoice(elems))
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.parse_rule(anns)?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::Reserved(name)) => {
                if !self.opts.allow_reserved {
                    return Err(self.error(format!(
                        "`{name}` uses the reserved `{FRESH_PREFIX}` prefix"
                    )));
                }
                self.bump();
                Ok(Term::var(name))
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                if KEYWORDS.contains(&name.as_str()) {
                    return self.parse_keyword(&name, anns);
                }
                if let Some(arity) = self.sig.arity(&name) {
                    if arity == 0 {
                        return Ok(Term::cst(name));
                    }
                    let args = self.parse_args(anns)?;
                    if args.len() != arity {
                        return Err(self.error(format!(
                            "`{name}` has arity {arity} but got {} argument(s)",
                            args.len()
                        )));
                    }
                    return Ok(Term::fun(name, args));
                }
                if self.peek() == Some(&Tok::LParen) {
                    return Err(self.error(format!("unknown symbol `{name}`")));
                }
                // Undeclared identifiers are variables.
                if self.opts.typed && self.peek() == Some(&Tok::Colon) {
                    self.bump();
                    let ty = self.parse_type_atom()?;
                    anns.push((name.clone(), ty));
                }
                Ok(Term::var(name))
            }
            _ => Err(self.error("expected a term")),
        }
    }
}

/// Parses a single term against a fixed signature.
pub fn parse_term(src: &str, sig: &Signature, opts: ParseOptions) -> Result<Term, ParseError> {
    let mut p = Parser::with_signature(src, sig.clone(), opts)?;
    let t = p.parse_term()?;
    if !p.at_end() {
        return Err(p.error("trailing input after term"));
    }
    Ok(t)
}

fn print_list(out: &mut String, ts: &[Term], typed_lhs: Option<&Context>) {
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        print_into(out, t, typed_lhs);
    }
}

fn print_into(out: &mut String, t: &Term, lhs_ctx: Option<&Context>) {
    match t {
        Term::Var(x) => {
            out.push_str(x);
            if let Some(ctx) = lhs_ctx {
                if let Some(ty) = ctx.get(x) {
                    out.push(':');
                    match ty {
                        Type::Atomic(n) => out.push_str(n),
                        arrow => {
                            out.push('(');
                            out.push_str(&arrow.to_string());
                            out.push(')');
                        }
                    }
                }
            }
        }
        Term::Fun(f, args) => {
            out.push_str(f);
            if !args.is_empty() {
                out.push('(');
                print_list(out, args, lhs_ctx);
                out.push(')');
            }
        }
        Term::Set(es) => {
            out.push('{');
            print_list(out, es, lhs_ctx);
            out.push('}');
        }
        Term::Rule(l, r, ctx) => {
            let lhs_mode = ctx.as_ref();
            if matches!(l.as_ref(), Term::Rule(..)) {
                out.push('(');
                print_into(out, l, lhs_mode);
                out.push(')');
            } else {
                print_into(out, l, lhs_mode);
            }
            out.push_str(" -> ");
            print_into(out, r, None);
        }
        Term::App(f, a) => {
            out.push('[');
            print_into(out, f, lhs_ctx);
            out.push_str("](");
            print_into(out, a, lhs_ctx);
            out.push(')');
        }
        Term::First(es) => {
            out.push_str("first(");
            print_list(out, es, lhs_ctx);
            out.push(')');
        }
        Term::Dc(es) => {
            out.push_str("dc(");
            print_list(out, es, lhs_ctx);
            out.push(')');
        }
        Term::Choice(es) => {
            out.push('<');
            // Keep `<` and a following choice opener apart so the lexer's
            // maximal munch reads the term back.
            if matches!(es.first(), Some(Term::Choice(_)) | Some(Term::UChoice(_))) {
                out.push(' ');
            }
            print_list(out, es, lhs_ctx);
            out.push('>');
        }
        Term::UChoice(es) => {
            out.push_str("<<");
            print_list(out, es, lhs_ctx);
            out.push_str(">>");
        }
        Term::Phi(r) => {
            out.push_str("phi(");
            print_into(out, r, lhs_ctx);
            out.push(')');
        }
        Term::Psi(r) => {
            out.push_str("psi(");
            print_into(out, r, lhs_ctx);
            out.push(')');
        }
    }
}

/// Renders a term in the concrete syntax.
pub fn print(t: &Term) -> String {
    let mut out = String::new();
    print_into(&mut out, t, None);
    out
}
