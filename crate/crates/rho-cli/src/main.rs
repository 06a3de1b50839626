//! Command line front end: batch evaluation of `.rho` files, a small REPL,
//! tracing, typed checking, the de Bruijn route and DOT reduction graphs.

use std::io::{BufRead, Write};
use std::process::ExitCode;

use rho::debruijn::{rhosigma_normalize, to_debruijn};
use rho::eval::{normalize, reduction_graph, NormalizeKind, ReductionConfig, ReductionGraph};
use rho::gate::StrategyGate;
use rho::syntax::{print, ParseOptions, Parser, Statement};
use rho::term::Term;
use rho::typing::{infer_type, typed_normalize, Context};

const USAGE: &str = "usage: rho [options] [file.rho]

options:
  --strategy=NAME     none|strict|confstrat|confstratlin|confstratstable|firstorder
                      (default confstrat)
  --max-steps=N       step budget per term (default 10000, env RHO_MAX_STEPS)
  --trace             print one line per evaluation step
  --typed             check types; rule binders may carry x:A annotations
  --debruijn          also evaluate through the explicit-substitution route
  --graph             emit the reduction graph in DOT instead of evaluating
  --depth=N           graph depth budget (default 8)
  --nodes=N           graph node budget (default 2000)
  --expand-traverse   expand phi/psi over the declared signature
  --strict-radicals   gate-blocked applications count as radicals

Without a file, reads statements from standard input.
repl commands:  :t term   type of a term
                :g term   DOT reduction graph
                :q        quit";

struct Options {
    cfg: ReductionConfig,
    typed: bool,
    debruijn: bool,
    graph: bool,
    depth: usize,
    nodes: usize,
    expand_traverse: bool,
    file: Option<String>,
}

fn parse_args() -> Result<Options, String> {
    let mut cfg = ReductionConfig::default();
    if let Ok(v) = std::env::var("RHO_MAX_STEPS") {
        cfg.max_steps = v
            .parse()
            .map_err(|_| format!("bad RHO_MAX_STEPS value `{v}`"))?;
    }
    let mut opts = Options {
        cfg,
        typed: false,
        debruijn: false,
        graph: false,
        depth: 8,
        nodes: 2000,
        expand_traverse: false,
        file: None,
    };
    for arg in std::env::args().skip(1) {
        if let Some(value) = arg.strip_prefix("--strategy=") {
            opts.cfg.gate =
                StrategyGate::parse(value).ok_or_else(|| format!("unknown strategy `{value}`"))?;
        } else if let Some(value) = arg.strip_prefix("--max-steps=") {
            opts.cfg.max_steps = value
                .parse()
                .map_err(|_| format!("bad --max-steps value `{value}`"))?;
        } else if let Some(value) = arg.strip_prefix("--depth=") {
            opts.depth = value
                .parse()
                .map_err(|_| format!("bad --depth value `{value}`"))?;
        } else if let Some(value) = arg.strip_prefix("--nodes=") {
            opts.nodes = value
                .parse()
                .map_err(|_| format!("bad --nodes value `{value}`"))?;
        } else {
            match arg.as_str() {
                "--trace" => opts.cfg.trace = true,
                "--typed" => opts.typed = true,
                "--debruijn" => opts.debruijn = true,
                "--graph" => opts.graph = true,
                "--expand-traverse" => opts.expand_traverse = true,
                "--strict-radicals" => opts.cfg.strict_radicals = true,
                "--help" | "-h" => {
                    println!("{USAGE}");
                    std::process::exit(0);
                }
                _ if arg.starts_with("--") => return Err(format!("unknown option `{arg}`")),
                _ => {
                    if opts.file.is_some() {
                        return Err("more than one input file".into());
                    }
                    opts.file = Some(arg);
                }
            }
        }
    }
    Ok(opts)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn emit_dot(out: &mut impl Write, g: &ReductionGraph) -> std::io::Result<()> {
    writeln!(out, "digraph reduction {{")?;
    for (i, t) in g.nodes.iter().enumerate() {
        writeln!(out, "  n{i} [label=\"{}\"];", dot_escape(&print(t)))?;
    }
    for (src, rule, dst) in &g.edges {
        writeln!(out, "  n{src} -> n{dst} [label=\"{rule}\"];")?;
    }
    if g.truncated {
        writeln!(out, "  // truncated: budget exceeded")?;
    }
    writeln!(out, "}}")
}

/// Outcome of evaluating one term statement: the worst exit code wins.
fn eval_term(
    t: &Term,
    opts: &Options,
    parser: &Parser,
    out: &mut impl Write,
) -> std::io::Result<u8> {
    if opts.graph {
        let g = reduction_graph(t, opts.cfg.gate, opts.nodes, opts.depth);
        emit_dot(out, &g)?;
        return Ok(0);
    }
    if opts.typed {
        let ctx = Context::empty();
        match typed_normalize(&ctx, t, &opts.cfg, &parser.sig) {
            Err(e) => {
                writeln!(out, "type error: {e}")?;
                return Ok(3);
            }
            Ok(res) => {
                if let Some(trace) = &res.trace {
                    for (i, info) in trace.iter().enumerate() {
                        writeln!(out, "{}", info.trace_line(i + 1))?;
                    }
                }
                writeln!(out, "{}", print(&res.term))?;
                return Ok(if res.kind == NormalizeKind::StepLimit {
                    2
                } else {
                    0
                });
            }
        }
    }
    let res = normalize(t, &opts.cfg);
    if let Some(trace) = &res.trace {
        for (i, info) in trace.iter().enumerate() {
            writeln!(out, "{}", info.trace_line(i + 1))?;
        }
    }
    writeln!(out, "{}", print(&res.term))?;
    let mut code = if res.kind == NormalizeKind::StepLimit {
        2
    } else {
        0
    };
    if opts.debruijn {
        let referential: Vec<String> = t.free_vars().into_iter().collect();
        match to_debruijn(t, &referential) {
            Err(e) => {
                writeln!(out, "debruijn: not translatable ({e})")?;
            }
            Ok(db) => {
                let dbres = rhosigma_normalize(&db, &opts.cfg);
                writeln!(out, "debruijn: {}", dbres.term)?;
                if dbres.kind == NormalizeKind::StepLimit {
                    code = code.max(2);
                }
            }
        }
    }
    Ok(code)
}

fn run_source(source: &str, opts: &Options) -> std::io::Result<u8> {
    let popts = ParseOptions {
        typed: opts.typed,
        expand_traverse: opts.expand_traverse,
        allow_reserved: false,
    };
    let mut parser = match Parser::new(source, popts) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return Ok(3);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut worst = 0u8;
    loop {
        match parser.next_statement() {
            Err(e) => {
                eprintln!("{e}");
                return Ok(3);
            }
            Ok(None) => break,
            Ok(Some(Statement::Declaration)) => {}
            Ok(Some(Statement::Term(t))) => {
                let code = eval_term(&t, opts, &parser, &mut out)?;
                if code == 3 {
                    return Ok(3);
                }
                worst = worst.max(code);
            }
        }
    }
    Ok(worst)
}

fn repl(opts: &Options) -> std::io::Result<u8> {
    let popts = ParseOptions {
        typed: opts.typed,
        expand_traverse: opts.expand_traverse,
        allow_reserved: false,
    };
    let stdin = std::io::stdin();
    let mut sig = rho::term::Signature::new();
    let mut worst = 0u8;
    for line in stdin.lock().lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ":q" {
            break;
        }
        if let Some(rest) = line.strip_prefix(":t ") {
            let src = ensure_semi(rest);
            match Parser::with_signature(&src, sig.clone(), popts) {
                Err(e) => println!("{e}"),
                Ok(mut p) => match p.parse_term() {
                    Err(e) => println!("{e}"),
                    Ok(t) => match infer_type(&Context::empty(), &t, &sig) {
                        Ok(ty) => println!("{ty}"),
                        Err(e) => println!("type error: {e}"),
                    },
                },
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix(":g ") {
            let src = ensure_semi(rest);
            match Parser::with_signature(&src, sig.clone(), popts) {
                Err(e) => println!("{e}"),
                Ok(mut p) => match p.parse_term() {
                    Err(e) => println!("{e}"),
                    Ok(t) => {
                        let g = reduction_graph(&t, opts.cfg.gate, opts.nodes, opts.depth);
                        let stdout = std::io::stdout();
                        emit_dot(&mut stdout.lock(), &g)?;
                    }
                },
            }
            continue;
        }
        let src = ensure_semi(line);
        match Parser::with_signature(&src, sig.clone(), popts) {
            Err(e) => println!("{e}"),
            Ok(mut p) => loop {
                match p.next_statement() {
                    Err(e) => {
                        println!("{e}");
                        break;
                    }
                    Ok(None) => {
                        sig = p.sig.clone();
                        break;
                    }
                    Ok(Some(Statement::Declaration)) => {}
                    Ok(Some(Statement::Term(t))) => {
                        let stdout = std::io::stdout();
                        let code = eval_term(&t, opts, &p, &mut stdout.lock())?;
                        worst = worst.max(code);
                    }
                }
            },
        }
    }
    Ok(worst)
}

fn ensure_semi(s: &str) -> String {
    let trimmed = s.trim_end();
    if trimmed.ends_with(';') {
        trimmed.to_string()
    } else {
        format!("{trimmed};")
    }
}

fn main() -> ExitCode {
    let opts = match parse_args() {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("{msg}");
            eprintln!("{USAGE}");
            return ExitCode::from(3);
        }
    };
    let result = match &opts.file {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(src) => run_source(&src, &opts),
            Err(e) => {
                eprintln!("cannot read {path}: {e}");
                return ExitCode::from(3);
            }
        },
        None => repl(&opts),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("io error: {e}");
            ExitCode::from(3)
        }
    }
}
