use std::cell::RefCell;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::rc::Rc;

use clap::{Parser, ValueEnum};
use hopl_core::trace::Tracer;
use hopl_core::unify::MatchOrder;
use hopl_core::{vm, Answers, Config, Engine, Program, Query, Store};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TraceKind {
    Reduce,
    Unify,
    Vm,
}

#[derive(Parser)]
#[command(name = "hoplc", version, about = "Higher-order Horn clause interpreter and VM")]
struct Args {
    /// Program files, consulted in order. Queries in them (`?- G.`) are run.
    files: Vec<PathBuf>,
    /// Run this query after the files and exit.
    #[arg(short = 'e', long = "eval", value_name = "QUERY")]
    eval: Vec<String>,
    #[arg(long, default_value = "interp", value_parser = ["interp", "vm"])]
    engine: String,
    /// Branch points allowed on one search path.
    #[arg(long, default_value_t = hopl_core::unify::DEFAULT_DEPTH)]
    depth: u32,
    /// Rewrite steps allowed per normalization.
    #[arg(long, default_value_t = hopl_core::term::DEFAULT_FUEL)]
    fuel: u64,
    #[arg(long, default_value = "imitation-first", value_parser = ["imitation-first", "projection-first"])]
    order: String,
    /// Answers to print per query in batch mode (all by default).
    #[arg(long)]
    solutions: Option<usize>,
    #[arg(long, value_enum)]
    trace: Vec<TraceKind>,
    /// Print operation counters after each query.
    #[arg(long)]
    counters: bool,
    /// Print the compiled code of a predicate.
    #[arg(long, value_name = "PRED")]
    dump_code: Vec<String>,
}

struct Session {
    program: Program,
    code: vm::Code,
    engine: Engine,
    config: Config,
    counters: bool,
}

impl Session {
    /// Streams answers; `more` decides whether to go on after each one.
    /// Returns the number of answers shown.
    fn run(&self, query: &Query, out: &mut impl Write, mut more: impl FnMut(&mut dyn Write) -> bool) -> io::Result<Result<usize, String>> {
        let store = Store::new(self.program.sig.clone());
        let mut answers = Answers::new(self.engine, &self.program, &self.code, query, self.config.clone(), store);
        let mut shown = 0;
        let mut exhausted = true;
        let mut error = None;
        for a in answers.by_ref() {
            match a {
                Ok(a) => {
                    shown += 1;
                    writeln!(out, "{}", a.display(&self.program.sig))?;
                    if !more(out) {
                        exhausted = false;
                        break;
                    }
                }
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            }
        }
        if error.is_none() && exhausted {
            if answers.depth_exceeded() {
                writeln!(out, "no (search depth exceeded)")?;
            } else {
                writeln!(out, "no")?;
            }
        }
        if self.counters {
            eprintln!("counters: {}", answers.store().counters);
        }
        Ok(match error {
            Some(e) => Err(e),
            None => Ok(shown),
        })
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<ExitCode, String> {
    let mut program = Program::new();
    let mut queries = Vec::new();
    for f in &args.files {
        let src = std::fs::read_to_string(f).map_err(|e| format!("{}: {e}", f.display()))?;
        queries.extend(program.consult(&src).map_err(|e| format!("{}: {e}", f.display()))?);
    }
    for q in &args.eval {
        queries.push(program.query(q).map_err(|e| format!("-e: {e}"))?);
    }

    let mut tracer = Tracer::new(Rc::new(RefCell::new(io::stderr())));
    tracer.reduce = args.trace.contains(&TraceKind::Reduce);
    tracer.unify = args.trace.contains(&TraceKind::Unify);
    tracer.vm = args.trace.contains(&TraceKind::Vm);
    let config = Config {
        depth: args.depth,
        fuel: args.fuel,
        order: args.order.parse::<MatchOrder>()?,
        tracer,
    };
    let code = vm::compile(&program);
    let session = Session {
        engine: args.engine.parse()?,
        program,
        code,
        config,
        counters: args.counters,
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    for name in &args.dump_code {
        let c = session.program.sig.lookup(name).ok_or_else(|| format!("unknown predicate `{name}`"))?;
        let listing = session.code.disassemble(&session.program.sig, c).ok_or_else(|| format!("`{name}` is not a predicate"))?;
        write!(out, "{listing}").map_err(|e| e.to_string())?;
    }

    if queries.is_empty() {
        if !args.dump_code.is_empty() {
            return Ok(ExitCode::SUCCESS);
        }
        drop(out);
        return repl(session).map_err(|e| e.to_string());
    }

    let limit = args.solutions.unwrap_or(usize::MAX);
    let mut last = 0;
    for q in &queries {
        let mut left = limit;
        let r = session
            .run(q, &mut out, |_| {
                left -= 1;
                left > 0
            })
            .map_err(|e| e.to_string())?;
        last = r?;
    }
    Ok(if last > 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn repl(mut session: Session) -> io::Result<ExitCode> {
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut lines = stdin.lock().lines();
    let mut out = io::stdout();
    let mut last = 0;
    loop {
        if interactive {
            write!(out, "?- ")?;
            out.flush()?;
        }
        // a query may span lines up to its terminating `.`
        let mut text = String::new();
        loop {
            let Some(line) = lines.next() else {
                return Ok(exit(last));
            };
            let line = line?;
            text.push_str(&line);
            text.push('\n');
            let t = text.trim();
            if t.is_empty() || t.ends_with('.') {
                break;
            }
        }
        let t = text.trim();
        if t.is_empty() {
            continue;
        }
        if t.trim_start_matches("?-").trim() == "halt." {
            return Ok(exit(last));
        }
        let query = match session.program.query(t) {
            Ok(q) => q,
            Err(e) => {
                writeln!(out, "error: {e}")?;
                continue;
            }
        };
        let r = session.run(&query, &mut out, |out| {
            if interactive {
                let _ = write!(out, "? ");
                let _ = out.flush();
            }
            match lines.next() {
                Some(Ok(l)) => l.trim() == ";",
                _ => false,
            }
        })?;
        match r {
            Ok(n) => last = n,
            Err(e) => writeln!(out, "error: {e}")?,
        }
    }
}

fn exit(last: usize) -> ExitCode {
    if last > 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
