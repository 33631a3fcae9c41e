use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eqnpe::bench::{self, BenchSpec, Workload};
use eqnpe::narrow::{narrow_steps, to_dot, Status};
use eqnpe::pe::{resultant_theory, specialize, unfold_one, PeConfig, DEFAULT_MAX_ITER};
use eqnpe::rewrite::{compile, normalize, CompiledTheory};
use eqnpe::syntax::{parse_module, print_module, show, show_pretty, Module, ModuleOut};
use eqnpe::{Error, Term};

#[derive(Parser)]
#[command(name = "eqnpe", version, about = "Partial evaluation of equational programs modulo axioms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Specialize a module for one or more calls.
    Specialize(SpecializeArgs),
    /// Compare an original and a specialized module on generated input.
    Bench(BenchArgs),
    /// Print the normal form of a term.
    Normalize(TermArgs),
    /// Print the one-step narrowings of a term, or its whole tree with --dot.
    Narrow(NarrowArgs),
    /// Print the folding variant tree of a term level by level, cut by the whistle.
    Variants(VariantArgs),
}

#[derive(Args)]
struct Lets {
    /// Ground abbreviation usable in terms, as NAME=TERM.
    #[arg(long = "let", value_name = "NAME=TERM")]
    lets: Vec<String>,
}

#[derive(Args)]
struct SpecializeArgs {
    file: PathBuf,
    /// Specialization call; repeat for several.
    #[arg(long = "call", required = true)]
    calls: Vec<String>,
    #[command(flatten)]
    lets: Lets,
    /// Operator name for a call, as CALL=NAME.
    #[arg(long = "name", value_name = "CALL=NAME")]
    names: Vec<String>,
    /// Keep the resultants over the original symbols.
    #[arg(long)]
    no_rename: bool,
    #[arg(long, default_value_t = eqnpe::narrow::DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// JSON-lines trace of iterations, whistles and abstraction decisions.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Graphviz file with the final unfolding trees.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Output file, `<input>.spec.fmod` by default; `-` for stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    original: PathBuf,
    specialized: PathBuf,
    /// Call on the original module with one `$` for the input.
    #[arg(long)]
    call: String,
    /// Call on the specialized module with one `$` for the input.
    #[arg(long)]
    spec_call: String,
    #[command(flatten)]
    lets: Lets,
    /// parser, tree or graph; guessed from the original module when absent.
    #[arg(long)]
    workload: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = bench::DEFAULT_RUNS)]
    runs: usize,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TermArgs {
    file: PathBuf,
    term: String,
    #[command(flatten)]
    lets: Lets,
}

#[derive(Args)]
struct NarrowArgs {
    file: PathBuf,
    term: String,
    #[command(flatten)]
    lets: Lets,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long, default_value_t = eqnpe::narrow::DEFAULT_MAX_DEPTH)]
    max_depth: usize,
}

#[derive(Args)]
struct VariantArgs {
    file: PathBuf,
    term: String,
    #[command(flatten)]
    lets: Lets,
    #[arg(long, default_value_t = eqnpe::narrow::DEFAULT_MAX_DEPTH)]
    max_depth: usize,
}

/// Error with the exit code it maps to.
struct Fail(u8, anyhow::Error);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let code = match e {
            Error::NonConvergence(_) | Error::NonTermination(_) | Error::NotClosed(_) | Error::SolverLimit(_) => 2,
            _ => 1,
        };
        Fail(code, e.into())
    }
}

impl From<anyhow::Error> for Fail {
    fn from(e: anyhow::Error) -> Fail {
        Fail(1, e)
    }
}

type R<T> = std::result::Result<T, Fail>;

fn load(path: &Path) -> R<Module> {
    let src = fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    parse_module(&src).map_err(|e| Fail(1, anyhow::anyhow!("{}: {e}", path.display())))
}

fn split_pair(s: &str, what: &str) -> R<(String, String)> {
    match s.split_once('=') {
        Some((a, b)) if !a.trim().is_empty() => Ok((a.trim().to_string(), b.trim().to_string())),
        _ => Err(Fail(1, anyhow::anyhow!("expected {what}, got `{s}`"))),
    }
}

fn lets(m: &Module, l: &Lets) -> R<Vec<(String, Term)>> {
    let mut out: Vec<(String, Term)> = Vec::new();
    for s in &l.lets {
        let (n, text) = split_pair(s, "NAME=TERM")?;
        let t = parse_with(m, &out, &text)?;
        if !t.is_ground() {
            return Err(Fail(1, anyhow::anyhow!("--let {n} must be ground")));
        }
        out.push((n, t));
    }
    Ok(out)
}

fn parse_with(m: &Module, lets: &[(String, Term)], text: &str) -> R<Term> {
    let mut tp = m.term_parser();
    for (n, t) in lets {
        tp.lets.insert(n.clone(), t.clone());
    }
    Ok(tp.parse(text)?)
}

fn compiled(m: &Module) -> R<CompiledTheory> {
    Ok(compile(m.theory.clone())?)
}

fn cmd_specialize(a: SpecializeArgs) -> R<()> {
    let m = load(&a.file)?;
    let ls = lets(&m, &a.lets)?;
    let calls = a.calls.iter().map(|c| parse_with(&m, &ls, c)).collect::<R<Vec<_>>>()?;
    let mut names = Vec::new();
    for n in &a.names {
        let (call, name) = split_pair(n, "CALL=NAME")?;
        names.push((parse_with(&m, &ls, &call)?, name));
    }
    let ct = compiled(&m)?;
    let cfg = PeConfig { max_depth: a.max_depth, max_iter: a.max_iter };
    let out = specialize(&ct, &calls, &cfg, !a.no_rename, &names)?;
    let th = &*m.theory;
    if let Some(p) = &a.trace {
        fs::write(p, out.state.trace.to_jsonl()).map_err(anyhow::Error::from)?;
    }
    if let Some(p) = &a.dot {
        let dots: String = out.state.trees.iter().map(|t| to_dot(t, m.sig())).collect();
        fs::write(p, dots).map_err(anyhow::Error::from)?;
    }
    let mut header = vec![format!("specialized from {}", th.name)];
    header.extend(calls.iter().map(|c| format!("call: {}", show(m.sig(), c))));
    let text = match &out.renamed {
        Some(r) => {
            header.extend(r.header(th));
            let mut mo = ModuleOut::of_theory(&r.theory);
            mo.header = header;
            print_module(&mo)
        }
        None => {
            let rt = resultant_theory(&format!("{}-SPEC", th.name), &out.resultants, th)?;
            let mut mo = ModuleOut::of_theory(&rt);
            mo.header = header;
            print_module(&mo)
        }
    };
    let dest = a.output.clone().unwrap_or_else(|| a.file.with_extension("spec.fmod"));
    if dest.as_os_str() == "-" {
        print!("{text}");
    } else {
        fs::write(&dest, &text).map_err(anyhow::Error::from)?;
        eprintln!(
            "{} calls, {} equations, {} iterations -> {}",
            out.state.calls.len(),
            out.resultants.len(),
            out.state.iterations,
            dest.display()
        );
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> R<()> {
    let mo = load(&a.original)?;
    let ms = load(&a.specialized)?;
    let ls = lets(&mo, &a.lets)?;
    let workload = match &a.workload {
        Some(w) => Workload::parse(w).ok_or_else(|| anyhow::anyhow!("unknown workload `{w}`"))?,
        None => Workload::detect(mo.sig()).ok_or_else(|| anyhow::anyhow!("cannot guess the workload; pass --workload"))?,
    };
    let co = compiled(&mo)?;
    let cs = compiled(&ms)?;
    let spec = BenchSpec {
        original: &co,
        specialized: &cs,
        original_template: &a.call,
        specialized_template: &a.spec_call,
        workload,
        size: a.size,
        seed: a.seed,
        runs: a.runs,
        lets: &ls,
    };
    let (r, _, _) = spec_run(spec)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r).map_err(anyhow::Error::from)?);
    } else {
        println!("size {}  runs {}", r.size, r.runs);
        println!("{:<12} {:>12} {:>12} {:>14}", "", "ms", "steps", "matches");
        println!("{:<12} {:>12.2} {:>12} {:>14}", "original", r.original.ms, r.original.steps, r.original.match_attempts);
        println!("{:<12} {:>12.2} {:>12} {:>14}", "specialized", r.specialized.ms, r.specialized.steps, r.specialized.match_attempts);
        println!("improvement {:.2}%  speedup {:.2}x", r.improvement, r.speedup());
    }
    Ok(())
}

fn spec_run(spec: BenchSpec<'_>) -> R<(bench::BenchReport, Term, Term)> {
    // deep inputs need a large stack; scoped so the borrowed modules can be used
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(bench::BIG_STACK)
            .spawn_scoped(s, || bench::run(&spec))
            .map_err(|e| Fail(1, e.into()))?
            .join()
            .map_err(|_| Fail(1, anyhow::anyhow!("bench thread panicked")))?
            .map_err(Fail::from)
    })
}

fn cmd_normalize(a: TermArgs) -> R<()> {
    let m = load(&a.file)?;
    let ls = lets(&m, &a.lets)?;
    let t = parse_with(&m, &ls, &a.term)?;
    let nf = normalize(&t, &compiled(&m)?)?;
    // abbreviations read better than their expansion
    let mut text = show_pretty(m.sig(), &nf);
    for (n, v) in &ls {
        let shown = show_pretty(m.sig(), v);
        if shown.len() > n.len() {
            text = text.replace(&shown, n);
        }
    }
    println!("{text}");
    Ok(())
}

fn cmd_narrow(a: NarrowArgs) -> R<()> {
    let m = load(&a.file)?;
    let ls = lets(&m, &a.lets)?;
    let t = parse_with(&m, &ls, &a.term)?;
    let ct = compiled(&m)?;
    let nf = normalize(&t, &ct)?;
    for s in narrow_steps(&nf, &ct)? {
        let binds: Vec<String> = s.subst.iter().map(|(v, x)| format!("{} -> {}", v.name, show(m.sig(), x))).collect();
        println!("[{}] @{} {{{}}} => {}", s.label, s.pos, binds.join(", "), show(m.sig(), &s.term));
    }
    if let Some(p) = &a.dot {
        let tree = unfold_one(&t, &ct, a.max_depth)?;
        fs::write(p, to_dot(&tree, m.sig())).map_err(anyhow::Error::from)?;
    }
    Ok(())
}

fn cmd_variants(a: VariantArgs) -> R<()> {
    let m = load(&a.file)?;
    let ls = lets(&m, &a.lets)?;
    let t = parse_with(&m, &ls, &a.term)?;
    let ct = compiled(&m)?;
    let tree = unfold_one(&t, &ct, a.max_depth)?;
    let deepest = tree.nodes.iter().map(|n| n.depth).max().unwrap_or(0);
    for d in 0..=deepest {
        println!("level {d}:");
        for n in tree.nodes.iter().filter(|n| n.depth == d) {
            let binds: Vec<String> = n.subst.iter().map(|(v, x)| format!("{} -> {}", v.name, show(m.sig(), x))).collect();
            let mark = match n.status {
                Status::Expanded => "",
                Status::Leaf(_) => "  [leaf]",
                Status::Folded(_) => "  [folded]",
            };
            println!("  ({}, {{{}}}){mark}", show(m.sig(), &n.term), binds.join(", "));
        }
    }
    if tree.depth_exceeded {
        eprintln!("warning: depth bound {} reached", a.max_depth);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Specialize(a) => cmd_specialize(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Normalize(a) => cmd_normalize(a),
        Cmd::Narrow(a) => cmd_narrow(a),
        Cmd::Variants(a) => cmd_variants(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
