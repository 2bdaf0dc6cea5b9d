//! Command-line front end.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::certify::{self, Certificate, DecompStats, VerifyOptions};
use crate::instance::{gen_random, gen_star, parse_instance, serialize_instance, PcstInstance, Solution};
use crate::iterate::{ipcst, IterError, IterOptions, IterTrace};
use crate::moat::Violation;
use crate::rational::{describe, parse_rational, to_wire, Rational};
use crate::steiner::{SteinerKind, SteinerSolver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BETA: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "pcst", version, about = "Rooted prize-collecting Steiner tree solver and certifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an instance with the iterative best-of-three algorithm.
    Solve(SolveArgs),
    /// Run the full invariant and inequality suite against exact optima.
    Verify(VerifyArgs),
    /// Exact optimum by exhaustive search (at most 16 vertices).
    Oracle {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Smallest approximation factor certified by the weighted inequalities.
    Minalpha {
        /// Steiner subroutine factor p in [1, 2].
        #[arg(long, value_parser = rational_arg)]
        p: Rational,
        #[arg(long, value_parser = rational_arg, default_value = "1e-4")]
        tol: Rational,
        #[arg(long)]
        json: bool,
    },
    /// Write a generated instance file.
    #[command(subcommand)]
    Generate(GenerateCommand),
}

#[derive(Args, Debug)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_parser = rational_arg, default_value = "1.252")]
    beta: Rational,
    #[arg(long, default_value = "exact")]
    steiner: SteinerKind,
    /// Solve the unrooted problem by trying every vertex as the root.
    #[arg(long)]
    all_roots: bool,
    /// Allow beta > 2 (voids the approximation guarantee).
    #[arg(long = "allow-beta-gt-2")]
    allow_beta_gt_2: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    file: Option<PathBuf>,
    #[arg(long, value_parser = rational_arg, default_value = "1.252")]
    beta: Rational,
    #[arg(long, default_value = "exact")]
    steiner: SteinerKind,
    /// Also check the weighted per-candidate bounds at this factor.
    #[arg(long, value_parser = rational_arg)]
    alpha: Option<Rational>,
    /// Random corpus as `max_n,count,seed`.
    #[arg(long, value_parser = corpus_arg)]
    seed_corpus: Option<(usize, usize, u64)>,
    #[arg(long)]
    json: bool,
    #[arg(long, hide = true)]
    inject_corruption: bool,
}

#[derive(Subcommand, Debug)]
enum GenerateCommand {
    /// Star where scaling penalties above 2 doubles the cost.
    Star {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = rational_arg)]
        epsilon: Rational,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Connected random instance.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 10)]
        max_weight: u32,
        #[arg(long, default_value_t = 10)]
        max_penalty: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn corpus_arg(s: &str) -> Result<(usize, usize, u64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [n, count, seed] = parts.as_slice() else {
        return Err("expected max_n,count,seed".into());
    };
    let bad = |what: &str| format!("bad {what} in `{s}`");
    Ok((
        n.parse().map_err(|_| bad("max_n"))?,
        count.parse().map_err(|_| bad("count"))?,
        seed.parse().map_err(|_| bad("seed"))?,
    ))
}

/// Failure carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn line(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", text.as_ref());
    }

    fn json(&mut self, mut report: Value, started: Instant) {
        report["wall_time_ms"] = json!(started.elapsed().as_millis() as u64);
        let _ = writeln!(self.out, "{}", serde_json::to_string_pretty(&report).expect("serializable"));
    }
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let mut io = Io { out, err };
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args, &mut io),
        Command::Verify(args) => cmd_verify(&args, &mut io),
        Command::Oracle { file, json } => cmd_oracle(&file, json, &mut io),
        Command::Minalpha { p, tol, json } => cmd_minalpha(&p, &tol, json, &mut io),
        Command::Generate(g) => cmd_generate(g, &mut io),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(io.err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn load(path: &Path) -> Result<PcstInstance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn solution_json(inst: &PcstInstance, sol: &Solution) -> Value {
    json!({
        "edges": sol.tree.edge_pairs(inst),
        "vertices": sol.tree.vertices,
        "edge_cost": to_wire(&sol.edge_cost),
        "penalty_cost": to_wire(&sol.penalty_cost),
        "total_cost": to_wire(&sol.total_cost),
    })
}

fn trace_json(trace: &IterTrace) -> Value {
    let levels: Vec<Value> = trace
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            json!({
                "level": i,
                "cost_gw": to_wire(&l.cost_gw),
                "cost_st": to_wire(&l.cost_st),
                "cost_it": l.cost_it.as_ref().map(to_wire),
                "dead": l.dead,
                "chosen": l.chosen,
                "steiner_fallback": l.steiner_fallback,
            })
        })
        .collect();
    Value::Array(levels)
}

fn stats_json(s: &DecompStats) -> Value {
    json!({
        "r_A": to_wire(&s.r_a), "r_B": to_wire(&s.r_b), "r_C": to_wire(&s.r_c), "r_D": to_wire(&s.r_d),
        "r_Bp": to_wire(&s.r_bp), "r_Bz": to_wire(&s.r_bz), "r_Dp": to_wire(&s.r_dp), "r_Dz": to_wire(&s.r_dz),
        "b1": to_wire(&s.b1), "b2": to_wire(&s.b2),
    })
}

fn solver_json(solver: &SteinerSolver) -> Value {
    json!({ "kind": solver.kind, "p": to_wire(&solver.declared_factor) })
}

fn print_solution(io: &mut Io<'_>, inst: &PcstInstance, sol: &Solution) {
    let edges: Vec<String> = sol
        .tree
        .edge_pairs(inst)
        .iter()
        .map(|(u, v)| format!("({u},{v})"))
        .collect();
    io.line(format!(
        "tree: {} vertices, edges {}",
        sol.tree.vertices.len(),
        if edges.is_empty() { "none".into() } else { edges.join(" ") }
    ));
    io.line(format!("edge cost     {}", describe(&sol.edge_cost)));
    io.line(format!("penalty cost  {}", describe(&sol.penalty_cost)));
    io.line(format!("total cost    {}", describe(&sol.total_cost)));
}

/// Same graph and penalties with `root` as the root; the previous root
/// becomes an ordinary vertex with penalty 0.
fn reroot(inst: &PcstInstance, root: usize) -> Result<PcstInstance, Failure> {
    if inst.edges().iter().any(|e| e.root_link) {
        return Err(Failure::new(EXIT_INPUT, "--all-roots does not support root-link (E0) edges"));
    }
    let edges = inst.edges().iter().map(|e| (e.u, e.v, e.weight.clone())).collect();
    let penalties: BTreeMap<usize, Rational> = inst
        .non_root_vertices()
        .filter(|&v| v != root)
        .map(|v| (v, inst.finite_penalty(v).clone()))
        .collect();
    PcstInstance::new(inst.vertex_count(), root, edges, &penalties)
        .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))
}

fn cmd_solve(args: &SolveArgs, io: &mut Io<'_>) -> CmdResult {
    let started = Instant::now();
    let inst = load(&args.file)?;
    let opts = IterOptions {
        beta: args.beta.clone(),
        solver: SteinerSolver::new(args.steiner),
        allow_beta_above_two: args.allow_beta_gt_2,
    };
    let roots: Vec<usize> = if args.all_roots {
        inst.vertices().collect()
    } else {
        vec![inst.root()]
    };
    let mut best: Option<(PcstInstance, Solution, IterTrace)> = None;
    for root in roots {
        let rooted = if root == inst.root() { inst.clone() } else { reroot(&inst, root)? };
        let (sol, trace) = ipcst(&rooted, &opts).map_err(|e| match e {
            IterError::BetaAboveTwo(_) | IterError::NonPositiveBeta(_) => Failure::new(EXIT_BETA, e.to_string()),
            other => Failure::new(EXIT_INVARIANT, other.to_string()),
        })?;
        let mut problems = trace.check_invariants(&rooted);
        if let Err(e) = sol.check(&rooted) {
            problems.push(e);
        }
        if !problems.is_empty() {
            return Err(Failure::new(EXIT_INVARIANT, format!("invariant violated: {}", problems.join("; "))));
        }
        if best.as_ref().map_or(true, |(_, b, _)| sol.total_cost < b.total_cost) {
            best = Some((rooted, sol, trace));
        }
    }
    let (rooted, sol, trace) = best.expect("at least one root");

    if args.json {
        io.json(
            json!({
                "command": "solve",
                "instance": inst.fingerprint(),
                "parameters": {
                    "beta": to_wire(&opts.beta),
                    "solver": solver_json(&opts.solver),
                    "all_roots": args.all_roots,
                },
                "root": rooted.root(),
                "solution": solution_json(&rooted, &sol),
                "depth": trace.depth,
                "trace": trace_json(&trace),
            }),
            started,
        );
        return Ok(EXIT_OK);
    }
    io.line(format!("instance      {}", &inst.fingerprint()[..16]));
    io.line(format!(
        "solver        {} (p = {}), beta = {}",
        opts.solver.kind,
        opts.solver.declared_factor,
        describe(&opts.beta)
    ));
    if args.all_roots {
        io.line(format!("best root     {}", rooted.root()));
    }
    print_solution(io, &rooted, &sol);
    io.line(format!("recursion depth {}", trace.depth));
    for (i, l) in trace.levels.iter().enumerate() {
        io.line(format!(
            "  level {i}: GW {}  ST {}  IT {}  -> {}  |K| = {}{}",
            describe(&l.cost_gw),
            describe(&l.cost_st),
            l.cost_it.as_ref().map_or("-".into(), describe),
            l.chosen,
            l.dead.len(),
            if l.steiner_fallback { "  (mst2 fallback)" } else { "" }
        ));
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, io: &mut Io<'_>) -> CmdResult {
    let started = Instant::now();
    let mut instances: Vec<(String, PcstInstance)> = Vec::new();
    if let Some(file) = &args.file {
        instances.push((file.display().to_string(), load(file)?));
    }
    if let Some((n, count, seed)) = args.seed_corpus {
        for (i, inst) in certify::corpus(n, count, seed).into_iter().enumerate() {
            instances.push((format!("corpus[{i}]"), inst));
        }
    }
    if instances.is_empty() {
        return Err(Failure::new(EXIT_INPUT, "give an instance file and/or --seed-corpus"));
    }
    if args.beta > crate::rational::int(2) || args.beta <= Rational::from_integer(0.into()) {
        return Err(Failure::new(EXIT_BETA, format!("beta must lie in (0, 2], got {}", args.beta)));
    }
    let solver = SteinerSolver::new(args.steiner);
    let opts = VerifyOptions {
        alpha: args.alpha.clone(),
        inject_corruption: args.inject_corruption,
    };
    let mut reports = Vec::new();
    let mut total = 0;
    for (name, inst) in &instances {
        let mut violations: Vec<Violation> = Vec::new();
        let cert: Certificate = certify::verify_instance(inst, &args.beta, &solver, &opts)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("{name}: {e}")))?;
        violations.extend(cert.violations.iter().cloned());
        let iter_opts = IterOptions {
            beta: args.beta.clone(),
            solver: solver.clone(),
            allow_beta_above_two: false,
        };
        let (sol, trace) = ipcst(inst, &iter_opts).map_err(|e| Failure::new(EXIT_INVARIANT, e.to_string()))?;
        violations.extend(trace.check_invariants(inst).into_iter().map(|d| Violation::new("trace", d)));
        // Below beta = 1 the scaled duals can exceed OPT, so factor two is not promised.
        let promised = args.beta >= crate::rational::int(1);
        if promised && sol.total_cost > crate::rational::int(2) * &cert.opt.total_cost {
            violations.push(Violation::new(
                "factor two",
                format!("solver cost {} > 2 * {}", sol.total_cost, cert.opt.total_cost),
            ));
        }
        total += violations.len();
        if !args.json {
            for v in &violations {
                let _ = writeln!(io.err, "{name}: {v}");
            }
        }
        reports.push(json!({
            "name": name,
            "instance": inst.fingerprint(),
            "opt": to_wire(&cert.opt.total_cost),
            "solution": to_wire(&sol.total_cost),
            "stats": stats_json(&cert.stats),
            "violations": violations,
        }));
    }
    if args.json {
        io.json(
            json!({
                "command": "verify",
                "parameters": {
                    "beta": to_wire(&args.beta),
                    "solver": solver_json(&solver),
                    "alpha": args.alpha.as_ref().map(to_wire),
                    "seed_corpus": args.seed_corpus,
                },
                "instances": reports,
                "violation_count": total,
            }),
            started,
        );
    } else {
        io.line(format!(
            "verified {} instance(s): {} violation(s)",
            instances.len(),
            total
        ));
    }
    Ok(if total == 0 { EXIT_OK } else { EXIT_VIOLATIONS })
}

fn cmd_oracle(file: &Path, as_json: bool, io: &mut Io<'_>) -> CmdResult {
    let started = Instant::now();
    let inst = load(file)?;
    let opt = certify::oracle_pcst(&inst).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    if as_json {
        io.json(
            json!({
                "command": "oracle",
                "instance": inst.fingerprint(),
                "solution": solution_json(&inst, &opt),
            }),
            started,
        );
    } else {
        print_solution(io, &inst, &opt);
    }
    Ok(EXIT_OK)
}

fn cmd_minalpha(p: &Rational, tol: &Rational, as_json: bool, io: &mut Io<'_>) -> CmdResult {
    let started = Instant::now();
    let r = certify::min_alpha(p, tol).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    if as_json {
        io.json(
            json!({
                "command": "minalpha",
                "parameters": { "p": to_wire(p), "tol": to_wire(tol) },
                "alpha": to_wire(&r.alpha),
                "beta": to_wire(&r.beta),
                "weights": r.weights.iter().map(to_wire).collect::<Vec<_>>(),
                "slacks": r.slacks.iter().map(to_wire).collect::<Vec<_>>(),
            }),
            started,
        );
        return Ok(EXIT_OK);
    }
    io.line(format!("alpha  {}", describe(&r.alpha)));
    io.line(format!("beta   {}", describe(&r.beta)));
    for (name, w) in certify::ROWS.iter().zip(&r.weights) {
        io.line(format!("w_{name:<4} {}", describe(w)));
    }
    for (term, s) in certify::TERMS.iter().zip(&r.slacks) {
        io.line(format!("slack {term:<4} {}", describe(s)));
    }
    Ok(EXIT_OK)
}

fn cmd_generate(cmd: GenerateCommand, io: &mut Io<'_>) -> CmdResult {
    let (inst, output) = match cmd {
        GenerateCommand::Star { n, epsilon, output } => (
            gen_star(n, &epsilon).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?,
            output,
        ),
        GenerateCommand::Random {
            n,
            p,
            max_weight,
            max_penalty,
            seed,
            output,
        } => (
            gen_random(n, p, max_weight, max_penalty, seed).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?,
            output,
        ),
    };
    let text = serialize_instance(&inst);
    match output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?,
        None => {
            let _ = write!(io.out, "{text}");
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("pcst").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parses_corpus_triples() {
        assert_eq!(corpus_arg("7,100,42"), Ok((7, 100, 42)));
        assert!(corpus_arg("7,100").is_err());
        assert!(corpus_arg("a,1,2").is_err());
    }

    #[test]
    fn minalpha_at_two() {
        let (code, out, _) = run(&["minalpha", "--p", "2", "--json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["alpha"], "2");
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let (code, _, err) = run(&["solve", "/nonexistent/instance.stp"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("nonexistent"));
        assert_eq!(run(&["bogus"]).0, EXIT_INPUT);
        assert_eq!(run(&["verify"]).0, EXIT_INPUT);
    }

    #[test]
    fn generated_star_prints_a_file() {
        let (code, out, _) = run(&["generate", "star", "--n", "3", "--epsilon", "0.6"]);
        assert_eq!(code, 0);
        assert_eq!(parse_instance(&out).unwrap(), gen_star(3, &crate::rational::frac(3, 5)).unwrap());
        assert_eq!(run(&["generate", "star", "--n", "3", "--epsilon", "0.4"]).0, EXIT_INPUT);
    }

    #[test]
    fn cli_default_beta_matches_library() {
        assert_eq!(rational_arg("1.252").unwrap(), crate::iterate::default_beta());
    }
}
