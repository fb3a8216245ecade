//! Command-line surface for the partition-combinatorics library.
//!
//! Every subcommand is a pure function of its flags: identical flags (seed
//! included) produce byte-identical output. JSON artifacts embed the argv
//! that produced them, so `verify --check FILE` can re-run the command and
//! compare the bytes. Exit codes: 0 success, 2 flag or input validation
//! failure, 3 numeric or verification failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Value};

use bellfrag::bigdec::parse_rat;
use bellfrag::existence::{exists_gibbs_frag, first_failing_n, ExistenceReport};
use bellfrag::frag::{ml_continuous, run_fragmentation, AffineKernel};
use bellfrag::gibbs::GibbsSpec;
use bellfrag::gw::{plane_forest_count, total_progeny_pmf, OffspringDist};
use bellfrag::kingman::{
    allelic_partition, first_split_j_exact, sample_cut_schedule, sample_first_split,
    simulate_kingman_tree, EwensSpec,
};
use bellfrag::numeric::to_f64;
use bellfrag::stats::{chi_square_gof, rng_stream, EmpiricalDist, GofReport};
use bellfrag::weights::{bc_valid, BellTable, WeightSequence};
use bellfrag::Rat;

#[derive(Parser)]
#[command(name = "bellfrag", version, about = "Weighted partition combinatorics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Partial Bell polynomial values for a weight family.
    Bell(BellArgs),
    /// Print a weight sequence, with its validity range when applicable.
    Weights(WeightsArgs),
    /// Exact Gibbs law tables, or seeded samples from the law.
    Gibbs(GibbsArgs),
    /// Sample refining paths of the splitting chain.
    Fragment(FragmentArgs),
    /// Sample the continuous-time coalescent with an affine collision kernel.
    Coalesce(CoalesceArgs),
    /// Branching-process tables: total progeny laws and forest counts.
    Gw(GwArgs),
    /// Existence reports for refining couplings between Gibbs levels.
    Existence(ExistenceArgs),
    /// Coalescent tree functionals: first-split laws and mutation fits.
    Kingman(KingmanArgs),
    /// Run the release-gate suites, or re-check an emitted JSON artifact.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct IoArgs {
    /// Output format; human-readable text when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WeightFlags {
    /// Family name (uniform, cycles, segments/lah, trees/cayley, bc) or a
    /// file of rationals, one per line.
    #[arg(long)]
    weights: String,
    /// Slope parameter for the bc family, as `p/q` or a decimal.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Offset parameter for the bc family, as `p/q` or a decimal.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
}

#[derive(Args)]
struct BellArgs {
    /// Ground-set size.
    #[arg(long)]
    n: u32,
    /// Block count; the whole column k = 1..n when omitted.
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    weights: WeightFlags,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct WeightsArgs {
    /// Number of weights to print.
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    weights: WeightFlags,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct GibbsArgs {
    /// Ground-set size.
    #[arg(long)]
    n: u32,
    /// Block count.
    #[arg(long)]
    k: u32,
    #[command(flatten)]
    weights: WeightFlags,
    /// Draw this many samples instead of printing the exact law.
    #[arg(long)]
    samples: Option<u64>,
    /// Sampler seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct FragmentArgs {
    /// Ground-set size.
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    weights: WeightFlags,
    /// Number of paths to sample.
    #[arg(long, default_value_t = 1)]
    samples: u64,
    /// Sampler seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct CoalesceArgs {
    /// Number of initial singletons.
    #[arg(long)]
    n: u32,
    /// Kernel slope: pairs of sizes i, j merge at rate 2c + b(i+j).
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    /// Kernel offset.
    #[arg(long, allow_hyphen_values = true)]
    c: String,
    /// Number of runs to sample.
    #[arg(long, default_value_t = 1)]
    samples: u64,
    /// Sampler seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct GwArgs {
    /// Largest total progeny to tabulate.
    #[arg(long)]
    n: u32,
    /// Number of trees in the forest.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Offspring family slope; the offspring law is the (b, c) product family.
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    /// Offspring family offset.
    #[arg(long, allow_hyphen_values = true)]
    c: String,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct ExistenceArgs {
    #[command(flatten)]
    weights: WeightFlags,
    /// Report for one size.
    #[arg(long, conflicts_with = "scan_to")]
    n: Option<u32>,
    /// Scan sizes 1..=N for the first failure.
    #[arg(long)]
    scan_to: Option<u32>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct KingmanArgs {
    /// Number of leaves.
    #[arg(long)]
    n: u32,
    /// Print the exact law of the size of a uniformly chosen block of the
    /// first split.
    #[arg(long, conflicts_with = "theta")]
    first_split: bool,
    /// Mutation level; runs seeded simulations and a goodness-of-fit check.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Number of simulated trees in theta mode.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Sampler seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite names to run; all eight when empty.
    #[arg(conflicts_with = "check")]
    names: Vec<String>,
    /// Re-run the command recorded in a JSON artifact and compare bytes.
    #[arg(long)]
    check: Option<PathBuf>,
    #[command(flatten)]
    io: IoArgs,
}

enum Failure {
    Validation(String),
    Numeric(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Validation(_) => ExitCode::from(2),
            Failure::Numeric(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numeric(m) => m,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

fn numeric(err: impl std::fmt::Display) -> Failure {
    Failure::Numeric(err.to_string())
}

/// Output of one rendered command. `deferred` carries a failure that must
/// surface as the exit status after the text has been emitted, e.g. red
/// verification suites.
struct Rendered {
    text: String,
    deferred: Option<Failure>,
}

impl Rendered {
    fn ok(text: String) -> Self {
        Rendered {
            text,
            deferred: None,
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let rendered = match render(&cli.cmd, &argv) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}", f.message());
            return f.exit_code();
        }
    };
    let out = match &cli.cmd {
        Cmd::Bell(a) => &a.io.out,
        Cmd::Weights(a) => &a.io.out,
        Cmd::Gibbs(a) => &a.io.out,
        Cmd::Fragment(a) => &a.io.out,
        Cmd::Coalesce(a) => &a.io.out,
        Cmd::Gw(a) => &a.io.out,
        Cmd::Existence(a) => &a.io.out,
        Cmd::Kingman(a) => &a.io.out,
        Cmd::Verify(a) => &a.io.out,
    };
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, format!("{}\n", rendered.text)) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{}", rendered.text) {
                if e.kind() == std::io::ErrorKind::BrokenPipe {
                    // The reader closed early and got everything it wanted.
                    return ExitCode::SUCCESS;
                }
                eprintln!("error: cannot write stdout: {e}");
                return ExitCode::from(2);
            }
        }
    }
    match rendered.deferred {
        Some(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
        None => ExitCode::SUCCESS,
    }
}

fn render(cmd: &Cmd, argv: &[String]) -> Result<Rendered, Failure> {
    match cmd {
        Cmd::Bell(a) => bell(a, argv),
        Cmd::Weights(a) => weights(a, argv),
        Cmd::Gibbs(a) => gibbs(a, argv),
        Cmd::Fragment(a) => fragment(a, argv),
        Cmd::Coalesce(a) => coalesce(a, argv),
        Cmd::Gw(a) => gw(a, argv),
        Cmd::Existence(a) => existence(a, argv),
        Cmd::Kingman(a) => kingman(a, argv),
        Cmd::Verify(a) => verify(a, argv),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn parse_rat_flag(name: &str, value: &str) -> Result<Rat, Failure> {
    parse_rat(value)
        .ok_or_else(|| invalid(format!("--{name} expects a rational like 3/4 or 0.75, got {value:?}")))
}

/// Resolves `--weights` to a sequence of length `n_max`. Families are
/// matched by name first; anything else is treated as a path to a file of
/// rationals, one per line, `#` comments allowed.
fn resolve_weights(flags: &WeightFlags, n_max: u32) -> Result<WeightSequence, Failure> {
    let name = flags.weights.as_str();
    let bc_flags = || -> Result<(Rat, Rat), Failure> {
        let b = flags
            .b
            .as_deref()
            .ok_or_else(|| invalid("the bc family needs --b"))?;
        let c = flags
            .c
            .as_deref()
            .ok_or_else(|| invalid("the bc family needs --c"))?;
        Ok((parse_rat_flag("b", b)?, parse_rat_flag("c", c)?))
    };
    let w = match name {
        "uniform" => WeightSequence::uniform(n_max),
        "cycles" => WeightSequence::cycles(n_max),
        "segments" | "lah" => WeightSequence::segments(n_max),
        "trees" | "cayley" => WeightSequence::trees(n_max),
        "bc" => {
            let (b, c) = bc_flags()?;
            if !bc_valid(n_max, &b, &c) {
                eprintln!(
                    "note: (b,c)=({b},{c}) violates the positivity condition at n={n_max}; \
                     weights may vanish or go negative"
                );
            }
            bellfrag::weights::weights_bc(n_max, &b, &c)
        }
        path if Path::new(path).is_file() => {
            let text = fs::read_to_string(path)
                .map_err(|e| invalid(format!("cannot read {path}: {e}")))?;
            let mut values = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                values.push(parse_rat(line).ok_or_else(|| {
                    invalid(format!("{path}:{}: not a rational: {line:?}", i + 1))
                })?);
            }
            let w = WeightSequence::from_values(values).map_err(numeric)?;
            if w.n_max() < n_max {
                return Err(invalid(format!(
                    "{path} provides {} weights but n={n_max} needs that many",
                    w.n_max()
                )));
            }
            w
        }
        other => {
            return Err(invalid(format!(
                "unknown weight family {other:?}; expected uniform, cycles, segments (lah), \
                 trees (cayley), bc, or a readable file of rationals"
            )))
        }
    };
    Ok(w)
}

/// JSON artifact envelope. Keys serialize in sorted order and floats in
/// shortest round-trip form, so equal runs yield equal bytes.
fn artifact(kind: &str, argv: &[String], result: Value) -> String {
    serde_json::to_string_pretty(&json!({
        "kind": kind,
        "argv": argv,
        "result": result,
    }))
    .expect("artifact values are serializable")
}

fn csv_quote(field: &str) -> String {
    format!("\"{}\"", field.replace('"', "\"\""))
}

// ---------------------------------------------------------------------------
// bell
// ---------------------------------------------------------------------------

fn bell(a: &BellArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if a.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    if let Some(k) = a.k {
        if k == 0 || k > a.n {
            return Err(invalid(format!("--k must be in 1..={}", a.n)));
        }
    }
    let w = resolve_weights(&a.weights, a.n)?;
    let table = BellTable::build(&w, a.n);
    let ks: Vec<u32> = match a.k {
        Some(k) => vec![k],
        None => (1..=a.n).collect(),
    };
    let rows: Vec<(u32, &Rat)> = ks.iter().map(|&k| (k, table.bell(a.n, k))).collect();
    let text = match a.io.format {
        None => {
            if a.k.is_some() {
                rows[0].1.to_string()
            } else {
                rows.iter()
                    .map(|(k, v)| format!("B({},{k}) = {v}", a.n))
                    .collect::<Vec<_>>()
                    .join("\n")
            }
        }
        Some(Format::Csv) => {
            let mut s = String::from("n,k,value");
            for (k, v) in &rows {
                write!(s, "\n{},{k},{v}", a.n).expect("string write");
            }
            s
        }
        Some(Format::Json) => {
            let values: Vec<Value> = rows
                .iter()
                .map(|(k, v)| json!({"k": k, "value": v.to_string()}))
                .collect();
            artifact(
                "bell",
                argv,
                json!({"n": a.n, "weights": a.weights.weights, "values": values}),
            )
        }
    };
    Ok(Rendered::ok(text))
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

fn weights(a: &WeightsArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if a.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    let w = resolve_weights(&a.weights, a.n)?;
    let valid_to = w.bc_params().map(|p| p.valid_to);
    let text = match a.io.format {
        None => {
            let mut lines: Vec<String> = (1..=a.n)
                .map(|j| format!("w_{j} = {}", w.w(j)))
                .collect();
            if let Some(Some(v)) = valid_to {
                lines.push(format!("positivity condition holds up to n = {v}"));
            }
            lines.join("\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("j,w");
            for j in 1..=a.n {
                write!(s, "\n{j},{}", w.w(j)).expect("string write");
            }
            s
        }
        Some(Format::Json) => {
            let values: Vec<String> = (1..=a.n).map(|j| w.w(j).to_string()).collect();
            let valid_json = match valid_to {
                None => Value::Null,
                Some(None) => json!("all"),
                Some(Some(v)) => json!(v),
            };
            artifact(
                "weights",
                argv,
                json!({"n": a.n, "weights": a.weights.weights, "w": values, "valid_to": valid_json}),
            )
        }
    };
    Ok(Rendered::ok(text))
}

// ---------------------------------------------------------------------------
// gibbs
// ---------------------------------------------------------------------------

fn gibbs(a: &GibbsArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if a.n == 0 || a.k == 0 || a.k > a.n {
        return Err(invalid(format!("need 1 <= k <= n, got n={} k={}", a.n, a.k)));
    }
    let w = resolve_weights(&a.weights, a.n)?;
    let spec = GibbsSpec::micro(a.n, a.k, &w).map_err(numeric)?;
    let law = bellfrag::gibbs::tabulate_set_law(&spec).map_err(numeric)?;
    let counts: Option<Vec<(String, u64)>> = match a.samples {
        None => None,
        Some(m) => {
            let mut rng = rng_stream(a.seed, 0);
            let mut emp = EmpiricalDist::new();
            for _ in 0..m {
                emp.observe(spec.sample(&mut rng));
            }
            Some(
                law.iter()
                    .map(|(pi, _)| (pi.to_string(), emp.count(pi)))
                    .collect(),
            )
        }
    };
    let text = match a.io.format {
        None => {
            let mut lines = Vec::new();
            match &counts {
                None => {
                    for (pi, p) in law.iter() {
                        lines.push(format!("{pi}  {p}"));
                    }
                }
                Some(cs) => {
                    for ((pi, p), (_, count)) in law.iter().zip(cs) {
                        lines.push(format!("{pi}  {p}  {count}"));
                    }
                }
            }
            lines.join("\n")
        }
        Some(Format::Csv) => {
            let mut s = String::new();
            match &counts {
                None => {
                    s.push_str("partition,prob");
                    for (pi, p) in law.iter() {
                        write!(s, "\n{},{p}", csv_quote(&pi.to_string())).expect("string write");
                    }
                }
                Some(cs) => {
                    s.push_str("partition,prob,count");
                    for ((pi, p), (_, count)) in law.iter().zip(cs) {
                        write!(s, "\n{},{p},{count}", csv_quote(&pi.to_string()))
                            .expect("string write");
                    }
                }
            }
            s
        }
        Some(Format::Json) => {
            let records: Vec<Value> = match &counts {
                None => law
                    .iter()
                    .map(|(pi, p)| json!({"partition": pi.to_string(), "prob": p.to_string()}))
                    .collect(),
                Some(cs) => law
                    .iter()
                    .zip(cs)
                    .map(|((pi, p), (_, count))| {
                        json!({
                            "partition": pi.to_string(),
                            "prob": p.to_string(),
                            "count": count,
                        })
                    })
                    .collect(),
            };
            artifact(
                "gibbs",
                argv,
                json!({
                    "n": a.n,
                    "k": a.k,
                    "weights": a.weights.weights,
                    "samples": a.samples,
                    "law": records,
                }),
            )
        }
    };
    Ok(Rendered::ok(text))
}

// ---------------------------------------------------------------------------
// fragment
// ---------------------------------------------------------------------------

fn fragment(a: &FragmentArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if a.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    if a.samples == 0 {
        return Err(invalid("--samples must be at least 1"));
    }
    let w = resolve_weights(&a.weights, a.n)?;
    let mut rng = rng_stream(a.seed, 0);
    let mut paths = Vec::with_capacity(a.samples as usize);
    for _ in 0..a.samples {
        paths.push(run_fragmentation(a.n, &w, &mut rng).map_err(numeric)?);
    }
    let text = match a.io.format {
        None => {
            let mut lines = Vec::new();
            for (i, path) in paths.iter().enumerate() {
                lines.push(format!("sample {}:", i + 1));
                for state in path.states() {
                    lines.push(format!("  {state}"));
                }
            }
            lines.join("\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("sample,k,block_sizes");
            for (i, path) in paths.iter().enumerate() {
                for state in path.states() {
                    let shape = state
                        .shape()
                        .parts()
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    write!(s, "\n{},{},{shape}", i + 1, state.k()).expect("string write");
                }
            }
            s
        }
        Some(Format::Json) => {
            let arr: Vec<Value> = paths
                .iter()
                .map(|path| {
                    Value::Array(
                        path.states()
                            .iter()
                            .map(|st| Value::String(st.to_string()))
                            .collect(),
                    )
                })
                .collect();
            artifact(
                "fragment",
                argv,
                json!({"n": a.n, "weights": a.weights.weights, "paths": arr}),
            )
        }
    };
    Ok(Rendered::ok(text))
}

// ---------------------------------------------------------------------------
// coalesce
// ---------------------------------------------------------------------------

fn coalesce(a: &CoalesceArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if a.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    if a.samples == 0 {
        return Err(invalid("--samples must be at least 1"));
    }
    let b = parse_rat_flag("b", &a.b)?;
    let c = parse_rat_flag("c", &a.c)?;
    let kernel = AffineKernel::from_bc(&b, &c);
    if !kernel.positive_up_to(a.n) {
        return Err(invalid(format!(
            "kernel 2c+b(i+j) is not positive for all block sizes up to n={}",
            a.n
        )));
    }
    let mut rng = rng_stream(a.seed, 0);
    let mut runs = Vec::with_capacity(a.samples as usize);
    for _ in 0..a.samples {
        runs.push(ml_continuous(a.n, &kernel, &mut rng).map_err(numeric)?);
    }
    let text = match a.io.format {
        None => {
            let mut lines = Vec::new();
            for (i, run) in runs.iter().enumerate() {
                lines.push(format!("sample {}:", i + 1));
                for (t, state) in run.events() {
                    lines.push(format!("  t={t} {state}"));
                }
            }
            lines.join("\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("sample,time,k,block_sizes");
            for (i, run) in runs.iter().enumerate() {
                for (t, state) in run.events() {
                    let shape = state
                        .shape()
                        .parts()
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>()
                        .join(" ");
                    write!(s, "\n{},{t},{},{shape}", i + 1, state.k()).expect("string write");
                }
            }
            s
        }
        Some(Format::Json) => {
            let arr: Vec<Value> = runs
                .iter()
                .map(|run| {
                    Value::Array(
                        run.events()
                            .iter()
                            .map(|(t, state)| {
                                json!({"time": t, "partition": state.to_string()})
                            })
                            .collect(),
                    )
                })
                .collect();
            artifact(
                "coalesce",
                argv,
                json!({"n": a.n, "b": b.to_string(), "c": c.to_string(), "paths": arr}),
            )
        }
    };
    Ok(Rendered::ok(text))
}

// ---------------------------------------------------------------------------
// gw
// ---------------------------------------------------------------------------

fn gw(a: &GwArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if a.k == 0 || a.k > a.n {
        return Err(invalid(format!("need 1 <= k <= n, got n={} k={}", a.n, a.k)));
    }
    let b = parse_rat_flag("b", &a.b)?;
    let c = parse_rat_flag("c", &a.c)?;
    let off = OffspringDist::bc(&b, &c, a.n).map_err(numeric)?;
    let p0 = off.p0_approx();
    let forest_count = plane_forest_count(a.n, a.k);
    let mut rows = Vec::new();
    for m in a.k..=a.n {
        let sp = total_progeny_pmf(a.k, m, &off).map_err(numeric)?;
        let value = sp.approx(p0);
        rows.push((m, sp, value));
    }
    let text = match a.io.format {
        None => {
            let mut lines = vec![format!(
                "{}-tree plane forests on {} vertices: {forest_count}",
                a.k, a.n
            )];
            for (m, sp, value) in &rows {
                lines.push(format!(
                    "P(total = {m}) = {} * p0^{} = {value}",
                    sp.coeff, sp.p0_power
                ));
            }
            lines.join("\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("total,coeff,p0_power,value");
            for (m, sp, value) in &rows {
                write!(s, "\n{m},{},{},{value}", sp.coeff, sp.p0_power).expect("string write");
            }
            s
        }
        Some(Format::Json) => {
            let progeny: Vec<Value> = rows
                .iter()
                .map(|(m, sp, value)| {
                    json!({
                        "total": m,
                        "coeff": sp.coeff.to_string(),
                        "p0_power": sp.p0_power,
                        "value": value,
                    })
                })
                .collect();
            artifact(
                "gw",
                argv,
                json!({
                    "n": a.n,
                    "k": a.k,
                    "b": b.to_string(),
                    "c": c.to_string(),
                    "forest_count": forest_count.to_string(),
                    "progeny": progeny,
                }),
            )
        }
    };
    Ok(Rendered::ok(text))
}

// ---------------------------------------------------------------------------
// existence
// ---------------------------------------------------------------------------

fn existence_report_json(report: &ExistenceReport) -> Value {
    let per_k: Vec<Value> = report
        .per_k
        .iter()
        .map(|v| json!({"k": v.k, "feasible": v.feasible}))
        .collect();
    let certificate = report
        .per_k
        .iter()
        .find_map(|v| v.certificate.as_ref())
        .map(|cert| {
            json!({
                "k": cert.k,
                "coarse_set": cert.coarse_set.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "fine_images": cert.fine_images.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "coarse_mass": cert.coarse_mass.to_string(),
                "fine_mass": cert.fine_mass.to_string(),
            })
        })
        .unwrap_or(Value::Null);
    json!({
        "n": report.n,
        "verdict": if report.feasible { "feasible" } else { "infeasible" },
        "per_k": per_k,
        "certificate": certificate,
    })
}

fn existence(a: &ExistenceArgs, argv: &[String]) -> Result<Rendered, Failure> {
    let (n_max, scanning) = match (a.n, a.scan_to) {
        (Some(n), None) => (n, false),
        (None, Some(s)) => (s, true),
        (None, None) => return Err(invalid("pass --n N or --scan-to N")),
        (Some(_), Some(_)) => unreachable!("clap rejects the conflict"),
    };
    if n_max == 0 {
        return Err(invalid("size must be at least 1"));
    }
    let w = resolve_weights(&a.weights, n_max.max(2) - 1)?;
    let (report, first_failing): (Option<ExistenceReport>, Option<u32>) = if scanning {
        let hit = first_failing_n(&w, n_max).map_err(numeric)?;
        let n = hit.as_ref().map(|r| r.n);
        (hit, n)
    } else {
        (
            Some(exists_gibbs_frag(n_max, &w).map_err(numeric)?),
            None,
        )
    };
    let text = match a.io.format {
        None => {
            let mut lines = Vec::new();
            match (&report, scanning) {
                (None, true) => {
                    lines.push(format!("all sizes up to {n_max} are feasible"));
                }
                (Some(r), true) => {
                    lines.push(format!("first failing n: {}", r.n));
                }
                (Some(r), false) => {
                    lines.push(format!(
                        "n = {}: {}",
                        r.n,
                        if r.feasible { "feasible" } else { "infeasible" }
                    ));
                }
                (None, false) => unreachable!("single report always present"),
            }
            if let Some(r) = &report {
                for v in &r.per_k {
                    lines.push(format!(
                        "  k={} -> k={}: {}",
                        v.k,
                        v.k + 1,
                        if v.feasible { "ok" } else { "violated" }
                    ));
                }
                if let Some(cert) = r.per_k.iter().find_map(|v| v.certificate.as_ref()) {
                    lines.push(format!(
                        "  certificate at k={}: mass {} on {{{}}} exceeds {} on its images",
                        cert.k,
                        cert.coarse_mass,
                        cert.coarse_set
                            .iter()
                            .map(|l| l.to_string())
                            .collect::<Vec<_>>()
                            .join(", "),
                        cert.fine_mass,
                    ));
                }
            }
            lines.join("\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("n,k,feasible");
            if let Some(r) = &report {
                for v in &r.per_k {
                    write!(s, "\n{},{},{}", r.n, v.k, v.feasible).expect("string write");
                }
            }
            s
        }
        Some(Format::Json) => {
            let body = match &report {
                Some(r) => existence_report_json(r),
                None => json!({"verdict": "feasible", "per_k": [], "certificate": null}),
            };
            let mut result = json!({
                "weights": a.weights.weights,
                "first_failing_n": first_failing,
            });
            result
                .as_object_mut()
                .expect("object literal")
                .insert("report".into(), body);
            artifact("existence", argv, result)
        }
    };
    Ok(Rendered::ok(text))
}

// ---------------------------------------------------------------------------
// kingman
// ---------------------------------------------------------------------------

fn kingman(a: &KingmanArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if a.n < 2 {
        return Err(invalid("--n must be at least 2"));
    }
    if a.first_split {
        return kingman_first_split(a, argv);
    }
    let theta = match &a.theta {
        Some(t) => parse_rat_flag("theta", t)?,
        None => return Err(invalid("pass --first-split or --theta T")),
    };
    kingman_theta(a, &theta, argv)
}

/// The exact law of the size of a fair-coin block of the first split,
/// printed with both a float value and its exact closed form.
fn kingman_first_split(a: &KingmanArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if a.n > 40 {
        return Err(invalid("--first-split supports n up to 40"));
    }
    let law = first_split_j_exact(a.n);
    let rows: Vec<(u32, f64, String)> = law
        .iter()
        .enumerate()
        .map(|(i, combo)| (i as u32 + 1, combo.eval_f64(), combo.to_string()))
        .collect();
    let text = match a.io.format {
        None => {
            let brace = rows
                .iter()
                .map(|(_, v, _)| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(", ");
            let mut lines = vec![format!("{{{brace}}}")];
            for (j, v, form) in &rows {
                lines.push(format!("P(J = {j}) = {v} = {form}"));
            }
            lines.join("\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("j,value,form");
            for (j, v, form) in &rows {
                write!(s, "\n{j},{v},{}", csv_quote(form)).expect("string write");
            }
            s
        }
        Some(Format::Json) => {
            let j_law: Vec<Value> = rows
                .iter()
                .map(|(j, v, form)| json!({"j": j, "value": v, "form": form}))
                .collect();
            artifact("kingman.first-split", argv, json!({"n": a.n, "j_law": j_law}))
        }
    };
    Ok(Rendered::ok(text))
}

fn gof_json(report: &GofReport) -> Value {
    json!({
        "statistic": report.statistic,
        "dof": report.dof,
        "p_value": report.p_value,
        "cells": report.cells,
        "pooled": report.pooled,
        "accepted": report.accepts(GofReport::THREE_SIGMA_ALPHA),
    })
}

/// Seeded simulation summary at one mutation level: a chi-square fit of the
/// allelic partition against the exact law, the empirical first-split size
/// frequencies, and the matching closed forms.
fn kingman_theta(a: &KingmanArgs, theta: &Rat, argv: &[String]) -> Result<Rendered, Failure> {
    if a.samples == 0 {
        return Err(invalid("--samples must be at least 1"));
    }
    if !theta.is_positive() {
        return Err(invalid("--theta must be positive"));
    }
    let spec = EwensSpec::new(a.n, theta.clone()).map_err(numeric)?;
    let law = spec.law().map_err(numeric)?;
    let level = to_f64(theta);
    let mut rng = rng_stream(a.seed, 1);
    let mut emp = EmpiricalDist::new();
    for _ in 0..a.samples {
        let tree = simulate_kingman_tree(a.n, &mut rng);
        let cuts = sample_cut_schedule(&tree, &mut rng);
        emp.observe(allelic_partition(&tree, &cuts, level));
    }
    let gof = chi_square_gof(&emp, law.as_map(), 5.0).map_err(numeric)?;

    let mut rng = rng_stream(a.seed, 2);
    let mut counts = vec![0u64; a.n as usize - 1];
    for _ in 0..a.samples {
        let (pi, _) = sample_first_split(a.n, &mut rng);
        let sizes = pi.block_sizes();
        let picked = if rng.gen::<bool>() { 0 } else { 1 };
        counts[sizes[picked] as usize - 1] += 1;
    }
    let closed = first_split_j_exact(a.n);

    let first_split: Vec<Value> = counts
        .iter()
        .enumerate()
        .map(|(i, c)| {
            json!({
                "j": i + 1,
                "count": c,
                "freq": *c as f64 / a.samples as f64,
            })
        })
        .collect();
    let closed_form: Vec<Value> = closed
        .iter()
        .enumerate()
        .map(|(i, combo)| {
            json!({
                "j": i + 1,
                "value": combo.eval_f64(),
                "form": combo.to_string(),
            })
        })
        .collect();
    let result = json!({
        "n": a.n,
        "theta": theta.to_string(),
        "samples": a.samples,
        "ewens_chi2": gof_json(&gof),
        "first_split": first_split,
        "closed_form": closed_form,
    });
    let text = match a.io.format {
        Some(Format::Csv) => {
            let mut s = String::from("statistic,dof,p_value,cells,pooled,accepted");
            write!(
                s,
                "\n{},{},{},{},{},{}",
                gof.statistic,
                gof.dof,
                gof.p_value,
                gof.cells,
                gof.pooled,
                gof.accepts(GofReport::THREE_SIGMA_ALPHA)
            )
            .expect("string write");
            s
        }
        // The simulation summary is structured; text mode prints the same
        // JSON artifact.
        None | Some(Format::Json) => artifact("kingman.theta", argv, result),
    };
    Ok(Rendered::ok(text))
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn verify(a: &VerifyArgs, argv: &[String]) -> Result<Rendered, Failure> {
    if let Some(path) = &a.check {
        return verify_check(path);
    }
    let names = bellfrag::acceptance::criterion_names();
    let selected: Vec<&'static str> = if a.names.is_empty() {
        names.to_vec()
    } else {
        let mut picked = Vec::new();
        for want in &a.names {
            match names.iter().find(|n| *n == want) {
                Some(n) => picked.push(*n),
                None => {
                    return Err(invalid(format!(
                        "unknown suite {want:?}; known suites: {}",
                        names.join(", ")
                    )))
                }
            }
        }
        picked
    };
    let reports: Vec<_> = selected
        .iter()
        .map(|n| bellfrag::acceptance::run_named(n).expect("validated name"))
        .collect();
    let failed = reports.iter().filter(|r| !r.passed).count();
    let text = match a.io.format {
        None => {
            let mut lines = Vec::new();
            for r in &reports {
                lines.push(r.summary_line());
                for d in &r.details {
                    lines.push(format!("  {d}"));
                }
            }
            lines.push(if failed == 0 {
                format!("all {} suites passed", reports.len())
            } else {
                format!("{failed} of {} suites failed", reports.len())
            });
            lines.join("\n")
        }
        Some(Format::Csv) => {
            let mut s = String::from("id,name,passed");
            for r in &reports {
                write!(s, "\n{},{},{}", r.id, r.name, r.passed).expect("string write");
            }
            s
        }
        Some(Format::Json) => {
            // Wall-clock lines are stripped so that equal runs stay
            // byte-identical.
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| {
                    let details: Vec<&String> = r
                        .details
                        .iter()
                        .filter(|d| !d.contains("within budget"))
                        .collect();
                    json!({
                        "id": r.id,
                        "name": r.name,
                        "passed": r.passed,
                        "details": details,
                    })
                })
                .collect();
            artifact("verify", argv, Value::Array(rows))
        }
    };
    let deferred = if failed > 0 {
        Some(Failure::Numeric(format!(
            "{failed} of {} suites failed",
            reports.len()
        )))
    } else {
        None
    };
    Ok(Rendered { text, deferred })
}

/// Re-runs the argv recorded in a JSON artifact and compares the bytes.
fn verify_check(path: &Path) -> Result<Rendered, Failure> {
    let raw = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&raw)
        .map_err(|e| invalid(format!("{} is not a JSON artifact: {e}", path.display())))?;
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| invalid("artifact has no \"kind\" field"))?
        .to_string();
    let argv: Vec<String> = value
        .get("argv")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("artifact has no \"argv\" field"))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| invalid("artifact argv must be strings"))
        })
        .collect::<Result<_, _>>()?;
    let cli = Cli::try_parse_from(std::iter::once("bellfrag".to_string()).chain(argv.clone()))
        .map_err(|e| invalid(format!("artifact argv does not parse: {e}")))?;
    let fresh = render(&cli.cmd, &argv)?;
    if fresh.text == raw.trim_end_matches('\n') {
        Ok(Rendered::ok(format!(
            "ok: {kind} artifact reproduces byte-identically"
        )))
    } else {
        Err(Failure::Numeric(format!(
            "{kind} artifact does not match a fresh run of {argv:?}"
        )))
    }
}
