use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use toric_exc::cohomology::CohomologyOracle;
use toric_exc::collection::{
    build_fn, build_gn, expected_size, gram_matrix, verify_exceptional, verify_stability, verify_structure, Collection, Engines,
    Method, Mutation, VerifyOptions,
};
use toric_exc::fan::build_vn;
use toric_exc::forbidden::ForbiddenCatalog;
use toric_exc::par::{self, Parallelism};
use toric_exc::picard::DivisorClass;
use toric_exc::windows::{build_certificate, build_certificate_for, verify_walls};

mod table;

/// Exact verifier for the symmetric exceptional collections G_n on V_n.
#[derive(Parser)]
#[command(name = "toric-exc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build G_n; prints the block table, or the collection JSON
    Build(Common),
    /// Run one verification; exit 0 on pass, 1 on failure
    Verify(VerifyArgs),
    /// Sheaf cohomology of one line bundle on V_n
    Cohomology(CohomologyArgs),
    /// The points (c, l) of F_n
    Figure(Common),
    /// Euler pairings chi(L_i, L_j) in collection order
    Gram(Common),
    /// Generation certificate for G_n
    Certificate(Common),
}

#[derive(Args)]
struct Common {
    /// dimension n (even)
    #[arg(long = "dim", short = 'n')]
    dim: usize,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// write the output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// allow n > 8
    #[arg(long)]
    allow_large: bool,
    /// run on one thread (the thread count is otherwise capped by TORIC_EXC_THREADS)
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "exceptional")]
    what: What,
    #[arg(long, default_value = "inequalities")]
    method: Method,
    /// seed for sampled pair checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// number of sampled pairs, 0 for all; defaults to 500 for the oracle
    /// and forbidden methods when n >= 6
    #[arg(long)]
    budget: Option<usize>,
    /// keep every pair verdict in the JSON report
    #[arg(long)]
    full_report: bool,
    /// fault injection: drop:I, add[:C:J:B], swap[:A:B]
    #[arg(long)]
    mutate: Vec<Mutation>,
    /// verify this collection JSON instead of G_n
    #[arg(long)]
    collection: Option<PathBuf>,
}

#[derive(Args)]
struct CohomologyArgs {
    #[command(flatten)]
    common: Common,
    /// JSON vector of coefficients of H, E_0, ..., E_n
    #[arg(long, allow_hyphen_values = true)]
    divisor: String,
    /// also list the forbidden cones containing the divisor
    #[arg(long)]
    forbidden: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum What {
    Exceptional,
    Stability,
    Cardinality,
    Generation,
    Walls,
}

/// A bad invocation; exits with 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

struct Outcome {
    passed: bool,
    text: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    par::init_threads_from_env();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let (common, outcome) = match cli.command {
        Command::Build(c) => {
            let o = cmd_build(&c)?;
            (c, o)
        }
        Command::Verify(v) => {
            let o = cmd_verify(&v)?;
            (v.common, o)
        }
        Command::Cohomology(a) => {
            let o = cmd_cohomology(&a)?;
            (a.common, o)
        }
        Command::Figure(c) => {
            let o = cmd_figure(&c)?;
            (c, o)
        }
        Command::Gram(c) => {
            let o = cmd_gram(&c)?;
            (c, o)
        }
        Command::Certificate(c) => {
            let o = cmd_certificate(&c)?;
            (c, o)
        }
    };
    match &common.out {
        Some(path) => std::fs::write(path, &outcome.text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", outcome.text),
    }
    Ok(outcome.passed)
}

fn check_dim(c: &Common) -> Result<usize> {
    let n = c.dim;
    if n < 2 || n % 2 == 1 {
        bail!(Usage(format!("n must be even and at least 2, got {n}")));
    }
    if n > 8 && !c.allow_large {
        bail!(Usage(format!("n = {n} is above 8; pass --allow-large to run anyway")));
    }
    Ok(n)
}

fn parallelism(c: &Common) -> Parallelism {
    if c.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    }
}

fn format_or(c: &Common, default: Format) -> Format {
    c.format.unwrap_or(default)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn cmd_build(c: &Common) -> Result<Outcome> {
    let n = check_dim(c)?;
    let col = build_gn(n)?;
    let fmt = format_or(c, if c.out.is_some() { Format::Json } else { Format::Text });
    let text = match fmt {
        Format::Json => col.to_json() + "\n",
        Format::Csv => table::members_csv(&col),
        Format::Text => table::block_table(&col),
    };
    Ok(Outcome { passed: true, text })
}

fn cmd_figure(c: &Common) -> Result<Outcome> {
    let n = check_dim(c)?;
    let points = build_fn(n)?;
    let text = match format_or(c, Format::Csv) {
        Format::Json => to_json(&points.iter().map(|&(c, l)| json!({"c": c, "ell": l})).collect::<Vec<_>>()),
        Format::Csv | Format::Text => {
            let mut s = String::from("c,ell\n");
            for (c, l) in points {
                let _ = writeln!(s, "{c},{l}");
            }
            s
        }
    };
    Ok(Outcome { passed: true, text })
}

fn parse_divisor(n: usize, s: &str) -> Result<DivisorClass> {
    // accept the unicode minus as well
    let cleaned = s.replace('\u{2212}', "-");
    let v: Vec<i64> = serde_json::from_str(&cleaned).map_err(|e| Usage(format!("--divisor must be a JSON integer array: {e}")))?;
    DivisorClass::new(n, v).map_err(|e| Usage(format!("--divisor: {e}")).into())
}

fn cmd_cohomology(a: &CohomologyArgs) -> Result<Outcome> {
    let n = check_dim(&a.common)?;
    let d = parse_divisor(n, &a.divisor)?;
    let fan = build_vn(n)?;
    let oracle = CohomologyOracle::with_parallelism(fan.clone(), parallelism(&a.common))?;
    let h = oracle.cohomology_of_class(&d)?;
    let cones = a.forbidden.then(|| ForbiddenCatalog::new(&fan, true).containing(&d.lift_to_rays()));
    let text = match format_or(&a.common, Format::Text) {
        Format::Json => to_json(&json!({
            "n": n,
            "divisor": d.coeffs(),
            "class": d.to_string(),
            "h": h.dims,
            "euler": h.euler,
            "forbidden_cones": cones,
        })),
        Format::Csv => {
            let heads: Vec<String> = (0..=n).map(|i| format!("h{i}")).collect();
            let vals: Vec<String> = h.dims.iter().map(u64::to_string).collect();
            format!("{},chi\n{},{}\n", heads.join(","), vals.join(","), h.euler)
        }
        Format::Text => {
            let vals: Vec<String> = h.dims.iter().map(u64::to_string).collect();
            let mut s = format!("O({d}) on V_{n}\nh = {}\nchi = {}\n", vals.join(","), h.euler);
            if let Some(cones) = &cones {
                if cones.is_empty() {
                    s.push_str("in no forbidden cone: certified acyclic\n");
                }
                for cone in cones {
                    let _ = writeln!(s, "in forbidden cone of I = {} (degrees {:?})", cone.subset, cone.degrees);
                }
            }
            s
        }
    };
    Ok(Outcome { passed: true, text })
}

fn cmd_gram(c: &Common) -> Result<Outcome> {
    let n = check_dim(c)?;
    let col = build_gn(n)?;
    let engines = Engines::new(n)?;
    let g = gram_matrix(&col, &engines, parallelism(c));
    let ok = g.is_upper_unitriangular();
    let rows: Vec<Vec<String>> = (0..g.rows()).map(|i| g.row(i).iter().map(|x| x.to_string()).collect()).collect();
    let text = match format_or(c, Format::Csv) {
        Format::Json => to_json(&json!({"n": n, "upper_unitriangular": ok, "gram": rows
            .iter()
            .map(|r| r.iter().map(|x| x.parse::<i64>().unwrap_or(0)).collect::<Vec<_>>())
            .collect::<Vec<_>>()})),
        Format::Csv => rows.iter().map(|r| r.join(",") + "\n").collect(),
        Format::Text => {
            let mut s: String = rows.iter().map(|r| r.join(" ") + "\n").collect();
            let _ = writeln!(s, "upper unitriangular: {ok}");
            s
        }
    };
    Ok(Outcome { passed: ok, text })
}

fn cmd_certificate(c: &Common) -> Result<Outcome> {
    let n = check_dim(c)?;
    let cert = build_certificate(n)?;
    let text = match format_or(c, Format::Json) {
        Format::Json | Format::Csv => cert.to_json() + "\n",
        Format::Text => cert.to_string(),
    };
    Ok(Outcome { passed: true, text })
}

fn load_collection(v: &VerifyArgs, n: usize) -> Result<Collection> {
    let mut col = match &v.collection {
        Some(path) => {
            let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let col = Collection::from_json(&s)?;
            if col.n != n {
                bail!(Usage(format!("{} is for n = {}, not {n}", path.display(), col.n)));
            }
            col
        }
        None => build_gn(n)?,
    };
    for m in &v.mutate {
        col = m.apply(&col).map_err(|e| Usage(e.to_string()))?;
    }
    Ok(col)
}

fn cmd_verify(v: &VerifyArgs) -> Result<Outcome> {
    let n = check_dim(&v.common)?;
    let col = load_collection(v, n)?;
    let p = parallelism(&v.common);
    let start = Instant::now();
    let (passed, detail, mut summary) = match v.what {
        What::Exceptional => {
            let mut opts = VerifyOptions::new(v.method);
            opts.parallelism = p;
            opts.full_report = v.full_report;
            let budget = v
                .budget
                .unwrap_or(if n >= 6 && v.method != Method::Inequalities { 500 } else { 0 });
            if budget > 0 {
                opts = opts.sampled(budget, v.seed);
            }
            let engines = Engines::new(n)?;
            let r = verify_exceptional(&col, &opts, &engines);
            let mut s = format!(
                "{} of {} ordered pairs checked by {}, {} violations\n",
                r.checked_pairs,
                r.total_pairs,
                r.method,
                r.violations.len()
            );
            for issue in &r.structure {
                let _ = writeln!(s, "structure: {issue}");
            }
            for w in r.violations.iter().take(20) {
                let _ = writeln!(s, "violation: {w}");
            }
            if r.violations.len() > 20 {
                let _ = writeln!(s, "... {} more", r.violations.len() - 20);
            }
            (r.passed(), serde_json::to_value(&r)?, s)
        }
        What::Stability => {
            let r = verify_stability(&col);
            let mut s = format!("{} failures\n", r.failures.len());
            for f in r.failures.iter().take(20) {
                let _ = writeln!(s, "{} maps {} to {}: {}", f.generator, f.member, f.image, f.reason);
            }
            (r.passed, serde_json::to_value(&r)?, s)
        }
        What::Cardinality => {
            let issues = verify_structure(&col);
            let mut s = format!("{} line bundles, c({n}) = {}\n", col.len(), expected_size(n));
            for i in &issues {
                let _ = writeln!(s, "{i}");
            }
            let detail = json!({"size": col.len(), "expected": expected_size(n) as u64, "issues": issues});
            (issues.is_empty(), detail, s)
        }
        What::Generation => match build_certificate_for(&col) {
            Ok(cert) => {
                let s = format!("{} wall records, base case {}\n", cert.walls.len(), cert.base_case);
                (true, serde_json::to_value(&cert)?, s)
            }
            Err(e) => (false, json!({"error": e.to_string()}), format!("{e}\n")),
        },
        What::Walls => match verify_walls(&build_vn(n)?) {
            Ok(r) => {
                let s = format!("{} sign-choice circuits, {} pair circuits\n", r.sign_circuits, r.pair_circuits);
                (true, serde_json::to_value(&r)?, s)
            }
            Err(e) => (false, json!({"error": e.to_string()}), format!("{e}\n")),
        },
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let text = match format_or(&v.common, Format::Text) {
        Format::Json => to_json(&json!({
            "n": n,
            "what": v.what,
            "passed": passed,
            "elapsed_ms": elapsed_ms,
            "report": detail,
        })),
        Format::Csv | Format::Text => {
            let verdict = if passed { "PASS" } else { "FAIL" };
            summary.insert_str(0, &format!("{verdict} n={n} ({:.1} ms): ", elapsed_ms));
            summary
        }
    };
    Ok(Outcome { passed, text })
}
