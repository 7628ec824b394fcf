//! One PASS/FAIL line per acceptance criterion, with runtimes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};
use toric_exc::cohomology::CohomologyOracle;
use toric_exc::collection::{
    build_gn, criterion_chain, expected_size, gram_matrix, verify_exceptional, verify_stability, Collection, Engines, Method,
    VerifyOptions,
};
use toric_exc::fan::{build_pn, build_vn};
use toric_exc::par::Parallelism;
use toric_exc::picard::DivisorClass;
use toric_exc::windows::{build_certificate, verify_walls, window_violations};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);
/// whether a failed report names a witness
type Located = fn(&Value) -> bool;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_toric-exc"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn cardinality() -> Check {
    let start = Instant::now();
    let mut sizes = Vec::new();
    for (n, want) in [(2, 6), (4, 30), (6, 140), (8, 630)] {
        let got = build_gn(n).map_err(|e| e.to_string())?.len();
        ensure(got == want && expected_size(n) == want as u128, || format!("n={n}: {got} members, want {want}"))?;
        sizes.push(got.to_string());
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("|G_n| = {}", sizes.join(", ")))
}

fn golden_tables() -> Check {
    let start = Instant::now();
    for n in [2usize, 4] {
        let (code, out) = cli(&["build", "--dim", &n.to_string(), "--format", "json"]);
        ensure(code == 0, || format!("build --dim {n} exited {code}"))?;
        let col = Collection::from_json(&out).map_err(|e| e.to_string())?;
        let text = std::fs::read_to_string(golden(&format!("blocks_{n}.txt"))).map_err(|e| e.to_string())?;
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).collect();
        ensure(rows.len() == col.blocks.len(), || format!("n={n}: {} blocks, table has {}", col.blocks.len(), rows.len()))?;
        for (b, (row, blk)) in rows.iter().zip(&col.blocks).enumerate() {
            let (_, list) = row.split_once(':').ok_or("bad golden row")?;
            let want: BTreeSet<DivisorClass> = list
                .split(", ")
                .map(|s| {
                    let s = s.trim();
                    let inner = s.strip_prefix("O(").and_then(|t| t.strip_suffix(')')).unwrap_or(s);
                    DivisorClass::parse(n, inner, 1).map_err(|e| e.to_string())
                })
                .collect::<Result<_, _>>()?;
            let got: BTreeSet<DivisorClass> = blk.members.iter().map(|m| m.class(n)).collect();
            ensure(got.len() == blk.members.len() && got == want, || format!("n={n} block {b} differs from the table"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("block sequence and members match for n=2,4".into())
}

fn figures() -> Check {
    let start = Instant::now();
    let raw = std::fs::read_to_string(golden("figure_points.txt")).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for line in raw.lines().filter(|l| !l.starts_with('#')) {
        let (n, pts) = line.split_once(':').ok_or("bad figure line")?;
        let plotted: Vec<(i64, i64)> = pts
            .split_whitespace()
            .map(|p| {
                let (c, l) = p.trim_matches(|ch| ch == '(' || ch == ')').split_once(',').expect("pair");
                (c.parse().expect("int"), l.parse().expect("int"))
            })
            .collect();
        let distinct: BTreeSet<(i64, i64)> = plotted.iter().copied().collect();
        let (code, out) = cli(&["figure", "--dim", n]);
        ensure(code == 0, || format!("figure --dim {n} exited {code}"))?;
        let want = std::fs::read_to_string(golden(&format!("figure_{n}.csv"))).map_err(|e| e.to_string())?;
        ensure(out == want, || format!("n={n}: output differs from figure_{n}.csv"))?;
        let ours: BTreeSet<(i64, i64)> = out
            .lines()
            .skip(1)
            .map(|l| {
                let (c, e) = l.split_once(',').expect("csv row");
                (c.parse().expect("int"), e.parse().expect("int"))
            })
            .collect();
        ensure(ours == distinct, || format!("n={n}: point set differs from the figure"))?;
        if plotted.len() == distinct.len() {
            notes.push(format!("{}", distinct.len()));
        } else {
            notes.push(format!("{} ({} plotted, repeats removed)", distinct.len(), plotted.len()));
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("points: {}", notes.join(", ")))
}

fn inequalities() -> Check {
    let mut notes = Vec::new();
    for n in [2usize, 4, 6, 8] {
        let col = build_gn(n).map_err(|e| e.to_string())?;
        let engines = Engines::new(n).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let r = verify_exceptional(&col, &VerifyOptions::new(Method::Inequalities), &engines);
        let t = start.elapsed();
        ensure(r.passed() && r.checked_pairs == r.total_pairs, || format!("n={n}: {} violations", r.violations.len()))?;
        if n == 8 {
            within(t, Duration::from_secs(10))?;
        }
        notes.push(format!("{}", r.total_pairs));
    }
    Ok(format!("pairs {} all pass", notes.join(" / ")))
}

fn oracle() -> Check {
    let mut notes = Vec::new();
    for n in [2usize, 4, 6, 8] {
        let col = build_gn(n).map_err(|e| e.to_string())?;
        let engines = Engines::new(n).map_err(|e| e.to_string())?;
        let mut opts = VerifyOptions::new(Method::Oracle);
        if n >= 6 {
            opts = opts.sampled(500, 0);
        }
        let start = Instant::now();
        let r = verify_exceptional(&col, &opts, &engines);
        let t = start.elapsed();
        ensure(r.passed(), || format!("n={n}: {}", r.violations.first().map(|v| v.to_string()).unwrap_or_default()))?;
        within(t, Duration::from_secs(if n == 4 { 300 } else { 1800 }))?;
        notes.push(format!("n={n} {} pairs in {t:.1?}", r.checked_pairs));
    }
    Ok(notes.join(", "))
}

fn chain() -> Check {
    let mut notes = Vec::new();
    for n in [2usize, 4] {
        let col = build_gn(n).map_err(|e| e.to_string())?;
        let engines = Engines::new(n).map_err(|e| e.to_string())?;
        let r = criterion_chain(&col, &engines, Parallelism::default());
        ensure(r.counterexamples.is_empty(), || r.counterexamples.join("; "))?;
        notes.push(format!("n={n}: {} differences, {} lemma, {} certified", r.differences, r.lemma_true, r.certified));
    }
    Ok(notes.join(", "))
}

/// `h^0` as a direct count of `{m : <m, u> >= -a_u}`, enumerating the box
/// cut out by the rays `±e_i`.
fn brute_h0(n: usize, a: &[i64]) -> u64 {
    let fan = build_vn(n).expect("V_n");
    let rays = fan.rays();
    let mut lo = vec![i64::MIN; n];
    let mut hi = vec![i64::MAX; n];
    for (u, &ak) in rays.iter().zip(a) {
        let nz: Vec<usize> = (0..n).filter(|&i| u[i] != 0).collect();
        if let [i] = nz[..] {
            if u[i] > 0 {
                lo[i] = lo[i].max(-ak);
            } else {
                hi[i] = hi[i].min(ak);
            }
        }
    }
    if (0..n).any(|i| lo[i] > hi[i]) {
        return 0;
    }
    let mut count = 0;
    let mut m = lo.clone();
    loop {
        if rays.iter().zip(a).all(|(u, &ak)| u.iter().zip(&m).map(|(x, y)| x * y).sum::<i64>() >= -ak) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            if m[i] < hi[i] {
                m[i] += 1;
                break;
            }
            m[i] = lo[i];
            i += 1;
        }
    }
}

fn self_consistency() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0;
    for n in [2usize, 4] {
        let oracle = CohomologyOracle::new(build_vn(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let k = DivisorClass::canonical(n);
        for _ in 0..200 {
            let coeffs: Vec<i64> = (0..n + 2).map(|_| rng.gen_range(-4..=4)).collect();
            let d = DivisorClass::new(n, coeffs).map_err(|e| e.to_string())?;
            let h = oracle.cohomology_of_class(&d).map_err(|e| e.to_string())?;
            let dual = oracle.cohomology_of_class(&(k.clone() - d.clone())).map_err(|e| e.to_string())?;
            for i in 0..=n {
                ensure(h.dims[i] == dual.dims[n - i], || format!("Serre duality fails for {d} in degree {i}"))?;
            }
            let count = brute_h0(n, &d.lift_to_rays());
            ensure(h.dims[0] == count, || format!("{d}: h^0 = {} but {count} lattice points", h.dims[0]))?;
            total += 1;
        }
    }
    Ok(format!("{total} divisors"))
}

fn fixtures() -> Check {
    fn binom(a: u64, b: u64) -> u64 {
        (0..b).fold(1, |acc, i| acc * (a - i) / (i + 1))
    }
    let mut checked = 0;
    for n in 1..=4usize {
        let oracle = CohomologyOracle::new(build_pn(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for d in 0..=5i64 {
            let mut a = vec![0; n + 1];
            a[n] = d;
            let h = oracle.cohomology(&a).map_err(|e| e.to_string())?;
            let want = binom(n as u64 + d as u64, n as u64);
            ensure(h.dims[0] == want, || format!("P^{n}: h^0(O({d})) = {}, want {want}", h.dims[0]))?;
            checked += 1;
        }
    }
    let oracle = CohomologyOracle::new(build_vn(2).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let anti = oracle
        .cohomology_of_class(&(-DivisorClass::canonical(2)))
        .map_err(|e| e.to_string())?;
    let o = oracle.cohomology_of_class(&DivisorClass::zero(2)).map_err(|e| e.to_string())?;
    ensure(anti.dims[0] == 7, || format!("h^0(-K) = {}", anti.dims[0]))?;
    ensure(o.euler == 1, || format!("chi(O) = {}", o.euler))?;
    Ok(format!("{checked} P^n values, V_2 h^0(-K) = 7, chi(O) = 1"))
}

fn stability() -> Check {
    let start = Instant::now();
    for n in [2usize, 4, 6, 8] {
        let r = verify_stability(&build_gn(n).map_err(|e| e.to_string())?);
        ensure(r.passed, || format!("n={n}: {:?}", r.failures.first()))?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("n=2,4,6,8 stable, antipodal identity holds".into())
}

fn walls() -> Check {
    let start = Instant::now();
    let mut notes = Vec::new();
    for (n, sign, pair) in [(2usize, 8, 3), (4, 32, 5)] {
        let r = verify_walls(&build_vn(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(r.sign_circuits == sign && r.pair_circuits == pair, || {
            format!("n={n}: {} + {} circuits", r.sign_circuits, r.pair_circuits)
        })?;
        notes.push(format!("V_{n}: {sign}+{pair}"));
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(notes.join(", "))
}

fn window_lemma() -> Check {
    let start = Instant::now();
    for n in [2usize, 4, 6, 8] {
        let v = window_violations(&build_gn(n).map_err(|e| e.to_string())?);
        ensure(v.is_empty(), || format!("n={n}: {} weights outside the window", v.len()))?;
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok("all weights inside their windows".into())
}

fn certificate() -> Check {
    let start = Instant::now();
    let mut counts = Vec::new();
    for (n, want) in [(2usize, 4), (4, 16), (6, 64), (8, 256)] {
        let c = build_certificate(n).map_err(|e| e.to_string())?;
        ensure(c.walls.len() == want && c.base_case == "empty", || format!("n={n}: {} walls", c.walls.len()))?;
        ensure(c.walls.last().is_some_and(|w| w.j.is_empty()), || format!("n={n}: last wall is not J = {{}}"))?;
        counts.push(want.to_string());
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{} wall records", counts.join(" / ")))
}

fn gram() -> Check {
    let mut notes = Vec::new();
    for n in [2usize, 4] {
        let col = build_gn(n).map_err(|e| e.to_string())?;
        let engines = Engines::new(n).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let g = gram_matrix(&col, &engines, Parallelism::default());
        ensure(g.is_upper_unitriangular(), || format!("n={n}: not upper unitriangular"))?;
        within(start.elapsed(), Duration::from_secs(600))?;
        notes.push(format!("{0}x{0}", g.rows()));
    }
    Ok(format!("{} upper unitriangular", notes.join(", ")))
}

fn negative_controls() -> Check {
    let runs: [(&str, &[&str], Located); 4] = [
        ("drop:0 stability", &["--what", "stability"], |r| {
            r["failures"].as_array().is_some_and(|f| !f.is_empty())
        }),
        ("drop:0 cardinality", &["--what", "cardinality"], |r| {
            r["issues"]
                .as_array()
                .is_some_and(|i| i.iter().any(|x| x["kind"] == "wrong_size" && !x["missing"].as_array().is_none_or(|m| m.is_empty())))
        }),
        ("add oracle", &["--what", "exceptional", "--method", "oracle"], |r| {
            r["violations"].as_array().is_some_and(|v| !v.is_empty())
        }),
        ("swap oracle", &["--what", "exceptional", "--method", "oracle"], |r| {
            r["violations"].as_array().is_some_and(|v| !v.is_empty())
        }),
    ];
    let mut detected = 0;
    for (label, extra, located) in runs {
        let mutation = label.split_whitespace().next().expect("label");
        let mut args = vec!["verify", "--dim", "2", "--format", "json", "--mutate", mutation];
        args.extend_from_slice(extra);
        let (code, out) = cli(&args);
        let v: Value = serde_json::from_str(&out).map_err(|e| format!("{label}: {e}"))?;
        ensure(code == 1 && v["passed"] == false, || format!("{label}: not detected (exit {code})"))?;
        ensure(located(&v["report"]), || format!("{label}: failed without a witness"))?;
        detected += 1;
    }
    Ok(format!("{detected}/4 mutations detected with witnesses"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("cardinality", cardinality),
        ("golden tables", golden_tables),
        ("F_n figures", figures),
        ("exceptional, inequalities", inequalities),
        ("exceptional, oracle", oracle),
        ("criterion chain", chain),
        ("oracle self-consistency", self_consistency),
        ("oracle fixtures", fixtures),
        ("group stability", stability),
        ("walls", walls),
        ("window lemma", window_lemma),
        ("generation certificate", certificate),
        ("gram matrix", gram),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let t = start.elapsed();
        match result {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{t:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
