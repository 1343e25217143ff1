//! `mulab`: batch front end for the experiment library.
//!
//! Each subcommand runs one experiment and writes one CSV artifact (stdout
//! or `--out`). Headers are `#` lines echoing every result-affecting
//! parameter, so an artifact documents itself; plumbing that cannot change
//! the numbers (`--threads`, `--out`, `--sieve-cache`) is deliberately left
//! out, and rerunning with a different worker count reproduces the file
//! byte for byte. Floats carry 17 significant digits, enough to round-trip.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

mod config;

use std::fs;
use std::io::{self, BufWriter, ErrorKind, Write};
use std::sync::Arc;

use mulab::averages::{
    davenport_sup, decay_fit, is_prime, kbsz_correlation, star_discrepancy, weighted_average,
    AverageSeries, Weight, MAX_GRID,
};
use mulab::moebius::{MoebiusError, MAX_LIMIT};
use mulab::orbits::{CounterexampleOrbit, HeisenbergOrbit, OrbitValues, RotationOrbit};
use mulab::subshift::{counterexample_sequence, isqrt_u128, MAX_SEQUENCE_LEN};
use mulab::torus::{HeisObservable, HeisenbergPoint, RotationSystem};
use mulab::{Frac64, IntPolynomial, MoebiusTable};

use config::{Command, ObservableSpec, Options, SystemSpec};

const USAGE: &str = "\
mulab: Mobius-weighted orbit average experiments

USAGE
  mulab <command> [--flag value | --flag=value]...

COMMANDS
  sieve           Mertens and squarefree-density checkpoints of a Mobius table
  average         weighted average S_N along an orbit, with decay fit
  davenport       sup over theta of |(1/N) sum mu(n) e(p(n) theta)|, per N
  kbsz            two-prime correlations B_N(q1,q2) along an orbit
  counterexample  Mobius-at-squares sequence: zero-run positions, text dump
  entropy         distinct word counts of the counterexample sequence
  equidist        star discrepancy of p(n)*alpha mod 1

COMMON FLAGS
  --limit COUNT          sieve size (required for sieve; table override elsewhere)
  --N COUNT              sample count; --M COUNT sequence length
  --poly c0,c1,...       integer coefficients, low to high (default 0,1)
  --system SPEC          rotation:alpha=golden | rotation:alpha=0.123
                         | heis:a=sqrt2,sqrt3,0 | subshift:counterexample
  --observable SPEC      char:k | char_x:k | char_y:k | smooth_z | coord0
  --weight unit|mobius   average weight (default mobius)
  --checkpoints SPEC     N1,N2,... | geom:START:STOP:FACTOR
  --grid G --refine R    davenport search parameters (default 2^16, 30)
  --primes q1,q2,...     kbsz frequencies; --lengths and --runs are lists too
  --out PATH             write the CSV here instead of stdout
  --dump-seq PATH        counterexample: also dump symbols as -0+ text
  --sieve-cache PATH     load the Mobius table from PATH, or build and save it
  --threads K            cap the worker pool (results do not depend on it)
  --config PATH          key = value defaults, overridden by flags

COUNT accepts 10^7, 2^16, 1e6, 0x989680 and _ separators.
Exit codes: 0 ok, 2 bad configuration, 3 runtime failure.
";

struct Failure {
    code: i32,
    message: String,
}

fn config_error<S: Into<String>>(message: S) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn runtime_error<S: Into<String>>(message: S) -> Failure {
    Failure { code: 3, message: message.into() }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        runtime_error(e.to_string())
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => {}
        Err(failure) => {
            eprintln!("mulab: {}", failure.message);
            std::process::exit(failure.code);
        }
    }
}

fn run(args: &[String]) -> Result<(), Failure> {
    let first = args.first().map(String::as_str);
    match first {
        None => {
            eprint!("{USAGE}");
            return Err(config_error("no command given"));
        }
        Some("help") | Some("--help") | Some("-h") => {
            print!("{USAGE}");
            return Ok(());
        }
        _ => {}
    }
    let name = first.unwrap();
    let cmd = Command::from_name(name)
        .ok_or_else(|| config_error(format!("unknown command '{name}' (try 'mulab help')")))?;
    let opts = Options::gather(cmd, &args[1..]).map_err(config_error)?;

    if let Some(threads) = opts.threads().map_err(config_error)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| runtime_error(format!("thread pool: {e}")))?;
    }

    match cmd {
        Command::Sieve => run_sieve(&opts),
        Command::Average => run_average(&opts),
        Command::Davenport => run_davenport(&opts),
        Command::Kbsz => run_kbsz(&opts),
        Command::Counterexample => run_counterexample(&opts),
        Command::Entropy => run_entropy(&opts),
        Command::Equidist => run_equidist(&opts),
    }
}

/// 17 significant digits: every f64 round-trips.
fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn join_counts(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

/// CSV sink; comments and rows go through here so every artifact has the
/// same shape.
struct Csv {
    sink: BufWriter<Box<dyn Write>>,
    path: Option<String>,
}

impl Csv {
    fn open(opts: &Options) -> Result<Csv, Failure> {
        match opts.raw("out") {
            None => Ok(Csv { sink: BufWriter::new(Box::new(io::stdout())), path: None }),
            Some(path) => {
                let file = fs::File::create(path)
                    .map_err(|e| runtime_error(format!("{path}: {e}")))?;
                Ok(Csv { sink: BufWriter::new(Box::new(file)), path: Some(path.to_string()) })
            }
        }
    }

    fn comment(&mut self, line: &str) -> Result<(), Failure> {
        writeln!(self.sink, "# {line}").map_err(Failure::from)
    }

    fn header(&mut self, command: &str, fields: &[(&str, String)]) -> Result<(), Failure> {
        self.comment(&format!("mulab {command}"))?;
        for (key, value) in fields {
            self.comment(&format!("{key} = {value}"))?;
        }
        Ok(())
    }

    fn row(&mut self, cells: &[String]) -> Result<(), Failure> {
        writeln!(self.sink, "{}", cells.join(",")).map_err(Failure::from)
    }

    /// Flushes, then reports where the artifact went (quiet on stdout).
    fn finish(mut self, summary: &str) -> Result<(), Failure> {
        self.sink.flush()?;
        if let Some(path) = &self.path {
            println!("{path}: {summary}");
        }
        Ok(())
    }
}

/// Appends the standard decay-fit footer, or says why there is none.
fn fit_footer(csv: &mut Csv, ns: &[u64], sups: &[f64]) -> Result<(), Failure> {
    match decay_fit(ns, sups) {
        Ok(fit) => csv.comment(&format!(
            "fit: A={}, logC={}, rms={}",
            sig17(fit.exponent),
            sig17(fit.log_c),
            sig17(fit.rms)
        )),
        Err(why) => csv.comment(&format!("fit: skipped ({why})")),
    }
}

/// Builds (or loads) a Mobius table covering `needed`.
///
/// A cache file that is missing or too small is rebuilt and rewritten; an
/// unreadable one is a hard error rather than something to clobber.
fn obtain_table(needed: u64, opts: &Options) -> Result<MoebiusTable, Failure> {
    let mut needed = needed.max(1);
    if let Some(limit) = opts.count("limit").map_err(config_error)? {
        if limit < needed {
            return Err(config_error(format!(
                "--limit {limit} is below the {needed} this run needs"
            )));
        }
        needed = limit;
    }
    if needed > MAX_LIMIT {
        return Err(config_error(format!(
            "run needs a Mobius table to {needed}, above the {MAX_LIMIT} cap"
        )));
    }
    let cache = opts.raw("sieve-cache");
    if let Some(path) = cache {
        match MoebiusTable::load_cache(path) {
            Ok(table) if table.limit() >= needed => return Ok(table),
            Ok(_) => {}
            Err(MoebiusError::Io(e)) if e.kind() == ErrorKind::NotFound => {}
            Err(e) => return Err(runtime_error(format!("{path}: {e}"))),
        }
    }
    let table = MoebiusTable::build(needed).map_err(|e| runtime_error(e.to_string()))?;
    if let Some(path) = cache {
        table.save_cache(path).map_err(|e| runtime_error(format!("{path}: {e}")))?;
    }
    Ok(table)
}

fn run_sieve(opts: &Options) -> Result<(), Failure> {
    let limit = opts.require_count("limit").map_err(config_error)?;
    if limit == 0 || limit > MAX_LIMIT {
        return Err(config_error(format!("--limit must be in 1..={MAX_LIMIT}")));
    }
    let checkpoints = match opts.count_list("checkpoints").map_err(config_error)? {
        Some(cps) => {
            let mut cps = cps;
            cps.sort_unstable();
            cps.dedup();
            if cps.first() == Some(&0) || cps.last() > Some(&limit) {
                return Err(config_error("--checkpoints must lie in 1..=limit"));
            }
            cps
        }
        None => decade_checkpoints(limit),
    };

    let table = obtain_table(limit, opts)?;
    let (minus, zero, plus) = table.sign_histogram(limit).map_err(runtime_failure)?;

    let mut csv = Csv::open(opts)?;
    csv.header(
        "sieve",
        &[
            ("limit", limit.to_string()),
            ("checkpoints", join_counts(&checkpoints)),
        ],
    )?;
    csv.comment(&format!("histogram: minus={minus}, zero={zero}, plus={plus}"))?;
    csv.comment("columns: N,mertens,mertens_over_n,squarefree_density")?;
    let mut density = 0.0;
    for &cp in &checkpoints {
        let m = table.mertens(cp).map_err(runtime_failure)?;
        density = table.squarefree_density(cp).map_err(runtime_failure)?;
        csv.row(&[
            cp.to_string(),
            m.to_string(),
            sig17(m as f64 / cp as f64),
            sig17(density),
        ])?;
    }
    csv.finish(&format!("sieve to {limit}, density {density:.6}"))
}

/// `1, 10, 100, ..., limit`.
fn decade_checkpoints(limit: u64) -> Vec<u64> {
    let mut cps = Vec::new();
    let mut v = 1u64;
    while v < limit {
        cps.push(v);
        match v.checked_mul(10) {
            Some(next) => v = next,
            None => break,
        }
    }
    cps.push(limit);
    cps
}

fn runtime_failure<E: std::fmt::Display>(e: E) -> Failure {
    runtime_error(e.to_string())
}

/// The orbit a system spec describes, plus the sieve reach it needs
/// (`isqrt(max p)` for the virtual subshift, 0 otherwise).
fn build_orbit(
    system: &SystemSpec,
    observable: &ObservableSpec,
    p: &IntPolynomial,
    n_max: u64,
    table: &Option<Arc<MoebiusTable>>,
) -> Result<Box<dyn OrbitValues>, Failure> {
    match system {
        SystemSpec::Rotation { alpha, golden } => {
            let sys =
                if *golden { RotationSystem::golden() } else { RotationSystem::new(*alpha) };
            let k = match observable {
                ObservableSpec::Char(k) => *k,
                _ => unreachable!("observable was checked against the system"),
            };
            Ok(Box::new(RotationOrbit::new(sys, Frac64::ZERO, p.clone(), k)))
        }
        SystemSpec::Heisenberg { a } => {
            let obs = match observable {
                ObservableSpec::CharX(k) => HeisObservable::CharX(*k),
                ObservableSpec::CharY(k) => HeisObservable::CharY(*k),
                ObservableSpec::SmoothZ => HeisObservable::SmoothZ,
                _ => unreachable!("observable was checked against the system"),
            };
            let orbit = HeisenbergOrbit::new(*a, HeisenbergPoint::IDENTITY, p.clone(), obs, n_max)
                .map_err(|e| config_error(e.to_string()))?;
            Ok(Box::new(orbit))
        }
        SystemSpec::Counterexample => {
            let table = table.as_ref().expect("subshift sizing always builds a table");
            let orbit = CounterexampleOrbit::new(table.clone(), p.clone(), n_max)
                .map_err(|e| config_error(e.to_string()))?;
            Ok(Box::new(orbit))
        }
    }
}

/// Sieve reach the virtual subshift needs to cover `p` on `1..=n_max`.
fn subshift_reach(p: &IntPolynomial, n_max: u64) -> Result<u64, Failure> {
    let (min, max) = p.range_bounds(n_max).map_err(|e| config_error(e.to_string()))?;
    if min < 0 {
        return Err(config_error(format!(
            "polynomial reaches {min} < 0, no such sequence index"
        )));
    }
    Ok(isqrt_u128(max as u128) as u64)
}

fn run_average(opts: &Options) -> Result<(), Failure> {
    let p = opts.poly_or("poly", &[0, 1]).map_err(config_error)?;
    let (system, system_str) = opts.system_or_default().map_err(config_error)?;
    let observable = opts.observable_or_default(&system).map_err(config_error)?;
    let moebius = opts.weight_is_moebius().map_err(config_error)?;
    let checkpoints = opts.checkpoints_or_ladder(1_000_000).map_err(config_error)?;
    let n_max = *checkpoints.last().expect("schedule is never empty");

    let mut reach = if moebius { n_max } else { 0 };
    if let SystemSpec::Counterexample = system {
        reach = reach.max(subshift_reach(&p, n_max)?);
    }
    let table = if reach > 0 { Some(Arc::new(obtain_table(reach, opts)?)) } else { None };
    let orbit = build_orbit(&system, &observable, &p, n_max, &table)?;
    let weight = match (&table, moebius) {
        (Some(t), true) => Weight::Moebius(t),
        _ => Weight::Unit,
    };

    let series = weighted_average(&*orbit, weight, &checkpoints).map_err(runtime_failure)?;

    let mut csv = Csv::open(opts)?;
    write_average_csv(&mut csv, "average", &system_str, &observable, &p, &series)?;
    let last = series.final_average();
    fit_footer(
        &mut csv,
        &series.checkpoints,
        &series.averages.iter().map(|s| s.norm()).collect::<Vec<_>>(),
    )?;
    csv.finish(&format!("final |S_N| = {:.6} at N = {n_max}", last.norm()))
}

fn write_average_csv(
    csv: &mut Csv,
    command: &str,
    system_str: &str,
    observable: &ObservableSpec,
    p: &IntPolynomial,
    series: &AverageSeries,
) -> Result<(), Failure> {
    csv.header(
        command,
        &[
            ("weight", series.weight_label.clone()),
            ("system", system_str.to_string()),
            ("observable", observable.to_string()),
            ("poly", poly_spec(p)),
            ("checkpoints", join_counts(&series.checkpoints)),
            ("source", series.source_label.clone()),
        ],
    )?;
    csv.comment("columns: N,re,im,abs")?;
    for (&cp, s) in series.checkpoints.iter().zip(&series.averages) {
        csv.row(&[cp.to_string(), sig17(s.re), sig17(s.im), sig17(s.norm())])?;
    }
    let last = series.final_average();
    csv.comment(&format!("final: abs={}, arg={}", sig17(last.norm()), sig17(last.arg())))
}

/// Canonical low-to-high coefficient list, the same shape `--poly` takes.
fn poly_spec(p: &IntPolynomial) -> String {
    p.coeffs().iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

fn run_davenport(opts: &Options) -> Result<(), Failure> {
    let p = opts.poly_or("poly", &[0, 1]).map_err(config_error)?;
    let grid = opts.count_or("grid", 1 << 16).map_err(config_error)?;
    if grid < 2 || grid > MAX_GRID {
        return Err(config_error(format!("--grid must be in 2..={MAX_GRID}")));
    }
    let refine = opts.count_or("refine", 30).map_err(config_error)? as u32;
    let checkpoints = opts.checkpoints_or_ladder(1_000_000).map_err(config_error)?;
    let n_max = *checkpoints.last().expect("schedule is never empty");

    let table = obtain_table(n_max, opts)?;

    let mut csv = Csv::open(opts)?;
    csv.header(
        "davenport",
        &[
            ("weight", "mobius".into()),
            ("poly", poly_spec(&p)),
            ("grid", grid.to_string()),
            ("refine", refine.to_string()),
            ("checkpoints", join_counts(&checkpoints)),
        ],
    )?;
    csv.comment("columns: N,theta_raw,theta,sup")?;
    let mut sups = Vec::with_capacity(checkpoints.len());
    for &cp in &checkpoints {
        let est = davenport_sup(&table, &p, cp, grid, refine).map_err(runtime_failure)?;
        sups.push(est.value);
        csv.row(&[
            cp.to_string(),
            est.theta.raw().to_string(),
            sig17(est.theta.to_f64()),
            sig17(est.value),
        ])?;
    }
    fit_footer(&mut csv, &checkpoints, &sups)?;
    let last = sups.last().copied().unwrap_or(0.0);
    csv.finish(&format!("sup {last:.6} at N = {n_max}"))
}

fn run_kbsz(opts: &Options) -> Result<(), Failure> {
    let p = opts.poly_or("poly", &[0, 1]).map_err(config_error)?;
    let (system, system_str) = opts.system_or_default().map_err(config_error)?;
    let observable = opts.observable_or_default(&system).map_err(config_error)?;
    let n = opts.count_or("N", 10_000).map_err(config_error)?;
    if n == 0 {
        return Err(config_error("--N must be at least 1"));
    }
    let mut primes = opts
        .count_list("primes")
        .map_err(config_error)?
        .ok_or_else(|| config_error("missing required flag --primes"))?;
    primes.sort_unstable();
    primes.dedup();
    if primes.len() < 2 {
        return Err(config_error("--primes needs at least two distinct primes"));
    }
    for &q in &primes {
        if !is_prime(q) {
            return Err(config_error(format!("--primes: {q} is not prime")));
        }
    }
    let q_max = *primes.last().expect("list is nonempty");
    let n_max = n
        .checked_mul(q_max)
        .ok_or_else(|| config_error(format!("index N*q = {n}*{q_max} exceeds u64")))?;

    let reach = match system {
        SystemSpec::Counterexample => subshift_reach(&p, n_max)?,
        _ => 0,
    };
    let table = if reach > 0 { Some(Arc::new(obtain_table(reach, opts)?)) } else { None };
    let orbit = build_orbit(&system, &observable, &p, n_max, &table)?;

    let mut csv = Csv::open(opts)?;
    csv.header(
        "kbsz",
        &[
            ("system", system_str),
            ("observable", observable.to_string()),
            ("poly", poly_spec(&p)),
            ("primes", join_counts(&primes)),
            ("N", n.to_string()),
        ],
    )?;
    csv.comment("columns: q1,q2,N,re,im,abs")?;
    let mut worst = 0.0f64;
    for (i, &q1) in primes.iter().enumerate() {
        for &q2 in &primes[i + 1..] {
            let b = kbsz_correlation(&*orbit, q1, q2, n).map_err(runtime_failure)?;
            worst = worst.max(b.norm());
            csv.row(&[
                q1.to_string(),
                q2.to_string(),
                n.to_string(),
                sig17(b.re),
                sig17(b.im),
                sig17(b.norm()),
            ])?;
        }
    }
    csv.finish(&format!("largest |B_N| = {worst:.6}"))
}

fn run_counterexample(opts: &Options) -> Result<(), Failure> {
    let m = opts.count_or("M", 1_000_000).map_err(config_error)?;
    if m == 0 || m > MAX_SEQUENCE_LEN {
        return Err(config_error(format!("--M must be in 1..={MAX_SEQUENCE_LEN}")));
    }
    let runs = match opts.count_list("runs").map_err(config_error)? {
        Some(runs) => {
            let mut runs = runs;
            runs.sort_unstable();
            runs.dedup();
            if runs.first() == Some(&0) || runs.last() > Some(&m) {
                return Err(config_error("--runs must lie in 1..=M"));
            }
            runs
        }
        None => vec![1, 2, 5, 10, 20, 50, 100].into_iter().filter(|&r| r <= m).collect(),
    };

    let table = obtain_table(isqrt_u128(m.saturating_sub(1) as u128) as u64, opts)?;
    let seq = counterexample_sequence(m, &table).map_err(runtime_failure)?;

    if let Some(path) = opts.raw("dump-seq") {
        let file = fs::File::create(path).map_err(|e| runtime_error(format!("{path}: {e}")))?;
        seq.write_plain(BufWriter::new(file))
            .map_err(|e| runtime_error(format!("{path}: {e}")))?;
    }

    let (mut minus, mut zero, mut plus) = (0u64, 0u64, 0u64);
    for &s in seq.symbols() {
        match s {
            -1 => minus += 1,
            0 => zero += 1,
            _ => plus += 1,
        }
    }

    let mut csv = Csv::open(opts)?;
    csv.header(
        "counterexample",
        &[("M", m.to_string()), ("runs", join_counts(&runs))],
    )?;
    csv.comment(&format!("histogram: minus={minus}, zero={zero}, plus={plus}"))?;
    csv.comment("columns: runlen,first_index (-1 when the prefix has no such run)")?;
    for &runlen in &runs {
        let found = seq.first_zero_run(runlen as usize);
        csv.row(&[
            runlen.to_string(),
            found.map_or(-1i64, |i| i as i64).to_string(),
        ])?;
    }
    csv.finish(&format!("sequence of {m} symbols, {} nonzero", minus + plus))
}

fn run_entropy(opts: &Options) -> Result<(), Failure> {
    let m = opts.count_or("M", 1_000_000).map_err(config_error)?;
    if m == 0 || m > MAX_SEQUENCE_LEN {
        return Err(config_error(format!("--M must be in 1..={MAX_SEQUENCE_LEN}")));
    }
    let lengths = opts
        .count_list("lengths")
        .map_err(config_error)?
        .unwrap_or_else(|| vec![16, 32, 64, 128, 256, 512, 1024]);
    let mut lengths: Vec<usize> = lengths.into_iter().map(|l| l as usize).collect();
    lengths.sort_unstable();
    lengths.dedup();
    if lengths.len() < 3 {
        return Err(config_error("--lengths needs at least three distinct values"));
    }
    if lengths.first() == Some(&0) || *lengths.last().unwrap() as u64 > m / 2 {
        return Err(config_error("--lengths must lie in 1..=M/2"));
    }

    let table = obtain_table(isqrt_u128(m.saturating_sub(1) as u128) as u64, opts)?;
    let seq = counterexample_sequence(m, &table).map_err(runtime_failure)?;
    let report = seq.entropy_growth_report(&lengths).map_err(runtime_failure)?;

    let mut csv = Csv::open(opts)?;
    csv.header(
        "entropy",
        &[
            ("M", m.to_string()),
            ("lengths", lengths.iter().map(usize::to_string).collect::<Vec<_>>().join(",")),
        ],
    )?;
    csv.comment("columns: L,count")?;
    for &(l, count) in &report.rows {
        csv.row(&[l.to_string(), count.to_string()])?;
    }
    csv.comment(&format!(
        "fit: slope={}, intercept={}, rms={}",
        sig17(report.slope),
        sig17(report.intercept),
        sig17(report.rms)
    ))?;
    csv.finish(&format!("growth exponent {:.4}", report.slope))
}

fn run_equidist(opts: &Options) -> Result<(), Failure> {
    let p = opts.poly_or("poly", &[0, 1]).map_err(config_error)?;
    let (system, system_str) = opts.system_or_default().map_err(config_error)?;
    let alpha = match system {
        SystemSpec::Rotation { alpha, .. } => alpha,
        _ => return Err(config_error("equidist works on rotation systems only")),
    };
    let checkpoints = match opts.raw("checkpoints") {
        Some(_) => opts.checkpoints_or_ladder(100_000).map_err(config_error)?,
        None => {
            let n = opts.count_or("N", 100_000).map_err(config_error)?;
            if n == 0 {
                return Err(config_error("--N must be at least 1"));
            }
            vec![n]
        }
    };
    let n_max = *checkpoints.last().expect("schedule is never empty");
    if n_max > 10_000_000 {
        return Err(config_error("equidist handles at most 10^7 points"));
    }

    // positions p(n) * alpha for n = 1..=N, exact on the grid
    let mut points = Vec::with_capacity(n_max as usize);
    let mut stream = p.stream_scaled(1, alpha.raw());
    for _ in 0..n_max {
        points.push(Frac64::new(stream.next().expect("stream is infinite")));
    }

    let mut csv = Csv::open(opts)?;
    csv.header(
        "equidist",
        &[
            ("system", system_str),
            ("poly", poly_spec(&p)),
            ("checkpoints", join_counts(&checkpoints)),
        ],
    )?;
    csv.comment("columns: N,dstar")?;
    let mut last = 0.0;
    for &cp in &checkpoints {
        let mut prefix = points[..cp as usize].to_vec();
        prefix.sort_unstable_by_key(|f| f.raw());
        last = star_discrepancy(&prefix).map_err(runtime_failure)?;
        csv.row(&[cp.to_string(), sig17(last)])?;
    }
    csv.finish(&format!("D* = {last:.6} at N = {n_max}"))
}
