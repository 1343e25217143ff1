//! End-to-end checks of the binary: artifact format, exit codes, config
//! files, the sieve cache. Everything runs the real executable.

use std::fs;
use std::process::Output;

fn mulab(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_mulab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("csv is utf-8")
}

/// Data rows of a CSV artifact, comments stripped, split into cells.
fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sieve_artifact_reports_mertens_and_density() {
    let out = mulab(&["sieve", "--limit", "100"]);
    let csv = stdout_of(&out);
    assert!(csv.starts_with("# mulab sieve\n"), "{csv}");
    assert!(csv.contains("# histogram: minus=30, zero=39, plus=31"), "{csv}");

    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 3, "decade checkpoints 1, 10, 100");
    // M(10) = -1 and M(100) = 1
    assert_eq!(rows[1][0], "10");
    assert_eq!(rows[1][1], "-1");
    assert_eq!(rows[2][0], "100");
    assert_eq!(rows[2][1], "1");
    let density: f64 = rows[2][3].parse().unwrap();
    assert_eq!(density, 0.61, "61 squarefree below 100");
}

#[test]
fn sieve_at_limit_one_is_a_single_unit_row() {
    let csv = stdout_of(&mulab(&["sieve", "--limit", "1"]));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][..2], ["1".to_string(), "1".to_string()], "mu(1) = 1");
}

#[test]
fn unit_weight_constant_observable_averages_to_exactly_one() {
    let csv = stdout_of(&mulab(&[
        "average",
        "--weight",
        "unit",
        "--observable",
        "char:0",
        "--checkpoints",
        "10,100,1000",
    ]));
    for row in data_rows(&csv) {
        assert_eq!(row[1], "1.0000000000000000e0", "re(S_N) at N = {}", row[0]);
        assert_eq!(row[3], "1.0000000000000000e0", "|S_N| at N = {}", row[0]);
    }
}

#[test]
fn kbsz_of_the_constant_function_is_exactly_one() {
    let csv = stdout_of(&mulab(&[
        "kbsz",
        "--observable",
        "char:0",
        "--primes",
        "2,3",
        "--N",
        "1000",
    ]));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][3], "1.0000000000000000e0");
    assert_eq!(rows[0][5], "1.0000000000000000e0");
}

#[test]
fn davenport_sup_dominates_the_mertens_point() {
    // theta = 0 is on every grid, so the sup is at least |M(N)|/N; M(10^4) = -23
    let csv = stdout_of(&mulab(&[
        "davenport",
        "--poly",
        "0,1",
        "--checkpoints",
        "10000",
        "--grid",
        "2^10",
        "--refine",
        "5",
    ]));
    let rows = data_rows(&csv);
    let sup: f64 = rows[0][3].parse().unwrap();
    assert!(sup >= 23.0 / 10_000.0, "sup {sup} below |M(10^4)|/10^4");
}

#[test]
fn average_headers_echo_the_run_configuration() {
    let csv = stdout_of(&mulab(&[
        "average",
        "--system",
        "subshift:counterexample",
        "--poly",
        "0,0,1",
        "--checkpoints",
        "100,1000",
    ]));
    for needle in [
        "# weight = mobius",
        "# system = subshift:counterexample",
        "# observable = coord0",
        "# poly = 0,0,1",
        "# checkpoints = 100,1000",
        "# columns: N,re,im,abs",
        "# final: abs=",
    ] {
        assert!(csv.contains(needle), "missing {needle:?} in:\n{csv}");
    }
}

#[test]
fn config_file_seeds_flags_and_the_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    fs::write(&cfg, "poly = 0,0,1\ncheckpoints = 100,1000\ngrid = 2^10\n").unwrap();

    let csv = stdout_of(&mulab(&[
        "average",
        "--config",
        cfg.to_str().unwrap(),
        "--checkpoints",
        "50,500",
    ]));
    assert!(csv.contains("# poly = 0,0,1"), "{csv}");
    assert!(csv.contains("# checkpoints = 50,500"), "{csv}");
}

#[test]
fn bad_configs_exit_2_with_a_diagnostic() {
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["sieve"], "missing required flag --limit"),
        (vec!["frobnicate"], "unknown command"),
        (vec!["sieve", "--limit", "10", "--bogus", "1"], "unknown flag"),
        (vec!["sieve", "--limit", "ten"], "bad count"),
        (vec!["davenport", "--N", "10", "--checkpoints", "5,10"], "not both"),
        (vec!["kbsz", "--primes", "4,6", "--N", "10"], "not prime"),
        (vec!["kbsz", "--primes", "7", "--N", "10"], "two distinct"),
        (vec!["average", "--system", "rotation:alpha=golden", "--observable", "coord0"], "does not fit"),
        (vec!["equidist", "--system", "subshift:counterexample"], "rotation systems only"),
        (vec!["sieve", "--limit", "10", "--grid", "4"], "not a flag of 'sieve'"),
    ];
    for (args, needle) in cases {
        let out = mulab(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "args {args:?}: stderr {err:?}");
    }
}

#[test]
fn config_file_errors_carry_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.cfg");
    fs::write(&cfg, "limit = 100\nnot a pair\n").unwrap();
    let out = mulab(&["sieve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.cfg:2"), "{err}");
}

#[test]
fn runtime_failures_exit_3() {
    let out = mulab(&["sieve", "--limit", "10", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(out.status.code(), Some(3));

    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("corrupt.bin");
    fs::write(&cache, b"XXXXXXXXXXXX").unwrap();
    let out = mulab(&["sieve", "--limit", "10", "--sieve-cache", cache.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cache"), "names the cache");
}

#[test]
fn sieve_cache_round_trips_and_grows_on_demand() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("mu.bin");
    let cache = cache.to_str().unwrap();

    let first = stdout_of(&mulab(&["sieve", "--limit", "1000", "--sieve-cache", cache]));
    assert!(fs::metadata(cache).unwrap().len() >= 1000);
    let reused = stdout_of(&mulab(&["sieve", "--limit", "1000", "--sieve-cache", cache]));
    assert_eq!(first, reused, "cached run reproduces the artifact");

    // a larger run rebuilds the cache rather than failing
    let bigger = stdout_of(&mulab(&["sieve", "--limit", "2000", "--sieve-cache", cache]));
    assert!(fs::metadata(cache).unwrap().len() >= 2000);
    assert!(bigger.contains("# limit = 2000"));
}

#[test]
fn counterexample_dump_writes_the_plain_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("seq.txt");
    let out = mulab(&[
        "counterexample",
        "--M",
        "26",
        "--runs",
        "1,2",
        "--dump-seq",
        dump.to_str().unwrap(),
        "--out",
        dir.path().join("runs.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // a_1 = mu(1), a_4 = mu(2), a_9 = mu(3), a_16 = mu(4) = 0, a_25 = mu(5)
    assert_eq!(fs::read_to_string(&dump).unwrap(), "0+00-0000-000000000000000-");

    let runs = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let rows = data_rows(&runs);
    assert_eq!(rows[0], ["1", "0"], "a_0 = 0 starts the first 1-run");
    assert_eq!(rows[1], ["2", "2"], "a_2 = a_3 = 0");
}

#[test]
fn out_flag_and_stdout_carry_the_same_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dav.csv");
    let piped = stdout_of(&mulab(&["equidist", "--poly", "0,0,1", "--N", "1000"]));
    let filed = mulab(&[
        "equidist",
        "--poly",
        "0,0,1",
        "--N",
        "1000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(filed.status.success());
    assert_eq!(piped, fs::read_to_string(&path).unwrap());
}
