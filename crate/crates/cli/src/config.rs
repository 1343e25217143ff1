//! Flag and config-file parsing.
//!
//! Everything arrives as `--key value` (or `--key=value`) strings, optionally
//! seeded from a `key = value` file via `--config`; command-line flags win.
//! All values are validated here, before any computation starts, so a bad
//! config never costs a sieve build.
//!
//! Count-valued flags accept `10^7`, `2^16`, `1e6`, `0x989680` and `_`
//! separators besides plain integers.

use std::collections::BTreeMap;
use std::fs;

use mulab::torus::{HeisenbergPoint, GOLDEN, SQRT2_FRAC, SQRT3_FRAC};
use mulab::{Frac64, IntPolynomial};

/// Default geometric checkpoint ratio: half a decade per step.
pub const SQRT10: f64 = 3.162_277_660_168_379_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sieve,
    Average,
    Davenport,
    Kbsz,
    Counterexample,
    Entropy,
    Equidist,
}

impl Command {
    pub fn from_name(name: &str) -> Option<Command> {
        Some(match name {
            "sieve" => Command::Sieve,
            "average" => Command::Average,
            "davenport" => Command::Davenport,
            "kbsz" => Command::Kbsz,
            "counterexample" => Command::Counterexample,
            "entropy" => Command::Entropy,
            "equidist" => Command::Equidist,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Sieve => "sieve",
            Command::Average => "average",
            Command::Davenport => "davenport",
            Command::Kbsz => "kbsz",
            Command::Counterexample => "counterexample",
            Command::Entropy => "entropy",
            Command::Equidist => "equidist",
        }
    }

    /// Flags this command consumes. `--threads`, `--config` and `--out` are
    /// accepted everywhere.
    fn accepts(self, key: &str) -> bool {
        if matches!(key, "threads" | "config" | "out") {
            return true;
        }
        let own: &[&str] = match self {
            Command::Sieve => &["limit", "checkpoints", "sieve-cache"],
            Command::Average => &[
                "N",
                "checkpoints",
                "poly",
                "system",
                "observable",
                "weight",
                "limit",
                "sieve-cache",
            ],
            Command::Davenport => {
                &["N", "checkpoints", "poly", "grid", "refine", "limit", "sieve-cache"]
            }
            Command::Kbsz => {
                &["N", "poly", "system", "observable", "primes", "limit", "sieve-cache"]
            }
            Command::Counterexample => &["M", "runs", "dump-seq", "limit", "sieve-cache"],
            Command::Entropy => &["M", "lengths", "limit", "sieve-cache"],
            Command::Equidist => &["N", "checkpoints", "poly", "system"],
        };
        own.contains(&key)
    }
}

/// Every key any command understands; config files may hold a superset of
/// one command's flags (shared sweep files), unknown keys are still errors.
const KNOWN_KEYS: &[&str] = &[
    "limit",
    "N",
    "M",
    "poly",
    "system",
    "observable",
    "weight",
    "checkpoints",
    "grid",
    "refine",
    "primes",
    "lengths",
    "runs",
    "out",
    "dump-seq",
    "sieve-cache",
    "threads",
    "config",
];

#[derive(Debug)]
struct Entry {
    value: String,
    /// Where the value came from, pre-formatted for diagnostics:
    /// `--grid` or `sweep.cfg:7: grid`.
    origin: String,
}

/// Parsed key/value store with origin tracking.
#[derive(Debug)]
pub struct Options {
    values: BTreeMap<String, Entry>,
}

impl Options {
    /// Collects flags for `cmd`, loading `--config` first so command-line
    /// values override file values.
    pub fn gather(cmd: Command, args: &[String]) -> Result<Options, String> {
        let flags = split_flags(args)?;
        for (key, _) in &flags {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("unknown flag --{key}"));
            }
            if !cmd.accepts(key) && key != "config" {
                return Err(format!("--{key} is not a flag of '{}'", cmd.name()));
            }
        }

        let mut values = BTreeMap::new();
        if let Some((_, path)) = flags.iter().find(|(k, _)| k == "config") {
            for (key, value, line) in parse_config_file(path)? {
                if !KNOWN_KEYS.contains(&key.as_str()) {
                    return Err(format!("{path}:{line}: unknown key '{key}'"));
                }
                let origin = format!("{path}:{line}: {key}");
                values.insert(key, Entry { value, origin });
            }
            values.retain(|key, _| cmd.accepts(key));
        }
        for (key, value) in flags {
            if key == "config" {
                continue;
            }
            let origin = format!("--{key}");
            values.insert(key, Entry { value, origin });
        }
        Ok(Options { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|e| e.value.as_str())
    }

    fn parsed<T>(
        &self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<Option<T>, String> {
        match self.values.get(key) {
            None => Ok(None),
            Some(e) => parse(&e.value).map(Some).map_err(|msg| format!("{}: {msg}", e.origin)),
        }
    }

    pub fn count(&self, key: &str) -> Result<Option<u64>, String> {
        self.parsed(key, parse_count)
    }

    pub fn count_or(&self, key: &str, default: u64) -> Result<u64, String> {
        Ok(self.count(key)?.unwrap_or(default))
    }

    pub fn require_count(&self, key: &str) -> Result<u64, String> {
        self.count(key)?.ok_or_else(|| format!("missing required flag --{key}"))
    }

    pub fn count_list(&self, key: &str) -> Result<Option<Vec<u64>>, String> {
        self.parsed(key, parse_count_list)
    }

    pub fn poly_or(&self, key: &str, default: &[i64]) -> Result<IntPolynomial, String> {
        Ok(self
            .parsed(key, |s| s.parse::<IntPolynomial>().map_err(|e| e.to_string()))?
            .unwrap_or_else(|| IntPolynomial::new(default.to_vec())))
    }

    /// The system spec together with the literal string for header echo.
    pub fn system_or_default(&self) -> Result<(SystemSpec, String), String> {
        match self.values.get("system") {
            None => Ok((
                SystemSpec::Rotation { alpha: GOLDEN, golden: true },
                "rotation:alpha=golden".into(),
            )),
            Some(e) => {
                let spec =
                    parse_system(&e.value).map_err(|msg| format!("{}: {msg}", e.origin))?;
                Ok((spec, e.value.clone()))
            }
        }
    }

    pub fn observable_or_default(
        &self,
        system: &SystemSpec,
    ) -> Result<ObservableSpec, String> {
        let parsed = self.parsed("observable", parse_observable)?;
        let obs = parsed.unwrap_or_else(|| match system {
            SystemSpec::Rotation { .. } => ObservableSpec::Char(1),
            SystemSpec::Heisenberg { .. } => ObservableSpec::CharX(1),
            SystemSpec::Counterexample => ObservableSpec::Coord0,
        });
        check_observable(system, &obs)?;
        Ok(obs)
    }

    /// Checkpoint resolution: an explicit schedule wins, otherwise a
    /// half-decade geometric ladder from 10^3 up to `--N` (default
    /// `default_n`). Passing both `--N` and `--checkpoints` in the same
    /// layer is a conflict; across layers the command line wins.
    pub fn checkpoints_or_ladder(&self, default_n: u64) -> Result<Vec<u64>, String> {
        let use_checkpoints = match (self.values.get("checkpoints"), self.values.get("N")) {
            (Some(c), Some(n)) => {
                let (c_cli, n_cli) = (c.origin.starts_with("--"), n.origin.starts_with("--"));
                if c_cli == n_cli {
                    return Err("pass --N or --checkpoints, not both".into());
                }
                c_cli
            }
            (c, _) => c.is_some(),
        };
        if use_checkpoints {
            Ok(self.parsed("checkpoints", parse_checkpoints)?.expect("key is present"))
        } else {
            let n = self.count_or("N", default_n)?;
            if n == 0 {
                return Err("--N must be at least 1".into());
            }
            Ok(default_ladder(n))
        }
    }

    pub fn threads(&self) -> Result<Option<usize>, String> {
        let t = self.count("threads")?;
        if t == Some(0) {
            return Err("--threads must be at least 1".into());
        }
        Ok(t.map(|t| t as usize))
    }

    pub fn weight_is_moebius(&self) -> Result<bool, String> {
        self.parsed("weight", |s| match s {
            "mobius" | "moebius" => Ok(true),
            "unit" => Ok(false),
            other => Err(format!("bad weight '{other}' (unit or mobius)")),
        })
        .map(|w| w.unwrap_or(true))
    }
}

/// `{10^3, 10^3.5, ..., n}`, or just `{n}` when n is small.
pub fn default_ladder(n: u64) -> Vec<u64> {
    if n <= 1000 {
        vec![n]
    } else {
        geometric_checkpoints(1000, n, SQRT10)
    }
}

/// Rounded geometric ladder `start * factor^k`, ending exactly at `stop`.
pub fn geometric_checkpoints(start: u64, stop: u64, factor: f64) -> Vec<u64> {
    let mut out = Vec::new();
    // factor > 1 caps the step count well below this
    for k in 0..4096 {
        let v = (start as f64 * factor.powi(k)).round();
        if v >= stop as f64 {
            break;
        }
        out.push(v as u64);
    }
    out.push(stop);
    out.dedup();
    out
}

/// Dynamical system selector.
pub enum SystemSpec {
    Rotation { alpha: Frac64, golden: bool },
    Heisenberg { a: HeisenbergPoint },
    Counterexample,
}

/// Observable selector; which ones apply depends on the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableSpec {
    Char(i64),
    CharX(i64),
    CharY(i64),
    SmoothZ,
    Coord0,
}

impl std::fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObservableSpec::Char(k) => write!(f, "char:{k}"),
            ObservableSpec::CharX(k) => write!(f, "char_x:{k}"),
            ObservableSpec::CharY(k) => write!(f, "char_y:{k}"),
            ObservableSpec::SmoothZ => write!(f, "smooth_z"),
            ObservableSpec::Coord0 => write!(f, "coord0"),
        }
    }
}

pub fn check_observable(system: &SystemSpec, obs: &ObservableSpec) -> Result<(), String> {
    let ok = match system {
        SystemSpec::Rotation { .. } => matches!(obs, ObservableSpec::Char(_)),
        SystemSpec::Heisenberg { .. } => matches!(
            obs,
            ObservableSpec::CharX(_) | ObservableSpec::CharY(_) | ObservableSpec::SmoothZ
        ),
        SystemSpec::Counterexample => matches!(obs, ObservableSpec::Coord0),
    };
    if ok {
        Ok(())
    } else {
        let kind = match system {
            SystemSpec::Rotation { .. } => "rotation (use char:k)",
            SystemSpec::Heisenberg { .. } => "heis (use char_x:k, char_y:k or smooth_z)",
            SystemSpec::Counterexample => "subshift:counterexample (use coord0)",
        };
        Err(format!("observable {obs} does not fit system {kind}"))
    }
}

/// `rotation:alpha=golden`, `heis:a=sqrt2,sqrt3,0` or
/// `subshift:counterexample`; case-sensitive.
pub fn parse_system(spec: &str) -> Result<SystemSpec, String> {
    if let Some(rest) = spec.strip_prefix("rotation:") {
        let angle = rest
            .strip_prefix("alpha=")
            .ok_or_else(|| format!("rotation takes alpha=..., got '{rest}'"))?;
        let alpha = odd_angle(parse_angle(angle)?);
        Ok(SystemSpec::Rotation { alpha, golden: angle == "golden" })
    } else if let Some(rest) = spec.strip_prefix("heis:") {
        let triple = rest
            .strip_prefix("a=")
            .ok_or_else(|| format!("heis takes a=x,y,z, got '{rest}'"))?;
        let parts: Vec<&str> = triple.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("heis:a= needs three coordinates, got {}", parts.len()));
        }
        let x = parse_angle(parts[0])?;
        let y = parse_angle(parts[1])?;
        let z = parse_angle(parts[2])?.to_f64();
        Ok(SystemSpec::Heisenberg { a: HeisenbergPoint::new(x, y, z) })
    } else if spec == "subshift:counterexample" {
        Ok(SystemSpec::Counterexample)
    } else {
        Err(format!(
            "unknown system '{spec}' (rotation:alpha=..., heis:a=x,y,z, subshift:counterexample)"
        ))
    }
}

/// Named angles or a decimal in [0, 1), rounded to the 2^-64 grid.
fn parse_angle(s: &str) -> Result<Frac64, String> {
    match s {
        "golden" => Ok(GOLDEN),
        "sqrt2" => Ok(SQRT2_FRAC),
        "sqrt3" => Ok(SQRT3_FRAC),
        other => {
            let t: f64 =
                other.parse().map_err(|_| format!("bad angle '{other}'"))?;
            Frac64::from_real(t).map_err(|e| e.to_string())
        }
    }
}

// Rotation angles are nudged to the nearest odd raw value so the grid
// rotation has full order 2^64; the shift is at most 2^-64.
fn odd_angle(alpha: Frac64) -> Frac64 {
    Frac64::new(alpha.raw() | 1)
}

pub fn parse_observable(s: &str) -> Result<ObservableSpec, String> {
    if s == "smooth_z" {
        return Ok(ObservableSpec::SmoothZ);
    }
    if s == "coord0" {
        return Ok(ObservableSpec::Coord0);
    }
    let (kind, k) = s
        .split_once(':')
        .ok_or_else(|| format!("bad observable '{s}'"))?;
    let k: i64 = k.parse().map_err(|_| format!("bad frequency in observable '{s}'"))?;
    match kind {
        "char" => Ok(ObservableSpec::Char(k)),
        "char_x" => Ok(ObservableSpec::CharX(k)),
        "char_y" => Ok(ObservableSpec::CharY(k)),
        _ => Err(format!("bad observable '{s}'")),
    }
}

/// `N1,N2,...` or `geom:START:STOP:FACTOR`; result is sorted and deduplicated.
pub fn parse_checkpoints(s: &str) -> Result<Vec<u64>, String> {
    if let Some(rest) = s.strip_prefix("geom:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("geom takes START:STOP:FACTOR, got '{rest}'"));
        }
        let start = parse_count(parts[0])?;
        let stop = parse_count(parts[1])?;
        let factor: f64 = parts[2].parse().map_err(|_| format!("bad factor '{}'", parts[2]))?;
        if start == 0 || stop < start {
            return Err(format!("need 1 <= START <= STOP, got {start}..{stop}"));
        }
        if !(factor > 1.0) || !factor.is_finite() {
            return Err(format!("factor must exceed 1, got {factor}"));
        }
        Ok(geometric_checkpoints(start, stop, factor))
    } else {
        let mut cps = parse_count_list(s)?;
        if cps.iter().any(|&c| c == 0) {
            return Err("checkpoints start at 1".into());
        }
        cps.sort_unstable();
        cps.dedup();
        Ok(cps)
    }
}

pub fn parse_count_list(s: &str) -> Result<Vec<u64>, String> {
    if s.trim().is_empty() {
        return Err("empty list".into());
    }
    s.split(',').map(|part| parse_count(part.trim())).collect()
}

/// Nonnegative integer with `_` separators, in decimal, hex (`0x`),
/// power (`2^16`) or scientific (`1e7`) notation.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t: String = s.chars().filter(|&c| c != '_').collect();
    let fail = || format!("bad count '{s}'");
    if let Some(hex) = t.strip_prefix("0x") {
        return u64::from_str_radix(hex, 16).map_err(|_| fail());
    }
    if let Some((base, exp)) = t.split_once('^') {
        let base: u64 = base.parse().map_err(|_| fail())?;
        let exp: u32 = exp.parse().map_err(|_| fail())?;
        return base.checked_pow(exp).ok_or_else(|| format!("count '{s}' exceeds u64"));
    }
    if let Some((mantissa, exp)) = t.split_once(['e', 'E']) {
        let mantissa: u64 = mantissa.parse().map_err(|_| fail())?;
        let exp: u32 = exp.parse().map_err(|_| fail())?;
        return 10u64
            .checked_pow(exp)
            .and_then(|p| mantissa.checked_mul(p))
            .ok_or_else(|| format!("count '{s}' exceeds u64"));
    }
    t.parse().map_err(|_| fail())
}

fn split_flags(args: &[String]) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let body = args[i]
            .strip_prefix("--")
            .ok_or_else(|| format!("expected a --flag, got '{}'", args[i]))?;
        if let Some((key, value)) = body.split_once('=') {
            out.push((key.to_string(), value.to_string()));
        } else {
            i += 1;
            let value =
                args.get(i).ok_or_else(|| format!("--{body} needs a value"))?;
            out.push((body.to_string(), value.clone()));
        }
        i += 1;
    }
    Ok(out)
}

fn parse_config_file(path: &str) -> Result<Vec<(String, String, u32)>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i as u32 + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (key, value) = t
            .split_once('=')
            .ok_or_else(|| format!("{path}:{lineno}: expected KEY = VALUE"))?;
        out.push((key.trim().to_string(), value.trim().to_string(), lineno));
    }
    Ok(out)
}
