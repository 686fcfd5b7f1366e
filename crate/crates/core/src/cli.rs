//! Command-line front end: instance generation, encoding, reconciliation,
//! verification and benchmarking.

use std::collections::HashSet;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::fks::{SparseString, Variant, DEFAULT_ALPHA};
use crate::hashing::families::ceil_log2;
use crate::protocol::{deserialize, encode_with, message_bit_size, receiver_reconcile, serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIFFER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;
pub const EXIT_UNCORRECTABLE: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Uncorrectable => EXIT_UNCORRECTABLE,
            Error::ParameterOverflow(_) | Error::NoPrimeFound { .. } => EXIT_OVERFLOW,
            _ => EXIT_USAGE,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::usage(format!("{}: {e}", path.display()))
}

/// Parses the text form: a `u=<u> sigma=<sigma>` header, then `<position> <value>` lines.
pub fn parse_kv(text: &str) -> CliResult<SparseString> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| CliError::usage("missing header line"))?;
    let mut fields = header.split_whitespace();
    let mut field = |key: &str| -> CliResult<u64> {
        fields
            .next()
            .and_then(|f| f.strip_prefix(key)?.strip_prefix('='))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| CliError::usage(format!("header must read \"u=<u> sigma=<sigma>\", got {header:?}")))
    };
    let (u, sigma) = (field("u")?, field("sigma")?);
    if fields.next().is_some() {
        return Err(CliError::usage("trailing fields in header"));
    }
    let mut pairs = Vec::new();
    for (i, line) in lines {
        let mut it = line.split_whitespace().map(str::parse::<u64>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(p)), Some(Ok(v)), None) => pairs.push((p, v)),
            _ => return Err(CliError::usage(format!("line {}: expected \"<position> <value>\"", i + 1))),
        }
    }
    SparseString::new(u, sigma, pairs).map_err(|e| CliError::usage(e.to_string()))
}

pub fn format_kv(s: &SparseString) -> String {
    let mut out = format!("u={} sigma={}\n", s.u(), s.sigma());
    for (p, v) in s.pairs() {
        out.push_str(&format!("{p} {v}\n"));
    }
    out
}

pub fn read_kv(path: &Path) -> CliResult<SparseString> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_kv(&text).map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.message)))
}

fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| io_error(p, e)),
        None => io::stdout().write_all(bytes).map_err(|e| CliError::usage(e.to_string())),
    }
}

fn distinct_absent<R: Rng>(rng: &mut R, u: u64, taken: &SparseString, count: usize) -> Vec<u64> {
    let free = u - taken.n();
    if free >= 2 * count as u64 {
        let mut chosen = HashSet::with_capacity(count);
        while chosen.len() < count {
            let p = rng.gen_range(0..u);
            if taken.value_at(p) == 0 {
                chosen.insert(p);
            }
        }
        let mut out: Vec<u64> = chosen.into_iter().collect();
        out.sort_unstable();
        return out;
    }
    // Few free slots: enumerate the gaps between occupied positions.
    let mut gaps = Vec::with_capacity(free as usize);
    let mut next = 0u64;
    for &(p, _) in taken.pairs().iter().chain([(u, 0)].iter()) {
        gaps.extend(next..p);
        next = p + 1;
    }
    index::sample(rng, gaps.len(), count).into_iter().map(|i| gaps[i]).collect()
}

/// A random string with `n` non-zeros and a copy at dense distance exactly `d`.
///
/// Edits are drawn one at a time among value changes, removals and additions,
/// restricted to the kinds that remain possible.
pub fn generate_pair(u: u64, sigma: u64, n: u64, d: u64, seed: u64) -> crate::Result<(SparseString, SparseString)> {
    if u == 0 || sigma < 2 || n > u || d > u {
        return Err(Error::InvalidInput(format!("cannot plant {d} edits with n={n}, u={u}, sigma={sigma}")));
    }
    if n > usize::MAX as u64 || d > usize::MAX as u64 {
        return Err(Error::ParameterOverflow("instance too large".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = index::sample(&mut rng, u as usize, n as usize);
    let pairs = positions.into_iter().map(|p| (p as u64, rng.gen_range(1..sigma))).collect();
    let s = SparseString::new(u, sigma, pairs)?;

    let (mut removals, mut changes, mut additions) = (0u64, 0u64, 0u64);
    for _ in 0..d {
        let mut kinds = Vec::with_capacity(3);
        if removals + changes < n {
            kinds.push(0);
            if sigma >= 3 {
                kinds.push(1);
            }
        }
        if additions < u - n {
            kinds.push(2);
        }
        match kinds[rng.gen_range(0..kinds.len())] {
            0 => removals += 1,
            1 => changes += 1,
            _ => additions += 1,
        }
    }

    let mut t: Vec<(u64, u64)> = s.pairs().to_vec();
    let touched = index::sample(&mut rng, n as usize, (removals + changes) as usize).into_vec();
    let (removed, changed) = touched.split_at(removals as usize);
    for &i in changed {
        let old = t[i].1;
        t[i].1 = 1 + (old - 1 + rng.gen_range(1..sigma - 1)) % (sigma - 1);
    }
    let removed: HashSet<usize> = removed.iter().copied().collect();
    let mut t: Vec<(u64, u64)> =
        t.into_iter().enumerate().filter(|(i, _)| !removed.contains(i)).map(|(_, e)| e).collect();
    for p in distinct_absent(&mut rng, u, &s, additions as usize) {
        t.push((p, rng.gen_range(1..sigma)));
    }
    Ok((s, SparseString::new(u, sigma, t)?))
}

/// The α constant, overridable through `HAMSYNC_ALPHA`.
pub fn alpha_from_env() -> CliResult<u64> {
    match std::env::var("HAMSYNC_ALPHA") {
        Err(_) => Ok(DEFAULT_ALPHA),
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(a) if a >= 1 => Ok(a),
            _ => Err(CliError::usage(format!("HAMSYNC_ALPHA must be a positive integer, got {v:?}"))),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub u: Vec<u64>,
    pub sigma: Vec<u64>,
    pub n: Vec<u64>,
    pub k: Vec<u64>,
}

fn parse_number(s: &str) -> Option<u64> {
    match s.split_once('^') {
        Some((base, exp)) => base.trim().parse::<u64>().ok()?.checked_pow(exp.trim().parse().ok()?),
        None => s.trim().parse().ok(),
    }
}

impl std::str::FromStr for Grid {
    type Err = CliError;

    /// `u=2^16,2^32;sigma=2,256;n=16;k=0,1,16`. Every axis is required.
    fn from_str(text: &str) -> CliResult<Self> {
        let mut axes: [Option<Vec<u64>>; 4] = Default::default();
        for part in text.split(';').filter(|p| !p.trim().is_empty()) {
            let (key, list) = part.split_once('=').ok_or_else(|| CliError::usage(format!("grid axis {part:?}")))?;
            let slot = match key.trim() {
                "u" => 0,
                "sigma" => 1,
                "n" => 2,
                "k" => 3,
                other => return Err(CliError::usage(format!("unknown grid axis {other:?}"))),
            };
            let values = list
                .split(',')
                .map(|v| parse_number(v).ok_or_else(|| CliError::usage(format!("grid value {v:?}"))))
                .collect::<CliResult<Vec<_>>>()?;
            axes[slot] = Some(values);
        }
        let [u, sigma, n, k] = axes;
        let need = |a: Option<Vec<u64>>, name: &str| a.ok_or_else(|| CliError::usage(format!("grid lacks {name}")));
        Ok(Grid { u: need(u, "u")?, sigma: need(sigma, "sigma")?, n: need(n, "n")?, k: need(k, "k")? })
    }
}

/// One benchmark trial.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub u: u64,
    pub sigma: u64,
    pub n: u64,
    pub k: u64,
    pub seed: u64,
    pub message_bits: u64,
    pub encode_ms: f64,
    pub reconcile_ms: f64,
    pub ok: bool,
}

pub const BENCH_COLUMNS: [&str; 9] =
    ["u", "sigma", "n", "k", "seed", "message_bits", "encode_ms", "reconcile_ms", "ok"];

/// `message_bits / (k·(⌈log₂u⌉+⌈log₂σ⌉))`; `None` when `k = 0`.
pub fn size_ratio(r: &BenchRecord) -> Option<f64> {
    (r.k > 0).then(|| {
        let per = ceil_log2(r.u as u128) + ceil_log2(r.sigma as u128);
        r.message_bits as f64 / (r.k as f64 * per.max(1) as f64)
    })
}

/// Runs one generate, encode, reconcile cycle through the wire format.
pub fn bench_trial(u: u64, sigma: u64, n: u64, k: u64, seed: u64, alpha: u64) -> CliResult<BenchRecord> {
    let (s, t) = generate_pair(u, sigma, n, k, seed)?;
    let start = Instant::now();
    let enc = encode_with(&s, k, alpha, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let bytes = serialize(&enc.message);
    let encode_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let msg = deserialize(&bytes)?;
    let got = receiver_reconcile(&t, &msg)?;
    let reconcile_ms = start.elapsed().as_secs_f64() * 1e3;
    let ok = got == s;
    let record =
        BenchRecord { u, sigma, n, k, seed, message_bits: message_bit_size(&msg), encode_ms, reconcile_ms, ok };
    if !ok {
        return Err(CliError { code: EXIT_UNCORRECTABLE, message: format!("wrong reconciliation: {record:?}") });
    }
    Ok(record)
}

/// Every grid cell with `n ≤ u` and `k ≤ u`, `trials` times. Trial `i` of every cell uses
/// seed `seed + i`, so cells differing only in `k` share their sender strings.
pub fn run_bench(grid: &Grid, trials: u64, seed: u64, alpha: u64) -> CliResult<Vec<BenchRecord>> {
    let mut out = Vec::new();
    for &u in &grid.u {
        for &sigma in &grid.sigma {
            for &n in &grid.n {
                for &k in &grid.k {
                    if n > u || k > u {
                        continue;
                    }
                    for i in 0..trials {
                        out.push(bench_trial(u, sigma, n, k, seed.wrapping_add(i), alpha)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn write_bench_csv<W: Write>(records: &[BenchRecord], w: W) -> CliResult<()> {
    let mut csv = csv::Writer::from_writer(w);
    let fail = |e: csv::Error| CliError::usage(e.to_string());
    csv.write_record(BENCH_COLUMNS).map_err(fail)?;
    for r in records {
        csv.write_record([
            r.u.to_string(),
            r.sigma.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            r.message_bits.to_string(),
            format!("{:.3}", r.encode_ms),
            format!("{:.3}", r.reconcile_ms),
            r.ok.to_string(),
        ])
        .map_err(fail)?;
    }
    csv.flush().map_err(|e| CliError::usage(e.to_string()))
}

#[derive(Parser, Debug)]
#[command(name = "hamsync", version, about = "One-way reconciliation of sparse strings under Hamming distance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Shape {
    #[arg(long)]
    u: u64,
    #[arg(long)]
    sigma: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random string s and a copy t at distance exactly d.
    Gen {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        d: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, num_args = 2, value_names = ["S", "T"], required = true)]
        out: Vec<PathBuf>,
    },
    /// Build the message for a string.
    Encode {
        input: PathBuf,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Recover the sender's string from a local copy and a message.
    Reconcile {
        input: PathBuf,
        message: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare two strings; exit 1 and print their distance if they differ.
    Verify { a: PathBuf, b: PathBuf },
    /// Run the pipeline over a parameter grid and emit CSV.
    Bench {
        #[arg(long, default_value = "u=2^16,2^32;sigma=2,2^8;n=1,16,2^10;k=0,1,16")]
        grid: String,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn run_command(cmd: Command, stdout: &mut dyn Write) -> CliResult<i32> {
    let print = |w: &mut dyn Write, s: String| writeln!(w, "{s}").map_err(|e| CliError::usage(e.to_string()));
    match cmd {
        Command::Gen { shape, n, k, d, seed, out } => {
            if d > k || k > shape.u {
                return Err(CliError::usage(format!("need d <= k <= u, got d={d} k={k} u={}", shape.u)));
            }
            let (s, t) = generate_pair(shape.u, shape.sigma, n, d, seed).map_err(|e| CliError::usage(e.to_string()))?;
            write_bytes(Some(&out[0]), format_kv(&s).as_bytes())?;
            write_bytes(Some(&out[1]), format_kv(&t).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Encode { input, k, seed, out } => {
            let s = read_kv(&input)?;
            let enc = encode_with(&s, k, alpha_from_env()?, &mut ChaCha8Rng::seed_from_u64(seed))?;
            write_bytes(Some(&out), &serialize(&enc.message))?;
            let variant = match enc.message.params.variant {
                Variant::LargeUniverse => "large-universe",
                Variant::SmallUniverse => "small-universe",
            };
            print(stdout, format!("n={}", s.n()))?;
            print(stdout, format!("variant={variant}"))?;
            print(stdout, format!("message_bits={}", message_bit_size(&enc.message)))?;
            Ok(EXIT_OK)
        }
        Command::Reconcile { input, message, out } => {
            let t = read_kv(&input)?;
            let bytes = fs::read(&message).map_err(|e| io_error(&message, e))?;
            let s = receiver_reconcile(&t, &deserialize(&bytes)?)?;
            write_bytes(out.as_deref(), format_kv(&s).as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Verify { a, b } => {
            let (a, b) = (read_kv(&a)?, read_kv(&b)?);
            if (a.u(), a.sigma()) != (b.u(), b.sigma()) {
                return Err(CliError::usage("headers differ"));
            }
            if a == b {
                return Ok(EXIT_OK);
            }
            print(stdout, a.distance(&b).to_string())?;
            Ok(EXIT_DIFFER)
        }
        Command::Bench { grid, trials, seed, out } => {
            let grid: Grid = grid.parse()?;
            let records = run_bench(&grid, trials, seed, alpha_from_env()?)?;
            let max_ratio =
                records.iter().filter_map(size_ratio).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
            let summary = match max_ratio {
                Some(r) => format!("trials={} max_ratio={r:.4}", records.len()),
                None => format!("trials={} max_ratio=none", records.len()),
            };
            match out {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
                    write_bench_csv(&records, file)?;
                    print(stdout, summary)?;
                }
                None => {
                    write_bench_csv(&records, &mut *stdout)?;
                    eprintln!("{summary}");
                }
            }
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run_command(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let s = parse_kv("u=10 sigma=3\n7 2\n1 1\n\n").unwrap();
        assert_eq!(s.pairs(), &[(1, 1), (7, 2)]);
        assert_eq!(parse_kv(&format_kv(&s)).unwrap(), s);
    }

    #[test]
    fn kv_rejects_bad_input() {
        for text in [
            "",
            "u=10\n",
            "u=10 sigma=3\n1\n",
            "u=10 sigma=3\n11 1\n",
            "u=10 sigma=3\n1 3\n",
            "u=10 sigma=3\n1 1\n1 2\n",
        ] {
            assert_eq!(parse_kv(text).unwrap_err().code, EXIT_USAGE, "{text:?}");
        }
    }

    #[test]
    fn generator_plants_exact_distance() {
        for (u, sigma, n, d) in
            [(1 << 20, 256, 1000, 10), (16, 2, 16, 16), (16, 2, 0, 5), (100, 3, 50, 100), (1 << 40, 2, 3, 7)]
        {
            let (s, t) = generate_pair(u, sigma, n, d, 4).unwrap();
            assert_eq!(s.n(), n);
            assert_eq!(s.distance(&t), d);
            assert_eq!(generate_pair(u, sigma, n, d, 4).unwrap(), (s, t));
        }
    }

    #[test]
    fn grid_syntax() {
        let g: Grid = "u=2^16,100;sigma=2;n=1;k=0,1".parse().unwrap();
        assert_eq!(g, Grid { u: vec![65536, 100], sigma: vec![2], n: vec![1], k: vec![0, 1] });
        assert!("u=2;sigma=2;n=1".parse::<Grid>().is_err());
        assert!("u=2^99;sigma=2;n=1;k=1".parse::<Grid>().is_err());
    }
}
