//! Command-line front end: `match`, `oracle`, `compare`, `decompose` and
//! `bench`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::decompose::{blocks_from_boundaries, Decomposer};
use crate::hash::SeedTree;
use crate::matcher::{EditReport, Ensemble, MatcherConfig, MatcherError, StateSize};
use crate::oracle::{oracle_all_positions, OracleError, DEFAULT_BUDGET};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Open { path: PathBuf, source: io::Error },
    #[error("read error at symbol {pos}: {source}")]
    Read { pos: u64, source: io::Error },
    #[error("invalid UTF-8 at symbol {0}")]
    Utf8(u64),
    #[error("write error: {0}")]
    Write(#[from] io::Error),
    #[error(transparent)]
    Matcher(#[from] MatcherError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "kedit", version, about = "Streaming k-edit approximate pattern matching")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Stream the pattern, then the text, and report a distance per text symbol.
    Match(MatchArgs),
    /// Exact per-position distances by dynamic programming.
    Oracle(OracleArgs),
    /// Run the matcher and the oracle and summarize their agreement.
    Compare(MatchArgs),
    /// Show the block decomposition of an input.
    Decompose(DecomposeArgs),
    /// Time a run on random or given inputs and print CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct Tuning {
    /// Upper bound N on pattern plus text length (default: from file sizes)
    #[arg(long = "n-bound")]
    n_bound: Option<u64>,
    #[arg(long, env = "KEDIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Independent copies (default 2 * ceil(log2 N))
    #[arg(long, env = "KEDIT_COPIES")]
    copies: Option<usize>,
    #[arg(long)]
    beta: Option<usize>,
    #[arg(long)]
    rwin: Option<usize>,
    #[arg(long)]
    scap: Option<usize>,
    #[arg(long)]
    independence: Option<usize>,
    #[arg(long = "failure-exponent", default_value_t = 2)]
    failure_exponent: u32,
    /// Run copies on a thread pool
    #[arg(long)]
    parallel: bool,
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(short, long)]
    k: u32,
    /// Pattern file, `-` for stdin
    #[arg(short, long)]
    pattern: PathBuf,
    /// Text file, `-` for stdin
    #[arg(short, long, default_value = "-")]
    text: PathBuf,
    /// Read only this many pattern symbols, so pattern and text can share stdin
    #[arg(long = "pattern-len")]
    pattern_len: Option<u64>,
    /// Symbols are UTF-8 code points instead of bytes
    #[arg(long)]
    utf8: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(short, long)]
    pattern: PathBuf,
    #[arg(short, long, default_value = "-")]
    text: PathBuf,
    /// Print `>k` for distances above k
    #[arg(short, long)]
    k: Option<u32>,
    #[arg(long)]
    utf8: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// Input file, `-` for stdin
    #[arg(default_value = "-")]
    input: PathBuf,
    #[arg(short, long, default_value_t = 1)]
    k: u32,
    #[arg(long)]
    utf8: bool,
    /// Also print every block grammar
    #[arg(long)]
    grammars: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(short, long, default_value_t = 8)]
    k: u32,
    #[arg(long = "pattern-len", default_value_t = 2000)]
    pattern_len: usize,
    #[arg(long = "text-len", default_value_t = 100_000)]
    text_len: usize,
    #[arg(long, default_value_t = 4)]
    sigma: u32,
    /// Use these files instead of random inputs
    #[arg(long, requires = "text")]
    pattern: Option<PathBuf>,
    #[arg(long, requires = "pattern")]
    text: Option<PathBuf>,
    /// Omit the CSV header
    #[arg(long = "no-header")]
    no_header: bool,
    #[command(flatten)]
    tuning: Tuning,
}

/// Symbols of a byte stream, read one at a time.
pub struct SymbolReader<R> {
    inner: R,
    utf8: bool,
    pos: u64,
    limit: Option<u64>,
}

impl<R: BufRead> SymbolReader<R> {
    pub fn new(inner: R, utf8: bool) -> Self {
        SymbolReader {
            inner,
            utf8,
            pos: 0,
            limit: None,
        }
    }

    /// Stops after `n` symbols.
    pub fn take_symbols(mut self, n: u64) -> Self {
        self.limit = Some(n);
        self
    }

    pub fn into_inner(self) -> R {
        self.inner
    }

    fn byte(&mut self) -> Result<Option<u8>, CliError> {
        let mut b = [0u8];
        loop {
            match self.inner.read(&mut b) {
                Ok(0) => return Ok(None),
                Ok(_) => return Ok(Some(b[0])),
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(source) => return Err(CliError::Read { pos: self.pos, source }),
            }
        }
    }

    pub fn next_symbol(&mut self) -> Result<Option<u32>, CliError> {
        if self.limit.is_some_and(|l| self.pos >= l) {
            return Ok(None);
        }
        let Some(b) = self.byte()? else {
            return Ok(None);
        };
        self.pos += 1;
        if !self.utf8 || b < 0x80 {
            return Ok(Some(b as u32));
        }
        let (extra, init) = match b {
            0xC2..=0xDF => (1, b as u32 & 0x1F),
            0xE0..=0xEF => (2, b as u32 & 0x0F),
            0xF0..=0xF4 => (3, b as u32 & 0x07),
            _ => return Err(CliError::Utf8(self.pos)),
        };
        let mut c = init;
        for _ in 0..extra {
            match self.byte()? {
                Some(n) if n & 0xC0 == 0x80 => c = c << 6 | (n as u32 & 0x3F),
                _ => return Err(CliError::Utf8(self.pos)),
            }
        }
        match char::from_u32(c) {
            Some(ch) if ch.len_utf8() == extra + 1 => Ok(Some(c)),
            _ => Err(CliError::Utf8(self.pos)),
        }
    }
}

impl<R: BufRead> Iterator for SymbolReader<R> {
    type Item = Result<u32, CliError>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_symbol().transpose()
    }
}

fn open<'a>(path: &Path, stdin: &mut Option<Box<dyn BufRead + 'a>>) -> Result<Box<dyn BufRead + 'a>, CliError> {
    if path.as_os_str() == "-" {
        return stdin
            .take()
            .ok_or_else(|| CliError::Usage("stdin can only be read once without --pattern-len".into()));
    }
    let f = File::open(path).map_err(|source| CliError::Open {
        path: path.to_owned(),
        source,
    })?;
    Ok(Box::new(BufReader::new(f)))
}

fn read_all(path: &Path, utf8: bool, stdin: &mut Option<Box<dyn BufRead + '_>>) -> Result<Vec<u32>, CliError> {
    SymbolReader::new(open(path, stdin)?, utf8).collect()
}

fn file_len(path: &Path) -> Option<u64> {
    if path.as_os_str() == "-" {
        return None;
    }
    std::fs::metadata(path).ok().map(|m| m.len())
}

impl Tuning {
    fn config(&self, k: u32, n_default: u64) -> MatcherConfig {
        let mut c = MatcherConfig::new(self.n_bound.unwrap_or(n_default).max(2), k).with_seed(self.seed);
        c.copies = self.copies;
        c.beta = self.beta;
        c.rwin = self.rwin;
        c.scap = self.scap;
        c.independence = self.independence;
        c.failure_exponent = self.failure_exponent;
        c.parallel = self.parallel;
        c
    }
}

#[derive(Serialize)]
struct Record {
    pos: u64,
    dist: Option<u32>,
    finite: bool,
}

fn write_record(out: &mut dyn Write, format: Format, pos: u64, dist: Option<u32>, k: Option<u32>) -> io::Result<()> {
    match format {
        Format::Json => {
            let rec = Record {
                pos,
                dist,
                finite: dist.is_some(),
            };
            writeln!(out, "{}", serde_json::to_string(&rec).map_err(io::Error::other)?)
        }
        Format::Text => match (dist, k) {
            (Some(d), _) => writeln!(out, "{pos}\t{d}"),
            (None, Some(k)) => writeln!(out, "{pos}\t>{k}"),
            (None, None) => writeln!(out, "{pos}\t>"),
        },
    }
}

/// Default `N` when no bound is given and an input comes from stdin.
const STDIN_N: u64 = 1 << 32;

fn default_n(paths: &[&Path]) -> u64 {
    paths
        .iter()
        .map(|p| file_len(p))
        .try_fold(0u64, |acc, l| l.map(|l| acc + l))
        .unwrap_or(STDIN_N)
}

fn cmd_match(a: &MatchArgs, stdin: Option<Box<dyn BufRead + '_>>, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = a.tuning.config(a.k, default_n(&[&a.pattern, &a.text]));
    let mut ens = Ensemble::new(&cfg)?;
    let mut stdin = stdin;
    let shared = a.pattern.as_os_str() == "-" && a.text.as_os_str() == "-";
    if shared && a.pattern_len.is_none() {
        return Err(CliError::Usage("pattern and text on stdin need --pattern-len".into()));
    }
    let mut preader = SymbolReader::new(open(&a.pattern, &mut stdin)?, a.utf8);
    if let Some(n) = a.pattern_len {
        preader = preader.take_symbols(n);
    }
    for sym in preader.by_ref() {
        ens.push_pattern_symbol(sym?)?;
    }
    ens.end_pattern()?;
    let treader = if shared {
        preader.into_inner()
    } else {
        drop(preader);
        open(&a.text, &mut stdin)?
    };
    let mut out = io::BufWriter::new(out);
    for (i, sym) in SymbolReader::new(treader, a.utf8).enumerate() {
        let r = ens.push_text_symbol(sym?)?;
        write_record(&mut out, a.format, i as u64 + 1, r.value(), Some(a.k))?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_oracle(a: &OracleArgs, stdin: Option<Box<dyn BufRead + '_>>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut stdin = stdin;
    let p = read_all(&a.pattern, a.utf8, &mut stdin)?;
    let t = read_all(&a.text, a.utf8, &mut stdin)?;
    let row = oracle_all_positions(&p, &t, a.budget)?;
    let mut out = io::BufWriter::new(out);
    for (i, d) in row.into_iter().enumerate() {
        let shown = match a.k {
            Some(k) if d > k => None,
            _ => Some(d),
        };
        write_record(&mut out, a.format, i as u64 + 1, shown, a.k)?;
    }
    out.flush()?;
    Ok(())
}

/// Agreement of matcher reports with oracle distances: the fraction of
/// positions where the report equals the thresholded truth, and where it is
/// not below the truth.
pub fn agreement(reports: &[EditReport], truth: &[u32], k: u32) -> (f64, f64) {
    if reports.is_empty() {
        return (1.0, 1.0);
    }
    let mut agree = 0;
    let mut sound = 0;
    for (r, &d) in reports.iter().zip(truth) {
        let expect = if d <= k {
            EditReport::Within(d)
        } else {
            EditReport::OverK
        };
        agree += usize::from(*r == expect);
        sound += usize::from(r.value().is_none_or(|v| v >= d));
    }
    let n = reports.len() as f64;
    (agree as f64 / n, sound as f64 / n)
}

fn cmd_compare(a: &MatchArgs, stdin: Option<Box<dyn BufRead + '_>>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut stdin = stdin;
    let p = read_all(&a.pattern, a.utf8, &mut stdin)?;
    let t = read_all(&a.text, a.utf8, &mut stdin)?;
    let cfg = a.tuning.config(a.k, (p.len() + t.len()) as u64);
    let reports = Ensemble::new(&cfg)?.run(&p, &t)?;
    let truth = oracle_all_positions(&p, &t, DEFAULT_BUDGET)?;
    let (agree, sound) = agreement(&reports, &truth, a.k);
    writeln!(out, "agree={agree:.6} sound={sound:.6}")?;
    Ok(())
}

fn cmd_decompose(a: &DecomposeArgs, stdin: Option<Box<dyn BufRead + '_>>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut stdin = stdin;
    let x = read_all(&a.input, a.utf8, &mut stdin)?;
    let cfg = a.tuning.config(a.k, x.len() as u64);
    let params = cfg.decomp_params(SeedTree::new(cfg.seed).child("copy", 0).child("decompose", 0));
    let dec = Decomposer::new(params).map_err(MatcherError::from)?;
    let seq = dec.decompose_batch(&x);
    let p = dec.params();
    let mut out = io::BufWriter::new(out);
    writeln!(
        out,
        "# len={} blocks={} beta={} lookahead={} lookbehind={} rwin={} scap={}",
        x.len(),
        seq.grammars.len(),
        p.beta,
        p.lookahead,
        p.lookbehind,
        p.rwin,
        p.size_cap
    )?;
    writeln!(out, "block\tstart\tlen\trules")?;
    for (i, ((b, e), g)) in blocks_from_boundaries(&seq.boundaries, seq.total_len)
        .into_iter()
        .zip(&seq.grammars)
        .enumerate()
    {
        writeln!(out, "{}\t{}\t{}\t{}", i + 1, b, e + 1 - b, g.size())?;
        if a.grammars {
            for line in g.dump().lines() {
                writeln!(out, "  {line}")?;
            }
        }
    }
    if let Some(i) = seq.oversize {
        writeln!(out, "# block {} exceeds the rule cap", i + 1)?;
    }
    out.flush()?;
    Ok(())
}

fn percentile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

/// Timing and state size of one run.
#[derive(Debug, Clone, Default)]
pub struct BenchResult {
    pub latencies_ns: Vec<u64>,
    pub total_ns: u128,
    pub peak: StateSize,
    /// Per-copy state without the engine, averaged over text positions.
    pub mean_state_no_engine: f64,
    /// `(text position, mean per-copy state without the engine)` samples.
    pub state_samples: Vec<(usize, f64)>,
}

/// Runs one ensemble, timing every text symbol and sampling state sizes.
pub fn bench_run(cfg: &MatcherConfig, p: &[u32], t: &[u32]) -> Result<BenchResult, MatcherError> {
    let mut ens = Ensemble::new(cfg)?;
    let start = Instant::now();
    for &a in p {
        ens.push_pattern_symbol(a)?;
    }
    ens.end_pattern()?;
    let mut res = BenchResult {
        latencies_ns: Vec::with_capacity(t.len()),
        ..Default::default()
    };
    let mut state_sum = 0f64;
    let mut samples = 0u64;
    let stride = (t.len() / 1000).max(1);
    for (i, &a) in t.iter().enumerate() {
        let s = Instant::now();
        ens.push_text_symbol(a)?;
        res.latencies_ns.push(s.elapsed().as_nanos() as u64);
        if i % stride == 0 {
            let sizes = ens.state_sizes();
            for z in &sizes {
                let pk = &mut res.peak;
                pk.tail = pk.tail.max(z.tail);
                pk.rings = pk.rings.max(z.rings);
                pk.pattern = pk.pattern.max(z.pattern);
                pk.fallback = pk.fallback.max(z.fallback);
                pk.engine = pk.engine.max(z.engine);
            }
            let mean = sizes.iter().map(|z| z.without_engine() as f64).sum::<f64>() / sizes.len() as f64;
            res.state_samples.push((i + 1, mean));
            state_sum += mean;
            samples += 1;
        }
    }
    res.total_ns = start.elapsed().as_nanos();
    res.mean_state_no_engine = if samples == 0 { 0.0 } else { state_sum / samples as f64 };
    Ok(res)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (p, t) = match (&a.pattern, &a.text) {
        (Some(pp), Some(tp)) => {
            let mut none = None;
            (read_all(pp, false, &mut none)?, read_all(tp, false, &mut none)?)
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.tuning.seed ^ 0x5EED);
            let sigma = a.sigma.max(1);
            let mut gen = |n| (0..n).map(|_| rng.gen_range(0..sigma)).collect::<Vec<u32>>();
            (gen(a.pattern_len), gen(a.text_len))
        }
    };
    let cfg = a.tuning.config(a.k, (p.len() + t.len()) as u64);
    let mut r = bench_run(&cfg, &p, &t)?;
    r.latencies_ns.sort_unstable();
    if !a.no_header {
        writeln!(
            out,
            "k,pattern_len,text_len,copies,total_ms,ns_p50,ns_p90,ns_p99,ns_max,\
             peak_tail,peak_rings,peak_pattern,peak_fallback,peak_engine,mean_state_no_engine"
        )?;
    }
    let pk = r.peak;
    writeln!(
        out,
        "{},{},{},{},{:.3},{},{},{},{},{},{},{},{},{},{:.1}",
        a.k,
        p.len(),
        t.len(),
        cfg.copy_count(),
        r.total_ns as f64 / 1e6,
        percentile(&r.latencies_ns, 0.5),
        percentile(&r.latencies_ns, 0.9),
        percentile(&r.latencies_ns, 0.99),
        r.latencies_ns.last().copied().unwrap_or(0),
        pk.tail,
        pk.rings,
        pk.pattern,
        pk.fallback,
        pk.engine,
        r.mean_state_no_engine
    )?;
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I, stdin: Box<dyn BufRead + '_>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let stdin = Some(stdin);
    let res = match &cli.cmd {
        Cmd::Match(a) => cmd_match(a, stdin, stdout),
        Cmd::Oracle(a) => cmd_oracle(a, stdin, stdout),
        Cmd::Compare(a) => cmd_compare(a, stdin, stdout),
        Cmd::Decompose(a) => cmd_decompose(a, stdin, stdout),
        Cmd::Bench(a) => cmd_bench(a, stdout),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "kedit: {e}");
            match e {
                CliError::Usage(_) => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(bytes: &[u8], utf8: bool) -> Result<Vec<u32>, CliError> {
        SymbolReader::new(bytes, utf8).collect()
    }

    #[test]
    fn symbol_reader() {
        assert!(syms(b"", false).unwrap().is_empty());
        assert_eq!(syms(b"abc", false).unwrap(), vec![97, 98, 99]);
        assert_eq!(syms("aé€😀".as_bytes(), true).unwrap(), vec![97, 0xE9, 0x20AC, 0x1F600]);
        assert_eq!(syms("é".as_bytes(), false).unwrap(), vec![0xC3, 0xA9]);
        assert!(matches!(syms(&[0xC3], true), Err(CliError::Utf8(_))));
        assert!(matches!(syms(&[0xE0, 0x80, 0x80], true), Err(CliError::Utf8(_))));
        let r = SymbolReader::new(&b"abcdef"[..], false).take_symbols(2);
        assert_eq!(r.collect::<Result<Vec<_>, _>>().unwrap(), vec![97, 98]);
    }

    #[test]
    fn agreement_fractions() {
        let reports = [EditReport::Within(1), EditReport::OverK, EditReport::Within(0)];
        let (agree, sound) = agreement(&reports, &[1, 5, 1], 2);
        assert!((agree - 2.0 / 3.0).abs() < 1e-9);
        assert!((sound - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn percentiles() {
        let v = [1, 2, 3, 4, 5];
        assert_eq!(percentile(&v, 0.5), 3);
        assert_eq!(percentile(&v, 1.0), 5);
        assert_eq!(percentile(&[], 0.5), 0);
    }
}
