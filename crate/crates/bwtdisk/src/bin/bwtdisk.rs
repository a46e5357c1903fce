use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bwtdisk::build::{self, BuildConfig, BuildReport, Layout, Mode};
use bwtdisk::format::{self, StatsReport};
use bwtdisk::invert::{self, InvertConfig};
use bwtdisk::ledger::LedgerState;
use bwtdisk::Error;
use bwtdisk_core::codec::CodecId;
use bwtdisk_core::oracle::{oracle_all, OracleError};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bwtdisk", version, about = "External-memory BWT, suffix array, Psi and pos_d construction and BWT inversion")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the BWT file of INPUT.
    Bwt(Common),
    /// Invert a BWT file.
    Unbwt {
        #[command(flatten)]
        common: Common,
        /// Decode in memory with plain LF steps instead of the scan-based rounds.
        #[arg(long)]
        naive: bool,
    },
    /// Build the suffix array of INPUT.
    Sa(Common),
    /// Build the Psi array of INPUT.
    Psi(Common),
    /// Build sampled suffix positions of INPUT.
    Posd {
        #[command(flatten)]
        common: Common,
        /// Sampling step.
        #[arg(long = "d", value_name = "STEP", value_parser = clap::value_parser!(u64).range(1..))]
        d: u64,
    },
    /// Compare outputs for INPUT against brute-force oracles.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Check this BWT file instead of building one.
        #[arg(long)]
        bwt: Option<PathBuf>,
        /// Check this suffix array file.
        #[arg(long)]
        sa: Option<PathBuf>,
        /// Check this Psi file.
        #[arg(long)]
        psi: Option<PathBuf>,
        /// Check this pos_d file.
        #[arg(long)]
        posd: Option<PathBuf>,
        /// Sampling step for a built pos_d.
        #[arg(long = "d", value_name = "STEP", default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        d: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CodecArg {
    Identity,
    Rle,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    TwoFile,
    InPlace,
}

#[derive(Args)]
struct Common {
    input: PathBuf,
    /// Output path (default: INPUT with an extension added).
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Block size, e.g. 65536, 64K, 64MiB.
    #[arg(long, value_parser = parse_size, default_value = "64MiB")]
    block_size: u64,
    /// Codec for bwt payloads and partial bwt files (default rle, identity for in-place).
    #[arg(long, value_enum)]
    codec: Option<CodecArg>,
    #[arg(long, value_enum, default_value = "two-file")]
    layout: LayoutArg,
    /// Keep every stream in memory.
    #[arg(long)]
    internal: bool,
    /// Memory budget: sets the block size in internal mode and the sort budget for unbwt.
    #[arg(long, value_parser = parse_size)]
    mem_budget: Option<u64>,
    /// Directory for temp files (default: the output's directory).
    #[arg(long)]
    temp_dir: Option<PathBuf>,
    /// Write run statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
}

impl Common {
    fn build_config(&self) -> BuildConfig {
        let layout = match self.layout {
            LayoutArg::TwoFile => Layout::TwoFile,
            LayoutArg::InPlace => Layout::InPlace,
        };
        let codec = match (self.codec, layout) {
            (Some(CodecArg::Identity), _) | (None, Layout::InPlace) => CodecId::Identity,
            (Some(CodecArg::Rle), _) | (None, Layout::TwoFile) => CodecId::Rle,
        };
        BuildConfig {
            block_size: self.block_size as usize,
            codec,
            mode: self.mode(),
            layout,
            mem_budget: self.mem_budget,
            temp_dir: self.temp_dir.clone(),
            ..BuildConfig::default()
        }
    }

    fn mode(&self) -> Mode {
        if self.internal {
            Mode::Internal
        } else {
            Mode::External
        }
    }

    fn output(&self, ext: &str) -> PathBuf {
        self.output.clone().unwrap_or_else(|| {
            let mut s = self.input.clone().into_os_string();
            s.push(".");
            s.push(ext);
            PathBuf::from(s)
        })
    }

    fn write_stats(&self, stats: StatsReport) -> Result<(), Error> {
        match &self.stats {
            Some(p) => stats.write_to(p),
            None => Ok(()),
        }
    }
}

fn parse_size(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let v: u64 = num.parse().map_err(|_| format!("invalid size `{s}`"))?;
    let mul: u64 = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "k" | "kb" | "kib" => 1 << 10,
        "m" | "mb" | "mib" => 1 << 20,
        "g" | "gb" | "gib" => 1 << 30,
        _ => return Err(format!("unknown size unit in `{s}`")),
    };
    match v.checked_mul(mul) {
        Some(0) | None => Err(format!("size `{s}` must be positive and fit in 64 bits")),
        Some(x) => Ok(x),
    }
}

enum Failure {
    Error(Error),
    Mismatch(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Unsupported(_) | Error::BudgetTooSmall { .. } | Error::Oracle(OracleError::TooLarge { .. }) => 2,
        Error::Mismatch(_) => 3,
        _ => 1,
    }
}

fn finish_build(common: &Common, rep: BuildReport) -> Result<(), Failure> {
    log::info!("{} passes with block size {}", rep.ledger.passes, rep.block_size);
    Ok(common.write_stats(rep.stats())?)
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Bwt(c) => finish_build(&c, build::build_bwt(&c.input, &c.output("bwt"), &c.build_config())?),
        Cmd::Sa(c) => finish_build(&c, build::build_sa(&c.input, &c.output("sa"), &c.build_config())?),
        Cmd::Psi(c) => finish_build(&c, build::build_psi(&c.input, &c.output("psi"), &c.build_config())?),
        Cmd::Posd { common: c, d } => finish_build(&c, build::build_posd(&c.input, &c.output("posd"), &c.build_config(), d)?),
        Cmd::Unbwt { common: c, naive } => {
            let out = c.output("out");
            if naive {
                let started = std::time::Instant::now();
                invert::naive_unbwt_file(&c.input, &out)?;
                let wall_ms = started.elapsed().as_millis() as u64;
                return Ok(c.write_stats(StatsReport::from_ledger(&LedgerState::default(), wall_ms))?);
            }
            let cfg = InvertConfig {
                mode: c.mode(),
                mem_budget: c.mem_budget.map_or(invert::DEFAULT_SORT_BUDGET, |m| m as usize),
                temp_dir: c.temp_dir.clone(),
            };
            let rep = invert::unbwt(&c.input, &out, &cfg)?;
            log::info!("{} rounds, k = {}", rep.rounds(), rep.k);
            Ok(c.write_stats(rep.stats())?)
        }
        Cmd::Verify { common: c, bwt, sa, psi, posd, d } => verify(&c, bwt, sa, psi, posd, d),
    }
}

fn check(report: &mut Vec<String>, what: &str, ok: bool) {
    println!("{what}: {}", if ok { "ok" } else { "MISMATCH" });
    if !ok {
        report.push(what.to_string());
    }
}

fn verify(c: &Common, bwt: Option<PathBuf>, sa: Option<PathBuf>, psi: Option<PathBuf>, posd: Option<PathBuf>, d: u64) -> Result<(), Failure> {
    let text = std::fs::read(&c.input).map_err(Error::from)?;
    let o = oracle_all(&text).map_err(Error::from)?;
    let cfg = c.build_config();
    let tmp = tempfile::tempdir_in(c.temp_dir.as_deref().unwrap_or(Path::new("."))).or_else(|_| tempfile::tempdir()).map_err(Error::from)?;
    let built = |name: &str| tmp.path().join(name);
    let mut total = LedgerState::default();
    let mut add = |r: BuildReport| {
        total.passes += r.ledger.passes;
        total.bytes_read += r.ledger.bytes_read;
        total.bytes_written += r.ledger.bytes_written;
        total.peak_temp_bytes = total.peak_temp_bytes.max(r.ledger.peak_temp_bytes);
    };
    let started = std::time::Instant::now();
    let explicit = bwt.is_some() || sa.is_some() || psi.is_some() || posd.is_some();
    let mut bad = Vec::new();

    if bwt.is_some() || !explicit {
        let path = match bwt {
            Some(p) => p,
            None => {
                add(build::build_bwt(&c.input, &built("bwt"), &cfg)?);
                built("bwt")
            }
        };
        let data = format::BwtData::read(&path)?;
        check(&mut bad, "bwt", data.payload == o.payload() && data.header.primary_index == o.primary_index());
        let inv = invert::unbwt(&path, &built("unbwt"), &InvertConfig { mode: cfg.mode, temp_dir: c.temp_dir.clone(), ..InvertConfig::default() });
        check(&mut bad, "unbwt", inv.is_ok() && std::fs::read(built("unbwt")).map_err(Error::from)? == text);
        let naive = invert::naive_unbwt_file(&path, &built("naive"));
        check(&mut bad, "unbwt --naive", naive.is_ok() && std::fs::read(built("naive")).map_err(Error::from)? == text);
    }
    if sa.is_some() || !explicit {
        let path = match sa {
            Some(p) => p,
            None => {
                add(build::build_sa(&c.input, &built("sa"), &cfg)?);
                built("sa")
            }
        };
        check(&mut bad, "sa", format::decode_sa(&std::fs::read(path).map_err(Error::from)?)? == o.sa);
    }
    if psi.is_some() || !explicit {
        let path = match psi {
            Some(p) => p,
            None => {
                add(build::build_psi(&c.input, &built("psi"), &cfg)?);
                built("psi")
            }
        };
        check(&mut bad, "psi", format::decode_psi(&std::fs::read(path).map_err(Error::from)?)? == o.psi);
    }
    if posd.is_some() || !explicit {
        let path = match posd {
            Some(p) => p,
            None => {
                add(build::build_posd(&c.input, &built("posd"), &cfg, d)?);
                built("posd")
            }
        };
        let (step, pairs) = format::decode_posd(&std::fs::read(path).map_err(Error::from)?)?;
        check(&mut bad, "posd", pairs == o.pos_d(step));
    }
    c.write_stats(StatsReport::from_ledger(&total, started.elapsed().as_millis() as u64))?;
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(bad))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(what)) => {
            eprintln!("bwtdisk: verification failed: {}", what.join(", "));
            ExitCode::from(3)
        }
        Err(Failure::Error(e)) => {
            eprintln!("bwtdisk: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
