//! Command-line front end.
//!
//! All tabular output is CSV with one header line. Lines starting with `#`
//! after the table carry summary values. The device profile comes from
//! `--profile FILE`, else from the file named by `BLOCKMV_PROFILE`, else the
//! built-in K20c profile (ECC off).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use num_complex::{Complex32, Complex64};

use crate::cost::{dominant_round_model, predict_time};
use crate::device::{builtin_k20c_profile, DeviceProfile};
use crate::error::{Error, Result};
use crate::generate::Operands;
use crate::kernel::{execute, Coefficients, Counters, KernelRequest, Op};
use crate::matrix::{padded_ld, Layout};
use crate::mgpu::{gemv_mgpu, symv_hemv_mgpu, DistributedMatrix};
use crate::offset::{execute_offset, trace_offset, OffsetRequest};
use crate::partition::KernelConfig;
use crate::precision::{Precision, Scalar};
use crate::reference::{error_bound, max_abs_diff, reference_mv};
use crate::roofline::{roofline_csv, sustained_peak, Family};
use crate::tuner::{kernel_label, sweep_csv, Tuner, DEFAULT_ATOMIC_COEFFICIENT};

pub const PROFILE_ENV: &str = "BLOCKMV_PROFILE";
pub const DEFAULT_SEED: u64 = 20160101;

pub const RUN_CSV_HEADER: &str = "scope,kernel,precision,m,n,nb,q,y,flops,bytes_read,bytes_written,transactions,atomic_adds,tb_count,reduction_events,guard_violations,predicted_seconds,predicted_gflops,roofline_efficiency";
pub const OFFSET_CSV_HEADER: &str = "offset,segments,inflation,aligned_segments,offset_kernel_segments";

#[derive(Parser, Debug)]
#[command(name = "blockmv", version, about = "Blocked matrix-vector kernel simulator and cost model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one simulated kernel, check it against the naive oracle, print counters.
    Run(RunArgs),
    /// Operational intensities and bandwidth-bound peaks.
    Roofline(RooflineArgs),
    /// Matrix-read segments of the standard kernel on offset submatrices.
    OffsetScan(OffsetScanArgs),
    /// Coarse and fine tuning sweep.
    Tune(TuneArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gemv,
    GemvT,
    Symv,
    Hemv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecArg {
    S,
    D,
    C,
    Z,
}

impl From<PrecArg> for Precision {
    fn from(p: PrecArg) -> Self {
        match p {
            PrecArg::S => Precision::S,
            PrecArg::D => Precision::D,
            PrecArg::C => Precision::C,
            PrecArg::Z => Precision::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UploArg {
    L,
    U,
}

#[derive(Args, Debug, Clone)]
pub struct ProfileArg {
    /// Device profile file (key=value).
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    #[arg(long, default_value_t = 32)]
    pub nb: usize,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long, default_value_t = 1)]
    pub y: usize,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub kernel: KernelArg,
    #[arg(long, value_enum)]
    pub prec: PrecArg,
    /// Rows (defaults to --n).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: Option<u64>,
    /// Columns (defaults to --m, else 512).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value = "l")]
    pub uplo: UploArg,
    #[arg(long, default_value_t = 0)]
    pub row_off: usize,
    #[arg(long, default_value_t = 0)]
    pub col_off: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub devices: u64,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub profile: ProfileArg,
    /// Write the CSV table here instead of stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RooflineArgs {
    /// Evaluate the exact counts at this size instead of the limits.
    #[arg(long)]
    pub n: Option<u64>,
    #[command(flatten)]
    pub profile: ProfileArg,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OffsetScanArgs {
    #[arg(long, value_enum, default_value = "gemv")]
    pub kernel: KernelArg,
    #[arg(long, value_enum)]
    pub prec: PrecArg,
    /// Parent matrix dimension.
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub from: usize,
    /// Last offset, inclusive.
    #[arg(long, default_value_t = 64)]
    pub to: usize,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TuneArgs {
    #[arg(long, value_enum)]
    pub kernel: KernelArg,
    #[arg(long, value_enum)]
    pub prec: PrecArg,
    /// Comma-separated sizes; defaults to 512, 1024, ..., 8192.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_ATOMIC_COEFFICIENT)]
    pub atomic_coef: f64,
    #[command(flatten)]
    pub profile: ProfileArg,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn op_for(kernel: KernelArg, uplo: UploArg, precision: Precision) -> Op {
    let lower = uplo == UploArg::L;
    match kernel {
        KernelArg::Gemv => Op::GemvN,
        KernelArg::GemvT if precision.is_complex() => Op::GemvC,
        KernelArg::GemvT => Op::GemvT,
        KernelArg::Symv if lower => Op::SymvLower,
        KernelArg::Symv => Op::SymvUpper,
        KernelArg::Hemv if lower => Op::HemvLower,
        KernelArg::Hemv => Op::HemvUpper,
    }
}

/// Profile from the flag, then the environment, then the built-in one.
/// The flag is `true` when the built-in profile is used.
pub fn resolve_profile(flag: Option<&PathBuf>) -> Result<(DeviceProfile, bool)> {
    if let Some(p) = flag {
        return Ok((DeviceProfile::load(p)?, false));
    }
    if let Some(p) = std::env::var_os(PROFILE_ENV).filter(|v| !v.is_empty()) {
        return Ok((DeviceProfile::load(PathBuf::from(p))?, false));
    }
    Ok((builtin_k20c_profile(), true))
}

fn emit(csv: Option<&PathBuf>, table: &str, out: &mut dyn Write) -> Result<()> {
    match csv {
        Some(path) => std::fs::write(path, table).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => out.write_all(table.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn counters_row(scope: &str, op: Op, p: Precision, m: usize, n: usize, cfg: &KernelConfig, c: &Counters, profile: &DeviceProfile) -> String {
    let rounds = dominant_round_model(c, profile);
    let t = predict_time(c, &rounds, profile);
    let gflops = if t > 0.0 { c.flops as f64 / t / 1e9 } else { 0.0 };
    let family = if op.is_gemv() { Family::Gemv } else { Family::SymvHemv };
    let eff = gflops / sustained_peak(profile, p, family);
    format!(
        "{scope},{},{p},{m},{n},{},{},{},{},{},{},{},{},{},{},{},{t},{gflops},{eff}",
        kernel_label(op),
        cfg.nb,
        cfg.q_bar,
        cfg.y_bar,
        c.flops,
        c.bytes_read,
        c.bytes_written,
        c.transactions,
        c.atomic_adds,
        c.tb_count,
        c.reduction_events,
        c.guard_violations,
    )
}

fn run_typed<T: Scalar>(args: &RunArgs, out: &mut dyn Write) -> Result<bool> {
    let p = T::PRECISION;
    let op = op_for(args.kernel, args.uplo, p);
    let cfg = KernelConfig::new(args.config.nb, args.config.q, args.config.y)?;
    let (profile, _) = resolve_profile(args.profile.profile.as_ref())?;
    let m = args.m.or(args.n).unwrap_or(512) as usize;
    let n = if op.is_symmetric() { m } else { args.n.or(args.m).unwrap_or(512) as usize };
    let g = args.devices as usize;
    let offsets = args.row_off != 0 || args.col_off != 0;
    if g > 1 && offsets {
        return Err(Error::IllegalArgument {
            routine: "run",
            position: 0,
            reason: "--devices cannot be combined with --row-off/--col-off".into(),
        });
    }
    let mut gen = Operands::new(args.seed);
    let seg_elems = p.elements_per_segment(profile.segment_bytes).max(1);
    let (pm, pn) = (m + args.row_off, n + args.col_off);
    let parent = gen.matrix::<T>(pm, pn, padded_ld(pm, seg_elems))?;
    let (xl, yl) = if op == Op::GemvN { (n, m) } else { (m, n) };
    let x = gen.vector::<T>(xl);
    let y = gen.vector::<T>(yl);
    let alpha = T::from_parts(args.alpha, 0.0);
    let beta = T::from_parts(args.beta, 0.0);
    let sub = parent.view().submatrix(args.row_off, args.col_off, m, n)?;

    let mut rows = Vec::new();
    let y_out = if g > 1 {
        let dist = DistributedMatrix::distribute(&sub, cfg.nb, g)?;
        let rep = if op.is_gemv() {
            gemv_mgpu(&dist, &x, &y, alpha, beta, op, &cfg)?
        } else {
            symv_hemv_mgpu(&dist, &x, &y, alpha, beta, op, &cfg)?
        };
        for (k, c) in rep.devices.iter().enumerate() {
            rows.push(counters_row(&format!("device{k}"), op, p, m, n, &cfg, c, &profile));
        }
        rows.push(counters_row("merged", op, p, m, n, &cfg, &rep.merged, &profile));
        rep.y_out
    } else if offsets {
        let req = OffsetRequest::new(op, parent.view(), args.row_off, args.col_off, m, n, &x, &y, alpha, beta, cfg)
            .with_segment_bytes(profile.segment_bytes);
        let rep = execute_offset(&req)?;
        rows.push(counters_row("offset", op, p, m, n, &cfg, &rep.counters, &profile));
        rep.y_out
    } else {
        let req = KernelRequest::new(op, sub, &x, &y, alpha, beta, cfg).with_segment_bytes(profile.segment_bytes);
        let rep = execute(&req)?;
        rows.push(counters_row("single", op, p, m, n, &cfg, &rep.counters, &profile));
        rep.y_out
    };

    let want = reference_mv(op, &sub, &x, &y, alpha, beta);
    let err = max_abs_diff(&y_out, &want);
    let bound = error_bound(op, &sub, &x, &y, alpha, beta, 50.0);
    let pass = err <= bound;
    let mut table = String::new();
    writeln!(table, "{RUN_CSV_HEADER}").unwrap();
    for r in &rows {
        writeln!(table, "{r}").unwrap();
    }
    let status = if pass { "PASS" } else { "FAIL" };
    writeln!(out, "{status} {} {p} {m}x{n} {cfg} max_err={err:e} bound={bound:e}", kernel_label(op)).ok();
    emit(args.csv.as_ref(), &table, out)?;
    Ok(pass)
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<bool> {
    match Precision::from(args.prec) {
        Precision::S => run_typed::<f32>(args, out),
        Precision::D => run_typed::<f64>(args, out),
        Precision::C => run_typed::<Complex32>(args, out),
        Precision::Z => run_typed::<Complex64>(args, out),
    }
}

fn cmd_roofline(args: &RooflineArgs, out: &mut dyn Write) -> Result<()> {
    let (profile, builtin) = resolve_profile(args.profile.profile.as_ref())?;
    emit(args.csv.as_ref(), &roofline_csv(&profile, args.n, builtin), out)
}

/// Offset-scan table: the standard kernel on the `(n - off)^2` window at
/// `(off, off)` of an aligned `n x n` parent, against the offset kernel.
pub fn offset_scan_csv(op: Op, precision: Precision, n: usize, offsets: impl IntoIterator<Item = usize>, cfg: &KernelConfig, segment_bytes: usize) -> Result<String> {
    let ld = padded_ld(n, precision.elements_per_segment(segment_bytes).max(1));
    let parent = Layout { m: n, n, ld, row_offset: 0, col_offset: 0 };
    let mut table = String::new();
    writeln!(table, "{OFFSET_CSV_HEADER}").unwrap();
    for off in offsets {
        if off >= n {
            return Err(Error::OffsetOutOfRange(format!("offset {off} must be below parent size {n}")));
        }
        let sub = n - off;
        let std = crate::kernel::trace_op(op, precision, parent.sub(off, off, sub, sub), Coefficients::GENERAL, cfg, segment_bytes)?;
        let wide = trace_offset(op, precision, parent, off, off, sub, sub, Coefficients::GENERAL, cfg, segment_bytes)?;
        let m = std.ledger.matrix;
        let inflation = m.segments as f64 / m.ideal_segments as f64;
        writeln!(table, "{off},{},{inflation},{},{}", m.segments, m.ideal_segments, wide.ledger.matrix.segments).unwrap();
    }
    Ok(table)
}

fn cmd_offset_scan(args: &OffsetScanArgs, out: &mut dyn Write) -> Result<()> {
    let p = Precision::from(args.prec);
    let op = op_for(args.kernel, UploArg::L, p);
    let cfg = KernelConfig::new(args.config.nb, args.config.q, args.config.y)?;
    let (profile, _) = resolve_profile(None)?;
    if args.from > args.to {
        return Err(Error::OffsetOutOfRange(format!("--from {} exceeds --to {}", args.from, args.to)));
    }
    let table = offset_scan_csv(op, p, args.n, args.from..=args.to, &cfg, profile.segment_bytes)?;
    emit(args.csv.as_ref(), &table, out)
}

pub fn default_tune_sizes() -> Vec<usize> {
    (1..=16).map(|k| k * 512).collect()
}

fn cmd_tune(args: &TuneArgs, out: &mut dyn Write) -> Result<()> {
    let p = Precision::from(args.prec);
    let op = op_for(args.kernel, UploArg::L, p);
    let (profile, _) = resolve_profile(args.profile.profile.as_ref())?;
    let sizes = if args.sizes.is_empty() { default_tune_sizes() } else { args.sizes.clone() };
    let tuner = Tuner::new(op, p, profile).with_atomic_coefficient(args.atomic_coef);
    let coarse = tuner.coarse_tune(&sizes)?;
    let fine = tuner.fine_tune(coarse.best, &sizes)?;
    let mut table = sweep_csv(op, p, &coarse.evaluations);
    let fine_rows = sweep_csv(op, p, &fine.evaluations);
    table.extend(fine_rows.lines().skip(1).map(|l| format!("{l}\n")));
    let c = coarse.best;
    writeln!(table, "# coarse_best={},{},{}", c.nb, c.q_bar, c.y_bar).unwrap();
    for (d, cfg, g) in &fine.per_size {
        writeln!(table, "# best_at_{d}={},{},{} ({g} Gflop/s)", cfg.nb, cfg.q_bar, cfg.y_bar).unwrap();
    }
    let r = fine.recommendation;
    writeln!(table, "# recommendation={},{},{}", r.nb, r.q_bar, r.y_bar).unwrap();
    emit(args.csv.as_ref(), &table, out)
}

/// Runs the CLI on `args`, writing normal output to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn main_with<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            if e.use_stderr() && !e.to_string().contains("Usage:") {
                let _ = write!(sink, "\n{}", Cli::command().render_usage());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out).map(|pass| if pass { 0 } else { 1 }),
        Command::Roofline(a) => cmd_roofline(a, out).map(|_| 0),
        Command::OffsetScan(a) => cmd_offset_scan(a, out).map(|_| 0),
        Command::Tune(a) => cmd_tune(a, out).map(|_| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
