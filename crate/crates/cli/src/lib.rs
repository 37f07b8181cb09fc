//! Commands behind the `mssz` binary.
//!
//! Each subcommand is a plain function over its argument struct so that the
//! pipeline can be driven from tests exactly as from the command line.

mod bench;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mssz_core::base_codec;
use mssz_core::edit_codec::{self, Archive, BaseCodecId, EditCodec};
use mssz_core::edit_engine::{self, AnyEditSet, EngineOptions, EngineStats};
use mssz_core::field::{load_raw, store_raw};
use mssz_core::metrics::{self, VerificationReport};
use mssz_core::mss;
use mssz_core::{AnyField, BoundMode, Dtype, Error, ErrorBound, Exec};
use thiserror::Error;

pub use bench::{bench, BenchArgs, BenchRow};

#[derive(Debug, Parser)]
#[command(
    name = "mssz",
    version,
    about = "Lossy compression that preserves Morse-Smale segmentations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compress a raw field into an archive with segmentation-preserving edits
    Compress(CompressArgs),
    /// Restore a raw field from an archive
    Decompress(DecompressArgs),
    /// Derive edits for a field decompressed by an external compressor
    Fix(FixArgs),
    /// Compare a candidate field against the original
    Verify(VerifyArgs),
    /// Export segmentation labels of a field
    Mss(MssArgs),
    /// Sweep error bounds over synthetic or external fields and emit CSV
    Bench(BenchArgs),
}

/// Exit codes: 0 ok, 1 verification failed, 2 usage, 3 I/O, 4 bound
/// violation, 5 non-convergence, 6 corrupt archive, 70 internal.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const BOUND: u8 = 4;
    pub const NON_CONVERGENCE: u8 = 5;
    pub const CORRUPT: u8 = 6;
    pub const INTERNAL: u8 = 70;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("report: {0}")]
    Report(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Report(_) => exit::IO,
            CliError::Pool(_) => exit::INTERNAL,
            CliError::Core(e) => match e {
                Error::Io(_) => exit::IO,
                Error::BoundViolation { .. } => exit::BOUND,
                Error::NonConvergence(_) => exit::NON_CONVERGENCE,
                Error::Corrupt(_)
                | Error::BadMagic
                | Error::VersionMismatch { .. }
                | Error::UnsupportedCodec(_) => exit::CORRUPT,
                Error::Internal(_) => exit::INTERNAL,
                _ => exit::USAGE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Grid extents, axis 0 first (e.g. 64,64 or 32,32,32)
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    /// Element type of the raw file
    #[arg(long, default_value = "f32")]
    pub dtype: Dtype,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    /// Error bound magnitude
    #[arg(long)]
    pub eb: f64,
    /// abs: ξ = eb; rel: ξ = eb × (max − min) of the original field
    #[arg(long, default_value = "rel")]
    pub eb_mode: BoundMode,
}

impl BoundArgs {
    pub fn bound(&self) -> ErrorBound {
        ErrorBound {
            mode: self.eb_mode,
            magnitude: self.eb,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ThreadArgs {
    /// Worker threads (defaults to hardware parallelism)
    #[arg(long, env = "MSSZ_THREADS")]
    pub threads: Option<usize>,
    /// Single-threaded deterministic execution
    #[arg(long)]
    pub serial: bool,
}

impl ThreadArgs {
    pub fn serial() -> Self {
        Self {
            threads: None,
            serial: true,
        }
    }

    pub fn threads(n: usize) -> Self {
        Self {
            threads: Some(n),
            serial: false,
        }
    }

    /// Runs `body` serially or inside a pool of the requested size.
    pub fn run<R: Send>(&self, body: impl FnOnce(Exec) -> R + Send) -> CliResult<R> {
        if self.serial || self.threads == Some(1) {
            return Ok(body(Exec::Serial));
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            if n == 0 {
                return Err(CliError::Usage("--threads must be at least 1".into()));
            }
            builder = builder.num_threads(n);
        }
        Ok(builder.build()?.install(|| body(Exec::Parallel)))
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompressArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub bound: BoundArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// Skip edit derivation (plain error-bounded compression)
    #[arg(long)]
    pub no_preserve: bool,
    #[arg(long, default_value = "deflate")]
    pub edit_codec: EditCodec,
    /// Also write the verification report as JSON
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Debug, Clone)]
pub struct CompressOutcome {
    pub report: VerificationReport,
    pub stats: EngineStats,
    pub archive_bytes: usize,
}

fn engine_options(exec: Exec, force: bool) -> EngineOptions {
    EngineOptions {
        force,
        ..EngineOptions::with_exec(exec)
    }
}

fn write_report(report: &VerificationReport, path: Option<&PathBuf>) -> CliResult<()> {
    if let Some(p) = path {
        fs::write(p, report.to_json())?;
    }
    Ok(())
}

pub fn compress(args: &CompressArgs) -> CliResult<CompressOutcome> {
    let original = load_raw(&args.input, &args.field.dims, args.field.dtype)?;
    let xi = args.bound.bound().resolve(original.value_range())?;
    args.threads.run(|exec| -> CliResult<CompressOutcome> {
        let (base, decompressed) = base_codec::compress_any(&original, xi)?;
        let (edits, edited, stats) = if args.no_preserve {
            (
                AnyEditSet::empty(original.dtype()),
                decompressed.clone(),
                EngineStats::default(),
            )
        } else {
            edit_engine::derive_edits_any(
                &original,
                &decompressed,
                xi,
                engine_options(exec, false),
            )?
        };
        let edit_bytes = edit_codec::encode_edits_any(&edits, args.edit_codec)?;
        // what a decompressor will rebuild must match the edited field bit for bit
        let decoded = edit_codec::decode_edits_any(&edit_bytes, args.edit_codec, original.dtype())?;
        if edit_engine::apply_edits_any(&decompressed, &decoded)?.to_le_bytes()
            != edited.to_le_bytes()
        {
            return Err(
                Error::Internal("edit payload does not reproduce the edited field".into()).into(),
            );
        }
        let archive = edit_codec::write_archive(&Archive {
            dtype: original.dtype(),
            dims: original.topology().dims().to_vec(),
            xi,
            base_codec: BaseCodecId::Builtin,
            base,
            edit_codec: args.edit_codec,
            edits: edit_bytes,
        });
        fs::write(&args.output, &archive)?;
        let original_bytes = original.topology().vertex_count() * original.dtype().size();
        let report = metrics::verify_any(&original, &edited, xi, exec)?
            .with_edits(edits.len())
            .with_sizes(original_bytes, archive.len());
        write_report(&report, args.report.as_ref())?;
        Ok(CompressOutcome {
            report,
            stats,
            archive_bytes: archive.len(),
        })
    })?
}

#[derive(Debug, Clone, Args)]
pub struct DecompressArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
}

/// Rebuilds the edited field from an archive and writes it as raw values.
pub fn decompress(args: &DecompressArgs) -> CliResult<AnyField> {
    let archive = edit_codec::read_archive(&fs::read(&args.input)?)?;
    if archive.base_codec != BaseCodecId::Builtin {
        return Err(CliError::Usage(
            "archive carries no base payload; decompress the base data with its own compressor and apply the edits".into(),
        ));
    }
    let topo = archive.topology()?;
    let decompressed = base_codec::decompress_any(&archive.base, &topo, archive.dtype, archive.xi)?;
    let edits = edit_codec::decode_edits_any(&archive.edits, archive.edit_codec, archive.dtype)?;
    let field = edit_engine::apply_edits_any(&decompressed, &edits).map_err(|e| match e {
        Error::IndexOutOfRange { .. } => Error::Corrupt(e.to_string()),
        e => e,
    })?;
    store_raw(&field, &args.output)?;
    Ok(field)
}

#[derive(Debug, Clone, Args)]
pub struct FixArgs {
    #[arg(long)]
    pub original: PathBuf,
    /// Output of an external error-bounded compressor, same layout as the original
    #[arg(long)]
    pub decompressed: PathBuf,
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub bound: BoundArgs,
    /// Standalone edit file to write
    #[arg(long)]
    pub edits: PathBuf,
    /// Fixed raw field to write
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value = "deflate")]
    pub edit_codec: EditCodec,
    /// Proceed even if the decompressed input already violates the bound
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Debug, Clone)]
pub struct FixOutcome {
    pub report: VerificationReport,
    pub stats: EngineStats,
    pub edit_file_bytes: usize,
}

pub fn fix(args: &FixArgs) -> CliResult<FixOutcome> {
    let original = load_raw(&args.original, &args.field.dims, args.field.dtype)?;
    let decompressed = load_raw(&args.decompressed, &args.field.dims, args.field.dtype)?;
    let xi = args.bound.bound().resolve(original.value_range())?;
    args.threads.run(|exec| -> CliResult<FixOutcome> {
        let (edits, edited, stats) = edit_engine::derive_edits_any(
            &original,
            &decompressed,
            xi,
            engine_options(exec, args.force),
        )?;
        let file = edit_codec::write_edit_file(&edits, args.edit_codec)?;
        fs::write(&args.edits, &file)?;
        store_raw(&edited, &args.output)?;
        let report = metrics::verify_any(&original, &edited, xi, exec)?.with_edits(edits.len());
        write_report(&report, args.report.as_ref())?;
        Ok(FixOutcome {
            report,
            stats,
            edit_file_bytes: file.len(),
        })
    })?
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub original: PathBuf,
    #[arg(long)]
    pub candidate: PathBuf,
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub bound: BoundArgs,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

pub fn verify(args: &VerifyArgs) -> CliResult<VerificationReport> {
    let original = load_raw(&args.original, &args.field.dims, args.field.dtype)?;
    let candidate = load_raw(&args.candidate, &args.field.dims, args.field.dtype)?;
    let xi = args.bound.bound().resolve(original.value_range())?;
    let report = args
        .threads
        .run(|exec| metrics::verify_any(&original, &candidate, xi, exec))??;
    write_report(&report, args.report.as_ref())?;
    Ok(report)
}

/// Exit status for a finished verification.
pub fn verify_exit_code(report: &VerificationReport) -> u8 {
    if report.bound_violations > 0 {
        exit::BOUND
    } else if report.mss_distortion > 0.0 {
        exit::VERIFY_FAILED
    } else {
        exit::OK
    }
}

#[derive(Debug, Clone, Args)]
pub struct MssArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Label file: u64 max labels, then u64 min labels
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MssSummary {
    pub maxima: usize,
    pub minima: usize,
}

pub fn export_mss(args: &MssArgs) -> CliResult<MssSummary> {
    let field = load_raw(&args.input, &args.field.dims, args.field.dtype)?;
    let (dirs, labels) = args.threads.run(|exec| match &field {
        AnyField::F32(f) => mss::segment(f, exec),
        AnyField::F64(f) => mss::segment(f, exec),
    })??;
    fs::write(&args.output, labels.to_le_bytes())?;
    let crit = mss::classify_critical(&dirs);
    Ok(MssSummary {
        maxima: crit.maxima.len(),
        minima: crit.minima.len(),
    })
}

/// Parses and runs one command line; returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Compress(a) => compress(&a).map(|o| {
            print!("{}", o.report.to_kv());
            println!("outer_iterations={}", o.stats.outer_iterations);
            println!("archive_bytes={}", o.archive_bytes);
            exit::OK
        }),
        Command::Decompress(a) => decompress(&a).map(|_| exit::OK),
        Command::Fix(a) => fix(&a).map(|o| {
            print!("{}", o.report.to_kv());
            println!("edit_file_bytes={}", o.edit_file_bytes);
            exit::OK
        }),
        Command::Verify(a) => verify(&a).map(|r| {
            print!("{}", r.to_kv());
            verify_exit_code(&r)
        }),
        Command::Mss(a) => export_mss(&a).map(|s| {
            println!("maxima={}", s.maxima);
            println!("minima={}", s.minima);
            exit::OK
        }),
        Command::Bench(a) => bench(&a).map(|rows| {
            log::info!("{} benchmark rows written", rows.len());
            exit::OK
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}
