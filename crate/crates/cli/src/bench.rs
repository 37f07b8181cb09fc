//! Error-bound sweeps producing one CSV row per run.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use mssz_core::edit_codec::{self, Archive, BaseCodecId, EditCodec};
use mssz_core::edit_engine::{self, EngineOptions};
use mssz_core::field::{generate_synthetic, load_raw};
use mssz_core::{base_codec, metrics, AnyField, BoundMode, Dtype, ErrorBound, Exec, SyntheticKind};
use serde::Serialize;

use crate::{CliError, CliResult, ThreadArgs};

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Synthetic field kinds to sweep
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "gaussian-mixture,trig,random-smooth"
    )]
    pub kinds: Vec<SyntheticKind>,
    #[arg(long, value_delimiter = ',', default_value = "64,64")]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1e-4,1e-3,1e-2")]
    pub ebs: Vec<f64>,
    #[arg(long, default_value = "rel")]
    pub eb_mode: BoundMode,
    /// Seeds 0..seeds per kind
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value = "f32")]
    pub dtype: Dtype,
    /// External pair `original:decompressed`, both raw files with --dims/--dtype layout
    /// and produced at the first --ebs value
    #[arg(long)]
    pub pair: Vec<String>,
    #[arg(long, default_value = "deflate")]
    pub edit_codec: EditCodec,
    /// CSV destination; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub source: String,
    pub seed: Option<u64>,
    pub eb: f64,
    pub xi: f64,
    pub edit_ratio: f64,
    pub ocr: f64,
    pub obr: f64,
    pub psnr: f64,
    pub distortion: f64,
    pub distortion_before: f64,
    pub wall_seconds: f64,
    pub iterations: usize,
}

fn synthetic(kind: SyntheticKind, dims: &[usize], seed: u64, dtype: Dtype) -> CliResult<AnyField> {
    Ok(match dtype {
        Dtype::F32 => generate_synthetic::<f32>(kind, dims, seed)?.into(),
        Dtype::F64 => generate_synthetic::<f64>(kind, dims, seed)?.into(),
    })
}

struct Run<'a> {
    source: String,
    seed: Option<u64>,
    eb: f64,
    original: &'a AnyField,
    // None: use the builtin base codec
    external: Option<&'a AnyField>,
}

fn measure(run: Run<'_>, mode: BoundMode, codec: EditCodec, exec: Exec) -> CliResult<BenchRow> {
    let bound = ErrorBound {
        mode,
        magnitude: run.eb,
    };
    let xi = bound.resolve(run.original.value_range())?;
    let start = Instant::now();
    let (base, decompressed) = match run.external {
        Some(d) => (Vec::new(), d.clone()),
        None => base_codec::compress_any(run.original, xi)?,
    };
    let (edits, edited, stats) = edit_engine::derive_edits_any(
        run.original,
        &decompressed,
        xi,
        EngineOptions::with_exec(exec),
    )?;
    let edit_bytes = edit_codec::encode_edits_any(&edits, codec)?;
    let archive = edit_codec::write_archive(&Archive {
        dtype: run.original.dtype(),
        dims: run.original.topology().dims().to_vec(),
        xi,
        base_codec: if run.external.is_some() {
            BaseCodecId::External
        } else {
            BaseCodecId::Builtin
        },
        base,
        edit_codec: codec,
        edits: edit_bytes,
    });
    let wall_seconds = start.elapsed().as_secs_f64();
    let before = metrics::verify_any(run.original, &decompressed, xi, exec)?;
    let n = run.original.topology().vertex_count();
    let after = metrics::verify_any(run.original, &edited, xi, exec)?
        .with_edits(edits.len())
        .with_sizes(n * run.original.dtype().size(), archive.len());
    Ok(BenchRow {
        source: run.source,
        seed: run.seed,
        eb: run.eb,
        xi,
        edit_ratio: after.edit_ratio.unwrap_or(0.0),
        ocr: after.ocr.unwrap_or(0.0),
        obr: after.obr.unwrap_or(0.0),
        psnr: after.psnr,
        distortion: after.mss_distortion,
        distortion_before: before.mss_distortion,
        wall_seconds,
        iterations: stats.outer_iterations,
    })
}

/// Runs the sweep and writes CSV; the rows are also returned.
pub fn bench(args: &BenchArgs) -> CliResult<Vec<BenchRow>> {
    let mut pairs = Vec::new();
    for spec in &args.pair {
        let (a, b) = spec.split_once(':').ok_or_else(|| {
            CliError::Usage(format!(
                "--pair expects original:decompressed, got '{spec}'"
            ))
        })?;
        pairs.push((
            spec.clone(),
            load_raw(a, &args.dims, args.dtype)?,
            load_raw(b, &args.dims, args.dtype)?,
        ));
    }
    let eb0 = *args
        .ebs
        .first()
        .ok_or_else(|| CliError::Usage("--ebs is empty".into()))?;

    let rows = args.threads.run(|exec| -> CliResult<Vec<BenchRow>> {
        let mut rows = Vec::new();
        for &kind in &args.kinds {
            for seed in 0..args.seeds {
                let original = synthetic(kind, &args.dims, seed, args.dtype)?;
                for &eb in &args.ebs {
                    let run = Run {
                        source: kind.to_string(),
                        seed: Some(seed),
                        eb,
                        original: &original,
                        external: None,
                    };
                    rows.push(measure(run, args.eb_mode, args.edit_codec, exec)?);
                }
            }
        }
        for (name, original, decompressed) in &pairs {
            let run = Run {
                source: name.clone(),
                seed: None,
                eb: eb0,
                original,
                external: Some(decompressed),
            };
            rows.push(measure(run, args.eb_mode, args.edit_codec, exec)?);
        }
        Ok(rows)
    })??;

    let sink: Box<dyn std::io::Write> = match &args.output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(rows)
}
