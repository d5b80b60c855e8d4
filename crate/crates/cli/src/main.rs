mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;
use tvr_core::io::{encode_binary_png, encode_image_png, encode_mask_png, read_binary_png, read_png, write_atomic};
use tvr_core::{
    evaluate_detection, inject_patches, resurface, Config, DetectionReport, Image, PixelMask, SurfaceExport,
};

use crate::args::{Cli, Command, PipelineArgs};

const EXIT_USAGE: u8 = 1;
const EXIT_PROCESSING: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PROCESSING)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Resurface { input, out, pipeline } => {
            let cfg = pipeline.to_config(pipeline.block_size)?;
            for_each_input(&input, &out, |image, dir| resurface_one(image, dir, &cfg))
        }
        Command::Surface { input, out, pipeline } => {
            let cfg = pipeline.to_config(pipeline.block_size)?;
            for_each_input(&input, &out, |image, dir| surface_one(image, dir, &cfg))
        }
        Command::Eval {
            input,
            truth,
            out,
            pipeline,
        } => {
            let cfg = pipeline.to_config(pipeline.block_size)?;
            let truth = load_truth(&truth)?;
            let image = load(&input)?;
            let report = evaluate(&image, &truth, &cfg)?;
            std::fs::create_dir_all(&out)?;
            write_json(&out.join("report.json"), &report)
        }
        Command::Inject { input, out, patch } => {
            let spec = patch.to_spec()?;
            let image = load(&input)?;
            let (patched, truth) = inject_patches(&image, &spec)?;
            let patched_png = encode_image_png(&patched)?;
            let truth_png = encode_binary_png(truth.side(), truth.bits())?;
            std::fs::create_dir_all(&out)?;
            write_atomic(&out.join("patched.png"), &patched_png)?;
            write_atomic(&out.join("truth.png"), &truth_png)?;
            Ok(())
        }
        Command::Sweep {
            input,
            out,
            truth,
            sizes,
            pipeline,
        } => sweep(&input, &out, truth.as_deref(), &sizes, &pipeline),
    }
}

fn load(path: &Path) -> Result<Image> {
    read_png(path).with_context(|| format!("reading {}", path.display()))
}

fn load_truth(path: &Path) -> Result<PixelMask> {
    let (side, bits) = read_binary_png(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(PixelMask::new(side, bits)?)
}

/// Runs `job` on a single PNG with outputs in `out`, or on every PNG of a
/// directory with outputs in `out/<file stem>`.
fn for_each_input<F>(input: &Path, out: &Path, job: F) -> Result<()>
where
    F: Fn(&Image, &Path) -> Result<()> + Sync,
{
    if !input.is_dir() {
        let image = load(input)?;
        return job(&image, out);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(input)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")));
    files.sort();
    if files.is_empty() {
        bail!("no PNG files in {}", input.display());
    }
    files.par_iter().try_for_each(|file| {
        let stem = file.file_stem().unwrap_or_default();
        let image = load(file)?;
        job(&image, &out.join(stem)).with_context(|| format!("processing {}", file.display()))
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn resurface_one(image: &Image, out: &Path, cfg: &Config) -> Result<()> {
    let result = resurface(image, cfg)?;
    // encode everything before touching the output directory
    let reconstructed = encode_image_png(&result.reconstructed)?;
    let cropped = encode_image_png(&result.cropped)?;
    let mask = encode_mask_png(&result.mask)?;
    let mut surface = SurfaceExport::from_grid(&result.grid).to_json()?;
    surface.push('\n');
    std::fs::create_dir_all(out)?;
    write_atomic(&out.join("reconstructed.png"), &reconstructed)?;
    write_atomic(&out.join("cropped.png"), &cropped)?;
    write_atomic(&out.join("mask.png"), &mask)?;
    write_atomic(&out.join("surface.json"), surface.as_bytes())?;
    Ok(())
}

fn surface_one(image: &Image, out: &Path, cfg: &Config) -> Result<()> {
    let blocks = tvr_core::image_to_block(image, cfg.detector.block_side)?;
    let grid = tvr_core::score_grid(&blocks, &cfg.detector)?;
    std::fs::create_dir_all(out)?;
    write_json(&out.join("surface.json"), &SurfaceExport::from_grid(&grid))
}

fn evaluate(image: &Image, truth: &PixelMask, cfg: &Config) -> Result<DetectionReport> {
    let result = resurface(image, cfg)?;
    Ok(evaluate_detection(&result, truth)?)
}

#[derive(Serialize)]
struct SweepReport {
    block_size: usize,
    nrow: usize,
    thresholds: Vec<f64>,
    flagged_per_channel: Vec<Vec<usize>>,
    /// Fraction of (channel, pixel) entries masked.
    masked_fraction: f64,
    detection: Option<DetectionReport>,
}

fn sweep(input: &Path, out: &Path, truth: Option<&Path>, sizes: &[usize], pipeline: &PipelineArgs) -> Result<()> {
    if sizes.is_empty() {
        bail!("no block sizes to sweep");
    }
    let image = load(input)?;
    let truth = truth.map(load_truth).transpose()?;
    let reports = sizes
        .par_iter()
        .map(|&k| {
            let cfg = pipeline.to_config(k)?;
            let result = resurface(&image, &cfg).with_context(|| format!("block size {k}"))?;
            let detection = truth.as_ref().map(|t| evaluate_detection(&result, t)).transpose()?;
            Ok(SweepReport {
                block_size: k,
                nrow: result.grid.nrow(),
                thresholds: result.grid.thresholds().to_vec(),
                flagged_per_channel: (0..tvr_core::CHANNELS).map(|c| result.flags.channel(c)).collect(),
                masked_fraction: result.mask.count_ones() as f64 / result.mask.bits().len() as f64,
                detection,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(out)?;
    for report in &reports {
        write_json(&out.join(format!("report-k{}.json", report.block_size)), report)?;
    }
    Ok(())
}
