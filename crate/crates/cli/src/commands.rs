//! Subcommand implementations.

use crate::error::CliError;
use crate::files;
use crate::{AlignArgs, FixtureArgs, WarpArgs};
use patchwarp::alignment::compute_alignment;
use patchwarp::augment::{random_erase, EraseConfig, StrokeParams};
use patchwarp::fixtures::{garment_fixture, turned_pose};
use patchwarp::patching::{warp_garment, LayoutParams, WarpedGarment};
use patchwarp::selfcheck;
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

/// Machine-readable run summary written next to the image outputs.
#[derive(Serialize)]
struct Manifest {
    inputs: ManifestInputs,
    garment: String,
    seed: u64,
    per_patch: Vec<PatchEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    erase: Option<EraseEntry>,
    timings_ms: Timings,
}

#[derive(Serialize)]
struct ManifestInputs {
    image: String,
    mask: String,
    source_pose: String,
    target_pose: String,
    width: usize,
    height: usize,
}

#[derive(Serialize)]
struct PatchEntry {
    role: String,
    #[serde(rename = "H_s_to_n")]
    h_s_to_n: [f64; 9],
    #[serde(rename = "H_n_to_t")]
    h_n_to_t: [f64; 9],
}

#[derive(Serialize)]
struct EraseEntry {
    arm_dropped: Option<String>,
    freeform_applied: bool,
    erased_pixels: usize,
}

#[derive(Serialize)]
struct Timings {
    load: f64,
    pipeline: f64,
    write: f64,
    total: f64,
}

fn ms(from: Instant) -> f64 {
    from.elapsed().as_secs_f64() * 1e3
}

fn pipeline_err(e: impl std::fmt::Display) -> CliError {
    CliError::Pipeline(e.to_string())
}

pub fn run_warp(args: &WarpArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let image = files::load_rgba(&args.image)?;
    let mask = files::load_mask(&args.mask)?;
    if (mask.width(), mask.height()) != (image.width(), image.height()) {
        return Err(CliError::Input(format!(
            "mask is {}x{} but image is {}x{}",
            mask.width(),
            mask.height(),
            image.width(),
            image.height()
        )));
    }
    let source_pose = files::load_pose(&args.source_pose)?;
    let target_pose = files::load_pose(&args.target_pose)?;
    let (width, height) = (image.width(), image.height());
    source_pose.validate_bounds(width as f64, height as f64).map_err(pipeline_err)?;
    target_pose.validate_bounds(width as f64, height as f64).map_err(pipeline_err)?;
    let load = ms(started);

    let stage = Instant::now();
    let params =
        LayoutParams { width_factor: args.width_factor, min_confidence: args.min_confidence };
    let garment_kind = args.garment.kind();
    let warped = warp_garment(&image, &mask, &source_pose, &target_pose, garment_kind, &params)
        .map_err(pipeline_err)?;
    let (result, erase) = if args.erase {
        let config = EraseConfig {
            alpha1: args.alpha1,
            alpha2: args.alpha2,
            seed: args.seed,
            strokes: StrokeParams::default(),
        };
        let (erased, report) = random_erase(&warped, &config);
        let entry = EraseEntry {
            arm_dropped: report.arm_dropped.map(|r| r.name().to_string()),
            freeform_applied: report.freeform_applied,
            erased_pixels: report.erased_pixels,
        };
        (erased, Some(entry))
    } else {
        (warped, None)
    };
    let pipeline = ms(stage);

    let stage = Instant::now();
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Output(format!("cannot create {}: {e}", args.out_dir.display())))?;
    write_warp_outputs(&args.out_dir, &result)?;
    let write = ms(stage);

    let manifest = Manifest {
        inputs: ManifestInputs {
            image: args.image.display().to_string(),
            mask: args.mask.display().to_string(),
            source_pose: args.source_pose.display().to_string(),
            target_pose: args.target_pose.display().to_string(),
            width,
            height,
        },
        garment: garment_kind.to_string(),
        seed: args.seed,
        per_patch: result
            .transforms
            .iter()
            .map(|t| PatchEntry {
                role: t.role.name().to_string(),
                h_s_to_n: t.src_to_norm.matrix(),
                h_n_to_t: t.norm_to_target.matrix(),
            })
            .collect(),
        erase,
        timings_ms: Timings { load, pipeline, write, total: ms(started) },
    };
    write_json(&args.out_dir.join("manifest.json"), &manifest)?;

    println!(
        "warped {} patches ({} normalized) onto a {width}x{height} canvas",
        result.patches.len(),
        result.normalized.len()
    );
    println!("outputs in {}", args.out_dir.display());
    Ok(())
}

fn write_warp_outputs(out_dir: &Path, result: &WarpedGarment) -> Result<(), CliError> {
    for patch in &result.normalized {
        let name = format!("normalized_{}.png", patch.role.name());
        files::save_rgba(&out_dir.join(name), &patch.image)?;
    }
    files::save_rgba(&out_dir.join("warped_garment.png"), &result.image)?;
    files::save_mask(&out_dir.join("warped_mask.png"), &result.mask)?;

    let (width, height) = (result.width(), result.height());
    let mut buf = vec![0u8; width * height * 3];
    for (i, slot) in result.provenance.data().iter().enumerate() {
        if let Some(role) = slot {
            buf[3 * i..3 * i + 3].copy_from_slice(&files::role_color(*role));
        }
    }
    files::save_rgb(&out_dir.join("provenance.png"), width, height, buf)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Output(format!("json encoding failed: {e}")))?;
    bytes.push(b'\n');
    files::write_atomic(path, &bytes)
}

pub fn run_align(args: &AlignArgs) -> Result<(), CliError> {
    let garment = files::load_mask(&args.garment_mask)?;
    let warped = files::load_mask(&args.warped_mask)?;
    let masks =
        compute_alignment(&garment, &warped).map_err(|e| CliError::Input(e.to_string()))?;
    // The part of the warped garment that the predicted shape does not keep.
    let removed = warped.and_not(&masks.aligned);

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Output(format!("cannot create {}: {e}", args.out_dir.display())))?;
    files::save_mask(&args.out_dir.join("aligned.png"), &masks.aligned)?;
    files::save_mask(&args.out_dir.join("misaligned.png"), &masks.misaligned)?;

    // Composite: orange = misaligned (to inpaint), green = removed, gray =
    // aligned, black = background.
    let (width, height) = (garment.width(), garment.height());
    let mut buf = vec![0u8; width * height * 3];
    for y in 0..height {
        for x in 0..width {
            let color = if masks.misaligned.get(x, y) {
                [255, 140, 0]
            } else if removed.get(x, y) {
                [60, 180, 75]
            } else if masks.aligned.get(x, y) {
                [200, 200, 200]
            } else {
                continue;
            };
            buf[3 * (y * width + x)..3 * (y * width + x) + 3].copy_from_slice(&color);
        }
    }
    files::save_rgb(&args.out_dir.join("composite.png"), width, height, buf)?;

    println!(
        "aligned {} px, misaligned {} px, removed {} px",
        masks.aligned.count_ones(),
        masks.misaligned.count_ones(),
        removed.count_ones()
    );
    Ok(())
}

pub fn run_selfcheck() -> Result<(), CliError> {
    let outcomes = selfcheck::run();
    let name_width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    for outcome in &outcomes {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{:<name_width$}  {verdict}  {}", outcome.name, outcome.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed { failed, total: outcomes.len() });
    }
    println!("all {} checks passed", outcomes.len());
    Ok(())
}

pub fn run_fixture(args: &FixtureArgs) -> Result<(), CliError> {
    let fixture = garment_fixture(args.texture.kind());
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Output(format!("cannot create {}: {e}", args.out_dir.display())))?;
    files::save_rgba(&args.out_dir.join("image.png"), &fixture.image)?;
    files::save_mask(&args.out_dir.join("mask.png"), &fixture.mask)?;
    write_json(&args.out_dir.join("pose_source.json"), &files::pose_to_json(&fixture.pose))?;
    write_json(&args.out_dir.join("pose_target.json"), &files::pose_to_json(&turned_pose()))?;
    println!("fixture bundle in {}", args.out_dir.display());
    Ok(())
}
