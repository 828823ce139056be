//! Command-line front end for the `patchwarp` garment warping library.
//!
//! * `warp` — extract pose-anchored garment patches from a source image,
//!   normalize them into 64×64 templates, re-warp them onto a target pose,
//!   and write the stitched garment plus per-patch diagnostics.
//! * `align` — partition a garment-shape mask against a warped-garment mask
//!   and write the aligned/misaligned/removed visualization.
//! * `selfcheck` — run the embedded invariant suite.
//! * `fixture` — write the synthetic fixture bundle the end-to-end tests
//!   (and curious users) feed back into `warp`.
//!
//! Exit codes: 0 success, 2 input parse failure, 3 geometry failure,
//! 1 anything else (including self-check failures).

mod commands;
mod error;
mod files;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patchwarp::fixtures::TextureKind;
use patchwarp::GarmentKind;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "patchwarp", version, about = "Pose-guided garment patch warping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Warp a garment from a source pose onto a target pose.
    Warp(WarpArgs),
    /// Split a garment mask into aligned and misaligned parts.
    Align(AlignArgs),
    /// Run the embedded invariant suite and print a pass/fail table.
    Selfcheck,
    /// Write the synthetic fixture bundle to a directory.
    Fixture(FixtureArgs),
}

#[derive(Args)]
pub struct WarpArgs {
    /// Source person image (PNG; alpha optional).
    #[arg(long)]
    pub image: PathBuf,
    /// Garment mask (grayscale PNG; levels >= 128 are garment).
    #[arg(long)]
    pub mask: PathBuf,
    /// Source pose keypoints (JSON).
    #[arg(long)]
    pub source_pose: PathBuf,
    /// Target pose keypoints (JSON).
    #[arg(long)]
    pub target_pose: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = GarmentArg::Upper)]
    pub garment: GarmentArg,
    /// Limb patch width as a fraction of the limb segment length.
    #[arg(long, default_value_t = 0.45)]
    pub width_factor: f64,
    /// Keypoints below this confidence count as absent.
    #[arg(long, default_value_t = 0.1)]
    pub min_confidence: f64,
    /// Seed for the erasing RNG.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Apply seeded arm dropping and free-form erasing.
    #[arg(long)]
    pub erase: bool,
    /// Probability of dropping one arm patch (with --erase).
    #[arg(long, default_value_t = 0.2)]
    pub alpha1: f64,
    /// Probability of free-form erasing (with --erase).
    #[arg(long, default_value_t = 0.9)]
    pub alpha2: f64,
}

#[derive(Args)]
pub struct AlignArgs {
    /// Predicted garment shape mask (grayscale PNG).
    #[arg(long)]
    pub garment_mask: PathBuf,
    /// Warped garment mask (grayscale PNG).
    #[arg(long)]
    pub warped_mask: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct FixtureArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = TextureArg::Checker)]
    pub texture: TextureArg,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum GarmentArg {
    Upper,
    Lower,
    Full,
}

impl GarmentArg {
    pub fn kind(self) -> GarmentKind {
        match self {
            GarmentArg::Upper => GarmentKind::Upper,
            GarmentArg::Lower => GarmentKind::Lower,
            GarmentArg::Full => GarmentKind::Full,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TextureArg {
    Solid,
    Checker,
    Stripes,
    LogoDot,
}

impl TextureArg {
    pub fn kind(self) -> TextureKind {
        match self {
            TextureArg::Solid => TextureKind::Solid,
            TextureArg::Checker => TextureKind::Checker,
            TextureArg::Stripes => TextureKind::Stripes,
            TextureArg::LogoDot => TextureKind::LogoDot,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Warp(args) => commands::run_warp(args),
        Command::Align(args) => commands::run_align(args),
        Command::Selfcheck => commands::run_selfcheck(),
        Command::Fixture(args) => commands::run_fixture(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
