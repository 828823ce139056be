//! Built-in verification battery.
//!
//! Re-runs the numerically sensitive parts of the crate against independent
//! references — oracle solvers, finite differences, pinned golden hashes,
//! decision-rate statistics — in a few seconds. The CLI exposes this as
//! `selfcheck` so a deployment can validate the arithmetic of the machine
//! it runs on.

use crate::alignment::compute_alignment;
use crate::augment::{random_erase, EraseConfig};
use crate::fixtures::{self, oracle, TextureKind};
use crate::geometry::{estimate_homography, Point2};
use crate::metrics::{perceptual_loss, total_loss, LossParts, LossWeights, PyramidExtractor};
use crate::modulation::{conv2d, spade_backward};
use crate::patching::{denormalize_patches, extract_and_normalize, stitch};
use crate::raster::{BinaryMask, RasterImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Human-readable measurement, e.g. the value that was compared.
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

/// Runs every check; designed to finish in well under half a minute.
pub fn run() -> Vec<CheckOutcome> {
    vec![
        check_homography_round_trip(),
        check_warp_round_trip_psnr(),
        check_conv_against_oracle(),
        check_spade_gradients(),
        check_alignment_partition(),
        check_erase_rates(),
        check_loss_references(),
        check_golden_hashes(),
    ]
}

fn check_homography_round_trip() -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let src = fixtures::random_quad(&mut rng, 150.0);
        let dst = fixtures::random_quad(&mut rng, 150.0);
        let Ok(h) = estimate_homography(&src, &dst) else {
            return CheckOutcome::new("homography_round_trip", false, "estimation failed".into());
        };
        let Ok(inv) = h.invert() else {
            return CheckOutcome::new("homography_round_trip", false, "inversion failed".into());
        };
        for _ in 0..8 {
            let p = Point2::new(rng.random_range(0.0..150.0), rng.random_range(0.0..150.0));
            let Ok(q) = h.apply(p) else { continue };
            let Ok(back) = inv.apply(q) else { continue };
            worst = worst.max(back.distance(p));
        }
    }
    CheckOutcome::new(
        "homography_round_trip",
        worst < 1e-6,
        format!("worst round-trip error {worst:.3e} px (limit 1e-6)"),
    )
}

fn check_warp_round_trip_psnr() -> CheckOutcome {
    let mut worst = f64::INFINITY;
    let mut detail = String::new();
    for kind in TextureKind::ALL {
        let fixture = fixtures::garment_fixture(kind);
        let normalized = match extract_and_normalize(&fixture.image, &fixture.mask, &fixture.layout)
        {
            Ok(n) => n,
            Err(e) => return CheckOutcome::new("warp_round_trip_psnr", false, e.to_string()),
        };
        let back = match denormalize_patches(
            &normalized,
            &fixture.layout,
            fixture.image.width(),
            fixture.image.height(),
        ) {
            Ok(b) => b,
            Err(e) => return CheckOutcome::new("warp_round_trip_psnr", false, e.to_string()),
        };
        let stitched = match stitch(&back, fixture.image.width(), fixture.image.height()) {
            Ok(s) => s,
            Err(e) => return CheckOutcome::new("warp_round_trip_psnr", false, e.to_string()),
        };
        let psnr = fixtures::masked_psnr(&stitched.image, &fixture.image, &stitched.mask)
            .unwrap_or(f64::NEG_INFINITY);
        if psnr < worst {
            worst = psnr;
            detail = format!("worst texture {} at {:.2} dB (limit 30)", kind.name(), psnr);
        }
    }
    CheckOutcome::new("warp_round_trip_psnr", worst >= 30.0, detail)
}

fn check_conv_against_oracle() -> CheckOutcome {
    let mut worst = 0.0f64;
    for kernel in [1usize, 3, 5] {
        let input = fixtures::seeded_features(40 + kernel as u64, 3, 12, 10);
        let params = fixtures::seeded_conv(50 + kernel as u64, 4, 3, kernel);
        let out = match conv2d(&input, &params) {
            Ok(o) => o,
            Err(e) => return CheckOutcome::new("conv_oracle_agreement", false, e.to_string()),
        };
        let reference = oracle::oracle_conv2d(
            input.data(),
            3,
            12,
            10,
            params.weights(),
            params.bias(),
            4,
            kernel,
        );
        let reference64: Vec<f64> = reference.iter().map(|&v| v as f64).collect();
        worst = worst.max(oracle::max_relative_error(out.data(), &reference64));
    }
    CheckOutcome::new(
        "conv_oracle_agreement",
        worst < 1e-6,
        format!("worst relative error {worst:.3e} (limit 1e-6)"),
    )
}

fn check_spade_gradients() -> CheckOutcome {
    let channels = 2;
    let (height, width) = (5, 4);
    let plane = height * width;
    let hidden = fixtures::seeded_features(71, channels, height, width);
    let gamma = fixtures::seeded_features(72, channels, height, width);
    let beta = fixtures::seeded_features(73, channels, height, width);
    let upstream = fixtures::seeded_features(74, channels, height, width);
    let eps = 1e-3;

    let grads = match spade_backward(&hidden, &gamma, &upstream, eps) {
        Ok(g) => g,
        Err(e) => return CheckOutcome::new("spade_gradient_check", false, e.to_string()),
    };
    let to64 = |m: &crate::raster::FeatureMap| -> Vec<f64> {
        m.data().iter().map(|&v| v as f64).collect()
    };
    let (dh, dg, db) = oracle::finite_diff_spade(
        &to64(&hidden),
        &to64(&gamma),
        &to64(&beta),
        &to64(&upstream),
        channels,
        plane,
        eps,
        1e-3,
    );
    let err = oracle::max_relative_error(grads.hidden.data(), &dh)
        .max(oracle::max_relative_error(grads.gamma.data(), &dg))
        .max(oracle::max_relative_error(grads.beta.data(), &db));
    CheckOutcome::new(
        "spade_gradient_check",
        err < 1e-4,
        format!("max relative error vs finite differences {err:.3e} (limit 1e-4)"),
    )
}

fn check_alignment_partition() -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for case in 0..200 {
        let garment = BinaryMask::from_fn(16, 16, |_, _| rng.random::<f64>() < 0.5);
        let body = BinaryMask::from_fn(16, 16, |_, _| rng.random::<f64>() < 0.5);
        let masks = match compute_alignment(&garment, &body) {
            Ok(m) => m,
            Err(e) => return CheckOutcome::new("alignment_partition", false, e.to_string()),
        };
        let ok = masks.aligned.union(&masks.misaligned) == garment
            && masks.aligned.intersect(&masks.misaligned).count_ones() == 0
            && masks.aligned.and_not(&body).count_ones() == 0;
        if !ok {
            return CheckOutcome::new(
                "alignment_partition",
                false,
                format!("partition property violated in case {case}"),
            );
        }
    }
    CheckOutcome::new("alignment_partition", true, "200 random mask pairs partition cleanly".into())
}

fn check_erase_rates() -> CheckOutcome {
    let garment = fixtures::small_warped_garment();
    let trials = 2_000u32;
    let mut drops = 0u32;
    let mut freeforms = 0u32;
    for seed in 0..trials {
        let (_, report) = random_erase(&garment, &EraseConfig::new(seed as u64));
        drops += report.arm_dropped.is_some() as u32;
        freeforms += report.freeform_applied as u32;
    }
    let drop_rate = drops as f64 / trials as f64;
    let freeform_rate = freeforms as f64 / trials as f64;
    let ok = (0.17..=0.23).contains(&drop_rate) && (0.87..=0.93).contains(&freeform_rate);
    CheckOutcome::new(
        "erase_rates",
        ok,
        format!("arm-drop {drop_rate:.3} (target 0.2), free-form {freeform_rate:.3} (target 0.9)"),
    )
}

fn check_loss_references() -> CheckOutcome {
    let parts = LossParts { gan: 0.0, reconstruction: 1.0, perceptual: 1.0, mask: 1.0 };
    let total = total_loss(&parts, &LossWeights::default());
    if total != 180.0 {
        return CheckOutcome::new(
            "loss_references",
            false,
            format!("unit parts under default weights gave {total}, expected 180"),
        );
    }
    let a = RasterImage::from_fn(32, 32, |_, _| [0.5, 0.5, 0.5, 1.0]);
    let b = RasterImage::from_fn(32, 32, |_, _| [0.6, 0.6, 0.6, 1.0]);
    let loss = perceptual_loss(&PyramidExtractor, &a, &b).unwrap_or(f64::NAN);
    let expect = 0.1 * 47.0 / 32.0;
    let ok = (loss - expect).abs() < 1e-6;
    CheckOutcome::new(
        "loss_references",
        ok,
        format!("perceptual flat-offset {loss:.8} vs reference {expect:.8}"),
    )
}

fn check_golden_hashes() -> CheckOutcome {
    let entries = fixtures::golden_entries();
    let bad: Vec<String> = entries
        .iter()
        .filter(|e| !e.matches())
        .map(|e| format!("{} actual {:#018x} pinned {:#018x}", e.name, e.actual, e.expected))
        .collect();
    if bad.is_empty() {
        CheckOutcome::new("golden_hashes", true, format!("{} artifacts match", entries.len()))
    } else {
        CheckOutcome::new("golden_hashes", false, bad.join("; "))
    }
}
