//! One pass through the whole library, the way a training step would use it:
//! warp a garment across poses, erase part of it, partition the resulting
//! misalignment, inpaint a feature map, modulate it, and combine the losses.

use patchwarp::alignment::{compute_alignment, inpaint_features, resample_mask_nearest};
use patchwarp::augment::{random_erase, EraseConfig};
use patchwarp::fixtures::{garment_fixture, seeded_conv, seeded_features, turned_pose, TextureKind};
use patchwarp::metrics::{
    mask_loss, perceptual_loss, reconstruction_loss, total_loss, LossParts, LossWeights,
    PyramidExtractor,
};
use patchwarp::modulation::{affine_from_features, spade_backward, spade_modulate};
use patchwarp::patching::{layout_patches, warp_garment, LayoutParams};
use patchwarp::raster::SoftMask;
use patchwarp::role::GarmentKind;
use patchwarp::FeatureMap;

#[test]
fn full_training_style_pass() {
    // Warp the checker garment from the arms-out pose onto the lowered-arms
    // pose.
    let fixture = garment_fixture(TextureKind::Checker);
    let (width, height) = (fixture.image.width(), fixture.image.height());
    let target_pose = turned_pose();
    let params = LayoutParams::default();
    let warped = warp_garment(
        &fixture.image,
        &fixture.mask,
        &fixture.pose,
        &target_pose,
        GarmentKind::Upper,
        &params,
    )
    .expect("both poses are complete");
    assert_eq!(warped.transforms.len(), 8);
    assert!(warped.mask.any());

    // Self-occlusion augmentation. Seed 3 applies free-form erasing, so the
    // warped mask strictly shrinks.
    let (erased, report) = random_erase(&warped, &EraseConfig::new(3));
    assert!(report.freeform_applied);
    assert!(report.erased_pixels > 0);
    assert!(erased.mask.count_ones() < warped.mask.count_ones());

    // The predicted garment shape is the target layout's coverage; erasing
    // guarantees part of it is no longer backed by warped content.
    let target_layout = layout_patches(&target_pose, GarmentKind::Upper, &params, width, height)
        .expect("target pose is complete");
    let shape = target_layout.coverage_mask(width, height);
    let masks = compute_alignment(&shape, &erased.mask).unwrap();
    assert!(masks.misaligned.any(), "erased pixels must show up as misalignment");
    assert_eq!(masks.aligned.union(&masks.misaligned), shape);

    // Inpaint a feature map at the generator's working resolution.
    let (fw, fh) = (width / 8, height / 8);
    let small = patchwarp::alignment::AlignmentMasks {
        aligned: resample_mask_nearest(&masks.aligned, fw, fh),
        misaligned: resample_mask_nearest(&masks.misaligned, fw, fh),
    };
    let features = seeded_features(42, 8, fh, fw);
    let inpainted = inpaint_features(&features, &small).unwrap();
    for c in 0..8 {
        for y in 0..fh {
            for x in 0..fw {
                if !small.misaligned.get(x, y) {
                    assert_eq!(
                        features.at(c, y, x).to_bits(),
                        inpainted.at(c, y, x).to_bits(),
                        "inpainting touched a pixel outside the misaligned region"
                    );
                }
            }
        }
    }

    // Modulate the inpainted features with garment-driven affine parameters.
    let conv = seeded_conv(7, 16, 8, 3);
    let affine = affine_from_features(&inpainted, &conv).unwrap();
    let modulated = spade_modulate(&inpainted, &affine.gamma, &affine.beta, 1e-5).unwrap();
    assert!(modulated.data().iter().all(|v| v.is_finite()));

    // A backward pass against a ones-upstream: the beta gradient is the
    // upstream itself, and the hidden gradient sums to ~0 per channel
    // (normalization removes the mean shift).
    let upstream = FeatureMap::from_fn(8, fh, fw, |_, _, _| 1.0);
    let grads = spade_backward(&inpainted, &affine.gamma, &upstream, 1e-5).unwrap();
    assert_eq!(grads.beta, upstream);
    for c in 0..8 {
        let sum: f64 = grads.hidden.channel(c).iter().map(|&v| v as f64).sum();
        assert!(sum.abs() < 1e-3, "channel {c} hidden-gradient sum {sum}");
    }

    // Combine the losses the way a training step would.
    let parts = LossParts {
        gan: 0.25,
        reconstruction: reconstruction_loss(&erased.image, &warped.image).unwrap(),
        perceptual: perceptual_loss(&PyramidExtractor, &erased.image, &warped.image).unwrap(),
        mask: mask_loss(&SoftMask::from_alpha(&erased.image), &shape).unwrap(),
    };
    assert!(parts.reconstruction > 0.0, "erasing changed the image");
    assert!(parts.perceptual > 0.0);
    let weights = LossWeights::default();
    let total = total_loss(&parts, &weights);
    assert!(total.is_finite() && total > 0.0);
    assert_eq!(
        total,
        parts.gan
            + 40.0 * parts.reconstruction
            + 40.0 * parts.perceptual
            + 100.0 * parts.mask
    );
}
