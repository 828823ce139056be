//! Benchmarks of the per-pixel kernels, labeled by execution mode.
//!
//! Run both of
//!
//! ```text
//! cargo bench -p patchwarp
//! cargo bench -p patchwarp --no-default-features
//! ```
//!
//! to compare the rayon path (`par`) against the sequential fallback
//! (`seq`); IDs only differ in that suffix, so criterion keeps separate
//! baselines for each.

use criterion::{criterion_group, criterion_main, Criterion};
use patchwarp::alignment::{compute_alignment, inpaint_features};
use patchwarp::augment::{random_erase, EraseConfig};
use patchwarp::fixtures::{
    garment_fixture, seeded_conv, seeded_features, small_warped_garment, turned_pose, TextureKind,
};
use patchwarp::modulation::{conv2d, spade_backward, spade_modulate};
use patchwarp::patching::{
    denormalize_patches, extract_and_normalize, stitch, warp_garment, LayoutParams,
};
use patchwarp::raster::BinaryMask;
use patchwarp::GarmentKind;
use std::hint::black_box;

fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "par"
    } else {
        "seq"
    }
}

fn bench_warp_stages(c: &mut Criterion) {
    let fixture = garment_fixture(TextureKind::Checker);
    let (w, h) = (fixture.image.width(), fixture.image.height());
    let normalized =
        extract_and_normalize(&fixture.image, &fixture.mask, &fixture.layout).unwrap();
    let warped = denormalize_patches(&normalized, &fixture.layout, w, h).unwrap();

    c.bench_function(&format!("extract_normalize/{}", mode()), |b| {
        b.iter(|| {
            black_box(
                extract_and_normalize(&fixture.image, &fixture.mask, &fixture.layout).unwrap(),
            )
        })
    });
    c.bench_function(&format!("denormalize/{}", mode()), |b| {
        b.iter(|| black_box(denormalize_patches(&normalized, &fixture.layout, w, h).unwrap()))
    });
    c.bench_function(&format!("stitch/{}", mode()), |b| {
        b.iter(|| black_box(stitch(&warped, w, h).unwrap()))
    });
    c.bench_function(&format!("warp_garment/{}", mode()), |b| {
        b.iter(|| {
            black_box(
                warp_garment(
                    &fixture.image,
                    &fixture.mask,
                    &fixture.pose,
                    &turned_pose(),
                    GarmentKind::Upper,
                    &LayoutParams::default(),
                )
                .unwrap(),
            )
        })
    });
}

fn bench_modulation(c: &mut Criterion) {
    let hidden = seeded_features(1, 16, 64, 64);
    let gamma = seeded_features(2, 16, 64, 64);
    let beta = seeded_features(3, 16, 64, 64);
    let upstream = seeded_features(4, 16, 64, 64);
    let input = seeded_features(5, 8, 64, 64);
    let conv = seeded_conv(6, 8, 8, 3);

    c.bench_function(&format!("spade_modulate/{}", mode()), |b| {
        b.iter(|| black_box(spade_modulate(&hidden, &gamma, &beta, 1e-5).unwrap()))
    });
    c.bench_function(&format!("spade_backward/{}", mode()), |b| {
        b.iter(|| black_box(spade_backward(&hidden, &gamma, &upstream, 1e-5).unwrap()))
    });
    c.bench_function(&format!("conv2d_k3/{}", mode()), |b| {
        b.iter(|| black_box(conv2d(&input, &conv).unwrap()))
    });
}

fn bench_alignment_and_erase(c: &mut Criterion) {
    let features = seeded_features(7, 32, 64, 64);
    let garment_mask = BinaryMask::from_fn(64, 64, |x, y| x + y < 96);
    let body_mask = BinaryMask::from_fn(64, 64, |x, y| x >= 8 && y < 56);
    let masks = compute_alignment(&garment_mask, &body_mask).unwrap();
    let garment = small_warped_garment();

    c.bench_function(&format!("inpaint_features/{}", mode()), |b| {
        b.iter(|| black_box(inpaint_features(&features, &masks).unwrap()))
    });
    c.bench_function(&format!("random_erase/{}", mode()), |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed = seed.wrapping_add(1);
            black_box(random_erase(&garment, &EraseConfig::new(seed)))
        })
    });
}

criterion_group!(kernels, bench_warp_stages, bench_modulation, bench_alignment_and_erase);
criterion_main!(kernels);
