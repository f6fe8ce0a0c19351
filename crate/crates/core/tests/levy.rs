mod common;

use canopy_core::rng::{gamma, LevySampler, RandomSource, RandomStream, ScriptedStream};
use canopy_core::{levy_step, mantegna_sigma};
use common::*;
use std::f64::consts::PI;

const GOLDEN: &str = include_str!("data/golden_seed0.txt");

#[test]
fn stirling_oracle_matches_closed_forms() {
    let cases = [
        (1.0, 1.0),
        (2.0, 1.0),
        (3.0, 2.0),
        (0.5, PI.sqrt()),
        (1.5, PI.sqrt() / 2.0),
        (2.5, 3.0 * PI.sqrt() / 4.0),
        (6.0, 120.0),
    ];
    for (x, expected) in cases {
        assert!(
            relative_error(gamma_stirling(x), expected) < 1e-13,
            "x = {x}"
        );
    }
}

#[test]
fn lanczos_gamma_agrees_with_oracle() {
    for i in 1..200 {
        let x = i as f64 * 0.05;
        let rel = relative_error(gamma(x), gamma_stirling(x));
        assert!(rel < 1e-12, "x = {x}: rel {rel:e}");
    }
}

#[test]
fn sigma_matches_oracle() {
    for beta in [0.5, 1.0, 1.5, 2.0] {
        let rel = relative_error(mantegna_sigma(beta).unwrap(), mantegna_sigma_oracle(beta));
        assert!(rel < 1e-12, "beta = {beta}: rel {rel:e}");
    }
}

#[test]
fn sigma_known_values() {
    assert!((mantegna_sigma(1.0).unwrap() - 1.0).abs() < 1e-12);
    assert!((mantegna_sigma(1.5).unwrap() - 0.6966).abs() < 1e-4);
}

#[test]
fn sigma_rejects_out_of_range_beta() {
    for beta in [0.0, -1.0, 2.5, f64::NAN] {
        assert!(mantegna_sigma(beta).is_err(), "beta = {beta}");
    }
}

fn sample_x(n: usize, seed: u64) -> Vec<f64> {
    let sampler = LevySampler::new(1.0, 1.5, true).unwrap();
    let mut src = RandomSource::new(seed, 0);
    (0..n).map(|_| sampler.sample(&mut src).vector.x).collect()
}

#[test]
fn heavy_tail_kurtosis() {
    let levy = sample_x(100_000, 11);
    let mut src = RandomSource::new(11, 1);
    let gauss: Vec<f64> = (0..100_000).map(|_| src.next_gaussian()).collect();
    let k_levy = excess_kurtosis(&levy);
    let k_gauss = excess_kurtosis(&gauss);
    assert!(k_gauss.abs() < 0.2, "gaussian kurtosis {k_gauss}");
    assert!(k_levy > 10.0, "levy kurtosis {k_levy}");
}

#[test]
fn heavy_tail_percentile_vs_mad_gaussian() {
    let levy = sample_x(100_000, 12);
    let abs: Vec<f64> = levy.iter().map(|x| x.abs()).collect();
    let center = median(&levy);
    let dev: Vec<f64> = levy.iter().map(|x| (x - center).abs()).collect();
    let sigma_hat = 1.4826 * median(&dev);
    let mut src = RandomSource::new(12, 1);
    let baseline: Vec<f64> = (0..100_000)
        .map(|_| (sigma_hat * src.next_gaussian()).abs())
        .collect();
    let ratio = percentile(&abs, 0.999) / percentile(&baseline, 0.999);
    assert!(ratio >= 3.0, "tail ratio {ratio}");
}

#[test]
fn symmetric_about_zero() {
    let z = sign_test_z(&sample_x(100_000, 13));
    assert!(z.abs() < Z_P001, "sign test z = {z}");
}

#[test]
fn weight_scales_linearly() {
    for seed in 0..20 {
        let a = levy_step(&mut RandomSource::new(seed, 0), 1.0, 1.5).unwrap();
        let b = levy_step(&mut RandomSource::new(seed, 0), 3.0, 1.5).unwrap();
        assert!((b.vector.x - 3.0 * a.vector.x).abs() <= 1e-12 * b.vector.x.abs().max(1.0));
        assert!((b.vector.y - 3.0 * a.vector.y).abs() <= 1e-12 * b.vector.y.abs().max(1.0));
    }
}

#[test]
fn scripted_kernel_value() {
    // u = 1, v = 1 gives weight * sigma_u on each axis.
    let mut src = ScriptedStream::constant(1.0, 0.5);
    let step = levy_step(&mut src, 2.0, 1.5).unwrap();
    let expected = 2.0 * mantegna_sigma_oracle(1.5);
    assert!(relative_error(step.vector.x, expected) < 1e-12);
    assert!(relative_error(step.vector.y, expected) < 1e-12);
}

#[test]
fn golden_sequence_seed_zero() {
    let mut raw = RandomSource::new(0, 0);
    let mut gauss = RandomSource::new(0, 0);
    let mut n = 0;
    for line in GOLDEN.lines() {
        let (kind, hex) = line.split_once(' ').unwrap();
        let bits = u64::from_str_radix(hex, 16).unwrap();
        match kind {
            "raw" => assert_eq!(raw.next_raw(), bits, "line {n}"),
            "gaussian" => assert_eq!(gauss.next_gaussian().to_bits(), bits, "line {n}"),
            other => panic!("unknown record {other}"),
        }
        n += 1;
    }
    assert_eq!(n, 128);
}
