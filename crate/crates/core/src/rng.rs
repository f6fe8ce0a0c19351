//! Seeded random streams and the Mantegna Levy-step sampler.
//!
//! Streams are ChaCha8 keyed by the 64-bit run seed (`seed_from_u64`) with the
//! stream id written into ChaCha's 64-bit stream word. Stream 0 is reserved
//! for scenario generation; UAV `i` draws from stream `i + 1`. Distinct stream
//! words address disjoint keystreams, so per-UAV draws never overlap.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Stream reserved for scenario generation.
pub const SCENARIO_STREAM: u64 = 0;

/// Stream id for the UAV at `index`.
pub fn uav_stream(index: usize) -> u64 {
    index as u64 + 1
}

/// Smallest |v| accepted in the Mantegna denominator before re-drawing.
pub const MIN_DENOMINATOR: f64 = 1e-300;
const MAX_REDRAWS: usize = 8;
const SATURATION: f64 = 1e300;

/// Source of the primitive draws the optimizers consume.
pub trait RandomStream {
    /// Standard normal draw.
    fn next_gaussian(&mut self) -> f64;

    /// Uniform draw on `[0, 1)`.
    fn next_unit(&mut self) -> f64;

    fn gaussian_pair(&mut self) -> (f64, f64) {
        let u = self.next_gaussian();
        let v = self.next_gaussian();
        (u, v)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    fn index(&mut self, n: usize) -> usize {
        ((self.next_unit() * n as f64) as usize).min(n - 1)
    }
}

#[derive(Clone, Debug)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    seed: u64,
    stream_id: u64,
}

impl RandomSource {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomSource {
            rng,
            seed,
            stream_id,
        }
    }

    /// One source per UAV, indexed like the swarm.
    pub fn for_swarm(seed: u64, n_uavs: usize) -> Vec<RandomSource> {
        (0..n_uavs)
            .map(|i| RandomSource::new(seed, uav_stream(i)))
            .collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Raw 64-bit output, used for the cross-platform golden sequence.
    pub fn next_raw(&mut self) -> u64 {
        self.rng.random()
    }
}

impl RandomStream for RandomSource {
    fn next_gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn next_unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Replays scripted draws, then falls back to constants. Used to force
/// specific values through the optimizers in tests and examples.
#[derive(Clone, Debug, Default)]
pub struct ScriptedStream {
    pub gaussians: VecDeque<f64>,
    pub units: VecDeque<f64>,
    pub gaussian_fallback: f64,
    pub unit_fallback: f64,
}

impl ScriptedStream {
    pub fn constant(gaussian: f64, unit: f64) -> Self {
        ScriptedStream {
            gaussian_fallback: gaussian,
            unit_fallback: unit,
            ..Default::default()
        }
    }
}

impl RandomStream for ScriptedStream {
    fn next_gaussian(&mut self) -> f64 {
        self.gaussians.pop_front().unwrap_or(self.gaussian_fallback)
    }

    fn next_unit(&mut self) -> f64 {
        self.units.pop_front().unwrap_or(self.unit_fallback)
    }
}

/// Lanczos approximation (g = 7, n = 9) with reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    // Published coefficients, kept verbatim.
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];

    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta <= 2.0 {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "levy beta must lie in (0, 2], got {beta}"
        )))
    }
}

/// Mantegna scale `sigma_u` for stability index `beta`.
pub fn mantegna_sigma(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let num = gamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    Ok((num / den).powf(1.0 / beta))
}

/// One sampled Levy displacement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevyStep {
    pub vector: Vec2,
    /// Norm of `vector` before any step-size clamping.
    pub raw_magnitude: f64,
}

/// Precomputed Mantegna kernel `weight * sigma_u * u / |v|^(1/beta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevySampler {
    weight: f64,
    beta: f64,
    sigma_u: f64,
}

impl LevySampler {
    /// `normalized = false` drops `sigma_u` (sets it to 1), giving the bare
    /// `weight * u * |v|^(-1/beta)` kernel.
    pub fn new(weight: f64, beta: f64, normalized: bool) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::validation(format!(
                "levy weight must be positive and finite, got {weight}"
            )));
        }
        let sigma_u = if normalized {
            mantegna_sigma(beta)?
        } else {
            check_beta(beta)?;
            1.0
        };
        Ok(LevySampler {
            weight,
            beta,
            sigma_u,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn sigma_u(&self) -> f64 {
        self.sigma_u
    }

    /// Same kernel with a different weight; `sigma_u` is reused.
    pub fn with_weight(self, weight: f64) -> Self {
        LevySampler { weight, ..self }
    }

    /// Kernel evaluated at fixed Gaussian variates.
    pub fn component(&self, u: f64, v: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let v = v.abs().max(MIN_DENOMINATOR);
        let denom = v.powf(1.0 / self.beta).max(f64::MIN_POSITIVE);
        let value = self.weight * self.sigma_u * u / denom;
        if value.is_finite() {
            value.clamp(-SATURATION, SATURATION)
        } else {
            SATURATION.copysign(u)
        }
    }

    fn axis<R: RandomStream + ?Sized>(&self, src: &mut R) -> f64 {
        let (u, mut v) = src.gaussian_pair();
        let mut redraws = 0;
        while v.abs() < MIN_DENOMINATOR && redraws < MAX_REDRAWS {
            v = src.next_gaussian();
            redraws += 1;
        }
        self.component(u, v)
    }

    /// Draws one independent `(u, v)` pair per axis, x first.
    pub fn sample<R: RandomStream + ?Sized>(&self, src: &mut R) -> LevyStep {
        let vector = Vec2::new(self.axis(src), self.axis(src));
        LevyStep {
            vector,
            raw_magnitude: vector.norm(),
        }
    }
}

/// Convenience wrapper around [`LevySampler`] with the Mantegna scale applied.
pub fn levy_step<R: RandomStream + ?Sized>(
    src: &mut R,
    levy_weight: f64,
    beta: f64,
) -> Result<LevyStep> {
    Ok(LevySampler::new(levy_weight, beta, true)?.sample(src))
}
