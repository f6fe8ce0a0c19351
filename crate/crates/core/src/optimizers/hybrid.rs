//! Hybrid ABC / Levy-flight iteration.
//!
//! One call runs, in order: an unconditional Levy move for every UAV,
//! fitness-split balancing (above-median UAVs move relative to their nearest
//! better neighbour, the rest toward the global best), safe-zone separation,
//! onlooker Levy probes kept only on strict improvement, and scout
//! relocation for stagnant UAVs. Every intermediate move is step- and
//! boundary-clamped.

use crate::constraints::{clamp_boundary, clamp_step, safe_zone_separation};
use crate::env::{AlgorithmParams, ConstraintParams, GridConfig, Hotspot, SwarmState};
use crate::geometry::Vec2;
use crate::rng::{LevySampler, RandomStream};

use super::fitness::{fitness, nectar_probabilities};
use super::{random_target, Phase, ProposedMove};

/// Levy-selection probability `1 / (1 + exp(-sigma (f_i - f_g)))`.
pub fn adaptive_lambda(f_i: f64, f_g: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + (-sigma * (f_i - f_g)).exp())
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Nearest UAV with strictly higher fitness; ties on distance go to the
/// lower index.
fn nearest_better(positions: &[Vec2], fit: &[f64], i: usize) -> Option<usize> {
    (0..positions.len())
        .filter(|&j| fit[j] > fit[i])
        .min_by(|&a, &b| {
            positions[i]
                .distance(positions[a])
                .total_cmp(&positions[i].distance(positions[b]))
                .then(a.cmp(&b))
        })
}

/// Displacements of the balancing phase, computed from one snapshot.
pub fn balance_displacements(
    positions: &[Vec2],
    fit: &[f64],
    best: Vec2,
    params: &AlgorithmParams,
) -> Vec<Vec2> {
    let m = median(fit);
    (0..positions.len())
        .map(|i| {
            if fit[i] > m {
                nearest_better(positions, fit, i).map_or(Vec2::ZERO, |j| {
                    (positions[i] - positions[j])
                        * (params.exploit_coeff * params.exploit_sign.factor())
                })
            } else {
                (best - positions[i]) * params.explore_coeff
            }
        })
        .collect()
}

/// Onlooker probes. `probs[i]` is the chance UAV `i` probes; a probe is kept
/// only if it strictly improves fitness. Returns which UAVs moved.
#[allow(clippy::too_many_arguments)]
pub fn onlooker_phase<R: RandomStream>(
    positions: &mut [Vec2],
    fit: &mut [f64],
    probs: &[f64],
    sampler: &LevySampler,
    hotspots: &[Hotspot],
    constraints: &ConstraintParams,
    shaping: bool,
    grid: GridConfig,
    streams: &mut [R],
) -> Vec<bool> {
    let mut moved = vec![false; positions.len()];
    for (i, src) in streams.iter_mut().enumerate().take(positions.len()) {
        if src.next_unit() >= probs[i] {
            continue;
        }
        let step = clamp_step(sampler.sample(src).vector, constraints.max_step_size);
        let cand = clamp_boundary(positions[i] + step, grid);
        let f = fitness(cand, hotspots, constraints.coverage_radius, shaping).value();
        if f > fit[i] {
            positions[i] = cand;
            fit[i] = f;
            moved[i] = true;
        }
    }
    moved
}

/// Best-known position under the current coverage state: the stored global
/// best (re-scored against the hotspots still open) or the best current UAV,
/// whichever scores higher. Ties go to the lowest UAV index.
fn best_known(swarm: &SwarmState, pos: &[Vec2], fit: &[f64], eval: impl Fn(Vec2) -> f64) -> Vec2 {
    let top = (0..pos.len()).max_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(b.cmp(&a)));
    let current = top.map(|i| (pos[i], fit[i]));
    let remembered = swarm.global_best.map(|b| (b.position, eval(b.position)));
    match (current, remembered) {
        (Some(c), Some(r)) if r.1 > c.1 => r.0,
        (Some(c), _) => c.0,
        (None, Some(r)) => r.0,
        (None, None) => Vec2::ZERO,
    }
}

pub fn hybrid_step<R: RandomStream>(
    swarm: &SwarmState,
    hotspots: &[Hotspot],
    params: &AlgorithmParams,
    constraints: &ConstraintParams,
    grid: GridConfig,
    streams: &mut [R],
) -> Vec<ProposedMove> {
    let n = swarm.len();
    let max_step = constraints.max_step_size;
    let r_cov = constraints.coverage_radius;
    let sampler = LevySampler::new(
        params.levy_weight,
        params.levy_beta,
        params.mantegna_normalized,
    )
    .expect("levy parameters are validated with the scenario");
    let eval = |p: Vec2| fitness(p, hotspots, r_cov, params.shaping).value();

    let origin = swarm.positions();

    // Employed: Levy move, then clamp.
    let mut pos: Vec<Vec2> = origin
        .iter()
        .zip(streams.iter_mut())
        .map(|(&p, src)| clamp_boundary(p + clamp_step(sampler.sample(src).vector, max_step), grid))
        .collect();

    // Balancing.
    let fit: Vec<f64> = pos.iter().map(|&p| eval(p)).collect();
    let best = best_known(swarm, &pos, &fit, eval);
    let nudges = balance_displacements(&pos, &fit, best, params);
    for (p, d) in pos.iter_mut().zip(nudges) {
        *p = clamp_boundary(*p + clamp_step(d, max_step), grid);
    }

    // Safe zone.
    safe_zone_separation(&mut pos, constraints.safe_zone_radius);
    for p in pos.iter_mut() {
        *p = clamp_boundary(*p, grid);
    }

    // Onlookers.
    let mut fit: Vec<f64> = pos.iter().map(|&p| eval(p)).collect();
    let probs = if params.adaptive_lambda {
        let f_g = swarm
            .global_best
            .map(|b| b.fitness)
            .unwrap_or_else(|| fit.iter().copied().fold(0.0, f64::max));
        fit.iter()
            .map(|&f| adaptive_lambda(f, f_g, params.sigma_sensitivity))
            .collect()
    } else {
        nectar_probabilities(&fit).expect("non-empty, nonnegative fitness")
    };
    let onlooked = onlooker_phase(
        &mut pos,
        &mut fit,
        &probs,
        &sampler,
        hotspots,
        constraints,
        params.shaping,
        grid,
        streams,
    );

    // Scouts.
    (0..n)
        .map(|i| {
            if swarm.uavs[i].stagnation >= params.stagnation_limit {
                ProposedMove::scout(i, random_target(&mut streams[i], grid))
            } else {
                let phase = if onlooked[i] {
                    Phase::Onlooker
                } else {
                    Phase::Employed
                };
                ProposedMove::relative(i, pos[i] - origin[i], phase)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::Motion;
    use crate::rng::{RandomSource, ScriptedStream};

    #[test]
    fn sigmoid_midpoint() {
        assert_eq!(adaptive_lambda(0.7, 0.7, 3.0), 0.5);
        assert!(adaptive_lambda(0.0, 1.0, 1.0) < 0.5);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn balance_split() {
        let ps = [
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(20.0, 0.0),
        ];
        let fit = [0.1, 0.2, 0.3];
        let params = AlgorithmParams {
            explore_coeff: 0.5,
            exploit_coeff: 0.25,
            ..Default::default()
        };
        let d = balance_displacements(&ps, &fit, Vec2::new(40.0, 0.0), &params);
        // below/at median -> toward best
        assert_eq!(d[0], Vec2::new(20.0, 0.0));
        assert_eq!(d[1], Vec2::new(15.0, 0.0));
        // top UAV has no better neighbour
        assert_eq!(d[2], Vec2::ZERO);
    }

    #[test]
    fn exploit_uses_nearest_better() {
        let ps = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(5.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(50.0, 0.0),
        ];
        let fit = [0.0, 0.1, 0.5, 0.4, 0.9];
        let params = AlgorithmParams {
            exploit_coeff: 1.0,
            ..Default::default()
        };
        let d = balance_displacements(&ps, &fit, Vec2::ZERO, &params);
        // UAV 3 (fit 0.4 > median 0.4? no) -> explore; UAV 2 (0.5) -> away from UAV 4
        assert_eq!(d[2], Vec2::new(-45.0, 0.0));
        let attract = AlgorithmParams {
            exploit_sign: crate::env::ExploitSign::Attract,
            ..params
        };
        let d = balance_displacements(&ps, &fit, Vec2::ZERO, &attract);
        assert_eq!(d[2], Vec2::new(45.0, 0.0));
    }

    #[test]
    fn onlooker_never_lowers_fitness() {
        let hs = [Hotspot::new(50.0, 50.0), Hotspot::new(20.0, 70.0)];
        let c = ConstraintParams::default();
        let sampler = LevySampler::new(3.0, 1.5, true).unwrap();
        let mut streams = RandomSource::for_swarm(9, 5);
        let mut pos: Vec<Vec2> = (0..5)
            .map(|i| Vec2::new(10.0 + 15.0 * i as f64, 30.0))
            .collect();
        for _ in 0..200 {
            let mut fit: Vec<f64> = pos
                .iter()
                .map(|&p| fitness(p, &hs, 3.0, true).value())
                .collect();
            let before = fit.clone();
            onlooker_phase(
                &mut pos,
                &mut fit,
                &[1.0; 5],
                &sampler,
                &hs,
                &c,
                true,
                GridConfig::default(),
                &mut streams,
            );
            for i in 0..5 {
                assert!(fit[i] >= before[i]);
                assert_eq!(fit[i], fitness(pos[i], &hs, 3.0, true).value());
            }
        }
    }

    #[test]
    fn lone_uav_with_zero_draws_stays() {
        let swarm = SwarmState::from_positions([Vec2::new(40.0, 40.0)]);
        let hs = [Hotspot::new(90.0, 90.0)];
        let mut streams = vec![ScriptedStream::constant(0.0, 0.0)];
        let moves = hybrid_step(
            &swarm,
            &hs,
            &AlgorithmParams::default(),
            &ConstraintParams::default(),
            GridConfig::default(),
            &mut streams,
        );
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].motion, Motion::Relative(Vec2::ZERO));
    }

    #[test]
    fn coincident_pair_separated() {
        let swarm = SwarmState::from_positions([Vec2::new(40.0, 40.0), Vec2::new(40.0, 40.0)]);
        let hs = [Hotspot::new(90.0, 90.0)];
        let c = ConstraintParams::default();
        let mut streams = vec![ScriptedStream::constant(0.0, 0.99); 2];
        let moves = hybrid_step(
            &swarm,
            &hs,
            &AlgorithmParams::default(),
            &c,
            GridConfig::default(),
            &mut streams,
        );
        let a = swarm.uavs[0].position + moves[0].displacement_from(swarm.uavs[0].position);
        let b = swarm.uavs[1].position + moves[1].displacement_from(swarm.uavs[1].position);
        assert!(a.distance(b) >= c.safe_zone_radius);
        assert_eq!(a, Vec2::new(41.0, 40.0));
    }

    #[test]
    fn stagnant_uav_scouts_inside_grid() {
        let mut swarm = SwarmState::from_positions([Vec2::new(10.0, 10.0), Vec2::new(60.0, 10.0)]);
        let params = AlgorithmParams::default();
        swarm.uavs[1].stagnation = params.stagnation_limit;
        let mut streams = RandomSource::for_swarm(4, 2);
        let moves = hybrid_step(
            &swarm,
            &[Hotspot::new(5.0, 5.0)],
            &params,
            &ConstraintParams::default(),
            GridConfig::default(),
            &mut streams,
        );
        assert_eq!(moves[1].phase, Phase::Scout);
        match moves[1].motion {
            Motion::Absolute(t) => assert!(GridConfig::default().contains(t)),
            Motion::Relative(_) => panic!("scout must carry an absolute target"),
        }
        assert_ne!(moves[0].phase, Phase::Scout);
    }
}
