//! Plain artificial bee colony: employed, onlooker and scout phases with
//! greedy acceptance on the coverage fitness.

use crate::constraints::{clamp_boundary, clamp_step};
use crate::env::{Hotspot, ScenarioConfig, SwarmState};
use crate::geometry::Vec2;
use crate::rng::RandomStream;

use super::fitness::{fitness, nectar_probabilities};
use super::{random_target, Phase, ProposedMove};

/// `x_i + phi * (x_i - x_k)` with `phi ~ U(-1, 1)` drawn per axis (x first).
pub fn abc_candidate<R: RandomStream + ?Sized>(src: &mut R, x_i: Vec2, x_k: Vec2) -> Vec2 {
    let phi_x = src.uniform(-1.0, 1.0);
    let phi_y = src.uniform(-1.0, 1.0);
    let diff = x_i - x_k;
    Vec2::new(x_i.x + phi_x * diff.x, x_i.y + phi_y * diff.y)
}

/// Partner index `k != i`, uniform over the `limit` nearest other UAVs
/// (all of them when `limit` is 0). `None` for a lone UAV.
pub(crate) fn pick_partner<R: RandomStream + ?Sized>(
    src: &mut R,
    positions: &[Vec2],
    i: usize,
    limit: usize,
) -> Option<usize> {
    let mut others: Vec<usize> = (0..positions.len()).filter(|&k| k != i).collect();
    if others.is_empty() {
        return None;
    }
    if limit > 0 && limit < others.len() {
        others.sort_by(|&a, &b| {
            positions[i]
                .distance(positions[a])
                .total_cmp(&positions[i].distance(positions[b]))
                .then(a.cmp(&b))
        });
        others.truncate(limit);
    }
    Some(others[src.index(others.len())])
}

/// Roulette-wheel index from a probability vector.
pub(crate) fn roulette<R: RandomStream + ?Sized>(src: &mut R, probs: &[f64]) -> usize {
    let r = src.next_unit();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// One ABC iteration over the swarm. Every UAV is a food source. Candidates
/// are step- and boundary-clamped before evaluation and replace the source
/// only on strict fitness improvement. Onlooker `o` draws from stream `o`.
pub fn abc_step<R: RandomStream>(
    swarm: &SwarmState,
    hotspots: &[Hotspot],
    config: &ScenarioConfig,
    streams: &mut [R],
) -> Vec<ProposedMove> {
    let n = swarm.len();
    let params = &config.params;
    let r_cov = config.constraints.coverage_radius;
    let max_step = config.constraints.max_step_size;
    let origin = swarm.positions();
    let mut pos = origin.clone();
    let mut fit: Vec<f64> = swarm.uavs.iter().map(|u| u.fitness).collect();
    let mut phase = vec![Phase::Employed; n];

    let try_improve = |i: usize, src: &mut R, pos: &mut [Vec2], fit: &mut [f64]| {
        let Some(k) = pick_partner(src, pos, i, params.abc_limit_neighbors) else {
            return false;
        };
        let raw = abc_candidate(src, pos[i], pos[k]);
        let cand = clamp_boundary(pos[i] + clamp_step(raw - pos[i], max_step), config.grid);
        let f = fitness(cand, hotspots, r_cov, params.shaping).value();
        if f > fit[i] {
            pos[i] = cand;
            fit[i] = f;
            true
        } else {
            false
        }
    };

    for (i, src) in streams.iter_mut().enumerate().take(n) {
        try_improve(i, src, &mut pos, &mut fit);
    }

    let probs = nectar_probabilities(&fit).expect("non-empty, nonnegative fitness");
    for src in streams.iter_mut().take(n) {
        let i = roulette(src, &probs);
        if try_improve(i, src, &mut pos, &mut fit) {
            phase[i] = Phase::Onlooker;
        }
    }

    (0..n)
        .map(|i| {
            if swarm.uavs[i].stagnation >= params.stagnation_limit {
                ProposedMove::scout(i, random_target(&mut streams[i], config.grid))
            } else {
                ProposedMove::relative(i, pos[i] - origin[i], phase[i])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ScriptedStream;

    fn forced_phi(phi: f64) -> ScriptedStream {
        // uniform(-1, 1) = -1 + 2u
        ScriptedStream::constant(0.0, (phi + 1.0) / 2.0)
    }

    #[test]
    fn equal_points_give_same_point() {
        let mut src = crate::rng::RandomSource::new(1, 1);
        let x = Vec2::new(3.0, 4.0);
        for _ in 0..10 {
            assert_eq!(abc_candidate(&mut src, x, x), x);
        }
    }

    #[test]
    fn zero_phi_gives_same_point() {
        let mut src = forced_phi(0.0);
        let x = Vec2::new(3.0, 4.0);
        assert_eq!(abc_candidate(&mut src, x, Vec2::new(9.0, -2.0)), x);
    }

    #[test]
    fn minus_one_phi() {
        let mut src = forced_phi(-1.0);
        let c = abc_candidate(&mut src, Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0));
        assert_eq!(c, Vec2::new(2.0, 0.0));
    }

    #[test]
    fn partner_never_self() {
        let mut src = crate::rng::RandomSource::new(3, 1);
        let ps: Vec<Vec2> = (0..5).map(|i| Vec2::new(i as f64, 0.0)).collect();
        for _ in 0..200 {
            let k = pick_partner(&mut src, &ps, 2, 0).unwrap();
            assert_ne!(k, 2);
            let k = pick_partner(&mut src, &ps, 2, 2).unwrap();
            assert!(k == 1 || k == 3);
        }
        assert!(pick_partner(&mut src, &ps[..1], 0, 0).is_none());
    }

    #[test]
    fn roulette_respects_mass() {
        let mut src = ScriptedStream::constant(0.0, 0.3);
        assert_eq!(roulette(&mut src, &[0.25, 0.75]), 1);
        let mut src = ScriptedStream::constant(0.0, 0.1);
        assert_eq!(roulette(&mut src, &[0.25, 0.75]), 0);
    }
}
