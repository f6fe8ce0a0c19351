//! Global-best particle swarm with inertia weight.

use crate::env::{PsoParams, ScenarioConfig, SwarmState, UavState};
use crate::geometry::Vec2;
use crate::rng::RandomStream;

use super::{Phase, ProposedMove};

/// `v <- w v + c1 r1 (p - x) + c2 r2 (g - x)`, `x <- x + v`, with `r1, r2`
/// drawn per axis in the order r1.x, r1.y, r2.x, r2.y. Falls back to the
/// current position when no personal best is recorded yet.
pub fn pso_step<R: RandomStream + ?Sized>(
    state: &UavState,
    global_best: Vec2,
    params: &PsoParams,
    src: &mut R,
) -> (Vec2, Vec2) {
    let x = state.position;
    let p = state.personal_best.map_or(x, |b| b.position);
    let r1 = Vec2::new(src.next_unit(), src.next_unit());
    let r2 = Vec2::new(src.next_unit(), src.next_unit());
    let cognitive = p - x;
    let social = global_best - x;
    let v = Vec2::new(
        params.inertia * state.velocity.x
            + params.cognitive * r1.x * cognitive.x
            + params.social * r2.x * social.x,
        params.inertia * state.velocity.y
            + params.cognitive * r1.y * cognitive.y
            + params.social * r2.y * social.y,
    );
    (v, x + v)
}

pub fn pso_swarm_step<R: RandomStream>(
    swarm: &SwarmState,
    config: &ScenarioConfig,
    streams: &mut [R],
) -> Vec<ProposedMove> {
    swarm
        .uavs
        .iter()
        .zip(streams.iter_mut())
        .enumerate()
        .map(|(i, (uav, src))| {
            let g = swarm.global_best.map_or(uav.position, |b| b.position);
            let (v, x) = pso_step(uav, g, &config.params.pso, src);
            let mut mv = ProposedMove::relative(i, x - uav.position, Phase::Employed);
            mv.velocity = Some(v);
            mv
        })
        .collect()
}
