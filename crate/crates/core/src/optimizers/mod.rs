//! Position-update strategies: plain ABC, plain PSO and the hybrid ABC-Levy
//! iteration. Each produces one [`ProposedMove`] per UAV; the constraint
//! pipeline turns proposals into realized positions.

pub mod abc;
pub mod fitness;
pub mod hybrid;
pub mod pso;

pub use abc::{abc_candidate, abc_step};
pub use fitness::{fitness, nectar_probabilities, Fitness, SHAPING_EPSILON};
pub use hybrid::{adaptive_lambda, hybrid_step};
pub use pso::{pso_step, pso_swarm_step};

use crate::env::{Algorithm, Hotspot, ScenarioConfig, SwarmState};
use crate::geometry::Vec2;
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Employed,
    Onlooker,
    Scout,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Motion {
    /// Displacement relative to the UAV's current position.
    Relative(Vec2),
    /// Absolute relocation target (scouts).
    Absolute(Vec2),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProposedMove {
    pub uav_index: usize,
    pub motion: Motion,
    pub phase: Phase,
    /// Updated PSO velocity, when the optimizer tracks one.
    pub velocity: Option<Vec2>,
}

impl ProposedMove {
    pub fn relative(uav_index: usize, displacement: Vec2, phase: Phase) -> Self {
        ProposedMove {
            uav_index,
            motion: Motion::Relative(displacement),
            phase,
            velocity: None,
        }
    }

    pub fn scout(uav_index: usize, target: Vec2) -> Self {
        ProposedMove {
            uav_index,
            motion: Motion::Absolute(target),
            phase: Phase::Scout,
            velocity: None,
        }
    }

    /// Displacement from `from` implied by this proposal.
    pub fn displacement_from(&self, from: Vec2) -> Vec2 {
        match self.motion {
            Motion::Relative(d) => d,
            Motion::Absolute(target) => target - from,
        }
    }
}

/// Dispatches one optimizer iteration for `config.algorithm`.
pub fn propose<R: RandomStream>(
    swarm: &SwarmState,
    hotspots: &[Hotspot],
    config: &ScenarioConfig,
    streams: &mut [R],
) -> Vec<ProposedMove> {
    match config.algorithm {
        Algorithm::Abc => abc_step(swarm, hotspots, config, streams),
        Algorithm::Pso => pso_swarm_step(swarm, config, streams),
        Algorithm::HybridAbcLevy => hybrid_step(
            swarm,
            hotspots,
            &config.params,
            &config.constraints,
            config.grid,
            streams,
        ),
    }
}

/// Uniform relocation target inside the grid.
pub(crate) fn random_target<R: RandomStream + ?Sized>(
    src: &mut R,
    grid: crate::env::GridConfig,
) -> Vec2 {
    Vec2::new(
        src.uniform(0.0, grid.max_x()),
        src.uniform(0.0, grid.max_y()),
    )
}
