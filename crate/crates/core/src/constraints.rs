//! Motion and safety constraints applied after every optimizer proposal.
//!
//! Pipeline order, per step: proposal → step clamp → zone-escape override →
//! boundary clamp → safe-zone separation → potential field → boundary clamp →
//! correction cap → collision hold.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::env::{min_pairwise_distance, Algorithm, ConstraintParams, GridConfig, Hotspot};
use crate::geometry::Vec2;
use crate::optimizers::{Phase, ProposedMove};

/// Below this separation two UAVs count as coincident.
pub const COINCIDENT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub clamped_steps: u64,
    pub boundary_hits: u64,
    /// UAV-steps altered by safe-zone separation, the potential field or a collision hold.
    pub collision_interventions: u64,
    pub zone_escapes: u64,
}

impl AddAssign for ConstraintReport {
    fn add_assign(&mut self, rhs: Self) {
        self.clamped_steps += rhs.clamped_steps;
        self.boundary_hits += rhs.boundary_hits;
        self.collision_interventions += rhs.collision_interventions;
        self.zone_escapes += rhs.zone_escapes;
    }
}

/// Caps the displacement norm at `max_step_size`, keeping its direction.
pub fn clamp_step(displacement: Vec2, max_step_size: f64) -> Vec2 {
    let n = displacement.norm();
    if n <= max_step_size {
        return displacement;
    }
    let mut scaled = displacement * (max_step_size / n);
    // Rounding can leave the norm an ulp above the cap; shrink until it is not,
    // so the clamp is idempotent.
    while scaled.norm() > max_step_size {
        scaled = scaled * (1.0 - f64::EPSILON);
    }
    scaled
}

pub fn clamp_boundary(position: Vec2, grid: GridConfig) -> Vec2 {
    Vec2::new(
        position.x.min(grid.max_x()).max(0.0),
        position.y.min(grid.max_y()).max(0.0),
    )
}

/// Unit vector from `j` to `i`, with the fixed fallback for coincident pairs
/// (`+x` for the lower index, `-x` for the higher).
fn separation_axis(pi: Vec2, pj: Vec2, i: usize, j: usize) -> (Vec2, f64) {
    let diff = pi - pj;
    let d = diff.norm();
    if d < COINCIDENT {
        let axis = if i < j {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::new(-1.0, 0.0)
        };
        (axis, d)
    } else {
        (diff * (1.0 / d), d)
    }
}

/// Pushes every pair closer than `radius` apart, each member moving
/// `radius / 2` along the pair axis. Single pass over `(i, j)`, `i < j`.
/// Returns a per-UAV flag marking who moved.
pub fn safe_zone_separation(positions: &mut [Vec2], radius: f64) -> Vec<bool> {
    let n = positions.len();
    let mut moved = vec![false; n];
    for i in 0..n {
        for j in i + 1..n {
            let (axis, d) = separation_axis(positions[i], positions[j], i, j);
            if d < radius {
                let push = axis * (radius / 2.0);
                positions[i] += push;
                positions[j] += -push;
                moved[i] = true;
                moved[j] = true;
            }
        }
    }
    moved
}

/// Repulsive potential-field corrections with influence radius
/// `R = 2 * collision_radius`: `gain * (1/d - 1/R) / d^2` along the pair axis,
/// summed per UAV and capped at `max_step_size`.
pub fn potential_field_repulsion(
    positions: &[Vec2],
    collision_radius: f64,
    gain: f64,
    max_step_size: f64,
) -> Vec<Vec2> {
    let influence = 2.0 * collision_radius;
    let n = positions.len();
    let mut out = vec![Vec2::ZERO; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (axis, d) = separation_axis(positions[i], positions[j], i, j);
            if d >= influence {
                continue;
            }
            let magnitude = if d < COINCIDENT {
                (gain * (1.0 / COINCIDENT - 1.0 / influence)).min(max_step_size)
            } else {
                gain * (1.0 / d - 1.0 / influence) / (d * d)
            };
            out[i] += axis * magnitude;
        }
    }
    out.into_iter()
        .map(|c| clamp_step(c, max_step_size))
        .collect()
}

/// When no uncovered hotspot lies within `threshold_radius`, a full-length
/// step toward the nearest uncovered one.
pub fn escape_no_hotspot_zone(
    position: Vec2,
    hotspots: &[Hotspot],
    threshold_radius: f64,
    max_step_size: f64,
) -> Option<Vec2> {
    let nearest = hotspots
        .iter()
        .filter(|h| !h.covered)
        .map(|h| (h.position.distance(position), h.position))
        .min_by(|a, b| a.0.total_cmp(&b.0))?;
    if nearest.0 <= threshold_radius {
        return None;
    }
    (nearest.1 - position)
        .normalized()
        .map(|u| u * max_step_size)
}

/// Pulls `to` back toward `from` until the realized distance is within `cap`.
/// Only ever moves by a few ulps: it absorbs rounding in `from + d`.
fn within_reach(from: Vec2, to: Vec2, cap: f64, grid: GridConfig) -> Vec2 {
    let mut p = to;
    let mut shrink = 1.0;
    while p.distance(from) > cap {
        shrink *= 1.0 - 2.0 * f64::EPSILON;
        p = clamp_boundary(from + (to - from) * shrink, grid);
    }
    p
}

/// Positions after one full pipeline pass plus diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutcome {
    pub positions: Vec<Vec2>,
    /// Per UAV: did separation, the potential field or a hold alter this step?
    pub corrected: Vec<bool>,
    pub report: ConstraintReport,
}

/// Turns proposals into realized positions.
///
/// Every output lies inside the grid. Each UAV moves at most
/// `max_step_size` when uncorrected and at most `2 * max_step_size`
/// otherwise. If `previous` was collision-free (all pairs at least
/// `collision_radius` apart) so is the output: UAVs still in violation
/// after the field are held at their previous positions.
pub fn apply_pipeline(
    previous: &[Vec2],
    proposals: &[ProposedMove],
    hotspots: &[Hotspot],
    params: &ConstraintParams,
    algorithm: Algorithm,
    grid: GridConfig,
) -> PipelineOutcome {
    let n = previous.len();
    let max_step = params.max_step_size;
    let escape = params.zone_escape.applies_to(algorithm);
    let mut report = ConstraintReport::default();

    let mut stepped = previous.to_vec();
    for mv in proposals {
        let i = mv.uav_index;
        let from = previous[i];
        let raw = mv.displacement_from(from);
        let mut d = clamp_step(raw, max_step);
        if d != raw {
            report.clamped_steps += 1;
        }
        if escape && mv.phase != Phase::Scout {
            if let Some(e) =
                escape_no_hotspot_zone(from, hotspots, params.no_hotspot_threshold_radius, max_step)
            {
                d = e;
                report.zone_escapes += 1;
            }
        }
        let target = from + d;
        let clamped = clamp_boundary(target, grid);
        if clamped != target {
            report.boundary_hits += 1;
        }
        stepped[i] = clamped;
    }

    let mut adjusted = stepped.clone();
    safe_zone_separation(&mut adjusted, params.safe_zone_radius);
    let field = potential_field_repulsion(
        &adjusted,
        params.collision_radius,
        params.potential_field_gain,
        max_step,
    );
    for (p, c) in adjusted.iter_mut().zip(&field) {
        *p = clamp_boundary(*p + *c, grid);
    }

    let mut corrected = vec![false; n];
    for i in 0..n {
        let correction = adjusted[i] - stepped[i];
        if correction != Vec2::ZERO {
            corrected[i] = true;
            if correction.norm() > max_step {
                adjusted[i] = clamp_boundary(stepped[i] + clamp_step(correction, max_step), grid);
            }
        }
        let cap = if corrected[i] {
            2.0 * max_step
        } else {
            max_step
        };
        adjusted[i] = within_reach(previous[i], adjusted[i], cap, grid);
    }

    // Hold offenders in place until no pair is closer than the collision radius.
    let mut held = vec![false; n];
    loop {
        let mut newly_held = false;
        for i in 0..n {
            for j in i + 1..n {
                if adjusted[i].distance(adjusted[j]) < params.collision_radius {
                    for k in [i, j] {
                        if !held[k] {
                            held[k] = true;
                            adjusted[k] = previous[k];
                            newly_held = true;
                        }
                    }
                }
            }
        }
        if !newly_held {
            break;
        }
    }
    for i in 0..n {
        if held[i] {
            corrected[i] = true;
        }
    }
    report.collision_interventions = corrected.iter().filter(|c| **c).count() as u64;
    debug_assert!(
        min_pairwise_distance(previous) < params.collision_radius
            || min_pairwise_distance(&adjusted) >= params.collision_radius
    );

    PipelineOutcome {
        positions: adjusted,
        corrected,
        report,
    }
}
