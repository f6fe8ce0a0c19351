use crate::env::Hotspot;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Weight of the dense distance term added to the coverage indicator.
pub const SHAPING_EPSILON: f64 = 0.01;

/// Coverage fitness of a position; larger is better.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Fitness(pub f64);

impl Fitness {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Weighted count of uncovered hotspots within `r_cov` of `position`, plus
/// `SHAPING_EPSILON * w_k / (1 + d_k)` over uncovered hotspots when `shaping`.
pub fn fitness(position: Vec2, hotspots: &[Hotspot], r_cov: f64, shaping: bool) -> Fitness {
    let mut indicator = 0.0;
    let mut dense = 0.0;
    for h in hotspots.iter().filter(|h| !h.covered) {
        let d = position.distance(h.position);
        if d <= r_cov {
            indicator += h.weight;
        }
        if shaping {
            dense += h.weight / (1.0 + d);
        }
    }
    Fitness(indicator + SHAPING_EPSILON * dense)
}

/// Share of total fitness held by each entry. All-zero input yields the
/// uniform distribution.
pub fn nectar_probabilities(fitnesses: &[f64]) -> Result<Vec<f64>> {
    if fitnesses.is_empty() {
        return Err(Error::validation(
            "nectar probabilities need at least one fitness",
        ));
    }
    if let Some(bad) = fitnesses.iter().find(|f| !f.is_finite() || **f < 0.0) {
        return Err(Error::validation(format!(
            "fitness values must be finite and nonnegative, got {bad}"
        )));
    }
    let total: f64 = fitnesses.iter().sum();
    let n = fitnesses.len() as f64;
    if total == 0.0 {
        return Ok(vec![1.0 / n; fitnesses.len()]);
    }
    Ok(fitnesses.iter().map(|f| f / total).collect())
}
