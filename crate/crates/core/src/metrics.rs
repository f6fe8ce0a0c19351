//! Per-run accounting: coverage time, visit heatmaps, weighted coverage and
//! optional trajectory logs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintReport;
use crate::env::{GridConfig, Hotspot, SwarmState};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Visit counts per unit cell. Cell `(cx, cy)` covers `[cx, cx+1) x [cy, cy+1)`;
/// points on the far edge fall into the last cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heatmap {
    pub width: u32,
    pub height: u32,
    /// Row-major, `y * width + x`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Heatmap {
    pub fn new(grid: GridConfig) -> Self {
        Heatmap {
            width: grid.width,
            height: grid.height,
            counts: vec![0; grid.cells()],
            total: 0,
        }
    }

    pub fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let bin = |v: f64, n: u32| (v.floor().max(0.0) as usize).min(n as usize - 1);
        (bin(p.x, self.width), bin(p.y, self.height))
    }

    pub fn get(&self, cx: usize, cy: usize) -> u64 {
        self.counts[cy * self.width as usize + cx]
    }

    pub fn record(&mut self, p: Vec2) {
        let (cx, cy) = self.cell_of(p);
        self.counts[cy * self.width as usize + cx] += 1;
        self.total += 1;
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// Cell-wise sum. Associative and commutative.
    pub fn merge(&mut self, other: &Heatmap) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::validation(format!(
                "cannot merge {}x{} heatmap into {}x{}",
                other.width, other.height, self.width, self.height
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    /// Plain-text graymap (P2), counts scaled to 0..=255 by the maximum cell.
    /// The first image row is the top of the grid (largest y).
    pub fn to_pgm(&self) -> String {
        let max = self.max();
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for cy in (0..self.height as usize).rev() {
            let row: Vec<String> = (0..self.width as usize)
                .map(|cx| {
                    let c = self.get(cx, cy);
                    let v = (c * 255 + max / 2).checked_div(max).unwrap_or(0);
                    v.to_string()
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Raw counts, one line per grid row starting at `y = 0`, comma separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for cy in 0..self.height as usize {
            for cx in 0..self.width as usize {
                if cx > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.get(cx, cy));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut counts = Vec::new();
        let mut width = None;
        let mut height = 0u32;
        for (line_no, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let row: Vec<u64> = line
                .split(',')
                .map(|c| c.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::validation(format!("heatmap line {}: {e}", line_no + 1)))?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::validation(format!(
                        "heatmap line {} has {} cells, expected {w}",
                        line_no + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            counts.extend(row);
            height += 1;
        }
        let width = width.ok_or_else(|| Error::validation("empty heatmap"))? as u32;
        let total = counts.iter().sum();
        Ok(Heatmap {
            width,
            height,
            counts,
            total,
        })
    }
}

/// Pearson correlation between cell visit counts and a Gaussian-kernel
/// hotspot density (`sum_k w_k exp(-d^2 / 2 s^2)` at cell centres). A
/// heuristic for "effort follows the hotspot layout"; 0 for constant inputs.
pub fn hotspot_alignment(heatmap: &Heatmap, hotspots: &[Hotspot], bandwidth: f64) -> f64 {
    let w = heatmap.width as usize;
    let h = heatmap.height as usize;
    let two_s2 = 2.0 * bandwidth * bandwidth;
    let mut xs = Vec::with_capacity(w * h);
    let mut ys = Vec::with_capacity(w * h);
    for cy in 0..h {
        for cx in 0..w {
            let centre = Vec2::new(cx as f64 + 0.5, cy as f64 + 0.5);
            let density: f64 = hotspots
                .iter()
                .map(|k| k.weight * (-centre.distance(k.position).powi(2) / two_s2).exp())
                .sum();
            xs.push(heatmap.get(cx, cy) as f64);
            ys.push(density);
        }
    }
    pearson(&xs, &ys)
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Weighted coverage: the sum of `w_k` over covered hotspots.
pub fn biodiversity_metric(hotspots: &[Hotspot]) -> f64 {
    hotspots
        .iter()
        .filter(|h| h.covered)
        .map(|h| h.weight)
        .sum()
}

/// Per-step positions and correction flags for every UAV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectories {
    pub positions: Vec<Vec<Vec2>>,
    pub corrected: Vec<Vec<bool>>,
}

impl Trajectories {
    /// `step,uav,x,y,corrected` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,uav,x,y,corrected\n");
        for (step, (ps, cs)) in self.positions.iter().zip(&self.corrected).enumerate() {
            for (i, (p, c)) in ps.iter().zip(cs).enumerate() {
                let _ = writeln!(out, "{step},{i},{:?},{:?},{c}", p.x, p.y);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub n_uavs: usize,
    pub n_hotspots: usize,
    pub dt: f64,
    /// Step at which every hotspot was covered, if it happened.
    pub steps_to_cover: Option<u64>,
    pub biodiversity_b: f64,
    pub heatmap: Heatmap,
    /// `(step, covered_count)` at step 0 and at every change.
    pub coverage_curve: Vec<(u64, usize)>,
    pub trajectories: Option<Trajectories>,
    pub constraint_report: ConstraintReport,
    /// Number of recorded swarm snapshots, the initial one included.
    pub recorded_steps: u64,
    pub min_pairwise_distance: f64,
    /// Largest single-step UAV displacement overall, and among uncorrected moves.
    pub max_displacement: f64,
    pub max_uncorrected_displacement: f64,
    /// Final covered flag per hotspot, in scenario order.
    pub hotspot_covered: Vec<bool>,
}

impl RunMetrics {
    pub fn new(
        grid: GridConfig,
        n_uavs: usize,
        n_hotspots: usize,
        dt: f64,
        trajectories: bool,
    ) -> Self {
        RunMetrics {
            n_uavs,
            n_hotspots,
            dt,
            steps_to_cover: None,
            biodiversity_b: 0.0,
            heatmap: Heatmap::new(grid),
            coverage_curve: Vec::new(),
            trajectories: trajectories.then(Trajectories::default),
            constraint_report: ConstraintReport::default(),
            recorded_steps: 0,
            min_pairwise_distance: f64::INFINITY,
            max_displacement: 0.0,
            max_uncorrected_displacement: 0.0,
            hotspot_covered: Vec::new(),
        }
    }

    pub fn time_to_cover(&self) -> Option<f64> {
        self.steps_to_cover.map(|s| s as f64 * self.dt)
    }

    pub fn covered(&self) -> bool {
        self.steps_to_cover.is_some()
    }

    /// Logs one swarm snapshot. `corrected` flags UAVs whose move this step
    /// was altered by a collision correction (empty for the initial snapshot).
    pub fn record_step(&mut self, swarm: &SwarmState, corrected: &[bool]) {
        for uav in &swarm.uavs {
            self.heatmap.record(uav.position);
        }
        let count = swarm.covered_count;
        if self.coverage_curve.last().is_none_or(|&(_, c)| c != count) {
            self.coverage_curve.push((swarm.step, count));
        }
        if self.steps_to_cover.is_none() && count == self.n_hotspots {
            self.steps_to_cover = Some(swarm.step);
        }
        self.min_pairwise_distance = self
            .min_pairwise_distance
            .min(swarm.min_pairwise_distance());
        if let Some(t) = self.trajectories.as_mut() {
            t.positions.push(swarm.positions());
            let flags = if corrected.is_empty() {
                vec![false; swarm.len()]
            } else {
                corrected.to_vec()
            };
            t.corrected.push(flags);
        }
        self.recorded_steps += 1;
    }

    pub fn note_displacement(&mut self, distance: f64, corrected: bool) {
        self.max_displacement = self.max_displacement.max(distance);
        if !corrected {
            self.max_uncorrected_displacement = self.max_uncorrected_displacement.max(distance);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_points_bin_into_last_cell() {
        let h = Heatmap::new(GridConfig::default());
        assert_eq!(h.cell_of(Vec2::new(99.999_999, 100.0)), (99, 99));
        assert_eq!(h.cell_of(Vec2::new(0.0, 0.0)), (0, 0));
        assert_eq!(h.cell_of(Vec2::new(12.5, 3.99)), (12, 3));
    }

    #[test]
    fn one_step_five_uavs() {
        let swarm = SwarmState::from_positions((0..5).map(|i| Vec2::new(i as f64 * 10.0, 5.0)));
        let mut m = RunMetrics::new(GridConfig::default(), 5, 3, 0.5, false);
        m.record_step(&swarm, &[]);
        assert_eq!(m.heatmap.total, 5);
        assert_eq!(m.heatmap.counts.iter().sum::<u64>(), 5);
        assert_eq!(m.recorded_steps, 1);
    }

    #[test]
    fn time_to_cover_from_steps() {
        let mut swarm = SwarmState::from_positions([Vec2::new(1.0, 1.0)]);
        let mut m = RunMetrics::new(GridConfig::default(), 1, 20, 0.5, false);
        m.record_step(&swarm, &[]);
        swarm.step = 455;
        swarm.covered_count = 20;
        m.record_step(&swarm, &[false]);
        assert_eq!(m.steps_to_cover, Some(455));
        assert_eq!(m.time_to_cover(), Some(227.5));
        assert_eq!(m.coverage_curve, vec![(0, 0), (455, 20)]);
    }

    #[test]
    fn biodiversity_cases() {
        let mut hs = vec![Hotspot::new(1.0, 1.0), Hotspot::new(2.0, 2.0)];
        assert_eq!(biodiversity_metric(&hs), 0.0);
        hs[0].weight = 2.0;
        hs[1].weight = 3.0;
        hs[0].covered = true;
        assert_eq!(biodiversity_metric(&hs), 2.0);
        let all: Vec<Hotspot> = (0..20)
            .map(|i| Hotspot {
                covered: true,
                ..Hotspot::new(i as f64, 0.0)
            })
            .collect();
        assert_eq!(biodiversity_metric(&all), 20.0);
    }

    #[test]
    fn heatmap_csv_round_trip_and_pgm_header() {
        let mut h = Heatmap::new(GridConfig::new(3, 2));
        h.record(Vec2::new(0.5, 0.5));
        h.record(Vec2::new(2.5, 1.5));
        h.record(Vec2::new(2.5, 1.5));
        assert_eq!(Heatmap::from_csv(&h.to_csv()).unwrap(), h);
        let pgm = h.to_pgm();
        assert!(pgm.starts_with("P2\n3 2\n255\n"));
        assert_eq!(pgm.lines().nth(3).unwrap(), "0 0 255");
        assert_eq!(pgm.lines().nth(4).unwrap(), "128 0 0");
    }

    #[test]
    fn merge_checks_shape() {
        let mut a = Heatmap::new(GridConfig::new(3, 2));
        let b = Heatmap::new(GridConfig::new(2, 3));
        assert!(a.merge(&b).is_err());
    }

    #[test]
    fn alignment_prefers_matching_heatmap() {
        let hs = [Hotspot::new(2.5, 2.5)];
        let mut on = Heatmap::new(GridConfig::new(10, 10));
        let mut off = Heatmap::new(GridConfig::new(10, 10));
        for _ in 0..10 {
            on.record(Vec2::new(2.5, 2.5));
            off.record(Vec2::new(8.5, 8.5));
        }
        assert!(hotspot_alignment(&on, &hs, 2.0) > hotspot_alignment(&off, &hs, 2.0));
    }
}
