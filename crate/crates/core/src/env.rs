//! Grid world, hotspots, swarm state and scenario configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::optimizers::fitness::{self, SHAPING_EPSILON};
use crate::rng::{RandomSource, RandomStream, SCENARIO_STREAM};

/// Cell extent of the world. Agents move in the continuous box
/// `[0, width] x [0, height]`; cells only matter for heatmap binning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub width: u32,
    pub height: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            width: 100,
            height: 100,
        }
    }
}

impl GridConfig {
    pub fn new(width: u32, height: u32) -> Self {
        GridConfig { width, height }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation(format!(
                "grid must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn max_x(&self) -> f64 {
        f64::from(self.width)
    }

    pub fn max_y(&self) -> f64 {
        f64::from(self.height)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        (0.0..=self.max_x()).contains(&p.x) && (0.0..=self.max_y()).contains(&p.y)
    }

    pub fn cells(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hotspot {
    pub position: Vec2,
    /// Importance weight `w_k`.
    pub weight: f64,
    pub covered: bool,
}

impl Hotspot {
    pub fn new(x: f64, y: f64) -> Self {
        Hotspot {
            position: Vec2::new(x, y),
            weight: 1.0,
            covered: false,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// A remembered position together with the fitness observed there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Best {
    pub position: Vec2,
    pub fitness: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UavState {
    pub position: Vec2,
    /// Fitness at `position` against the hotspots still uncovered.
    pub fitness: f64,
    /// Steps since the last strict fitness improvement.
    pub stagnation: u32,
    /// PSO only.
    pub velocity: Vec2,
    /// PSO only.
    pub personal_best: Option<Best>,
    /// Pending scout relocation; the UAV flies here before rejoining its optimizer.
    pub scout_target: Option<Vec2>,
}

impl UavState {
    pub fn at(position: Vec2) -> Self {
        UavState {
            position,
            fitness: 0.0,
            stagnation: 0,
            velocity: Vec2::ZERO,
            personal_best: None,
            scout_target: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwarmState {
    pub uavs: Vec<UavState>,
    /// Best fitness ever observed in the run and where.
    pub global_best: Option<Best>,
    pub step: u64,
    pub covered_count: usize,
}

impl SwarmState {
    pub fn from_positions(positions: impl IntoIterator<Item = Vec2>) -> Self {
        SwarmState {
            uavs: positions.into_iter().map(UavState::at).collect(),
            global_best: None,
            step: 0,
            covered_count: 0,
        }
    }

    /// Deploys the swarm around `config.start_position`: a row centred on the
    /// start point with `safe_zone_radius` spacing, wrapping into further rows
    /// when the row would leave the grid.
    pub fn deploy(config: &ScenarioConfig) -> Self {
        let spacing = config.constraints.safe_zone_radius;
        let n = config.n_uavs;
        let per_row = ((config.grid.max_x() / spacing).floor() as usize + 1).max(1);
        let rows = n.div_ceil(per_row);
        // Extra rows stack upward unless that would leave the grid.
        let row_dir = if config.start_position.y + (rows.saturating_sub(1)) as f64 * spacing
            <= config.grid.max_y()
        {
            1.0
        } else {
            -1.0
        };
        let positions = (0..n).map(|i| {
            let row = i / per_row;
            let in_row = (n - row * per_row).min(per_row);
            let col = i % per_row;
            let offset = (col as f64 - (in_row as f64 - 1.0) / 2.0) * spacing;
            let mut p = config.start_position + Vec2::new(offset, row_dir * row as f64 * spacing);
            // Shift rows that spill over a side edge back inside without overlap.
            let lo = config.start_position.x - (in_row as f64 - 1.0) / 2.0 * spacing;
            let hi = lo + (in_row as f64 - 1.0) * spacing;
            if lo < 0.0 {
                p.x -= lo;
            } else if hi > config.grid.max_x() {
                p.x -= hi - config.grid.max_x();
            }
            Vec2::new(
                p.x.clamp(0.0, config.grid.max_x()),
                p.y.clamp(0.0, config.grid.max_y()),
            )
        });
        SwarmState::from_positions(positions)
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.uavs.iter().map(|u| u.position).collect()
    }

    pub fn len(&self) -> usize {
        self.uavs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uavs.is_empty()
    }

    /// Folds the current UAV fitness values into the global best.
    pub fn observe_best(&mut self) {
        for uav in &self.uavs {
            let better = self
                .global_best
                .is_none_or(|best| uav.fitness > best.fitness);
            if better {
                self.global_best = Some(Best {
                    position: uav.position,
                    fitness: uav.fitness,
                });
            }
        }
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        min_pairwise_distance(&self.positions())
    }
}

pub fn min_pairwise_distance(positions: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            best = best.min(a.distance(*b));
        }
    }
    best
}

/// Marks every uncovered hotspot within `coverage_radius` of some UAV as
/// covered and returns the indices covered by this call.
pub fn mark_coverage(
    swarm: &mut SwarmState,
    hotspots: &mut [Hotspot],
    coverage_radius: f64,
) -> Vec<usize> {
    let mut newly = Vec::new();
    for (k, h) in hotspots.iter_mut().enumerate() {
        if h.covered {
            continue;
        }
        if swarm
            .uavs
            .iter()
            .any(|u| u.position.distance(h.position) <= coverage_radius)
        {
            h.covered = true;
            newly.push(k);
        }
    }
    swarm.covered_count = hotspots.iter().filter(|h| h.covered).count();
    newly
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Abc,
    Pso,
    #[serde(alias = "hybrid")]
    HybridAbcLevy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Abc, Algorithm::Pso, Algorithm::HybridAbcLevy];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Abc => "abc",
            Algorithm::Pso => "pso",
            Algorithm::HybridAbcLevy => "hybrid",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "abc" => Ok(Algorithm::Abc),
            "pso" => Ok(Algorithm::Pso),
            "hybrid" | "hybrid_abc_levy" | "hybridabclevy" => Ok(Algorithm::HybridAbcLevy),
            other => Err(Error::validation(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Direction of the high-fitness balancing nudge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExploitSign {
    /// Along `x_i - x_j`, away from the higher-fitness neighbour.
    #[default]
    Repel,
    /// Along `x_j - x_i`.
    Attract,
}

impl ExploitSign {
    pub fn factor(self) -> f64 {
        match self {
            ExploitSign::Repel => 1.0,
            ExploitSign::Attract => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlgorithmParams {
    /// Multiplier on every Levy step.
    pub levy_weight: f64,
    /// Stability index of the Levy kernel, in `(0, 2]`.
    pub levy_beta: f64,
    /// Apply the Mantegna `sigma_u` scale; off gives the bare `u / |v|^(1/beta)` kernel.
    pub mantegna_normalized: bool,
    /// Pull of below-median UAVs toward the global best.
    pub explore_coeff: f64,
    /// Push of above-median UAVs relative to their nearest better neighbour.
    pub exploit_coeff: f64,
    pub exploit_sign: ExploitSign,
    /// Onlooker selection by the sigmoid of `f(x_i) - f(g)` instead of nectar share.
    pub adaptive_lambda: bool,
    pub sigma_sensitivity: f64,
    pub pso: PsoParams,
    /// Stagnant steps before a scout relocation.
    pub stagnation_limit: u32,
    /// ABC partner pool: the `k` nearest other UAVs, or all of them when 0.
    pub abc_limit_neighbors: usize,
    /// Adds the `eps / (1 + d)` tie-breaking term to the coverage fitness.
    pub shaping: bool,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        AlgorithmParams {
            levy_weight: 3.0,
            levy_beta: 1.5,
            mantegna_normalized: true,
            explore_coeff: 0.1,
            exploit_coeff: 0.1,
            exploit_sign: ExploitSign::Repel,
            adaptive_lambda: false,
            sigma_sensitivity: 1.0,
            pso: PsoParams::default(),
            stagnation_limit: 25,
            abc_limit_neighbors: 0,
            shaping: true,
        }
    }
}

/// Which algorithms get the no-hotspot-zone escape rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneEscape {
    #[default]
    HybridOnly,
    All,
    Off,
}

impl ZoneEscape {
    pub fn applies_to(self, algorithm: Algorithm) -> bool {
        match self {
            ZoneEscape::HybridOnly => algorithm == Algorithm::HybridAbcLevy,
            ZoneEscape::All => true,
            ZoneEscape::Off => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintParams {
    pub max_step_size: f64,
    pub safe_zone_radius: f64,
    pub coverage_radius: f64,
    pub collision_radius: f64,
    pub potential_field_gain: f64,
    pub no_hotspot_threshold_radius: f64,
    pub zone_escape: ZoneEscape,
}

impl Default for ConstraintParams {
    fn default() -> Self {
        ConstraintParams {
            max_step_size: 5.0,
            safe_zone_radius: 2.0,
            coverage_radius: 3.0,
            collision_radius: 1.0,
            potential_field_gain: 1.0,
            no_hotspot_threshold_radius: 15.0,
            zone_escape: ZoneEscape::HybridOnly,
        }
    }
}

impl ConstraintParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("max_step_size", self.max_step_size),
            ("coverage_radius", self.coverage_radius),
            ("collision_radius", self.collision_radius),
            ("potential_field_gain", self.potential_field_gain),
            (
                "no_hotspot_threshold_radius",
                self.no_hotspot_threshold_radius,
            ),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::validation(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.collision_radius <= self.safe_zone_radius && self.safe_zone_radius.is_finite()) {
            return Err(Error::validation(format!(
                "collision_radius ({}) must not exceed safe_zone_radius ({})",
                self.collision_radius, self.safe_zone_radius
            )));
        }
        Ok(())
    }
}

/// Placement of the far cluster and near band for [`ScenarioKind::TwoCluster`],
/// as fractions of the grid extent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoClusterGeometry {
    pub near_band_fraction: f64,
    pub far_center: [f64; 2],
    pub far_radius_fraction: f64,
}

impl Default for TwoClusterGeometry {
    fn default() -> Self {
        TwoClusterGeometry {
            near_band_fraction: 0.3,
            far_center: [0.5, 0.9],
            far_radius_fraction: 0.1,
        }
    }
}

impl TwoClusterGeometry {
    pub fn near_band_limit(&self, grid: GridConfig) -> f64 {
        self.near_band_fraction * grid.max_y()
    }

    pub fn far_center(&self, grid: GridConfig) -> Vec2 {
        Vec2::new(
            self.far_center[0] * grid.max_x(),
            self.far_center[1] * grid.max_y(),
        )
    }

    pub fn far_radius(&self, grid: GridConfig) -> f64 {
        self.far_radius_fraction * grid.max_x().min(grid.max_y())
    }
}

/// How a scenario's hotspots were obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Layout {
    UniformRandom {
        n_hotspots: usize,
    },
    TwoCluster {
        n_hotspots: usize,
        #[serde(default)]
        geometry: TwoClusterGeometry,
    },
    /// Hotspots supplied verbatim; never regenerated.
    Custom,
}

/// Hotspot generator selector for [`make_scenario`].
#[derive(Clone, Debug, PartialEq)]
pub enum ScenarioKind {
    UniformRandom,
    TwoCluster,
    Custom(Vec<Hotspot>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Scenario id written to every metrics row.
    pub name: String,
    pub grid: GridConfig,
    pub layout: Layout,
    pub hotspots: Vec<Hotspot>,
    pub n_uavs: usize,
    pub start_position: Vec2,
    pub algorithm: Algorithm,
    pub params: AlgorithmParams,
    pub constraints: ConstraintParams,
    pub seed: u64,
    pub max_steps: u64,
    /// Seconds represented by one step; reporting only.
    pub dt: f64,
    pub record_trajectories: bool,
}

pub const DEFAULT_MAX_STEPS: u64 = 5000;
pub const DEFAULT_DT: f64 = 0.5;
pub const DEFAULT_N_UAVS: usize = 5;

fn generate_hotspots(layout: &Layout, seed: u64, grid: GridConfig) -> Result<Vec<Hotspot>> {
    let mut src = RandomSource::new(seed, SCENARIO_STREAM);
    let w = grid.max_x();
    let h = grid.max_y();
    // Open interval (0, max): redraw the (measure-zero) boundary hits.
    let interior = |src: &mut RandomSource, hi: f64| loop {
        let v = src.uniform(0.0, hi);
        if v > 0.0 && v < hi {
            break v;
        }
    };
    match *layout {
        Layout::UniformRandom { n_hotspots } => {
            check_count(n_hotspots)?;
            Ok((0..n_hotspots)
                .map(|_| {
                    let x = interior(&mut src, w);
                    let y = interior(&mut src, h);
                    Hotspot::new(x, y)
                })
                .collect())
        }
        Layout::TwoCluster {
            n_hotspots,
            geometry,
        } => {
            check_count(n_hotspots)?;
            let band = geometry.near_band_limit(grid);
            let center = geometry.far_center(grid);
            let radius = geometry.far_radius(grid);
            if !(band > 0.0 && band <= h) {
                return Err(Error::validation(
                    "two-cluster near band must lie inside the grid",
                ));
            }
            if !(center.x - radius >= 0.0
                && center.x + radius <= w
                && center.y - radius > band
                && center.y + radius <= h)
            {
                return Err(Error::validation(
                    "two-cluster far disc must lie inside the grid and above the near band",
                ));
            }
            let near = n_hotspots.div_ceil(2);
            let mut out = Vec::with_capacity(n_hotspots);
            for _ in 0..near {
                let x = interior(&mut src, w);
                let y = interior(&mut src, band);
                out.push(Hotspot::new(x, y));
            }
            for _ in near..n_hotspots {
                let r = radius * src.next_unit().sqrt();
                let theta = 2.0 * std::f64::consts::PI * src.next_unit();
                out.push(Hotspot::new(
                    center.x + r * theta.cos(),
                    center.y + r * theta.sin(),
                ));
            }
            Ok(out)
        }
        Layout::Custom => Err(Error::validation(
            "custom layouts carry their own hotspots and cannot be generated",
        )),
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::validation("n_hotspots must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_hotspots(hotspots: &[Hotspot], grid: GridConfig) -> Result<()> {
    if hotspots.is_empty() {
        return Err(Error::validation("scenario needs at least one hotspot"));
    }
    for (i, h) in hotspots.iter().enumerate() {
        if !h.position.is_finite() || !grid.contains(h.position) {
            return Err(Error::validation(format!(
                "hotspot {i} at ({}, {}) lies outside the {}x{} grid",
                h.position.x, h.position.y, grid.width, grid.height
            )));
        }
        if !(h.weight > 0.0 && h.weight.is_finite()) {
            return Err(Error::validation(format!(
                "hotspot {i} has non-positive weight {}",
                h.weight
            )));
        }
    }
    Ok(())
}

/// Builds a scenario with default swarm, algorithm and constraint settings.
pub fn make_scenario(
    kind: ScenarioKind,
    n_hotspots: usize,
    seed: u64,
    grid: GridConfig,
) -> Result<ScenarioConfig> {
    grid.validate()?;
    let (layout, hotspots, name) = match kind {
        ScenarioKind::UniformRandom => {
            let layout = Layout::UniformRandom { n_hotspots };
            let hs = generate_hotspots(&layout, seed, grid)?;
            (layout, hs, format!("uniform{n_hotspots}"))
        }
        ScenarioKind::TwoCluster => {
            let layout = Layout::TwoCluster {
                n_hotspots,
                geometry: TwoClusterGeometry::default(),
            };
            let hs = generate_hotspots(&layout, seed, grid)?;
            (layout, hs, format!("twocluster{n_hotspots}"))
        }
        ScenarioKind::Custom(hs) => {
            check_hotspots(&hs, grid)?;
            let hs = hs
                .into_iter()
                .map(|h| Hotspot {
                    covered: false,
                    ..h
                })
                .collect::<Vec<_>>();
            let name = format!("custom{}", hs.len());
            (Layout::Custom, hs, name)
        }
    };
    Ok(ScenarioConfig {
        name,
        grid,
        layout,
        hotspots,
        n_uavs: DEFAULT_N_UAVS,
        start_position: Vec2::new(grid.max_x() / 2.0, 0.0),
        algorithm: Algorithm::HybridAbcLevy,
        params: AlgorithmParams::default(),
        constraints: ConstraintParams::default(),
        seed,
        max_steps: DEFAULT_MAX_STEPS,
        dt: DEFAULT_DT,
        record_trajectories: false,
    })
}

impl ScenarioConfig {
    /// Named presets: `uniform20` and `twocluster20` on the 100x100 grid.
    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        let grid = GridConfig::default();
        match name {
            "uniform20" => make_scenario(ScenarioKind::UniformRandom, 20, seed, grid),
            "twocluster20" => make_scenario(ScenarioKind::TwoCluster, 20, seed, grid),
            other => Err(Error::validation(format!(
                "unknown preset `{other}` (expected uniform20 or twocluster20)"
            ))),
        }
    }

    /// Same scenario under another seed. Generated layouts are redrawn from
    /// the new seed; custom hotspots are kept.
    pub fn reseeded(&self, seed: u64) -> Result<Self> {
        let mut out = self.clone();
        out.seed = seed;
        if out.layout != Layout::Custom {
            out.hotspots = generate_hotspots(&out.layout, seed, out.grid)?;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        check_hotspots(&self.hotspots, self.grid)?;
        if self.n_uavs == 0 {
            return Err(Error::validation("n_uavs must be at least 1"));
        }
        if !self.start_position.is_finite() || !self.grid.contains(self.start_position) {
            return Err(Error::validation(format!(
                "start position ({}, {}) lies outside the grid",
                self.start_position.x, self.start_position.y
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::validation("max_steps must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        self.constraints.validate()?;
        validate_params(&self.params, &self.hotspots)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ScenarioFile::from_json(&text)?.into_config()
    }
}

fn validate_params(p: &AlgorithmParams, hotspots: &[Hotspot]) -> Result<()> {
    if !(p.levy_weight > 0.0 && p.levy_weight.is_finite()) {
        return Err(Error::validation(format!(
            "levy_weight must be positive, got {}",
            p.levy_weight
        )));
    }
    if !(p.levy_beta > 0.0 && p.levy_beta <= 2.0) {
        return Err(Error::validation(format!(
            "levy_beta must lie in (0, 2], got {}",
            p.levy_beta
        )));
    }
    if p.stagnation_limit == 0 {
        return Err(Error::validation("stagnation_limit must be at least 1"));
    }
    if !(p.sigma_sensitivity > 0.0 && p.sigma_sensitivity.is_finite()) {
        return Err(Error::validation("sigma_sensitivity must be positive"));
    }
    let coeffs = [
        p.explore_coeff,
        p.exploit_coeff,
        p.pso.inertia,
        p.pso.cognitive,
        p.pso.social,
    ];
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::validation("algorithm coefficients must be finite"));
    }
    if p.shaping {
        let total: f64 = hotspots.iter().map(|h| h.weight).sum();
        let min_w = hotspots
            .iter()
            .map(|h| h.weight)
            .fold(f64::INFINITY, f64::min);
        if SHAPING_EPSILON * total >= min_w {
            return Err(Error::validation(format!(
                "shaping term {SHAPING_EPSILON} x total weight {total} must stay below the \
                 smallest hotspot weight {min_w}; disable shaping or rebalance weights"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HotspotSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// On-disk scenario. Everything is optional except a hotspot source: either
/// an explicit `hotspots` list or a generator `kind` with `n_hotspots`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hotspots: Option<Vec<HotspotSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_hotspots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_cluster: Option<TwoClusterGeometry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_uavs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<AlgorithmParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<bool>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves defaults and validates.
    pub fn into_config(self) -> Result<ScenarioConfig> {
        let grid = self.grid.unwrap_or_default();
        let seed = self.seed.unwrap_or(0);
        let mut config = match (self.hotspots, self.kind.as_deref()) {
            (Some(list), None) | (Some(list), Some("custom")) => {
                let hs = list
                    .iter()
                    .map(|s| Hotspot::new(s.x, s.y).with_weight(s.weight.unwrap_or(1.0)))
                    .collect();
                make_scenario(ScenarioKind::Custom(hs), 0, seed, grid)?
            }
            (Some(_), Some(kind)) => {
                return Err(Error::validation(format!(
                    "scenario gives both a hotspot list and generator kind `{kind}`"
                )))
            }
            (None, Some(kind)) => {
                let n = self.n_hotspots.ok_or_else(|| {
                    Error::validation(format!("generator kind `{kind}` needs n_hotspots"))
                })?;
                let kind = match kind {
                    "uniform_random" | "uniform" => ScenarioKind::UniformRandom,
                    "two_cluster" | "twocluster" => ScenarioKind::TwoCluster,
                    other => {
                        return Err(Error::validation(format!(
                            "unknown scenario kind `{other}`"
                        )))
                    }
                };
                let mut config = make_scenario(kind, n, seed, grid)?;
                if let (Some(g), Layout::TwoCluster { geometry, .. }) =
                    (self.two_cluster, &mut config.layout)
                {
                    *geometry = g;
                    config.hotspots = generate_hotspots(&config.layout, seed, grid)?;
                }
                config
            }
            (None, None) => {
                return Err(Error::validation(
                    "scenario needs `hotspots` or `kind` with `n_hotspots`",
                ))
            }
        };
        if let Some(name) = self.name {
            config.name = name;
        }
        if let Some(n) = self.n_uavs {
            config.n_uavs = n;
        }
        if let Some(start) = self.start {
            config.start_position = start;
        }
        if let Some(a) = self.algorithm {
            config.algorithm = a;
        }
        if let Some(p) = self.params {
            config.params = p;
        }
        if let Some(c) = self.constraints {
            config.constraints = c;
        }
        if let Some(m) = self.max_steps {
            config.max_steps = m;
        }
        if let Some(dt) = self.dt {
            config.dt = dt;
        }
        if let Some(t) = self.trajectories {
            config.record_trajectories = t;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Fitness of every UAV at its current position.
pub fn refresh_fitness(swarm: &mut SwarmState, hotspots: &[Hotspot], config: &ScenarioConfig) {
    for uav in &mut swarm.uavs {
        uav.fitness = fitness::fitness(
            uav.position,
            hotspots,
            config.constraints.coverage_radius,
            config.params.shaping,
        )
        .value();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridConfig {
        GridConfig::default()
    }

    #[test]
    fn uniform_is_deterministic_and_interior() {
        let a = make_scenario(ScenarioKind::UniformRandom, 20, 42, grid()).unwrap();
        let b = make_scenario(ScenarioKind::UniformRandom, 20, 42, grid()).unwrap();
        assert_eq!(a.hotspots.len(), 20);
        assert_eq!(a.hotspots, b.hotspots);
        for h in &a.hotspots {
            assert!(h.position.x > 0.0 && h.position.x < 100.0);
            assert!(h.position.y > 0.0 && h.position.y < 100.0);
            assert_eq!(h.weight, 1.0);
            assert!(!h.covered);
        }
        let c = make_scenario(ScenarioKind::UniformRandom, 20, 43, grid()).unwrap();
        assert_ne!(a.hotspots, c.hotspots);
    }

    #[test]
    fn two_cluster_split() {
        for seed in 0..100 {
            for n in [1usize, 7, 20] {
                let s = make_scenario(ScenarioKind::TwoCluster, n, seed, grid()).unwrap();
                let near = s.hotspots.iter().filter(|h| h.position.y <= 30.0).count();
                assert_eq!(near, n.div_ceil(2));
                let far = s
                    .hotspots
                    .iter()
                    .filter(|h| h.position.distance(Vec2::new(50.0, 90.0)) <= 10.0)
                    .count();
                assert_eq!(far, n / 2);
            }
        }
    }

    #[test]
    fn custom_passthrough() {
        let s = make_scenario(
            ScenarioKind::Custom(vec![Hotspot::new(50.0, 50.0)]),
            0,
            1,
            grid(),
        )
        .unwrap();
        assert_eq!(s.hotspots, vec![Hotspot::new(50.0, 50.0)]);
        s.validate().unwrap();
    }

    #[test]
    fn custom_outside_grid_names_index() {
        let err = make_scenario(
            ScenarioKind::Custom(vec![Hotspot::new(1.0, 1.0), Hotspot::new(120.0, 5.0)]),
            0,
            1,
            grid(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("hotspot 1"), "{err}");
    }

    #[test]
    fn zero_hotspots_rejected() {
        assert!(make_scenario(ScenarioKind::UniformRandom, 0, 1, grid()).is_err());
        assert!(make_scenario(ScenarioKind::TwoCluster, 0, 1, grid()).is_err());
    }

    fn one_uav(x: f64, y: f64) -> SwarmState {
        SwarmState::from_positions([Vec2::new(x, y)])
    }

    #[test]
    fn coverage_by_radius() {
        let mut hs = vec![Hotspot::new(10.0, 10.0)];
        let mut swarm = one_uav(12.0, 10.0);
        assert!(mark_coverage(&mut swarm, &mut hs, 1.5).is_empty());
        assert!(!hs[0].covered);
        assert_eq!(mark_coverage(&mut swarm, &mut hs, 3.0), vec![0]);
        assert!(hs[0].covered);
        assert_eq!(swarm.covered_count, 1);
    }

    #[test]
    fn covered_hotspot_stays_covered() {
        let mut hs = vec![Hotspot {
            covered: true,
            ..Hotspot::new(10.0, 10.0)
        }];
        let mut swarm = one_uav(90.0, 90.0);
        assert!(mark_coverage(&mut swarm, &mut hs, 3.0).is_empty());
        assert!(hs[0].covered);
        assert_eq!(swarm.covered_count, 1);
    }

    #[test]
    fn mark_coverage_idempotent() {
        let mut hs = vec![Hotspot::new(10.0, 10.0), Hotspot::new(50.0, 50.0)];
        let mut swarm = one_uav(11.0, 11.0);
        let first = mark_coverage(&mut swarm, &mut hs, 3.0);
        let snapshot = hs.clone();
        let second = mark_coverage(&mut swarm, &mut hs, 3.0);
        assert_eq!(first, vec![0]);
        assert!(second.is_empty());
        assert_eq!(hs, snapshot);
    }

    #[test]
    fn deploy_spreads_swarm() {
        let s = ScenarioConfig::preset("uniform20", 1).unwrap();
        let swarm = SwarmState::deploy(&s);
        assert_eq!(swarm.len(), 5);
        assert!(swarm.min_pairwise_distance() >= s.constraints.safe_zone_radius - 1e-12);
        assert_eq!(swarm.uavs[2].position, Vec2::new(50.0, 0.0));
        for u in &swarm.uavs {
            assert!(s.grid.contains(u.position));
        }
    }

    #[test]
    fn deploy_wraps_large_swarm() {
        let mut s = ScenarioConfig::preset("uniform20", 1).unwrap();
        s.grid = GridConfig::new(10, 10);
        s.start_position = Vec2::new(0.0, 0.0);
        s.hotspots = vec![Hotspot::new(5.0, 5.0)];
        s.n_uavs = 14;
        let swarm = SwarmState::deploy(&s);
        assert!(swarm.min_pairwise_distance() >= s.constraints.collision_radius);
        for u in &swarm.uavs {
            assert!(s.grid.contains(u.position));
        }
    }

    #[test]
    fn scenario_file_defaults() {
        let cfg =
            ScenarioFile::from_json(r#"{"hotspots":[{"x":10,"y":20},{"x":30,"y":40,"weight":2}]}"#)
                .unwrap()
                .into_config()
                .unwrap();
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.n_uavs, 5);
        assert_eq!(cfg.start_position, Vec2::new(50.0, 0.0));
        assert_eq!(cfg.max_steps, 5000);
        assert_eq!(cfg.dt, 0.5);
        assert_eq!(cfg.hotspots[1].weight, 2.0);
        assert_eq!(cfg.layout, Layout::Custom);
    }

    #[test]
    fn scenario_file_generator() {
        let cfg = ScenarioFile::from_json(
            r#"{"kind":"two_cluster","n_hotspots":6,"seed":9,"algorithm":"abc",
                "params":{"levy_weight":2.5},"constraints":{"max_step_size":4}}"#,
        )
        .unwrap()
        .into_config()
        .unwrap();
        assert_eq!(cfg.hotspots.len(), 6);
        assert_eq!(cfg.algorithm, Algorithm::Abc);
        assert_eq!(cfg.params.levy_weight, 2.5);
        assert_eq!(cfg.params.levy_beta, 1.5);
        assert_eq!(cfg.constraints.max_step_size, 4.0);
        assert_eq!(cfg.constraints.coverage_radius, 3.0);
    }

    #[test]
    fn scenario_file_errors() {
        assert!(ScenarioFile::from_json("{}")
            .unwrap()
            .into_config()
            .is_err());
        assert!(ScenarioFile::from_json(r#"{"kind":"uniform"}"#)
            .unwrap()
            .into_config()
            .is_err());
        assert!(ScenarioFile::from_json(r#"{"bogus":1}"#).is_err());
        let bad = r#"{"hotspots":[{"x":1,"y":1}],"start":[200,0]}"#;
        assert!(ScenarioFile::from_json(bad).unwrap().into_config().is_err());
        let bad = r#"{"hotspots":[{"x":1,"y":1}],"constraints":{"collision_radius":3}}"#;
        assert!(ScenarioFile::from_json(bad).unwrap().into_config().is_err());
        let bad = r#"{"hotspots":[{"x":1,"y":1}],"params":{"levy_beta":2.5}}"#;
        assert!(ScenarioFile::from_json(bad).unwrap().into_config().is_err());
    }

    #[test]
    fn shaping_budget_enforced() {
        let mut hs: Vec<Hotspot> = (0..100)
            .map(|i| Hotspot::new(i as f64 % 100.0 + 0.5, 5.0))
            .collect();
        hs[0].weight = 0.5;
        let cfg = make_scenario(ScenarioKind::Custom(hs), 0, 0, grid());
        assert!(cfg.unwrap().validate().is_err());
    }

    #[test]
    fn reseed_regenerates_only_generated_layouts() {
        let a = ScenarioConfig::preset("twocluster20", 1).unwrap();
        let b = a.reseeded(2).unwrap();
        assert_ne!(a.hotspots, b.hotspots);
        assert_eq!(b, ScenarioConfig::preset("twocluster20", 2).unwrap());

        let c = make_scenario(
            ScenarioKind::Custom(vec![Hotspot::new(5.0, 5.0)]),
            0,
            1,
            grid(),
        )
        .unwrap();
        assert_eq!(c.reseeded(7).unwrap().hotspots, c.hotspots);
    }
}
