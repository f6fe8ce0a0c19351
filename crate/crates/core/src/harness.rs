//! Experiment harness: single runs, seed batches, parameter sweeps and
//! algorithm comparisons, plus their CSV/PGM artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::{apply_pipeline, clamp_step};
use crate::env::{
    mark_coverage, refresh_fitness, Algorithm, Best, Layout, ScenarioConfig, ScenarioFile,
    SwarmState,
};
use crate::error::{Error, Result};
use crate::metrics::{biodiversity_metric, hotspot_alignment, Heatmap, RunMetrics};
use crate::optimizers::{propose, Motion, Phase, ProposedMove};
use crate::rng::RandomSource;

/// Steps the configured optimizer and constraint pipeline until every hotspot
/// is covered or `max_steps` is reached. Deterministic in `config`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunMetrics> {
    config.validate()?;
    let c = &config.constraints;
    let mut hotspots = config.hotspots.clone();
    for h in &mut hotspots {
        h.covered = false;
    }
    let mut swarm = SwarmState::deploy(config);
    let mut streams = RandomSource::for_swarm(config.seed, config.n_uavs);
    let mut metrics = RunMetrics::new(
        config.grid,
        config.n_uavs,
        hotspots.len(),
        config.dt,
        config.record_trajectories,
    );

    mark_coverage(&mut swarm, &mut hotspots, c.coverage_radius);
    refresh_fitness(&mut swarm, &hotspots, config);
    for uav in &mut swarm.uavs {
        uav.personal_best = Some(Best {
            position: uav.position,
            fitness: uav.fitness,
        });
    }
    swarm.observe_best();
    metrics.record_step(&swarm, &[]);

    while swarm.covered_count < hotspots.len() && swarm.step < config.max_steps {
        let mut proposals = propose(&swarm, &hotspots, config, &mut streams);
        for mv in &mut proposals {
            let uav = &mut swarm.uavs[mv.uav_index];
            if let Motion::Absolute(target) = mv.motion {
                if uav.scout_target.is_none() {
                    uav.scout_target = Some(target);
                }
            }
            if let Some(target) = uav.scout_target {
                *mv = ProposedMove::scout(mv.uav_index, target);
                uav.stagnation = 0;
            }
        }

        let previous = swarm.positions();
        let outcome = apply_pipeline(
            &previous,
            &proposals,
            &hotspots,
            c,
            config.algorithm,
            config.grid,
        );
        for (mv, uav) in proposals.iter().zip(swarm.uavs.iter_mut()) {
            if let Some(v) = mv.velocity {
                uav.velocity = clamp_step(v, c.max_step_size);
            }
            if mv.phase == Phase::Scout
                && mv.displacement_from(uav.position).norm() <= c.max_step_size
            {
                uav.scout_target = None;
            }
        }
        for (i, uav) in swarm.uavs.iter_mut().enumerate() {
            let moved = previous[i].distance(outcome.positions[i]);
            metrics.note_displacement(moved, outcome.corrected[i]);
            uav.position = outcome.positions[i];
        }
        swarm.step += 1;

        let newly = mark_coverage(&mut swarm, &mut hotspots, c.coverage_radius);
        let before: Vec<f64> = swarm.uavs.iter().map(|u| u.fitness).collect();
        refresh_fitness(&mut swarm, &hotspots, config);
        for (uav, old) in swarm.uavs.iter_mut().zip(before) {
            let covered_here = newly
                .iter()
                .any(|&k| uav.position.distance(hotspots[k].position) <= c.coverage_radius);
            if uav.fitness > old || covered_here || uav.scout_target.is_some() {
                uav.stagnation = 0;
            } else {
                uav.stagnation += 1;
            }
            if uav.personal_best.is_none_or(|b| uav.fitness > b.fitness) {
                uav.personal_best = Some(Best {
                    position: uav.position,
                    fitness: uav.fitness,
                });
            }
        }
        swarm.observe_best();
        metrics.constraint_report += outcome.report;
        metrics.record_step(&swarm, &outcome.corrected);
    }

    metrics.biodiversity_b = biodiversity_metric(&hotspots);
    metrics.hotspot_covered = hotspots.iter().map(|h| h.covered).collect();
    Ok(metrics)
}

/// Runs every config, in parallel when asked. Output order follows input order.
pub fn run_batch(configs: &[ScenarioConfig], parallel: bool) -> Result<Vec<RunMetrics>> {
    if parallel {
        configs.par_iter().map(run_scenario).collect()
    } else {
        configs.iter().map(run_scenario).collect()
    }
}

/// One CSV line per run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub levy_weight: f64,
    pub seed: u64,
    pub steps_to_cover: Option<u64>,
    pub time_to_cover_s: Option<f64>,
    pub biodiversity_b: f64,
    pub min_pairwise_distance: f64,
    pub collision_interventions: u64,
}

impl RunRow {
    pub fn new(config: &ScenarioConfig, metrics: &RunMetrics) -> Self {
        RunRow {
            scenario: config.name.clone(),
            algorithm: config.algorithm,
            levy_weight: config.params.levy_weight,
            seed: config.seed,
            steps_to_cover: metrics.steps_to_cover,
            time_to_cover_s: metrics.time_to_cover(),
            biodiversity_b: metrics.biodiversity_b,
            min_pairwise_distance: metrics.min_pairwise_distance,
            collision_interventions: metrics.constraint_report.collision_interventions,
        }
    }
}

pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::validation(format!("csv flush failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn rows_from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Writes `metrics.csv`, `coverage.csv`, `heatmap.pgm`, `heatmap.csv` and,
/// when logged, `trajectories.csv` into `dir`.
pub fn write_run_artifacts(
    dir: &Path,
    config: &ScenarioConfig,
    metrics: &RunMetrics,
) -> Result<()> {
    prepare_dir(dir)?;
    write_file(
        &dir.join("metrics.csv"),
        &rows_to_csv(&[RunRow::new(config, metrics)])?,
    )?;
    let mut curve = String::from("step,covered\n");
    for (s, c) in &metrics.coverage_curve {
        curve.push_str(&format!("{s},{c}\n"));
    }
    write_file(&dir.join("coverage.csv"), &curve)?;
    write_file(&dir.join("heatmap.pgm"), &metrics.heatmap.to_pgm())?;
    write_file(&dir.join("heatmap.csv"), &metrics.heatmap.to_csv())?;
    if let Some(t) = &metrics.trajectories {
        write_file(&dir.join("trajectories.csv"), &t.to_csv())?;
    }
    Ok(())
}

/// The swept parameter and its values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "parameter", content = "values", rename_all = "snake_case")]
pub enum SweepValues {
    LevyWeight(Vec<f64>),
    Algorithm(Vec<Algorithm>),
    NUavs(Vec<usize>),
}

impl SweepValues {
    pub fn len(&self) -> usize {
        match self {
            SweepValues::LevyWeight(v) => v.len(),
            SweepValues::Algorithm(v) => v.len(),
            SweepValues::NUavs(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parameter(&self) -> &'static str {
        match self {
            SweepValues::LevyWeight(_) => "levy_weight",
            SweepValues::Algorithm(_) => "algorithm",
            SweepValues::NUavs(_) => "n_uavs",
        }
    }

    pub fn label(&self, i: usize) -> String {
        match self {
            SweepValues::LevyWeight(v) => format!("{}", v[i]),
            SweepValues::Algorithm(v) => v[i].to_string(),
            SweepValues::NUavs(v) => v[i].to_string(),
        }
    }

    fn apply(&self, i: usize, config: &mut ScenarioConfig) {
        match self {
            SweepValues::LevyWeight(v) => config.params.levy_weight = v[i],
            SweepValues::Algorithm(v) => config.algorithm = v[i],
            SweepValues::NUavs(v) => config.n_uavs = v[i],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    #[serde(flatten)]
    pub values: SweepValues,
    pub seeds: Vec<u64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_parallel() -> bool {
    true
}

/// On-disk sweep description. The base scenario is a named preset or an
/// inline scenario object (default: the `uniform20` preset).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepFile {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub scenario: Option<ScenarioFile>,
    #[serde(flatten)]
    pub values: SweepValues,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

impl SweepFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn into_spec(self) -> Result<SweepSpec> {
        let base = match (self.preset, self.scenario) {
            (Some(_), Some(_)) => {
                return Err(Error::validation(
                    "sweep gives both a preset and a scenario",
                ))
            }
            (Some(name), None) => ScenarioConfig::preset(&name, 0)?,
            (None, Some(file)) => file.into_config()?,
            (None, None) => ScenarioConfig::preset("uniform20", 0)?,
        };
        Ok(SweepSpec {
            base,
            values: self.values,
            seeds: self.seeds,
            output_dir: self.output_dir,
            parallel: self.parallel,
        })
    }
}

/// A completed run inside a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub value: String,
    pub config: ScenarioConfig,
    pub metrics: RunMetrics,
}

/// Per-value aggregate. Unfinished runs count as infinitely slow in the
/// order statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub parameter: String,
    pub value: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_steps: f64,
    pub q1_steps: f64,
    pub q3_steps: f64,
    pub iqr_steps: f64,
    pub mean_alignment: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<RunRow>,
    /// Sorted by median steps to cover, fastest first.
    pub aggregates: Vec<Aggregate>,
    /// Merged heatmap per value, in value order.
    pub heatmaps: Vec<(String, Heatmap)>,
    pub runs: Vec<RunRecord>,
}

/// Linear-interpolated quantile of sorted data; infinite neighbours win.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        return sorted[lo];
    }
    if sorted[hi].is_infinite() {
        return f64::INFINITY;
    }
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Steps to cover as `f64`, `inf` for unfinished runs.
pub fn steps_or_inf(metrics: &RunMetrics) -> f64 {
    metrics.steps_to_cover.map_or(f64::INFINITY, |s| s as f64)
}

pub fn aggregate(parameter: &str, value: &str, runs: &[&RunRecord]) -> Aggregate {
    let mut steps: Vec<f64> = runs.iter().map(|r| steps_or_inf(&r.metrics)).collect();
    steps.sort_by(f64::total_cmp);
    let successes = runs.iter().filter(|r| r.metrics.covered()).count();
    let q1 = quantile(&steps, 0.25);
    let q3 = quantile(&steps, 0.75);
    let alignment = runs
        .iter()
        .map(|r| {
            hotspot_alignment(
                &r.metrics.heatmap,
                &r.config.hotspots,
                r.config.constraints.coverage_radius,
            )
        })
        .sum::<f64>()
        / runs.len().max(1) as f64;
    Aggregate {
        parameter: parameter.to_string(),
        value: value.to_string(),
        runs: runs.len(),
        successes,
        success_rate: successes as f64 / runs.len().max(1) as f64,
        median_steps: quantile(&steps, 0.5),
        q1_steps: q1,
        q3_steps: q3,
        iqr_steps: if q3.is_infinite() {
            f64::INFINITY
        } else {
            q3 - q1
        },
        mean_alignment: alignment,
    }
}

fn check_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        Err(Error::validation("at least one seed is required"))
    } else {
        Ok(())
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepSummary> {
    if spec.values.is_empty() {
        return Err(Error::validation("sweep needs at least one value"));
    }
    check_seeds(&spec.seeds)?;
    spec.base.validate()?;
    if let Some(dir) = &spec.output_dir {
        prepare_dir(dir)?;
    }

    let mut configs = Vec::with_capacity(spec.values.len() * spec.seeds.len());
    let mut labels = Vec::with_capacity(configs.capacity());
    for vi in 0..spec.values.len() {
        for &seed in &spec.seeds {
            let mut cfg = spec.base.reseeded(seed)?;
            spec.values.apply(vi, &mut cfg);
            cfg.validate()?;
            configs.push(cfg);
            labels.push(spec.values.label(vi));
        }
    }
    let metrics = run_batch(&configs, spec.parallel)?;
    let runs: Vec<RunRecord> = labels
        .into_iter()
        .zip(configs)
        .zip(metrics)
        .map(|((value, config), metrics)| RunRecord {
            value,
            config,
            metrics,
        })
        .collect();
    let rows: Vec<RunRow> = runs
        .iter()
        .map(|r| RunRow::new(&r.config, &r.metrics))
        .collect();

    let mut aggregates = Vec::new();
    let mut heatmaps = Vec::new();
    for vi in 0..spec.values.len() {
        let label = spec.values.label(vi);
        let group: Vec<&RunRecord> = runs.iter().filter(|r| r.value == label).collect();
        aggregates.push(aggregate(spec.values.parameter(), &label, &group));
        let mut merged = Heatmap::new(spec.base.grid);
        for r in &group {
            merged.merge(&r.metrics.heatmap)?;
        }
        heatmaps.push((label, merged));
    }
    // Stable: equal medians keep value order.
    aggregates.sort_by(|a, b| a.median_steps.total_cmp(&b.median_steps));

    let summary = SweepSummary {
        rows,
        aggregates,
        heatmaps,
        runs,
    };
    if let Some(dir) = &spec.output_dir {
        write_sweep_artifacts(dir, spec.values.parameter(), &summary)?;
    }
    Ok(summary)
}

pub fn write_sweep_artifacts(dir: &Path, parameter: &str, summary: &SweepSummary) -> Result<()> {
    write_file(&dir.join("runs.csv"), &rows_to_csv(&summary.rows)?)?;
    write_file(&dir.join("summary.csv"), &rows_to_csv(&summary.aggregates)?)?;
    for (label, heatmap) in &summary.heatmaps {
        let stem = format!("heatmap_{parameter}_{label}");
        write_file(&dir.join(format!("{stem}.pgm")), &heatmap.to_pgm())?;
        write_file(&dir.join(format!("{stem}.csv")), &heatmap.to_csv())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: String,
    /// Set on the near-band / far-cluster layout that traps the baselines.
    pub two_cluster: bool,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub median_steps: f64,
    /// Runs that covered at least one far-cluster hotspot (two-cluster only).
    pub far_cluster_runs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub runs: Vec<RunRecord>,
}

/// True when some far-cluster hotspot of a two-cluster layout ended covered.
pub fn reached_far_cluster(config: &ScenarioConfig, metrics: &RunMetrics) -> Option<bool> {
    match config.layout {
        Layout::TwoCluster { n_hotspots, .. } => {
            let near = n_hotspots.div_ceil(2);
            Some(metrics.hotspot_covered[near..].iter().any(|c| *c))
        }
        _ => None,
    }
}

/// Runs each algorithm on identical scenarios and seeds.
pub fn compare_algorithms(
    base: &ScenarioConfig,
    algorithms: &[Algorithm],
    seeds: &[u64],
    parallel: bool,
) -> Result<Comparison> {
    if algorithms.len() < 2 {
        return Err(Error::validation(
            "comparison needs at least two algorithms",
        ));
    }
    let spec = SweepSpec {
        base: base.clone(),
        values: SweepValues::Algorithm(algorithms.to_vec()),
        seeds: seeds.to_vec(),
        output_dir: None,
        parallel,
    };
    let summary = run_sweep(&spec)?;
    let two_cluster = matches!(base.layout, Layout::TwoCluster { .. });
    let rows = algorithms
        .iter()
        .enumerate()
        .map(|(vi, alg)| {
            let label = spec.values.label(vi);
            let group: Vec<&RunRecord> = summary.runs.iter().filter(|r| r.value == label).collect();
            let agg = aggregate("algorithm", &label, &group);
            let far_cluster_runs = two_cluster.then(|| {
                group
                    .iter()
                    .filter(|r| reached_far_cluster(&r.config, &r.metrics) == Some(true))
                    .count()
            });
            ComparisonRow {
                scenario: base.name.clone(),
                two_cluster,
                algorithm: *alg,
                runs: agg.runs,
                successes: agg.successes,
                success_rate: agg.success_rate,
                median_steps: agg.median_steps,
                far_cluster_runs,
            }
        })
        .collect();
    Ok(Comparison {
        rows,
        runs: summary.runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_scenario, GridConfig, Hotspot, ScenarioKind};
    use crate::geometry::Vec2;

    #[test]
    fn start_inside_coverage_finishes_at_step_zero() {
        let mut cfg = make_scenario(
            ScenarioKind::Custom(vec![Hotspot::new(50.0, 2.0)]),
            0,
            1,
            GridConfig::default(),
        )
        .unwrap();
        cfg.n_uavs = 1;
        cfg.start_position = Vec2::new(50.0, 0.0);
        let m = run_scenario(&cfg).unwrap();
        assert_eq!(m.steps_to_cover, Some(0));
        assert_eq!(m.time_to_cover(), Some(0.0));
        assert_eq!(m.recorded_steps, 1);
        assert_eq!(m.biodiversity_b, 1.0);
    }

    #[test]
    fn invalid_config_rejected_before_running() {
        let mut cfg = ScenarioConfig::preset("uniform20", 1).unwrap();
        cfg.n_uavs = 0;
        assert!(matches!(run_scenario(&cfg), Err(Error::Validation(_))));
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        let w = [1.0, 2.0, f64::INFINITY, f64::INFINITY];
        assert_eq!(quantile(&w, 0.5), f64::INFINITY);
        assert_eq!(quantile(&w, 0.0), 1.0);
    }

    #[test]
    fn sweep_rejects_empty_inputs() {
        let base = ScenarioConfig::preset("uniform20", 1).unwrap();
        let spec = SweepSpec {
            base: base.clone(),
            values: SweepValues::LevyWeight(vec![3.0]),
            seeds: vec![],
            output_dir: None,
            parallel: false,
        };
        assert!(run_sweep(&spec).is_err());
        let spec = SweepSpec {
            values: SweepValues::LevyWeight(vec![]),
            seeds: vec![1],
            ..spec
        };
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn compare_needs_two() {
        let base = ScenarioConfig::preset("uniform20", 1).unwrap();
        assert!(compare_algorithms(&base, &[Algorithm::Pso], &[1], false).is_err());
    }
}
