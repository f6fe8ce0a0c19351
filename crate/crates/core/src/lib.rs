//! Deterministic multi-UAV coverage simulation over hotspot-annotated grids.
//!
//! The crate bundles a hybrid artificial-bee-colony / Levy-flight optimizer,
//! plain ABC and PSO baselines, a motion-constraint pipeline (step cap,
//! boundary clamp, safe-zone separation, artificial potential field,
//! no-hotspot-zone escape), per-run metrics and an experiment harness for
//! batches, parameter sweeps and algorithm comparisons.
//!
//! Every run is a pure function of its [`ScenarioConfig`], including the seed.

pub mod constraints;
pub mod env;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod optimizers;
pub mod rng;

pub use env::{
    make_scenario, mark_coverage, Algorithm, AlgorithmParams, ConstraintParams, ExploitSign,
    GridConfig, Hotspot, Layout, PsoParams, ScenarioConfig, ScenarioFile, ScenarioKind, SwarmState,
    UavState, ZoneEscape,
};
pub use error::{Error, Result};
pub use geometry::Vec2;
pub use harness::{
    compare_algorithms, run_scenario, run_sweep, ComparisonRow, RunRow, SweepFile, SweepSpec,
    SweepSummary, SweepValues,
};
pub use metrics::{biodiversity_metric, Heatmap, RunMetrics};
pub use rng::{levy_step, mantegna_sigma, LevyStep, RandomSource, RandomStream};
