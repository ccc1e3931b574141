//! Grid-seeded search for decoupling control points that realize ZZ-class
//! gates on the work qubits.
//!
//! Every start of an `m^4` grid over `(E1, E2, E3, τ)` is driven uphill on
//! the decoupling objective by alternating gradient steps in the energy
//! block and in `τ`. Converged points above the acceptance threshold are
//! classified and kept when their class is `(0, 0, c)`.

mod coverage;
mod database;
mod descent;
mod verify;

pub use coverage::{coverage_stats, coverage_stats_on, write_coverage_csv, CoverageStats, HISTOGRAM_BINS};
pub use database::{read_database, write_database, ConfigEcho, DbEntry};
pub use descent::{coordinate_descent, DescentOutcome};
pub use verify::{conjecture_distance, verify_entry, verify_record, VerifyReport};

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_angles, is_zz_class, CanonicalClass, CanonicalError};
use crate::hamiltonian::{build_n, leakage, ControlPoint, CouplingPair, HamiltonianError};
use crate::numerics::{nearest_unitary, NumericsError};

pub const DEFAULT_RANGE: f64 = 5.0;
pub const DEFAULT_DENSITY: usize = 10;
pub const DEFAULT_CONV_TOL: f64 = 5e-6;
pub const DEFAULT_OBJ_THRESHOLD: f64 = 1.99995;
pub const DEFAULT_ANGLE_TOL: f64 = 0.0025 * PI;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("record couplings ({found_j12}, {found_j23}) differ from configured ({j12}, {j23})")]
    CouplingMismatch {
        j12: f64,
        j23: f64,
        found_j12: f64,
        found_j23: f64,
    },
    #[error("database line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("database mixes records from different configurations (line {line})")]
    MixedConfig { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub couplings: CouplingPair<f64>,
    /// Grid half-range `L`.
    pub range: f64,
    /// Grid density `m`; each coordinate takes `m` values.
    pub density: usize,
    pub conv_tol: f64,
    pub obj_threshold: f64,
    pub angle_tol: f64,
    pub max_iterations: usize,
    pub workers: usize,
    pub jitter: f64,
    pub seed: u64,
    /// Weight `w` of an optional `-w τ` term favouring short relaxations.
    pub tau_penalty: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            couplings: CouplingPair::default(),
            range: DEFAULT_RANGE,
            density: DEFAULT_DENSITY,
            conv_tol: DEFAULT_CONV_TOL,
            obj_threshold: DEFAULT_OBJ_THRESHOLD,
            angle_tol: DEFAULT_ANGLE_TOL,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            jitter: 0.0,
            seed: 0,
            tau_penalty: 0.0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        self.couplings.validate()?;
        let bad = |msg: &str| Err(SearchError::InvalidConfig(msg.to_string()));
        if self.density < 2 {
            return bad("grid density must be at least 2");
        }
        if !(self.range > 0.0 && self.range.is_finite()) {
            return bad("range must be positive and finite");
        }
        if !(self.obj_threshold > 0.0 && self.obj_threshold < 2.0) {
            return bad("objective threshold must lie in (0, 2)");
        }
        if !(self.conv_tol > 0.0) {
            return bad("convergence tolerance must be positive");
        }
        if !(self.angle_tol >= 0.0) {
            return bad("angle tolerance must be non-negative");
        }
        if self.max_iterations == 0 {
            return bad("max iterations must be at least 1");
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return bad("jitter must be non-negative and finite");
        }
        if !(self.tau_penalty >= 0.0 && self.tau_penalty.is_finite()) {
            return bad("tau penalty must be non-negative and finite");
        }
        Ok(())
    }
}

/// One accepted control point together with the gate it produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub point: ControlPoint<f64>,
    pub objective_value: f64,
    pub leakage: f64,
    pub class: CanonicalClass<f64>,
    pub zz_angle: f64,
    pub alpha: Complex<f64>,
    pub beta: Complex<f64>,
    /// Middle block `[n11, n13, n31, n33]` of the conditional gate.
    pub n_entries: [Complex<f64>; 4],
    pub projection_distance: f64,
    pub descent_iterations: usize,
}

/// The `m^4` seeds in lexicographic `(E1, E2, E3, τ)` order.
///
/// Coordinates are computed from the fraction `k / (m - 1)`, so a grid
/// whose `m' - 1` is a multiple of `m - 1` contains the coarser grid
/// bit for bit.
pub fn grid_points(range: f64, density: usize) -> Result<Vec<ControlPoint<f64>>, SearchError> {
    if density < 2 {
        return Err(SearchError::InvalidConfig("grid density must be at least 2".into()));
    }
    let steps = (density - 1) as f64;
    let frac: Vec<f64> = (0..density).map(|k| k as f64 / steps).collect();
    let energies: Vec<f64> = frac.iter().map(|f| -range + 2.0 * range * f).collect();
    let taus: Vec<f64> = frac.iter().map(|f| range + 3.0 * range * f).collect();
    let mut out = Vec::with_capacity(density.pow(4));
    for &e1 in &energies {
        for &e2 in &energies {
            for &e3 in &energies {
                for &tau in &taus {
                    out.push(ControlPoint::new(e1, e2, e3, tau));
                }
            }
        }
    }
    Ok(out)
}

fn jittered(start: ControlPoint<f64>, index: usize, config: &SearchConfig) -> ControlPoint<f64> {
    if config.jitter <= 0.0 {
        return start;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let j = config.jitter;
    let mut c = start.as_array();
    for x in c.iter_mut() {
        *x += rng.gen_range(-j..=j);
    }
    ControlPoint::new(c[0], c[1], c[2], c[3].max(1e-3))
}

/// Classifies a descended point and builds its record if it passes both
/// the objective threshold and the ZZ filter.
pub fn accept(outcome: &DescentOutcome, config: &SearchConfig) -> Result<Option<GateRecord>, SearchError> {
    let obj = outcome.raw_objective;
    if !(obj > config.obj_threshold) {
        return Ok(None);
    }
    let gate = build_n(&outcome.point, &config.couplings);
    let (unitary, projection_distance) = nearest_unitary(&gate.n)?;
    let class = canonical_angles(&unitary)?;
    let Some(zz_angle) = is_zz_class(&class, config.angle_tol) else {
        return Ok(None);
    };
    Ok(Some(GateRecord {
        point: outcome.point,
        objective_value: obj,
        leakage: leakage(&outcome.point, &config.couplings),
        class,
        zz_angle,
        alpha: gate.alpha,
        beta: gate.beta,
        n_entries: gate.middle_entries(),
        projection_distance,
        descent_iterations: outcome.iterations,
    }))
}

fn record_order(a: &GateRecord, b: &GateRecord) -> Ordering {
    a.zz_angle
        .total_cmp(&b.zz_angle)
        .then_with(|| {
            a.point
                .as_array()
                .iter()
                .zip(b.point.as_array().iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        })
}

/// Runs the full search; see [`run_search_with_progress`].
pub fn run_search(config: &SearchConfig) -> Result<Vec<GateRecord>, SearchError> {
    run_search_with_progress(config, &|_, _| {})
}

/// Descends from every grid start on a pool of `config.workers` threads and
/// returns the accepted records sorted by `(zz_angle, E1, E2, E3, τ)`.
///
/// `progress(done, total)` is called from worker threads as starts finish.
pub fn run_search_with_progress(
    config: &SearchConfig,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<Vec<GateRecord>, SearchError> {
    config.validate()?;
    let starts = grid_points(config.range, config.density)?;
    let total = starts.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| SearchError::Pool(e.to_string()))?;

    let results: Vec<Result<Option<GateRecord>, SearchError>> = pool.install(|| {
        starts
            .par_iter()
            .enumerate()
            .map(|(i, &start)| {
                let outcome = coordinate_descent(jittered(start, i, config), config);
                let rec = accept(&outcome, config);
                let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(n, total);
                rec
            })
            .collect()
    });

    let mut records = Vec::new();
    for r in results {
        if let Some(rec) = r? {
            records.push(rec);
        }
    }
    records.sort_by(record_order);
    Ok(records)
}
