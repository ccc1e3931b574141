use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{DbEntry, GateRecord, SearchConfig, SearchError};
use crate::canonical::{canonical_angles, class_distance, CanonicalClass};
use crate::hamiltonian::{conditional_block, full_propagator, oracle_leakage, oracle_objective};
use crate::numerics::{nearest_unitary, ComplexMatrix};

/// Allowed drift between the stored objective and its 8x8 replay.
pub const OBJECTIVE_REPLAY_TOL: f64 = 1e-9;
/// Slack added to the angle tolerance for the replayed classification.
pub const CLASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub objective: f64,
    pub objective_error: f64,
    pub leakage: f64,
    pub class: CanonicalClass<f64>,
    pub class_error: f64,
    pub conjecture_distance: f64,
    pub passed: bool,
}

/// Largest entry distance between `block` and `e^{i c ZZ}` after the best
/// global phase and single-qubit Z phases, also allowing an `X ⊗ I` flip
/// (which maps `c` to `-c`).
pub fn conjecture_distance(block: &ComplexMatrix<f64>, c: f64) -> f64 {
    let d: Vec<Complex<f64>> = (0..4).map(|k| block[(k, k)]).collect();
    let off = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| block[(i, j)].norm())
        .fold(0.0, f64::max);
    let p: Vec<f64> = d.iter().map(|z| z.arg()).collect();
    let zz_phase = (p[0] - p[1] - p[2] + p[3]) / 4.0;
    let signs = [1.0, -1.0, -1.0, 1.0];
    let best = [c, -c]
        .iter()
        .map(|&target| {
            // residual of the ZZ component, spread evenly over the diagonal
            let period = std::f64::consts::FRAC_PI_2;
            let r = (zz_phase - target).rem_euclid(period);
            let r = if r > period / 2.0 { r - period } else { r };
            (0..4)
                .map(|k| (d[k] - Complex::from_polar(1.0, p[k] - signs[k] * r)).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    best.max(off)
}

/// Replays a record through the full 8x8 propagator.
pub fn verify_record(record: &GateRecord, config: &SearchConfig) -> Result<VerifyReport, SearchError> {
    config.couplings.validate()?;
    let p8 = full_propagator(&record.point, &config.couplings)?;
    let objective = oracle_objective(&p8);
    let leakage = oracle_leakage(&p8);
    let block = conditional_block(&p8);
    let (unitary, _) = nearest_unitary(&block)?;
    let class = canonical_angles(&unitary)?;
    let class_error = class_distance(&class, &CanonicalClass::new(0.0, 0.0, record.zz_angle));
    let objective_error = (objective - record.objective_value).abs();
    let leakage_bound = (2.0 - record.objective_value).max(0.0).sqrt() + OBJECTIVE_REPLAY_TOL;
    let passed = objective_error <= OBJECTIVE_REPLAY_TOL
        && record.objective_value > config.obj_threshold
        && leakage <= leakage_bound
        && class_error <= config.angle_tol + CLASS_TOL;
    Ok(VerifyReport {
        objective,
        objective_error,
        leakage,
        class,
        class_error,
        conjecture_distance: conjecture_distance(&block, record.zz_angle),
        passed,
    })
}

/// Like [`verify_record`], but first checks that the entry was produced with
/// the configured couplings.
pub fn verify_entry(entry: &DbEntry, config: &SearchConfig) -> Result<VerifyReport, SearchError> {
    let (want, found) = (config.couplings, entry.config.couplings);
    if want != found {
        return Err(SearchError::CouplingMismatch {
            j12: want.j12,
            j23: want.j23,
            found_j12: found.j12,
            found_j23: found.j23,
        });
    }
    verify_record(&entry.record, config)
}
