use crate::canonical::{canonical_angles, class_distance, CanonicalClass, CanonicalError};
use crate::hamiltonian::{conditional_block, full_propagator, oracle_leakage, ControlPoint, CouplingPair, HamiltonianError};
use crate::numerics::{nearest_unitary, ComplexMatrix, NumericsError};

use super::{EnergyLevel, SwitchingProfile};

/// Active segments leaking more than this are reported.
pub const LEAKAGE_FLAG: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SimulationMode {
    /// Passive segments apply exactly their local operations.
    #[default]
    Ideal,
    /// Passive segments also evolve the chain with every energy set to
    /// `passive_energy` (default `10^3 max|J|`) for their duration plus
    /// `passive_duration`.
    Physical {
        passive_energy: Option<f64>,
        passive_duration: f64,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum SimulationError {
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
    #[error("segment {index} has invalid duration {duration}")]
    InvalidDuration { index: usize, duration: f64 },
    #[error("segment {index} mixes Passive and finite energies")]
    MixedSegment { index: usize },
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    /// Composed operation on the work qubits (not exactly unitary when
    /// relaxations leak).
    pub gate: ComplexMatrix<f64>,
    pub class: CanonicalClass<f64>,
    /// Distance from `gate` to the unitary that was classified.
    pub projection_distance: f64,
    /// `(segment index, leakage)` of active segments above [`LEAKAGE_FLAG`].
    pub flagged: Vec<(usize, f64)>,
}

impl SimulationResult {
    pub fn class_error(&self, target: &CanonicalClass<f64>) -> f64 {
        class_distance(&self.class, target)
    }
}

fn finite(level: EnergyLevel, passive: f64) -> f64 {
    match level {
        EnergyLevel::Finite(v) => v,
        EnergyLevel::Passive => passive,
    }
}

/// Composes the profile segment by segment into a gate on `(q1, q3)`.
///
/// Active segments contribute the `q2 = |0>` block of the exact 8x8
/// propagator.
pub fn simulate_profile(
    profile: &SwitchingProfile,
    couplings: &CouplingPair<f64>,
    mode: SimulationMode,
) -> Result<SimulationResult, SimulationError> {
    couplings.validate()?;
    let mut gate = ComplexMatrix::identity(4);
    let mut flagged = Vec::new();
    for (index, seg) in profile.segments.iter().enumerate() {
        if !(seg.duration >= 0.0 && seg.duration.is_finite()) {
            return Err(SimulationError::InvalidDuration {
                index,
                duration: seg.duration,
            });
        }
        if seg.is_passive() {
            if let SimulationMode::Physical {
                passive_energy,
                passive_duration,
            } = mode
            {
                let p = passive_energy.unwrap_or(1e3 * couplings.max_abs());
                let t = seg.duration + passive_duration;
                let point = ControlPoint::new(finite(seg.e1, p), p, finite(seg.e3, p), t);
                gate = &conditional_block(&full_propagator(&point, couplings)?) * &gate;
            }
            if let Some(ops) = &seg.local_ops {
                gate = &ops.matrix() * &gate;
            }
        } else {
            let levels = seg.levels();
            if levels.contains(&EnergyLevel::Passive) {
                return Err(SimulationError::MixedSegment { index });
            }
            let point = ControlPoint::new(finite(seg.e1, 0.0), finite(seg.e2, 0.0), finite(seg.e3, 0.0), seg.duration);
            let p8 = full_propagator(&point, couplings)?;
            let leak = oracle_leakage(&p8);
            if leak > LEAKAGE_FLAG {
                flagged.push((index, leak));
            }
            gate = &conditional_block(&p8) * &gate;
        }
    }
    let (unitary, projection_distance) = nearest_unitary(&gate)?;
    let class = canonical_angles(&unitary)?;
    Ok(SimulationResult {
        gate,
        class,
        projection_distance,
        flagged,
    })
}
