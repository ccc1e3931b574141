//! Compiles a two-qubit canonical class into a switching profile of the
//! on-site energies.
//!
//! The canonical gate `e^{i(c1 XX + c2 YY + c3 ZZ)}` factors into three
//! commuting `σk⊗σk` rotations. Each is realized by one relaxation whose
//! database record is ZZ-type, conjugated into the `σk⊗σk` frame with a
//! pair of single-qubit rotations applied while the controlled qubit is
//! held Passive. Single-qubit Z and X corrections that turn the recorded
//! gate into an exact `e^{i c ZZ}` are folded into the same Passive
//! segments.

mod simulate;

pub use simulate::{simulate_profile, SimulationError, SimulationMode, SimulationResult, LEAKAGE_FLAG};

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical::{local_rotation_factor, CanonicalClass};
use crate::hamiltonian::{build_n, CouplingPair};
use crate::numerics::pauli::{sigma, Axis};
use crate::numerics::ComplexMatrix;
use crate::search::GateRecord;

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("gate database is empty; run `chaingate search` to build one")]
    EmptyDatabase,
    #[error("target angle {0} is not finite")]
    NonFiniteTarget(f64),
}

/// On-site energy of one qubit during a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyLevel {
    Finite(f64),
    /// Large enough to freeze the qubit; symbolic in ideal simulation.
    Passive,
}

impl Serialize for EnergyLevel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EnergyLevel::Finite(v) => s.serialize_f64(*v),
            EnergyLevel::Passive => s.serialize_str("Passive"),
        }
    }
}

impl<'de> Deserialize<'de> for EnergyLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(EnergyLevel::Finite(v)),
            Raw::Word(w) if w == "Passive" => Ok(EnergyLevel::Passive),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("unknown energy level {w:?}"))),
        }
    }
}

pub type Mat2 = [[Complex<f64>; 2]; 2];

/// Single-qubit operations on the two work qubits, applied together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOps {
    pub q1: Mat2,
    pub q3: Mat2,
}

fn to_mat2(m: &ComplexMatrix<f64>) -> Mat2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn from_mat2(m: &Mat2) -> ComplexMatrix<f64> {
    ComplexMatrix::from_vec(2, 2, vec![m[0][0], m[0][1], m[1][0], m[1][1]])
}

impl LocalOps {
    pub fn identity() -> Self {
        Self::new(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2))
    }

    pub fn new(q1: &ComplexMatrix<f64>, q3: &ComplexMatrix<f64>) -> Self {
        Self {
            q1: to_mat2(q1),
            q3: to_mat2(q3),
        }
    }

    pub fn q1_matrix(&self) -> ComplexMatrix<f64> {
        from_mat2(&self.q1)
    }

    pub fn q3_matrix(&self) -> ComplexMatrix<f64> {
        from_mat2(&self.q3)
    }

    /// `q1 ⊗ q3` on `|00>, |01>, |10>, |11>`.
    pub fn matrix(&self) -> ComplexMatrix<f64> {
        self.q1_matrix().kron(&self.q3_matrix())
    }

    /// Applies `self` first, then `next`.
    pub fn then(&self, next: &LocalOps) -> LocalOps {
        LocalOps::new(
            &(&next.q1_matrix() * &self.q1_matrix()),
            &(&next.q3_matrix() * &self.q3_matrix()),
        )
    }

    pub fn adjoint(&self) -> LocalOps {
        LocalOps::new(&self.q1_matrix().adjoint(), &self.q3_matrix().adjoint())
    }

    fn is_identity(&self) -> bool {
        (&self.matrix() - &ComplexMatrix::identity(4)).max_entry_norm() < 1e-14
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub e1: EnergyLevel,
    pub e2: EnergyLevel,
    pub e3: EnergyLevel,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_ops: Option<LocalOps>,
    pub annotation: String,
}

impl Segment {
    pub fn passive(local_ops: Option<LocalOps>, annotation: impl Into<String>) -> Self {
        Self {
            e1: EnergyLevel::Passive,
            e2: EnergyLevel::Passive,
            e3: EnergyLevel::Passive,
            duration: 0.0,
            local_ops,
            annotation: annotation.into(),
        }
    }

    pub fn is_passive(&self) -> bool {
        self.e2 == EnergyLevel::Passive
    }

    pub fn levels(&self) -> [EnergyLevel; 3] {
        [self.e1, self.e2, self.e3]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SwitchingProfile {
    pub segments: Vec<Segment>,
}

impl SwitchingProfile {
    pub fn relaxations(&self) -> usize {
        self.segments.iter().filter(|s| !s.is_passive()).count()
    }

    /// Merges runs of adjacent Passive segments and drops Passive segments
    /// that do nothing.
    fn normalize(&mut self) {
        let mut out: Vec<Segment> = Vec::with_capacity(self.segments.len());
        for seg in self.segments.drain(..) {
            match out.last_mut() {
                Some(prev) if prev.is_passive() && seg.is_passive() => {
                    prev.local_ops = match (prev.local_ops, seg.local_ops) {
                        (Some(a), Some(b)) => Some(a.then(&b)),
                        (a, b) => a.or(b),
                    };
                    prev.duration += seg.duration;
                    if !seg.annotation.is_empty() {
                        if !prev.annotation.is_empty() {
                            prev.annotation.push_str("; ");
                        }
                        prev.annotation.push_str(&seg.annotation);
                    }
                }
                _ => out.push(seg),
            }
        }
        out.retain(|s| !(s.is_passive() && s.duration == 0.0 && s.local_ops.map_or(true, |o| o.is_identity())));
        self.segments = out;
    }
}

/// Number of (energy line, boundary) pairs where the line changes value,
/// including the boundaries with the all-Passive idle state before and
/// after the profile.
pub fn count_switchings(profile: &SwitchingProfile) -> usize {
    let idle = [EnergyLevel::Passive; 3];
    let mut levels = vec![idle];
    levels.extend(profile.segments.iter().map(Segment::levels));
    levels.push(idle);
    levels
        .windows(2)
        .map(|w| (0..3).filter(|&k| w[0][k] != w[1][k]).count())
        .sum()
}

/// Record whose angle is closest to `c`; ties go to the shorter relaxation,
/// then to the smaller leakage.
pub fn lookup_nearest(db: &[GateRecord], c: f64) -> Result<&GateRecord, SynthesisError> {
    if !c.is_finite() {
        return Err(SynthesisError::NonFiniteTarget(c));
    }
    db.iter()
        .min_by(|a, b| {
            (a.zz_angle - c)
                .abs()
                .total_cmp(&(b.zz_angle - c).abs())
                .then(a.point.tau.total_cmp(&b.point.tau))
                .then(a.leakage.total_cmp(&b.leakage))
        })
        .ok_or(SynthesisError::EmptyDatabase)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisPlan {
    pub profile: SwitchingProfile,
    pub relaxations: usize,
    pub switchings: usize,
    pub predicted_angle_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    /// Factors whose angle is this close to `0` (mod `π/2`) are skipped.
    pub angle_tol: f64,
    /// Local operations applied before the canonical gate.
    pub right: Option<LocalOps>,
    /// Local operations applied after the canonical gate.
    pub left: Option<LocalOps>,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            angle_tol: crate::search::DEFAULT_ANGLE_TOL,
            right: None,
            left: None,
        }
    }
}

fn periodic_offset(c: f64) -> f64 {
    let r = c.rem_euclid(FRAC_PI_2);
    r.min(FRAC_PI_2 - r)
}

fn phase(theta: f64) -> Complex<f64> {
    Complex::from_polar(1.0, theta)
}

/// Local operations turning a recorded ZZ-type gate into `e^{i c ZZ}`:
/// `e^{i c ZZ} ≈ post · N · pre`. Returns `(pre, post, realized_error)`.
fn zz_corrections(n: &ComplexMatrix<f64>, c: f64) -> (LocalOps, LocalOps, f64) {
    let d: Vec<Complex<f64>> = (0..4).map(|k| n[(k, k)]).collect();
    let p: Vec<f64> = d.iter().map(|z| z.arg()).collect();
    let c_n = (p[0] - p[1] - p[2] + p[3]) / 4.0;

    let mut best = (1.0, 0i64, f64::INFINITY);
    for s in [1.0, -1.0] {
        let shift = ((c - s * c_n) / FRAC_PI_2).round();
        let err = (s * c_n + shift * FRAC_PI_2 - c).abs();
        if err < best.2 {
            best = (s, shift as i64, err);
        }
    }
    let (s, shift, err) = best;

    // N e^{-i c_N ZZ} is diagonal and local: D1 ⊗ D2
    let zz = [1.0, -1.0, -1.0, 1.0];
    let dd: Vec<Complex<f64>> = (0..4).map(|k| phase(p[k] - zz[k] * c_n)).collect();
    let d1 = ComplexMatrix::diagonal(&[Complex::new(1.0, 0.0), dd[2] / dd[0]]);
    let d2 = ComplexMatrix::diagonal(&[dd[0], dd[1]]);
    let undo = LocalOps::new(&d1.adjoint(), &d2.adjoint());

    // (i ZZ)^n = i^n Z^n ⊗ Z^n
    let z = sigma::<f64>(Axis::Z);
    let k = shift.rem_euclid(4) as usize;
    let mut zpow = ComplexMatrix::identity(2);
    for _ in 0..k {
        zpow = &zpow * &z;
    }
    let shift_ops = LocalOps::new(&zpow.scale(Complex::i().powu(k as u32)), &zpow);

    if s > 0.0 {
        (shift_ops, undo, err)
    } else {
        let flip = LocalOps::new(&sigma(Axis::X), &ComplexMatrix::identity(2));
        (shift_ops.then(&flip), undo.then(&flip), err)
    }
}

fn axis_name(axis: Axis) -> &'static str {
    match axis {
        Axis::X => "XX",
        Axis::Y => "YY",
        Axis::Z => "ZZ",
    }
}

fn rotation_name(axis: Axis, inverse: bool) -> String {
    let (gen, sign) = match (axis, inverse) {
        (Axis::X, false) => ("Y", ""),
        (Axis::X, true) => ("Y", "-"),
        (Axis::Y, false) => ("X", ""),
        (Axis::Y, true) => ("X", "-"),
        (Axis::Z, _) => ("I", ""),
    };
    format!("exp({sign}i pi/4 {gen}) on q1 and q3")
}

/// Builds the switching profile for a target class from a ZZ database
/// whose records were produced with `couplings`.
pub fn build_profile(
    target: &CanonicalClass<f64>,
    db: &[GateRecord],
    couplings: &CouplingPair<f64>,
    options: &SynthesisOptions,
) -> Result<SynthesisPlan, SynthesisError> {
    if db.is_empty() {
        return Err(SynthesisError::EmptyDatabase);
    }
    let mut segments = Vec::new();
    if let Some(right) = options.right {
        segments.push(Segment::passive(Some(right), "right local operations"));
    }
    let mut predicted = 0.0;
    for (axis, c) in Axis::ALL.into_iter().zip(target.as_array()) {
        if !c.is_finite() {
            return Err(SynthesisError::NonFiniteTarget(c));
        }
        let offset = periodic_offset(c);
        if offset <= options.angle_tol {
            predicted += offset;
            continue;
        }
        let record = lookup_nearest(db, c.rem_euclid(FRAC_PI_2))?;
        let n = build_n(&record.point, couplings).n;
        let (pre, post, err) = zz_corrections(&n, c);
        predicted += err;

        let (into_frame, out_of_frame) = match axis {
            Axis::Z => (LocalOps::identity(), LocalOps::identity()),
            _ => {
                let half = local_rotation_factor::<f64>(axis).expect("X and Y have frame rotations");
                (LocalOps::new(&half, &half), LocalOps::new(&half.adjoint(), &half.adjoint()))
            }
        };
        let name = axis_name(axis);
        segments.push(Segment::passive(
            Some(into_frame.then(&pre)),
            format!("{} frame: {}", name, rotation_name(axis, false)),
        ));
        let [e1, e2, e3] = record.point.energies.as_array();
        segments.push(Segment {
            e1: EnergyLevel::Finite(e1),
            e2: EnergyLevel::Finite(e2),
            e3: EnergyLevel::Finite(e3),
            duration: record.point.tau,
            local_ops: None,
            annotation: format!("relaxation for {name} angle {:.6} (record angle {:.6})", c, record.zz_angle),
        });
        segments.push(Segment::passive(
            Some(post.then(&out_of_frame)),
            format!("{} frame exit: {}", name, rotation_name(axis, true)),
        ));
    }
    if let Some(left) = options.left {
        segments.push(Segment::passive(Some(left), "left local operations"));
    }
    let mut profile = SwitchingProfile { segments };
    profile.normalize();
    Ok(SynthesisPlan {
        relaxations: profile.relaxations(),
        switchings: count_switchings(&profile),
        predicted_angle_error: predicted,
        profile,
    })
}

/// Profile file contents: header plus ordered segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub couplings: CouplingPair<f64>,
    pub database_digest: String,
    pub target: CanonicalClass<f64>,
    pub predicted_angle_error: f64,
    pub relaxations: usize,
    pub switchings: usize,
    pub segments: Vec<Segment>,
}

impl ProfileFile {
    pub fn new(plan: &SynthesisPlan, couplings: CouplingPair<f64>, target: CanonicalClass<f64>, digest: String) -> Self {
        Self {
            couplings,
            database_digest: digest,
            target,
            predicted_angle_error: plan.predicted_angle_error,
            relaxations: plan.relaxations,
            switchings: plan.switchings,
            segments: plan.profile.segments.clone(),
        }
    }

    pub fn profile(&self) -> SwitchingProfile {
        SwitchingProfile {
            segments: self.segments.clone(),
        }
    }
}
