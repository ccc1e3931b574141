//! Canonical (classifying) angles of two-qubit gates.
//!
//! Every two-qubit unitary is locally equivalent to
//! `A = e^{i(c1 XX + c2 YY + c3 ZZ)}`. The triple is computed in the magic
//! basis, where local gates become real orthogonal matrices and `A` is
//! diagonal with phases
//!
//! ```text
//! λ = (c1 - c2 + c3, -c1 + c2 + c3, c1 + c2 - c3, -c1 - c2 - c3).
//! ```
//!
//! # Chamber convention
//!
//! Angles are reported in the tetrahedron
//! `π/2 > c3 ≥ c2 ≥ c1 ≥ 0, c2 + c3 ≤ π/2`, so the ZZ axis carries the
//! largest angle and CNOT reads `(0, 0, π/4)`. Inside the tetrahedron the
//! class is invariant under arbitrary local unitaries and global phase.
//!
//! On the face `c1 = 0` the points `(0, c2, c3)` and `(0, c2, π/2 - c3)`
//! describe the same gate up to a global phase of `i`. Those are kept apart
//! so that `e^{i c ZZ}` reads back `(0, 0, c)` for the whole range
//! `c ∈ [0, π/2)`: the branch is fixed by the sign of `tr(m)`, where
//! `m = M^T M` is built from the gate rescaled by the principal fourth root
//! of its determinant. That choice is invariant under `SU(2) ⊗ SU(2)`
//! conjugation and under a global sign, but not under a general global
//! phase. [`CanonicalClass::folded`] gives the fully phase-invariant
//! representative, and [`class_distance`] compares classes modulo all
//! local operations and phases.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::numerics::pauli::{rotation, Axis};
use crate::numerics::{normal_eigenvalues, ComplexMatrix, NumericsError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalClass<T> {
    pub c1: T,
    pub c2: T,
    pub c3: T,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CanonicalError {
    #[error("gate is not unitary (max |G^dag G - I| = {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("expected a 4x4 gate, got {rows}x{cols}")]
    WrongShape { rows: usize, cols: usize },
    #[error("local rotation is only defined for the X and Y axes")]
    UnsupportedAxis,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl<T: Real> CanonicalClass<T> {
    pub fn new(c1: T, c2: T, c3: T) -> Self {
        Self { c1, c2, c3 }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.c1, self.c2, self.c3]
    }

    /// Representative with the `c1 = 0` face folded to `c3 ≤ π/4`; invariant
    /// under every local unitary and every global phase.
    pub fn folded(&self) -> Self {
        let quarter = T::FRAC_PI_4();
        if self.c1 <= face_tol::<T>() && self.c3 > quarter {
            Self::new(self.c1, self.c2, T::FRAC_PI_2() - self.c3)
        } else {
            *self
        }
    }

    /// The canonical gate `e^{i(c1 XX + c2 YY + c3 ZZ)}`.
    pub fn gate(&self) -> ComplexMatrix<T> {
        crate::numerics::pauli::canonical_gate(self.c1, self.c2, self.c3)
    }
}

fn face_tol<T: Real>() -> T {
    T::epsilon().sqrt() * T::lit(0.1)
}

fn snap_tol<T: Real>() -> T {
    T::epsilon() * T::lit(64.0)
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

/// Columns are the magic states `Φ+`, `i Φ-`, `i Ψ+`, `Ψ-`.
pub fn magic_basis<T: Real>() -> ComplexMatrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let raw = [
        c(s, 0.0), c(0.0, s), c(0.0, 0.0), c(0.0, 0.0),
        c(0.0, 0.0), c(0.0, 0.0), c(0.0, s), c(s, 0.0),
        c(0.0, 0.0), c(0.0, 0.0), c(0.0, s), c(-s, 0.0),
        c(s, 0.0), c(0.0, -s), c(0.0, 0.0), c(0.0, 0.0),
    ];
    ComplexMatrix::from_vec(4, 4, raw.iter().map(|z| Complex::new(T::lit(z.re), T::lit(z.im))).collect())
}

fn check_gate<T: Real>(g: &ComplexMatrix<T>) -> Result<(), CanonicalError> {
    if g.rows() != 4 || g.cols() != 4 {
        return Err(CanonicalError::WrongShape {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    let residual = g.unitarity_defect();
    if !(residual <= T::UNITARY_TOL) {
        return Err(CanonicalError::NotUnitary {
            residual: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// `M^T M` with `M = B^dag G B`.
fn magic_gram<T: Real>(g: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let b = magic_basis::<T>();
    let m = &(&b.adjoint() * g) * &b;
    &m.transpose() * &m
}

fn wrap_half_pi<T: Real>(v: T) -> T {
    let period = T::FRAC_PI_2();
    let mut w = v % period;
    if w < T::zero() {
        w = w + period;
    }
    if period - w < snap_tol::<T>() || w < T::zero() {
        T::zero()
    } else {
        w
    }
}

fn diagonal_phases<T: Real>(c: [T; 3]) -> [T; 4] {
    let [c1, c2, c3] = c;
    [c1 - c2 + c3, -c1 + c2 + c3, c1 + c2 - c3, -c1 - c2 - c3]
}

/// Predicted `tr(m)` of the canonical gate for `(c1, c2, c3)`.
fn predicted_trace<T: Real>(c: [T; 3]) -> Complex<T> {
    diagonal_phases(c)
        .iter()
        .map(|&l| Complex::from_polar(T::one(), l + l))
        .sum()
}

/// Reduces raw angles to the tetrahedron modulo local equivalence and phase.
fn reduce_to_chamber<T: Real>(raw: [T; 3]) -> [T; 3] {
    let half = T::FRAC_PI_2();
    let r = raw.map(wrap_half_pi);
    let flips: [[bool; 3]; 4] = [
        [false, false, false],
        [true, true, false],
        [true, false, true],
        [false, true, true],
    ];
    let mut best: Option<(T, [T; 3])> = None;
    for f in flips {
        let mut cand = [T::zero(); 3];
        for k in 0..3 {
            cand[k] = if f[k] { wrap_half_pi(half - r[k]) } else { r[k] };
        }
        cand.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let excess = (cand[1] + cand[2] - half).max(T::zero());
        if best.as_ref().map_or(true, |(e, _)| excess < *e) {
            best = Some((excess, cand));
        }
    }
    best.map(|(_, c)| c).unwrap_or(r)
}

/// Classifying angles of a 4x4 unitary.
pub fn canonical_angles<T: Real>(g: &ComplexMatrix<T>) -> Result<CanonicalClass<T>, CanonicalError> {
    check_gate(g)?;
    let det = g.det();
    let root = Complex::from_polar(det.norm().powf(T::lit(0.25)), det.arg() / T::lit(4.0));
    let normalized = g.scale(root.inv());
    let m = magic_gram(&normalized);
    let eigs = normal_eigenvalues(&m, T::UNITARY_TOL)?;

    let mut lambda: Vec<T> = eigs.iter().map(|z| z.arg() / T::lit(2.0)).collect();
    // the phases must sum to a multiple of 2π; each is only known mod π
    let sum: T = lambda.iter().copied().sum();
    let turns = (sum / T::PI()).round();
    if (turns % T::lit(2.0)).abs() > T::lit(0.5) {
        lambda[0] = lambda[0] - T::PI();
    }
    let two = T::lit(2.0);
    let raw = [
        (lambda[0] + lambda[2]) / two,
        (lambda[1] + lambda[2]) / two,
        (lambda[0] + lambda[1]) / two,
    ];
    let [z, y, x] = reduce_to_chamber(raw);

    let mut c3 = x;
    if z < face_tol::<T>() && x > snap_tol::<T>() {
        let measured = m.trace();
        let alt = T::FRAC_PI_2() - x;
        let d_keep = (predicted_trace([z, y, x]) - measured).norm();
        let d_alt = (predicted_trace([z, y, alt]) - measured).norm();
        if d_alt < d_keep {
            c3 = alt;
        }
    }
    Ok(CanonicalClass::new(z.max(T::zero()), y, c3))
}

/// Makhlin local invariants `(g1, g2)`.
pub fn makhlin_invariants<T: Real>(g: &ComplexMatrix<T>) -> Result<(Complex<T>, T), CanonicalError> {
    check_gate(g)?;
    let m = magic_gram(g);
    let det = g.det();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (det.scale(T::lit(16.0)));
    let g2 = (tr * tr - tr2) / det.scale(T::lit(4.0));
    Ok((g1, g2.re))
}

/// Returns `c3` when the class is of the form `(0, 0, c)` within `tol`.
pub fn is_zz_class<T: Real>(class: &CanonicalClass<T>, tol: T) -> Option<T> {
    if class.c1.abs().max(class.c2.abs()) <= tol {
        Some(class.c3)
    } else {
        None
    }
}

/// `R_k` with `R_k e^{i c σk⊗σk} R_k^dag = e^{i c Z⊗Z}`.
///
/// Axis X uses `e^{iπ/4 Y} ⊗ e^{iπ/4 Y}` and axis Y uses
/// `e^{iπ/4 X} ⊗ e^{iπ/4 X}`; a rotation about σk itself would commute
/// with σk⊗σk.
pub fn local_rotation<T: Real>(axis: Axis) -> Result<ComplexMatrix<T>, CanonicalError> {
    let r = local_rotation_factor::<T>(axis)?;
    Ok(r.kron(&r))
}

/// The single-qubit factor of [`local_rotation`].
pub fn local_rotation_factor<T: Real>(axis: Axis) -> Result<ComplexMatrix<T>, CanonicalError> {
    let generator = match axis {
        Axis::X => Axis::Y,
        Axis::Y => Axis::X,
        Axis::Z => return Err(CanonicalError::UnsupportedAxis),
    };
    Ok(rotation::<T>(generator, T::FRAC_PI_4()))
}

fn periodic_gap<T: Real>(a: T, b: T) -> T {
    let period = T::FRAC_PI_2();
    let d = (a - b) % period;
    let d = if d < T::zero() { d + period } else { d };
    d.min(period - d)
}

/// Distance between two classes modulo all local unitaries and global
/// phase: the smallest max-coordinate difference over permutations, pair
/// sign flips and `π/2` shifts.
pub fn class_distance<T: Real>(a: &CanonicalClass<T>, b: &CanonicalClass<T>) -> T {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    const SIGNS: [[bool; 3]; 4] = [
        [false, false, false],
        [true, true, false],
        [true, false, true],
        [false, true, true],
    ];
    let a = a.as_array();
    let b = b.as_array();
    let mut best = T::infinity();
    for p in PERMS {
        for s in SIGNS {
            let d = (0..3)
                .map(|k| {
                    let v = if s[k] { -b[p[k]] } else { b[p[k]] };
                    periodic_gap(a[k], v)
                })
                .fold(T::zero(), T::max);
            best = best.min(d);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::pauli::{canonical_gate, two_body_rotation};
    use crate::sampling::{random_local, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    type M = ComplexMatrix<f64>;

    fn cnot() -> M {
        M::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
    }

    fn assert_class(got: CanonicalClass<f64>, want: [f64; 3], tol: f64) {
        let g = got.as_array();
        for k in 0..3 {
            assert!((g[k] - want[k]).abs() <= tol, "got {g:?}, want {want:?}");
        }
    }

    #[test]
    fn magic_basis_is_unitary() {
        assert!(magic_basis::<f64>().unitarity_defect() < 1e-15);
    }

    #[test]
    fn identity_and_cnot() {
        assert_class(canonical_angles(&M::identity(4)).unwrap(), [0.0, 0.0, 0.0], 1e-12);
        assert_class(canonical_angles(&cnot()).unwrap(), [0.0, 0.0, FRAC_PI_4], 1e-9);
        assert_eq!(is_zz_class(&canonical_angles(&cnot()).unwrap(), 0.0025 * std::f64::consts::PI).map(|c| (c - FRAC_PI_4).abs() < 1e-9), Some(true));
    }

    #[test]
    fn zz_family_reads_back() {
        let g = two_body_rotation::<f64>(Axis::Z, 0.13);
        assert_class(canonical_angles(&g).unwrap(), [0.0, 0.0, 0.13], 1e-8);
        for k in 0..100 {
            let c = k as f64 * FRAC_PI_2 / 100.0;
            let g = two_body_rotation::<f64>(Axis::Z, c);
            assert_class(canonical_angles(&g).unwrap(), [0.0, 0.0, c], 1e-8);
        }
    }

    #[test]
    fn other_axes_land_on_zz() {
        for axis in [Axis::X, Axis::Y] {
            let g = two_body_rotation::<f64>(axis, 0.37);
            assert_class(canonical_angles(&g).unwrap(), [0.0, 0.0, 0.37], 1e-8);
        }
    }

    #[test]
    fn generic_point_round_trips() {
        let g = canonical_gate(0.1, 0.25, 0.6);
        assert_class(canonical_angles(&g).unwrap(), [0.1, 0.25, 0.6], 1e-9);
        // mirror image of the above under the base fold
        let g = canonical_gate(0.1, 0.25, FRAC_PI_2 - 0.6);
        let cls = canonical_angles(&g).unwrap();
        assert!(class_distance(&cls, &CanonicalClass::new(0.1, 0.25, FRAC_PI_2 - 0.6)) < 1e-9);
    }

    #[test]
    fn local_conjugation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g: M = random_unitary(&mut rng, 4);
            let base = canonical_angles(&g).unwrap();
            let h = &(&random_local::<f64, _>(&mut rng) * &g) * &random_local(&mut rng);
            assert_class(canonical_angles(&h).unwrap(), base.as_array(), 1e-8);
        }
        for k in 0..20 {
            let c = 0.05 + k as f64 * 0.07;
            let g = two_body_rotation::<f64>(Axis::Z, c);
            let h = &(&random_local::<f64, _>(&mut rng) * &g) * &random_local(&mut rng);
            assert_class(canonical_angles(&h).unwrap(), [0.0, 0.0, c], 1e-8);
        }
    }

    #[test]
    fn phase_invariance_off_the_face() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let g: M = random_unitary(&mut rng, 4);
            let base = canonical_angles(&g).unwrap();
            let phi: f64 = rand::Rng::gen_range(&mut rng, -3.0..3.0);
            let h = g.scale(Complex::from_polar(1.0, phi));
            assert_class(canonical_angles(&h).unwrap(), base.as_array(), 1e-8);
        }
    }

    #[test]
    fn folded_class_is_phase_invariant_on_the_face() {
        let g = two_body_rotation::<f64>(Axis::Z, 1.2);
        for phi in [0.3, 1.0, 1.7, 2.9, -2.2] {
            let h = g.scale(Complex::from_polar(1.0, phi));
            let f = canonical_angles(&h).unwrap().folded();
            assert_class(f, [0.0, 0.0, FRAC_PI_2 - 1.2], 1e-8);
        }
    }

    #[test]
    fn makhlin_known_values() {
        let (g1, g2) = makhlin_invariants(&M::identity(4)).unwrap();
        assert!((g1 - Complex::new(1.0, 0.0)).norm() < 1e-12);
        assert!((g2 - 3.0).abs() < 1e-12);
        let (g1, g2) = makhlin_invariants(&cnot()).unwrap();
        assert!(g1.norm() < 1e-12);
        assert!((g2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary_and_wrong_shape() {
        let bad = M::identity(4).scale(Complex::new(1.1, 0.0));
        assert!(matches!(canonical_angles(&bad), Err(CanonicalError::NotUnitary { .. })));
        assert!(matches!(canonical_angles(&M::identity(2)), Err(CanonicalError::WrongShape { .. })));
        assert!(makhlin_invariants(&bad).is_err());
    }

    #[test]
    fn zz_filter() {
        let tol = 0.0025 * std::f64::consts::PI;
        assert_eq!(is_zz_class(&CanonicalClass::new(0.0, 0.0, 0.3), tol), Some(0.3));
        assert_eq!(is_zz_class(&CanonicalClass::new(0.01 * std::f64::consts::PI, 0.0, 0.3), tol), None);
    }

    #[test]
    fn local_rotations_map_axes_to_zz() {
        for axis in [Axis::X, Axis::Y] {
            let r = local_rotation::<f64>(axis).unwrap();
            assert!(r.unitarity_defect() < 1e-15);
            let got = &(&r * &two_body_rotation(axis, 0.2)) * &r.adjoint();
            assert!((&got - &two_body_rotation(Axis::Z, 0.2)).max_entry_norm() < 1e-12);
            let id = &(&r * &two_body_rotation(axis, 0.0)) * &r.adjoint();
            assert!((&id - &M::identity(4)).max_entry_norm() < 1e-15);
        }
        let ry = rotation::<f64>(Axis::X, FRAC_PI_4);
        assert!((ry.det() - Complex::new(1.0, 0.0)).norm() < 1e-15);
        assert!(local_rotation::<f64>(Axis::Z).is_err());
    }

    #[test]
    fn class_distance_respects_symmetries() {
        let a = CanonicalClass::new(0.0, 0.0, 0.3);
        assert!(class_distance(&a, &CanonicalClass::new(0.3, 0.0, 0.0)) < 1e-15);
        assert!(class_distance(&a, &CanonicalClass::new(0.0, 0.0, FRAC_PI_2 - 0.3)) < 1e-15);
        assert!(class_distance(&a, &CanonicalClass::new(0.0, 0.0, -0.3)) < 1e-15);
        assert!((class_distance(&a, &CanonicalClass::new(0.0, 0.0, 0.35)) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn single_precision_classification() {
        let g = two_body_rotation::<f32>(Axis::Z, 0.5);
        let cls = canonical_angles(&g).unwrap();
        assert!((cls.c3 - 0.5).abs() < 1e-4 && cls.c1.abs() < 1e-3);
    }
}
