//! Single-qubit Pauli matrices and helpers for one- and two-qubit operators.
//!
//! Basis ordering is `|0>, |1>` with `Z|0> = +|0>`.

use num_complex::Complex;

use super::ComplexMatrix;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

pub fn identity<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::identity(2)
}

pub fn sigma<T: Real>(axis: Axis) -> ComplexMatrix<T> {
    let o = T::zero();
    let l = T::one();
    let z = |re: T, im: T| Complex::new(re, im);
    let data = match axis {
        Axis::X => vec![z(o, o), z(l, o), z(l, o), z(o, o)],
        Axis::Y => vec![z(o, o), z(o, -l), z(o, l), z(o, o)],
        Axis::Z => vec![z(l, o), z(o, o), z(o, o), z(-l, o)],
    };
    ComplexMatrix::from_vec(2, 2, data)
}

/// `e^{i theta sigma_axis} = cos(theta) I + i sin(theta) sigma_axis`.
pub fn rotation<T: Real>(axis: Axis, theta: T) -> ComplexMatrix<T> {
    let cos = Complex::new(theta.cos(), T::zero());
    let isin = Complex::new(T::zero(), theta.sin());
    &identity::<T>().scale(cos) + &sigma::<T>(axis).scale(isin)
}

/// `sigma_axis ⊗ sigma_axis`.
pub fn two_body<T: Real>(axis: Axis) -> ComplexMatrix<T> {
    let s = sigma::<T>(axis);
    s.kron(&s)
}

/// `e^{i c sigma_axis ⊗ sigma_axis} = cos(c) I + i sin(c) sigma ⊗ sigma`.
pub fn two_body_rotation<T: Real>(axis: Axis, c: T) -> ComplexMatrix<T> {
    let cos = Complex::new(c.cos(), T::zero());
    let isin = Complex::new(T::zero(), c.sin());
    &ComplexMatrix::identity(4).scale(cos) + &two_body::<T>(axis).scale(isin)
}

/// `e^{i (c1 XX + c2 YY + c3 ZZ)}`; the three terms commute.
pub fn canonical_gate<T: Real>(c1: T, c2: T, c3: T) -> ComplexMatrix<T> {
    let xx = two_body_rotation(Axis::X, c1);
    let yy = two_body_rotation(Axis::Y, c2);
    let zz = two_body_rotation(Axis::Z, c3);
    &(&xx * &yy) * &zz
}
