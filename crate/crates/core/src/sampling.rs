//! Random matrices for property checks and search jitter.

use num_complex::Complex;
use rand::Rng;

use crate::numerics::{expm_i_hermitian, ComplexMatrix};
use crate::scalar::Real;

/// Hermitian matrix with entries uniform in `[-scale, scale]`.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex::new(T::lit(rng.gen_range(-scale..scale)), T::zero());
        for j in i + 1..n {
            let z = Complex::new(
                T::lit(rng.gen_range(-scale..scale)),
                T::lit(rng.gen_range(-scale..scale)),
            );
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Unitary `e^{-iH}` for a random Hermitian `H` with O(π) spectrum.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix<T> {
    let h = random_hermitian::<T, R>(rng, n, std::f64::consts::PI);
    expm_i_hermitian(&h, T::one()).expect("random Hermitian is Hermitian")
}

/// Uniformly random element of SU(2) from a unit quaternion.
pub fn random_su2<T: Real, R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix<T> {
    let q: [f64; 4] = loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            break v.map(|x| x / n);
        }
    };
    let a = Complex::new(T::lit(q[0]), T::lit(q[1]));
    let b = Complex::new(T::lit(q[2]), T::lit(q[3]));
    ComplexMatrix::from_vec(2, 2, vec![a, -b.conj(), b, a.conj()])
}

/// `L1 ⊗ L2` with both factors random in SU(2).
pub fn random_local<T: Real, R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix<T> {
    random_su2::<T, R>(rng).kron(&random_su2(rng))
}
