use num_complex::Complex;
use num_traits::Zero;

use super::{ComplexMatrix, NumericsError};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigensystem `M = Q diag(values) Q^dag` of a Hermitian matrix, eigenvalues
/// ascending and eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `e^{-i M t}` from the stored eigensystem.
    pub fn propagator(&self, t: T) -> ComplexMatrix<T> {
        self.spectral_map(|lambda| Complex::from_polar(T::one(), -lambda * t))
    }

    /// `Q f(diag) Q^dag` for an arbitrary scalar function of the eigenvalues.
    pub fn spectral_map(&self, f: impl Fn(T) -> Complex<T>) -> ComplexMatrix<T> {
        let n = self.values.len();
        let q = &self.vectors;
        let fv: Vec<Complex<T>> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| q[(i, k)] * fv[k] * q[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.spectral_map(|l| Complex::new(l, T::zero()))
    }
}

/// Cyclic complex Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let defect = m.hermitian_defect();
    let scale = m.max_entry_norm().max(T::one());
    if !(defect <= T::HERMITIAN_TOL * scale) {
        return Err(NumericsError::NotHermitian {
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = m.rows();
    let half = T::lit(0.5);
    // work on the exactly Hermitian part
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()).scale(half));
    let mut v = ComplexMatrix::identity(n);

    let total: T = a.entries().iter().map(|z| z.norm_sqr()).sum();
    let threshold = T::JACOBI_EPS * T::JACOBI_EPS * total.max(T::min_positive_value());

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == T::zero() {
                    continue;
                }
                rotate(&mut a, &mut v, p, q, apq, r);
            }
        }
    }
    if !converged {
        return Err(NumericsError::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

fn rotate<T: Real>(
    a: &mut ComplexMatrix<T>,
    v: &mut ComplexMatrix<T>,
    p: usize,
    q: usize,
    apq: Complex<T>,
    r: T,
) {
    let n = a.rows();
    let phase = apq.unscale(r);
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (r + r);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    // P = [[c, s e^{i phi}], [-s e^{-i phi}, c]] on (p, q)
    let s_fwd = phase.scale(s);
    let s_bwd = phase.conj().scale(s);
    let col = |m: &mut ComplexMatrix<T>| {
        for k in 0..n {
            let mkp = m[(k, p)];
            let mkq = m[(k, q)];
            m[(k, p)] = mkp.scale(c) - mkq * s_bwd;
            m[(k, q)] = mkp * s_fwd + mkq.scale(c);
        }
    };
    col(a);
    col(v);
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk.scale(c) - aqk * s_fwd;
        a[(q, k)] = apk * s_bwd + aqk.scale(c);
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
}

/// `e^{-i M t}` for Hermitian `M`.
pub fn expm_i_hermitian<T: Real>(m: &ComplexMatrix<T>, t: T) -> Result<ComplexMatrix<T>, NumericsError> {
    if !t.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    Ok(hermitian_eig(m)?.propagator(t))
}

/// Eigensystem of a real symmetric 3x3 matrix; columns of the returned
/// matrix are the eigenvectors. Eigenvalues are not sorted.
///
/// This is the inner loop of the decoupling search, so it avoids the
/// general complex path.
pub fn symmetric_eig3<T: Real>(m: [[T; 3]; 3]) -> ([T; 3], [[T; 3]; 3]) {
    let mut a = m;
    let mut v = [[T::zero(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let total = a.iter().flatten().map(|&x| x * x).sum::<T>();
    let threshold = T::JACOBI_EPS * T::JACOBI_EPS * total.max(T::min_positive_value());
    for _ in 0..MAX_SWEEPS {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off <= threshold {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (apq + apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            a[p][q] = T::zero();
            a[q][p] = T::zero();
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Nearest unitary in the polar sense, `W (W^dag W)^{-1/2}`, together with
/// the max-entry distance moved.
pub fn nearest_unitary<T: Real>(w: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, T), NumericsError> {
    let gram = &w.adjoint() * w;
    let eig = hermitian_eig(&gram)?;
    if eig.values.iter().any(|&l| !(l > T::zero())) {
        return Err(NumericsError::Singular);
    }
    let inv_sqrt = eig.spectral_map(|l| Complex::new(T::one() / l.sqrt(), T::zero()));
    let u = w * &inv_sqrt;
    let dist = (w - &u).max_entry_norm();
    Ok((u, dist))
}

/// Eigenvalues of a normal matrix (here: symmetric unitaries) via the
/// commuting Hermitian parts `(M + M^dag)/2` and `(M - M^dag)/2i`.
///
/// A generic real combination of the two parts is diagonalised and each
/// eigenvalue is read back as a Rayleigh quotient; the first combination
/// whose eigenvectors leave a residual below `tol` wins.
pub fn normal_eigenvalues<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Result<Vec<Complex<T>>, NumericsError> {
    let n = m.rows();
    let adj = m.adjoint();
    let half = T::lit(0.5);
    let re_part = (m + &adj).scale(Complex::new(half, T::zero()));
    let im_part = (m - &adj).scale(Complex::new(T::zero(), -half));
    let mut best: Option<(T, Vec<Complex<T>>)> = None;
    for kappa in [0.577_215_664_901_532_9, 1.618_033_988_749_895, -0.414_213_562_373_095_1, 2.718_281_828_459_045] {
        let h = &re_part + &im_part.scale(Complex::new(T::lit(kappa), T::zero()));
        let eig = hermitian_eig(&h)?;
        let q = &eig.vectors;
        let mut residual = T::zero();
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            let mv: Vec<Complex<T>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] * q[(j, k)]).sum()).collect();
            let mu: Complex<T> = (0..n).map(|i| q[(i, k)].conj() * mv[i]).sum();
            let res = (0..n).map(|i| (mv[i] - mu * q[(i, k)]).norm()).fold(T::zero(), T::max);
            residual = residual.max(res);
            values.push(mu);
        }
        if residual <= tol {
            return Ok(values);
        }
        if best.as_ref().map_or(true, |(r, _)| residual < *r) {
            best = Some((residual, values));
        }
    }
    // every combination hit a near-coincidence; return the least bad
    Ok(best.map(|(_, v)| v).unwrap_or_default())
}
