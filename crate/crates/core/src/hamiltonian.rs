//! Three-qubit Heisenberg chain segment with always-on couplings.
//!
//! The Hamiltonian is
//!
//! ```text
//! H = E1 Z1 + E2 Z2 + E3 Z3 + J12 (σ1·σ2) + J23 (σ2·σ3)
//! ```
//!
//! on the basis `|q1 q2 q3>` (index `4 q1 + 2 q2 + q3`) with `Z|0> = +|0>`.
//! Qubit 2 is the controlled (mediator) qubit; qubits 1 and 3 carry the gate.
//!
//! The one-excitation sector `{|001>, |010>, |100>}` and the two-excitation
//! sector `{|110>, |101>, |011>}` are invariant; their 3x3 blocks are called
//! `U` and `V`. A control point decouples qubit 2 when the middle diagonal
//! entries of `e^{-iUτ}` and `e^{-iVτ}` both have unit modulus.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::numerics::{expm_i_hermitian, symmetric_eig3, ComplexMatrix, NumericsError};
use crate::scalar::Real;

/// Fixed nearest-neighbour couplings of the segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPair<T> {
    pub j12: T,
    pub j23: T,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HamiltonianError {
    #[error("couplings must be finite and non-zero (j12 = {j12}, j23 = {j23})")]
    InvalidCoupling { j12: f64, j23: f64 },
    #[error("on-site energies must be finite")]
    NonFiniteEnergy,
}

impl<T: Real> CouplingPair<T> {
    pub fn new(j12: T, j23: T) -> Result<Self, HamiltonianError> {
        let pair = Self { j12, j23 };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        let ok = |j: T| j.is_finite() && j != T::zero();
        if ok(self.j12) && ok(self.j23) {
            Ok(())
        } else {
            Err(HamiltonianError::InvalidCoupling {
                j12: self.j12.to_f64().unwrap_or(f64::NAN),
                j23: self.j23.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    pub fn max_abs(&self) -> T {
        self.j12.abs().max(self.j23.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnSiteEnergies<T> {
    pub e1: T,
    pub e2: T,
    pub e3: T,
}

impl<T: Real> OnSiteEnergies<T> {
    pub fn new(e1: T, e2: T, e3: T) -> Self {
        Self { e1, e2, e3 }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.e1, self.e2, self.e3]
    }

    pub fn from_array(e: [T; 3]) -> Self {
        Self::new(e[0], e[1], e[2])
    }

    pub fn negated(&self) -> Self {
        Self::new(-self.e1, -self.e2, -self.e3)
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|e| e.is_finite())
    }
}

/// A candidate `(E1, E2, E3, τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint<T> {
    pub energies: OnSiteEnergies<T>,
    pub tau: T,
}

impl<T: Real> ControlPoint<T> {
    pub fn new(e1: T, e2: T, e3: T, tau: T) -> Self {
        Self {
            energies: OnSiteEnergies::new(e1, e2, e3),
            tau,
        }
    }

    pub fn as_array(&self) -> [T; 4] {
        let [e1, e2, e3] = self.energies.as_array();
        [e1, e2, e3, self.tau]
    }
}

/// Basis indices of the one-excitation block, in the row order of `U`.
pub const U_BASIS: [usize; 3] = [0b001, 0b010, 0b100];
/// Basis indices of the two-excitation block, in the row order of `V`.
pub const V_BASIS: [usize; 3] = [0b110, 0b101, 0b011];

fn block<T: Real>(diag: [T; 3], c: &CouplingPair<T>) -> [[T; 3]; 3] {
    let two = T::lit(2.0);
    let z = T::zero();
    [
        [diag[0], two * c.j23, z],
        [two * c.j23, diag[1], two * c.j12],
        [z, two * c.j12, diag[2]],
    ]
}

/// Real entries of the one-excitation block `U`.
pub fn u_block<T: Real>(e: &OnSiteEnergies<T>, c: &CouplingPair<T>) -> [[T; 3]; 3] {
    let a1 = e.e1 + e.e2 - e.e3 + c.j12 - c.j23;
    let a2 = e.e1 - e.e2 + e.e3 - c.j12 - c.j23;
    let a3 = -e.e1 + e.e2 + e.e3 - c.j12 + c.j23;
    block([a1, a2, a3], c)
}

/// Real entries of the two-excitation block `V`.
pub fn v_block<T: Real>(e: &OnSiteEnergies<T>, c: &CouplingPair<T>) -> [[T; 3]; 3] {
    let b1 = -e.e1 - e.e2 + e.e3 + c.j12 - c.j23;
    let b2 = -e.e1 + e.e2 - e.e3 - c.j12 - c.j23;
    let b3 = e.e1 - e.e2 - e.e3 - c.j12 + c.j23;
    block([b1, b2, b3], c)
}

fn to_matrix<T: Real>(b: [[T; 3]; 3]) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(3, 3, |i, j| Complex::new(b[i][j], T::zero()))
}

pub fn build_u<T: Real>(e: &OnSiteEnergies<T>, c: &CouplingPair<T>) -> ComplexMatrix<T> {
    to_matrix(u_block(e, c))
}

pub fn build_v<T: Real>(e: &OnSiteEnergies<T>, c: &CouplingPair<T>) -> ComplexMatrix<T> {
    to_matrix(v_block(e, c))
}

/// Full 8x8 Hamiltonian built directly from Pauli algebra, independent of
/// the block formulas.
pub fn build_full_h<T: Real>(e: &OnSiteEnergies<T>, c: &CouplingPair<T>) -> ComplexMatrix<T> {
    let bit = |s: usize, q: usize| (s >> (2 - q)) & 1;
    let z = |b: usize| if b == 0 { T::one() } else { -T::one() };
    let energies = e.as_array();
    let mut h = ComplexMatrix::zeros(8, 8);
    for s in 0..8 {
        let mut diag = T::zero();
        for q in 0..3 {
            diag = diag + energies[q] * z(bit(s, q));
        }
        for (q, j) in [(0, c.j12), (1, c.j23)] {
            let (a, b) = (bit(s, q), bit(s, q + 1));
            // σ·σ = ZZ + (XX + YY); XX + YY = 2 (flip) on antiparallel pairs
            diag = diag + j * z(a) * z(b);
            if a != b {
                let flipped = s ^ (1 << (2 - q)) ^ (1 << (1 - q));
                h[(flipped, s)] = h[(flipped, s)] + Complex::new(T::lit(2.0) * j, T::zero());
            }
        }
        h[(s, s)] = h[(s, s)] + Complex::new(diag, T::zero());
    }
    h
}

/// Eigensystems of `U` and `V` at fixed energies; evaluating at many `τ`
/// reuses them.
#[derive(Debug, Clone, Copy)]
pub struct BlockSpectra<T> {
    u_vals: [T; 3],
    u_vecs: [[T; 3]; 3],
    v_vals: [T; 3],
    v_vecs: [[T; 3]; 3],
}

fn propagator_entry<T: Real>(vals: &[T; 3], vecs: &[[T; 3]; 3], i: usize, j: usize, tau: T) -> Complex<T> {
    (0..3)
        .map(|k| Complex::from_polar(vecs[i][k] * vecs[j][k], -vals[k] * tau))
        .sum()
}

fn propagator3<T: Real>(vals: &[T; 3], vecs: &[[T; 3]; 3], tau: T) -> [[Complex<T>; 3]; 3] {
    let mut out = [[Complex::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = propagator_entry(vals, vecs, i, j, tau);
        }
    }
    out
}

impl<T: Real> BlockSpectra<T> {
    pub fn new(e: &OnSiteEnergies<T>, c: &CouplingPair<T>) -> Self {
        let (u_vals, u_vecs) = symmetric_eig3(u_block(e, c));
        let (v_vals, v_vecs) = symmetric_eig3(v_block(e, c));
        Self {
            u_vals,
            u_vecs,
            v_vals,
            v_vecs,
        }
    }

    pub fn u22(&self, tau: T) -> Complex<T> {
        propagator_entry(&self.u_vals, &self.u_vecs, 1, 1, tau)
    }

    pub fn v22(&self, tau: T) -> Complex<T> {
        propagator_entry(&self.v_vals, &self.v_vecs, 1, 1, tau)
    }

    pub fn objective(&self, tau: T) -> T {
        self.u22(tau).norm_sqr() + self.v22(tau).norm_sqr()
    }

    /// `e^{-iUτ}` and `e^{-iVτ}` as 3x3 arrays.
    pub fn propagators(&self, tau: T) -> ([[Complex<T>; 3]; 3], [[Complex<T>; 3]; 3]) {
        (
            propagator3(&self.u_vals, &self.u_vecs, tau),
            propagator3(&self.v_vals, &self.v_vecs, tau),
        )
    }
}

/// Decoupling objective `|[e^{-iUτ}]_22|^2 + |[e^{-iVτ}]_22|^2`, in `[0, 2]`.
pub fn objective<T: Real>(p: &ControlPoint<T>, c: &CouplingPair<T>) -> T {
    BlockSpectra::new(&p.energies, c).objective(p.tau)
}

/// Largest modulus among the row-2 and column-2 off-diagonal entries of
/// both block propagators.
pub fn leakage<T: Real>(p: &ControlPoint<T>, c: &CouplingPair<T>) -> T {
    let (u, v) = BlockSpectra::new(&p.energies, c).propagators(p.tau);
    leakage_of(&u).max(leakage_of(&v))
}

fn leakage_of<T: Real>(w: &[[Complex<T>; 3]; 3]) -> T {
    [w[0][1], w[2][1], w[1][0], w[1][2]]
        .iter()
        .map(|z| z.norm())
        .fold(T::zero(), T::max)
}

/// Two-qubit operation on `(q1, q3)` with `q2` in `|0>`.
#[derive(Debug, Clone)]
pub struct ConditionalGate<T> {
    /// 4x4 on `|00>, |01>, |10>, |11>`.
    pub n: ComplexMatrix<T>,
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
}

impl<T: Real> ConditionalGate<T> {
    /// Middle block entries `[n11, n13, n31, n33]` in the block numbering of `U`.
    pub fn middle_entries(&self) -> [Complex<T>; 4] {
        [self.n[(1, 1)], self.n[(1, 2)], self.n[(2, 1)], self.n[(2, 2)]]
    }
}

/// Assembles the two-qubit gate from the block propagators.
///
/// `alpha` is the phase of `|000>`, taken from the diagonal of the full
/// Hamiltonian: `E1 + E2 + E3 + J12 + J23`.
pub fn build_n<T: Real>(p: &ControlPoint<T>, c: &CouplingPair<T>) -> ConditionalGate<T> {
    let (u, v) = BlockSpectra::new(&p.energies, c).propagators(p.tau);
    let e = &p.energies;
    let alpha = Complex::from_polar(T::one(), -(e.e1 + e.e2 + e.e3 + c.j12 + c.j23) * p.tau);
    let beta = v[1][1];
    let mut n = ComplexMatrix::zeros(4, 4);
    n[(0, 0)] = alpha;
    n[(1, 1)] = u[0][0];
    n[(1, 2)] = u[0][2];
    n[(2, 1)] = u[2][0];
    n[(2, 2)] = u[2][2];
    n[(3, 3)] = beta;
    ConditionalGate { n, alpha, beta }
}

/// `e^{-iHτ}` of the full 8x8 Hamiltonian.
pub fn full_propagator<T: Real>(p: &ControlPoint<T>, c: &CouplingPair<T>) -> Result<ComplexMatrix<T>, NumericsError> {
    expm_i_hermitian(&build_full_h(&p.energies, c), p.tau)
}

/// Entries `<a 0 b| P |c 0 d>` of an 8x8 operator as a 4x4 on `(q1, q3)`.
pub fn conditional_block<T: Real>(p8: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let idx = |k: usize| ((k >> 1) << 2) | (k & 1);
    ComplexMatrix::from_fn(4, 4, |i, j| p8[(idx(i), idx(j))])
}

/// Objective and leakage recomputed from the 8x8 propagator.
pub fn oracle_objective<T: Real>(p8: &ComplexMatrix<T>) -> T {
    p8[(0b010, 0b010)].norm_sqr() + p8[(0b101, 0b101)].norm_sqr()
}

pub fn oracle_leakage<T: Real>(p8: &ComplexMatrix<T>) -> T {
    let mut worst = T::zero();
    for basis in [U_BASIS, V_BASIS] {
        let mid = basis[1];
        for &other in [basis[0], basis[2]].iter() {
            worst = worst.max(p8[(mid, other)].norm()).max(p8[(other, mid)].norm());
        }
    }
    worst
}

/// Sum of `|P_ij|` across the four invariant sectors; zero for an exact
/// propagator of the chain.
pub fn sector_mixing<T: Real>(p8: &ComplexMatrix<T>) -> T {
    let sector = |s: usize| s.count_ones();
    let mut worst = T::zero();
    for i in 0..8 {
        for j in 0..8 {
            if sector(i) != sector(j) {
                worst = worst.max(p8[(i, j)].norm());
            }
        }
    }
    worst
}

impl<T: Real> Default for CouplingPair<T> {
    fn default() -> Self {
        Self {
            j12: T::one(),
            j23: T::one(),
        }
    }
}
