//! Two-qubit gate search and synthesis for a three-qubit segment of an
//! always-on Heisenberg chain, where only the on-site energies can be
//! switched.
//!
//! The numerical core ([`numerics`], [`hamiltonian`], [`canonical`]) is
//! generic over the scalar type; the search, synthesis and command-line
//! layers work in `f64`. The aliases below name the `f64` instances.

pub mod canonical;
pub mod cli;
pub mod hamiltonian;
pub mod numerics;
pub mod sampling;
pub mod scalar;
pub mod search;
pub mod synthesis;

pub use scalar::Real;

pub type Matrix = numerics::ComplexMatrix<f64>;
pub type Couplings = hamiltonian::CouplingPair<f64>;
pub type Energies = hamiltonian::OnSiteEnergies<f64>;
pub type Point = hamiltonian::ControlPoint<f64>;
pub type Class = canonical::CanonicalClass<f64>;
pub type Spectra = hamiltonian::BlockSpectra<f64>;
