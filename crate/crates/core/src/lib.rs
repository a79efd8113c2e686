//! Non-Hermitian tight-binding lattices with unidirectional hopping.
//!
//! Spectra and exceptional points ([`spectral`]), time evolution
//! ([`dynamics`]), the flux-threaded ring ([`floquet`]) and the synthesis of
//! unidirectional hopping by modulation ([`engineering`]).

pub mod cli;
pub mod dynamics;
pub mod eigen;
pub mod engineering;
pub mod error;
pub mod floquet;
pub mod lattice;
pub mod ode;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
pub use lattice::{
    build_hamiltonian, hamiltonian_at, rhs, Geometry, HamiltonianMatrix, LatticeSpec, StateVector, Window, C64,
};
