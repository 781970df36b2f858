//! Tavis-Cummings cavity QED toolbox.
//!
//! N two-level atoms couple to one cavity mode that leaks into a
//! semi-infinite waveguide. The crate covers the standard workflows for
//! that system:
//!
//! * dense Hamiltonians on a truncated Fock space ([`operators`]),
//! * the single-excitation linear input-output model, its transfer
//!   function, and controllability tests ([`linear`]),
//! * the orthogonal dark/bright decomposition that splits the atomic
//!   ensemble into decoupled and collectively coupled parts
//!   ([`decompose`]),
//! * scattering of a single-photon pulse and the closed-form decay of a
//!   single initial excitation ([`response`], [`excitation`]),
//! * the driven Lindblad master equation with a single-photon Fock
//!   hierarchy ([`master`]),
//! * multi-photon emission statistics via coarse-grained time-bin
//!   propagation ([`multiphoton`]).
//!
//! Conventions: hbar = 1, all frequencies are detunings from the rotating
//! frame, the cavity decay operator is sqrt(kappa) a, and basis states
//! order atom 1 as the most significant bit followed by the photon
//! number.

pub mod basis;
pub mod decompose;
pub mod error;
pub mod excitation;
pub mod expm;
pub mod linear;
pub mod master;
pub mod multiphoton;
pub mod operators;
pub mod params;
pub mod pulse;
pub mod response;

pub use basis::TruncatedBasis;
pub use decompose::Decomposition;
pub use error::{Error, Result};
pub use excitation::{SingleExcitationState, SuperpositionState};
pub use expm::matrix_exp;
pub use linear::{LinearModel, TransferEval};
pub use master::{FockHierarchy, FockTrajectory, MasterTrajectory};
pub use multiphoton::{
    EffectiveHamiltonian, PlotDensity, Propagator, SectorNorms, SectorWavefunction,
    SteadyOutputState, TransitionMatrix,
};
pub use params::SystemParams;
pub use pulse::{PulseShape, TimeGrid};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix representing an operator on the truncated basis.
pub type OperatorMatrix = nalgebra::DMatrix<C64>;

/// Dense complex matrix holding a density operator.
pub type DensityMatrix = nalgebra::DMatrix<C64>;
