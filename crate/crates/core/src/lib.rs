//! Simulation of single-photon interaction-free measurement schemes.
//!
//! * [`qstate`]: photon ⊗ object state vectors, partial trace, Hermitian
//!   eigensolver and von Neumann entropy.
//! * [`interferometer`]: staged Mach-Zehnder evolution, detector statistics,
//!   post-selected object states and entanglement curves.
//! * [`dicke`]: the two-particle probe/target collision model.
//! * [`montecarlo`]: seeded single-shot sampling of detector outcomes.
//! * [`cli`]: the `ifm` command-line front end.

pub mod cli;
pub mod dicke;
pub mod interferometer;
pub mod montecarlo;
pub mod qstate;

pub use interferometer::{
    DetectorDistribution, EVConfig, EntanglementPair, InteractionSpec, Outcome, StageTrace,
};
pub use qstate::{ComplexAmplitude, JointState, ObjectState, ObjectVector, PhotonMode, Subsystem};
