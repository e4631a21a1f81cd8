//! Simulation of a three-microring nonlinear sign gate and the heralded CNOT
//! built from two of them.
//!
//! The crate goes from single rings ([`ring`]) to the three-ring scattering
//! matrix ([`network`]), evaluates the gate constraints and optimal
//! parameters ([`nlpsg`], [`manifold`]), lifts linear optics to photon-number
//! states ([`fock`]) and assembles the CNOT ([`cnot`]).

pub mod cli;
pub mod cnot;
pub mod error;
pub mod fock;
pub mod manifold;
pub mod network;
pub mod nlpsg;
pub mod permanent;
pub mod ring;

pub use cnot::{build_cnot, verify_coherence, verify_truth_table, CnotNetwork, DualRailQubit};
pub use error::{Error, Result};
pub use fock::{evolve, lift_unitary, project, MeasurementPattern, NlpsgInput, SectoredState};
pub use manifold::{intersect_delta2, ManifoldSample};
pub use network::{
    closed_form_resonant, compose_scattering, scattering_matrix, solve_scattering, NetworkParams,
    ScatteringMatrix,
};
pub use nlpsg::{verdict, NlpsgVerdict, OptimalPoint, T_MIDDLE, T_OUTER};
pub use ring::{RingCoupler, RingSlot};
