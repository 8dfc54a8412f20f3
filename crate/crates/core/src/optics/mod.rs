//! Linear-optical implementation of the singlet-projection measurement.

pub mod fock;
pub mod uv_box;

pub use fock::{Mode, Polarization, PolarizedFockState};
pub use uv_box::{
    box_povm, reconstruct_coincidence_operators, sample_uv_outcome, uv_box_distribution, BoxKind, BoxOutcome,
    BoxOutcomeDistribution, BoxPovm, DetectorModel,
};
