//! Energy models: the asymptotic surface, finite-dimensional toy molecules
//! with their van der Waals coefficient, and the Feshbach map.

pub mod feshbach;
pub mod surface;
pub mod toy;

pub use feshbach::{feshbach_map, ground_state_energy_fixed_point, FeshbachSplit};
pub use surface::{surface_energy, EnergySurface, Landscape, VdwTerm};
pub use toy::{
    dipole_interaction_operator, pair_hamiltonian, vdw_coefficient, CMatrix, CVector, ToyMolecule, VdwResult,
};
