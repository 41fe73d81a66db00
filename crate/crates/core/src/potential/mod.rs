//! Riesz kernels and energies, capacities, Hausdorff pre-measures, and the
//! anisotropic grids and integral bounds used for hitting estimates.

mod capacity;
mod hausdorff;
mod lemma;
mod riesz;
mod sets;

pub use capacity::{capacity, capacity_of_cells, CapacityOptions, CapacityResult};
pub use hausdorff::{hausdorff_premeasure, Ball, Covering, HausdorffEstimate, HAUSDORFF_LEVELS};
pub use lemma::{
    anisotropic_grid, anisotropic_steps, dimension_thresholds, lemma_integral, lemma_integral_check, lemma_ladder,
    lemma_polar_bound, AnisotropicGrid, LemmaPoint, LemmaSetup, Rectangle, Regime, Thresholds, Window, MAX_RECTANGLES,
};
pub use riesz::{cell_self_energy, energy, k_kernel, DiscreteMeasure, EnergyMode, RieszOrder};
pub use sets::{BoxSpec, Cell, CompactSetSpec, MAX_SAMPLE_POINTS};
