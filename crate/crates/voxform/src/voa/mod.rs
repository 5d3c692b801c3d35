//! Truncated rank-one Heisenberg vertex algebra: states, modes and correlators.

mod axioms;
mod context;
mod correlator;
mod fock;
mod state;
mod wick;

pub use axioms::{check_axioms, check_axioms_with, duality_points, AxiomOptions};
pub use context::{mode_apply, vertex_apply, virasoro_apply, SparseOperator, VOAContext};
pub use correlator::{
    check_radial_order, correlator_exact, correlator_resummed, correlator_series, is_vacuum_multiple, matrix_element, multi_matrix_element, radial_sort, Certificate,
    Insertion, LevelSeries,
};
pub use fock::{field_coefficient, field_forward, field_transpose, gbinom, heisenberg_mode};
pub use state::{DualVector, GradedVector, PartitionState};
