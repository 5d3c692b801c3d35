//! Module-valued rational forms: evaluation, regions, reconstruction and structural checks.

mod checks;
mod estimate;
mod eval;
mod input;
mod rational;
mod region;
mod wform;

pub use checks::{
    check_correl_fn, check_l0_conjugation, check_lminus1_property, check_permutation_invariance, check_pole_bounds,
    composability_series_i, composability_series_j, eval_e, eval_e_series, eval_intertwining, permutation_sign, permute_form,
    reconstruct_form, sample_configurations, scale_by_weight, scale_dual_by_weight, slot_function, slot_function_with,
    ConvergenceReport, PermutedForm,
};
pub use estimate::Estimate;
pub use eval::{certified, eval, exact_correlator, series_correlator, EvalMode, EvalOptions, FormKind, Outer, Side};
pub use input::{lminus1_transpose, translate_dual, SlotInput};
pub use rational::{reconstruct_rational, Locus, PoleAnsatz, RationalReconstruction, UnivariateRational};
pub use region::{Constraint, Gap, RegionSpec};
pub use wform::{Slot, WForm};
