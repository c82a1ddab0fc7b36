//! Numerical verification toolkit for the modified shallow-water system
//!
//! ```text
//! u_t + u u_x + G(1 + H/h) h_x = 0,    h_t + u h_x + h u_x = 0
//! ```
//!
//! covering its point symmetries, one-dimensional subalgebras, similarity
//! reductions, hodograph-linearized solutions and a finite-volume oracle.

pub mod algebra;
pub mod bessel;
pub mod error;
pub mod fvsolver;
pub mod hodograph;
pub mod model;
pub mod quad;
pub mod reduce;
pub mod solutions;
pub mod taylor;
pub mod vfield;

pub use algebra::{
    adjoint, commutator_table_check, normalize_g, normalize_g1, normalize_g1_printed,
    orbit_equivalent_g1, AlgebraElement, CanonicalClass, G1Element, Generator,
};
pub use error::{Error, Result};
pub use fvsolver::{
    convergence_order, l1_error, simulate, step, Boundary, Convergence, GridState,
};
pub use hodograph::{
    field_from_pair, invert_point, pair_from_f, verify_field, FieldCheck, HodographPair,
    InvertedField, PairValues, PathOrder, UhBox,
};
pub use model::{
    apply_discrete_symmetry, linearized_residual, mswe_residual, sample_manifold_jet,
    sample_manifold_jets, single_f_residual, DiscreteSymmetry, FPartials, FluidParams, JetPoint,
    Rect, SamplingBox, SolutionField,
};
pub use reduce::{
    case_iii_residual, integrate, integrate_case_i, lift_case_i, lift_case_ii,
    lift_general_ia, reduced_rhs_case_i, reduced_rhs_general, Halt, IntegrationOptions, Lifted,
    LogSign, ReducedState, ReducedSystem, Trajectory,
};
pub use solutions::{
    bessel_f, catalog, catalog_entry, constant_solution, galilean_solution, simple_pair,
    CatalogEntry, CatalogItem, EntryKind, SeparableF, CATALOG_IDS,
};
pub use taylor::Taylor;
pub use vfield::{
    determining_defect, invariance_defect, lie_bracket, prolong1, ProlongedCoefficients,
    VectorFieldSpec,
};
