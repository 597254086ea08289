//! Finite metric spaces, finite groups acting on them by permutations,
//! invariant pseudometrics and equivariant maps.

mod action;
mod family;
mod group;
mod metric;
mod space;

pub use action::{check_invariance, fixed_point_set, validate_action, GroupAction};
pub use family::PseudometricFamily;
pub use group::{
    check_permutation, compose, cycle_name, validate_group_table, FiniteGroup, Presentation,
    DEFAULT_ORDER_CAP,
};
pub use metric::{pseudometric_join, pseudometric_leq, validate_metric, FiniteMetric, MetricMode};
pub use space::{check_equivariance, pullback_pseudometric, EquivariantMap, FiniteGSpace};
