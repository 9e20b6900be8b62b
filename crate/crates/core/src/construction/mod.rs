//! The counterexample `g_b` and its comparison function `Q_b`.

pub mod balance;
pub mod constants;
pub mod counterexample;
pub mod nodes;
pub mod properties;
pub mod trough;

pub use balance::{solve_alpha, solve_gamma, AlphaSolution, GammaSolution};
pub use constants::{compute_constants, ConstantsOptions, ConstructionConstants, InvariantCheck, Mode};
pub use counterexample::{
    b_for_degree, build_counterexample, build_counterexample_with_b, BuildOptions, ChainFlags, CounterexampleFunction,
    CumulativeTable,
};
pub use nodes::{normalize_nodes, MonotoneInterval, NodeSet};
pub use properties::{verify_properties, PropertyEntry, PropertyReport, Relation};
pub use trough::{TroughShape, TroughSide, TroughSpec};
