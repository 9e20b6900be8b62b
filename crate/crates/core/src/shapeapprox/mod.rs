//! Best trigonometric approximation with and without comonotonicity
//! constraints, and the ratio experiment built on it.

pub mod approx;
pub mod lp;
pub mod ratio;

pub use approx::{best_comonotone, best_unconstrained, ApproxGrids, ApproxResult, MonotonicityPattern, PatternInterval};
pub use lp::{lp_solve, Constraint, LinearProgram, LpOptions, LpSolution, LpStatus, RowRelation, VarBound};
pub use ratio::{ratio_experiment, ratio_row, BoundTerms, RatioOptions, RatioRow, RatioTable, RowOutcome};
