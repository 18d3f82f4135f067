//! Minimum distance estimation for linear regression by coordinate-wise
//! minimization of the Cramér–von Mises `L2` distance with Lebesgue
//! integration.
//!
//! For the model `y_i = x_i' beta + e_i` with errors symmetric around zero,
//! the estimator minimizes
//!
//! ```text
//! L(b) = sum_k ∫ [ sum_i d_ik { I(y_i - x_i'b <= t) - I(-y_i + x_i'b < t) } ]^2 dt
//! ```
//!
//! which has a closed form as a double sum over observation pairs
//! ([`distance`]). Along any single coordinate the distance is piecewise
//! linear, so each coordinate step can be solved exactly by scanning the
//! kinks for sign changes of the slope ([`solver`]).
//!
//! ```
//! use mde_core::{default_weights, fit, RegressionData, SolverConfig};
//!
//! let data = RegressionData::from_rows(&[vec![1.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
//! let res = fit(&data, &default_weights(&data), &SolverConfig::default()).unwrap();
//! assert_eq!(res.estimate.to_vec(), vec![2.0]);
//! assert_eq!(res.loss, 0.0);
//! ```

pub mod bench;
pub mod distance;
pub mod error;
pub mod exec;
pub mod model;
pub mod oracle;
pub mod solver;

pub use distance::{build_pair_tables, loss, PairTables};
pub use error::{MdeError, Result};
pub use model::{
    default_weights, load_csv, load_weights, read_csv, simulate, write_csv, ColumnRef, ErrorDist,
    FitResult, ParameterVector, RegressionData, WeightMatrix,
};
pub use solver::{
    candidate_zeros, coordinate_objective, coordinate_slice, coordinate_update, derivative_at, fit,
    slope_profile, CandidateGrid, CoordinateSlice, Init, SlopeProfile, SolverConfig, Term,
};
