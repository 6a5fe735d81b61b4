//! Conversions between three descriptions of type II multiple orthogonal
//! polynomials for two (and more) measures: step-line recurrence
//! coefficients, nearest-neighbor recurrence coefficients, and the
//! three-term recurrences of each measure on its own.
//!
//! All arithmetic is exact over [`Rational`]. Decimal output is produced
//! only at the edge, with correct rounding.
//!
//! ```
//! use mopr::{bessel_stepline, forward, int, FreeParameter, sqrt_to_decimal};
//!
//! let level0 = bessel_stepline(&int(0), &int(0), 5).unwrap();
//! let out = forward(&level0, &FreeParameter::raw_seed(int(1)), 2).unwrap();
//! assert_eq!(sqrt_to_decimal(out.mu1.a_sq(1).unwrap(), 20).unwrap(), "1.7320508075688772935");
//! ```

pub mod catalog;
pub mod error;
pub mod inverse;
pub mod io;
pub mod nearest_neighbor;
pub mod numerics;
pub mod oracle;
pub mod poly;
pub mod stepline;

pub use catalog::{
    bessel_moments, bessel_stepline, convex_combination, moment_table, random_pair, random_system,
    DiscreteMeasure,
};
pub use error::{Axis, Error, Result};
pub use inverse::{
    compatibility_check, nn_from_marginals_general_r, nn_from_marginals_r2, pd_residuals,
    pd_residuals_r2, stepline_from_nn, MultiIndex, NNCoeffsR, NNGridR, Residual, SweepCheck,
    TransferMatrix,
};
pub use nearest_neighbor::{
    forward, marginal_mu1, marginal_mu2, nn_from_families, nn_from_shifts, ForwardResult,
    FreeParameter, MarginalRecurrence, NNCoeffs, NNGrid,
};
pub use numerics::{
    format_rational, int, parse_rational, rat, rational_to_decimal, sqrt_to_decimal, Rational,
    Real, Scalar, DEFAULT_DIGITS,
};
pub use oracle::{
    eval_nn, eval_nn_path, eval_stepline, mop_from_moments, nn_grid_oracle, nn_grid_oracle_r2,
    nn_oracle, orthogonality_residuals, stepline_oracle, MomentTable,
};
pub use poly::Poly;
pub use stepline::{
    riccati_closed_form, seed_c00, shift_e1, shift_e2, CSequence, ShiftFamily, StepLineCoeffs,
    UpdateOrder,
};
