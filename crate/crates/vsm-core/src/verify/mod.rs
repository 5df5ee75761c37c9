//! Statistical and quadrature harness: simplex quadrature on the
//! stick-breaking chart, histogram binning on the simplex, TV/KS/moment/
//! chi-square tests, and machine-readable verification reports.

mod gauss;
mod grid;
mod quadrature;
mod report;
mod stats;

pub use grid::SimplexGrid;
pub use quadrature::{simplex_quadrature, Quadrature};
pub use report::{Direction, VerificationReport};
pub use stats::{
    binned_tv_distance, chi_square_gof, ks_critical_1pct, ks_statistic, moment_test,
};

pub(crate) use gauss::gauss_jacobi_01;
