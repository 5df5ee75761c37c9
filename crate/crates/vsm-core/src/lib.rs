//! Volatility-stabilized markets, squared Bessel vectors, and Wright-Fisher
//! diffusions: exact simulation, closed-form densities, and a statistical
//! verification harness that cross-checks one against the other.
//!
//! The library is organized around a handful of tightly related objects:
//!
//! * [`besq`] — exact transition sampling for squared Bessel (BESQ)
//!   processes, path simulation, and first exit of the vector process from
//!   the unit simplex.
//! * [`green`] — the inversion map, Kelvin transform, potential kernel
//!   `u(x,y)` and Green kernel `v(x,y)` of the BESQ vector on the simplex.
//! * [`density`] — closed-form densities: the exit density on the oblique
//!   face of the simplex, the market-weight density at sum-hitting times,
//!   and the lognormal first-passage density of the total market.
//! * [`diffusion`] — Wright-Fisher SDE paths, the skew-product construction
//!   from BESQ vectors, volatility-stabilized market paths by time change,
//!   and sub-market weights.
//! * [`transition`] — the Wright-Fisher transition density assembled from
//!   Laplace-inverted mixture coefficients `b_m(t)`.
//! * [`verify`] — simplex quadrature, histogram binning, and the
//!   TV/KS/moment/chi-square tests used to validate everything above.
//! * [`checks`] — named end-to-end verification suites returning
//!   machine-readable reports.

pub mod besq;
pub mod checks;
pub mod density;
pub mod diffusion;
pub mod dirichlet;
pub mod error;
pub mod green;
pub mod mc;
mod mixture;
pub mod params;
pub mod path;
pub mod rng;
pub mod scaled;
pub mod series;
pub mod simplex;
pub mod special;
pub mod transition;
pub mod verify;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use path::Path;
pub use rng::RngStream;
pub use series::SeriesControl;
pub use simplex::{QuadrantPoint, SimplexPoint};
