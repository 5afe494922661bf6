//! Unit-speed reparametrisation of absolutely continuous paths under the
//! Kobayashi metric on model domains, with grid verification of the
//! almost-geodesic and chord-arc properties.
//!
//! ```
//! use kobpath::{fixtures, reparam};
//!
//! let path = fixtures::radial_path();
//! let result = reparam::unit_speed_reparametrize(&path, &Default::default()).unwrap();
//! assert!((result.length() - 0.5f64.atanh()).abs() < 1e-8);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod cvec;
pub mod error;
pub mod fixtures;
pub mod metric;
pub mod numerics;
pub mod paths;
pub mod properties;
pub mod reparam;

pub use error::{Error, Result};
pub use metric::{distance_via_path_optimization, royden_lower_bound, Domain};
pub use numerics::{OptConfig, QuadConfig};
pub use paths::Path;
pub use properties::{GeodesicParams, PropertyReport};
pub use reparam::{unit_speed_reparametrize, ReparamConfig, ReparamResult};
