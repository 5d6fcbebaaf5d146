//! Probability and numerics kernel: distributions, copulas, quadrature,
//! root finding, random streams and a simplex optimizer.

pub mod copula;
pub mod dist;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod root;
pub mod special;

pub use copula::{copula_fn, CopulaFn, CopulaKind};
pub use dist::{dist_fn, DistFn, DistKind};
pub use quadrature::{integrate, integrate_adaptive, GaussLegendre};
pub use rng::{rng_stream, StreamRng};
pub use root::find_root;
