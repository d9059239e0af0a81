//! Brownian paths, Poisson rain, random polytope hulls and the wedge
//! geometry behind the smoothness argument for the convex hull of planar and
//! higher-dimensional Brownian motion, with the Monte Carlo estimators and
//! closed-form integrals used to check its quantitative bounds.
//!
//! The geometric and path code is generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the precision. Monte Carlo estimators work in `f64`.

pub mod error;
pub mod hull;
pub mod integrals;
pub mod linalg;
pub mod mc;
pub mod paths;
pub mod rain;
pub mod rng;
pub mod scalar;
pub mod wedge;

pub use error::{Error, Result};
pub use hull::{build_hull, Facet, Polytope, SimplexTimes};
pub use paths::{BridgeSpec, PathSample, TimeGrid};
pub use rain::{Rain, RainLevel, RainPoint};
pub use rng::SimRng;
pub use scalar::Scalar;
pub use wedge::{AmbientWedge, FacetGeom, Wedge2D, WedgePair};

pub type TimeGrid64 = TimeGrid<f64>;
pub type TimeGrid32 = TimeGrid<f32>;
pub type PathSample64 = PathSample<f64>;
pub type PathSample32 = PathSample<f32>;
pub type Rain64 = Rain<f64>;
pub type Rain32 = Rain<f32>;
pub type RainLevel64 = RainLevel<f64>;
pub type RainLevel32 = RainLevel<f32>;
pub type Polytope64 = Polytope<f64>;
pub type Polytope32 = Polytope<f32>;
pub type Wedge2D64 = Wedge2D<f64>;
pub type Wedge2D32 = Wedge2D<f32>;
pub type WedgePair64 = WedgePair<f64>;
pub type WedgePair32 = WedgePair<f32>;
