//! Cubic spline super fractal interpolation functions (SFIFs).
//!
//! A pool of `M` iterated function systems shares one set of equidistant
//! interpolation data. Each IFS `k` pairs the affine maps `L_n` with cubic
//! vertical maps `G_{n,k}(x, y) = γ_k y + q_n(γ_k, x)` chosen so that its
//! attractor is a `C²` cubic spline FIF. A code word `σ` selects which IFS
//! acts at every level, producing the super fractal interpolant `g_σ`.
//!
//! Modules:
//! - [`model`]: interpolation data, maps, the pool, code words, addresses
//! - [`spline`]: the per-IFS spline construction and the Lipschitz constants
//! - [`eval`]: backward (nested) and forward (set iteration) evaluation
//! - [`analysis`]: bound right-hand sides, `γ(h)` schedules, convergence studies
//! - [`io`]: model files, CSV tables and SVG plots
//! - [`functions`]: analytic data-generating functions

pub mod analysis;
pub mod error;
pub mod eval;
pub mod functions;
pub mod io;
pub mod model;
pub mod spline;

pub use error::{Result, SfifError};
pub use eval::{Depth, EvalRequest, SampleSet};
pub use model::{AffineMap, CodeWord, CubicPoly, InterpolationData, Sifs, VerticalMap};
pub use spline::{BoundConstants, BoundaryCondition, SplineModel};
