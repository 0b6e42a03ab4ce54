//! Minimal surfaces in the solvable groups `G(mu1, mu2)` from Weierstrass
//! data `(f, g)`, a heat-flow solver for the Gauss map and finite-difference
//! verification of the resulting immersions.

// `!(x > t)` is used on purpose so that NaN takes the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod cli;
pub mod error;
pub mod expr;
pub mod gaussdata;
pub mod grid;
pub mod heatflow;
pub mod integrator;
pub mod io;
pub mod stencil;
pub mod targetmetric;
pub mod util;
pub mod verify;

pub use ambient::{FrameVector, GroupPoint, Params};
pub use error::{Error, Result};
pub use gaussdata::{GaussData, NormalVector, PhiTriple};
pub use grid::{ComplexField, ComplexGrid, Field, RealField};
pub use heatflow::{BoundaryValues, FlowConfig, FlowResult, SolSurface};
pub use integrator::{Immersion, IntegrateOptions, PathOrder, PathReport};
pub use num_complex;
pub use stencil::StencilOrder;
pub use targetmetric::{JetSample, MetricKind, SingularMetric};
pub use verify::SurfaceReport;
