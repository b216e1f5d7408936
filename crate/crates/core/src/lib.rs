//! Travelling fronts of the diffusive Nicholson's blowflies equation
//! `u_t = u_xx - u + p u(t-τ,x) e^{-u(t-τ,x)}`: the heteroclinic connection of
//! the delay ODE, its Dirichlet-series start, characteristic roots, the
//! `(τ, c)` parameter regions and a delayed reaction-diffusion solver.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod characteristic;
pub mod dirichlet;
pub mod error;
pub mod front;
pub mod heteroclinic;
pub mod io;
pub mod model;
pub mod numerics;
pub mod pde;

pub use atlas::{InclusionReport, Membership, NmNecessary, RegionReport, SpeedFrame};
pub use characteristic::{CharKind, RealRoot, RootReport, TailClass};
pub use dirichlet::{DirichletExpansion, SeriesValue};
pub use error::{Error, Result};
pub use front::{Direction, FrontDiagnostics, ProfileShape, SpeedEstimate};
pub use heteroclinic::{CrossingReport, TailShape, Theorem1Verdict, Trajectory};
pub use model::ModelParams;
pub use pde::{BoundaryCondition, InitialCondition, Scheme, SimConfig, SpacetimeRecord};
