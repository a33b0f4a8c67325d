//! Numerical laboratory for the boundary behavior of radial viscosity
//! solutions to fully nonlinear, uniformly elliptic equations with inverse
//! power forcing on an annulus.
//!
//! The crate provides, in dependency order:
//!
//! * [`params`]: problem data, Pucci extremal operators, model operators and
//!   the structure condition envelope;
//! * [`grid`]: boundary refined radial grids and grid functions with
//!   polynomial differentiation stencils;
//! * [`transforms`]: the exponential substitutions that absorb quadratic
//!   gradient growth, with sandwich verification;
//! * [`radial`]: the radial form of the extremal operators, residuals and
//!   integrating factors;
//! * [`eigen`]: principal half eigenpairs of the radial extremal operators;
//! * [`barriers`]: explicit barrier families and certification of the
//!   comparison inequalities they must satisfy;
//! * [`solver`]: monotone policy iteration for the regularized problem and
//!   the vanishing regularization limit;
//! * [`diagnostics`]: boundary rate fits, Harnack quotients and oscillation
//!   decay measurements;
//! * [`config`]: flat text configuration files mapping onto [`ProblemSpec`].

pub mod barriers;
pub mod config;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod params;
pub mod radial;
pub mod solver;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{GridFunction, RadialGrid};
pub use params::{
    derived_constants, eval_model, pucci, sc_envelope, AnnulusGeometry, DerivedConstants,
    Ellipticity, GrowthParams, ModelOperator, ProblemSpec, PucciSign, SingularForcing,
};
