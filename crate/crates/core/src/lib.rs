//! Aharonov–Bohm phase, threaded flux and persistent current for electrons
//! confined to `(p, q)` torus-knot trajectories in a uniform magnetic field.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: torus-knot curves, their analytic tangents and arc length.
//! - [`modulation`]: smooth random minor-radius profiles built by Fourier filtering.
//! - [`magnetostatics`]: threaded flux by loop quadrature and by closed form.
//! - [`current`]: persistent current as a function of threaded flux.
//! - [`ensemble`]: Monte Carlo statistics of the flux excess for distorted knots.
//! - [`output`]: CSV and key-value text formats shared by the CLI.
//!
//! All quantities are dimensionless by default (flux in units of the flux
//! quantum, which is set to one). [`units::UnitSystem::Physical`] switches the
//! flux quantum to `h/e` in webers.

pub mod current;
pub mod ensemble;
pub mod geometry;
pub mod magnetostatics;
pub mod modulation;
pub mod output;
pub mod quadrature;
pub mod units;
pub mod vector;

pub use current::{CurrentTrace, ElectronSystem, TraceRow};
pub use ensemble::{DeltaHistogram, EnsembleConfig, EnsembleOutput};
pub use geometry::{KnotClass, MinorRadius, TorusGeometry};
pub use magnetostatics::{FieldVector, FluxMethod, FluxResult};
pub use modulation::ModulationProfile;
pub use units::UnitSystem;
pub use vector::Vec3;
