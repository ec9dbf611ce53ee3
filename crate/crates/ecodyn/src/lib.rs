//! Equilibrium, stability, persistence and trajectory analysis for a
//! three-population eco-epidemiological system: logistic prey consumed
//! through a sigmoidal (type-III) functional response by a predator
//! population split into susceptible and infected classes, with
//! ratio-dependent competition and mass-action disease transmission.
//!
//! The crate locates every equilibrium family of the system (extinction,
//! axial, planar and coexistence branches) from the exact fixed-point
//! polynomials, classifies local stability by Jacobian eigenvalues and
//! Routh-Hurwitz quantities, evaluates a global-stability quadratic form and
//! average-Lyapunov persistence conditions, and integrates trajectories with
//! an adaptive Dormand-Prince scheme that preserves the coordinate planes
//! exactly.
//!
//! ```
//! use ecodyn::report::{preset, run_analysis, AnalysisSettings};
//!
//! let config = preset("S1").unwrap();
//! let report = run_analysis(&config, &AnalysisSettings::default()).unwrap();
//! let coexistence = report
//!     .equilibria
//!     .iter()
//!     .find(|e| e.feasible && e.family.tag == ecodyn::equilibria::FamilyTag::EStar)
//!     .unwrap();
//! assert!((coexistence.state.x - 56.4347920).abs() < 1e-6);
//! ```

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod report;
pub mod roots;
pub mod stability;

pub use error::{Error, Result};
pub use model::{DerivativeVector, JacobianMatrix, ModelParams, PopulationState};
