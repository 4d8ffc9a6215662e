//! Hidden-variable models of the spin singlet, classical protocols that realize them,
//! Bell/CHSH and master-probability checks, and measurement-dependence measures.
//!
//! The geometry and model layers are generic over a [`Scalar`]; exact computations use
//! [`Exact`] rationals. Protocol runs are concrete in [`Real`].

pub mod error;
pub mod freewill;
pub mod geometry;
pub mod inequalities;
pub mod law;
pub mod models;
pub mod protocols;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{sample_uniform_sphere, sgn, Outcome, SphereGrid, UnitVector3, Vector3};
pub use law::{JointLaw2x2, LawEstimate, OutcomePair, ResidualEstimate, SettingsPair};
pub use models::flags::{model_flags, ModelFlags};
pub use models::{HiddenSample, Model, ModelId, TbFamily};
pub use rng::{substream, RandomStream};
pub use scalar::{Exact, Field, Scalar};

/// Floating type used by protocol runs and reports.
pub type Real = f64;
pub type UnitVector = UnitVector3<Real>;
pub type Settings = SettingsPair<Real>;
pub type Law = JointLaw2x2<Real>;
pub type ExactLaw = JointLaw2x2<Exact>;
pub type Sample = HiddenSample<Real>;
