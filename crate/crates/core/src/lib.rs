//! Exact calculus of parabolic bundles, parabolic Higgs fields and parabolic
//! connections on marked curves.
//!
//! Everything is done over exact rationals (and Gaussian rationals for
//! residues), so every identity checked here holds with zero tolerance:
//!
//! * [`curve`]: marked curves and ramification profiles of coverings.
//! * [`parabolic`]: split parabolic bundles, characteristic data, degree,
//!   slope, duals, tensor products and split-model stability.
//! * [`functors`]: pullback and direct image along coverings.
//! * [`spectral`]: residues of local Higgs fields / connections and how they
//!   transform under pullback and direct image.
//! * [`naht`]: the jump/eigenvalue tables relating Higgs data to connection
//!   data, and their behaviour under pullback and direct image.
//! * [`scenario`] and [`verify`]: the JSON scenario format and the seeded
//!   randomized property verifier.
//! * [`command`]: the commands of the `pcalc` tool, run against a scenario.

pub mod command;
pub mod curve;
pub mod error;
pub mod functors;
pub mod gaussian;
pub mod matrix;
pub mod naht;
pub mod parabolic;
pub mod rational;
pub mod scenario;
pub mod spectral;
pub mod verify;

pub use command::{run_command, Command, CommandArgs, Report};
pub use curve::{CoveringMap, Divisor, MarkedCurve, Point, Preimage, Violation};
pub use error::{Error, Result};
pub use functors::{DirectImageResult, FiberContribution};
pub use gaussian::GaussianRational;
pub use matrix::{Matrix, Polynomial};
pub use naht::SpectralPoint;
pub use parabolic::{Flag, FlagStep, ParaLine, ParabolicChar, SplitParabolicBundle, Weight};
pub use rational::Rational;
pub use scenario::{Bundle, Scenario, ScenarioFile};
pub use spectral::{FieldKind, LocalSpectralField};
pub use verify::{verify, VerifierConfig};
