//! Symmetry groups of the spatial three-body problem and minimization of the
//! Lagrangian action in a uniformly rotating frame.
//!
//! The crate covers:
//! - finite subgroups of `O(T) x O(3) x S_n` and the criteria that screen them
//!   ([`symmetry`], [`classification`]);
//! - equivariant truncated Fourier loops and the rotating-frame action
//!   ([`loop_space`], [`action`], [`minimizer`]);
//! - Lagrange/Euler relative equilibria, second-variation planarity tests and
//!   orbit diagnostics ([`baselines`], [`variations`], [`diagnostics`]).

pub mod action;
pub mod baselines;
pub mod classification;
pub mod diagnostics;
pub mod loop_space;
pub mod minimizer;
pub mod symmetry;
pub mod variations;

pub use action::{ActionEvaluator, ProblemSetup, RotatingFrame};
pub use baselines::{euler_solution, lagrange_solution, Baseline, BaselineKind};
pub use classification::{GroupSpec, ReducedEntry, SigmaPair};
pub use loop_space::FourierLoop;
pub use minimizer::{minimize, MinimizeOptions, MinimizeResult};
pub use symmetry::{GroupElement, Perm, SymmetryGroup, TimeTransform};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("group closure exceeded {cap} elements")]
    CapExceeded { cap: usize },
    #[error("masses are required for this operation")]
    MissingMasses,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate output: {0}")]
    DegenerateOutput(String),
    #[error("collision at sample {sample} (bodies {i} and {j})")]
    CollisionAtSample { sample: usize, i: usize, j: usize },
    #[error("{0:?} is not a rotation axis of the group")]
    NotARotationAxis([f64; 3]),
    #[error("all {0} starts ran into collisions")]
    AllStartsCollided(usize),
    #[error("every equivariant loop has a collision")]
    BoundToCollisions,
    #[error("the group is fully uncoercive; the action has no minimizer")]
    FullyUncoercive,
    #[error("angular velocity must be nonzero")]
    ZeroFrequency,
    #[error("this construction needs the two outer masses equal")]
    AsymmetricMasses,
    #[error("loop shape does not match: {0}")]
    IncompatibleShape(String),
    #[error("mass {0} is outside the admissible range (0, 1/2)")]
    MassOutOfRange(f64),
    #[error("unknown group name {0:?}")]
    UnknownName(String),
    #[error("reduced list differs from the catalog: missing {missing:?}, unexpected {unexpected:?}")]
    ReductionMismatch { missing: Vec<String>, unexpected: Vec<String> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
