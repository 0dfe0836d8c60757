//! Random walks on the symmetric group driven by a fixed conjugacy class,
//! the random hypergraph they induce, and the limit curves that describe
//! both.

pub mod analytics;
pub mod class;
pub mod distance;
pub mod experiments;
pub mod hypergraph;
pub mod perm;
mod seqtree;
pub mod walk;

pub use analytics::{AnalyticProfile, AnalyticsError, ExpectedHypertrees, MRatio, ThresholdForm};
pub use class::{ClassError, ConjugacyClass};
pub use distance::{CayleyBfs, DistanceError, FactorizationResult};
pub use experiments::{ExperimentConfig, ExperimentError, ExperimentKind, RunOutput, RunSummary};
pub use hypergraph::{ComponentKind, HyperComponents, HyperError, HyperOptions, HyperSnapshot};
pub use perm::{parse_cycle_notation, Observables, PermError, Permutation, StepEvent};
pub use walk::{replica_rng, TrajectoryRecord, WalkError, WalkState};
