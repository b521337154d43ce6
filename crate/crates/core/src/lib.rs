//! Sample compression for finite binary concept classes of bounded VC dimension.
//!
//! A realizable labeled sample of any size is compressed to a kernel whose
//! size depends only on the VC and dual VC dimensions of the class, together
//! with a short side-information string. Reconstruction runs a consistent ERM
//! learner on subsets of the kernel and takes a majority vote.

pub mod approx;
pub mod bits;
pub mod concept;
pub mod error;
pub mod game;
pub mod harness;
pub mod learner;
pub mod rng;
pub mod scheme;

pub use approx::{ApproxConfig, ApproximationCertificate, Multiset, ProbabilityVector};
pub use bits::BitRow;
pub use concept::{ConceptClass, DualClass, LabeledSample, ShatterWitness};
pub use error::{Error, Result};
pub use game::{GameConfig, GameSolution, PayoffMatrix, Side, SparseEquilibrium};
pub use learner::{DiscoveryMode, HypothesisSet, LearningMap, WeakLearnerConfig};
pub use scheme::{CompressedSample, Hypothesis, RoundTrip, Scheme, SchemeConfig, SchemeReport};
