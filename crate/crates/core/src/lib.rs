//! Entropy-based evolutionary diversity optimisation for the symmetric TSP.
//!
//! The crate evolves populations of tours whose directed `k`-node segments are
//! spread as evenly as possible, optionally subject to a cost bound of
//! `(1 + alpha) * OPT`. Diversity is measured with the high-order entropy of
//! the population's segment frequencies; the two edge-based measures (ED, PD)
//! are provided as baselines. Around the evolutionary algorithm sit the
//! closed-form entropy bounds, a linearised MIP exporter, a brute-force oracle
//! for tiny instances and an experiment harness.
//!
//! Node identifiers are `0..n` internally. TSPLIB files are 1-based and are
//! converted at the parse/serialise boundary.

pub mod baselines;
pub mod ea;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod mip;
pub mod mutation;
pub mod segments;
pub mod tour;
pub mod verification;

pub use baselines::{edge_diversity, pairwise_distance, DiversityScore, Measure, PairwiseMatrix};
pub use ea::{EaConfig, Population, RunRecord, Selection, Termination, TracePoint};
pub use entropy::{entropy, entropy_bounds, entropy_delta, EntropyBounds, EntropyValue};
pub use error::{EdoError, Result};
pub use experiment::{run_experiment, ExperimentSpec, SummaryRow};
pub use instance::{unit_graph, Instance, InstanceKind, OptimumInfo};
pub use mutation::{CutBias, MutationMode, OffspringScheme, RngState};
pub use segments::{Segment, SegmentDelta, SegmentTable};
pub use tour::{Tour, TwoOptMove};
