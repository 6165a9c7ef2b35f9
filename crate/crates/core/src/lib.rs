//! Resource-flow optimization toolkit for circular-economy scenarios.
//!
//! A scenario file describes materials, processes, resource limits, emission
//! factors and (optionally) a recycling facility and a smart-bin collection
//! network. The [`pipeline`] runs it end to end in baseline or framework mode:
//!
//! 1. sensor events are generated by the digital twin and featurized,
//! 2. a waste classifier is trained (framework) or a weight rule applied (baseline),
//! 3. the recycling facility is simulated,
//! 4. the allocation MILP is compiled and solved,
//! 5. collection routes are learned with tabular Q-learning,
//! 6. lifecycle CO₂ is accounted and metrics assembled.
//!
//! Every stage is metered by [`energy`]. [`report`] turns runs into manifests,
//! comparison tables and SVG charts.

pub mod classifier;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod lca;
pub mod milp;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod routing;
pub mod scenario;
pub mod twin;

pub use diagnostics::Diagnostic;
pub use error::{Classify, ErrorKind};

/// Version string stamped into manifests and run ids.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
