//! Infinite tensor products of Hilbert spaces at finite truncation.
//!
//! States are sequences of factor vectors given by a finite prefix and a
//! tail rule. On top of that the crate classifies infinite complex
//! products, sorts product states into sectors, and computes truncated
//! overlaps, expectations and system density matrices in log space. The
//! [`oracle`] module is a dense reference used by the test suites.

pub mod decoherence;
pub mod error;
pub mod io;
pub mod logspace;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod overlaps;
pub mod products;
pub mod scenarios;
pub mod sectors;

pub use decoherence::{
    collapse, decoherence_horizon, premeasurement_state, sample_counts, sample_outcome, truncated_density,
    FrequencyTable, Horizon, MeasurementModel, TruncatedDensityMatrix,
};
pub use error::{Error, Result};
pub use logspace::LogComplex;
pub use model::{
    distance, make_product_state, CompositeState, Deviation, DeviationDirection, FactorVector, ParametricTail,
    ProductState, TailRule, C64,
};
pub use operators::{
    apply, evolve, expectation_sweep, sector_action, FactorOperator, FactoredOperator, OperatorTail, OperatorTerm,
    SectorActionKind, SectorActionVerdict, SiteGenerator,
};
pub use overlaps::{asymptotic_overlap, composite_overlap, overlap_sweep, truncated_overlap, OverlapSweep};
pub use products::{
    classify_product, quasi_convergence_value, ClassifyOptions, ComplexSequenceSpec, ConvergenceVerdict, TailClass,
    VerdictKind,
};
pub use scenarios::{
    build_spin_pair, cascade_stage_report, run_cascade, spin_sweep, CascadeSpec, SpinChainScenario, SpinDifference,
};
pub use sectors::{same_sector, SectorKind, SectorVerdict};
