//! Vine copulas organised as a computational graph.
//!
//! Variable vertices hold (conditional) pseudo-observations, copula vertices
//! hold pair-copulas; sampling walks the graph with h-function inverses and
//! memoises intermediate columns. The numeric core is generic over
//! [`Scalar`] (`f32` or `f64`); graph structure and scheduling carry no
//! scalar type.
//!
//! ```
//! use vinecop::{fig1a, schedule, query, VarSet};
//!
//! let vine = fig1a();
//! let order = schedule(&vine, VarSet::EMPTY, false).unwrap();
//! assert_eq!(order.order(), &[0, 1, 3, 2, 4]);
//! assert_eq!(query(&order, &vine).unwrap(), 1);
//! ```

pub mod bicop;
pub mod builder;
pub mod deptools;
pub mod error;
pub mod io;
pub mod sampler;
pub mod scalar;
pub mod scheduler;
pub mod special;
pub mod union_find;
pub mod vcg;

pub use bicop::{BivariateCopula, CopulaFamily, FitMethod, FitOptions, Rotation};
pub use builder::{build, fit_structure, BuildConfig, StructureKind};
pub use deptools::{kendall_tau, to_pseudo_obs, PseudoObs, SampleBatch};
pub use error::{Error, Result};
pub use io::{load, read_csv, save, CsvData};
pub use sampler::{
    conditional_quantile, log_density, rosenblatt, sample, sample_conditional,
    sample_conditional_with_stats, sample_with_stats, source_uniforms,
};
pub use scalar::Scalar;
pub use scheduler::{get_source, query, schedule, SamplingOrder, TraversalStats};
pub use vcg::{
    appendix_path3, export_dot, fig1a, validate, CopulaVertex, VarSet, VariableVertex, VineModel,
    VineStructure, Violation,
};

pub type BivariateCopula64 = BivariateCopula<f64>;
pub type BivariateCopula32 = BivariateCopula<f32>;
pub type VineModel64 = VineModel<f64>;
pub type VineModel32 = VineModel<f32>;
pub type PseudoObs64 = PseudoObs<f64>;
pub type BuildConfig64 = BuildConfig<f64>;
