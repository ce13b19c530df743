//! Measure-zero divergence sets for sequences of localized integral operators.
//!
//! [`constructor`] builds nested open sets `G_1 ⊃ … ⊃ G_K` around a null set
//! together with operator indices, and [`verifier`] checks that
//! `U_{ν(I_k)} 𝕀_G` alternates between 1 and 0 along each witness chain.

pub mod constructor;
pub mod coord;
pub mod error;
pub mod interval;
pub mod kernels;
pub mod majorant;
pub mod nudge;
pub mod nullset;
pub mod partition;
pub mod verifier;

pub use constructor::{
    assemble_g, check_conditions, construct, ConstructionConfig, ConstructionState, Context,
};
pub use coord::{Coord, Index};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
pub use kernels::{Family, FamilySpec, KernelFamily};
pub use majorant::{analytic_phi, estimate_phi, phi_at, validate_majorant, MajorantTable};
pub use nullset::{NullSet, NullSetSpec};
pub use partition::{check_regular, lazy_regular_partition, RegularPartition};
pub use verifier::{
    alternation_check, lproperty_audit, oscillation_summary, parity_target, DivergenceReport,
};
