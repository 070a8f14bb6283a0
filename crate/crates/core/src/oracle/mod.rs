//! Exact brute-force answers for small ground sets.
//!
//! Every routine enforces a hard size limit and refuses larger inputs rather
//! than approximating.

mod coupling;
mod homogenize;
mod kernel;
mod spectral;
mod table;
mod zeta;

pub use coupling::{alpha_coupling, CouplingReport, MAX_COUPLING_N};
pub use homogenize::{homogenized_equivalence_check, EquivalenceReport, EQUIVALENCE_TOLERANCE, MAX_HOMOGENIZED_N};
pub use kernel::{transition_matrix, TransitionMatrix, MAX_MATRIX_STATES};
pub use spectral::{spectral_analysis, tv_distance, SpectralReport, REVERSIBILITY_TOLERANCE};
pub use table::{enumerate_distribution, exact_query, feasible_states, ExactTable, MAX_ENUMERATION_N};
pub use zeta::{zeta_f, MAX_ZETA_N};
