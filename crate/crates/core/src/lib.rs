//! Markov chain samplers for distributions over subsets of a finite ground
//! set, with exact small-case oracles and convergence diagnostics.
//!
//! A model scores subsets through [`SetModel`]; a [`ConstraintFamily`]
//! restricts the support; [`run_chains`] drives one of the three samplers.
//!
//! ```
//! use setchain::{run_chains, ConstraintFamily, DppModel, RunOptions, SamplerKind};
//!
//! let model = DppModel::from_spectrum(&[2.0, 1.0, 0.5, 0.25], 7, 1.0).unwrap();
//! let bases = ConstraintFamily::uniform_base(4, 2).unwrap();
//! let traces = run_chains(&model, &bases, SamplerKind::Exchange, &RunOptions::new(2, 100, 42)).unwrap();
//! assert!(traces.iter().all(|t| t.records.iter().all(|r| r.subset_after.len() == 2)));
//! ```

pub mod constraints;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod models;
pub mod oracle;
pub mod samplers;
pub mod subset;

pub use constraints::{Constrained, ConstraintFamily, Partition};
pub use error::{Error, Result};
pub use model::{LogWeight, SetModel};
pub use models::{DppModel, IsingChainModel, ModularModel};
pub use samplers::{run_chains, Init, RunOptions, SamplerKind, Trace};
pub use subset::{GroundSet, Move, MoveKind, Subset};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/constraints.md")]
    mod constraints {}
    #[doc = include_str!("../../../book/src/samplers.md")]
    mod samplers {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
