//! Convergence diagnostics on traces and closed-form mixing bounds.

mod bounds;
mod estimate;
mod mixing;
mod psrf;

pub use bounds::{ln_binomial, ln_factorial, theoretical_bound, BoundQuery, BoundReport, PiSource, StartTerm};
pub use estimate::{estimate_csv, estimate_series, trace_estimate, Estimate};
pub use mixing::{empirical_mixing_time, DEFAULT_PSRF_THRESHOLD};
pub use psrf::{default_stride, psrf, psrf_csv, psrf_series, psrf_series_half_window, StatisticKind, TraceStatistic};
