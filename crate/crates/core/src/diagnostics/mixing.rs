/// Threshold below which chains are declared converged.
pub const DEFAULT_PSRF_THRESHOLD: f64 = 1.05;

/// Smallest index from which every entry stays at or below `threshold`.
pub fn empirical_mixing_time(series: &[f64], threshold: f64) -> Option<usize> {
    let tail = series.iter().rev().take_while(|&&r| r <= threshold).count();
    (tail > 0).then(|| series.len() - tail)
}
