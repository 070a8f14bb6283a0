//! Desk-scale experiment presets. Every preset is deterministic in its seed
//! and writes tidy CSV for external plotting.
//!
//! * `ising-partition`: 20-element chain Ising model on a partition matroid
//!   of five parts of four, exchange chain, (β, δ) ∈ {(1,1), (3,1), (3,0.5)}.
//!   Marginal and one- and two-variable conditional estimates are compared
//!   with exact values.
//! * `dpp-size-sweep`: add/delete chain on a rank-30 DPP for N ∈ {50, 100,
//!   200}; a synthetic decaying spectrum stands in for a real data kernel.
//! * `mix-vs-adddelete`: mixed chain against the add/delete chain with
//!   k = N on N = 40 kernels, one slowly decaying spectrum and one two-level
//!   spectrum (20 eigenvalues at 500, 20 at 1/500).

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use setchain::diagnostics::{
    default_stride, empirical_mixing_time, estimate_csv, estimate_series, psrf_csv, psrf_series_half_window,
    trace_estimate,
    StatisticKind, TraceStatistic, DEFAULT_PSRF_THRESHOLD,
};
use setchain::oracle::{enumerate_distribution, exact_query};
use setchain::samplers::chain_rng;
use setchain::{
    run_chains, ConstraintFamily, DppModel, Init, IsingChainModel, Partition, RunOptions, SamplerKind, Trace,
};

use crate::commands::write_file;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    IsingPartition,
    DppSizeSweep,
    MixVsAddDelete,
}

impl std::str::FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "ising-partition" => Ok(Preset::IsingPartition),
            "dpp-size-sweep" => Ok(Preset::DppSizeSweep),
            "mix-vs-adddelete" => Ok(Preset::MixVsAddDelete),
            other => Err(CliError::Config(format!(
                "unknown preset {other:?}; expected ising-partition, dpp-size-sweep or mix-vs-adddelete"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PresetOptions {
    pub seed: u64,
    pub chains: usize,
    /// Overrides the preset's step count.
    pub steps: Option<u64>,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self { seed: 0, chains: 10, steps: None }
    }
}

/// First step from which the PSRF series stays at or below 1.05.
fn mixing_step(series: &[(u64, f64)]) -> Option<u64> {
    let values: Vec<f64> = series.iter().map(|p| p.1).collect();
    empirical_mixing_time(&values, DEFAULT_PSRF_THRESHOLD).map(|i| series[i].0)
}

fn fmt_step(step: Option<u64>) -> String {
    step.map_or_else(|| "none".to_string(), |s| s.to_string())
}

/// Element-wise maximum over every element of the half-window membership
/// PSRF series.
pub fn max_membership_psrf(traces: &[Trace], n: usize, stride: usize) -> CliResult<Vec<(u64, f64)>> {
    let mut worst: Option<Vec<(u64, f64)>> = None;
    for e in 0..n {
        let stat = TraceStatistic::from_traces(traces, StatisticKind::Membership(e))?;
        let series = psrf_series_half_window(&stat, stride)?;
        worst = Some(match worst {
            None => series,
            Some(w) => w.into_iter().zip(series).map(|(a, b)| (a.0, a.1.max(b.1))).collect(),
        });
    }
    Ok(worst.unwrap_or_default())
}

fn pick<R: Rng>(items: &[usize], rng: &mut R) -> usize {
    items[rng.random_range(0..items.len())]
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRow {
    pub label: String,
    pub exact: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingRun {
    pub beta: f64,
    pub delta: f64,
    pub mixing_step: Option<u64>,
    pub queries: Vec<QueryRow>,
}

pub const ISING_GRID: [(f64, f64); 3] = [(1.0, 1.0), (3.0, 1.0), (3.0, 0.5)];
pub const ISING_STEPS: u64 = 20_000;
/// The chains settle within a few thousand steps, so the PSRF series is
/// sampled much more finely than the 2% default.
pub const ISING_PSRF_STRIDE: usize = 10;

pub fn ising_partition(opts: &PresetOptions, out: Option<&Path>) -> CliResult<Vec<IsingRun>> {
    let n = 20;
    let partition = Partition::contiguous(&[4; 5])?;
    let c = ConstraintFamily::PartitionBase(partition.clone());
    let steps = opts.steps.unwrap_or(ISING_STEPS);

    // one target and conditioning variables from other parts, fixed per seed
    let mut rng = chain_rng(opts.seed, usize::MAX);
    let mut parts: Vec<usize> = (0..partition.rank()).collect();
    parts.shuffle(&mut rng);
    let target = pick(partition.part(parts[0]), &mut rng);
    let c1 = pick(partition.part(parts[1]), &mut rng);
    let c2 = pick(partition.part(parts[2]), &mut rng);
    let queries: [(String, Vec<(usize, bool)>); 3] = [
        ("marg".to_string(), vec![]),
        ("cond1".to_string(), vec![(c1, true)]),
        ("cond2".to_string(), vec![(c1, true), (c2, true)]),
    ];

    let mut runs = Vec::new();
    let mut summary = String::from("beta,delta,query,target,given,exact,estimate_mean,estimate_std,mixing_step\n");
    for (beta, delta) in ISING_GRID {
        let m = IsingChainModel::with_random_weights(n, opts.seed, delta, beta)?;
        let exact = enumerate_distribution(&m, &c)?;
        let mut run_opts = RunOptions::new(opts.chains, steps, opts.seed);
        run_opts.init = Init::Random;
        let traces = run_chains(&m, &c, SamplerKind::Exchange, &run_opts)?;
        let stride = default_stride(steps as usize);
        let series = max_membership_psrf(&traces, n, ISING_PSRF_STRIDE)?;
        let mixing = mixing_step(&series);
        let tag = format!("b{beta}_d{delta}");
        let mut rows = Vec::new();
        for (label, given) in &queries {
            let truth = exact_query(&exact, target, given)?;
            let est = trace_estimate(&traces, target, given)?;
            let given_text: Vec<String> = given.iter().map(|(e, _)| (e + 1).to_string()).collect();
            let _ = writeln!(
                summary,
                "{beta},{delta},{label},{},{},{truth},{},{},{}",
                target + 1,
                given_text.join(";"),
                est.mean,
                est.std,
                fmt_step(mixing)
            );
            if let Some(dir) = out {
                let series = estimate_series(&traces, target, given, stride)?;
                write_file(&dir.join(format!("estimates_{tag}_{label}.csv")), &estimate_csv(&series))?;
            }
            rows.push(QueryRow { label: label.clone(), exact: truth, mean: est.mean, std: est.std });
        }
        if let Some(dir) = out {
            write_file(&dir.join(format!("psrf_{tag}.csv")), &psrf_csv(&series))?;
        }
        runs.push(IsingRun { beta, delta, mixing_step: mixing, queries: rows });
    }
    if let Some(dir) = out {
        write_file(&dir.join("summary.csv"), &summary)?;
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub n: usize,
    pub k: usize,
    pub steps: u64,
    pub mixing_step: Option<u64>,
}

pub const SWEEP_SIZES: [usize; 3] = [50, 100, 200];
pub const SWEEP_RANK: usize = 30;
pub const SWEEP_STEPS_PER_ELEMENT: u64 = 2000;

/// Decaying spectrum with the same shape for every `n`.
pub fn sweep_spectrum(n: usize) -> Vec<f64> {
    (0..n).map(|i| 10.0 * (-3.0 * i as f64 / n as f64).exp() + 0.01).collect()
}

pub fn dpp_size_sweep(opts: &PresetOptions, out: Option<&Path>) -> CliResult<Vec<SweepRun>> {
    let mut runs = Vec::new();
    let mut summary = String::from("n,k,steps,mixing_step\n");
    for n in SWEEP_SIZES {
        let m = DppModel::from_spectrum(&sweep_spectrum(n), opts.seed, 1.0)?;
        let c = ConstraintFamily::uniform_rank(n, SWEEP_RANK)?;
        let steps = opts.steps.unwrap_or(SWEEP_STEPS_PER_ELEMENT * n as u64);
        let mut run_opts = RunOptions::new(opts.chains, steps, opts.seed);
        run_opts.incremental = true;
        let traces = run_chains(&m, &c, SamplerKind::AddDelete, &run_opts)?;
        let series = max_membership_psrf(&traces, n, default_stride(steps as usize))?;
        let mixing = mixing_step(&series);
        let _ = writeln!(summary, "{n},{SWEEP_RANK},{steps},{}", fmt_step(mixing));
        if let Some(dir) = out {
            write_file(&dir.join(format!("psrf_n{n}.csv")), &psrf_csv(&series))?;
        }
        runs.push(SweepRun { n, k: SWEEP_RANK, steps, mixing_step: mixing });
    }
    if let Some(dir) = out {
        write_file(&dir.join("summary.csv"), &summary)?;
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRun {
    pub spectrum: &'static str,
    pub sampler: SamplerKind,
    pub mixing_step: Option<u64>,
    pub psrf_final: f64,
}

pub const COMPARISON_N: usize = 40;
pub const COMPARISON_STEPS: u64 = 40_000;

pub fn flat_spectrum(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * (-(i as f64) / n as f64).exp()).collect()
}

pub fn sharp_spectrum(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i < n / 2 { 500.0 } else { 1.0 / 500.0 }).collect()
}

/// Stream id for the shared random starts, apart from every chain's own.
const START_STREAM: usize = 1 << 32;

pub fn mix_vs_add_delete(opts: &PresetOptions, out: Option<&Path>) -> CliResult<Vec<ComparisonRun>> {
    let n = COMPARISON_N;
    let steps = opts.steps.unwrap_or(COMPARISON_STEPS);
    let free = ConstraintFamily::unconstrained(n)?;
    let starts: Vec<_> =
        (0..opts.chains).map(|i| free.random_feasible_with(&mut chain_rng(opts.seed, START_STREAM + i))).collect();
    let mut runs = Vec::new();
    let mut summary = String::from("spectrum,sampler,steps,mixing_step,psrf_final\n");
    for (name, spectrum) in [("flat", flat_spectrum(n)), ("sharp", sharp_spectrum(n))] {
        let m = DppModel::from_spectrum(&spectrum, opts.seed, 1.0)?;
        for (kind, c) in [
            (SamplerKind::SrMix, free.clone()),
            (SamplerKind::AddDelete, ConstraintFamily::uniform_rank(n, n)?),
        ] {
            let mut run_opts = RunOptions::new(opts.chains, steps, opts.seed);
            run_opts.init = Init::PerChain(starts.clone());
            run_opts.incremental = true;
            let traces = run_chains(&m, &c, kind, &run_opts)?;
            let series = max_membership_psrf(&traces, n, default_stride(steps as usize))?;
            let mixing = mixing_step(&series);
            let last = series.last().map_or(f64::NAN, |p| p.1);
            let _ = writeln!(summary, "{name},{kind},{steps},{},{last}", fmt_step(mixing));
            if let Some(dir) = out {
                write_file(&dir.join(format!("psrf_{name}_{kind}.csv")), &psrf_csv(&series))?;
            }
            runs.push(ComparisonRun { spectrum: name, sampler: kind, mixing_step: mixing, psrf_final: last });
        }
    }
    if let Some(dir) = out {
        write_file(&dir.join("summary.csv"), &summary)?;
    }
    Ok(runs)
}

/// Runs `preset` and returns the contents of its summary file.
pub fn run_preset(preset: Preset, opts: &PresetOptions, out: &Path) -> CliResult<String> {
    match preset {
        Preset::IsingPartition => ising_partition(opts, Some(out)).map(drop)?,
        Preset::DppSizeSweep => dpp_size_sweep(opts, Some(out)).map(drop)?,
        Preset::MixVsAddDelete => mix_vs_add_delete(opts, Some(out)).map(drop)?,
    }
    Ok(std::fs::read_to_string(out.join("summary.csv"))?)
}
