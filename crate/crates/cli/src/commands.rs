use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use setchain::diagnostics::{
    default_stride, empirical_mixing_time, estimate_csv, estimate_series, psrf_csv, psrf_series, theoretical_bound,
    trace_estimate, BoundQuery, PiSource, StartTerm, StatisticKind, TraceStatistic,
};
use setchain::oracle::{
    alpha_coupling, enumerate_distribution, exact_query, spectral_analysis, transition_matrix, zeta_f,
};
use setchain::{run_chains, ConstraintFamily, Subset};

use crate::config::{InitSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::traces::{read_traces, write_traces};

/// Parses `"2,-3"` as "2 in S, 3 not in S" into 0-based pairs.
pub fn parse_given(text: &str, n: usize) -> CliResult<Vec<(usize, bool)>> {
    let mut out = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (inside, digits) = match tok.strip_prefix('-') {
            Some(rest) => (false, rest),
            None => (true, tok.strip_prefix('+').unwrap_or(tok)),
        };
        let label: usize = digits.parse().map_err(|_| CliError::Config(format!("bad element {tok:?} in --given")))?;
        if label == 0 || label > n {
            return Err(CliError::Config(format!("element {label} in --given is outside 1..={n}")));
        }
        out.push((label - 1, inside));
    }
    Ok(out)
}

fn target_index(target: usize, n: usize) -> CliResult<usize> {
    if target == 0 || target > n {
        return Err(CliError::Config(format!("--target {target} is outside 1..={n}")));
    }
    Ok(target - 1)
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub sampler: Option<String>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub thin: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// random, greedy or empty
    #[arg(long)]
    pub init: Option<InitSpec>,
    /// Rank-one log-determinant updates for DPP models.
    #[arg(long)]
    pub incremental: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sample(args: &SampleArgs) -> CliResult<String> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.sampler = args.sampler.clone().or(cfg.sampler);
    cfg.num_chains = args.chains.or(cfg.num_chains);
    cfg.steps = args.steps.or(cfg.steps);
    cfg.burn_in = args.burn_in.or(cfg.burn_in);
    cfg.thin = args.thin.or(cfg.thin);
    cfg.seed = args.seed.or(cfg.seed);
    cfg.init = args.init.clone().or(cfg.init);
    if args.incremental {
        cfg.incremental = Some(true);
    }
    cfg.output_dir = args.out.clone().or(cfg.output_dir);

    let model = cfg.build_model()?;
    let c = cfg.build_constraint(model.n())?;
    let kind = cfg.sampler(&c)?;
    kind.check_compatible(&c)?;
    let opts = cfg.run_options(kind, model.n())?;
    let dir = cfg.output_dir();
    let traces = run_chains(model.as_dyn(), &c, kind, &opts)?;
    write_traces(&dir, &traces, &opts)?;
    Ok(format!("wrote {} traces of {} records to {}\n", traces.len(), traces[0].records.len(), dir.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactQuery {
    Table,
    Marginal,
    Conditional,
    Zeta,
    Spectral,
    Alpha,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub query: ExactQuery,
    /// 1-based element for marginal and conditional queries.
    #[arg(long)]
    pub target: Option<usize>,
    /// Conditioning event such as `2,-3` (2 in, 3 out).
    #[arg(long, allow_hyphen_values = true)]
    pub given: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Starting state for the spectral bound, `;`-separated labels; defaults
    /// to the most probable state.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long)]
    pub sampler: Option<String>,
    /// Write the table CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exact(args: &ExactArgs) -> CliResult<String> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.sampler = args.sampler.clone().or(cfg.sampler);
    let model = cfg.build_model()?;
    let n = model.n();
    let c = cfg.build_constraint(n)?;
    let m = model.as_dyn();
    match args.query {
        ExactQuery::Table => {
            let csv = enumerate_distribution(m, &c)?.to_csv();
            match &args.out {
                Some(path) => {
                    write_file(path, &csv)?;
                    Ok(format!("wrote {}\n", path.display()))
                }
                None => Ok(csv),
            }
        }
        ExactQuery::Marginal => {
            let t = enumerate_distribution(m, &c)?;
            match args.target {
                Some(target) => Ok(format!("{}\n", exact_query(&t, target_index(target, n)?, &[])?)),
                None => {
                    let mut out = String::from("element,marginal\n");
                    for (i, p) in t.marginals().iter().enumerate() {
                        let _ = writeln!(out, "{},{p}", i + 1);
                    }
                    Ok(out)
                }
            }
        }
        ExactQuery::Conditional => {
            let target = args.target.ok_or_else(|| CliError::Config("conditional query needs --target".into()))?;
            let given = parse_given(args.given.as_deref().unwrap_or(""), n)?;
            let t = enumerate_distribution(m, &c)?;
            Ok(format!("{}\n", exact_query(&t, target_index(target, n)?, &given)?))
        }
        ExactQuery::Zeta => Ok(format!("{}\n", zeta_f(m, &c)?)),
        ExactQuery::Spectral => {
            let kind = cfg.sampler(&c)?;
            let t = enumerate_distribution(m, &c)?;
            let p = transition_matrix(m, &c, kind)?;
            let x0 = match &args.x0 {
                Some(text) => Subset::parse(n, text)?,
                None => t.mode().clone(),
            };
            let report = spectral_analysis(&p.matrix, &t, &x0, args.eps)?;
            Ok(format!("sampler = {kind}\nstates = {}\n{}", t.len(), report.to_kv()))
        }
        ExactQuery::Alpha => {
            let ConstraintFamily::UniformRank { k, .. } = c else {
                return Err(CliError::Config("alpha query needs a uniform_rank constraint".into()));
            };
            Ok(alpha_coupling(m, k)?.to_kv(args.eps))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticArg {
    Membership,
    LogScore,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Directory written by `sample`.
    #[arg(long)]
    pub traces: PathBuf,
    /// 1-based element to estimate and monitor.
    #[arg(long, default_value_t = 1)]
    pub target: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub given: Option<String>,
    #[arg(long, value_enum, default_value_t = StatisticArg::Membership)]
    pub statistic: StatisticArg,
    /// Records between PSRF evaluations; defaults to 2% of the trace.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, default_value_t = 1.05)]
    pub threshold: f64,
    /// Ground set size, when the directory has no meta.txt.
    #[arg(long)]
    pub n: Option<usize>,
    /// Output directory; defaults to the trace directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn diagnose(args: &DiagnoseArgs) -> CliResult<String> {
    let traces = read_traces(&args.traces, args.n)?;
    let n = traces[0].meta.n;
    let target = target_index(args.target, n)?;
    let given = parse_given(args.given.as_deref().unwrap_or(""), n)?;
    let kind = match args.statistic {
        StatisticArg::Membership => StatisticKind::Membership(target),
        StatisticArg::LogScore => StatisticKind::LogScore,
    };
    let stat = TraceStatistic::from_traces(&traces, kind)?;
    let stride = args.stride.unwrap_or_else(|| default_stride(stat.len()));
    let out_dir = args.out.clone().unwrap_or_else(|| args.traces.clone());
    fs::create_dir_all(&out_dir)?;

    let mut report = String::new();
    if traces.len() >= 2 {
        let series = psrf_series(&stat, stride)?;
        write_file(&out_dir.join("psrf.csv"), &psrf_csv(&series))?;
        let values: Vec<f64> = series.iter().map(|p| p.1).collect();
        let mixing = empirical_mixing_time(&values, args.threshold).map(|i| series[i].0);
        let _ = writeln!(report, "psrf_final = {}", values.last().copied().unwrap_or(f64::NAN));
        match mixing {
            Some(step) => {
                let _ = writeln!(report, "mixing_step = {step}");
            }
            None => report.push_str("mixing_step = none\n"),
        }
    } else {
        report.push_str("psrf = skipped (one chain)\n");
    }
    let series = estimate_series(&traces, target, &given, stride)?;
    write_file(&out_dir.join("estimates.csv"), &estimate_csv(&series))?;
    let est = trace_estimate(&traces, target, &given)?;
    let _ = writeln!(report, "estimate_mean = {}", est.mean);
    let _ = writeln!(report, "estimate_std = {}", est.std);
    let _ = writeln!(report, "chains_used = {}", est.chains_used);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Sr,
    UniformBase,
    PartitionBase,
    GeneralBase,
    AddDelete,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub kind: BoundKind,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub x0_size: usize,
    /// ln π(X₀).
    #[arg(long, allow_negative_numbers = true)]
    pub log_pi0: Option<f64>,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.0)]
    pub zeta: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long)]
    pub max_part_size: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub log_z: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub log_zc: Option<f64>,
    /// `--log-pi0` is a log ratio of unnormalized weights.
    #[arg(long)]
    pub unnormalized: bool,
}

fn need<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Config(format!("this bound needs --{flag}")))
}

pub fn bounds(args: &BoundsArgs) -> CliResult<String> {
    let start = || -> CliResult<StartTerm> {
        let source = if args.unnormalized { PiSource::UnnormalizedRatio } else { PiSource::Normalized };
        Ok(StartTerm { log_pi_x0: need(args.log_pi0, "log-pi0")?, source })
    };
    let q = match args.kind {
        BoundKind::Sr => BoundQuery::SrMix { n: need(args.n, "n")?, x0_size: args.x0_size, start: start()?, eps: args.eps },
        BoundKind::UniformBase => BoundQuery::UniformBase {
            n: need(args.n, "n")?,
            k: need(args.k, "k")?,
            beta: args.beta,
            zeta: args.zeta,
            start: start()?,
            eps: args.eps,
        },
        BoundKind::PartitionBase => BoundQuery::PartitionBase {
            k: need(args.k, "k")?,
            max_part_size: need(args.max_part_size, "max-part-size")?,
            beta: args.beta,
            zeta: args.zeta,
            start: start()?,
            eps: args.eps,
        },
        BoundKind::GeneralBase => BoundQuery::GeneralBase {
            n: need(args.n, "n")?,
            k: need(args.k, "k")?,
            beta: args.beta,
            zeta: args.zeta,
            log_z: need(args.log_z, "log-z")?,
            log_z_c: need(args.log_zc, "log-zc")?,
            start: start()?,
            eps: args.eps,
        },
        BoundKind::AddDelete => BoundQuery::AddDelete { n: need(args.n, "n")?, alpha: need(args.alpha, "alpha")?, eps: args.eps },
    };
    Ok(theoretical_bound(&q)?.to_kv())
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

