//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::time::Instant;

use setchain::diagnostics::{theoretical_bound, BoundQuery, StartTerm};
use setchain::oracle::{
    alpha_coupling, enumerate_distribution, homogenized_equivalence_check, spectral_analysis, transition_matrix,
    tv_distance, zeta_f,
};
use setchain::{
    run_chains, ConstraintFamily, DppModel, IsingChainModel, ModularModel, RunOptions, SamplerKind, SetModel,
};
use setchain_cli::presets::{ising_partition, mix_vs_add_delete, PresetOptions};

type Outcome = Result<String, String>;
type Snapshot = Vec<(String, Vec<u8>)>;
type Criterion = (&'static str, fn() -> Outcome);

const STATIONARITY_TOL: f64 = 1e-10;
const BALANCE_TOL: f64 = 1e-12;
const EQUIVALENCE_TOL: f64 = 1e-12;
const TV_TOL: f64 = 0.05;
const SPOT_TOL: f64 = 1e-6;
const MARGINAL_TOL: f64 = 0.02;
const BOUND_EPS: f64 = 0.01;
const SEEDS: [u64; 3] = [0, 1, 2];

struct Fixture {
    name: &'static str,
    model: Box<dyn SetModel + Send + Sync>,
    constraint: ConstraintFamily,
    kind: SamplerKind,
}

fn fixture(
    name: &'static str,
    model: impl SetModel + 'static,
    constraint: ConstraintFamily,
    kind: SamplerKind,
) -> Fixture {
    Fixture { name, model: Box::new(model), constraint, kind }
}

fn dpp(spectrum: &[f64], seed: u64) -> DppModel {
    DppModel::from_spectrum(spectrum, seed, 1.0).unwrap()
}

fn ising(weights: &[f64], delta: f64, beta: f64) -> IsingChainModel {
    IsingChainModel::new(weights.len() + 1, weights.to_vec(), delta, beta).unwrap()
}

fn fixtures() -> Vec<Fixture> {
    use SamplerKind::*;
    let free = |n| ConstraintFamily::unconstrained(n).unwrap();
    let base = |n, k| ConstraintFamily::uniform_base(n, k).unwrap();
    let rank = |n, k| ConstraintFamily::uniform_rank(n, k).unwrap();
    let pairs = |labels: &[usize]| ConstraintFamily::partition_base(labels).unwrap();
    vec![
        fixture("dpp n=5", dpp(&[2.0, 1.0, 0.7, 0.3, 0.1], 1), free(5), SrMix),
        fixture("dpp n=6 rank-deficient", dpp(&[3.0, 1.5, 0.5, 0.0, 0.0, 0.0], 2), free(6), SrMix),
        fixture("dpp n=7", dpp(&[4.0, 2.0, 1.0, 0.5, 0.25, 0.12, 0.06], 3), free(7), SrMix),
        fixture("ising n=6", ising(&[0.3, 0.9, 0.1, 0.6, 0.4], 0.7, 2.0), free(6), SrMix),
        fixture("dpp k=3 of 6", dpp(&[2.0, 1.5, 1.0, 0.5, 0.3, 0.1], 4), base(6, 3), Exchange),
        fixture("ising partition n=8", ising(&[0.2, 0.8, 0.5, 0.9, 0.1, 0.7, 0.3], 1.0, 3.0), pairs(&[1, 1, 2, 2, 3, 3, 4, 4]), Exchange),
        fixture("modular k=2 of 5", ModularModel::new(vec![0.5, -1.0, 2.0, 0.0, 1.0], 1.0).unwrap(), base(5, 2), Exchange),
        fixture("dpp |S|<=3 of 6", dpp(&[2.0, 1.5, 1.0, 0.5, 0.3, 0.1], 5), rank(6, 3), AddDelete),
        fixture("ising |S|<=4 of 7", ising(&[0.5, 0.1, 0.9, 0.4, 0.8, 0.2], 0.5, 1.0), rank(7, 4), AddDelete),
        fixture("modular |S|<=5 of 5", ModularModel::new(vec![0.2, -0.4, 0.1, 0.3, -0.2], 1.0).unwrap(), rank(5, 5), AddDelete),
        fixture("constant |S|<=3 of 6", ModularModel::constant(6).unwrap(), rank(6, 3), AddDelete),
    ]
}

fn detailed_balance() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    let fixtures = fixtures();
    let total = fixtures.len();
    for f in fixtures {
        let t = enumerate_distribution(&f.model, &f.constraint).map_err(|e| e.to_string())?;
        let p = transition_matrix(&f.model, &f.constraint, f.kind).map_err(|e| e.to_string())?;
        let stat = p.stationarity_residual(&t.probs);
        let bal = p.balance_residual(&t.probs);
        if stat > STATIONARITY_TOL || bal > BALANCE_TOL {
            return Err(format!("{} ({}): stationarity {stat:.3e}, balance {bal:.3e}", f.name, f.kind));
        }
        worst = (worst.0.max(stat), worst.1.max(bal));
    }
    Ok(format!("{total} fixtures; max |πP − π| = {:.2e}, max balance violation = {:.2e}", worst.0, worst.1))
}

fn homogenization() -> Outcome {
    let models: Vec<(&str, Box<dyn SetModel>)> = vec![
        ("dpp n=4", Box::new(dpp(&[2.0, 1.0, 0.5, 0.2], 7))),
        ("dpp n=6", Box::new(dpp(&[3.0, 2.0, 1.0, 0.5, 0.2, 0.1], 8))),
        ("ising n=5", Box::new(ising(&[0.4, 0.9, 0.2, 0.6], 0.8, 2.0))),
        ("ising n=6", Box::new(ising(&[0.1, 0.5, 0.3, 0.7, 0.9], 1.0, 1.0))),
    ];
    let mut worst = 0.0f64;
    for (name, m) in &models {
        let r = homogenized_equivalence_check(m).map_err(|e| format!("{name}: {e}"))?;
        let gap = r.max_abs_diff.max(r.lumping_residual);
        if gap > EQUIVALENCE_TOL {
            return Err(format!("{name}: entrywise gap {gap:.3e}"));
        }
        worst = worst.max(gap);
    }
    Ok(format!("{} models; max entrywise gap {worst:.2e}", models.len()))
}

fn oracle_convergence() -> Outcome {
    let m = dpp(&[3.0, 2.0, 1.5, 1.0, 0.6, 0.3, 0.2, 0.1], 9);
    let c = ConstraintFamily::uniform_rank(8, 4).unwrap();
    let t = enumerate_distribution(&m, &c).map_err(|e| e.to_string())?;
    let mut tvs = Vec::new();
    for seed in 0..5 {
        let mut opts = RunOptions::new(1, 1_000_000, seed);
        opts.incremental = true;
        let traces = run_chains(&m, &c, SamplerKind::AddDelete, &opts).map_err(|e| e.to_string())?;
        let mut counts = vec![0.0; t.len()];
        for r in &traces[0].records {
            counts[t.index_of(&r.subset_after).expect("feasible")] += 1.0;
        }
        let total: f64 = counts.iter().sum();
        let empirical: Vec<f64> = counts.iter().map(|c| c / total).collect();
        tvs.push(tv_distance(&empirical, &t.probs).map_err(|e| e.to_string())?);
    }
    let worst = tvs.iter().cloned().fold(0.0, f64::max);
    let text = format!("TV over 5 seeds: {}", fmt_list(&tvs, 4));
    if worst < TV_TOL { Ok(text) } else { Err(text) }
}

fn bound_dominance() -> Outcome {
    let mut checked = 0;
    let mut lines = Vec::new();
    for f in fixtures() {
        let t = enumerate_distribution(&f.model, &f.constraint).map_err(|e| e.to_string())?;
        let p = transition_matrix(&f.model, &f.constraint, f.kind).map_err(|e| e.to_string())?;
        let x0 = t.mode().clone();
        let spectral = spectral_analysis(&p.matrix, &t, &x0, BOUND_EPS).map_err(|e| e.to_string())?;
        let start = StartTerm::normalized(t.prob(&x0).ln());
        let n = f.constraint.n();
        let beta = f.model.beta();
        let mut queries = Vec::new();
        match (&f.constraint, f.kind) {
            (ConstraintFamily::Unconstrained { .. }, SamplerKind::SrMix) => {
                // the mixed-chain bound covers strongly Rayleigh measures only
                if !f.name.starts_with("dpp") {
                    continue;
                }
                queries.push(BoundQuery::SrMix { n, x0_size: x0.len(), start, eps: BOUND_EPS });
            }
            (ConstraintFamily::UniformBase { k, .. }, _) => {
                let zeta = zeta_f(&f.model, &f.constraint).map_err(|e| e.to_string())?;
                queries.push(BoundQuery::UniformBase { n, k: *k, beta, zeta, start, eps: BOUND_EPS });
                queries.push(BoundQuery::GeneralBase {
                    n,
                    k: *k,
                    beta,
                    zeta,
                    log_z: t.log_z_total,
                    log_z_c: t.log_z_constrained,
                    start,
                    eps: BOUND_EPS,
                });
            }
            (ConstraintFamily::PartitionBase(part), _) => {
                let zeta = zeta_f(&f.model, &f.constraint).map_err(|e| e.to_string())?;
                let k = part.rank();
                queries.push(BoundQuery::PartitionBase {
                    k,
                    max_part_size: part.max_part_size(),
                    beta,
                    zeta,
                    start,
                    eps: BOUND_EPS,
                });
                queries.push(BoundQuery::GeneralBase {
                    n,
                    k,
                    beta,
                    zeta,
                    log_z: t.log_z_total,
                    log_z_c: t.log_z_constrained,
                    start,
                    eps: BOUND_EPS,
                });
            }
            (ConstraintFamily::UniformRank { k, .. }, _) => {
                let alpha = alpha_coupling(&f.model, *k).map_err(|e| e.to_string())?.alpha;
                if alpha >= 1.0 {
                    lines.push(format!("{}: alpha {alpha:.3} >= 1, skipped", f.name));
                    continue;
                }
                queries.push(BoundQuery::AddDelete { n, alpha, eps: BOUND_EPS });
            }
            _ => continue,
        }
        for q in queries {
            let b = theoretical_bound(&q).map_err(|e| e.to_string())?;
            if b.value < spectral.relaxation_bound {
                return Err(format!(
                    "{}: {} bound {:.3} < spectral bound {:.3}",
                    f.name, b.kind, b.value, spectral.relaxation_bound
                ));
            }
            checked += 1;
        }
    }
    lines.insert(0, format!("{checked} bound/fixture pairs dominate the spectral bound"));
    Ok(lines.join("; "))
}

fn spot_values() -> Outcome {
    let cases = [
        (
            "sr_mix",
            BoundQuery::SrMix { n: 10, x0_size: 0, start: StartTerm::normalized(0.01f64.ln()), eps: 0.01 },
            400.0 * 100f64.ln(),
        ),
        (
            "uniform_base",
            BoundQuery::UniformBase {
                n: 4,
                k: 2,
                beta: 1.0,
                zeta: 0.0,
                start: StartTerm::normalized((1.0f64 / 6.0).ln()),
                eps: 0.01,
            },
            16.0 * (6f64.ln() + 100f64.ln()),
        ),
        ("add_delete", BoundQuery::AddDelete { n: 3, alpha: 0.5, eps: 0.1 }, 12.0 * 30f64.ln()),
    ];
    let mut parts = Vec::new();
    for (name, q, expect) in cases {
        let got = theoretical_bound(&q).map_err(|e| e.to_string())?.value;
        if (got - expect).abs() > SPOT_TOL {
            return Err(format!("{name}: {got} vs {expect}"));
        }
        parts.push(format!("{name} {got:.4}"));
    }
    Ok(parts.join(", "))
}

fn steps_or_max(s: Option<u64>) -> u64 {
    s.unwrap_or(u64::MAX)
}

fn fmt_step(s: Option<u64>) -> String {
    s.map_or_else(|| "none".into(), |v| v.to_string())
}

fn ising_ordering() -> Outcome {
    let mut rows = Vec::new();
    let mut ok = true;
    for seed in SEEDS {
        let runs = ising_partition(&PresetOptions { seed, ..Default::default() }, None).map_err(|e| e.to_string())?;
        let [a, b, c] = [0, 1, 2].map(|i| runs[i].mixing_step);
        ok &= steps_or_max(b) > steps_or_max(a) && steps_or_max(c) < steps_or_max(b);
        rows.push(format!("seed {seed}: (1,1) {} (3,1) {} (3,0.5) {}", fmt_step(a), fmt_step(b), fmt_step(c)));
    }
    let text = rows.join("; ");
    if ok { Ok(text) } else { Err(text) }
}

fn mix_beats_add_delete() -> Outcome {
    let mut rows = Vec::new();
    let mut flat = Vec::new();
    let mut ok = true;
    for seed in SEEDS {
        let runs = mix_vs_add_delete(&PresetOptions { seed, ..Default::default() }, None).map_err(|e| e.to_string())?;
        let step = |spectrum: &str, kind: SamplerKind| {
            runs.iter().find(|r| r.spectrum == spectrum && r.sampler == kind).and_then(|r| r.mixing_step)
        };
        let (mix, ad) = (step("sharp", SamplerKind::SrMix), step("sharp", SamplerKind::AddDelete));
        ok &= mix.is_some() && steps_or_max(mix) < steps_or_max(ad);
        rows.push(format!("seed {seed}: sharp mix {} add_delete {}", fmt_step(mix), fmt_step(ad)));
        flat.push(format!(
            "{}/{}",
            fmt_step(step("flat", SamplerKind::SrMix)),
            fmt_step(step("flat", SamplerKind::AddDelete))
        ));
    }
    let text = format!("{}; flat mix/add_delete (not asserted): {}", rows.join("; "), flat.join(" "));
    if ok { Ok(text) } else { Err(text) }
}

fn dpp_marginals() -> Outcome {
    let m = dpp(&[3.0, 2.0, 1.5, 1.0, 0.8, 0.5, 0.3, 0.2, 0.1, 0.05], 11);
    let c = ConstraintFamily::unconstrained(10).unwrap();
    let mut opts = RunOptions::new(10, 100_000, 0);
    opts.burn_in = 1000;
    opts.incremental = true;
    let traces = run_chains(&m, &c, SamplerKind::SrMix, &opts).map_err(|e| e.to_string())?;
    let samples: usize = traces.iter().map(|t| t.records.len()).sum();
    let k = m.marginal_kernel();
    let mut worst = 0.0f64;
    for i in 0..10 {
        let hits: usize = traces.iter().flat_map(|t| &t.records).filter(|r| r.subset_after.contains(i)).count();
        worst = worst.max((hits as f64 / samples as f64 - k[(i, i)]).abs());
    }
    let text = format!("{samples} samples; max |p̂_i − K_ii| = {worst:.4}");
    if samples >= 200_000 && worst <= MARGINAL_TOL { Ok(text) } else { Err(text) }
}

fn zeta_and_alpha() -> Outcome {
    let modular = ModularModel::new(vec![1.0, -2.0, 0.5, 3.0, 0.0], 2.0).unwrap();
    for c in [
        ConstraintFamily::unconstrained(5).unwrap(),
        ConstraintFamily::uniform_base(5, 2).unwrap(),
        ConstraintFamily::partition_base(&[1, 1, 2, 2, 2]).unwrap(),
    ] {
        let z = zeta_f(&modular, &c).map_err(|e| e.to_string())?;
        if z != 0.0 {
            return Err(format!("zeta {z} on modular fixture with {}", c.describe()));
        }
    }
    for (n, k) in [(4, 2), (5, 3), (6, 6)] {
        let r = alpha_coupling(&ModularModel::constant(n).unwrap(), k).map_err(|e| e.to_string())?;
        let expect = if k == n { r.alpha } else { 0.5 };
        if (r.alpha - expect).abs() > 1e-12 || r.alpha >= 1.0 {
            return Err(format!("constant F n={n} k={k}: alpha {}", r.alpha));
        }
    }
    let r = alpha_coupling(&ModularModel::constant(5).unwrap(), 3).map_err(|e| e.to_string())?;
    let mut w = vec![0.0; 4];
    w[0] = 100.0;
    let extreme = alpha_coupling(&ModularModel::new(w, 1.0).unwrap(), 2).map_err(|e| e.to_string())?;
    if extreme.alpha < 1.0 || extreme.contraction_bound(BOUND_EPS).is_ok() {
        return Err(format!("extreme weight alpha {} not flagged", extreme.alpha));
    }
    Ok(format!("zeta = 0 on modular fixtures; constant-F alpha = {}; extreme-weight alpha = {} flagged", r.alpha, extreme.alpha))
}

fn cli(args: &[&str]) -> Result<String, String> {
    setchain_cli::run_captured(std::iter::once("setchain").chain(args.iter().copied())).map_err(|e| e.to_string())
}

fn snapshot(dir: &Path) -> Snapshot {
    let mut files: Vec<_> = walk(dir);
    files.sort();
    files.into_iter().map(|p| (p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap())).collect()
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() { out.extend(walk(&p)) } else { out.push(p) }
    }
    out
}

fn determinism() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = |name: &str| configs.join(name).display().to_string();
    let run_all = |root: &Path| -> Result<(Vec<String>, Snapshot), String> {
        let p = |sub: &str| root.join(sub).display().to_string();
        let out = vec![
            cli(&["sample", "--config", &cfg("dpp_free.json"), "--steps", "3000", "--out", &p("mix")])?,
            cli(&["sample", "--config", &cfg("ising_partition.json"), "--steps", "3000", "--out", &p("ising")])?,
            cli(&["diagnose", "--traces", &p("ising"), "--target", "3", "--given", "1", "--out", &p("ising")])?,
            cli(&["exact", "--config", &cfg("dpp_rank2.json"), "--query", "table", "--out", &p("table.csv")])?,
            cli(&["exact", "--config", &cfg("dpp_rank2.json"), "--query", "spectral"])?,
            cli(&["bounds", "--kind", "add-delete", "--n", "3", "--alpha", "0.5", "--eps", "0.1"])?,
            cli(&["experiment", "ising-partition", "--steps", "2000", "--out", &p("preset")])?,
        ];
        // the output directory itself is the only expected difference
        let out = out.into_iter().map(|s| s.replace(&root.display().to_string(), "<root>")).collect();
        Ok((out, snapshot(root)))
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_all(a.path())?;
    let second = run_all(b.path())?;
    if first.0 != second.0 {
        return Err("stdout differs between repeats".into());
    }
    if first.1 != second.1 {
        let diff: Vec<_> = first.1.iter().zip(&second.1).filter(|(x, y)| x != y).map(|(x, _)| x.0.clone()).collect();
        return Err(format!("files differ: {diff:?}"));
    }
    Ok(format!("7 commands, {} output files byte-identical", first.1.len()))
}

fn fmt_list(xs: &[f64], digits: usize) -> String {
    xs.iter().map(|x| format!("{x:.digits$}")).collect::<Vec<_>>().join(" ")
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("detailed balance and stationarity", detailed_balance),
        ("homogenization equivalence", homogenization),
        ("oracle convergence", oracle_convergence),
        ("bound dominance", bound_dominance),
        ("closed-form spot values", spot_values),
        ("ising preset ordering", ising_ordering),
        ("mix vs add/delete", mix_beats_add_delete),
        ("dpp marginals", dpp_marginals),
        ("zeta and alpha oracles", zeta_and_alpha),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
