//! Trace directories: one `chain_NNN.csv` per chain plus `meta.txt`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use setchain::samplers::TraceMeta;
use setchain::{RunOptions, SamplerKind, Trace};

use crate::error::{CliError, CliResult};

pub fn chain_file_name(chain: usize) -> String {
    format!("chain_{chain:03}.csv")
}

pub fn write_traces(dir: &Path, traces: &[Trace], opts: &RunOptions) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    for t in traces {
        fs::write(dir.join(chain_file_name(t.meta.chain)), t.to_csv())?;
    }
    if let Some(first) = traces.first() {
        let m = &first.meta;
        let mut meta = String::new();
        let _ = writeln!(meta, "model = {}", m.model);
        let _ = writeln!(meta, "constraint = {}", m.constraint);
        let _ = writeln!(meta, "sampler = {}", m.sampler);
        let _ = writeln!(meta, "n = {}", m.n);
        let _ = writeln!(meta, "seed = {}", m.seed);
        let _ = writeln!(meta, "chains = {}", traces.len());
        let _ = writeln!(meta, "steps = {}", opts.steps);
        let _ = writeln!(meta, "burn_in = {}", m.burn_in);
        let _ = writeln!(meta, "thin = {}", m.thin);
        fs::write(dir.join("meta.txt"), meta)?;
    }
    Ok(())
}

fn read_meta(dir: &Path) -> CliResult<BTreeMap<String, String>> {
    let path = dir.join("meta.txt");
    if !path.exists() {
        return Ok(BTreeMap::new());
    }
    let text = fs::read_to_string(&path)?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once(" = ")
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected `key = value`", path.display(), i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Reads every `chain_*.csv` in `dir`, in file-name order. The ground set
/// size comes from `meta.txt`, then `n_hint`, then the largest label seen.
pub fn read_traces(dir: &Path, n_hint: Option<usize>) -> CliResult<Vec<Trace>> {
    let meta = read_meta(dir)?;
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name().and_then(|f| f.to_str()).is_some_and(|f| f.starts_with("chain_") && f.ends_with(".csv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Config(format!("{}: no chain_*.csv files", dir.display())));
    }
    let texts: Vec<String> = files.iter().map(fs::read_to_string).collect::<Result<_, _>>()?;
    let n = match meta.get("n").map(|v| v.parse::<usize>()) {
        Some(Ok(n)) => n,
        Some(Err(_)) => return Err(CliError::Config("meta.txt: bad n".into())),
        None => n_hint.unwrap_or_else(|| texts.iter().map(|t| Trace::max_label(t)).max().unwrap_or(0).max(1)),
    };
    let sampler = meta.get("sampler").and_then(|s| s.parse().ok()).unwrap_or(SamplerKind::SrMix);
    let num = |key: &str| meta.get(key).and_then(|v| v.parse::<u64>().ok()).unwrap_or(0);
    files
        .iter()
        .zip(&texts)
        .enumerate()
        .map(|(chain, (path, text))| {
            let records = Trace::parse_records(text, n)
                .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))?;
            Ok(Trace {
                meta: TraceMeta {
                    model: meta.get("model").cloned().unwrap_or_default(),
                    constraint: meta.get("constraint").cloned().unwrap_or_default(),
                    sampler,
                    n,
                    seed: num("seed"),
                    chain,
                    burn_in: num("burn_in"),
                    thin: num("thin").max(1),
                },
                records,
            })
        })
        .collect()
}
