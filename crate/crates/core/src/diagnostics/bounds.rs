use std::fmt::Write as _;

use crate::error::{Error, Result};

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// `ln k!`.
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// How `log_pi_x0` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiSource {
    /// `log π_C(X₀)` from an exact normalization.
    Normalized,
    /// A log ratio of unnormalized weights standing in for it.
    UnnormalizedRatio,
}

impl PiSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            PiSource::Normalized => "normalized",
            PiSource::UnnormalizedRatio => "unnormalized_ratio",
        }
    }
}

/// Starting-state term shared by the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartTerm {
    pub log_pi_x0: f64,
    pub source: PiSource,
}

impl StartTerm {
    pub fn normalized(log_pi_x0: f64) -> Self {
        Self { log_pi_x0, source: PiSource::Normalized }
    }
}

/// Inputs for one closed-form mixing-time bound.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundQuery {
    /// Mixed chain: `2N² (ln C(N, |X₀|) + ln π(X₀)⁻¹ + ln ε⁻¹)`.
    SrMix { n: usize, x0_size: usize, start: StartTerm, eps: f64 },
    /// Exchange chain on `|S| = k`: `4k(N−k) e^{2βζ} (ln π_C(X₀)⁻¹ + ln ε⁻¹)`.
    UniformBase { n: usize, k: usize, beta: f64, zeta: f64, start: StartTerm, eps: f64 },
    /// Exchange chain on a partition matroid: `4k² L e^{2βζ} (…)` with `L`
    /// the largest part size.
    PartitionBase { k: usize, max_part_size: usize, beta: f64, zeta: f64, start: StartTerm, eps: f64 },
    /// Exchange chain on a general matroid: `4 k! (Z/Z_C) k(N−k) e^{2βζ} (…)`.
    GeneralBase { n: usize, k: usize, beta: f64, zeta: f64, log_z: f64, log_z_c: f64, start: StartTerm, eps: f64 },
    /// Add/delete chain: `2N ln(N/ε) / (1 − α)`, valid for `α < 1`.
    AddDelete { n: usize, alpha: f64, eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub kind: &'static str,
    pub value: f64,
    pub params: Vec<(&'static str, String)>,
}

impl BoundReport {
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "bound = {}", self.kind);
        for (k, v) in &self.params {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(out, "value = {}", self.value);
        out
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {eps}")))
    }
}

fn check_start(start: &StartTerm) -> Result<()> {
    if start.log_pi_x0.is_nan() || start.log_pi_x0 == f64::INFINITY {
        return Err(Error::InvalidInput(format!("log pi(x0) = {} is not usable", start.log_pi_x0)));
    }
    if start.log_pi_x0 == f64::NEG_INFINITY {
        return Err(Error::InvalidInput("starting state has zero probability".into()));
    }
    if start.source == PiSource::Normalized && start.log_pi_x0 > 1e-12 {
        return Err(Error::InvalidInput(format!("normalized log pi(x0) = {} exceeds 0", start.log_pi_x0)));
    }
    Ok(())
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be finite, got {v}")))
    }
}

fn log_term(start: &StartTerm, eps: f64) -> f64 {
    -start.log_pi_x0 - eps.ln()
}

fn start_params(params: &mut Vec<(&'static str, String)>, start: &StartTerm, eps: f64) {
    params.push(("log_pi_x0", start.log_pi_x0.to_string()));
    params.push(("pi_x0", start.source.as_str().to_string()));
    params.push(("eps", eps.to_string()));
}

/// Evaluates a closed-form bound. Natural logarithms throughout.
pub fn theoretical_bound(q: &BoundQuery) -> Result<BoundReport> {
    let mut params = Vec::new();
    let (kind, value) = match *q {
        BoundQuery::SrMix { n, x0_size, ref start, eps } => {
            check_eps(eps)?;
            check_start(start)?;
            check_k(n, x0_size)?;
            params.push(("n", n.to_string()));
            params.push(("x0_size", x0_size.to_string()));
            start_params(&mut params, start, eps);
            let nf = n as f64;
            ("sr_mix", 2.0 * nf * nf * (ln_binomial(n, x0_size) + log_term(start, eps)))
        }
        BoundQuery::UniformBase { n, k, beta, zeta, ref start, eps } => {
            check_eps(eps)?;
            check_start(start)?;
            check_k(n, k)?;
            check_finite("beta * zeta", beta * zeta)?;
            params.extend([("n", n.to_string()), ("k", k.to_string()), ("beta", beta.to_string()), ("zeta", zeta.to_string())]);
            start_params(&mut params, start, eps);
            let scale = 4.0 * (k * (n - k)) as f64 * (2.0 * beta * zeta).exp();
            ("uniform_base", scale * log_term(start, eps))
        }
        BoundQuery::PartitionBase { k, max_part_size, beta, zeta, ref start, eps } => {
            check_eps(eps)?;
            check_start(start)?;
            check_finite("beta * zeta", beta * zeta)?;
            params.extend([
                ("k", k.to_string()),
                ("max_part_size", max_part_size.to_string()),
                ("beta", beta.to_string()),
                ("zeta", zeta.to_string()),
            ]);
            start_params(&mut params, start, eps);
            let scale = 4.0 * (k * k * max_part_size) as f64 * (2.0 * beta * zeta).exp();
            ("partition_base", scale * log_term(start, eps))
        }
        BoundQuery::GeneralBase { n, k, beta, zeta, log_z, log_z_c, ref start, eps } => {
            check_eps(eps)?;
            check_start(start)?;
            check_k(n, k)?;
            check_finite("beta * zeta", beta * zeta)?;
            check_finite("log Z", log_z)?;
            check_finite("log Z_C", log_z_c)?;
            params.extend([
                ("n", n.to_string()),
                ("k", k.to_string()),
                ("beta", beta.to_string()),
                ("zeta", zeta.to_string()),
                ("log_z", log_z.to_string()),
                ("log_z_c", log_z_c.to_string()),
            ]);
            start_params(&mut params, start, eps);
            let pairs = (k * (n - k)) as f64;
            let value = if pairs == 0.0 {
                0.0
            } else {
                let log_scale = 4f64.ln() + ln_factorial(k) + (log_z - log_z_c) + pairs.ln() + 2.0 * beta * zeta;
                (log_scale + log_term(start, eps).ln()).exp()
            };
            ("general_base", value)
        }
        BoundQuery::AddDelete { n, alpha, eps } => {
            check_eps(eps)?;
            check_finite("alpha", alpha)?;
            if alpha >= 1.0 {
                return Err(Error::BoundInapplicable(format!("alpha = {alpha} is not below 1")));
            }
            params.extend([("n", n.to_string()), ("alpha", alpha.to_string()), ("eps", eps.to_string())]);
            let nf = n as f64;
            ("add_delete", 2.0 * nf * (nf / eps).ln() / (1.0 - alpha))
        }
    };
    Ok(BoundReport { kind, value, params })
}
