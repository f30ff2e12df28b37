//! Horvitz-Thompson estimators from randomized responses and the
//! theoretical variance ledger under SRSWOR.

use crate::distributions::UniformInterval;
use crate::error::{Error, Result};
use crate::mechanisms::{
    unit_variance_switching, AlphaConfig, Mechanism, MechanismKind, RandomizedResponse,
    SwitchingConfig,
};
use crate::population::{
    compensated_sum, gamma_bounded, gamma_mean_concentration, gamma_proximity, summarize,
    Population, PopulationSummary,
};
use crate::sampling::{ht_direct_variance, SrsDesign};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRecord {
    pub total_estimate: f64,
    pub mean_estimate: f64,
    pub mechanism: MechanismKind,
    pub design: SrsDesign,
    /// Set when the total estimate is below zero.
    pub negative: bool,
}

impl EstimateRecord {
    pub fn from_total(total: f64, mechanism: MechanismKind, design: SrsDesign) -> Self {
        EstimateRecord {
            total_estimate: total,
            mean_estimate: total / design.population_size() as f64,
            mechanism,
            design,
            negative: total < 0.0,
        }
    }
}

/// `(N/n) Σ r_i`.
pub fn ht_rrt(
    responses: &[RandomizedResponse],
    design: &SrsDesign,
    mechanism: MechanismKind,
) -> Result<EstimateRecord> {
    if responses.is_empty() {
        return Err(Error::EmptySample);
    }
    if responses.len() != design.sample_size() {
        return Err(Error::SizeMismatch {
            n: responses.len(),
            population: design.population_size(),
        });
    }
    let sum = compensated_sum(responses.iter().map(|r| r.r));
    Ok(EstimateRecord::from_total(
        design.weight() * sum,
        mechanism,
        *design,
    ))
}

fn sizes(design: &SrsDesign) -> (f64, f64) {
    (design.population_size() as f64, design.sample_size() as f64)
}

/// `(N²/n)(Ȳ(M - Ȳ) - ((n - 1)/N) S²)`: total variance of the basic
/// estimator on `(0, M)`.
pub fn variance_basic_total(summary: &PopulationSummary, design: &SrsDesign, upper: f64) -> f64 {
    let (big_n, n) = sizes(design);
    let y = summary.mean;
    big_n * big_n / n * (y * (upper - y) - (n - 1.0) / big_n * summary.variance)
}

/// `(N² m / n)(M - Ȳ)`, the variance removed by moving the lower end of the
/// threshold interval from 0 to `m`.
pub fn bounded_reduction(
    summary: &PopulationSummary,
    design: &SrsDesign,
    iv: &UniformInterval,
) -> f64 {
    let (big_n, n) = sizes(design);
    big_n * big_n * iv.lo / n * (iv.hi - summary.mean)
}

/// `(M² N² / n) Γ_{Y,M}` for the basic mechanism on `(0, M)`.
pub fn randomization_contribution_basic(
    pop: &Population,
    design: &SrsDesign,
    upper: f64,
) -> Result<f64> {
    let (big_n, n) = sizes(design);
    let gamma = gamma_mean_concentration(pop, upper)?;
    let value = upper * upper * big_n * big_n / n * gamma;
    debug_assert!({
        let s2 = summarize(pop).variance;
        let alt = upper * upper * big_n * big_n / n * gamma_proximity(pop, upper)?
            - big_n * (big_n - 1.0) / n * s2;
        (alt - value).abs() <= 1e-9 * value.abs().max(upper * upper)
    });
    Ok(value)
}

/// `((M - m)² N² / n)[(1 - 2α) Γ' + α²/3]` with `Γ'` the concentration of the
/// clamped values in the `(m, M)` frame. On `(0, M)` this is the usual
/// `(M² N² / n)[(1 - 2α) Γ_{Y,M} + α²/3]`.
pub fn randomization_contribution_alpha(
    pop: &Population,
    design: &SrsDesign,
    cfg: &AlphaConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (big_n, n) = sizes(design);
    let w = cfg.bounds.width();
    let gamma = gamma_bounded(pop, &cfg.bounds)?;
    let a = cfg.alpha;
    Ok(w * w * big_n * big_n / n * ((1.0 - 2.0 * a) * gamma + a * a / 3.0))
}

/// `(M² N² / n) Γ (1 - 3Γ)`: the α contribution at `α = 3Γ`.
pub fn randomization_contribution_alpha_optimal(
    pop: &Population,
    design: &SrsDesign,
    iv: &UniformInterval,
) -> Result<f64> {
    let (big_n, n) = sizes(design);
    let w = iv.width();
    let gamma = gamma_bounded(pop, iv)?;
    Ok(w * w * big_n * big_n / n * gamma * (1.0 - 3.0 * gamma))
}

/// `(N/n) Σ_U Var(R_i)` for the switching mechanism, values clamped into `[m, M]`.
pub fn randomization_contribution_switching(
    pop: &Population,
    design: &SrsDesign,
    cfg: &SwitchingConfig,
) -> Result<f64> {
    cfg.validate()?;
    let mut terms = Vec::with_capacity(pop.len());
    for &y in pop.values() {
        terms.push(unit_variance_switching(cfg.bounds.clamp(y), cfg)?);
    }
    Ok(design.weight() * compensated_sum(terms))
}

/// The three-sum form for `T = 0.9M` on `(0, M)`:
/// `(N/n)[Σ Y(M - Y) + M Σ_{Y≤T} (0.2Y + 0.09M) + M Σ_{Y>T} (1.89M - 1.8Y)]`.
pub fn randomization_contribution_switching_09(
    pop: &Population,
    design: &SrsDesign,
    upper: f64,
) -> Result<f64> {
    if !(upper.is_finite() && upper > 0.0) {
        return Err(Error::NonPositiveBound(upper));
    }
    let t = 0.9 * upper;
    let base = compensated_sum(pop.values().iter().map(|&y| y * (upper - y)));
    let low = compensated_sum(
        pop.values()
            .iter()
            .filter(|&&y| y <= t)
            .map(|&y| 0.20 * y + 0.09 * upper),
    );
    let high = compensated_sum(
        pop.values()
            .iter()
            .filter(|&&y| y > t)
            .map(|&y| -1.80 * y + 1.89 * upper),
    );
    Ok(design.weight() * (base + upper * (low + high)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceLedger {
    pub randomization_contribution: f64,
    pub sampling_contribution: f64,
    pub total: f64,
}

pub fn decompose_variance(randomization: f64, sampling: f64) -> Result<VarianceLedger> {
    for v in [randomization, sampling] {
        if !(v >= 0.0) {
            return Err(Error::NegativeComponent(v));
        }
    }
    Ok(VarianceLedger {
        randomization_contribution: randomization,
        sampling_contribution: sampling,
        total: randomization + sampling,
    })
}

/// Exact ledger for any mechanism: the sampling part is the direct HT
/// variance of `E(r_i)` and the randomization part is `(N/n) Σ_U Var(r_i)`.
pub fn theoretical_ledger(
    pop: &Population,
    design: &SrsDesign,
    mechanism: &Mechanism,
) -> Result<VarianceLedger> {
    mechanism.validate()?;
    if design.population_size() != pop.len() {
        return Err(Error::SizeMismatch {
            n: design.sample_size(),
            population: pop.len(),
        });
    }
    let expected = match mechanism.interval() {
        Some(iv) => pop.clamped(iv),
        None => pop.clone(),
    };
    let sampling = ht_direct_variance(&summarize(&expected), design);
    let mut terms = Vec::with_capacity(pop.len());
    for &y in pop.values() {
        terms.push(mechanism.response_variance(y)?);
    }
    let randomization = design.weight() * compensated_sum(terms);
    decompose_variance(randomization, sampling.max(0.0))
}

/// Exact `E(t̂)` for any mechanism, `Σ_U E(r_i)`.
pub fn expected_total(pop: &Population, mechanism: &Mechanism) -> f64 {
    compensated_sum(pop.values().iter().map(|&y| mechanism.expected_response(y)))
}
