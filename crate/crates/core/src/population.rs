//! Finite populations, their summary statistics and the concentration
//! measures that drive randomization variance.

use crate::distributions::UniformInterval;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    values: Vec<f64>,
}

impl Population {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::PopulationTooSmall(values.len()));
        }
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidValue(bad));
        }
        Ok(Population { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of the 1-based unit label `i`.
    pub fn unit(&self, label: usize) -> f64 {
        self.values[label - 1]
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.len() as f64
    }

    /// Population with every value clamped into `[iv.lo, iv.hi]`.
    pub fn clamped(&self, iv: &UniformInterval) -> Population {
        Population {
            values: self.values.iter().map(|&y| iv.clamp(y)).collect(),
        }
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSummary {
    pub size: usize,
    pub total: f64,
    pub mean: f64,
    /// S² with divisor N - 1.
    pub variance: f64,
    /// Mean of the squared values.
    pub second_raw_moment: f64,
}

pub fn summarize(pop: &Population) -> PopulationSummary {
    let n = pop.len() as f64;
    let total = pop.total();
    let mean = total / n;
    let ss = compensated_sum(pop.values.iter().map(|y| (y - mean) * (y - mean)));
    let variance = ss / (n - 1.0);
    PopulationSummary {
        size: pop.len(),
        total,
        mean,
        variance,
        second_raw_moment: compensated_sum(pop.values.iter().map(|y| y * y)) / n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationMeasures {
    pub gamma_mean: f64,
    pub gamma_proximity: f64,
    pub bound_m: f64,
}

fn check_bound(upper: f64) -> Result<()> {
    if upper.is_finite() && upper > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveBound(upper))
    }
}

/// Mean relative concentration, `(1/N) Σ (Y/M)(1 - Y/M)`.
pub fn gamma_mean_concentration(pop: &Population, upper: f64) -> Result<f64> {
    check_bound(upper)?;
    let s = compensated_sum(pop.values.iter().map(|&y| {
        let r = y / upper;
        r * (1.0 - r)
    }));
    Ok(s / pop.len() as f64)
}

/// Proximity of the population mean to `M/2`, `(Ȳ/M)(1 - Ȳ/M)`.
pub fn gamma_proximity(pop: &Population, upper: f64) -> Result<f64> {
    check_bound(upper)?;
    let r = pop.mean() / upper;
    Ok(r * (1.0 - r))
}

pub fn concentration(pop: &Population, upper: f64) -> Result<ConcentrationMeasures> {
    Ok(ConcentrationMeasures {
        gamma_mean: gamma_mean_concentration(pop, upper)?,
        gamma_proximity: gamma_proximity(pop, upper)?,
        bound_m: upper,
    })
}

/// Concentration measure in the `(m, M)` frame: the mean of `p (1 - p)`
/// with `p = (clamp(Y) - m) / (M - m)`. Equals [`gamma_mean_concentration`]
/// when `m = 0` and every value lies in `[0, M]`.
pub fn gamma_bounded(pop: &Population, iv: &UniformInterval) -> Result<f64> {
    iv.validate()?;
    let w = iv.width();
    let s = compensated_sum(pop.values.iter().map(|&y| {
        let p = (iv.clamp(y) - iv.lo) / w;
        p * (1.0 - p)
    }));
    Ok(s / pop.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticGamma {
    pub gamma_mean: f64,
    pub gamma_proximity: f64,
}

/// Limits of both measures for i.i.d. values with mean `mu` and variance `sigma2`.
pub fn gamma_asymptotic(mu: f64, sigma2: f64, upper: f64) -> Result<AsymptoticGamma> {
    check_bound(upper)?;
    if !(sigma2.is_finite() && sigma2 >= 0.0) || !mu.is_finite() {
        return Err(Error::MissingPriorMoments);
    }
    let r = mu / upper;
    let proximity = r * (1.0 - r);
    Ok(AsymptoticGamma {
        gamma_mean: proximity - sigma2 / (upper * upper),
        gamma_proximity: proximity,
    })
}

/// `Σ_{Y<m} (Y - m) + Σ_{Y>M} (Y - M)`: the amount by which the bounded
/// estimators fall short of the true total in expectation.
pub fn truncation_bias(pop: &Population, m: f64, upper: f64) -> Result<f64> {
    if !(m >= 0.0 && m < upper && upper.is_finite()) {
        return Err(Error::InvalidInterval { lo: m, hi: upper });
    }
    Ok(compensated_sum(pop.values.iter().map(|&y| {
        if y < m {
            y - m
        } else if y > upper {
            y - upper
        } else {
            0.0
        }
    })))
}

const GAMMA_SLACK: f64 = 1e-12;

/// `3Γ`, the α minimizing the randomization variance of the α mechanism.
pub fn optimal_alpha(gamma_mean: f64) -> Result<f64> {
    if !(-GAMMA_SLACK..=0.25 + GAMMA_SLACK).contains(&gamma_mean) {
        return Err(Error::GammaOutOfRange(gamma_mean));
    }
    Ok(3.0 * gamma_mean.clamp(0.0, 0.25))
}

/// Plug-in α from prior moments in the `(0, M)` frame, clamped to `[0, 3/4]`.
pub fn plug_in_alpha(mu: f64, sigma2: f64, upper: f64) -> Result<f64> {
    let g = gamma_asymptotic(mu, sigma2, upper)?.gamma_mean;
    optimal_alpha(g.clamp(0.0, 0.25))
}

/// Plug-in α with the prior moments shifted into the `(m, M)` frame.
pub fn plug_in_alpha_bounded(mu: f64, sigma2: f64, iv: &UniformInterval) -> Result<f64> {
    iv.validate()?;
    let g = gamma_asymptotic(mu - iv.lo, sigma2, iv.width())?.gamma_mean;
    optimal_alpha(g.clamp(0.0, 0.25))
}
