//! Wage model and the uniform threshold generator.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-parameter log-logistic distribution: shape `tau`, scale `sigma`,
/// location `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogLogisticParams {
    pub tau: f64,
    pub sigma: f64,
    pub delta: f64,
}

impl LogLogisticParams {
    /// Fitted monthly wage model for the Czech Republic, Q2 2014 (CZK).
    pub const CZECH_WAGES_2014: LogLogisticParams = LogLogisticParams {
        tau: 4.0379,
        sigma: 21_687.0,
        delta: 250.0,
    };

    pub fn new(tau: f64, sigma: f64, delta: f64) -> Result<Self> {
        let p = LogLogisticParams { tau, sigma, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.tau) || !ok(self.sigma) || !ok(self.delta) {
            return Err(Error::InvalidParams(format!(
                "tau = {}, sigma = {}, delta = {} (all must be finite and > 0)",
                self.tau, self.sigma, self.delta
            )));
        }
        Ok(())
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.pdf_unchecked(y))
    }

    fn pdf_unchecked(&self, y: f64) -> f64 {
        if y < self.delta {
            return 0.0;
        }
        let x = (y - self.delta) / self.sigma;
        let xt = x.powf(self.tau);
        (self.tau / self.sigma) * x.powf(self.tau - 1.0) / ((1.0 + xt) * (1.0 + xt))
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        self.validate()?;
        if y <= self.delta {
            return Ok(0.0);
        }
        let x = (y - self.delta) / self.sigma;
        Ok(1.0 / (1.0 + x.powf(-self.tau)))
    }

    pub fn quantile(&self, prob: f64) -> Result<f64> {
        self.validate()?;
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::ProbabilityDomain(prob));
        }
        Ok(self.quantile_unchecked(prob))
    }

    fn quantile_unchecked(&self, prob: f64) -> f64 {
        self.delta + self.sigma * (prob / (1.0 - prob)).powf(1.0 / self.tau)
    }

    /// Draws `count` i.i.d. values by inverse transform of `Open01` uniforms.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<f64>> {
        self.validate()?;
        if count == 0 {
            return Err(Error::EmptyCount);
        }
        Ok((0..count)
            .map(|_| self.quantile_unchecked(rng.sample(Open01)))
            .collect())
    }

    /// Closed-form mean; `None` when `tau <= 1`.
    pub fn mean(&self) -> Option<f64> {
        if self.tau <= 1.0 {
            return None;
        }
        let b = std::f64::consts::PI / self.tau;
        Some(self.delta + self.sigma * b / b.sin())
    }

    /// Closed-form variance; `None` when `tau <= 2`.
    pub fn variance(&self) -> Option<f64> {
        if self.tau <= 2.0 {
            return None;
        }
        let b = std::f64::consts::PI / self.tau;
        let ratio = b / b.sin();
        Some(self.sigma * self.sigma * (2.0 * b / (2.0 * b).sin() - ratio * ratio))
    }
}

/// Half-open interval `[lo, hi)` from which thresholds are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformInterval {
    pub lo: f64,
    pub hi: f64,
}

impl UniformInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let iv = UniformInterval { lo, hi };
        iv.validate()?;
        Ok(iv)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi {
            Ok(())
        } else {
            Err(Error::InvalidInterval {
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `[m, M)` as used by the threshold mechanisms; requires `m >= 0`.
    pub fn rrt(m: f64, upper: f64) -> Result<Self> {
        if !(m >= 0.0) {
            return Err(Error::InvalidInterval { lo: m, hi: upper });
        }
        Self::new(m, upper)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, y: f64) -> f64 {
        y.clamp(self.lo, self.hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // gen::<f64>() lies in [0, 1); the affine map can round up to `hi`
        // for extreme ratios, which is excluded explicitly.
        let u: f64 = rng.gen();
        let v = self.lo + self.width() * u;
        if v < self.hi {
            v
        } else {
            self.lo
        }
    }
}

pub fn uniform_sample<R: Rng + ?Sized>(rng: &mut R, iv: &UniformInterval) -> Result<f64> {
    iv.validate()?;
    Ok(iv.sample(rng))
}
