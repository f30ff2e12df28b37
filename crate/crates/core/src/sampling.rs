//! Simple random sampling without replacement and the direct
//! Horvitz-Thompson estimator.

use rand::Rng;

use crate::error::{Error, Result};
use crate::population::{Population, PopulationSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SrsDesign {
    population_size: usize,
    sample_size: usize,
}

impl SrsDesign {
    pub fn new(population_size: usize, sample_size: usize) -> Result<Self> {
        if sample_size == 0 || sample_size > population_size {
            return Err(Error::SizeMismatch {
                n: sample_size,
                population: population_size,
            });
        }
        Ok(SrsDesign {
            population_size,
            sample_size,
        })
    }

    pub fn population_size(&self) -> usize {
        self.population_size
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    /// Inclusion probability `n/N`, identical for every unit.
    pub fn inclusion_probability(&self) -> f64 {
        self.sample_size as f64 / self.population_size as f64
    }

    pub fn sampling_fraction(&self) -> f64 {
        self.inclusion_probability()
    }

    /// Horvitz-Thompson weight `N/n`.
    pub fn weight(&self) -> f64 {
        self.population_size as f64 / self.sample_size as f64
    }

    /// Draws `n` distinct 0-based positions by a partial Fisher-Yates
    /// shuffle of `scratch`, which is reset to `0..N` first.
    pub fn draw_positions<'a, R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        scratch: &'a mut Vec<usize>,
    ) -> &'a [usize] {
        scratch.clear();
        scratch.extend(0..self.population_size);
        for i in 0..self.sample_size {
            let j = rng.gen_range(i..self.population_size);
            scratch.swap(i, j);
        }
        &scratch[..self.sample_size]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Distinct 1-based unit labels.
    pub labels: Vec<usize>,
    pub values: Vec<f64>,
    pub design: SrsDesign,
}

pub fn draw_srswor<R: Rng + ?Sized>(
    rng: &mut R,
    design: &SrsDesign,
    pop: &Population,
) -> Result<Sample> {
    if design.population_size() != pop.len() {
        return Err(Error::SizeMismatch {
            n: design.sample_size(),
            population: pop.len(),
        });
    }
    let mut scratch = Vec::with_capacity(pop.len());
    let positions = design.draw_positions(rng, &mut scratch);
    Ok(Sample {
        labels: positions.iter().map(|p| p + 1).collect(),
        values: positions.iter().map(|&p| pop.values()[p]).collect(),
        design: *design,
    })
}

/// `(N/n) Σ_{i∈s} Y_i`.
pub fn ht_direct(sample: &Sample) -> Result<f64> {
    if sample.values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(sample.design.weight() * sample.values.iter().sum::<f64>())
}

/// `N² (1 - f) S² / n`.
pub fn ht_direct_variance(summary: &PopulationSummary, design: &SrsDesign) -> f64 {
    let n = design.sample_size() as f64;
    let big_n = design.population_size() as f64;
    big_n * big_n * (1.0 - design.sampling_fraction()) * summary.variance / n
}
