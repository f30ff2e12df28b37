//! Monte Carlo study runner: populations × samples × estimators.
//!
//! Population replications are the parallel unit. Each replication produces
//! its own accumulators, the results are collected in replication order and
//! merged sequentially, so output does not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunSpec, SdMode};
use crate::error::{Error, Result};
use crate::estimators::theoretical_ledger;
use crate::mechanisms::Mechanism;
use crate::population::{summarize, Population};
use crate::rng::child_rng;
use crate::sampling::{ht_direct_variance, SrsDesign};
use crate::stats::RunningMoments;

const POPULATION_STREAM: u64 = 1;
const SAMPLE_STREAM: u64 = 2;
const RESPONSE_STREAM: u64 = 3;

/// Raw-record budget used when the config does not set one.
pub const DEFAULT_MAX_RAW_RECORDS: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EstimatorId {
    Ht,
    AvMM,
    AvAlpha,
    AvAlphaOpt,
    AvT,
    Eriksson,
    Chaudhuri,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 7] = [
        EstimatorId::Ht,
        EstimatorId::AvMM,
        EstimatorId::AvAlpha,
        EstimatorId::AvAlphaOpt,
        EstimatorId::AvT,
        EstimatorId::Eriksson,
        EstimatorId::Chaudhuri,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EstimatorId::Ht => "ht",
            EstimatorId::AvMM => "av_mM",
            EstimatorId::AvAlpha => "av_alpha",
            EstimatorId::AvAlphaOpt => "av_alpha_opt",
            EstimatorId::AvT => "av_T",
            EstimatorId::Eriksson => "eriksson",
            EstimatorId::Chaudhuri => "chaudhuri",
        }
    }

    pub fn from_label(label: &str) -> Option<EstimatorId> {
        Self::ALL.into_iter().find(|e| e.label() == label)
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

/// An estimator of the harness: direct HT or a randomized response mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSpec {
    pub id: EstimatorId,
    pub mechanism: Option<Mechanism>,
}

pub fn estimators_for(spec: &RunSpec) -> Vec<EstimatorSpec> {
    let mut out = vec![
        EstimatorSpec {
            id: EstimatorId::Ht,
            mechanism: None,
        },
        EstimatorSpec {
            id: EstimatorId::AvMM,
            mechanism: Some(Mechanism::Basic(spec.bounds)),
        },
        EstimatorSpec {
            id: EstimatorId::AvAlpha,
            mechanism: Some(Mechanism::Alpha(spec.alpha)),
        },
        EstimatorSpec {
            id: EstimatorId::AvAlphaOpt,
            mechanism: Some(Mechanism::Alpha(spec.alpha_opt)),
        },
        EstimatorSpec {
            id: EstimatorId::AvT,
            mechanism: Some(Mechanism::Switching(spec.switching)),
        },
    ];
    if let Some(deck) = &spec.eriksson {
        out.push(EstimatorSpec {
            id: EstimatorId::Eriksson,
            mechanism: Some(Mechanism::Eriksson(deck.clone())),
        });
    }
    if let Some(decks) = &spec.chaudhuri {
        out.push(EstimatorSpec {
            id: EstimatorId::Chaudhuri,
            mechanism: Some(Mechanism::Chaudhuri(decks.clone())),
        });
    }
    out
}

/// Population of replication `rep` (0-based) for size `big_n`. The same
/// population is used for every sample size.
pub fn generate_population(spec: &RunSpec, big_n: usize, rep: usize) -> Result<Population> {
    let mut rng = child_rng(
        spec.master_seed,
        &[POPULATION_STREAM, big_n as u64, rep as u64],
    );
    Population::new(spec.distribution.sample(&mut rng, big_n)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub estimator: String,
    pub population_size: usize,
    pub sample_size: usize,
    /// Mean of the mean estimates, in 10³ CZK.
    pub mean_k_czk: f64,
    /// Standard deviation of the mean estimates, in 10³ CZK.
    pub sd_k_czk: f64,
    pub negative_count: u64,
    pub total_count: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationSummary {
    pub cells: Vec<CellSummary>,
}

/// All mean estimates of one `(estimator, N, n)` cell, in 10³ CZK, stored
/// population-major: index `p * S + s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCell {
    pub estimator: EstimatorId,
    pub population_size: usize,
    pub sample_size: usize,
    pub samples_per_population: usize,
    pub values: Vec<f64>,
}

/// Per-cell diagnostics kept alongside the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDetail {
    pub estimator: EstimatorId,
    pub population_size: usize,
    pub sample_size: usize,
    pub pooled: RunningMoments,
    /// Mean over populations of the within-population variance, (10³ CZK)².
    pub mean_within_variance: f64,
    /// Mean over populations of the within-population sd, 10³ CZK.
    pub mean_within_sd: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationOutput {
    pub summary: SimulationSummary,
    pub details: Vec<CellDetail>,
    pub raw: Vec<RawCell>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub retain_raw: bool,
}

struct ReplicationResult {
    moments: Vec<RunningMoments>,
    negatives: Vec<u64>,
    raw: Vec<Vec<f64>>,
}

fn run_replication(
    spec: &RunSpec,
    estimators: &[EstimatorSpec],
    design: &SrsDesign,
    rep: usize,
    retain_raw: bool,
) -> Result<ReplicationResult> {
    let big_n = design.population_size();
    let n = design.sample_size();
    let pop = generate_population(spec, big_n, rep)?;
    let values = pop.values();
    let s_count = spec.samples_per_population;
    let k = estimators.len();
    let mut out = ReplicationResult {
        moments: vec![RunningMoments::new(); k],
        negatives: vec![0; k],
        raw: if retain_raw {
            vec![Vec::with_capacity(s_count); k]
        } else {
            vec![Vec::new(); k]
        },
    };
    let weight = design.weight();
    let to_k_czk = 1.0 / (big_n as f64 * 1000.0);
    let mut scratch = Vec::with_capacity(big_n);
    for s in 0..s_count {
        let coords = [big_n as u64, n as u64, rep as u64, s as u64];
        let mut sample_rng = child_rng(
            spec.master_seed,
            &[SAMPLE_STREAM, coords[0], coords[1], coords[2], coords[3]],
        );
        let positions = design.draw_positions(&mut sample_rng, &mut scratch);
        for (j, est) in estimators.iter().enumerate() {
            let sum: f64 = match &est.mechanism {
                None => positions.iter().map(|&i| values[i]).sum(),
                Some(mech) => {
                    let mut rng = child_rng(
                        spec.master_seed,
                        &[
                            RESPONSE_STREAM,
                            coords[0],
                            coords[1],
                            coords[2],
                            coords[3],
                            est.id.stream(),
                        ],
                    );
                    positions
                        .iter()
                        .map(|&i| mech.respond(&mut rng, values[i]).r)
                        .sum()
                }
            };
            let total = weight * sum;
            if total < 0.0 {
                out.negatives[j] += 1;
            }
            let value = total * to_k_czk;
            out.moments[j].push(value);
            if retain_raw {
                out.raw[j].push(value);
            }
        }
    }
    Ok(out)
}

/// Number of raw records a run would retain.
pub fn raw_record_count(spec: &RunSpec) -> u64 {
    let k = estimators_for(spec).len() as u64;
    spec.cells.len() as u64
        * k
        * spec.population_replications as u64
        * spec.samples_per_population as u64
}

pub fn run_experiment(spec: &RunSpec, options: RunOptions) -> Result<SimulationOutput> {
    if options.retain_raw {
        let needed = raw_record_count(spec);
        let budget = spec
            .output
            .max_raw_records
            .unwrap_or(DEFAULT_MAX_RAW_RECORDS);
        if needed > budget {
            return Err(Error::ResourceLimit { needed, budget });
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = spec.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_in_pool(spec, options))
}

fn run_in_pool(spec: &RunSpec, options: RunOptions) -> Result<SimulationOutput> {
    let estimators = estimators_for(spec);
    let k = estimators.len();
    let p_count = spec.population_replications;
    let mut output = SimulationOutput::default();

    for &(big_n, n) in &spec.cells {
        let design = SrsDesign::new(big_n, n)?;
        let results: Vec<ReplicationResult> = (0..p_count)
            .into_par_iter()
            .map(|rep| run_replication(spec, &estimators, &design, rep, options.retain_raw))
            .collect::<Result<_>>()?;

        let mut pooled = vec![RunningMoments::new(); k];
        let mut negatives = vec![0u64; k];
        let mut within_var = vec![RunningMoments::new(); k];
        let mut within_sd = vec![RunningMoments::new(); k];
        let mut raw: Vec<Vec<f64>> = if options.retain_raw {
            vec![Vec::with_capacity(p_count * spec.samples_per_population); k]
        } else {
            vec![Vec::new(); k]
        };
        for result in results {
            for j in 0..k {
                pooled[j].merge(&result.moments[j]);
                negatives[j] += result.negatives[j];
                within_var[j].push(result.moments[j].variance());
                within_sd[j].push(result.moments[j].sd());
                if options.retain_raw {
                    raw[j].extend_from_slice(&result.raw[j]);
                }
            }
        }

        for (j, est) in estimators.iter().enumerate() {
            let sd = match spec.sd_mode {
                SdMode::Pooled => pooled[j].sd(),
                SdMode::Within => within_sd[j].mean(),
            };
            output.summary.cells.push(CellSummary {
                estimator: est.id.label().to_string(),
                population_size: big_n,
                sample_size: n,
                mean_k_czk: pooled[j].mean(),
                sd_k_czk: sd,
                negative_count: negatives[j],
                total_count: pooled[j].count(),
            });
            output.details.push(CellDetail {
                estimator: est.id,
                population_size: big_n,
                sample_size: n,
                pooled: pooled[j],
                mean_within_variance: within_var[j].mean(),
                mean_within_sd: within_sd[j].mean(),
            });
            if options.retain_raw {
                output.raw.push(RawCell {
                    estimator: est.id,
                    population_size: big_n,
                    sample_size: n,
                    samples_per_population: spec.samples_per_population,
                    values: std::mem::take(&mut raw[j]),
                });
            }
        }
    }
    Ok(output)
}

/// Theoretical and empirical variance of one cell's mean estimates, both
/// averaged over the populations of the run and expressed in (10³ CZK)².
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceCheckRow {
    pub estimator: EstimatorId,
    pub population_size: usize,
    pub sample_size: usize,
    pub randomization: f64,
    pub sampling: f64,
    pub theoretical_total: f64,
    pub empirical_within: f64,
}

/// Compares the exact conditional variance (given the population) with the
/// within-population empirical variance of a finished run.
pub fn variance_check(spec: &RunSpec, output: &SimulationOutput) -> Result<Vec<VarianceCheckRow>> {
    let estimators = estimators_for(spec);
    let mut rows = Vec::new();
    for &(big_n, n) in &spec.cells {
        let design = SrsDesign::new(big_n, n)?;
        let scale = 1.0 / (big_n as f64 * 1000.0).powi(2);
        let pops: Vec<Population> = (0..spec.population_replications)
            .map(|rep| generate_population(spec, big_n, rep))
            .collect::<Result<_>>()?;
        for est in &estimators {
            let mut rand = RunningMoments::new();
            let mut samp = RunningMoments::new();
            for pop in &pops {
                let (r, s) = match &est.mechanism {
                    None => (0.0, ht_direct_variance(&summarize(pop), &design)),
                    Some(mech) => {
                        let l = theoretical_ledger(pop, &design, mech)?;
                        (l.randomization_contribution, l.sampling_contribution)
                    }
                };
                rand.push(r * scale);
                samp.push(s * scale);
            }
            let detail = output
                .details
                .iter()
                .find(|d| d.estimator == est.id && d.population_size == big_n && d.sample_size == n)
                .ok_or_else(|| {
                    Error::Config("run output does not match the configuration".into())
                })?;
            rows.push(VarianceCheckRow {
                estimator: est.id,
                population_size: big_n,
                sample_size: n,
                randomization: rand.mean(),
                sampling: samp.mean(),
                theoretical_total: rand.mean() + samp.mean(),
                empirical_within: detail.mean_within_variance,
            });
        }
    }
    Ok(rows)
}
