//! Monte-Carlo goodness-of-fit test for a fully specified model.
//!
//! The observed d_v between the table and the model is compared with the d_v
//! values of `N` tables simulated from the model with the same total count and
//! summarized on the same points or classes. With
//! `F(d) = #{d_i < d} / N`, the model is rejected at level α when
//! `F(d_obs) > 1 − α`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::auxiliary;
use crate::dist::{seeded_rng, DistributionModel};
use crate::dv::DvObjective;
use crate::error::{Error, Result};
use crate::freq::{Binning, FrequencyTable};

/// How a simulated replicate is summarized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicateScheme {
    /// Counts at the table's points: a multinomial draw from the model
    /// restricted to those points.
    Points,
    /// Counts in the classes of a binning: model draws inside the binned range,
    /// classified. The table's points must be the class midpoints.
    Bins(Binning),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub observed_dv: f64,
    pub empirical_cdf_at_observed: f64,
    pub reject: bool,
    pub replicates: usize,
    pub alpha: f64,
    /// Replicates redrawn because a cell came out empty.
    pub resampled: usize,
}

/// Total count of the table as a replicate size.
fn replicate_size(table: &FrequencyTable) -> usize {
    table.truncated_size().round().max(1.0) as usize
}

/// One replicate summary; may contain zero cells.
pub fn simulate_replicate<R: Rng + ?Sized>(
    model: &DistributionModel,
    table: &FrequencyTable,
    scheme: &ReplicateScheme,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let size = replicate_size(table);
    match scheme {
        ReplicateScheme::Points => {
            let h = auxiliary(model, table.points())?;
            let mut remaining = size as u64;
            let mut mass_left = 1.0;
            let mut counts = Vec::with_capacity(h.values().len());
            for (i, &p) in h.values().iter().enumerate() {
                let k = if i + 1 == h.values().len() || remaining == 0 {
                    remaining
                } else {
                    let q = (p / mass_left).clamp(0.0, 1.0);
                    Binomial::new(remaining, q).expect("q in [0,1]").sample(rng)
                };
                counts.push(k as f64);
                remaining -= k;
                mass_left -= p;
            }
            Ok(counts)
        }
        ReplicateScheme::Bins(binning) => {
            if binning.classes() != table.len() {
                return Err(Error::InvalidConfig(format!(
                    "binning has {} classes but the table has {} rows",
                    binning.classes(),
                    table.len()
                )));
            }
            let mut counts = vec![0.0; binning.classes()];
            let mut got = 0;
            let mut draws = 0usize;
            let cap = 1000 * size + 1000;
            while got < size {
                draws += 1;
                if draws > cap {
                    return Err(Error::SupportMismatch {
                        point: binning.lo(),
                    });
                }
                if let Some(c) = binning.class_of(model.draw(rng)) {
                    counts[c] += 1.0;
                    got += 1;
                }
            }
            Ok(counts)
        }
    }
}

/// Runs the test with `replicates` (≥ 100) simulated tables.
///
/// Replicates with an empty cell are redrawn; more than `10 · replicates`
/// draws in total is an error.
pub fn gof_test(
    model: &DistributionModel,
    table: &FrequencyTable,
    scheme: &ReplicateScheme,
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<GofResult> {
    if replicates < 100 {
        return Err(Error::InvalidConfig(format!(
            "need at least 100 replicates, got {replicates}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let objective = DvObjective::new(table)?;
    if objective.points().len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: objective.points().len(),
        });
    }
    let observed_dv = objective.eval(model)?;
    let cap = 10 * replicates;
    let draws: Vec<Result<(f64, usize)>> = (0..replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(seed, i);
            for attempt in 1..=cap {
                let counts = simulate_replicate(model, table, scheme, &mut rng)?;
                if counts.iter().all(|&c| c > 0.0) {
                    let rep = FrequencyTable::new(table.points().to_vec(), counts)?;
                    return Ok((DvObjective::new(&rep)?.eval(model)?, attempt));
                }
            }
            Err(Error::ResampleCap {
                attempts: cap,
                replicates,
            })
        })
        .collect();
    let mut values = Vec::with_capacity(replicates);
    let mut attempts = 0;
    for d in draws {
        let (v, a) = d?;
        values.push(v);
        attempts += a;
    }
    if attempts > cap {
        return Err(Error::ResampleCap {
            attempts,
            replicates,
        });
    }
    let below = values.iter().filter(|&&d| d < observed_dv).count();
    let cdf = below as f64 / replicates as f64;
    Ok(GofResult {
        observed_dv,
        empirical_cdf_at_observed: cdf,
        reject: cdf > 1.0 - alpha,
        replicates,
        alpha,
        resampled: attempts - replicates,
    })
}
