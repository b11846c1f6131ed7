//! Starting values for a two-component normal mixture with known standard
//! deviations.
//!
//! The merged sample is split around its mean `m_g`. Observations left of
//! `sup_l = m_g − σ_R` are assumed to come mostly from the left component and
//! those right of `min_r = m_g + σ_L` mostly from the right one, where σ_L and
//! σ_R are the standard deviations of the components placed on each side. Each
//! tail is binned and its component mean estimated from the tail alone, by
//! minimum d_v and by the auxiliary moment equation
//!
//! ```text
//! Σ u_i exp(−(u_i − m)²/2σ²) / Σ exp(−(u_i − m)²/2σ²) = ū
//! ```
//!
//! whose left side increases strictly in `m`. The mixing weight then follows
//! from `α m₁ + (1 − α) m₂ = m_g`.

use serde::{Deserialize, Serialize};

use crate::auxiliary::estimate_aux_moment_with_mean;
use crate::dist::{Family, ModelTemplate};
use crate::error::{Error, Result};
use crate::freq::{bin_sample, FrequencyTable};
use crate::mindist::{estimate_min_dv, OptimizerConfig};

/// Where the first component's mean lies relative to `m_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSplit {
    pub m_g: f64,
    /// Standard deviation of the observations below `m_g`.
    pub s_l: f64,
    /// Standard deviation of the observations above `m_g`.
    pub s_r: f64,
    pub sup_l: f64,
    pub min_r: f64,
    pub side_of_m1: Side,
    /// σ of the component assumed on the left and on the right.
    pub sigma_left: f64,
    pub sigma_right: f64,
    pub left_table: FrequencyTable,
    pub right_table: FrequencyTable,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Side of m₁: the component with the smaller σ sits on the side with the
/// smaller empirical spread.
fn side_of_m1(s_l: f64, s_r: f64, sigma1: f64, sigma2: f64) -> Side {
    if sigma1 == sigma2 || s_l == s_r {
        return Side::Undetermined;
    }
    if (s_l < s_r) == (sigma1 < sigma2) {
        Side::Left
    } else {
        Side::Right
    }
}

/// Steps 1–3 of the procedure: merged mean, side of m₁, and binned tails.
pub fn split_merged(
    sample: &[f64],
    sigma1: f64,
    sigma2: f64,
    num_bins: usize,
) -> Result<MixtureSplit> {
    if sample.len() < 20 {
        return Err(Error::InvalidTable(format!(
            "mixture split needs at least 20 observations, got {}",
            sample.len()
        )));
    }
    if !(sigma1 > 0.0 && sigma2 > 0.0 && sigma1.is_finite() && sigma2.is_finite()) {
        return Err(Error::InvalidModel(
            "component standard deviations must be > 0".into(),
        ));
    }
    let m_g = mean(sample);
    let below: Vec<f64> = sample.iter().copied().filter(|&x| x < m_g).collect();
    let above: Vec<f64> = sample.iter().copied().filter(|&x| x > m_g).collect();
    let (s_l, s_r) = (std_dev(&below), std_dev(&above));
    let side = side_of_m1(s_l, s_r, sigma1, sigma2);
    let (sigma_left, sigma_right) = match side {
        Side::Right => (sigma2, sigma1),
        Side::Left | Side::Undetermined => (sigma1, sigma2),
    };
    let sup_l = m_g - sigma_right;
    let min_r = m_g + sigma_left;
    let tail = |xs: Vec<f64>, name: &str| -> Result<FrequencyTable> {
        if xs.len() < 2 {
            return Err(Error::InvalidTable(format!(
                "{name} tail has {} observation(s); need at least 2",
                xs.len()
            )));
        }
        bin_sample(&xs, num_bins)
    };
    let left_table = tail(
        sample.iter().copied().filter(|&x| x < sup_l).collect(),
        "left",
    )?;
    let right_table = tail(
        sample.iter().copied().filter(|&x| x > min_r).collect(),
        "right",
    )?;
    Ok(MixtureSplit {
        m_g,
        s_l,
        s_r,
        sup_l,
        min_r,
        side_of_m1: side,
        sigma_left,
        sigma_right,
        left_table,
        right_table,
    })
}

/// Both estimates of one component mean from its tail table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    /// Minimum-d_v estimate.
    pub m_dv: f64,
    /// Root of the auxiliary moment equation.
    pub m_aux: f64,
    /// The ū used in the moment equation.
    pub tail_mean: f64,
}

/// Estimates a normal mean with known `sigma` from a tail table.
///
/// `tail_mean` is ū; `None` uses the table's frequency-weighted mean.
pub fn estimate_tail_mean(
    tail_table: &FrequencyTable,
    tail_mean: Option<f64>,
    sigma: f64,
    config: &OptimizerConfig,
) -> Result<TailEstimate> {
    let template = ModelTemplate::new(Family::Normal, &[None, Some(sigma)])?;
    let u = match tail_mean {
        Some(u) => u,
        None => crate::freq::drop_zero(tail_table)?.mean(),
    };
    let m_aux = estimate_aux_moment_with_mean(&template, tail_table, u, config)?.estimate[0];
    let m_dv = estimate_min_dv(&template, tail_table, config)?.estimate[0];
    Ok(TailEstimate {
        m_dv,
        m_aux,
        tail_mean: u,
    })
}

/// Drops end rows of `table` whose count is below `min_count`, keeping at
/// least two rows.
pub fn trim_extremes(table: &FrequencyTable, min_count: f64) -> Result<FrequencyTable> {
    let counts = table.counts();
    let mut lo = 0;
    let mut hi = table.len();
    while hi - lo > 2 && counts[lo] < min_count {
        lo += 1;
    }
    while hi - lo > 2 && counts[hi - 1] < min_count {
        hi -= 1;
    }
    table.select_rows(&(lo..hi).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureOptions {
    pub num_bins: usize,
    /// Trim weak extreme classes of each tail before estimating.
    pub trim_min_count: Option<f64>,
}

impl Default for MixtureOptions {
    fn default() -> Self {
        MixtureOptions {
            num_bins: 7,
            trim_min_count: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureInit {
    pub split: MixtureSplit,
    /// Estimates from the left and right tails.
    pub left: TailEstimate,
    pub right: TailEstimate,
    /// Estimates for components 1 and 2 (left and right when undetermined).
    pub m1_est: TailEstimate,
    pub m2_est: TailEstimate,
    /// Weight of component 1, from the auxiliary estimates.
    pub alpha_est: f64,
    pub warnings: Vec<String>,
}

/// The whole procedure on a raw merged sample.
pub fn estimate_mixture_init(
    sample: &[f64],
    sigma1: f64,
    sigma2: f64,
    options: &MixtureOptions,
    config: &OptimizerConfig,
) -> Result<MixtureInit> {
    let split = split_merged(sample, sigma1, sigma2, options.num_bins)?;
    let prepare = |t: &FrequencyTable| match options.trim_min_count {
        Some(c) => trim_extremes(t, c),
        None => Ok(t.clone()),
    };
    let left = estimate_tail_mean(&prepare(&split.left_table)?, None, split.sigma_left, config)?;
    let right = estimate_tail_mean(
        &prepare(&split.right_table)?,
        None,
        split.sigma_right,
        config,
    )?;
    let (m1_est, m2_est) = match split.side_of_m1 {
        Side::Right => (right, left),
        Side::Left | Side::Undetermined => (left, right),
    };
    let mut warnings = Vec::new();
    if split.side_of_m1 == Side::Undetermined {
        warnings.push("side of m1 undetermined; m1/m2 are the left/right means".to_string());
    }
    let alpha_est = mixing_weight(split.m_g, m1_est.m_aux, m2_est.m_aux, &mut warnings);
    Ok(MixtureInit {
        split,
        left,
        right,
        m1_est,
        m2_est,
        alpha_est,
        warnings,
    })
}

/// Solves `α m1 + (1 − α) m2 = m_g`, clamped into (0, 1) with a warning.
pub fn mixing_weight(m_g: f64, m1: f64, m2: f64, warnings: &mut Vec<String>) -> f64 {
    const EDGE: f64 = 1e-6;
    if m1 == m2 {
        warnings.push("component means coincide; alpha set to 0.5".into());
        return 0.5;
    }
    let alpha = (m_g - m2) / (m1 - m2);
    if alpha > EDGE && alpha < 1.0 - EDGE {
        alpha
    } else {
        warnings.push(format!("alpha = {alpha} outside (0,1); clamped"));
        alpha.clamp(EDGE, 1.0 - EDGE)
    }
}
