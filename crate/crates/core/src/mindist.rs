//! Minimum-d_v estimation.
//!
//! `θ̃ = argmin_θ d_v(f(·,θ), f̂)` over one or two free parameters of a
//! [`ModelTemplate`]. The search is a coarse grid over the bounds followed by a
//! local refinement from the best cell: golden-section in one dimension,
//! Nelder–Mead with restarts in two. Parameter values where the model is invalid
//! or vanishes at a table point score `+inf`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{seeded_rng, DistributionModel, ExpFamilyForm, Family, ModelTemplate};
use crate::dv::DvObjective;
use crate::error::{Error, Result};
use crate::freq::{drop_zero, FrequencyTable};
use crate::optim;

/// Search settings shared by every estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// One closed interval per free parameter; `None` uses [`default_bounds`].
    pub bounds: Option<Vec<[f64; 2]>>,
    /// Grid size per dimension.
    pub grid_points: usize,
    /// Absolute tolerance on the parameters.
    pub refine_tol: f64,
    pub max_refine_iters: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            bounds: None,
            grid_points: 200,
            refine_tol: 1e-7,
            max_refine_iters: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn with_bounds(mut self, bounds: Vec<[f64; 2]>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 10 {
            return Err(Error::InvalidConfig(format!(
                "grid_points must be >= 10, got {}",
                self.grid_points
            )));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "refine_tol must be > 0, got {}",
                self.refine_tol
            )));
        }
        if self.max_refine_iters == 0 {
            return Err(Error::InvalidConfig("max_refine_iters must be >= 1".into()));
        }
        if let Some(bounds) = &self.bounds {
            for &[lo, hi] in bounds {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidConfig(format!("bad interval [{lo}, {hi}]")));
                }
            }
        }
        Ok(())
    }

    /// Bounds for the free parameters of `template` on a table with `points`.
    pub fn resolve_bounds(
        &self,
        template: &ModelTemplate,
        points: &[f64],
    ) -> Result<Vec<[f64; 2]>> {
        self.validate()?;
        let free = template.free_indices();
        match &self.bounds {
            Some(b) if b.len() != free.len() => Err(Error::InvalidConfig(format!(
                "{} interval(s) given for {} free parameter(s)",
                b.len(),
                free.len()
            ))),
            Some(b) => Ok(b.clone()),
            None => Ok(free
                .iter()
                .map(|&i| default_bounds(template.family(), i, points))
                .collect()),
        }
    }
}

/// Table-adaptive search interval for parameter `index` of `family`.
pub fn default_bounds(family: Family, index: usize, points: &[f64]) -> [f64; 2] {
    let min = points.iter().copied().fold(f64::INFINITY, f64::min);
    let max = points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    match (family, index) {
        (Family::Binomial, _) => [1e-3, 1.0 - 1e-3],
        (Family::Poisson, _) => [1e-3, (10.0 * max).max(1.0)],
        (Family::Normal, 0) => [min - 3.0 * span, max + 3.0 * span],
        (Family::Gamma | Family::Weibull, 0) => [0.1, 100.0],
        _ => [1e-3, 10.0 * span],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MinDv,
    AuxMoment,
    AuxMl,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::MinDv => "min-dv",
            Method::AuxMoment => "aux-moment",
            Method::AuxMl => "aux-ml",
        }
    }
}

/// Result of one estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub method: Method,
    /// Names of the estimated parameters, in index order.
    pub parameters: Vec<String>,
    pub estimate: Vec<f64>,
    /// The template instantiated at the estimate.
    pub model: DistributionModel,
    /// d_v for min-d_v, the negated weighted log-likelihood for aux-ML, and
    /// the absolute moment residual for aux-moment.
    pub objective_at_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// |min-d_v estimate − auxiliary estimate| per coordinate, when both were run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement_gap: Option<Vec<f64>>,
    /// Best objective after each refinement iteration.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

/// Grid scan followed by local refinement over a 1- or 2-dimensional box.
pub(crate) fn minimize<F>(f: F, bounds: &[[f64; 2]], config: &OptimizerConfig) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = config.grid_points;
    let tol = config.refine_tol;
    let iters = config.max_refine_iters;
    match bounds {
        [[lo, hi]] => {
            let (grid, values) = optim::grid_1d(|x| f(&[x]), *lo, *hi, n);
            let k = optim::argmin(&values).ok_or(Error::AllInfeasible)?;
            let a = grid[k.saturating_sub(1)];
            let b = grid[(k + 1).min(n - 1)];
            let r = optim::golden_section(|x| f(&[x]), a, b, (grid[k], values[k]), tol, iters);
            Ok(Minimum {
                x: r.x,
                fx: r.fx,
                evaluations: n + r.evaluations,
                converged: r.converged,
                history: r.history,
            })
        }
        [b0, b1] => {
            let axis = |b: [f64; 2], i: usize| b[0] + (b[1] - b[0]) * i as f64 / (n - 1) as f64;
            // row-major: first parameter outer, so argmin ties go to the smaller first, then second
            let values: Vec<f64> = (0..n * n)
                .into_par_iter()
                .map(|k| f(&[axis(*b0, k / n), axis(*b1, k % n)]))
                .collect();
            let k = optim::argmin(&values).ok_or(Error::AllInfeasible)?;
            let start = [axis(*b0, k / n), axis(*b1, k % n)];
            let step = [
                (b0[1] - b0[0]) / (n - 1) as f64,
                (b1[1] - b1[0]) / (n - 1) as f64,
            ];
            let inside = |p: [f64; 2]| {
                if p[0] < b0[0] || p[0] > b0[1] || p[1] < b1[0] || p[1] > b1[1] {
                    f64::INFINITY
                } else {
                    f(&p)
                }
            };
            let r = optim::nelder_mead_2d(inside, start, values[k], step, tol, iters);
            Ok(Minimum {
                x: r.x,
                fx: r.fx,
                evaluations: n * n + r.evaluations,
                converged: r.converged,
                history: r.history,
            })
        }
        _ => Err(Error::InvalidConfig(format!(
            "1 or 2 free parameters supported, got {}",
            bounds.len()
        ))),
    }
}

/// Drops zero rows and checks there are enough points for `free` parameters.
pub(crate) fn usable_table(table: &FrequencyTable, free: usize) -> Result<FrequencyTable> {
    let t = drop_zero(table)?;
    let needed = free + 1;
    if t.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: t.len(),
        });
    }
    Ok(t)
}

pub(crate) fn check_free_count(template: &ModelTemplate) -> Result<usize> {
    let free = template.free_indices().len();
    if free == 0 || free > 2 {
        return Err(Error::InvalidConfig(format!(
            "{template}: need 1 or 2 free parameters, got {free}"
        )));
    }
    Ok(free)
}

/// Minimum-d_v estimate of the free parameters of `template` from `table`.
///
/// Zero-count rows are dropped first. At least two positive-count points are
/// needed for one free parameter and three for two.
pub fn estimate_min_dv(
    template: &ModelTemplate,
    table: &FrequencyTable,
    config: &OptimizerConfig,
) -> Result<EstimationReport> {
    let free = check_free_count(template)?;
    let table = usable_table(table, free)?;
    let bounds = config.resolve_bounds(template, table.points())?;
    let objective = DvObjective::new(&table)?;
    let score = |theta: &[f64]| match template.instantiate(theta) {
        Ok(model) => objective.eval(&model).unwrap_or(f64::INFINITY),
        Err(_) => f64::INFINITY,
    };
    let min = minimize(score, &bounds, config)?;
    report(template, Method::MinDv, min)
}

pub(crate) fn report(
    template: &ModelTemplate,
    method: Method,
    min: Minimum,
) -> Result<EstimationReport> {
    Ok(EstimationReport {
        method,
        parameters: template
            .free_names()
            .iter()
            .map(|s| s.to_string())
            .collect(),
        model: template.instantiate(&min.x)?,
        estimate: min.x,
        objective_at_estimate: min.fx,
        evaluations: min.evaluations,
        converged: min.converged,
        agreement_gap: None,
        history: min.history,
    })
}

/// A midpoint-convexity failure of one pair term δ_ij.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityViolation {
    pub i: usize,
    pub j: usize,
    pub theta1: f64,
    pub theta2: f64,
    /// δ_ij at the midpoint.
    pub midpoint: f64,
    /// Mean of δ_ij at the two ends.
    pub chord: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    /// Number of (pair, θ-pair) combinations checked.
    pub checks: usize,
    pub violations: Vec<ConvexityViolation>,
}

impl ConvexityReport {
    pub fn is_convex(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks midpoint convexity of each term
/// `δ_ij(θ) = |n_i/n_j − C_ij exp(θ (T(y_i) − T(y_j)))|`, `C_ij = K(y_i)/K(y_j)`,
/// in the natural parameter.
pub fn convexity_probe(
    form: &ExpFamilyForm,
    table: &FrequencyTable,
    theta_pairs: &[(f64, f64)],
) -> Result<ConvexityReport> {
    let table = usable_table(table, 1)?;
    let points = table.points();
    let counts = table.counts();
    let log_k: Vec<f64> = points.iter().map(|&x| form.log_base(x)).collect();
    if let Some(i) = log_k.iter().position(|l| !l.is_finite()) {
        return Err(Error::SupportMismatch { point: points[i] });
    }
    let t: Vec<f64> = points.iter().map(|&x| form.statistic(x)).collect();
    let delta = |i: usize, j: usize, theta: f64| {
        (counts[i] / counts[j] - (log_k[i] - log_k[j] + theta * (t[i] - t[j])).exp()).abs()
    };
    let m = points.len();
    let mut report = ConvexityReport {
        checks: 0,
        violations: Vec::new(),
    };
    for &(a, b) in theta_pairs {
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                report.checks += 1;
                let mid = delta(i, j, 0.5 * a + 0.5 * b);
                let chord = 0.5 * delta(i, j, a) + 0.5 * delta(i, j, b);
                if mid > chord + 1e-9 * chord.max(1.0) {
                    report.violations.push(ConvexityViolation {
                        i,
                        j,
                        theta1: a,
                        theta2: b,
                        midpoint: mid,
                        chord,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// `count` uniform θ pairs in `[lo, hi]²`.
pub fn random_theta_pairs(lo: f64, hi: f64, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = seeded_rng(seed, 0);
    (0..count)
        .map(|_| (rng.random_range(lo..=hi), rng.random_range(lo..=hi)))
        .collect()
}
