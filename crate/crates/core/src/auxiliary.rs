//! The auxiliary distribution of a model on a truncation, and the estimators
//! built on it.
//!
//! For a truncation with support points `u_1..u_m`,
//! `h(u_i, θ) = f(u_i, θ) / Σ_j f(u_j, θ)`: the conditional law given the
//! observed region. It keeps every density ratio of the parent, so fitting `h`
//! to the renormalized frequencies needs neither the complete sample size nor
//! the unobserved cells.
//!
//! Two estimators use it: the moment route solves `Σ u_i h(u_i,θ) = ū` by
//! bisection, and the likelihood route maximizes `Σ (n_i/n_t) ln h(u_i,θ)` with
//! the same grid-and-refine search as [`crate::mindist`]. For the supported
//! one-parameter exponential forms the sufficient statistic `T` is affine in
//! `x`, so matching the mean of `x` is the same equation as matching the mean
//! of `T`, and both routes give the same root.

use serde::{Deserialize, Serialize};

use crate::dist::{Density, DistributionModel, Family, ModelTemplate};
use crate::dv::log_densities;
use crate::error::{Error, Result};
use crate::freq::FrequencyTable;
use crate::mindist::{
    check_free_count, minimize, report, usable_table, EstimationReport, Method, Minimum,
    OptimizerConfig,
};
use crate::optim;

/// A model restricted to finitely many points and renormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryDistribution {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl AuxiliaryDistribution {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, x: f64) -> Option<f64> {
        self.points
            .iter()
            .position(|&p| p == x)
            .map(|i| self.values[i])
    }

    pub fn mean(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.values)
            .map(|(u, h)| u * h)
            .sum()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// ln h at each point, from log densities.
fn log_aux(logs: &[f64]) -> Vec<f64> {
    let z = log_sum_exp(logs);
    logs.iter().map(|l| l - z).collect()
}

/// `h(u_i) = f(u_i) / Σ_j f(u_j)` on `points`.
pub fn auxiliary<D: Density + ?Sized>(model: &D, points: &[f64]) -> Result<AuxiliaryDistribution> {
    if points.is_empty() {
        return Err(Error::InvalidTable(
            "auxiliary distribution needs at least one point".into(),
        ));
    }
    let logs = log_densities(model, points)?;
    let values = log_aux(&logs).into_iter().map(f64::exp).collect();
    Ok(AuxiliaryDistribution {
        points: points.to_vec(),
        values,
    })
}

fn single_free(template: &ModelTemplate) -> Result<()> {
    if check_free_count(template)? != 1 {
        return Err(Error::InvalidConfig(format!(
            "{template}: the moment route estimates exactly one free parameter"
        )));
    }
    Ok(())
}

/// Moment estimate with ū taken from the table's frequency-weighted mean.
pub fn estimate_aux_moment(
    template: &ModelTemplate,
    table: &FrequencyTable,
    config: &OptimizerConfig,
) -> Result<EstimationReport> {
    let mean = usable_table(table, 1)?.mean();
    estimate_aux_moment_with_mean(template, table, mean, config)
}

/// Solves `Σ u_i h(u_i,θ) = target_mean` for the single free parameter.
///
/// The root is bracketed by the first sign change on the config grid and then
/// bisected to `refine_tol`. Zero-count rows are dropped first.
pub fn estimate_aux_moment_with_mean(
    template: &ModelTemplate,
    table: &FrequencyTable,
    target_mean: f64,
    config: &OptimizerConfig,
) -> Result<EstimationReport> {
    single_free(template)?;
    let table = usable_table(table, 1)?;
    let [lo, hi] = config.resolve_bounds(template, table.points())?[0];
    let points = table.points();
    let g = |theta: f64| -> f64 {
        let Ok(model) = template.instantiate(&[theta]) else {
            return f64::NAN;
        };
        match auxiliary(&model, points) {
            Ok(h) => h.mean() - target_mean,
            Err(_) => f64::NAN,
        }
    };
    let (grid, values) = optim::grid_1d(g, lo, hi, config.grid_points);
    let mut evaluations = grid.len();
    let bracket = (0..grid.len() - 1).find(|&i| {
        let (a, b) = (values[i], values[i + 1]);
        a.is_finite() && b.is_finite() && (a == 0.0 || a.signum() != b.signum())
    });
    let Some(i) = bracket else {
        return Err(Error::NoRoot { lo, hi });
    };
    let (root, iters) = if values[i] == 0.0 {
        (grid[i], 0)
    } else {
        optim::bisect(
            g,
            grid[i],
            grid[i + 1],
            config.refine_tol,
            config.max_refine_iters,
        )
        .ok_or(Error::NoRoot {
            lo: grid[i],
            hi: grid[i + 1],
        })?
    };
    evaluations += iters + 2;
    let width = (grid[i + 1] - grid[i]) / 2f64.powi(iters as i32);
    report(
        template,
        Method::AuxMoment,
        Minimum {
            x: vec![root],
            fx: g(root).abs(),
            evaluations: evaluations + 1,
            converged: values[i] == 0.0 || width <= config.refine_tol,
            history: Vec::new(),
        },
    )
}

/// Maximizes `Σ (n_i/n_t) ln h(u_i,θ)` over one or two free parameters.
///
/// `objective_at_estimate` is the negated weighted log-likelihood, so it is
/// nonnegative.
pub fn estimate_aux_ml(
    template: &ModelTemplate,
    table: &FrequencyTable,
    config: &OptimizerConfig,
) -> Result<EstimationReport> {
    let free = check_free_count(template)?;
    let table = usable_table(table, free)?;
    let bounds = config.resolve_bounds(template, table.points())?;
    let total = table.truncated_size();
    let weights: Vec<f64> = table.counts().iter().map(|c| c / total).collect();
    let points = table.points();
    let score = |theta: &[f64]| {
        let Ok(model) = template.instantiate(theta) else {
            return f64::INFINITY;
        };
        match log_densities(&model, points) {
            Ok(logs) => -log_aux(&logs)
                .iter()
                .zip(&weights)
                .map(|(l, w)| w * l)
                .sum::<f64>(),
            Err(_) => f64::INFINITY,
        }
    };
    let min = minimize(score, &bounds, config)?;
    report(template, Method::AuxMl, min)
}

/// Predicted counts at `missing` points by proportional allocation:
/// `n_t · f(x) / Σ_observed f(u_i)`.
pub fn allocate_missing<D: Density + ?Sized>(
    model: &D,
    table: &FrequencyTable,
    missing: &[f64],
) -> Result<Vec<f64>> {
    let observed = log_densities(model, table.points())?;
    let z = log_sum_exp(&observed);
    let n_t = table.truncated_size();
    Ok(log_densities(model, missing)?
        .into_iter()
        .map(|l| n_t * (l - z).exp())
        .collect())
}

/// Complete-data moment estimate of the single free parameter, ignoring
/// truncation: `x̄/n` for binomial p, `x̄` for Poisson λ and normal m, `x̄/a`
/// for gamma b.
pub fn classical_estimate(template: &ModelTemplate, table: &FrequencyTable) -> Result<f64> {
    single_free(template)?;
    let mean = table.mean();
    let fixed = |i: usize| template.fixed(i).expect("other parameter fixed");
    match (template.family(), template.free_indices()[0]) {
        (Family::Binomial, 1) => Ok(mean / fixed(0)),
        (Family::Poisson, 0) | (Family::Normal, 0) => Ok(mean),
        (Family::Gamma, 1) => Ok(mean / fixed(0)),
        (family, i) => Err(Error::UnsupportedForm {
            family: family.name(),
            param: family.param_names()[i],
        }),
    }
}

/// Auxiliary distribution of a concrete model on a table's points.
pub fn auxiliary_on(
    model: &DistributionModel,
    table: &FrequencyTable,
) -> Result<AuxiliaryDistribution> {
    auxiliary(model, table.points())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::FinitePmf;
    use approx::assert_relative_eq;

    fn table1() -> FrequencyTable {
        FrequencyTable::new(
            (0..8).map(f64::from).collect(),
            vec![15.0, 71.0, 108.0, 134.0, 97.0, 47.0, 23.0, 5.0],
        )
        .unwrap()
    }

    fn table9() -> FrequencyTable {
        FrequencyTable::new(
            vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 9.0],
            vec![26.0, 16.0, 18.0, 9.0, 3.0, 5.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn finite_pmf_auxiliaries() {
        let g1 =
            FinitePmf::new(vec![1.0, 2.0, 3.0], vec![1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]).unwrap();
        let h1 = auxiliary(&g1, &[2.0, 3.0]).unwrap();
        assert_relative_eq!(h1.values()[0], 0.4, max_relative = 1e-14);
        assert_relative_eq!(h1.values()[1], 0.6, max_relative = 1e-14);
        let g2 =
            FinitePmf::new(vec![2.0, 3.0, 4.0], vec![1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]).unwrap();
        let h2 = auxiliary(&g2, &[2.0, 3.0]).unwrap();
        assert_relative_eq!(h2.values()[0], 1.0 / 3.0, max_relative = 1e-14);
        assert_eq!(auxiliary(&g2, &[3.0]).unwrap().values(), &[1.0]);
        assert!(auxiliary(&g2, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn auxiliary_keeps_parent_ratios() {
        let m = DistributionModel::poisson(3.2).unwrap();
        let pts = [2.0, 3.0, 5.0, 8.0];
        let h = auxiliary(&m, &pts).unwrap();
        assert!((h.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let r = h.values()[i] / h.values()[j];
                assert_relative_eq!(
                    r,
                    m.density(pts[i]) / m.density(pts[j]),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn binomial_moment_on_middle_truncation() {
        let t = table1().select_rows(&[2, 3, 4, 5]).unwrap();
        let tpl: ModelTemplate = "binomial(n=10)".parse().unwrap();
        let r = estimate_aux_moment(&tpl, &t, &OptimizerConfig::default()).unwrap();
        assert!((r.estimate[0] - 0.3).abs() < 1e-3, "{}", r.estimate[0]);
        assert!(r.converged);
    }

    #[test]
    fn hartley_moment_and_allocation() {
        let tpl: ModelTemplate = "poisson()".parse().unwrap();
        let r = estimate_aux_moment(&tpl, &table9(), &OptimizerConfig::default()).unwrap();
        assert!((r.estimate[0] - 3.1149).abs() < 1e-3, "{}", r.estimate[0]);
        let alloc = allocate_missing(&r.model, &table9(), &[0.0, 1.0]).unwrap();
        assert!(
            (alloc[0] - 4.29).abs() < 0.05 && (alloc[1] - 13.38).abs() < 0.05,
            "{alloc:?}"
        );
        assert!(allocate_missing(&r.model, &table9(), &[])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn sparse_binomial_sample() {
        let t = FrequencyTable::new(
            (0..5).map(f64::from).collect(),
            vec![13.0, 0.0, 0.0, 0.0, 2.0],
        )
        .unwrap();
        let tpl: ModelTemplate = "binomial(n=4)".parse().unwrap();
        let r = estimate_aux_moment(&tpl, &t, &OptimizerConfig::default()).unwrap();
        assert!((r.estimate[0] - 0.385).abs() < 2e-3, "{}", r.estimate[0]);
        assert!((classical_estimate(&tpl, &t).unwrap() - 0.1333).abs() < 1e-3);
    }

    #[test]
    fn moment_and_ml_coincide() {
        let cfg = OptimizerConfig::default();
        for (tpl, t) in [
            (
                "binomial(n=10)",
                table1().select_rows(&[1, 2, 3, 4, 5, 6]).unwrap(),
            ),
            ("poisson()", table9()),
        ] {
            let tpl: ModelTemplate = tpl.parse().unwrap();
            let a = estimate_aux_moment(&tpl, &t, &cfg).unwrap();
            let b = estimate_aux_ml(&tpl, &t, &cfg).unwrap();
            assert!((a.estimate[0] - b.estimate[0]).abs() < 1e-5, "{a:?} {b:?}");
            assert!(b.objective_at_estimate >= 0.0);
        }
    }

    #[test]
    fn exact_ratio_recovery() {
        let t = FrequencyTable::new(vec![0.0, 1.0], vec![7.0, 30.0]).unwrap();
        let tpl: ModelTemplate = "binomial(n=10)".parse().unwrap();
        let r = estimate_aux_moment(&tpl, &t, &OptimizerConfig::default()).unwrap();
        assert!((r.estimate[0] - 0.3).abs() < 1e-6, "{}", r.estimate[0]);
    }

    #[test]
    fn no_root_and_two_free() {
        let t = FrequencyTable::new(vec![0.0, 1.0], vec![7.0, 30.0]).unwrap();
        let tpl: ModelTemplate = "binomial(n=10)".parse().unwrap();
        let cfg = OptimizerConfig::default().with_bounds(vec![[0.6, 0.9]]);
        assert!(matches!(
            estimate_aux_moment(&tpl, &t, &cfg),
            Err(Error::NoRoot { .. })
        ));
        let tpl: ModelTemplate = "normal()".parse().unwrap();
        assert!(estimate_aux_moment(&tpl, &table9(), &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn allocation_of_observed_point_reproduces_count() {
        let m = DistributionModel::poisson(2.0).unwrap();
        let pts: Vec<f64> = (0..5).map(f64::from).collect();
        let counts = pts.iter().map(|&x| 500.0 * m.density(x)).collect();
        let t = FrequencyTable::new(pts, counts).unwrap();
        let got = allocate_missing(&m, &t, &[2.0]).unwrap()[0];
        assert_relative_eq!(got, t.counts()[2], max_relative = 1e-12);
    }
}
