//! The distance of proportional variations.
//!
//! For two positive distributions on the same points,
//!
//! ```text
//! d_v(p, q) = Σ_{i≠j} | p_i/p_j − q_i/q_j |
//! ```
//!
//! summed over ordered pairs. Only ratios enter, so the empirical side is
//! insensitive to the (possibly unknown) sample size. Model ratios are formed as
//! `exp(ln f(y_i) − ln f(y_j))`, which survives extreme tails; the differences
//! are then taken in linear space.

use serde::{Deserialize, Serialize};

use crate::dist::Density;
use crate::error::{Error, Result};
use crate::freq::{EmpiricalTruncated, FrequencyTable, Truncation};

/// Below this a density counts as zero at a support point.
pub const MIN_DENSITY: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvValue {
    pub value: f64,
    /// Number of ordered pairs summed, m(m−1).
    pub pair_count: usize,
}

/// The three parts of d_v on an observed/unobserved split of a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub observed: f64,
    pub unobserved: f64,
    /// Both directed cross terms.
    pub cross: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.observed + self.unobserved + self.cross
    }
}

/// d_v between two empirical distributions on identical points.
pub fn dv_tables(p: &EmpiricalTruncated, q: &EmpiricalTruncated) -> Result<DvValue> {
    if p.points().len() != q.points().len()
        || p.points().iter().zip(q.points()).any(|(a, b)| a != b)
    {
        return Err(Error::PointMismatch);
    }
    for (x, v) in p
        .points()
        .iter()
        .zip(p.probs())
        .chain(q.points().iter().zip(q.probs()))
    {
        if *v <= 0.0 {
            return Err(Error::ZeroCount(*x));
        }
    }
    let (a, b) = (p.probs(), q.probs());
    let m = a.len();
    let mut value = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                value += (a[i] / a[j] - b[i] / b[j]).abs();
            }
        }
    }
    Ok(DvValue {
        value,
        pair_count: m * (m - 1),
    })
}

/// Log densities of `model` at `points`, or the first point where it vanishes.
pub(crate) fn log_densities<D: Density + ?Sized>(model: &D, points: &[f64]) -> Result<Vec<f64>> {
    let floor = MIN_DENSITY.ln();
    points
        .iter()
        .map(|&x| {
            let l = model.log_density(x);
            if l.is_finite() && l >= floor {
                Ok(l)
            } else {
                Err(Error::SupportMismatch { point: x })
            }
        })
        .collect()
}

/// Precomputed empirical count ratios n_i/n_j of a table, reused across many
/// model evaluations.
#[derive(Debug, Clone)]
pub struct DvObjective {
    points: Vec<f64>,
    counts: Vec<f64>,
}

impl DvObjective {
    pub fn new(table: &FrequencyTable) -> Result<Self> {
        if let Some((p, _)) = table.rows().find(|&(_, c)| c <= 0.0) {
            return Err(Error::ZeroCount(p));
        }
        Ok(DvObjective {
            points: table.points().to_vec(),
            counts: table.counts().to_vec(),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn pair_count(&self) -> usize {
        let m = self.points.len();
        m * (m - 1)
    }

    /// d_v between the table and `model`.
    pub fn eval<D: Density + ?Sized>(&self, model: &D) -> Result<f64> {
        let logs = log_densities(model, &self.points)?;
        Ok(self.eval_logs(&logs))
    }

    /// d_v from model log densities at the table points.
    pub fn eval_logs(&self, logs: &[f64]) -> f64 {
        let m = self.points.len();
        let mut value = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    value += (self.counts[i] / self.counts[j] - (logs[i] - logs[j]).exp()).abs();
                }
            }
        }
        value
    }
}

/// d_v between a table's relative frequencies and a model restricted to its points.
///
/// The restriction's normalizing constant cancels in every ratio, so raw
/// densities are used.
pub fn dv_model<D: Density + ?Sized>(model: &D, table: &FrequencyTable) -> Result<DvValue> {
    let obj = DvObjective::new(table)?;
    Ok(DvValue {
        value: obj.eval(model)?,
        pair_count: obj.pair_count(),
    })
}

/// Splits d_v on `full_table` into the observed block, the unobserved block and
/// the two directed cross blocks.
pub fn dv_decompose<D: Density + ?Sized>(
    full_table: &FrequencyTable,
    observed: &Truncation,
    model: &D,
) -> Result<Decomposition> {
    let m = full_table.len();
    let mut is_obs = vec![false; m];
    for &p in observed.points() {
        let i = full_table.position(p).ok_or(Error::UnknownPoint(p))?;
        is_obs[i] = true;
    }
    if is_obs.iter().all(|&o| o) {
        return Err(Error::InvalidTable(
            "observed part must be a proper subset of the table".into(),
        ));
    }
    if let Some((p, _)) = full_table.rows().find(|&(_, c)| c <= 0.0) {
        return Err(Error::ZeroCount(p));
    }
    let logs = log_densities(model, full_table.points())?;
    let counts = full_table.counts();
    let mut parts = Decomposition {
        observed: 0.0,
        unobserved: 0.0,
        cross: 0.0,
    };
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let term = (counts[i] / counts[j] - (logs[i] - logs[j]).exp()).abs();
            match (is_obs[i], is_obs[j]) {
                (true, true) => parts.observed += term,
                (false, false) => parts.unobserved += term,
                _ => parts.cross += term,
            }
        }
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionModel;
    use crate::freq::{empirical_truncated, truncate};

    fn table1() -> FrequencyTable {
        FrequencyTable::new(
            (0..8).map(f64::from).collect(),
            vec![15.0, 71.0, 108.0, 134.0, 97.0, 47.0, 23.0, 5.0],
        )
        .unwrap()
    }

    #[test]
    fn identical_tables_have_zero_distance() {
        let p = EmpiricalTruncated::new(vec![1.0, 2.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let d = dv_tables(&p, &p).unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.pair_count, 6);
    }

    #[test]
    fn hand_evaluated_pair() {
        let p = EmpiricalTruncated::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let q = EmpiricalTruncated::new(vec![0.0, 1.0], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let d = dv_tables(&p, &q).unwrap();
        assert!((d.value - 1.5).abs() < 1e-15);
        assert_eq!(dv_tables(&q, &p).unwrap().value, d.value);
    }

    #[test]
    fn exact_binomial_ratio_gives_zero() {
        let model = DistributionModel::binomial(10, 0.3).unwrap();
        let t = FrequencyTable::new(vec![0.0, 1.0], vec![7.0, 30.0]).unwrap();
        let d = dv_model(&model, &t).unwrap();
        assert!(d.value < 1e-12, "{}", d.value);

        // same comparison through two empirical distributions
        let p = empirical_truncated(&t).unwrap();
        let norm = model.density(0.0) + model.density(1.0);
        let q = EmpiricalTruncated::new(
            vec![0.0, 1.0],
            vec![model.density(0.0) / norm, model.density(1.0) / norm],
        )
        .unwrap();
        assert!(dv_tables(&p, &q).unwrap().value < 1e-12);
    }

    #[test]
    fn mismatched_points_and_zero_probs() {
        let p = EmpiricalTruncated::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let q = EmpiricalTruncated::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(dv_tables(&p, &q), Err(Error::PointMismatch)));
        let t = FrequencyTable::new(vec![0.0, 1.0], vec![0.0, 3.0]).unwrap();
        let model = DistributionModel::poisson(2.0).unwrap();
        assert!(matches!(dv_model(&model, &t), Err(Error::ZeroCount(_))));
    }

    #[test]
    fn support_mismatch_names_the_point() {
        let model = DistributionModel::binomial(5, 0.3).unwrap();
        let t = FrequencyTable::new(vec![4.0, 6.0], vec![1.0, 1.0]).unwrap();
        match dv_model(&model, &t) {
            Err(Error::SupportMismatch { point }) => assert_eq!(point, 6.0),
            other => panic!("{other:?}"),
        }
        // density below 1e-300 counts as a mismatch too
        let n = DistributionModel::normal(0.0, 1.0).unwrap();
        let far = FrequencyTable::new(vec![0.0, 40.0], vec![1.0, 1.0]).unwrap();
        assert!(
            matches!(dv_model(&n, &far), Err(Error::SupportMismatch { point }) if point == 40.0)
        );
    }

    #[test]
    fn decomposition_sums_to_total() {
        let t = table1();
        let model = DistributionModel::binomial(10, 0.3).unwrap();
        let obs = Truncation::new(vec![2.0, 3.0, 4.0, 5.0]).unwrap();
        let parts = dv_decompose(&t, &obs, &model).unwrap();
        let total = dv_model(&model, &t).unwrap().value;
        assert!((parts.total() - total).abs() <= 1e-12 * total.max(1.0));
        let sub = truncate(&t, &obs).unwrap();
        assert!((parts.observed - dv_model(&model, &sub).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn decomposition_single_unobserved_point() {
        let t = table1();
        let model = DistributionModel::binomial(10, 0.3).unwrap();
        let obs = Truncation::new((0..7).map(f64::from).collect()).unwrap();
        let parts = dv_decompose(&t, &obs, &model).unwrap();
        assert_eq!(parts.unobserved, 0.0);
        assert!(dv_decompose(&t, &Truncation::all(&t), &model).is_err());
    }

    #[test]
    fn exact_model_table_has_zero_parts() {
        let model = DistributionModel::poisson(2.5).unwrap();
        let pts: Vec<f64> = (0..6).map(f64::from).collect();
        let counts = pts.iter().map(|&x| 1000.0 * model.density(x)).collect();
        let t = FrequencyTable::new(pts, counts).unwrap();
        let parts = dv_decompose(&t, &Truncation::new(vec![1.0, 2.0]).unwrap(), &model).unwrap();
        assert!(parts.total() < 1e-10, "{parts:?}");
    }
}
