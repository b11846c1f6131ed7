//! Choosing between candidate models from truncated data.
//!
//! [`select_model`] ranks candidates by d_v to the table, fitting any free
//! parameters by minimum d_v first. [`aux_likelihood_decide`] compares fully
//! specified candidates through the likelihood of their auxiliary
//! distributions. [`run_selection_experiment`] scores the selection rule on
//! simulated data.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{seeded_rng, Density, DistributionModel, ModelTemplate};
use crate::dv::{dv_model, log_densities};
use crate::error::{Error, Result};
use crate::freq::{bin_sample, drop_zero, FrequencyTable};
use crate::mindist::{estimate_min_dv, usable_table, OptimizerConfig};

/// A fixed model, or a template whose free parameters are fitted to the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Candidate {
    Fixed(DistributionModel),
    Fitted(ModelTemplate),
}

impl FromStr for Candidate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let template: ModelTemplate = s.parse()?;
        if template.free_indices().is_empty() {
            Ok(Candidate::Fixed(template.instantiate(&[])?))
        } else {
            Ok(Candidate::Fitted(template))
        }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::Fixed(m) => m.fmt(f),
            Candidate::Fitted(t) => t.fmt(f),
        }
    }
}

impl TryFrom<String> for Candidate {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Candidate> for String {
    fn from(c: Candidate) -> String {
        c.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    /// Position in the candidate list.
    pub id: usize,
    pub candidate: Candidate,
    /// The model actually compared; `None` when fitting failed.
    pub model: Option<DistributionModel>,
    /// `+inf` when the candidate is infeasible on the table's points.
    #[serde(with = "crate::serde_float")]
    pub dv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Ascending by d_v; ties keep candidate order.
    pub ranked: Vec<RankedCandidate>,
    pub winner: usize,
}

/// Ranks `candidates` by d_v to `table`. Zero-count rows are dropped first.
pub fn select_model(
    candidates: &[Candidate],
    table: &FrequencyTable,
    config: &OptimizerConfig,
) -> Result<SelectionResult> {
    if candidates.len() < 2 {
        return Err(Error::InvalidConfig(
            "model selection needs at least two candidates".into(),
        ));
    }
    let table = usable_table(table, 1)?;
    let mut ranked: Vec<RankedCandidate> = candidates
        .iter()
        .enumerate()
        .map(|(id, c)| {
            let model = match c {
                Candidate::Fixed(m) => Some(*m),
                Candidate::Fitted(t) => estimate_min_dv(t, &table, config).ok().map(|r| r.model),
            };
            let dv = model
                .and_then(|m| dv_model(&m, &table).ok())
                .map_or(f64::INFINITY, |d| d.value);
            RankedCandidate {
                id,
                candidate: *c,
                model,
                dv,
            }
        })
        .collect();
    ranked.sort_by(|a, b| a.dv.total_cmp(&b.dv));
    let winner = ranked[0].id;
    Ok(SelectionResult { ranked, winner })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Candidate(usize),
    Indeterminate,
}

/// Picks the fully specified candidate maximizing `Σ n_i ln h(u_i)`, where `h`
/// is the candidate's auxiliary distribution on the table's points.
///
/// Log-likelihoods within `1e-12 · Σ|n_i ln h(u_i)|` of the best count as a tie.
pub fn aux_likelihood_decide<D: Density>(
    candidates: &[D],
    table: &FrequencyTable,
) -> Result<Decision> {
    if candidates.len() < 2 {
        return Err(Error::InvalidConfig(
            "decision needs at least two candidates".into(),
        ));
    }
    let mut scores = Vec::with_capacity(candidates.len());
    for c in candidates {
        let logs = log_densities(c, table.points())?;
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        let terms: Vec<f64> = logs
            .iter()
            .zip(table.counts())
            .map(|(l, n)| n * (l - z))
            .collect();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        scores.push((terms.iter().sum::<f64>(), scale));
    }
    let best = (0..scores.len())
        .max_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0).then(b.cmp(&a)))
        .expect("nonempty");
    let tied = scores.iter().enumerate().any(|(i, &(s, scale))| {
        i != best && (scores[best].0 - s).abs() <= 1e-12 * scale.max(scores[best].1)
    });
    Ok(if tied {
        Decision::Indeterminate
    } else {
        Decision::Candidate(best)
    })
}

/// Which part of a raw simulated sample is observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationRule {
    /// Observations equal to one of these values.
    KeepPoints(Vec<f64>),
    /// Observations strictly to the right of the cut-off (`x > c`).
    RightCutoff(f64),
    /// Observations strictly to the left of the cut-off (`x < c`).
    LeftCutoff(f64),
}

impl TruncationRule {
    pub fn keeps(&self, x: f64) -> bool {
        match self {
            TruncationRule::KeepPoints(pts) => pts.contains(&x),
            TruncationRule::RightCutoff(c) => x > *c,
            TruncationRule::LeftCutoff(c) => x < *c,
        }
    }

    pub fn apply(&self, sample: &[f64]) -> Vec<f64> {
        sample.iter().copied().filter(|&x| self.keeps(x)).collect()
    }
}

/// Monte-Carlo study of how often [`select_model`] picks the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionExperiment {
    pub generator: DistributionModel,
    pub candidates: Vec<Candidate>,
    /// Index of the candidate that counts as a correct selection.
    #[serde(default)]
    pub correct: usize,
    pub replications: usize,
    pub sample_size: usize,
    pub truncation: TruncationRule,
    /// Equal-width classes for continuous data; `None` tabulates distinct values.
    #[serde(default)]
    pub num_bins: Option<usize>,
    pub seed: u64,
}

/// Flat key-value form of an experiment, as read from a TOML file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    generator: String,
    candidates: Vec<String>,
    #[serde(default)]
    correct: usize,
    replications: usize,
    sample_size: usize,
    keep: Option<Vec<f64>>,
    cutoff_right: Option<f64>,
    cutoff_left: Option<f64>,
    num_bins: Option<usize>,
    #[serde(default)]
    seed: u64,
}

pub const PRESETS: [&str; 4] = ["paper1", "paper1-reverse", "weibull-gamma", "paper1-b10"];

impl SelectionExperiment {
    /// Named configurations at full scale (10000 replications).
    ///
    /// * `paper1`: B(8,0.1) data kept on {0,1,2,3}; B(8,0.1) against B(15,0.15).
    /// * `paper1-reverse`: B(10,0.15) data on {0,1,2,3}; B(10,0.15) against B(8,0.1).
    /// * `weibull-gamma`: W(1.2,1.5) samples of 1000 kept above 1.25, in 11
    ///   classes; W(1.2,1.5) against G(2,0.5).
    /// * `paper1-b10`: as `paper1` with B(10,0.15) as the alternative.
    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        let b = |n, p| DistributionModel::binomial(n, p).expect("valid preset");
        let small = TruncationRule::KeepPoints(vec![0.0, 1.0, 2.0, 3.0]);
        let (generator, alt, sample_size, truncation, num_bins) = match name {
            "paper1" => (b(8, 0.1), b(15, 0.15), 100, small, None),
            "paper1-b10" => (b(8, 0.1), b(10, 0.15), 100, small, None),
            "paper1-reverse" => (b(10, 0.15), b(8, 0.1), 100, small, None),
            "weibull-gamma" => (
                DistributionModel::weibull(1.2, 1.5).expect("valid preset"),
                DistributionModel::gamma(2.0, 0.5).expect("valid preset"),
                1000,
                TruncationRule::RightCutoff(1.25),
                Some(11),
            ),
            other => return Err(Error::UnknownFixture(other.to_string())),
        };
        Ok(SelectionExperiment {
            generator,
            candidates: vec![Candidate::Fixed(generator), Candidate::Fixed(alt)],
            correct: 0,
            replications: 10_000,
            sample_size,
            truncation,
            num_bins,
            seed,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let f: ExperimentFile =
            toml::from_str(text).map_err(|e| Error::Parse(format!("experiment file: {e}")))?;
        let truncation = match (f.keep, f.cutoff_right, f.cutoff_left) {
            (Some(k), None, None) => TruncationRule::KeepPoints(k),
            (None, Some(c), None) => TruncationRule::RightCutoff(c),
            (None, None, Some(c)) => TruncationRule::LeftCutoff(c),
            _ => {
                return Err(Error::Parse(
                    "experiment file: give exactly one of keep, cutoff_right, cutoff_left".into(),
                ))
            }
        };
        let exp = SelectionExperiment {
            generator: f.generator.parse()?,
            candidates: f
                .candidates
                .iter()
                .map(|c| c.parse())
                .collect::<Result<_>>()?,
            correct: f.correct,
            replications: f.replications,
            sample_size: f.sample_size,
            truncation,
            num_bins: f.num_bins,
            seed: f.seed,
        };
        exp.validate()?;
        Ok(exp)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.replications == 0 || self.sample_size == 0 {
            return bad("replications and sample_size must be >= 1");
        }
        if self.candidates.len() < 2 || self.correct >= self.candidates.len() {
            return bad("need >= 2 candidates and a valid `correct` index");
        }
        for (i, a) in self.candidates.iter().enumerate() {
            if self.candidates[..i].contains(a) {
                return bad(&format!("duplicate candidate {a}"));
            }
        }
        if self.num_bins == Some(0) {
            return bad("num_bins must be >= 1");
        }
        Ok(())
    }

    /// The observed table of replication `index`, or `None` when fewer than two
    /// distinct points survive truncation.
    pub fn replicate_table(&self, index: u64) -> Option<FrequencyTable> {
        let mut rng = seeded_rng(self.seed, index);
        let sample = self.generator.sample_with(&mut rng, self.sample_size);
        let kept = self.truncation.apply(&sample);
        if kept.is_empty() {
            return None;
        }
        let table = match self.num_bins {
            Some(k) => drop_zero(&bin_sample(&kept, k).ok()?).ok()?,
            None => FrequencyTable::tabulate(&kept).ok()?,
        };
        (table.len() >= 2).then_some(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub replications: usize,
    /// Replications that produced a usable table.
    pub scored: usize,
    /// Replications left with fewer than two distinct points.
    pub excluded: usize,
    pub correct: usize,
    /// `correct / scored`.
    pub rate: f64,
}

/// Runs every replication (in parallel) and scores the winner against
/// `exp.correct`.
pub fn run_selection_experiment(
    exp: &SelectionExperiment,
    config: &OptimizerConfig,
) -> Result<ExperimentResult> {
    exp.validate()?;
    let outcomes: Vec<Option<bool>> = (0..exp.replications as u64)
        .into_par_iter()
        .map(|i| {
            let table = exp.replicate_table(i)?;
            let r = select_model(&exp.candidates, &table, config).ok()?;
            Some(r.winner == exp.correct)
        })
        .collect();
    let scored = outcomes.iter().flatten().count();
    if scored == 0 {
        return Err(Error::Experiment(
            "every replication was left without two distinct points".into(),
        ));
    }
    let correct = outcomes.iter().flatten().filter(|&&c| c).count();
    Ok(ExperimentResult {
        replications: exp.replications,
        scored,
        excluded: exp.replications - scored,
        correct,
        rate: correct as f64 / scored as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::FinitePmf;

    fn g1() -> FinitePmf {
        FinitePmf::new(vec![1.0, 2.0, 3.0], vec![1.0 / 6.0, 2.0 / 6.0, 0.5]).unwrap()
    }

    fn g2() -> FinitePmf {
        FinitePmf::new(vec![2.0, 3.0, 4.0], vec![1.0 / 6.0, 2.0 / 6.0, 0.5]).unwrap()
    }

    fn decide(n1: f64, n2: f64) -> Decision {
        let t = FrequencyTable::new(vec![2.0, 3.0], vec![n1, n2]).unwrap();
        aux_likelihood_decide(&[g1(), g2()], &t).unwrap()
    }

    #[test]
    fn decision_threshold_in_first_frequency() {
        let x0 = -(0.9f64).ln() / (4.0f64 / 3.0).ln();
        // f1 = n1/(n1+n2) just below and above x0
        assert_eq!(decide(0.36, 0.64), Decision::Candidate(1));
        assert_eq!(decide(0.37, 0.63), Decision::Candidate(0));
        assert_eq!(decide(x0, 1.0 - x0), Decision::Indeterminate);
    }

    #[test]
    fn decision_needs_positive_densities() {
        let t = FrequencyTable::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        assert!(aux_likelihood_decide(&[g1(), g2()], &t).is_err());
    }

    #[test]
    fn exact_candidate_wins_with_zero_distance() {
        let m = DistributionModel::poisson(2.0).unwrap();
        let pts: Vec<f64> = (0..5).map(f64::from).collect();
        let counts = pts.iter().map(|&x| 100.0 * m.density(x)).collect();
        let t = FrequencyTable::new(pts, counts).unwrap();
        let cands = [
            Candidate::Fixed(DistributionModel::poisson(3.0).unwrap()),
            Candidate::Fixed(m),
        ];
        let r = select_model(&cands, &t, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.winner, 1);
        assert!(r.ranked[0].dv < 1e-12);
        assert!(r.ranked.windows(2).all(|w| w[0].dv <= w[1].dv));
    }

    #[test]
    fn infeasible_candidate_ranks_last() {
        let t = FrequencyTable::new(vec![0.0, 1.0, 6.0], vec![3.0, 5.0, 1.0]).unwrap();
        let cands: Vec<Candidate> = ["binomial(n=4,p=0.3)", "poisson(lambda=1)"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let r = select_model(&cands, &t, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.winner, 1);
        assert!(r.ranked[1].dv.is_infinite());
    }

    #[test]
    fn fitted_candidate_is_estimated() {
        let t = FrequencyTable::new(vec![0.0, 1.0], vec![7.0, 30.0]).unwrap();
        let cands: Vec<Candidate> = ["binomial(n=10)", "poisson(lambda=1)"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let r = select_model(&cands, &t, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.winner, 0);
        assert!((r.ranked[0].model.unwrap().param(1) - 0.3).abs() < 1e-6);
    }

    #[test]
    fn truncation_rules() {
        let s = [0.5, 1.25, 2.0, 3.0];
        assert_eq!(TruncationRule::RightCutoff(1.25).apply(&s), vec![2.0, 3.0]);
        assert_eq!(TruncationRule::LeftCutoff(1.25).apply(&s), vec![0.5]);
        assert_eq!(TruncationRule::KeepPoints(vec![2.0]).apply(&s), vec![2.0]);
    }

    #[test]
    fn small_experiment_is_reproducible() {
        let mut exp = SelectionExperiment::preset("paper1", 7).unwrap();
        exp.replications = 300;
        let cfg = OptimizerConfig::default();
        let a = run_selection_experiment(&exp, &cfg).unwrap();
        let b = run_selection_experiment(&exp, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.scored + a.excluded, 300);
        assert!((0.0..=1.0).contains(&a.rate));
    }

    #[test]
    fn identical_candidates_resolve_by_order() {
        let mut exp = SelectionExperiment::preset("paper1", 1).unwrap();
        exp.replications = 50;
        exp.candidates[1] = Candidate::Fixed(DistributionModel::binomial(9, 0.1).unwrap());
        assert!(exp.validate().is_ok());
        exp.candidates[1] = exp.candidates[0];
        assert!(exp.validate().is_err());
    }

    #[test]
    fn experiment_file_round_trip() {
        let text = r#"
            generator = "weibull(shape=1.2,scale=1.5)"
            candidates = ["weibull(shape=1.2,scale=1.5)", "gamma(a=2,b=0.5)"]
            replications = 20
            sample_size = 1000
            cutoff_right = 1.25
            num_bins = 11
            seed = 3
        "#;
        let exp = SelectionExperiment::from_toml(text).unwrap();
        assert_eq!(exp.truncation, TruncationRule::RightCutoff(1.25));
        let r = run_selection_experiment(&exp, &OptimizerConfig::default()).unwrap();
        assert_eq!(r.scored, 20);
        assert!(SelectionExperiment::from_toml("generator = 1").is_err());
    }
}
