//! Command layer behind the `dvfit` binary: each `cmd_*` function runs one
//! subcommand on parsed inputs and yields a [`ReportDocument`], which prints
//! as a human table and serializes as versioned JSON.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::auxiliary::{
    allocate_missing, classical_estimate, estimate_aux_ml, estimate_aux_moment,
};
use crate::dist::{DistributionModel, ModelTemplate};
use crate::error::{Error, Result};
use crate::freq::{bin_sample, truncate, FrequencyTable, Truncation};
use crate::gof::{gof_test, GofResult, ReplicateScheme};
use crate::mindist::{estimate_min_dv, EstimationReport, OptimizerConfig};
use crate::mixture::{estimate_mixture_init, MixtureInit, MixtureOptions, Side};
use crate::reproduce::{reproduce, ReproduceOptions, Reproduction, FIXTURES};
use crate::selection::{
    run_selection_experiment, select_model, Candidate, ExperimentResult, SelectionExperiment,
    SelectionResult, TruncationRule,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Default relative agreement gap below which two estimates count as credible.
pub const DEFAULT_CREDIBLE_REL: f64 = 0.05;

/// Hex SHA-256 over the inputs, each prefixed by its length.
pub fn digest_inputs<B: AsRef<[u8]>>(inputs: &[B]) -> String {
    let mut h = Sha256::new();
    for b in inputs {
        let b = b.as_ref();
        h.update((b.len() as u64).to_le_bytes());
        h.update(b);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReportBody {
    Estimation {
        reports: Vec<EstimationReport>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        credible: Option<bool>,
        /// Complete-data estimate on the untruncated table, where defined.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        classical: Option<f64>,
    },
    Allocation {
        model: DistributionModel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fit: Option<EstimationReport>,
        missing: Vec<f64>,
        allocated: Vec<f64>,
    },
    Selection(SelectionResult),
    Experiment {
        experiment: SelectionExperiment,
        result: ExperimentResult,
    },
    Gof(GofResult),
    Mixture(MixtureInit),
    Reproduction {
        tables: Vec<Reproduction>,
    },
    Simulation {
        table: FrequencyTable,
    },
}

/// What a command produced, before it is stamped with its invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: ReportBody,
    pub agreement_gap: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn plain(body: ReportBody) -> Self {
        Outcome {
            body,
            agreement_gap: None,
            warnings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    /// The invocation, one element per argument.
    pub command: Vec<String>,
    pub input_digest: String,
    pub body: ReportBody,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement_gap: Option<Vec<f64>>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ReportDocument {
    pub fn new(command: Vec<String>, input_digest: String, outcome: Outcome) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION,
            command,
            input_digest,
            body: outcome.body,
            agreement_gap: outcome.agreement_gap,
            warnings: outcome.warnings,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ReportDocument = serde_json::from_str(text)?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "report schema version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// False when a reproduction missed an expectation.
    pub fn passed(&self) -> bool {
        match &self.body {
            ReportBody::Reproduction { tables } => tables.iter().all(Reproduction::passed),
            _ => true,
        }
    }
}

/// Estimation methods accepted by [`cmd_estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    MinDv,
    AuxMoment,
    AuxMl,
    /// Minimum d_v and the auxiliary route, with their agreement gap.
    Both,
}

impl FromStr for EstimateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mindv" | "min-dv" => Ok(EstimateMethod::MinDv),
            "aux-moment" => Ok(EstimateMethod::AuxMoment),
            "aux-ml" => Ok(EstimateMethod::AuxMl),
            "both" => Ok(EstimateMethod::Both),
            _ => Err(Error::Parse(format!(
                "unknown method `{s}` (mindv, aux-moment, aux-ml, both)"
            ))),
        }
    }
}

/// Builds the table a raw sample describes: the cut-off rule first, then
/// `bins` equal-width classes, or one row per distinct value without `bins`.
pub fn table_from_sample(
    sample: &[f64],
    rule: Option<&TruncationRule>,
    bins: Option<usize>,
) -> Result<FrequencyTable> {
    let kept = match rule {
        Some(r) => r.apply(sample),
        None => sample.to_vec(),
    };
    let table = match bins {
        Some(k) => bin_sample(&kept, k)?,
        None => FrequencyTable::tabulate(&kept)?,
    };
    if rule.is_some() {
        table.with_full_size(sample.len() as f64)
    } else {
        Ok(table)
    }
}

/// Moment route when the template allows it, else likelihood.
fn auxiliary_estimate(
    template: &ModelTemplate,
    table: &FrequencyTable,
    config: &OptimizerConfig,
    warnings: &mut Vec<String>,
) -> Result<EstimationReport> {
    if template.free_indices().len() == 1 {
        match estimate_aux_moment(template, table, config) {
            Err(Error::UnsupportedForm { .. }) => {}
            other => return other,
        }
    }
    warnings.push(format!(
        "{template}: no moment equation; auxiliary estimate by likelihood"
    ));
    estimate_aux_ml(template, table, config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    pub keep: Option<Truncation>,
    pub credible_rel: f64,
    pub config: OptimizerConfig,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            keep: None,
            credible_rel: DEFAULT_CREDIBLE_REL,
            config: OptimizerConfig::default(),
        }
    }
}

pub fn cmd_estimate(
    table: &FrequencyTable,
    template: &ModelTemplate,
    method: EstimateMethod,
    options: &EstimateOptions,
) -> Result<Outcome> {
    if options.credible_rel.is_nan() || options.credible_rel < 0.0 {
        return Err(Error::InvalidConfig(
            "credibility threshold must be nonnegative".into(),
        ));
    }
    let truncated = match &options.keep {
        Some(k) => truncate(table, k)?,
        None => table.clone(),
    };
    let cfg = &options.config;
    let classical = classical_estimate(template, table).ok();
    let mut warnings = Vec::new();
    let (reports, gap, credible) = match method {
        EstimateMethod::MinDv => (
            vec![estimate_min_dv(template, &truncated, cfg)?],
            None,
            None,
        ),
        EstimateMethod::AuxMoment => (
            vec![estimate_aux_moment(template, &truncated, cfg)?],
            None,
            None,
        ),
        EstimateMethod::AuxMl => (
            vec![estimate_aux_ml(template, &truncated, cfg)?],
            None,
            None,
        ),
        EstimateMethod::Both => {
            let mut first = estimate_min_dv(template, &truncated, cfg)?;
            let mut second = auxiliary_estimate(template, &truncated, cfg, &mut warnings)?;
            let gap: Vec<f64> = first
                .estimate
                .iter()
                .zip(&second.estimate)
                .map(|(a, b)| (a - b).abs())
                .collect();
            let credible = first
                .estimate
                .iter()
                .zip(&second.estimate)
                .zip(&gap)
                .all(|((a, b), g)| *g <= options.credible_rel * a.abs().max(b.abs()));
            if !credible {
                warnings.push(format!(
                    "estimates differ by more than {}% of their size; check the data",
                    100.0 * options.credible_rel
                ));
            }
            first.agreement_gap = Some(gap.clone());
            second.agreement_gap = Some(gap.clone());
            (vec![first, second], Some(gap), Some(credible))
        }
    };
    for r in &reports {
        if !r.converged {
            warnings.push(format!(
                "{}: refinement stopped before converging",
                r.method.name()
            ));
        }
    }
    Ok(Outcome {
        body: ReportBody::Estimation {
            reports,
            credible,
            classical,
        },
        agreement_gap: gap,
        warnings,
    })
}

/// Predicted counts at `missing`; a template is fitted by the auxiliary route.
pub fn cmd_allocate(
    table: &FrequencyTable,
    model: &Candidate,
    missing: &[f64],
    config: &OptimizerConfig,
) -> Result<Outcome> {
    let mut warnings = Vec::new();
    let (model, fit) = match model {
        Candidate::Fixed(m) => (*m, None),
        Candidate::Fitted(t) => {
            let r = auxiliary_estimate(t, table, config, &mut warnings)?;
            (r.model, Some(r))
        }
    };
    let allocated = allocate_missing(&model, table, missing)?;
    Ok(Outcome {
        body: ReportBody::Allocation {
            model,
            fit,
            missing: missing.to_vec(),
            allocated,
        },
        agreement_gap: None,
        warnings,
    })
}

pub fn cmd_select(
    table: &FrequencyTable,
    candidates: &[Candidate],
    config: &OptimizerConfig,
) -> Result<Outcome> {
    let result = select_model(candidates, table, config)?;
    let mut warnings = Vec::new();
    if let [a, b, ..] = result.ranked.as_slice() {
        if a.dv == b.dv {
            warnings.push("the two best candidates tie".into());
        }
    }
    Ok(Outcome {
        body: ReportBody::Selection(result),
        agreement_gap: None,
        warnings,
    })
}

pub fn cmd_experiment(
    experiment: &SelectionExperiment,
    config: &OptimizerConfig,
) -> Result<Outcome> {
    let result = run_selection_experiment(experiment, config)?;
    let mut warnings = Vec::new();
    if result.excluded > 0 {
        warnings.push(format!(
            "{} replications had fewer than two observed points and were not scored",
            result.excluded
        ));
    }
    Ok(Outcome {
        body: ReportBody::Experiment {
            experiment: experiment.clone(),
            result,
        },
        agreement_gap: None,
        warnings,
    })
}

pub fn cmd_gof(
    table: &FrequencyTable,
    model: &DistributionModel,
    scheme: &ReplicateScheme,
    replicates: usize,
    alpha: f64,
    seed: u64,
) -> Result<Outcome> {
    let r = gof_test(model, table, scheme, replicates, alpha, seed)?;
    let mut warnings = Vec::new();
    if r.resampled > 0 {
        warnings.push(format!(
            "{} replicates redrawn for empty cells",
            r.resampled
        ));
    }
    Ok(Outcome {
        body: ReportBody::Gof(r),
        agreement_gap: None,
        warnings,
    })
}

pub fn cmd_mixture_init(
    sample: &[f64],
    sigma1: f64,
    sigma2: f64,
    options: &MixtureOptions,
    config: &OptimizerConfig,
) -> Result<Outcome> {
    let init = estimate_mixture_init(sample, sigma1, sigma2, options, config)?;
    let warnings = init.warnings.clone();
    let gap = vec![
        (init.m1_est.m_dv - init.m1_est.m_aux).abs(),
        (init.m2_est.m_dv - init.m2_est.m_aux).abs(),
    ];
    Ok(Outcome {
        body: ReportBody::Mixture(init),
        agreement_gap: Some(gap),
        warnings,
    })
}

/// Runs the named reproductions; misses are reported, not raised.
pub fn cmd_reproduce(ids: &[String], options: &ReproduceOptions) -> Result<Outcome> {
    let tables = ids
        .iter()
        .map(|id| reproduce(id, options))
        .collect::<Result<Vec<_>>>()?;
    let warnings = tables
        .iter()
        .filter(|t| !t.passed())
        .map(|t| {
            format!(
                "{}: {} of {} checks missed",
                t.id,
                t.misses(),
                t.checks.len()
            )
        })
        .collect();
    Ok(Outcome {
        body: ReportBody::Reproduction { tables },
        agreement_gap: None,
        warnings,
    })
}

/// Digest of every bundled fixture, for reproduction reports.
pub fn fixtures_digest() -> String {
    digest_inputs(
        &FIXTURES
            .iter()
            .map(|(_, t)| t.as_bytes())
            .collect::<Vec<_>>(),
    )
}

/// A seeded sample from `model`, optionally truncated and binned.
pub fn cmd_simulate(
    model: &DistributionModel,
    size: usize,
    seed: u64,
    rule: Option<&TruncationRule>,
    bins: Option<usize>,
) -> Result<Outcome> {
    let sample = model.sample(size, seed)?;
    let table = table_from_sample(&sample, rule, bins)?;
    Ok(Outcome::plain(ReportBody::Simulation { table }))
}

fn fmt_estimate(f: &mut fmt::Formatter<'_>, r: &EstimationReport) -> fmt::Result {
    let values: Vec<String> = r
        .parameters
        .iter()
        .zip(&r.estimate)
        .map(|(n, v)| format!("{n}={v:.6}"))
        .collect();
    writeln!(
        f,
        "{:<11} {:<28} objective {:<12.6e} evals {:>5}{}",
        r.method.name(),
        values.join(" "),
        r.objective_at_estimate,
        r.evaluations,
        if r.converged { "" } else { "  (not converged)" }
    )
}

fn fmt_table(f: &mut fmt::Formatter<'_>, t: &FrequencyTable) -> fmt::Result {
    writeln!(f, "point,count")?;
    for (x, n) in t.rows() {
        writeln!(f, "{x},{n}")?;
    }
    Ok(())
}

impl fmt::Display for ReportDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            ReportBody::Estimation {
                reports,
                credible,
                classical,
            } => {
                for r in reports {
                    fmt_estimate(f, r)?;
                }
                if let Some(gap) = &self.agreement_gap {
                    let g: Vec<String> = gap.iter().map(|g| format!("{g:.6}")).collect();
                    writeln!(f, "agreement gap {}", g.join(" "))?;
                }
                if let Some(c) = credible {
                    writeln!(f, "credible     {c}")?;
                }
                if let Some(c) = classical {
                    writeln!(f, "classical    {c:.6} (complete-data, ignores truncation)")?;
                }
            }
            ReportBody::Allocation {
                model,
                fit,
                missing,
                allocated,
            } => {
                if let Some(r) = fit {
                    fmt_estimate(f, r)?;
                }
                writeln!(f, "model {model}")?;
                writeln!(f, "point,allocated")?;
                for (x, n) in missing.iter().zip(allocated) {
                    writeln!(f, "{x},{n:.4}")?;
                }
            }
            ReportBody::Selection(s) => {
                writeln!(f, "{:>4}  {:<36} {:>14}  model", "rank", "candidate", "d_v")?;
                for (k, c) in s.ranked.iter().enumerate() {
                    let model = c.model.map_or_else(|| "-".to_string(), |m| m.to_string());
                    writeln!(
                        f,
                        "{:>4}  {:<36} {:>14.6}  {model}",
                        k + 1,
                        c.candidate.to_string(),
                        c.dv
                    )?;
                }
                writeln!(
                    f,
                    "winner: candidate {} ({})",
                    s.winner, s.ranked[0].candidate
                )?;
            }
            ReportBody::Experiment { experiment, result } => {
                writeln!(f, "generator    {}", experiment.generator)?;
                let c: Vec<String> = experiment
                    .candidates
                    .iter()
                    .map(|c| c.to_string())
                    .collect();
                writeln!(f, "candidates   {}", c.join(" vs "))?;
                writeln!(
                    f,
                    "replications {} (scored {}, excluded {})",
                    result.replications, result.scored, result.excluded
                )?;
                writeln!(f, "correct      {}", result.correct)?;
                writeln!(f, "rate         {:.4}", result.rate)?;
            }
            ReportBody::Gof(g) => {
                writeln!(f, "observed d_v     {:.6}", g.observed_dv)?;
                writeln!(
                    f,
                    "empirical cdf    {:.4} over {} replicates",
                    g.empirical_cdf_at_observed, g.replicates
                )?;
                writeln!(f, "alpha            {}", g.alpha)?;
                writeln!(
                    f,
                    "decision         {}",
                    if g.reject { "reject" } else { "do not reject" }
                )?;
            }
            ReportBody::Mixture(m) => {
                let s = &m.split;
                writeln!(f, "merged mean  {:.6}", s.m_g)?;
                writeln!(f, "S_l, S_r     {:.6}, {:.6}", s.s_l, s.s_r)?;
                let side = match s.side_of_m1 {
                    Side::Left => "left",
                    Side::Right => "right",
                    Side::Undetermined => "undetermined",
                };
                writeln!(f, "m1 side      {side}")?;
                writeln!(
                    f,
                    "left tail    x <= {:.6} ({} classes)",
                    s.sup_l,
                    s.left_table.len()
                )?;
                writeln!(
                    f,
                    "right tail   x >= {:.6} ({} classes)",
                    s.min_r,
                    s.right_table.len()
                )?;
                writeln!(
                    f,
                    "{:<4} {:>12} {:>12} {:>12}",
                    "", "aux", "min-dv", "u-bar"
                )?;
                for (name, t) in [("m1", &m.m1_est), ("m2", &m.m2_est)] {
                    writeln!(
                        f,
                        "{name:<4} {:>12.6} {:>12.6} {:>12.6}",
                        t.m_aux, t.m_dv, t.tail_mean
                    )?;
                }
                writeln!(f, "alpha        {:.6}", m.alpha_est)?;
            }
            ReportBody::Reproduction { tables } => {
                for t in tables {
                    writeln!(f, "== {} ==", t.id)?;
                    for c in &t.checks {
                        writeln!(f, "{c}")?;
                    }
                    writeln!(f, "{}: {}", t.id, if t.passed() { "pass" } else { "FAIL" })?;
                }
            }
            ReportBody::Simulation { table } => fmt_table(f, table)?,
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}
