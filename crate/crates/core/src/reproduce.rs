//! Regenerates the reference tables from the bundled fixtures and compares
//! them with the stored expectations in `data/expected.toml`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::auxiliary::{allocate_missing, classical_estimate, estimate_aux_moment};
use crate::dist::{FinitePmf, ModelTemplate};
use crate::error::{Error, Result};
use crate::freq::{truncate, FrequencyTable, Truncation};
use crate::mindist::{estimate_min_dv, OptimizerConfig};
use crate::mixture::estimate_tail_mean;
use crate::selection::{
    aux_likelihood_decide, run_selection_experiment, Decision, SelectionExperiment,
};

/// Bundled input tables, by file name.
pub const FIXTURES: [(&str, &str); 11] = [
    ("table1.csv", include_str!("../data/table1.csv")),
    ("table3.csv", include_str!("../data/table3.csv")),
    ("table5.csv", include_str!("../data/table5.csv")),
    ("table8.csv", include_str!("../data/table8.csv")),
    ("table9.csv", include_str!("../data/table9.csv")),
    ("table10.csv", include_str!("../data/table10.csv")),
    ("table11.csv", include_str!("../data/table11.csv")),
    (
        "binomial_two_points.csv",
        include_str!("../data/binomial_two_points.csv"),
    ),
    (
        "gamma_two_points.csv",
        include_str!("../data/gamma_two_points.csv"),
    ),
    (
        "gamma_three_points.csv",
        include_str!("../data/gamma_three_points.csv"),
    ),
    (
        "mixture_sample.txt",
        include_str!("../data/mixture_sample.txt"),
    ),
];

const EXPECTED: &str = include_str!("../data/expected.toml");

pub const TABLE_IDS: [&str; 8] = [
    "T2",
    "T4",
    "T6",
    "T7",
    "T8",
    "hartley",
    "mixture",
    "selection",
];

pub fn fixture_text(name: &str) -> Result<&'static str> {
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))
}

/// A bundled `point,count` table.
pub fn fixture_table(name: &str) -> Result<FrequencyTable> {
    FrequencyTable::read_csv(fixture_text(name)?.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// `|computed − expected| ≤ tolerance`.
    Within,
    /// `computed ≥ expected`.
    AtLeast,
    /// Reported, never fails.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub computed: f64,
    /// Equals `computed` for informational rows.
    pub expected: f64,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub pass: bool,
}

impl Check {
    pub fn within(label: impl Into<String>, computed: f64, expected: f64, tolerance: f64) -> Self {
        Check {
            label: label.into(),
            computed,
            expected,
            tolerance,
            kind: CheckKind::Within,
            pass: (computed - expected).abs() <= tolerance,
        }
    }

    pub fn at_least(label: impl Into<String>, computed: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            computed,
            expected: bound,
            tolerance: 0.0,
            kind: CheckKind::AtLeast,
            pass: computed >= bound,
        }
    }

    pub fn info(label: impl Into<String>, computed: f64) -> Self {
        Check {
            label: label.into(),
            computed,
            expected: computed,
            tolerance: 0.0,
            kind: CheckKind::Info,
            pass: true,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (self.kind, self.pass) {
            (CheckKind::Info, _) => "info",
            (_, true) => "ok",
            (_, false) => "MISS",
        };
        match self.kind {
            CheckKind::Within => write!(
                f,
                "{status:>4}  {:<44} {:>12.6} expected {:>10} ± {}",
                self.label, self.computed, self.expected, self.tolerance
            ),
            CheckKind::AtLeast => write!(
                f,
                "{status:>4}  {:<44} {:>12.6} expected >= {}",
                self.label, self.computed, self.expected
            ),
            CheckKind::Info => write!(f, "{status:>4}  {:<44} {:>12.6}", self.label, self.computed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub id: String,
    pub checks: Vec<Check>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn misses(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

#[derive(Debug, Deserialize)]
struct Expected {
    t2: RowsWithTol<T2Row>,
    t4: RowsWithTol<T4Row>,
    t6: RowsWithTol<T6Row>,
    t7: T7,
    t8: T8,
    hartley: Hartley,
    mixture: Mixture,
    selection: Selection,
}

#[derive(Debug, Deserialize)]
struct RowsWithTol<R> {
    tolerance: f64,
    rows: Vec<R>,
}

#[derive(Debug, Deserialize)]
struct T2Row {
    keep: Vec<f64>,
    n_t: f64,
    p1: f64,
    p2: f64,
}

#[derive(Debug, Deserialize)]
struct T4Row {
    rows: Vec<usize>,
    n_t: f64,
    m: f64,
    sigma: f64,
}

#[derive(Debug, Deserialize)]
struct T6Row {
    rows: Vec<usize>,
    n_t: f64,
    b1: f64,
    b2: f64,
}

#[derive(Debug, Deserialize)]
struct T7 {
    tolerance: f64,
    threshold: f64,
}

#[derive(Debug, Deserialize)]
struct T8 {
    tolerance_classical: f64,
    tolerance: f64,
    classical: f64,
    p_tilde: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct Hartley {
    lambda2: f64,
    lambda2_tolerance: f64,
    allocations: Vec<f64>,
    allocation_tolerance: f64,
    lambda1_full: f64,
    lambda1_trimmed: f64,
    lambda1_tolerance: f64,
}

#[derive(Debug, Deserialize)]
struct Mixture {
    tolerance_aux: f64,
    tolerance_dv: f64,
    m1_full_ubar: f64,
    m1_trimmed_ubar: f64,
    m1_full: f64,
    m1_trimmed: f64,
    m1_dv: f64,
    m2_full: f64,
    m2_trimmed: f64,
    m2_dv: f64,
}

#[derive(Debug, Deserialize)]
struct Selection {
    min_rate: f64,
    fast_min_rate: f64,
    replications: usize,
    fast_replications: usize,
    presets: Vec<String>,
}

fn expected() -> Result<Expected> {
    toml::from_str(EXPECTED).map_err(|e| Error::Parse(format!("expected.toml: {e}")))
}

fn template(text: &str) -> ModelTemplate {
    text.parse().expect("literal template")
}

fn positions(rows: &[usize]) -> Vec<usize> {
    rows.iter().map(|r| r - 1).collect()
}

/// Options for [`reproduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceOptions {
    /// Selection experiments at 1000 replications with the relaxed bound.
    pub fast: bool,
    pub seed: u64,
    pub config: OptimizerConfig,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            fast: false,
            seed: 2024,
            config: OptimizerConfig::default(),
        }
    }
}

/// Regenerates table `id` (one of [`TABLE_IDS`], case-insensitive).
pub fn reproduce(id: &str, options: &ReproduceOptions) -> Result<Reproduction> {
    let exp = expected()?;
    let cfg = &options.config;
    let mut checks = Vec::new();
    let key = id.to_ascii_lowercase();
    match key.as_str() {
        "t2" => {
            let table = fixture_table("table1.csv")?;
            let tpl = template("binomial(n=10,p=?)");
            for (i, row) in exp.t2.rows.iter().enumerate() {
                let t = truncate(&table, &Truncation::new(row.keep.clone())?)?;
                let tag = format!("row {:>2}", i + 1);
                checks.push(Check::within(
                    format!("{tag} n_t"),
                    t.truncated_size(),
                    row.n_t,
                    0.0,
                ));
                let p1 = estimate_min_dv(&tpl, &t, cfg)?.estimate[0];
                let p2 = estimate_aux_moment(&tpl, &t, cfg)?.estimate[0];
                checks.push(Check::within(
                    format!("{tag} p1"),
                    p1,
                    row.p1,
                    exp.t2.tolerance,
                ));
                checks.push(Check::within(
                    format!("{tag} p2"),
                    p2,
                    row.p2,
                    exp.t2.tolerance,
                ));
            }
        }
        "t4" => {
            let table = fixture_table("table3.csv")?;
            let tpl = template("normal(m=?,sigma=?)");
            for (i, row) in exp.t4.rows.iter().enumerate() {
                let t = table.select_rows(&positions(&row.rows))?;
                let tag = format!("row {:>2}", i + 1);
                checks.push(Check::within(
                    format!("{tag} n_t"),
                    t.truncated_size(),
                    row.n_t,
                    0.0,
                ));
                let r = estimate_min_dv(&tpl, &t, cfg)?;
                checks.push(Check::within(
                    format!("{tag} m"),
                    r.estimate[0],
                    row.m,
                    exp.t4.tolerance,
                ));
                checks.push(Check::within(
                    format!("{tag} sigma"),
                    r.estimate[1],
                    row.sigma,
                    exp.t4.tolerance,
                ));
            }
        }
        "t6" => {
            let table = fixture_table("table5.csv")?;
            let tpl = template("gamma(a=7,b=?)");
            for (i, row) in exp.t6.rows.iter().enumerate() {
                let t = table.select_rows(&positions(&row.rows))?;
                let tag = format!(
                    "row {:>2} n_t={} (printed {})",
                    i + 1,
                    t.truncated_size(),
                    row.n_t
                );
                let b1 = estimate_min_dv(&tpl, &t, cfg)?.estimate[0];
                let b2 = estimate_aux_moment(&tpl, &t, cfg)?.estimate[0];
                checks.push(Check::within(
                    format!("{tag} b1"),
                    b1,
                    row.b1,
                    exp.t6.tolerance,
                ));
                checks.push(Check::within(
                    format!("{tag} b2"),
                    b2,
                    row.b2,
                    exp.t6.tolerance,
                ));
            }
        }
        "t7" => {
            let x0 = decision_switchover()?;
            checks.push(Check::within(
                "switchover in f1 = n1/n",
                x0,
                exp.t7.threshold,
                exp.t7.tolerance,
            ));
            checks.push(Check::info("same switchover as n1/n2", x0 / (1.0 - x0)));
        }
        "t8" => {
            let tpl = template("binomial(n=4,p=?)");
            for (i, (t, &p)) in table8_samples()?.iter().zip(&exp.t8.p_tilde).enumerate() {
                let classical = classical_estimate(&tpl, t)?;
                let aux = estimate_aux_moment(&tpl, t, cfg)?.estimate[0];
                checks.push(Check::within(
                    format!("sample {} classical p", i + 1),
                    classical,
                    exp.t8.classical,
                    exp.t8.tolerance_classical,
                ));
                checks.push(Check::within(
                    format!("sample {} p tilde", i + 1),
                    aux,
                    p,
                    exp.t8.tolerance,
                ));
            }
        }
        "hartley" => {
            let h = &exp.hartley;
            let table = fixture_table("table9.csv")?;
            let tpl = template("poisson(lambda=?)");
            let aux = estimate_aux_moment(&tpl, &table, cfg)?;
            checks.push(Check::within(
                "lambda2 (aux moment)",
                aux.estimate[0],
                h.lambda2,
                h.lambda2_tolerance,
            ));
            let alloc = allocate_missing(&aux.model, &table, &[0.0, 1.0])?;
            for (k, (&a, &e)) in alloc.iter().zip(&h.allocations).enumerate() {
                checks.push(Check::within(
                    format!("allocated n{k}"),
                    a,
                    e,
                    h.allocation_tolerance,
                ));
            }
            let full = estimate_min_dv(&tpl, &table, cfg)?.estimate[0];
            checks.push(Check::within(
                "lambda1 full",
                full,
                h.lambda1_full,
                h.lambda1_tolerance,
            ));
            let trimmed = table.select_rows(&(0..table.len() - 1).collect::<Vec<_>>())?;
            let t = estimate_min_dv(&tpl, &trimmed, cfg)?.estimate[0];
            checks.push(Check::within(
                "lambda1 without last row",
                t,
                h.lambda1_trimmed,
                h.lambda1_tolerance,
            ));
        }
        "mixture" => {
            let m = &exp.mixture;
            let t10 = fixture_table("table10.csv")?;
            let t10_trim = t10.select_rows(&[1, 2, 3, 4, 5])?;
            let t11 = fixture_table("table11.csv")?;
            let t11_trim = t11.select_rows(&[1, 2, 3, 4])?;
            let full = estimate_tail_mean(&t10, Some(m.m1_full_ubar), 1.0, cfg)?;
            let trim = estimate_tail_mean(&t10_trim, Some(m.m1_trimmed_ubar), 1.0, cfg)?;
            checks.push(Check::within(
                "m1 aux, full",
                full.m_aux,
                m.m1_full,
                m.tolerance_aux,
            ));
            checks.push(Check::within(
                "m1 aux, first row removed",
                trim.m_aux,
                m.m1_trimmed,
                m.tolerance_aux,
            ));
            checks.push(Check::within(
                "m1 dv, full",
                full.m_dv,
                m.m1_dv,
                m.tolerance_dv,
            ));
            checks.push(Check::info("m1 dv, first row removed", trim.m_dv));
            let full = estimate_tail_mean(&t11, None, 1.0, cfg)?;
            let trim = estimate_tail_mean(&t11_trim, None, 1.0, cfg)?;
            checks.push(Check::within(
                "m2 aux, full",
                full.m_aux,
                m.m2_full,
                m.tolerance_aux,
            ));
            checks.push(Check::within(
                "m2 aux, extreme rows removed",
                trim.m_aux,
                m.m2_trimmed,
                m.tolerance_aux,
            ));
            checks.push(Check::within(
                "m2 dv, full",
                full.m_dv,
                m.m2_dv,
                m.tolerance_dv,
            ));
            checks.push(Check::info(
                "u-bar right, full (table mean)",
                full.tail_mean,
            ));
            checks.push(Check::info(
                "u-bar right, trimmed (table mean)",
                trim.tail_mean,
            ));
        }
        "selection" => {
            let s = &exp.selection;
            let (reps, bound) = if options.fast {
                (s.fast_replications, s.fast_min_rate)
            } else {
                (s.replications, s.min_rate)
            };
            for name in &s.presets {
                let rate = selection_rate(name, reps, options.seed, cfg)?;
                checks.push(Check::at_least(
                    format!("{name} rate ({reps} reps)"),
                    rate,
                    bound,
                ));
            }
            let rate = selection_rate("paper1-b10", reps, options.seed, cfg)?;
            checks.push(Check::info(format!("paper1-b10 rate ({reps} reps)"), rate));
        }
        _ => return Err(Error::UnknownFixture(id.to_string())),
    }
    Ok(Reproduction { id: key, checks })
}

fn selection_rate(
    preset: &str,
    replications: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    let mut exp = SelectionExperiment::preset(preset, seed)?;
    exp.replications = replications;
    Ok(run_selection_experiment(&exp, cfg)?.rate)
}

/// The seven binomial samples, one table each on {0,…,4}.
pub fn table8_samples() -> Result<Vec<FrequencyTable>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(fixture_text("table8.csv")?.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let counts = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("table8: bad count `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(FrequencyTable::new(
            (0..counts.len()).map(|i| i as f64).collect(),
            counts,
        )?);
    }
    Ok(out)
}

/// The candidates `g1(x) = x/6` on {1,2,3} and `g2(x) = (x−1)/6` on {2,3,4}.
pub fn table7_candidates() -> [FinitePmf; 2] {
    let p = vec![1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0];
    [
        FinitePmf::new(vec![1.0, 2.0, 3.0], p.clone()).expect("valid pmf"),
        FinitePmf::new(vec![2.0, 3.0, 4.0], p).expect("valid pmf"),
    ]
}

/// Decision for counts `(f1, 1 − f1)` at points 2 and 3.
pub fn table7_decision(f1: f64) -> Result<Decision> {
    let t = FrequencyTable::new(vec![2.0, 3.0], vec![f1, 1.0 - f1])?;
    aux_likelihood_decide(&table7_candidates(), &t)
}

/// The first frequency f1 at which the decision switches from g2 to g1.
///
/// Scans f1 on a fine grid to confirm a single switch, then bisects.
pub fn decision_switchover() -> Result<f64> {
    let is_g1 = |f: f64| -> Result<bool> { Ok(table7_decision(f)? == Decision::Candidate(0)) };
    let n = 10_000;
    let mut switch = None;
    let mut prev = is_g1(1.0 / n as f64)?;
    for k in 2..n {
        let f = k as f64 / n as f64;
        let cur = is_g1(f)?;
        if cur != prev {
            if switch.is_some() {
                return Err(Error::Experiment("decision switches more than once".into()));
            }
            switch = Some(((k - 1) as f64 / n as f64, f));
        }
        prev = cur;
    }
    let (mut lo, mut hi) =
        switch.ok_or_else(|| Error::Experiment("decision never switches".into()))?;
    if is_g1(lo)? {
        return Err(Error::Experiment("decision switches from g1 to g2".into()));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        match table7_decision(mid)? {
            Decision::Candidate(1) => lo = mid,
            Decision::Candidate(_) => hi = mid,
            Decision::Indeterminate => return Ok(mid),
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        for (name, _) in FIXTURES
            .iter()
            .filter(|(n, _)| n.ends_with(".csv") && *n != "table8.csv")
        {
            fixture_table(name).unwrap();
        }
        assert_eq!(fixture_table("table1.csv").unwrap().truncated_size(), 500.0);
        assert_eq!(fixture_table("table5.csv").unwrap().truncated_size(), 800.0);
        assert_eq!(table8_samples().unwrap().len(), 7);
        assert!(fixture_table("nope.csv").is_err());
        expected().unwrap();
    }

    #[test]
    fn switchover_matches_closed_form() {
        let x0 = -(0.9f64).ln() / (4.0f64 / 3.0).ln();
        assert!((decision_switchover().unwrap() - x0).abs() < 1e-9);
    }

    #[test]
    fn t8_and_hartley_reproduce() {
        for id in ["T8", "hartley", "mixture", "t7"] {
            let r = reproduce(id, &ReproduceOptions::default()).unwrap();
            assert!(
                r.passed(),
                "{id}: {:#?}",
                r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
            );
        }
        assert!(reproduce("T99", &ReproduceOptions::default()).is_err());
    }
}
