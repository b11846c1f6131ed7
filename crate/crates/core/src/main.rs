use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dvfit::freq::parse_sample;
use dvfit::mixture::MixtureOptions;
use dvfit::report::{
    cmd_allocate, cmd_estimate, cmd_experiment, cmd_gof, cmd_mixture_init, cmd_reproduce,
    cmd_select, cmd_simulate, digest_inputs, fixtures_digest, table_from_sample, EstimateMethod,
    EstimateOptions, Outcome, ReportDocument, DEFAULT_CREDIBLE_REL,
};
use dvfit::reproduce::{ReproduceOptions, TABLE_IDS};
use dvfit::selection::PRESETS;
use dvfit::{
    Binning, Candidate, DistributionModel, Error, FrequencyTable, ModelTemplate, OptimizerConfig,
    ReplicateScheme, Result, SelectionExperiment, Truncation, TruncationRule,
};

/// Estimation from truncated, grouped or censored frequency data.
#[derive(Parser)]
#[command(name = "dvfit", version)]
struct Cli {
    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Grid points per dimension for the optimizers.
    #[arg(long, global = true, default_value_t = 200)]
    grid_points: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// `point,count` CSV table.
    #[arg(long, conflicts_with = "sample")]
    table: Option<PathBuf>,
    /// Raw sample, one value per line or whitespace separated.
    #[arg(long)]
    sample: Option<PathBuf>,
    /// Keep only these points, e.g. `2,3,4,5`.
    #[arg(long, value_delimiter = ',')]
    keep: Option<Vec<f64>>,
    /// Keep raw observations above this value (before binning).
    #[arg(long, requires = "sample", conflicts_with = "cutoff_left")]
    cutoff_right: Option<f64>,
    /// Keep raw observations below this value (before binning).
    #[arg(long, requires = "sample")]
    cutoff_left: Option<f64>,
    /// Group a raw sample into this many equal-width classes.
    #[arg(long, requires = "sample")]
    bins: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate free parameters of a model template.
    Estimate {
        #[command(flatten)]
        input: Input,
        /// Template such as `binomial(n=10,p=?)` or `gamma(a=7,b=?)`.
        #[arg(long)]
        model: ModelTemplate,
        /// mindv, aux-moment, aux-ml or both.
        #[arg(long, default_value = "both")]
        method: EstimateMethod,
        /// Relative agreement gap still counted as credible.
        #[arg(long, default_value_t = DEFAULT_CREDIBLE_REL)]
        credible_rel: f64,
    },
    /// Predict counts at unobserved points by proportional allocation.
    Allocate {
        #[command(flatten)]
        input: Input,
        /// A fixed model, or a template fitted by the auxiliary route.
        #[arg(long)]
        model: Candidate,
        #[arg(long, value_delimiter = ',', required = true)]
        missing: Vec<f64>,
    },
    /// Regenerate reference tables and compare with stored expectations.
    Reproduce {
        /// Table ids, or `all`.
        #[arg(default_value = "all")]
        ids: Vec<String>,
        /// Selection experiments at 1000 replications.
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Draw a seeded sample and print its frequency table.
    Simulate {
        #[arg(long)]
        model: DistributionModel,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        keep: Option<Vec<f64>>,
        #[arg(long, conflicts_with_all = ["keep", "cutoff_left"])]
        cutoff_right: Option<f64>,
        #[arg(long, conflicts_with = "keep")]
        cutoff_left: Option<f64>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Rank candidate models on a table, or run a selection experiment.
    Select {
        #[command(flatten)]
        input: Option<Input>,
        /// Candidates separated by `;`, e.g. `poisson(lambda=?);binomial(n=8,p=?)`.
        #[arg(long, value_delimiter = ';', conflicts_with = "experiment")]
        candidates: Option<Vec<Candidate>>,
        /// A preset name or a TOML experiment file.
        #[arg(long)]
        experiment: Option<String>,
        /// 1000 replications instead of the experiment's count.
        #[arg(long, requires = "experiment")]
        fast: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Monte-Carlo goodness-of-fit test of a fully specified model.
    Gof {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        model: DistributionModel,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Initial means and weight for a two-component normal mixture.
    MixtureInit {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        sigma1: f64,
        #[arg(long)]
        sigma2: f64,
        /// Classes per tail.
        #[arg(long, default_value_t = 7)]
        bins: usize,
        /// Drop end classes of each tail with fewer observations.
        #[arg(long)]
        trim_min_count: Option<f64>,
        /// Accepted for uniformity; the procedure is deterministic.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn sample_text(bytes: &[u8], path: &Path) -> Result<String> {
    String::from_utf8(bytes.to_vec())
        .map_err(|_| Error::Parse(format!("{}: not UTF-8", path.display())))
}

impl Input {
    /// The table with any `--keep` applied, the untruncated table, and the raw bytes.
    fn load(&self) -> Result<(FrequencyTable, Option<Truncation>, Vec<u8>)> {
        let (table, bytes) = match (&self.table, &self.sample) {
            (Some(p), _) => {
                let bytes = read(p)?;
                (FrequencyTable::read_csv(bytes.as_slice())?, bytes)
            }
            (None, Some(p)) => {
                let bytes = read(p)?;
                let sample = parse_sample(&sample_text(&bytes, p)?)?;
                let rule = match (self.cutoff_right, self.cutoff_left) {
                    (Some(c), _) => Some(TruncationRule::RightCutoff(c)),
                    (None, Some(c)) => Some(TruncationRule::LeftCutoff(c)),
                    (None, None) => None,
                };
                (table_from_sample(&sample, rule.as_ref(), self.bins)?, bytes)
            }
            (None, None) => return Err(Error::Parse("need --table or --sample".into())),
        };
        let keep = self.keep.clone().map(Truncation::new).transpose()?;
        Ok((table, keep, bytes))
    }

    fn load_truncated(&self) -> Result<(FrequencyTable, Vec<u8>)> {
        let (table, keep, bytes) = self.load()?;
        let table = match keep {
            Some(k) => dvfit::truncate(&table, &k)?,
            None => table,
        };
        Ok((table, bytes))
    }
}

fn experiment(spec: &str, seed: u64, fast: bool) -> Result<(SelectionExperiment, Vec<u8>)> {
    let (mut exp, bytes) = if PRESETS.contains(&spec) {
        (
            SelectionExperiment::preset(spec, seed)?,
            spec.as_bytes().to_vec(),
        )
    } else {
        let path = Path::new(spec);
        if !path.exists() {
            return Err(Error::Parse(format!(
                "`{spec}` is neither a preset ({}) nor a file",
                PRESETS.join(", ")
            )));
        }
        let bytes = read(path)?;
        (
            SelectionExperiment::from_toml(&sample_text(&bytes, path)?)?,
            bytes,
        )
    };
    if fast {
        exp.replications = exp.replications.min(1000);
    }
    Ok((exp, bytes))
}

fn run(cli: &Cli) -> Result<ReportDocument> {
    let config = OptimizerConfig {
        grid_points: cli.grid_points,
        ..Default::default()
    };
    config.validate()?;
    let (outcome, digest): (Outcome, String) = match &cli.command {
        Command::Estimate {
            input,
            model,
            method,
            credible_rel,
        } => {
            let (table, keep, bytes) = input.load()?;
            let options = EstimateOptions {
                keep,
                credible_rel: *credible_rel,
                config,
            };
            (
                cmd_estimate(&table, model, *method, &options)?,
                digest_inputs(&[bytes]),
            )
        }
        Command::Allocate {
            input,
            model,
            missing,
        } => {
            let (table, bytes) = input.load_truncated()?;
            (
                cmd_allocate(&table, model, missing, &config)?,
                digest_inputs(&[bytes]),
            )
        }
        Command::Reproduce { ids, fast, seed } => {
            let ids: Vec<String> = if ids.iter().any(|i| i.eq_ignore_ascii_case("all")) {
                TABLE_IDS.iter().map(|s| s.to_string()).collect()
            } else {
                ids.clone()
            };
            let options = ReproduceOptions {
                fast: *fast,
                seed: *seed,
                config,
            };
            (cmd_reproduce(&ids, &options)?, fixtures_digest())
        }
        Command::Simulate {
            model,
            size,
            seed,
            keep,
            cutoff_right,
            cutoff_left,
            bins,
        } => {
            let rule = match (keep, cutoff_right, cutoff_left) {
                (Some(k), _, _) => Some(TruncationRule::KeepPoints(k.clone())),
                (None, Some(c), _) => Some(TruncationRule::RightCutoff(*c)),
                (None, None, Some(c)) => Some(TruncationRule::LeftCutoff(*c)),
                _ => None,
            };
            let outcome = cmd_simulate(model, *size, *seed, rule.as_ref(), *bins)?;
            (
                outcome,
                digest_inputs(&[model.to_string(), seed.to_string()]),
            )
        }
        Command::Select {
            input,
            candidates,
            experiment: spec,
            fast,
            seed,
        } => match (spec, candidates) {
            (Some(spec), _) => {
                let (exp, bytes) = experiment(spec, *seed, *fast)?;
                (cmd_experiment(&exp, &config)?, digest_inputs(&[bytes]))
            }
            (None, Some(c)) => {
                let input = input
                    .as_ref()
                    .ok_or_else(|| Error::Parse("need --table or --sample".into()))?;
                let (table, bytes) = input.load_truncated()?;
                (cmd_select(&table, c, &config)?, digest_inputs(&[bytes]))
            }
            (None, None) => return Err(Error::Parse("need --candidates or --experiment".into())),
        },
        Command::Gof {
            input,
            model,
            replicates,
            alpha,
            seed,
        } => {
            let (table, bytes) = input.load_truncated()?;
            let scheme = match (&input.sample, input.bins) {
                (Some(_), Some(_)) => ReplicateScheme::Bins(table_edges(&table)?),
                _ => ReplicateScheme::Points,
            };
            (
                cmd_gof(&table, model, &scheme, *replicates, *alpha, *seed)?,
                digest_inputs(&[bytes]),
            )
        }
        Command::MixtureInit {
            sample,
            sigma1,
            sigma2,
            bins,
            trim_min_count,
            seed: _,
        } => {
            let bytes = read(sample)?;
            let values = parse_sample(&sample_text(&bytes, sample)?)?;
            let options = MixtureOptions {
                num_bins: *bins,
                trim_min_count: *trim_min_count,
            };
            (
                cmd_mixture_init(&values, *sigma1, *sigma2, &options, &config)?,
                digest_inputs(&[bytes]),
            )
        }
    };
    Ok(ReportDocument::new(
        std::env::args().collect(),
        digest,
        outcome,
    ))
}

/// The equal-width binning whose midpoints are the table's points.
fn table_edges(table: &FrequencyTable) -> Result<Binning> {
    let pts = table.points();
    if pts.len() < 2 {
        return Err(Error::InvalidTable(
            "binned test needs at least two classes".into(),
        ));
    }
    let width = pts[1] - pts[0];
    Binning::new(
        pts[0] - width / 2.0,
        pts[pts.len() - 1] + width / 2.0,
        pts.len(),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(doc) => {
            print!("{doc}");
            if let Some(path) = &cli.json {
                if let Err(e) = doc.write_json(path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            }
            if doc.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
