//! Choosing between competing families by d_v, on one table and in a
//! seeded Monte-Carlo experiment.

use dvfit::freq::load_csv;
use dvfit::{
    run_selection_experiment, select_model, Candidate, OptimizerConfig, SelectionExperiment,
};

fn main() -> dvfit::Result<()> {
    let config = OptimizerConfig::default();
    let table = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/table9.csv"))?;
    let candidates: Vec<Candidate> = [
        "poisson(lambda=?)",
        "binomial(n=10,p=?)",
        "binomial(n=20,p=?)",
    ]
    .iter()
    .map(|s| s.parse())
    .collect::<dvfit::Result<_>>()?;
    let result = select_model(&candidates, &table, &config)?;
    for c in &result.ranked {
        println!("{:<24} d_v {:>10.4}", c.candidate.to_string(), c.dv);
    }

    let mut exp = SelectionExperiment::preset("paper1", 7)?;
    exp.replications = 1000;
    let r = run_selection_experiment(&exp, &config)?;
    println!(
        "{} vs {}: correct {} of {} (rate {:.3})",
        exp.candidates[0], exp.candidates[1], r.correct, r.scored, r.rate
    );
    Ok(())
}
