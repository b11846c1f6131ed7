//! Hartley's truncated Poisson data: the zero and one cells were not
//! recorded. Estimate λ and predict the missing counts.

use dvfit::freq::load_csv;
use dvfit::{
    allocate_missing, estimate_aux_moment, estimate_min_dv, ModelTemplate, OptimizerConfig,
};

fn main() -> dvfit::Result<()> {
    let table = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/table9.csv"))?;
    let template: ModelTemplate = "poisson(lambda=?)".parse()?;
    let config = OptimizerConfig::default();

    let aux = estimate_aux_moment(&template, &table, &config)?;
    let dv = estimate_min_dv(&template, &table, &config)?;
    println!(
        "lambda aux = {:.4}, lambda min-dv = {:.4}",
        aux.estimate[0], dv.estimate[0]
    );

    let missing = allocate_missing(&aux.model, &table, &[0.0, 1.0])?;
    println!("predicted n0 = {:.2}, n1 = {:.2}", missing[0], missing[1]);
    println!(
        "completed sample size = {:.1}",
        table.truncated_size() + missing.iter().sum::<f64>()
    );

    // The single count at 9 carries much of the min-d_v disagreement.
    let trimmed = table.select_rows(&(0..table.len() - 1).collect::<Vec<_>>())?;
    let dv = estimate_min_dv(&template, &trimmed, &config)?;
    println!(
        "without the last row, lambda min-dv = {:.4}",
        dv.estimate[0]
    );
    Ok(())
}
