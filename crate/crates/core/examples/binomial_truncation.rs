//! Binomial p from a table with cells deleted, by both estimators.
//!
//! Each truncation keeps a different subset of Table 1's points; the
//! complete-data estimate x̄/n is shown for comparison.

use dvfit::freq::load_csv;
use dvfit::{
    classical_estimate, estimate_aux_moment, estimate_min_dv, truncate, ModelTemplate,
    OptimizerConfig, Truncation,
};

fn main() -> dvfit::Result<()> {
    let table = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/table1.csv"))?;
    let template: ModelTemplate = "binomial(n=10,p=?)".parse()?;
    let config = OptimizerConfig::default();
    println!(
        "classical p = {:.4}",
        classical_estimate(&template, &table)?
    );

    let cases: [&[f64]; 4] = [
        &[0.0, 1.0, 2.0],
        &[2.0, 3.0, 4.0, 5.0],
        &[5.0, 6.0, 7.0],
        &[0.0, 7.0],
    ];
    println!("{:<16} {:>6} {:>10} {:>10}", "kept", "n_t", "min-dv", "aux");
    for kept in cases {
        let t = truncate(&table, &Truncation::new(kept.to_vec())?)?;
        let p1 = estimate_min_dv(&template, &t, &config)?.estimate[0];
        let p2 = estimate_aux_moment(&template, &t, &config)?.estimate[0];
        println!(
            "{:<16} {:>6} {:>10.4} {:>10.4}",
            format!("{kept:?}"),
            t.truncated_size(),
            p1,
            p2
        );
    }
    Ok(())
}
