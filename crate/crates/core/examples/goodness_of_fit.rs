//! Monte-Carlo goodness of fit on a truncated table: the observed d_v is
//! ranked among d_v values of tables simulated from the model.

use dvfit::freq::load_csv;
use dvfit::{gof_test, truncate, DistributionModel, ReplicateScheme, Truncation};

fn main() -> dvfit::Result<()> {
    let table = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/table1.csv"))?;
    let table = truncate(&table, &Truncation::new(vec![1.0, 2.0, 3.0, 4.0, 5.0])?)?;
    for p in [0.3, 0.33, 0.4] {
        let model = DistributionModel::binomial(10, p)?;
        let r = gof_test(&model, &table, &ReplicateScheme::Points, 1000, 0.05, 11)?;
        println!(
            "B(10,{p}): d_v {:>8.4}, F(d_v) {:.3}, {}",
            r.observed_dv,
            r.empirical_cdf_at_observed,
            if r.reject { "reject" } else { "keep" }
        );
    }
    Ok(())
}
