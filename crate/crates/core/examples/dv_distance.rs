//! The distance of proportional variations between a table and models.
//!
//! d_v only looks at ratios between points, so it ignores how much mass the
//! model puts outside the observed cells.

use dvfit::freq::load_csv;
use dvfit::{dv_decompose, dv_model, empirical_truncated, DistributionModel, Truncation};

fn main() -> dvfit::Result<()> {
    let table = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/table1.csv"))?;
    let f = empirical_truncated(&table)?;
    println!("empirical truncated distribution: {:?}", f.probs());

    for p in [0.25, 0.3, 0.35] {
        let model = DistributionModel::binomial(10, p)?;
        let d = dv_model(&model, &table)?;
        println!(
            "d_v(B(10,{p}), table) = {:.4} over {} pairs",
            d.value, d.pair_count
        );
    }

    let model = DistributionModel::binomial(10, 0.3)?;
    let observed = Truncation::new(vec![0.0, 1.0, 2.0, 3.0])?;
    let parts = dv_decompose(&table, &observed, &model)?;
    println!(
        "split at {{0..3}}: observed {:.4} + unobserved {:.4} + cross {:.4} = {:.4}",
        parts.observed,
        parts.unobserved,
        parts.cross,
        parts.total()
    );
    Ok(())
}
