//! Grouped continuous data: a normal with both parameters free, and a gamma
//! scale with the shape fixed, from tables with missing classes.

use dvfit::freq::load_csv;
use dvfit::{estimate_aux_moment, estimate_min_dv, ModelTemplate, OptimizerConfig};

fn main() -> dvfit::Result<()> {
    let config = OptimizerConfig::default();

    let normal = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/table3.csv"))?;
    let template: ModelTemplate = "normal(m=?,sigma=?)".parse()?;
    for rows in [
        (0..normal.len()).collect::<Vec<_>>(),
        vec![2, 3, 4, 5, 6, 7],
        vec![0, 1, 2, 8, 9, 10],
    ] {
        let t = normal.select_rows(&rows)?;
        let r = estimate_min_dv(&template, &t, &config)?;
        println!(
            "normal, rows {rows:?}: m = {:.4}, sigma = {:.4} (d_v {:.3}, {} evaluations)",
            r.estimate[0], r.estimate[1], r.objective_at_estimate, r.evaluations
        );
    }

    let gamma = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/table5.csv"))?;
    let template: ModelTemplate = "gamma(a=7,b=?)".parse()?;
    let tail = gamma.select_rows(&(4..gamma.len()).collect::<Vec<_>>())?;
    for (name, t) in [("all classes", &gamma), ("first four removed", &tail)] {
        let b1 = estimate_min_dv(&template, t, &config)?.estimate[0];
        let b2 = estimate_aux_moment(&template, t, &config)?.estimate[0];
        println!("gamma a=7, {name}: b min-dv {b1:.4}, b aux {b2:.4}");
    }
    Ok(())
}
