//! When two counts stand in exactly the model's density ratio, both
//! estimators return the generating parameter from those two points alone.

use dvfit::freq::load_csv;
use dvfit::{
    estimate_aux_ml, estimate_aux_moment, estimate_min_dv, ModelTemplate, OptimizerConfig,
};

fn main() -> dvfit::Result<()> {
    let config = OptimizerConfig::default();
    let data = |name: &str| load_csv(format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR")));

    let binomial: ModelTemplate = "binomial(n=10,p=?)".parse()?;
    let t = data("binomial_two_points.csv")?;
    println!(
        "binomial: min-dv {:.6}, aux {:.6}",
        estimate_min_dv(&binomial, &t, &config)?.estimate[0],
        estimate_aux_moment(&binomial, &t, &config)?.estimate[0]
    );

    let gamma: ModelTemplate = "gamma(a=10,b=?)".parse()?;
    let t = data("gamma_two_points.csv")?;
    println!(
        "gamma a=10: min-dv {:.4}, aux {:.4}",
        estimate_min_dv(&gamma, &t, &config)?.estimate[0],
        estimate_aux_moment(&gamma, &t, &config)?.estimate[0]
    );

    let joint: ModelTemplate = "gamma(a=?,b=?)".parse()?;
    let t = data("gamma_three_points.csv")?;
    let dv = estimate_min_dv(&joint, &t, &config)?;
    let ml = estimate_aux_ml(&joint, &t, &config)?;
    println!(
        "gamma joint: min-dv (a,b) = ({:.4}, {:.4})",
        dv.estimate[0], dv.estimate[1]
    );
    println!(
        "gamma joint: aux-ml (a,b) = ({:.4}, {:.4})",
        ml.estimate[0], ml.estimate[1]
    );
    Ok(())
}
