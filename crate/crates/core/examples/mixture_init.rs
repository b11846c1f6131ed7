//! Starting values for a two-component normal mixture with known standard
//! deviations, from the two tails of the merged sample.

use dvfit::freq::load_sample;
use dvfit::mixture::MixtureOptions;
use dvfit::{estimate_mixture_init, OptimizerConfig};

fn main() -> dvfit::Result<()> {
    let sample = load_sample(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/mixture_sample.txt"
    ))?;
    let init = estimate_mixture_init(
        &sample,
        1.0,
        0.8,
        &MixtureOptions::default(),
        &OptimizerConfig::default(),
    )?;
    let s = &init.split;
    println!(
        "merged mean {:.4}, S_l {:.4}, S_r {:.4}, m1 side {:?}",
        s.m_g, s.s_l, s.s_r, s.side_of_m1
    );
    println!(
        "left tail x <= {:.4}, right tail x >= {:.4}",
        s.sup_l, s.min_r
    );
    println!(
        "m1: aux {:.4}, min-dv {:.4}",
        init.m1_est.m_aux, init.m1_est.m_dv
    );
    println!(
        "m2: aux {:.4}, min-dv {:.4}",
        init.m2_est.m_aux, init.m2_est.m_dv
    );
    println!("alpha {:.4}", init.alpha_est);
    for w in &init.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
