//! Two discrete candidates that only share the points 2 and 3: the decision
//! by auxiliary likelihood depends on the observed frequency of 2.

use dvfit::reproduce::{decision_switchover, table7_decision};

fn main() -> dvfit::Result<()> {
    for f1 in [0.2, 0.36, 0.37, 0.5, 0.8] {
        println!("f1 = {f1:.2}: {:?}", table7_decision(f1)?);
    }
    let x0 = decision_switchover()?;
    println!("switch at f1 = {x0:.5} (n1/n2 = {:.5})", x0 / (1.0 - x0));
    Ok(())
}
