// Cluster synthetic firm-periods on their standardized ratios and place a
// new firm in the nearest cluster.

use std::error::Error;

use bilanz::mining::cluster;
use bilanz::scoring::{compute_ratios, RatioVector};
use bilanz::synthetic;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut firms = Vec::new();
    for stmt in synthetic::corpus(9, 1, 42) {
        firms.push((stmt.key(), compute_ratios(&stmt, &stmt.supplemental)?));
    }
    let model = cluster(&firms, 3, 42)?;
    println!("converged after {} iterations", model.iterations);
    for (key, c) in &model.assignments {
        println!("  {key} -> cluster {c}");
    }
    let newcomer = RatioVector::new(0.28, 0.35, 0.14, 1.9, 1.4);
    println!("newcomer -> cluster {}", model.assign(&newcomer));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
