// Altman Z for a few ratio vectors, with zone and the 95% flag.

use std::error::Error;

use bilanz::scoring::{compute_ratios, z_score, RatioVector};
use bilanz::statement::{parse_statement, Format};

const GRAY: &str = include_str!("../data/gray_firm.json");

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let stmt = parse_statement(GRAY.as_bytes(), Format::Json)?;
    let ratios = compute_ratios(&stmt, &stmt.supplemental)?;
    let result = z_score(&ratios)?;
    println!(
        "{}: {:?} -> z = {:.3} {}",
        stmt.key(),
        ratios.to_array(),
        result.z,
        result.zone
    );

    let cases = [
        ("weak", RatioVector::new(-0.1, -0.2, -0.05, 0.2, 0.6)),
        ("healthy", RatioVector::new(0.3, 0.4, 0.15, 2.0, 1.5)),
    ];
    for (name, r) in cases {
        let z = z_score(&r)?;
        println!(
            "{name:<8} z = {:>6.3} zone = {:<8} below 2.675: {}",
            z.z, z.zone, z.bankrupt_95_flag
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
