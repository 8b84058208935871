// The whole pipeline on a synthetic corpus written to a temp directory.

use std::error::Error;

use bilanz::pipeline::{emit, run, PipelineConfig};
use bilanz::statement::{write_statement, Format};
use bilanz::synthetic;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join(format!("bilanz-example-{}", std::process::id()));
    let input = dir.join("statements");
    std::fs::create_dir_all(&input)?;
    for stmt in synthetic::corpus(6, 2, 7) {
        let name = format!("{}_{}.csv", stmt.firm_id, stmt.period.unwrap());
        std::fs::write(input.join(name), write_statement(&stmt, Format::Csv))?;
    }

    let config = PipelineConfig {
        inputs: vec![input],
        out_dir: dir.join("out"),
        ..PipelineConfig::default()
    };
    let output = run(&config)?;
    for path in emit(&output, &config)? {
        println!("wrote {}", path.display());
    }
    let report = &output.report;
    for firm in &report.firms {
        println!(
            "{:<16} z {:>6.3} {:<8} cluster {:?}",
            firm.key,
            firm.z.unwrap_or(f64::NAN),
            firm.zone.map(|z| z.label()).unwrap_or("-"),
            firm.cluster
        );
    }
    println!(
        "{} rules, zones {:?}",
        report.rules.len(),
        report.zone_counts
    );
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
