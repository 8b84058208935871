// Parse a balance-sheet column with total rows and check the accounting
// identity.

use std::error::Error;

use bilanz::statement::{parse_statement, validate, working_capital, Format, DEFAULT_TOLERANCE};

const TABLE1: &str = include_str!("../data/table1_feb2010.csv");

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let stmt = parse_statement(TABLE1.as_bytes(), Format::Csv)?;
    let totals = stmt.totals();
    println!("{} ({} line items)", stmt.key(), stmt.items.len());
    println!("  total assets       {}", totals.total_assets);
    println!("  total liabilities  {}", totals.total_liabilities);
    println!("  equity             {}", totals.equity);
    println!("  working capital    {}", working_capital(&stmt));

    let report = validate(&stmt, DEFAULT_TOLERANCE);
    for check in &report.checks {
        println!(
            "  {:<28} expected {:>8} actual {:>8} rel {:.2e} {}",
            check.check_name,
            check.expected,
            check.actual,
            check.relative_error,
            if check.passed { "ok" } else { "FAIL" }
        );
    }
    if !report.passed() {
        return Err("validation failed".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
