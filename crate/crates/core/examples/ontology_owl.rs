// Build the balance-sheet ontology for one statement, export it as OWL
// and read it back.

use std::error::Error;

use bilanz::ontology::{build_financial_ontology, export_owl, import_owl, query_subtree};
use bilanz::statement::{parse_statement, Format};

const TABLE1: &str = include_str!("../data/table1_feb2010.csv");

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let stmt = parse_statement(TABLE1.as_bytes(), Format::Csv)?;
    let tree = build_financial_ontology(&stmt, &stmt.supplemental)?;
    println!(
        "{} classes, {} instances",
        tree.classes().count(),
        tree.instances().count()
    );
    for inst in query_subtree(&tree, "CurrentAssets")? {
        println!("  {} = {:?}", inst.id, inst.amount());
    }

    let owl = export_owl(&tree);
    let back = import_owl(&owl)?;
    assert!(back.same_classes(&tree));
    for line in owl.lines().filter(|l| l.contains("rdf:ID")).take(5) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
