// Frequent itemsets and association rules over plain string baskets.

use std::error::Error;

use bilanz::mining::{apriori, generate_rules};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let baskets: Vec<Vec<&str>> = vec![
        vec!["bread", "milk"],
        vec!["bread", "butter", "milk"],
        vec!["bread", "butter"],
        vec!["butter", "milk"],
        vec!["bread", "butter", "milk"],
    ];
    let frequent = apriori(&baskets, 3);
    for set in &frequent {
        println!("{:?} support {}", set.items, set.support_count);
    }
    for rule in generate_rules(&frequent, 0.7, baskets.len() as u64)? {
        println!(
            "{:?} -> {:?}  sup {:.2} conf {:.2}",
            rule.antecedent.items, rule.consequent.items, rule.support, rule.confidence
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
