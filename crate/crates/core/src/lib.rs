//! Bankruptcy intelligence from firm financial statements.
//!
//! The crate follows one flow: balance sheets are parsed and checked against
//! the accounting identity ([`statement`]), organised into a financial
//! domain ontology ([`ontology`]), scored with the Altman Z discriminant
//! ([`scoring`]) and mined for association rules after clustering
//! ([`mining`]). [`pipeline`] ties the stages together and writes reports.
//!
//! ```
//! use bilanz::scoring::{z_score, RatioVector, Zone};
//!
//! let z = z_score(&RatioVector::new(0.1, 0.2, 0.1, 0.5, 1.0)).unwrap();
//! assert!((z.z - 2.029).abs() < 1e-12);
//! assert_eq!(z.zone, Zone::Gray);
//! ```
//!
//! Runnable walkthroughs for each stage live under `examples/`.

pub mod mining;
pub mod ontology;
pub mod pipeline;
pub mod scoring;
pub mod statement;
pub mod synthetic;

pub use mining::{AssociationRule, Item, ItemSet, MinSupport, MiningConfig};
pub use ontology::OntologyTree;
pub use scoring::{RatioVector, ZScoreResult, Zone};
pub use statement::{Category, FinancialStatement, LineItem, SupplementalFigures};
