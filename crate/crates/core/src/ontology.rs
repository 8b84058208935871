//! Financial domain ontology: classes, slots, facets and instances, with an
//! OWL/RDF-XML subset for interchange.
//!
//! The tree is single-rooted and every class has at most one parent. Only
//! four OWL constructs are read and written: `owl:Class rdf:ID`,
//! `rdfs:subClassOf`, `rdfs:comment` (with `xml:lang`) and
//! `owl:disjointWith`. Slots and instances live in memory only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statement::{
    validate, working_capital, Category, FinancialStatement, SupplementalFigures, ValidationReport,
    DEFAULT_TOLERANCE,
};

pub const ROOT: &str = "BalanceSheet";
pub const RATIO_PARENT: &str = "FinancialRatio";

const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";
const PROTEGE_NS: &str = "http://protege.stanford.edu/plugins/owl/protege#";
const PROTEGE_IMPORT: &str = "http://protege.stanford.edu/plugins/owl/protege";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OntologyError {
    #[error("duplicate class {0:?}")]
    DuplicateClass(String),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("class {class:?} refers to undeclared class {target:?}")]
    Dangling { class: String, target: String },
    #[error("class hierarchy has a cycle through {0:?}")]
    Cycle(String),
    #[error("ontology has no root class")]
    NoRoot,
    #[error("ontology has several root classes: {0:?}")]
    MultipleRoots(Vec<String>),
    #[error("class {0:?} cannot be disjoint with itself")]
    SelfDisjoint(String),
    #[error("line item {name:?} maps to class {id:?} which already exists under {existing:?}")]
    IdCollision {
        name: String,
        id: String,
        existing: String,
    },
    #[error("line item {0:?} has no alphanumeric characters")]
    UnnamableItem(String),
    #[error("category {0} has no class in the ontology")]
    UnparentedCategory(Category),
    #[error("duplicate slot {name:?} on {domain:?}")]
    DuplicateSlot { domain: String, name: String },
    #[error("instance {instance:?}: slot {slot:?} does not apply to its class")]
    UnknownSlot { instance: String, slot: String },
    #[error("instance {instance:?}: slot {slot:?} violates {facet:?}")]
    FacetViolation {
        instance: String,
        slot: String,
        facet: Facet,
    },
    #[error("instance {instance:?}: slot {slot:?} expects {expected:?}")]
    RangeMismatch {
        instance: String,
        slot: String,
        expected: SlotRange,
    },
    #[error("duplicate instance {0:?}")]
    DuplicateInstance(String),
    #[error("xml error at {line}:{column}: {message}")]
    Xml {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, OntologyError>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub lang: Option<String>,
    pub text: String,
}

impl Comment {
    pub fn en(text: impl Into<String>) -> Self {
        Comment {
            lang: Some("en".into()),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntClass {
    pub id: String,
    pub comment: Option<Comment>,
    pub parent: Option<String>,
    pub disjoint_with: BTreeSet<String>,
}

impl OntClass {
    pub fn new(id: impl Into<String>, parent: Option<&str>) -> Self {
        OntClass {
            id: id.into(),
            comment: None,
            parent: parent.map(str::to_string),
            disjoint_with: BTreeSet::new(),
        }
    }

    pub fn with_comment(mut self, comment: Comment) -> Self {
        self.comment = Some(comment);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotRange {
    Numeric,
    Text,
    ClassRef,
}

/// Constraint on a slot's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Facet {
    /// At least one value.
    Required,
    /// Every numeric value is `>= 0`.
    NonNegative,
    /// At most `n` values.
    MaxCardinality(usize),
}

impl Facet {
    pub fn admits(&self, values: &[SlotValue]) -> bool {
        match self {
            Facet::Required => !values.is_empty(),
            Facet::NonNegative => values.iter().all(|v| match v {
                SlotValue::Numeric(d) => !d.is_sign_negative() || d.is_zero(),
                _ => true,
            }),
            Facet::MaxCardinality(n) => values.len() <= *n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub name: String,
    /// Class the slot is declared on; it applies to all descendants.
    pub domain: String,
    pub range: SlotRange,
    pub facets: Vec<Facet>,
    /// Accounting item the slot stands for, e.g. `TotalAssets` for the
    /// denominator of a ratio class.
    pub stands_for: Option<String>,
}

impl Slot {
    pub fn new(name: &str, domain: &str, range: SlotRange, facets: &[Facet]) -> Self {
        Slot {
            name: name.to_string(),
            domain: domain.to_string(),
            range,
            facets: facets.to_vec(),
            stands_for: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotValue {
    Numeric(Decimal),
    Text(String),
    ClassRef(String),
}

impl SlotValue {
    fn range(&self) -> SlotRange {
        match self {
            SlotValue::Numeric(_) => SlotRange::Numeric,
            SlotValue::Text(_) => SlotRange::Text,
            SlotValue::ClassRef(_) => SlotRange::ClassRef,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub of_class: String,
    pub slot_values: BTreeMap<String, Vec<SlotValue>>,
}

impl Instance {
    pub fn new(id: impl Into<String>, of_class: impl Into<String>) -> Self {
        Instance {
            id: id.into(),
            of_class: of_class.into(),
            slot_values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, slot: &str, value: SlotValue) -> Self {
        self.slot_values
            .entry(slot.to_string())
            .or_default()
            .push(value);
        self
    }

    pub fn amount(&self) -> Option<Decimal> {
        match self.slot_values.get("amount")?.first()? {
            SlotValue::Numeric(d) => Some(*d),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyTree {
    classes: BTreeMap<String, OntClass>,
    slots: Vec<Slot>,
    instances: BTreeMap<String, Instance>,
    root: String,
}

impl OntologyTree {
    pub fn new(root: OntClass) -> Result<Self> {
        if root.parent.is_some() {
            return Err(OntologyError::MultipleRoots(vec![root.id]));
        }
        if !root.disjoint_with.is_empty() {
            let target = root.disjoint_with.iter().next().unwrap().clone();
            return Err(OntologyError::Dangling {
                class: root.id,
                target,
            });
        }
        let id = root.id.clone();
        Ok(OntologyTree {
            classes: BTreeMap::from([(id.clone(), root)]),
            slots: Vec::new(),
            instances: BTreeMap::new(),
            root: id,
        })
    }

    /// Assembles a tree from classes in any order, checking every
    /// structural invariant. Disjointness is made symmetric.
    pub fn from_classes(classes: impl IntoIterator<Item = OntClass>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for class in classes {
            if map.contains_key(&class.id) {
                return Err(OntologyError::DuplicateClass(class.id));
            }
            map.insert(class.id.clone(), class);
        }
        for class in map.values() {
            for target in class.parent.iter().chain(&class.disjoint_with) {
                if !map.contains_key(target) {
                    return Err(OntologyError::Dangling {
                        class: class.id.clone(),
                        target: target.clone(),
                    });
                }
            }
            if class.disjoint_with.contains(&class.id) {
                return Err(OntologyError::SelfDisjoint(class.id.clone()));
            }
        }
        let roots: Vec<String> = map
            .values()
            .filter(|c| c.parent.is_none())
            .map(|c| c.id.clone())
            .collect();
        let root = match roots.len() {
            0 if map.is_empty() => return Err(OntologyError::NoRoot),
            0 => {
                let any = map.keys().next().unwrap().clone();
                return Err(OntologyError::Cycle(any));
            }
            1 => roots[0].clone(),
            _ => return Err(OntologyError::MultipleRoots(roots)),
        };
        for id in map.keys() {
            let mut cur = id;
            let mut steps = 0;
            while let Some(p) = &map[cur].parent {
                cur = p;
                steps += 1;
                if steps > map.len() {
                    return Err(OntologyError::Cycle(id.clone()));
                }
            }
        }
        let pairs: Vec<(String, String)> = map
            .values()
            .flat_map(|c| c.disjoint_with.iter().map(|d| (d.clone(), c.id.clone())))
            .collect();
        for (a, b) in pairs {
            map.get_mut(&a).unwrap().disjoint_with.insert(b);
        }
        Ok(OntologyTree {
            classes: map,
            slots: Vec::new(),
            instances: BTreeMap::new(),
            root,
        })
    }

    /// Adds a class below an existing parent. Disjointness targets must
    /// already exist and are updated symmetrically.
    pub fn add_class(&mut self, class: OntClass) -> Result<()> {
        if self.classes.contains_key(&class.id) {
            return Err(OntologyError::DuplicateClass(class.id));
        }
        let parent = class.parent.clone().ok_or_else(|| {
            OntologyError::MultipleRoots(vec![self.root.clone(), class.id.clone()])
        })?;
        for target in std::iter::once(&parent).chain(&class.disjoint_with) {
            if !self.classes.contains_key(target) {
                return Err(OntologyError::Dangling {
                    class: class.id.clone(),
                    target: target.clone(),
                });
            }
        }
        for d in &class.disjoint_with {
            self.classes
                .get_mut(d)
                .unwrap()
                .disjoint_with
                .insert(class.id.clone());
        }
        self.classes.insert(class.id.clone(), class);
        Ok(())
    }

    pub fn add_slot(&mut self, slot: Slot) -> Result<()> {
        if !self.classes.contains_key(&slot.domain) {
            return Err(OntologyError::UnknownClass(slot.domain));
        }
        if self
            .slots
            .iter()
            .any(|s| s.domain == slot.domain && s.name == slot.name)
        {
            return Err(OntologyError::DuplicateSlot {
                domain: slot.domain,
                name: slot.name,
            });
        }
        self.slots.push(slot);
        Ok(())
    }

    /// Adds an instance after checking every value against the range and
    /// facets of the slots that apply to its class.
    pub fn add_instance(&mut self, instance: Instance) -> Result<()> {
        if self.instances.contains_key(&instance.id) {
            return Err(OntologyError::DuplicateInstance(instance.id));
        }
        let applicable = self.slots_for(&instance.of_class)?;
        for name in instance.slot_values.keys() {
            if !applicable.iter().any(|s| &s.name == name) {
                return Err(OntologyError::UnknownSlot {
                    instance: instance.id.clone(),
                    slot: name.clone(),
                });
            }
        }
        for slot in &applicable {
            let values = instance
                .slot_values
                .get(&slot.name)
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            for v in values {
                if v.range() != slot.range {
                    return Err(OntologyError::RangeMismatch {
                        instance: instance.id.clone(),
                        slot: slot.name.clone(),
                        expected: slot.range,
                    });
                }
                if let SlotValue::ClassRef(target) = v {
                    if !self.classes.contains_key(target) {
                        return Err(OntologyError::UnknownClass(target.clone()));
                    }
                }
            }
            if let Some(facet) = slot.facets.iter().find(|f| !f.admits(values)) {
                return Err(OntologyError::FacetViolation {
                    instance: instance.id.clone(),
                    slot: slot.name.clone(),
                    facet: *facet,
                });
            }
        }
        self.instances.insert(instance.id.clone(), instance);
        Ok(())
    }

    pub fn root(&self) -> &OntClass {
        &self.classes[&self.root]
    }

    pub fn class(&self, id: &str) -> Option<&OntClass> {
        self.classes.get(id)
    }

    /// Classes in lexicographic id order.
    pub fn classes(&self) -> impl Iterator<Item = &OntClass> {
        self.classes.values()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instances.values()
    }

    pub fn instance(&self, id: &str) -> Option<&Instance> {
        self.instances.get(id)
    }

    /// `id` followed by its parent, grandparent, ... up to the root.
    pub fn ancestors<'a>(&'a self, id: &'a str) -> Result<Vec<&'a str>> {
        let mut out = Vec::new();
        let mut cur = self
            .classes
            .get(id)
            .ok_or_else(|| OntologyError::UnknownClass(id.to_string()))?;
        out.push(cur.id.as_str());
        while let Some(p) = &cur.parent {
            cur = &self.classes[p];
            out.push(cur.id.as_str());
        }
        Ok(out)
    }

    /// Slots declared on `class_id` or any of its ancestors.
    pub fn slots_for(&self, class_id: &str) -> Result<Vec<&Slot>> {
        let chain = self.ancestors(class_id)?;
        Ok(self
            .slots
            .iter()
            .filter(|s| chain.contains(&s.domain.as_str()))
            .collect())
    }

    /// True structural equality of the class hierarchy (ids, parents,
    /// comments, disjointness, root); slots and instances are ignored.
    pub fn same_classes(&self, other: &OntologyTree) -> bool {
        self.root == other.root && self.classes == other.classes
    }
}

/// Instances whose class is `class_id` or one of its descendants, ordered
/// by instance id.
pub fn query_subtree<'a>(tree: &'a OntologyTree, class_id: &str) -> Result<Vec<&'a Instance>> {
    if tree.class(class_id).is_none() {
        return Err(OntologyError::UnknownClass(class_id.to_string()));
    }
    let mut out = Vec::new();
    for inst in tree.instances() {
        if tree.ancestors(&inst.of_class)?.contains(&class_id) {
            out.push(inst);
        }
    }
    Ok(out)
}

/// CamelCased class id for a line-item label: non-alphanumerics split words
/// and are dropped. Ids that would start with a digit get an `Item` prefix
/// so they stay valid XML names.
pub fn class_id_for(label: &str) -> Option<String> {
    let mut id = String::new();
    for word in label.split(|c: char| !c.is_alphanumeric()) {
        let mut chars = word.chars();
        if let Some(first) = chars.next() {
            id.extend(first.to_uppercase());
            id.push_str(chars.as_str());
        }
    }
    if id.is_empty() {
        return None;
    }
    if id.starts_with(|c: char| c.is_numeric()) {
        id.insert_str(0, "Item");
    }
    Some(id)
}

fn category_class(category: Category) -> Option<&'static str> {
    match category {
        Category::CurrentAsset => Some("CurrentAssets"),
        Category::LongTermAsset => Some("FixedAssets"),
        Category::CurrentLiability => Some("CurrentLiabilities"),
        Category::LongTermLiability => Some("LongTermLiabilities"),
        Category::Equity => Some("OwnersEquity"),
        // income-statement figures are carried through SupplementalFigures
        Category::Supplemental => None,
    }
}

/// One Altman ratio as an ontology class with its two accounting operands.
#[derive(Debug, Clone, Copy)]
pub struct RatioClass {
    pub id: &'static str,
    pub numerator: &'static str,
    pub denominator: &'static str,
}

pub const RATIO_CLASSES: [RatioClass; 5] = [
    RatioClass {
        id: "X1_WorkingCapitalToTotalAssets",
        numerator: "WorkingCapital",
        denominator: "TotalAssets",
    },
    RatioClass {
        id: "X2_RetainedEarningsToTotalAssets",
        numerator: "RetainedEarnings",
        denominator: "TotalAssets",
    },
    RatioClass {
        id: "X3_EbitToTotalAssets",
        numerator: "Ebit",
        denominator: "TotalAssets",
    },
    RatioClass {
        id: "X4_MarketValueEquityToTotalLiabilities",
        numerator: "MarketValueEquity",
        denominator: "TotalLiabilities",
    },
    RatioClass {
        id: "X5_SalesToTotalAssets",
        numerator: "Sales",
        denominator: "TotalAssets",
    },
];

/// The fixed balance-sheet hierarchy with its slots and no instances.
pub fn skeleton() -> OntologyTree {
    let mut tree = OntologyTree::new(OntClass::new(ROOT, None).with_comment(Comment::en(
        "Position of a firm's assets, liabilities and owners' equity at one date",
    )))
    .expect("root is valid");
    let classes = [
        (
            "Assets",
            ROOT,
            "Resources owned by the firm that carry monetary value",
        ),
        (
            "CurrentAssets",
            "Assets",
            "Assets expected to turn into cash within a year",
        ),
        (
            "FixedAssets",
            "Assets",
            "Long-term assets such as land, buildings and machinery",
        ),
        (
            "Liabilities",
            ROOT,
            "Creditor claims against the firm's assets",
        ),
        (
            "CurrentLiabilities",
            "Liabilities",
            "Obligations due within a year",
        ),
        (
            "LongTermLiabilities",
            "Liabilities",
            "Obligations due after more than a year",
        ),
        (
            "OwnersEquity",
            ROOT,
            "Owners' investment plus retained earnings",
        ),
    ];
    for (id, parent, comment) in classes {
        tree.add_class(OntClass::new(id, Some(parent)).with_comment(Comment::en(comment)))
            .expect("skeleton class");
    }
    for (a, b) in [
        ("CurrentAssets", "FixedAssets"),
        ("CurrentLiabilities", "LongTermLiabilities"),
    ] {
        tree.classes
            .get_mut(a)
            .unwrap()
            .disjoint_with
            .insert(b.into());
        tree.classes
            .get_mut(b)
            .unwrap()
            .disjoint_with
            .insert(a.into());
    }
    let once = [Facet::Required, Facet::MaxCardinality(1)];
    let slots = [
        Slot::new("firm", ROOT, SlotRange::Text, &once),
        Slot::new("period", ROOT, SlotRange::Text, &[Facet::MaxCardinality(1)]),
        Slot::new("validation_failure", ROOT, SlotRange::Text, &[]),
        Slot::new("amount", "Assets", SlotRange::Numeric, &once),
        Slot::new("amount", "Liabilities", SlotRange::Numeric, &once),
        Slot::new("amount", "OwnersEquity", SlotRange::Numeric, &once),
    ];
    for slot in slots {
        tree.add_slot(slot).expect("skeleton slot");
    }
    tree
}

/// Builds one ontology over many statements.
#[derive(Debug, Clone)]
pub struct OntologyBuilder {
    tree: OntologyTree,
    /// class id -> label that introduced it
    item_classes: BTreeMap<String, String>,
}

impl Default for OntologyBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl OntologyBuilder {
    pub fn new() -> Self {
        OntologyBuilder {
            tree: skeleton(),
            item_classes: BTreeMap::new(),
        }
    }

    fn ensure_ratio_classes(&mut self) -> Result<()> {
        if self.tree.class(RATIO_PARENT).is_some() {
            return Ok(());
        }
        self.tree.add_class(
            OntClass::new(RATIO_PARENT, Some(ROOT))
                .with_comment(Comment::en("Quotient of two accounting items")),
        )?;
        let once = [Facet::Required, Facet::MaxCardinality(1)];
        for ratio in RATIO_CLASSES {
            self.tree
                .add_class(OntClass::new(ratio.id, Some(RATIO_PARENT)).with_comment(
                    Comment::en(format!(
                        "{} divided by {}",
                        ratio.numerator, ratio.denominator
                    )),
                ))?;
            for (name, item) in [
                ("numerator", ratio.numerator),
                ("denominator", ratio.denominator),
            ] {
                let mut slot = Slot::new(name, ratio.id, SlotRange::Numeric, &once);
                slot.stands_for = Some(item.to_string());
                self.tree.add_slot(slot)?;
            }
        }
        Ok(())
    }

    /// Adds one firm-period: a class per new line-item label, an instance per
    /// line item, and a ratio instance wherever both operands are known.
    /// Failed validation checks are attached to every instance.
    pub fn add_statement(
        &mut self,
        stmt: &FinancialStatement,
        supp: &SupplementalFigures,
        validation: Option<&ValidationReport>,
    ) -> Result<&mut Self> {
        // resolve every class id first so a collision leaves the tree untouched
        let mut planned: Vec<(String, &str, &crate::statement::LineItem)> = Vec::new();
        for item in &stmt.items {
            let Some(parent) = category_class(item.category) else {
                continue;
            };
            let id = class_id_for(&item.name)
                .ok_or_else(|| OntologyError::UnnamableItem(item.name.clone()))?;
            if let Some(existing) = self.tree.class(&id) {
                let is_item_with_same_parent = self.item_classes.contains_key(&id)
                    && existing.parent.as_deref() == Some(parent);
                if !is_item_with_same_parent {
                    return Err(OntologyError::IdCollision {
                        name: item.name.clone(),
                        id,
                        existing: existing.parent.clone().unwrap_or_default(),
                    });
                }
            }
            if let Some((_, other_parent, _)) = planned.iter().find(|(p, _, _)| *p == id) {
                if *other_parent != parent {
                    return Err(OntologyError::IdCollision {
                        name: item.name.clone(),
                        id,
                        existing: other_parent.to_string(),
                    });
                }
            }
            planned.push((id, parent, item));
        }
        let key = stmt.key();
        for (id, _, _) in &planned {
            if self.tree.instances.contains_key(&format!("{key}/{id}")) {
                return Err(OntologyError::DuplicateInstance(format!("{key}/{id}")));
            }
        }

        if !stmt.items.is_empty() {
            self.ensure_ratio_classes()?;
        }
        let annotate = |mut inst: Instance| {
            inst = inst.with("firm", SlotValue::Text(stmt.firm_id.clone()));
            if let Some(p) = stmt.period {
                inst = inst.with("period", SlotValue::Text(p.to_string()));
            }
            if let Some(report) = validation {
                for check in report.failures() {
                    inst = inst.with(
                        "validation_failure",
                        SlotValue::Text(check.check_name.clone()),
                    );
                }
            }
            inst
        };

        for (id, parent, item) in planned {
            if self.tree.class(&id).is_none() {
                self.tree.add_class(
                    OntClass::new(id.clone(), Some(parent)).with_comment(Comment::en(&item.name)),
                )?;
                self.item_classes.insert(id.clone(), item.name.clone());
            }
            let inst = Instance::new(format!("{key}/{id}"), id.clone())
                .with("amount", SlotValue::Numeric(item.amount));
            self.tree.add_instance(annotate(inst))?;
        }

        if !stmt.items.is_empty() {
            let totals = stmt.totals();
            let operand = |name: &str| -> Option<Decimal> {
                match name {
                    "WorkingCapital" => Some(working_capital(stmt)),
                    "TotalAssets" => Some(totals.total_assets),
                    "TotalLiabilities" => Some(totals.total_liabilities),
                    "RetainedEarnings" => supp.retained_earnings,
                    "Ebit" => supp.ebit,
                    "MarketValueEquity" => supp.market_value_equity,
                    "Sales" => supp.sales,
                    _ => None,
                }
            };
            for ratio in RATIO_CLASSES {
                if let (Some(n), Some(d)) = (operand(ratio.numerator), operand(ratio.denominator)) {
                    let inst = Instance::new(format!("{key}/{}", ratio.id), ratio.id)
                        .with("numerator", SlotValue::Numeric(n))
                        .with("denominator", SlotValue::Numeric(d));
                    self.tree.add_instance(annotate(inst))?;
                }
            }
        }
        Ok(self)
    }

    pub fn finish(self) -> OntologyTree {
        self.tree
    }
}

/// Ontology for a single firm-period. Validation runs at the default
/// tolerance and any failed check is attached to the instances.
pub fn build_financial_ontology(
    stmt: &FinancialStatement,
    supp: &SupplementalFigures,
) -> Result<OntologyTree> {
    let report = validate(stmt, DEFAULT_TOLERANCE);
    let mut builder = OntologyBuilder::new();
    builder.add_statement(stmt, supp, Some(&report))?;
    Ok(builder.finish())
}

fn escape(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

/// Serialises the class hierarchy. Output is deterministic: classes appear
/// in lexicographic id order, disjointness targets likewise.
pub fn export_owl(tree: &OntologyTree) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\"?>\n");
    let _ = writeln!(
        out,
        "<rdf:RDF\n    xmlns:rdf=\"{RDF_NS}\"\n    xmlns:rdfs=\"{RDFS_NS}\"\n    xmlns:owl=\"{OWL_NS}\"\n    xmlns:protege=\"{PROTEGE_NS}\">"
    );
    let _ = writeln!(
        out,
        "  <owl:Ontology rdf:about=\"\">\n    <owl:imports rdf:resource=\"{PROTEGE_IMPORT}\"/>\n  </owl:Ontology>"
    );
    for class in tree.classes() {
        let _ = writeln!(out, "  <owl:Class rdf:ID=\"{}\">", escape(&class.id));
        if let Some(c) = &class.comment {
            match &c.lang {
                Some(lang) => {
                    let _ = write!(out, "    <rdfs:comment xml:lang=\"{}\">", escape(lang));
                }
                None => out.push_str("    <rdfs:comment>"),
            }
            let _ = writeln!(out, "{}</rdfs:comment>", escape(&c.text));
        }
        if let Some(p) = &class.parent {
            let _ = writeln!(
                out,
                "    <rdfs:subClassOf>\n      <owl:Class rdf:about=\"#{}\"/>\n    </rdfs:subClassOf>",
                escape(p)
            );
        }
        for d in &class.disjoint_with {
            let _ = writeln!(
                out,
                "    <owl:disjointWith>\n      <owl:Class rdf:about=\"#{}\"/>\n    </owl:disjointWith>",
                escape(d)
            );
        }
        out.push_str("  </owl:Class>\n");
    }
    out.push_str("</rdf:RDF>\n");
    out
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

struct OwlReader<'a> {
    src: &'a str,
    reader: Reader<&'a [u8]>,
}

impl<'a> OwlReader<'a> {
    fn error(&self, message: impl Into<String>) -> OntologyError {
        let (line, column) = line_col(self.src, self.reader.error_position() as usize);
        OntologyError::Xml {
            line,
            column,
            message: message.into(),
        }
    }

    fn here(&self, message: impl Into<String>) -> OntologyError {
        let (line, column) = line_col(self.src, self.reader.buffer_position() as usize);
        OntologyError::Xml {
            line,
            column,
            message: message.into(),
        }
    }

    /// Next event that is not ignorable whitespace, a comment or a
    /// processing instruction.
    fn next(&mut self) -> Result<Event<'a>> {
        loop {
            let ev = self
                .reader
                .read_event()
                .map_err(|e| self.error(e.to_string()))?;
            match ev {
                Event::Comment(_) | Event::PI(_) | Event::DocType(_) | Event::Decl(_) => {}
                Event::Text(ref t) if t.iter().all(u8::is_ascii_whitespace) => {}
                other => return Ok(other),
            }
        }
    }

    fn attr(&self, e: &BytesStart<'_>, name: &str) -> Result<Option<String>> {
        for a in e.attributes() {
            let a = a.map_err(|err| self.here(err.to_string()))?;
            if a.key.as_ref() == name.as_bytes() {
                let v = a
                    .unescape_value()
                    .map_err(|err| self.here(err.to_string()))?;
                return Ok(Some(v.into_owned()));
            }
        }
        Ok(None)
    }

    fn reference(&self, e: &BytesStart<'_>, attr: &str) -> Result<String> {
        let raw = self
            .attr(e, attr)?
            .ok_or_else(|| self.here(format!("missing {attr}")))?;
        raw.strip_prefix('#').map(str::to_string).ok_or_else(|| {
            self.here(format!(
                "only local #id references are supported, found {raw:?}"
            ))
        })
    }

    fn expect_end(&mut self, name: &str) -> Result<()> {
        match self.next()? {
            Event::End(e) if e.name().as_ref() == name.as_bytes() => Ok(()),
            other => Err(self.here(format!("expected </{name}>, found {}", describe(&other)))),
        }
    }

    /// Body of `rdfs:subClassOf` / `owl:disjointWith`: a single
    /// `<owl:Class rdf:about="#id"/>`.
    fn class_reference(&mut self, wrapper: &str) -> Result<String> {
        let target = match self.next()? {
            Event::Empty(e) if e.name().as_ref() == b"owl:Class" => {
                self.reference(&e, "rdf:about")?
            }
            other => {
                return Err(self.here(format!(
                    "expected <owl:Class rdf:about=...> inside {wrapper}, found {}",
                    describe(&other)
                )))
            }
        };
        self.expect_end(wrapper)?;
        Ok(target)
    }

    fn comment(&mut self, start: &BytesStart<'_>) -> Result<Comment> {
        let lang = self.attr(start, "xml:lang")?;
        let mut text = String::new();
        loop {
            match self
                .reader
                .read_event()
                .map_err(|e| self.error(e.to_string()))?
            {
                Event::Text(t) => {
                    text.push_str(&t.unescape().map_err(|e| self.here(e.to_string()))?)
                }
                Event::CData(c) => text.push_str(&String::from_utf8_lossy(&c)),
                Event::End(e) if e.name().as_ref() == b"rdfs:comment" => break,
                other => {
                    return Err(
                        self.here(format!("unexpected {} in rdfs:comment", describe(&other)))
                    )
                }
            }
        }
        Ok(Comment { lang, text })
    }

    fn class_body(&mut self, class: &mut OntClass) -> Result<()> {
        loop {
            match self.next()? {
                Event::End(e) if e.name().as_ref() == b"owl:Class" => return Ok(()),
                Event::Start(e) => match e.name().as_ref() {
                    b"rdfs:comment" => {
                        if class.comment.is_some() {
                            return Err(self.here("duplicate rdfs:comment"));
                        }
                        class.comment = Some(self.comment(&e)?);
                    }
                    b"rdfs:subClassOf" => {
                        let target = self.class_reference("rdfs:subClassOf")?;
                        self.set_parent(class, target)?;
                    }
                    b"owl:disjointWith" => {
                        let target = self.class_reference("owl:disjointWith")?;
                        class.disjoint_with.insert(target);
                    }
                    other => return Err(self.unsupported(other)),
                },
                Event::Empty(e) => match e.name().as_ref() {
                    b"rdfs:subClassOf" => {
                        let target = self.reference(&e, "rdf:resource")?;
                        self.set_parent(class, target)?;
                    }
                    b"owl:disjointWith" => {
                        let target = self.reference(&e, "rdf:resource")?;
                        class.disjoint_with.insert(target);
                    }
                    b"rdfs:comment" => {
                        class.comment = Some(Comment {
                            lang: self.attr(&e, "xml:lang")?,
                            text: String::new(),
                        })
                    }
                    other => return Err(self.unsupported(other)),
                },
                other => {
                    return Err(self.here(format!("unexpected {} in owl:Class", describe(&other))))
                }
            }
        }
    }

    fn set_parent(&self, class: &mut OntClass, target: String) -> Result<()> {
        if class.parent.is_some() {
            return Err(self.here(format!(
                "class {:?} has more than one rdfs:subClassOf",
                class.id
            )));
        }
        class.parent = Some(target);
        Ok(())
    }

    fn unsupported(&self, name: &[u8]) -> OntologyError {
        self.here(format!(
            "unsupported element <{}>",
            String::from_utf8_lossy(name)
        ))
    }

    fn ontology_header(&mut self) -> Result<()> {
        loop {
            match self.next()? {
                Event::End(e) if e.name().as_ref() == b"owl:Ontology" => return Ok(()),
                Event::Empty(e) if e.name().as_ref() == b"owl:imports" => {}
                other => {
                    return Err(
                        self.here(format!("unexpected {} in owl:Ontology", describe(&other)))
                    )
                }
            }
        }
    }

    fn document(&mut self) -> Result<Vec<OntClass>> {
        match self.next()? {
            Event::Start(e) if e.name().as_ref() == b"rdf:RDF" => {}
            Event::Eof => return Err(OntologyError::NoRoot),
            other => {
                return Err(self.here(format!("expected <rdf:RDF>, found {}", describe(&other))))
            }
        }
        let mut classes = Vec::new();
        loop {
            match self.next()? {
                Event::End(e) if e.name().as_ref() == b"rdf:RDF" => break,
                Event::Start(e) if e.name().as_ref() == b"owl:Ontology" => {
                    self.ontology_header()?
                }
                Event::Empty(e) if e.name().as_ref() == b"owl:Ontology" => {}
                Event::Start(e) if e.name().as_ref() == b"owl:Class" => {
                    let id = self
                        .attr(&e, "rdf:ID")?
                        .ok_or_else(|| self.here("owl:Class without rdf:ID"))?;
                    let mut class = OntClass::new(id, None);
                    self.class_body(&mut class)?;
                    classes.push(class);
                }
                Event::Empty(e) if e.name().as_ref() == b"owl:Class" => {
                    let id = self
                        .attr(&e, "rdf:ID")?
                        .ok_or_else(|| self.here("owl:Class without rdf:ID"))?;
                    classes.push(OntClass::new(id, None));
                }
                Event::Start(e) | Event::Empty(e) => {
                    return Err(self.unsupported(e.name().as_ref()))
                }
                other => {
                    return Err(self.here(format!("unexpected {} in rdf:RDF", describe(&other))))
                }
            }
        }
        match self.next()? {
            Event::Eof => Ok(classes),
            other => Err(self.here(format!("unexpected {} after </rdf:RDF>", describe(&other)))),
        }
    }
}

fn describe(ev: &Event<'_>) -> String {
    match ev {
        Event::Start(e) => format!("<{}>", String::from_utf8_lossy(e.name().as_ref())),
        Event::Empty(e) => format!("<{}/>", String::from_utf8_lossy(e.name().as_ref())),
        Event::End(e) => format!("</{}>", String::from_utf8_lossy(e.name().as_ref())),
        Event::Text(_) => "text".into(),
        Event::Eof => "end of document".into(),
        _ => "markup".into(),
    }
}

/// Reads a document in the subset written by [`export_owl`]. Elements
/// outside the subset are rejected.
pub fn import_owl(source: &str) -> Result<OntologyTree> {
    let mut reader = Reader::from_str(source);
    reader.config_mut().check_end_names = true;
    let mut owl = OwlReader {
        src: source,
        reader,
    };
    let classes = owl.document()?;
    OntologyTree::from_classes(classes)
}
