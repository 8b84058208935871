//! Altman ratios, the Z-score discriminant and distress-zone classification.
//!
//! Ratios are stored as plain fractions. The published coefficients
//! (0.012, 0.014, 0.033, 0.006, 0.999) expect X1..X4 in percent and X5 as a
//! raw multiple, so [`z_score`] scales the first four by 100. The folded form
//! (1.2, 1.4, 3.3, 0.6, 0.999) is in [`FRACTION_COEFFICIENTS`].

use std::fmt;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statement::{working_capital, FinancialStatement, SupplementalFigures};

/// Coefficients applied to X1..X4 in percent and X5 as a multiple.
pub const PERCENT_COEFFICIENTS: [f64; 5] = [0.012, 0.014, 0.033, 0.006, 0.999];
/// The same discriminant with X1..X5 all as fractions.
pub const FRACTION_COEFFICIENTS: [f64; 5] = [1.2, 1.4, 3.3, 0.6, 0.999];

/// At or below: distress zone.
pub const DISTRESS_CUTOFF: f64 = 1.81;
/// At or above: safe zone.
pub const SAFE_CUTOFF: f64 = 2.99;
/// Strictly below: flagged as likely bankrupt within a year.
pub const BANKRUPT_95_CUTOFF: f64 = 2.675;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("cannot compute {ratio}: {denominator} is not positive")]
    DivisionDomain {
        ratio: &'static str,
        denominator: &'static str,
    },
    #[error("missing input {0}")]
    MissingInput(&'static str),
    #[error("ratio {0} is not finite")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, ScoringError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioVector {
    /// Working capital / total assets.
    pub x1: f64,
    /// Retained earnings / total assets.
    pub x2: f64,
    /// EBIT / total assets.
    pub x3: f64,
    /// Market value of equity / book value of total liabilities.
    pub x4: f64,
    /// Sales / total assets.
    pub x5: f64,
}

impl RatioVector {
    pub const NAMES: [&'static str; 5] = ["x1", "x2", "x3", "x4", "x5"];

    pub fn new(x1: f64, x2: f64, x3: f64, x4: f64, x5: f64) -> Self {
        RatioVector { x1, x2, x3, x4, x5 }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.x1, self.x2, self.x3, self.x4, self.x5]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        RatioVector::new(a[0], a[1], a[2], a[3], a[4])
    }

    fn check_finite(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.to_array()) {
            if !v.is_finite() {
                return Err(ScoringError::NonFinite(name));
            }
        }
        Ok(())
    }
}

/// What to use for the X4 numerator when no market value is supplied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarketValueFallback {
    /// Missing market value is an error.
    #[default]
    Disabled,
    /// Substitute book equity (total assets minus total liabilities).
    BookEquity,
}

/// Ratios plus whether X4 was computed from the book-equity proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioOutcome {
    pub ratios: RatioVector,
    pub x4_proxy: bool,
}

/// Computes the five ratios. Missing supplemental figures are errors.
pub fn compute_ratios(
    stmt: &FinancialStatement,
    supp: &SupplementalFigures,
) -> Result<RatioVector> {
    compute_ratios_with(stmt, supp, MarketValueFallback::Disabled).map(|o| o.ratios)
}

pub fn compute_ratios_with(
    stmt: &FinancialStatement,
    supp: &SupplementalFigures,
    fallback: MarketValueFallback,
) -> Result<RatioOutcome> {
    let totals = stmt.totals();
    let assets = totals.total_assets;
    if assets <= Decimal::ZERO {
        return Err(ScoringError::DivisionDomain {
            ratio: "x1",
            denominator: "total_assets",
        });
    }
    let retained = supp
        .retained_earnings
        .ok_or(ScoringError::MissingInput("retained_earnings"))?;
    let ebit = supp.ebit.ok_or(ScoringError::MissingInput("ebit"))?;
    let sales = supp.sales.ok_or(ScoringError::MissingInput("sales"))?;
    let (market_value, x4_proxy) = match (supp.market_value_equity, fallback) {
        (Some(v), _) => (v, false),
        (None, MarketValueFallback::BookEquity) => {
            (totals.total_assets - totals.total_liabilities, true)
        }
        (None, MarketValueFallback::Disabled) => {
            return Err(ScoringError::MissingInput("market_value_equity"))
        }
    };
    let liabilities = totals.total_liabilities;
    if liabilities <= Decimal::ZERO {
        return Err(ScoringError::DivisionDomain {
            ratio: "x4",
            denominator: "total_liabilities",
        });
    }

    // Decimal division keeps the ratios exactly homogeneous in scale.
    let ratio = |num: Decimal, den: Decimal, name: &'static str| -> Result<f64> {
        num.checked_div(den)
            .and_then(|q| q.to_f64())
            .filter(|v| v.is_finite())
            .ok_or(ScoringError::NonFinite(name))
    };
    let ratios = RatioVector {
        x1: ratio(working_capital(stmt), assets, "x1")?,
        x2: ratio(retained, assets, "x2")?,
        x3: ratio(ebit, assets, "x3")?,
        x4: ratio(market_value, liabilities, "x4")?,
        x5: ratio(sales, assets, "x5")?,
    };
    Ok(RatioOutcome { ratios, x4_proxy })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Zone {
    Distress,
    Gray,
    Safe,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Distress, Zone::Gray, Zone::Safe];

    pub fn label(self) -> &'static str {
        match self {
            Zone::Distress => "DISTRESS",
            Zone::Gray => "GRAY",
            Zone::Safe => "SAFE",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScoreResult {
    pub z: f64,
    pub zone: Zone,
    pub bankrupt_95_flag: bool,
}

impl ZScoreResult {
    pub fn from_z(z: f64) -> Self {
        ZScoreResult {
            z,
            zone: classify(z),
            bankrupt_95_flag: z < BANKRUPT_95_CUTOFF,
        }
    }
}

/// `0.012·X1 + 0.014·X2 + 0.033·X3 + 0.006·X4 + 0.999·X5`, with X1..X4
/// taken in percent.
pub fn z_score(r: &RatioVector) -> Result<ZScoreResult> {
    r.check_finite()?;
    let [c1, c2, c3, c4, c5] = PERCENT_COEFFICIENTS;
    let z = c1 * (100.0 * r.x1)
        + c2 * (100.0 * r.x2)
        + c3 * (100.0 * r.x3)
        + c4 * (100.0 * r.x4)
        + c5 * r.x5;
    Ok(ZScoreResult::from_z(z))
}

/// Same discriminant through [`FRACTION_COEFFICIENTS`].
pub fn z_score_fraction_form(r: &RatioVector) -> f64 {
    FRACTION_COEFFICIENTS
        .iter()
        .zip(r.to_array())
        .map(|(c, x)| c * x)
        .sum()
}

pub fn classify(z: f64) -> Zone {
    if z <= DISTRESS_CUTOFF {
        Zone::Distress
    } else if z >= SAFE_CUTOFF {
        Zone::Safe
    } else {
        Zone::Gray
    }
}
