//! Seeded generator for balanced demo statements spanning all three zones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

use crate::statement::{Category, FinancialStatement, LineItem, Period, SupplementalFigures};

/// Target ratio profile: (x1, x2, x3, market value / liabilities, x5,
/// liabilities / assets, current assets / assets).
const PROFILES: [[f64; 7]; 3] = [
    // distressed
    [-0.10, -0.20, -0.05, 0.20, 0.60, 0.85, 0.35],
    // gray
    [0.10, 0.15, 0.06, 0.80, 1.00, 0.60, 0.40],
    // healthy
    [0.30, 0.40, 0.15, 2.00, 1.50, 0.40, 0.45],
];

fn money(x: f64) -> Decimal {
    Decimal::from(x.round() as i64)
}

/// `firms × periods` statements, one per firm and year starting in 2008.
/// Firm `i` follows profile `i % 3` with multiplicative noise; every
/// statement satisfies assets = liabilities + equity exactly.
pub fn corpus(firms: usize, periods: usize, seed: u64) -> Vec<FinancialStatement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(firms * periods);
    for f in 0..firms {
        let profile = PROFILES[f % PROFILES.len()];
        let mut assets: f64 = rng.gen_range(500_000.0..5_000_000.0);
        for p in 0..periods {
            let mut jitter = |v: f64| v * rng.gen_range(0.85..1.15);
            let [x1, x2, x3, mve_tl, x5, tl_ta, ca_ta] = profile.map(&mut jitter);
            let ta = money(assets);
            let ca = money(assets * ca_ta);
            let tl = money(assets * tl_ta);
            let wc = money(assets * x1);
            let cl = (ca - wc).max(Decimal::ZERO).min(tl);
            let retained = money(assets * x2);
            let equity = ta - tl;
            let cash = money(assets * ca_ta * 0.6);
            let plant = money(assets * (1.0 - ca_ta) * 0.7);
            let items = vec![
                LineItem::new("Cash in Banks", Category::CurrentAsset, cash),
                LineItem::new("Accounts Receivable", Category::CurrentAsset, ca - cash),
                LineItem::new("Machinery", Category::LongTermAsset, plant),
                LineItem::new("Buildings", Category::LongTermAsset, ta - ca - plant),
                LineItem::new("Accounts Payable", Category::CurrentLiability, cl),
                LineItem::new(
                    "Mortgage Note Payable",
                    Category::LongTermLiability,
                    tl - cl,
                ),
                LineItem::new("Common Stock", Category::Equity, equity - retained),
                LineItem::new("Retained Earnings", Category::Equity, retained),
            ];
            let period = Period::new(2008 + p as i32, 12).expect("valid month");
            let mut stmt = FinancialStatement::new(format!("firm{f:02}"), Some(period), items)
                .expect("generated items are distinct");
            stmt.supplemental = SupplementalFigures {
                sales: Some(money(assets * x5)),
                ebit: Some(money(assets * x3)),
                retained_earnings: Some(retained),
                market_value_equity: Some(money(assets * tl_ta * mve_tl)),
            };
            out.push(stmt);
            assets *= rng.gen_range(0.8..1.25);
        }
    }
    out
}
