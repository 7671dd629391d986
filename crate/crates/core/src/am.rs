//! The α1-localized Andrews–Miller ring `F2[α1^{±1}, α3, α4]/(α4²)`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::cobar::{CobarError, ExtTable};

/// `α1^i α3^j α4^ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AmMonomial {
    pub alpha1: i64,
    pub alpha3: u32,
    pub alpha4: bool,
}

impl AmMonomial {
    pub const ONE: AmMonomial = AmMonomial { alpha1: 0, alpha3: 0, alpha4: false };
    pub const ALPHA1: AmMonomial = AmMonomial { alpha1: 1, alpha3: 0, alpha4: false };
    pub const ALPHA3: AmMonomial = AmMonomial { alpha1: 0, alpha3: 1, alpha4: false };
    pub const ALPHA4: AmMonomial = AmMonomial { alpha1: 0, alpha3: 0, alpha4: true };

    pub fn new(alpha1: i64, alpha3: u32, alpha4: bool) -> Self {
        AmMonomial { alpha1, alpha3, alpha4 }
    }

    fn eps(&self) -> i64 {
        self.alpha4 as i64
    }

    /// Novikov bidegree `(s, t)`, from `|α1| = (1,2)`, `|α3| = (1,6)`, `|α4| = (1,8)`.
    pub fn bidegree(&self) -> (i64, i64) {
        let j = self.alpha3 as i64;
        (self.alpha1 + j + self.eps(), 2 * self.alpha1 + 6 * j + 8 * self.eps())
    }

    pub fn is_localized(&self) -> bool {
        self.alpha1 < 0
    }
}

impl fmt::Display for AmMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut push = |name: &str, e: i64| match e {
            0 => {}
            1 => parts.push(name.to_string()),
            e => parts.push(format!("{name}^{e}")),
        };
        push("α1", self.alpha1);
        push("α3", self.alpha3 as i64);
        push("α4", self.eps());
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// The monomial of bidegree `(s, t)`, if any. With `localized` the α1
/// exponent may be negative.
pub fn monomial_at_bidegree_in(s: i64, t: i64, localized: bool) -> Option<AmMonomial> {
    // t - 2s = 4j + 6ε
    let r = t - 2 * s;
    if r < 0 || r % 2 != 0 {
        return None;
    }
    let half = r / 2;
    let eps = if half % 2 == 0 { 0 } else { 1 };
    let j = (half - 3 * eps) / 2;
    if j < 0 {
        return None;
    }
    let i = s - j - eps;
    if i < 0 && !localized {
        return None;
    }
    Some(AmMonomial::new(i, j as u32, eps == 1))
}

pub fn monomial_at_bidegree(s: i64, t: i64) -> Option<AmMonomial> {
    monomial_at_bidegree_in(s, t, false)
}

/// `t < 6s - 10` and `t < 4s`: where `E2(MU) → α1^{-1} E2(MU)` is an isomorphism.
pub fn in_iso_range(s: i64, t: i64) -> bool {
    t < 6 * s - 10 && t < 4 * s
}

/// Product in the ring; `None` is zero. Negative α1 exponents in the
/// result are allowed only with `localized`.
pub fn multiply(a: AmMonomial, b: AmMonomial, localized: bool) -> Option<AmMonomial> {
    if a.alpha4 && b.alpha4 {
        return None;
    }
    let product = AmMonomial::new(a.alpha1 + b.alpha1, a.alpha3 + b.alpha3, a.alpha4 || b.alpha4);
    assert!(
        localized || (!a.is_localized() && !b.is_localized()),
        "negative α1 exponent outside a localized context"
    );
    Some(product)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub s: usize,
    pub t: u32,
    pub monomials: Vec<String>,
    pub computed_order: String,
    pub pass: bool,
}

/// For each `(s, t)` in the table with `t ≤ t_limit` inside the iso range,
/// checks that the computed group is elementary abelian of order
/// `2^(number of monomials)`.
pub fn localization_compare(table: &ExtTable, t_limit: u32) -> Result<Vec<ComparisonRow>, CobarError> {
    assert_eq!(table.prime, 2, "the comparison runs at p = 2");
    let mut rows = Vec::new();
    for s in 0..=table.s_max {
        for t in 0..=t_limit.min(table.t_max) {
            if !in_iso_range(s as i64, t as i64) {
                continue;
            }
            let monomials: Vec<String> = monomial_at_bidegree(s as i64, t as i64)
                .into_iter()
                .map(|m| m.to_string())
                .collect();
            let g = table.get(s, t)?;
            let expected = BigUint::one() << monomials.len();
            let order = g.order();
            let pass = g.is_elementary_abelian(2) && order.as_ref() == Some(&expected);
            rows.push(ComparisonRow {
                s,
                t,
                monomials,
                computed_order: order.map_or("infinite".into(), |o| o.to_string()),
                pass,
            });
        }
    }
    Ok(rows)
}

/// Number of monomials in the unlocalized ring at `(s, t)` (0 or 1).
pub fn monomial_count(s: i64, t: i64) -> usize {
    monomial_at_bidegree(s, t).is_some() as usize
}
