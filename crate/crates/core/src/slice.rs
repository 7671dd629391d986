//! Slices of the motivic sphere, the Novikov-to-slice grading shift, E1
//! support, the first slice differentials, and the column computation in
//! the Andrews–Miller region.
//!
//! The `t`-th slice is `⋁_s Σ^{(t-s)+tα} M E2^{s,2t}`, so a Novikov class in
//! bidegree `(s, 2t)` sits at suspension `(m, n) = (t - s, t)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::am::{in_iso_range, monomial_at_bidegree, AmMonomial};
use crate::cobar::{CobarError, ExtAtlas};
use crate::linalg::AbelianPGroup;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SliceError {
    #[error("internal degree {0} is odd")]
    OddDegree(i64),
    #[error(transparent)]
    Ext(#[from] CobarError),
    #[error("column concentration violated: {monomial} survives at m={m} (m ≡ {residue} mod 4)")]
    ColumnConcentration { monomial: String, m: i64, residue: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Integral,
    PLocal(u64),
}

/// `(s, t) ↦ (t/2 - s, t/2)`.
pub fn shift_t(s: i64, t: i64) -> Result<(i64, i64), SliceError> {
    if t.rem_euclid(2) != 0 {
        return Err(SliceError::OddDegree(t));
    }
    Ok((t / 2 - s, t / 2))
}

/// `(m, n) ↦ (n - m, 2n)`.
pub fn shift_t_inv(m: i64, n: i64) -> (i64, i64) {
    (n - m, 2 * n)
}

/// The region `2n > max(3m + 5, 4m)`.
pub fn in_am_region(m: i64, n: i64) -> bool {
    2 * n > (3 * m + 5).max(4 * m)
}

/// Coefficient of a slice summand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coefficient {
    Group(AbelianPGroup),
    /// The cyclic group `Z/a_{2q}` whose order is carried symbolically.
    Opaque { q: i64 },
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Group(g) => write!(f, "{g}"),
            Coefficient::Opaque { q } => write!(f, "Z/a_{}", 2 * q),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliceSummand {
    pub slice_degree: i64,
    pub s: i64,
    pub two_t: i64,
    pub m: i64,
    pub n: i64,
    pub coefficient: Coefficient,
    pub label: Option<AmMonomial>,
}

impl SliceSummand {
    pub fn new(slice_degree: i64, s: i64, coefficient: Coefficient, label: Option<AmMonomial>) -> Self {
        SliceSummand {
            slice_degree,
            s,
            two_t: 2 * slice_degree,
            m: slice_degree - s,
            n: slice_degree,
            coefficient,
            label,
        }
    }
}

fn e2(atlas: &ExtAtlas, variant: Variant, s: i64, t: i64) -> Result<AbelianPGroup, SliceError> {
    if s < 0 || t < 0 {
        return Ok(AbelianPGroup::zero());
    }
    let (s, t) = (s as usize, t as u32);
    Ok(match variant {
        Variant::Integral => atlas.ext_mu(s, t)?,
        Variant::PLocal(p) => {
            if s > 0 && (t as u64) < 2 * s as u64 * (p - 1) {
                AbelianPGroup::zero()
            } else {
                atlas.ext_bp(p, s, t)?
            }
        }
    })
}

/// Nonzero summands of the `t`-th slice, in increasing `s`.
pub fn slice_decomposition(t: i64, variant: Variant, atlas: &ExtAtlas) -> Result<Vec<SliceSummand>, SliceError> {
    let mut out = Vec::new();
    if t < 0 {
        return Ok(out);
    }
    for s in 0..=t {
        let g = e2(atlas, variant, s, 2 * t)?;
        if g.is_trivial() {
            continue;
        }
        let label = if in_iso_range(s, 2 * t) { monomial_at_bidegree(s, 2 * t) } else { None };
        out.push(SliceSummand::new(t, s, Coefficient::Group(g), label));
    }
    Ok(out)
}

/// Whether `Σ^{m+nα}` carries a slice summand, i.e. `E2^{n-m,2n}(MU) ≠ 0`.
pub fn contains_summand(m: i64, n: i64, atlas: &ExtAtlas) -> Result<bool, SliceError> {
    let (s, t) = shift_t_inv(m, n);
    Ok(!e2(atlas, Variant::Integral, s, t)?.is_trivial())
}

/// How E1 support of a summand `Σ^{a+bα} M(G)` is decided at `(m, n)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportCondition {
    /// `m - a ≥ 0` and `n - b ≤ 0`.
    #[default]
    Weak,
    /// Outside the vanishing region of `π_{x+yα} M(G)`: `x < 0`, or
    /// `x = 0, y > 0`, or `x > 0, y > -1`.
    Full,
}

fn moore_may_be_nonzero(x: i64, y: i64, condition: SupportCondition) -> bool {
    match condition {
        SupportCondition::Weak => x >= 0 && y <= 0,
        SupportCondition::Full => !(x < 0 || (x == 0 && y > 0) || (x > 0 && y > -1)),
    }
}

/// Whether `E1^{m,n,t}` can be nonzero.
pub fn e1_cell_support(
    m: i64,
    n: i64,
    t: i64,
    variant: Variant,
    atlas: &ExtAtlas,
    condition: SupportCondition,
) -> Result<bool, SliceError> {
    for summand in slice_decomposition(t, variant, atlas)? {
        if moore_may_be_nonzero(m - summand.m, n - summand.n, condition) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Suspension `(2j + 3ε, i + 3j + 4ε)` of the summand indexed by `α1^i α3^j α4^ε`.
pub fn monomial_suspension(x: &AmMonomial) -> (i64, i64) {
    let j = x.alpha3 as i64;
    let e = x.alpha4 as i64;
    (2 * j + 3 * e, x.alpha1 + 3 * j + 4 * e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrowKind {
    TauPr,
    Tau,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum D1Family {
    /// `τ pr` out of the `Z/a_{2q}` summand of `α_{4q+2}`.
    Base,
    /// `τ` on `α1^j α_{4q+2}`, `j ≥ 1`.
    Alpha1PowerOn4qPlus2,
    /// `τ` on `α1^j α_{4q-1}`, `j ≥ 0`.
    Alpha1PowerOn4qMinus1,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct D1Arrow {
    pub source: SliceSummand,
    pub target: SliceSummand,
    pub kind: ArrowKind,
    pub family: D1Family,
    pub q: i64,
    pub j: i64,
    pub name: String,
}

fn f2() -> Coefficient {
    Coefficient::Group(AbelianPGroup::cyclic(2))
}

fn alpha_name(j: i64, k: i64) -> String {
    match j {
        0 => format!("α{k}"),
        1 => format!("α1·α{k}"),
        j => format!("α1^{j}·α{k}"),
    }
}

/// The three families of `d1` differentials for `1 ≤ q ≤ q_max`, `j ≤ j_max`.
pub fn d1_arrows(q_max: i64, j_max: i64) -> Vec<D1Arrow> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        let k = 4 * q + 2;
        // Σ^{(4q+1)+(4q+2)α} M Z/a_{2q} → Σ^{4q+(4q+3)α} M F2
        out.push(D1Arrow {
            source: SliceSummand::new(k, 1, Coefficient::Opaque { q }, None),
            target: SliceSummand::new(k + 1, 3, f2(), None),
            kind: ArrowKind::TauPr,
            family: D1Family::Base,
            q,
            j: 0,
            name: alpha_name(0, k),
        });
        // Σ^{(4q+1)+(4q+2+j)α} M F2 → Σ^{4q+(4q+3+j)α} M F2
        for j in 1..=j_max {
            out.push(D1Arrow {
                source: SliceSummand::new(k + j, 1 + j, f2(), None),
                target: SliceSummand::new(k + j + 1, 3 + j, f2(), None),
                kind: ArrowKind::Tau,
                family: D1Family::Alpha1PowerOn4qPlus2,
                q,
                j,
                name: alpha_name(j, k),
            });
        }
        // Σ^{(4q-2)+(4q-1+j)α} M F2 → Σ^{(4q-3)+(4q+j)α} M F2
        let k = 4 * q - 1;
        for j in 0..=j_max {
            out.push(D1Arrow {
                source: SliceSummand::new(k + j, 1 + j, f2(), None),
                target: SliceSummand::new(k + j + 1, 3 + j, f2(), None),
                kind: ArrowKind::Tau,
                family: D1Family::Alpha1PowerOn4qMinus1,
                q,
                j,
                name: alpha_name(j, k),
            });
        }
    }
    out
}

/// A rectangle of suspensions, inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct Window {
    pub m_min: i64,
    pub m_max: i64,
    pub n_min: i64,
    pub n_max: i64,
}

impl Window {
    pub fn contains(&self, m: i64, n: i64) -> bool {
        (self.m_min..=self.m_max).contains(&m) && (self.n_min..=self.n_max).contains(&n)
    }

    pub fn is_empty(&self) -> bool {
        self.m_min > self.m_max || self.n_min > self.n_max
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlacedMonomial {
    pub monomial: AmMonomial,
    pub m: i64,
    pub n: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionColumns {
    pub survivors: Vec<PlacedMonomial>,
    pub removed: Vec<PlacedMonomial>,
    pub residues: BTreeSet<i64>,
    pub warnings: Vec<String>,
}

/// Monomial summands in `window ∩ {2n > max(3m+5, 4m)}`, with those of odd
/// α3-exponent removed as `d1` sources.
pub fn region_e2_columns(window: &Window) -> Result<RegionColumns, SliceError> {
    let mut survivors = Vec::new();
    let mut removed = Vec::new();
    if !window.is_empty() {
        for eps in [false, true] {
            let mut j: i64 = 0;
            loop {
                let m = 2 * j + 3 * eps as i64;
                if m > window.m_max {
                    break;
                }
                if m >= window.m_min {
                    for n in window.n_min..=window.n_max {
                        let i = n - 3 * j - 4 * eps as i64;
                        if i < 0 || !in_am_region(m, n) {
                            continue;
                        }
                        let monomial = AmMonomial::new(i, j as u32, eps);
                        let placed = PlacedMonomial { monomial, m, n };
                        if j % 2 == 1 {
                            removed.push(placed);
                        } else {
                            survivors.push(placed);
                        }
                    }
                }
                j += 1;
            }
        }
    }
    let key = |p: &PlacedMonomial| (p.m, p.n, p.monomial);
    survivors.sort_by_key(key);
    removed.sort_by_key(key);

    let mut residues = BTreeSet::new();
    for s in &survivors {
        let r = s.m.rem_euclid(4);
        if r == 1 || r == 2 {
            return Err(SliceError::ColumnConcentration {
                monomial: s.monomial.to_string(),
                m: s.m,
                residue: r,
            });
        }
        residues.insert(r);
    }

    let mut warnings = Vec::new();
    if !removed.is_empty() {
        let from = monomial_suspension(&AmMonomial::new(0, 1, false));
        let to = monomial_suspension(&AmMonomial::new(4, 0, false));
        let pairing = (to.0 - from.0, to.1 - from.1);
        if pairing != (-1, 1) {
            warnings.push(format!(
                "pairing α1^i·α3^(2j+1)·α4^ε with α1^(4+i)·α3^(2j)·α4^ε shifts suspension by ({}, {}), \
                 while the d1 arrows shift by (-1, 1); removal follows the odd α3-exponent rule",
                pairing.0, pairing.1
            ));
        }
    }
    Ok(RegionColumns {
        survivors,
        removed,
        residues,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_shift() {
        assert_eq!(shift_t(1, 2).unwrap(), (0, 1));
        assert_eq!(shift_t(0, 0).unwrap(), (0, 0));
        assert_eq!(shift_t(19, 74).unwrap(), (18, 37));
        assert!(shift_t(1, 3).is_err());
        assert_eq!(shift_t_inv(0, 1), (1, 2));
        assert_eq!(shift_t_inv(18, 37), (19, 74));
        for m in -20..=20 {
            for n in -20..=20 {
                let (s, t) = shift_t_inv(m, n);
                assert_eq!(shift_t(s, t).unwrap(), (m, n));
            }
        }
    }

    #[test]
    fn suspensions_of_monomials() {
        assert_eq!(monomial_suspension(&AmMonomial::ALPHA3), (2, 3));
        assert_eq!(monomial_suspension(&AmMonomial::ALPHA1), (0, 1));
        assert_eq!(monomial_suspension(&AmMonomial::new(2, 1, true)), (5, 9));
        for i in 0..=30 {
            for j in 0..=30 {
                for e in [false, true] {
                    let x = AmMonomial::new(i, j, e);
                    let (s, t) = x.bidegree();
                    if s <= 30 {
                        assert_eq!(monomial_suspension(&x), shift_t(s, t).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn arrow_examples() {
        let arrows = d1_arrows(1, 1);
        let find = |family, j| arrows.iter().find(|a| a.family == family && a.j == j).unwrap();
        let base = find(D1Family::Base, 0);
        assert_eq!((base.source.m, base.source.n, base.target.m, base.target.n), (5, 6, 4, 7));
        assert_eq!(base.source.coefficient.to_string(), "Z/a_2");
        assert_eq!(base.kind, ArrowKind::TauPr);
        let third = find(D1Family::Alpha1PowerOn4qMinus1, 0);
        assert_eq!((third.source.m, third.source.n, third.target.m, third.target.n), (2, 3, 1, 4));
        assert_eq!(third.name, "α3");
        let second = find(D1Family::Alpha1PowerOn4qPlus2, 1);
        assert_eq!((second.source.m, second.source.n, second.target.m, second.target.n), (5, 7, 4, 8));
        assert_eq!(arrows.len(), 1 + 1 + 2);
    }

    #[test]
    fn arrows_move_by_one_column() {
        for a in d1_arrows(6, 8) {
            assert_eq!(a.target.m - a.source.m, -1);
            assert_eq!(a.target.n - a.source.n, 1);
            assert_eq!(a.target.slice_degree - a.source.slice_degree, 1);
        }
    }

    #[test]
    fn columns_in_the_region() {
        let empty = Window { m_min: 0, m_max: -1, n_min: 0, n_max: 10 };
        let r = region_e2_columns(&empty).unwrap();
        assert!(r.survivors.is_empty() && r.removed.is_empty() && r.warnings.is_empty());

        let w = Window { m_min: 0, m_max: 30, n_min: 0, n_max: 80 };
        let r = region_e2_columns(&w).unwrap();
        assert!(r.residues.is_subset(&[0, 3].into()));
        assert!(r.removed.iter().any(|p| p.monomial.alpha3 == 1 && !p.monomial.alpha4));
        assert!(r.survivors.iter().any(|p| p.monomial.alpha3 == 2 && !p.monomial.alpha4 && p.m == 4));
        assert!(r.removed.iter().all(|p| p.monomial.alpha3 % 2 == 1));
        assert_eq!(r.warnings.len(), 1);
        for p in r.survivors.iter().chain(&r.removed) {
            assert!(in_am_region(p.m, p.n) && w.contains(p.m, p.n));
        }
    }

    #[test]
    fn support_conditions() {
        assert!(moore_may_be_nonzero(0, 0, SupportCondition::Weak));
        assert!(moore_may_be_nonzero(0, 0, SupportCondition::Full));
        assert!(moore_may_be_nonzero(1, 0, SupportCondition::Weak));
        assert!(!moore_may_be_nonzero(1, 0, SupportCondition::Full));
        assert!(!moore_may_be_nonzero(-1, -5, SupportCondition::Weak));
        assert!(!moore_may_be_nonzero(0, 1, SupportCondition::Full));
    }
}
