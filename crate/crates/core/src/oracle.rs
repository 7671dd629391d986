//! Vanishing queries for `π_{m+nα}` of the motivic sphere.
//!
//! The oracle only ever answers `Vanishes` (with a trace of the results
//! used) or `Unknown`; it never claims a group is nonzero.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::is_prime;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("exponential characteristic must be 1 or a prime, got {0}")]
    BadCharacteristic(u64),
    #[error("exponential characteristic 2 is excluded")]
    CharacteristicTwo,
    #[error("p-local queries need an odd prime, got {0}")]
    BadLocalPrime(u64),
    #[error("the local prime {0} equals the characteristic")]
    PrimeIsCharacteristic(u64),
    #[error("{0} requires positive characteristic")]
    NeedsPositiveCharacteristic(&'static str),
    #[error("stems table: {0}")]
    Stems(String),
}

/// What is known about the base field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum FieldClass {
    /// Any field of exponential characteristic `q ≠ 2`; the query is about
    /// the η-complete sphere.
    EtaComplete { q: u64 },
    NonrealChar0,
    /// Perfect, finite cohomological dimension, characteristic `q` odd.
    PositiveCharPerfectFiniteCd { q: u64 },
    /// `q = 1`.
    FormallyReal,
    Unspecified,
}

impl FieldClass {
    pub fn exponential_characteristic(&self) -> u64 {
        match self {
            FieldClass::EtaComplete { q } | FieldClass::PositiveCharPerfectFiniteCd { q } => *q,
            _ => 1,
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        match *self {
            FieldClass::EtaComplete { q } => check_q(q),
            FieldClass::PositiveCharPerfectFiniteCd { q } => {
                if q == 1 {
                    return Err(OracleError::NeedsPositiveCharacteristic("perfect finite-cd class"));
                }
                check_q(q)
            }
            _ => Ok(()),
        }
    }
}

fn check_q(q: u64) -> Result<(), OracleError> {
    if q == 2 {
        return Err(OracleError::CharacteristicTwo);
    }
    if q != 1 && !is_prime(q) {
        return Err(OracleError::BadCharacteristic(q));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Localization {
    Integral,
    PLocal { p: u64 },
}

// ---- stems -----------------------------------------------------------------

/// `π_m` of the topological sphere as a list of cyclic factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StemGroup {
    /// `Z`, at `m = 0`.
    Infinite,
    Finite(Vec<(u64, u32)>),
}

impl StemGroup {
    /// Part of the group prime to 2 is trivial.
    pub fn odd_part_trivial(&self) -> bool {
        match self {
            StemGroup::Infinite => false,
            StemGroup::Finite(f) => f.iter().all(|(p, _)| *p == 2),
        }
    }

    pub fn p_part_trivial(&self, p: u64) -> bool {
        match self {
            StemGroup::Infinite => false,
            StemGroup::Finite(f) => f.iter().all(|(q, _)| *q != p),
        }
    }
}

impl fmt::Display for StemGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StemGroup::Infinite => write!(f, "Z"),
            StemGroup::Finite(v) if v.is_empty() => write!(f, "0"),
            StemGroup::Finite(v) => {
                let parts: Vec<String> = v.iter().map(|(p, e)| format!("Z/{}", p.pow(*e))).collect();
                write!(f, "{}", parts.join(" ⊕ "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StemEntry {
    pub group: StemGroup,
    pub citation: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FactorsJson {
    Infinite(String),
    Finite(Vec<(u64, u32)>),
}

#[derive(Serialize, Deserialize)]
struct StemJson {
    m: i64,
    factors: FactorsJson,
    citation: String,
}

/// Table of topological stable stems; `m < 0` is implicitly trivial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StemTable {
    entries: BTreeMap<i64, StemEntry>,
}

const SEED_STEMS: &str = include_str!("../data/stems.json");

impl StemTable {
    pub fn seed() -> Self {
        Self::from_json(SEED_STEMS).expect("seed stems table is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, OracleError> {
        let rows: Vec<StemJson> = serde_json::from_str(text).map_err(|e| OracleError::Stems(e.to_string()))?;
        let mut entries = BTreeMap::new();
        for row in rows {
            if row.citation.trim().is_empty() {
                return Err(OracleError::Stems(format!("m={} has no citation", row.m)));
            }
            if row.m < 0 {
                return Err(OracleError::Stems(format!("m={} is negative", row.m)));
            }
            let group = match row.factors {
                FactorsJson::Infinite(s) if s == "Z" && row.m == 0 => StemGroup::Infinite,
                FactorsJson::Infinite(s) => {
                    return Err(OracleError::Stems(format!("m={}: factors {s:?} not allowed", row.m)))
                }
                FactorsJson::Finite(_) if row.m == 0 => {
                    return Err(OracleError::Stems("m=0 must be encoded as \"Z\"".into()))
                }
                FactorsJson::Finite(f) => {
                    if let Some((p, e)) = f.iter().find(|(p, e)| !is_prime(*p) || *e == 0) {
                        return Err(OracleError::Stems(format!("m={}: bad factor ({p}, {e})", row.m)));
                    }
                    StemGroup::Finite(f)
                }
            };
            let entry = StemEntry { group, citation: row.citation };
            if entries.insert(row.m, entry).is_some() {
                return Err(OracleError::Stems(format!("m={} listed twice", row.m)));
            }
        }
        Ok(StemTable { entries })
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<StemJson> = self
            .entries
            .iter()
            .map(|(m, e)| StemJson {
                m: *m,
                factors: match &e.group {
                    StemGroup::Infinite => FactorsJson::Infinite("Z".into()),
                    StemGroup::Finite(f) => FactorsJson::Finite(f.clone()),
                },
                citation: e.citation.clone(),
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("stems serialize")
    }

    pub fn get(&self, m: i64) -> Option<&StemEntry> {
        self.entries.get(&m)
    }

    pub fn m_max(&self) -> Option<i64> {
        self.entries.keys().next_back().copied()
    }

    /// Human-readable list of covered stems, e.g. `0-20, 61`.
    pub fn coverage(&self) -> String {
        let mut runs: Vec<(i64, i64)> = Vec::new();
        for m in self.entries.keys() {
            match runs.last_mut() {
                Some((_, hi)) if *hi + 1 == *m => *hi = *m,
                _ => runs.push((*m, *m)),
            }
        }
        let parts: Vec<String> = runs
            .iter()
            .map(|(lo, hi)| if lo == hi { lo.to_string() } else { format!("{lo}-{hi}") })
            .collect();
        if parts.is_empty() {
            "none".into()
        } else {
            parts.join(", ")
        }
    }
}

// ---- verdicts --------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Vanishes,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub theorem: String,
    pub statement: String,
    pub citation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub m: i64,
    pub n: i64,
    pub status: Status,
    pub trace: Vec<TraceStep>,
    pub note: Option<String>,
}

impl Verdict {
    pub fn vanishes(&self) -> bool {
        self.status == Status::Vanishes
    }
}

pub const KEY_ETA_COMPLETE: &str = "thm:main";
pub const KEY_PLOCAL: &str = "thm:plocal";
pub const KEY_CD_FINITE: &str = "thm:cdfinite";
pub const KEY_NONREAL: &str = "thm:integral0";
pub const KEY_FORMALLY_REAL: &str = "thm:integral1";
pub const KEY_ETA_ISO: &str = "thm:etainv";
pub const KEY_CONNECTIVITY: &str = "morel:connectivity";
pub const KEY_STEMS: &str = "stems-table";

const NAME_ETA_COMPLETE: &str = "vanishing for the eta-complete sphere";
const NAME_PLOCAL: &str = "vanishing for the eta-complete p-local sphere";
const NAME_CD_FINITE: &str = "eta-completeness of the sphere over perfect fields of finite cd";
const NAME_NONREAL: &str = "vanishing over nonreal fields";
const NAME_FORMALLY_REAL: &str = "vanishing over formally real fields";
const NAME_CONNECTIVITY: &str = "Morel's connectivity theorem";

fn step(theorem: &str, statement: String, citation: &str) -> TraceStep {
    TraceStep {
        theorem: theorem.into(),
        statement,
        citation: citation.into(),
    }
}

/// `m > 0`, `m ≡ 1, 2 (mod 4)` and `2n > max(3m + 5, 4m)`.
pub fn eta_complete_region(m: i64, n: i64) -> bool {
    m > 0 && matches!(m.rem_euclid(4), 1 | 2) && 2 * n > (3 * m + 5).max(4 * m)
}

/// `m ≥ 0` and `(p - 2)n > (p - 1)m`.
pub fn plocal_region(p: u64, m: i64, n: i64) -> bool {
    let p = p as i64;
    m >= 0 && (p - 2) * n > (p - 1) * m
}

fn eta_complete_steps(m: i64, n: i64) -> (bool, Vec<TraceStep>) {
    if m < 0 {
        return (true, vec![step(NAME_ETA_COMPLETE, format!("m = {m} < 0"), KEY_ETA_COMPLETE)]);
    }
    let bound = (3 * m + 5).max(4 * m);
    let holds = eta_complete_region(m, n);
    let statement = format!(
        "m = {m} > 0: {}; m ≡ {} (mod 4); 2n = {} {} max(3m+5, 4m) = {bound}",
        if m > 0 { "yes" } else { "no" },
        m.rem_euclid(4),
        2 * n,
        if 2 * n > bound { ">" } else { "≤" },
    );
    (holds, vec![step(NAME_ETA_COMPLETE, statement, KEY_ETA_COMPLETE)])
}

fn plocal_steps(p: u64, m: i64, n: i64) -> (bool, Vec<TraceStep>) {
    if m < 0 {
        return (true, vec![step(NAME_PLOCAL, format!("m = {m} < 0"), KEY_PLOCAL)]);
    }
    let lhs = (p as i64 - 2) * n;
    let rhs = (p as i64 - 1) * m;
    let holds = plocal_region(p, m, n);
    let statement = format!(
        "p = {p}, m = {m} ≥ 0; (p-2)n = {lhs} {} (p-1)m = {rhs}",
        if lhs > rhs { ">" } else { "≤" }
    );
    (holds, vec![step(NAME_PLOCAL, statement, KEY_PLOCAL)])
}

fn verdict(m: i64, n: i64, holds: bool, trace: Vec<TraceStep>, note: Option<String>) -> Verdict {
    Verdict {
        m,
        n,
        status: if holds { Status::Vanishes } else { Status::Unknown },
        trace,
        note,
    }
}

/// Integral η-complete sphere.
pub fn vanish_eta_complete(m: i64, n: i64) -> Verdict {
    let (holds, trace) = eta_complete_steps(m, n);
    verdict(m, n, holds, trace, None)
}

/// `p`-local η-complete sphere, `p` odd.
pub fn vanish_plocal(p: u64, m: i64, n: i64) -> Result<Verdict, OracleError> {
    if p == 2 || !is_prime(p) {
        return Err(OracleError::BadLocalPrime(p));
    }
    let (holds, trace) = plocal_steps(p, m, n);
    Ok(verdict(m, n, holds, trace, None))
}

fn region_steps(m: i64, n: i64, localization: Localization) -> (bool, Vec<TraceStep>) {
    match localization {
        Localization::Integral => eta_complete_steps(m, n),
        Localization::PLocal { p } => plocal_steps(p, m, n),
    }
}

fn q_note(q: u64) -> Option<String> {
    (q > 1).then(|| format!("exponential characteristic inverted: coefficients in Z[1/{q}]"))
}

/// Dispatches on the field class.
pub fn vanish(
    m: i64,
    n: i64,
    field: FieldClass,
    localization: Localization,
    stems: &StemTable,
) -> Result<Verdict, OracleError> {
    field.validate()?;
    let q = field.exponential_characteristic();
    if let Localization::PLocal { p } = localization {
        if p == 2 || !is_prime(p) {
            return Err(OracleError::BadLocalPrime(p));
        }
        if p == q {
            return Err(OracleError::PrimeIsCharacteristic(p));
        }
    }
    match field {
        FieldClass::EtaComplete { .. } => {
            let (holds, trace) = region_steps(m, n, localization);
            Ok(verdict(m, n, holds, trace, q_note(q)))
        }
        FieldClass::NonrealChar0 | FieldClass::PositiveCharPerfectFiniteCd { .. } => {
            let (holds, mut trace) = region_steps(m, n, localization);
            let mut steps = Vec::new();
            if let FieldClass::PositiveCharPerfectFiniteCd { q } = field {
                steps.push(step(
                    NAME_CD_FINITE,
                    format!("perfect field of characteristic {q} with finite cd: the sphere is eta-complete"),
                    KEY_CD_FINITE,
                ));
            }
            steps.push(step(
                NAME_NONREAL,
                "nonreal field: the eta-complete vanishing range applies to the sphere".into(),
                KEY_NONREAL,
            ));
            steps.append(&mut trace);
            Ok(verdict(m, n, holds, steps, q_note(q)))
        }
        FieldClass::FormallyReal => Ok(formally_real(m, n, localization, stems)),
        FieldClass::Unspecified => {
            if m < 0 {
                let trace = vec![step(NAME_CONNECTIVITY, format!("m = {m} < 0"), KEY_CONNECTIVITY)];
                Ok(verdict(m, n, true, trace, None))
            } else {
                let trace = vec![step(
                    NAME_CONNECTIVITY,
                    format!("m = {m} ≥ 0: no result applies without hypotheses on the field"),
                    KEY_CONNECTIVITY,
                )];
                Ok(verdict(m, n, false, trace, None))
            }
        }
    }
}

fn formally_real(m: i64, n: i64, localization: Localization, stems: &StemTable) -> Verdict {
    if m < 0 {
        let trace = vec![
            step(NAME_FORMALLY_REAL, format!("m = {m} < 0"), KEY_FORMALLY_REAL),
            step(NAME_CONNECTIVITY, format!("m = {m} < 0"), KEY_CONNECTIVITY),
        ];
        return verdict(m, n, true, trace, None);
    }
    let mut trace = vec![step(
        NAME_FORMALLY_REAL,
        "formally real field: vanishes where the eta-complete sphere vanishes and the topological stem condition holds"
            .into(),
        KEY_FORMALLY_REAL,
    )];
    if m == 0 {
        trace[0].statement = "m = 0: the formally real criterion needs m > 0".into();
        return verdict(m, n, false, trace, None);
    }
    let (region, mut region_trace) = region_steps(m, n, localization);
    trace.append(&mut region_trace);

    let coverage = format!("coverage: m ∈ {{{}}}", stems.coverage());
    let stem_ok = match stems.get(m) {
        None => {
            trace.push(step("topological stems", format!("π_{m} not listed: stems table exhausted ({coverage})"), KEY_STEMS));
            false
        }
        Some(entry) => {
            let (ok, condition) = match localization {
                Localization::Integral => (entry.group.odd_part_trivial(), "π_m[1/2] = 0".to_string()),
                Localization::PLocal { p } => (entry.group.p_part_trivial(p), format!("π_m localized at {p} = 0")),
            };
            trace.push(step(
                "topological stems",
                format!(
                    "π_{m} = {}: {condition} {} [{}] ({coverage})",
                    entry.group,
                    if ok { "holds" } else { "fails" },
                    entry.citation
                ),
                KEY_STEMS,
            ));
            ok
        }
    };
    verdict(m, n, region && stem_ok, trace, None)
}

/// Where `π_{m+nα}` of the sphere agrees with its η-inverted version.
pub fn eta_iso(m: i64, n: i64) -> bool {
    m < 0 || (m >= 0 && 2 * n > (3 * m + 5).max(4 * m)) || (m == 0 && n > 0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContractionFact {
    pub k: i64,
    pub m: i64,
    pub n: i64,
    pub statement: String,
    pub trace: Vec<TraceStep>,
}

/// If `π_{m+nα}` vanishes, so does the `k`-fold contraction of
/// `π_{m+(n-k)α}` for every `k ≥ 1`.
pub fn contraction_facts(
    m: i64,
    n: i64,
    field: FieldClass,
    localization: Localization,
    stems: &StemTable,
    k_max: i64,
) -> Result<Vec<ContractionFact>, OracleError> {
    let parent = vanish(m, n, field, localization, stems)?;
    if !parent.vanishes() {
        return Ok(Vec::new());
    }
    Ok((1..=k_max)
        .map(|k| ContractionFact {
            k,
            m,
            n: n - k,
            statement: format!("ω^{k} applied to π_{{{m}+{}α}} is 0", n - k),
            trace: parent.trace.clone(),
        })
        .collect())
}
