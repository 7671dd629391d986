//! The reduced cobar complex of the BP Hopf algebroid and its cohomology
//! `E2^{s,t}(BP(p)) = Ext^{s,t}`, plus the assembly of `E2^{s,t}(MU)` from
//! the per-prime tables.
//!
//! A cochain in `C^s` at internal degree `t` is a `Z`-combination of
//! `v^K [t^{J_1} | ... | t^{J_s}]` with every `J_i ≠ 0`. The differential is
//!
//! ```text
//! d(a[γ_1|...|γ_s]) = [η_R(a) - a | γ_1 | ... | γ_s]
//!                   + Σ_i (-1)^i a[γ_1 | ... | Δ̄(γ_i) | ... | γ_s]
//! ```
//!
//! where a left coefficient produced inside a bar word is moved to the front
//! through `γ ⊗ c x = γ η_R(c) ⊗ x`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bp::{generator_count, generator_degree, BpError, BpPresentation, GradedPoly};
use crate::linalg::{chain_homology, is_prime, AbelianPGroup, LinalgError, SparseIntMatrix};

pub const GENERATOR_SCHEME: &str = "hazewinkel";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CobarError {
    #[error(transparent)]
    Bp(#[from] BpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("d∘d ≠ 0 at p={p}, (s,t)=({s},{t}): d(d({element})) has coefficient {value} on {target}")]
    DSquaredNonzero {
        p: u64,
        s: usize,
        t: u32,
        element: String,
        target: String,
        value: BigInt,
    },
    #[error("differential of {element} left the reduced cobar complex (term {term})")]
    NotReduced { element: String, term: String },
    #[error("(s,t)=({s},{t}) lies outside the computed window s≤{s_max}, t≤{t_max} at p={p}")]
    OutsideWindow {
        p: u64,
        s: usize,
        t: u32,
        s_max: usize,
        t_max: u32,
    },
    #[error("E2^{{{s},{t}}} at p={p} has free rank {rank}; only (0,0) may be infinite")]
    InfiniteGroup { p: u64, s: usize, t: u32, rank: usize },
    #[error("no Ext table for p={p} covering (s,t)=({s},{t}); run `ext --prime {p} --smax {s} --tmax {t}`")]
    MissingPrime { p: u64, s: usize, t: u32 },
    #[error("window bounds must be positive")]
    EmptyWindow,
    #[error("cache file is corrupt: {0}")]
    CorruptCache(String),
    #[error("cache I/O failed: {0}")]
    Io(String),
}

/// `v^K [t^{J_1} | ... | t^{J_s}]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CobarBasisElement {
    pub s: usize,
    pub t: u32,
    pub coefficient: Vec<u16>,
    pub bar: Vec<Vec<u16>>,
}

impl CobarBasisElement {
    /// Concatenated exponent sequence; the sort key for the basis.
    pub fn key(&self) -> Vec<u16> {
        let mut k = self.coefficient.clone();
        for f in &self.bar {
            k.extend_from_slice(f);
        }
        k
    }
}

fn fmt_mono(f: &mut fmt::Formatter<'_>, name: &str, m: &[u16]) -> fmt::Result {
    let mut first = true;
    for (i, e) in m.iter().enumerate() {
        if *e == 0 {
            continue;
        }
        if !first {
            write!(f, " ")?;
        }
        first = false;
        if *e == 1 {
            write!(f, "{name}{}", i + 1)?;
        } else {
            write!(f, "{name}{}^{e}", i + 1)?;
        }
    }
    if first {
        write!(f, "1")?;
    }
    Ok(())
}

impl fmt::Display for CobarBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficient.iter().any(|e| *e > 0) || self.bar.is_empty() {
            fmt_mono(f, "v", &self.coefficient)?;
        }
        if !self.bar.is_empty() {
            write!(f, "[")?;
            for (i, g) in self.bar.iter().enumerate() {
                if i > 0 {
                    write!(f, "|")?;
                }
                fmt_mono(f, "t", g)?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// Exponent vectors of total degree exactly `degree`, in ascending order.
fn monomials_of_degree(p: u64, gens: usize, degree: u32) -> Vec<Vec<u16>> {
    fn go(p: u64, i: usize, gens: usize, remaining: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if i == gens {
            if remaining == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let d = generator_degree(p, i + 1);
        let mut e = 0u32;
        while e * d <= remaining {
            cur.push(e as u16);
            go(p, i + 1, gens, remaining - e * d, cur, out);
            cur.pop();
            e += 1;
        }
    }
    let mut out = Vec::new();
    go(p, 0, gens, degree, &mut Vec::new(), &mut out);
    out.sort();
    out
}

type RightUnitTerms = Vec<(Vec<u16>, Vec<u16>, BigInt)>;
type CoproductTerms = Vec<(Vec<u16>, Vec<u16>, Vec<u16>, BigInt)>;

/// The reduced cobar complex of `BP_*BP` in internal degrees `t ≤ t_max`,
/// with the structure maps flattened to integer tables.
#[derive(Clone, Debug)]
pub struct CobarComplex {
    prime: u64,
    t_max: u32,
    monomials: Vec<Vec<Vec<u16>>>,
    right_unit: HashMap<Vec<u16>, RightUnitTerms>,
    reduced_coproduct: HashMap<Vec<u16>, CoproductTerms>,
}

fn to_integer_terms(x: &GradedPoly, what: &str) -> Result<Vec<(Vec<u16>, BigInt)>, CobarError> {
    x.terms()
        .map(|(m, c)| {
            if !c.is_integral() {
                return Err(CobarError::Bp(BpError::NonIntegral(what.to_string())));
            }
            Ok((m.clone(), c.numerator().clone()))
        })
        .collect()
}

impl CobarComplex {
    pub fn new(prime: u64, t_max: u32) -> Result<Self, CobarError> {
        if !is_prime(prime) {
            return Err(CobarError::NotPrime(prime));
        }
        let bound = (t_max + t_max % 2).max(2);
        let bp = BpPresentation::new(prime, bound)?;
        let gens = generator_count(prime, bound);
        debug_assert_eq!(gens, bp.gens());
        let monomials: Vec<Vec<Vec<u16>>> = (0..=t_max)
            .map(|d| monomials_of_degree(prime, gens, d))
            .collect();

        let mut right_unit = HashMap::new();
        let mut reduced_coproduct = HashMap::new();
        for degree_monos in &monomials {
            for m in degree_monos {
                let v = GradedPoly::from_terms(prime, gens, 0, [(m.clone(), crate::bp::PLocal::integer(1))]);
                let eta = bp.right_unit(&v)?;
                let terms = to_integer_terms(&eta, "η_R")?
                    .into_iter()
                    .map(|(mm, c)| (mm[..gens].to_vec(), mm[gens..].to_vec(), c))
                    .collect();
                right_unit.insert(m.clone(), terms);

                let mut tm = vec![0u16; gens];
                tm.extend_from_slice(m);
                let t = GradedPoly::from_terms(prime, gens, 1, [(tm, crate::bp::PLocal::integer(1))]);
                let delta = bp.coproduct(&t)?;
                let terms: CoproductTerms = to_integer_terms(&delta.0, "Δ")?
                    .into_iter()
                    .map(|(mm, c)| {
                        (
                            mm[..gens].to_vec(),
                            mm[gens..2 * gens].to_vec(),
                            mm[2 * gens..].to_vec(),
                            c,
                        )
                    })
                    .filter(|(_, x, y, _)| x.iter().any(|e| *e > 0) && y.iter().any(|e| *e > 0))
                    .collect();
                reduced_coproduct.insert(m.clone(), terms);
            }
        }
        Ok(CobarComplex {
            prime,
            t_max,
            monomials,
            right_unit,
            reduced_coproduct,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn t_max(&self) -> u32 {
        self.t_max
    }

    fn check_degree(&self, s: usize, t: u32) -> Result<(), CobarError> {
        if t > self.t_max {
            return Err(CobarError::OutsideWindow {
                p: self.prime,
                s,
                t,
                s_max: usize::MAX,
                t_max: self.t_max,
            });
        }
        Ok(())
    }

    /// Complete, canonically ordered basis of `C^s` in internal degree `t`.
    pub fn basis(&self, s: usize, t: u32) -> Result<Vec<CobarBasisElement>, CobarError> {
        self.check_degree(s, t)?;
        let mut out = Vec::new();
        let mut bar = Vec::with_capacity(s);
        for a in 0..=t {
            for coefficient in &self.monomials[a as usize] {
                self.fill_bar(s, t, t - a, coefficient, &mut bar, &mut out);
            }
        }
        out.sort_by_key(CobarBasisElement::key);
        Ok(out)
    }

    fn fill_bar(
        &self,
        s: usize,
        t: u32,
        remaining: u32,
        coefficient: &[u16],
        bar: &mut Vec<Vec<u16>>,
        out: &mut Vec<CobarBasisElement>,
    ) {
        if bar.len() == s {
            if remaining == 0 {
                out.push(CobarBasisElement {
                    s,
                    t,
                    coefficient: coefficient.to_vec(),
                    bar: bar.clone(),
                });
            }
            return;
        }
        let left = (s - bar.len() - 1) as u32;
        // every remaining factor needs degree at least |t_1|
        let min = generator_degree(self.prime, 1);
        for d in min..=remaining {
            if remaining - d < left * min {
                break;
            }
            for m in &self.monomials[d as usize] {
                bar.push(m.clone());
                self.fill_bar(s, t, remaining - d, coefficient, bar, out);
                bar.pop();
            }
        }
    }

    /// Moves a left coefficient sitting in front of bar factor `pos` to the
    /// front of the word.
    fn push_left(&self, coefficient: Vec<u16>, word: Vec<Vec<u16>>, pos: usize) -> Vec<(BigInt, Vec<u16>, Vec<Vec<u16>>)> {
        if pos == 0 || coefficient.iter().all(|e| *e == 0) {
            return vec![(BigInt::one(), coefficient, word)];
        }
        let mut out = Vec::new();
        for (v, t, c) in &self.right_unit[&coefficient] {
            let mut w = word.clone();
            for (e, x) in w[pos - 1].iter_mut().zip(t) {
                *e += x;
            }
            for (c2, v2, w2) in self.push_left(v.clone(), w, pos - 1) {
                out.push((c * c2, v2, w2));
            }
        }
        out
    }

    /// Image of one basis element as `key -> coefficient` in `C^{s+1}`.
    fn differential_of(&self, x: &CobarBasisElement) -> Result<BTreeMap<Vec<u16>, BigInt>, CobarError> {
        let mut acc: BTreeMap<Vec<u16>, BigInt> = BTreeMap::new();
        let mut add = |coefficient: &[u16], bar: &[Vec<u16>], c: BigInt| -> Result<(), CobarError> {
            if bar.iter().any(|g| g.iter().all(|e| *e == 0)) {
                return Err(CobarError::NotReduced {
                    element: x.to_string(),
                    term: format!("{bar:?}"),
                });
            }
            let mut key = coefficient.to_vec();
            for g in bar {
                key.extend_from_slice(g);
            }
            let slot = acc.entry(key).or_insert_with(BigInt::zero);
            *slot += c;
            Ok(())
        };

        for (v, t, c) in &self.right_unit[&x.coefficient] {
            if t.iter().all(|e| *e == 0) {
                continue;
            }
            let mut bar = Vec::with_capacity(x.s + 1);
            bar.push(t.clone());
            bar.extend(x.bar.iter().cloned());
            add(v, &bar, c.clone())?;
        }

        for i in 0..x.s {
            let sign: BigInt = if i % 2 == 0 { -BigInt::one() } else { BigInt::one() };
            for (v, left, right, c) in &self.reduced_coproduct[&x.bar[i]] {
                let mut word = Vec::with_capacity(x.s + 1);
                word.extend(x.bar[..i].iter().cloned());
                word.push(left.clone());
                word.push(right.clone());
                word.extend(x.bar[i + 1..].iter().cloned());
                for (c2, v2, w2) in self.push_left(v.clone(), word, i) {
                    let coefficient: Vec<u16> = x.coefficient.iter().zip(&v2).map(|(a, b)| a + b).collect();
                    add(&coefficient, &w2, &sign * c * c2)?;
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(acc)
    }

    /// Matrix of `d: C^s → C^{s+1}` at internal degree `t`; column `j` is the
    /// image of the `j`-th basis element.
    pub fn differential(&self, s: usize, t: u32) -> Result<SparseIntMatrix, CobarError> {
        let source = self.basis(s, t)?;
        let target = self.basis(s + 1, t)?;
        self.differential_between(&source, &target)
    }

    fn differential_between(
        &self,
        source: &[CobarBasisElement],
        target: &[CobarBasisElement],
    ) -> Result<SparseIntMatrix, CobarError> {
        let index: HashMap<Vec<u16>, usize> = target.iter().enumerate().map(|(i, b)| (b.key(), i)).collect();
        let mut map = BTreeMap::new();
        for (j, x) in source.iter().enumerate() {
            for (key, c) in self.differential_of(x)? {
                let i = *index.get(&key).ok_or_else(|| CobarError::NotReduced {
                    element: x.to_string(),
                    term: format!("{key:?}"),
                })?;
                map.insert((i, j), c);
            }
        }
        Ok(SparseIntMatrix::from_map(target.len(), source.len(), map)?)
    }

    /// All bases `C^0..=C^{s_top}` and differentials `d_0..d_{s_top-1}` at `t`.
    pub fn column(&self, s_top: usize, t: u32) -> Result<CobarColumn, CobarError> {
        let bases = (0..=s_top).map(|s| self.basis(s, t)).collect::<Result<Vec<_>, _>>()?;
        let differentials = (0..s_top)
            .map(|s| self.differential_between(&bases[s], &bases[s + 1]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CobarColumn {
            prime: self.prime,
            t,
            bases,
            differentials,
        })
    }

    /// `E2^{s,t}(BP(p))`, the p-primary cobar cohomology.
    pub fn ext(&self, s: usize, t: u32) -> Result<AbelianPGroup, CobarError> {
        self.column(s + 1, t)?.ext(s)
    }
}

/// One internal degree's worth of the cobar complex.
#[derive(Clone, Debug)]
pub struct CobarColumn {
    prime: u64,
    t: u32,
    bases: Vec<Vec<CobarBasisElement>>,
    differentials: Vec<SparseIntMatrix>,
}

impl CobarColumn {
    pub fn basis(&self, s: usize) -> &[CobarBasisElement] {
        &self.bases[s]
    }

    pub fn differential(&self, s: usize) -> &SparseIntMatrix {
        &self.differentials[s]
    }

    /// Exact check that `d_{s+1} ∘ d_s = 0`, naming the first failure.
    pub fn check_d_squared(&self, s: usize) -> Result<(), CobarError> {
        let composite = self.differentials[s + 1].mul(&self.differentials[s])?;
        if let Some((row, col, value)) = composite.entries().first() {
            return Err(CobarError::DSquaredNonzero {
                p: self.prime,
                s,
                t: self.t,
                element: self.bases[s][*col].to_string(),
                target: self.bases[s + 2][*row].to_string(),
                value: value.clone(),
            });
        }
        Ok(())
    }

    pub fn ext(&self, s: usize) -> Result<AbelianPGroup, CobarError> {
        assert!(s < self.differentials.len(), "column does not reach s+1");
        let d_out = &self.differentials[s];
        let d_in = if s == 0 {
            SparseIntMatrix::zero(self.bases[0].len(), 0)
        } else {
            self.check_d_squared(s - 1)?;
            self.differentials[s - 1].clone()
        };
        Ok(chain_homology(&d_in, d_out, self.prime)?)
    }
}

pub fn cobar_basis(p: u64, s: usize, t: u32) -> Result<Vec<CobarBasisElement>, CobarError> {
    CobarComplex::new(p, t)?.basis(s, t)
}

pub fn cobar_d(p: u64, s: usize, t: u32) -> Result<SparseIntMatrix, CobarError> {
    CobarComplex::new(p, t)?.differential(s, t)
}

pub fn ext_bp(p: u64, s: usize, t: u32) -> Result<AbelianPGroup, CobarError> {
    CobarComplex::new(p, t)?.ext(s, t)
}

/// A window of computed `E2^{s,t}(BP(p))`, `0 ≤ s ≤ s_max`, `0 ≤ t ≤ t_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtTable {
    pub prime: u64,
    pub s_max: usize,
    pub t_max: u32,
    pub generator_scheme: String,
    pub code_version: String,
    entries: BTreeMap<(usize, u32), AbelianPGroup>,
}

impl ExtTable {
    pub fn covers(&self, s: usize, t: u32) -> bool {
        s <= self.s_max && t <= self.t_max
    }

    pub fn get(&self, s: usize, t: u32) -> Result<&AbelianPGroup, CobarError> {
        if !self.covers(s, t) {
            return Err(CobarError::OutsideWindow {
                p: self.prime,
                s,
                t,
                s_max: self.s_max,
                t_max: self.t_max,
            });
        }
        Ok(&self.entries[&(s, t)])
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, u32), &AbelianPGroup)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = ((usize, u32), &AbelianPGroup)> {
        self.entries().filter(|(_, g)| !g.is_trivial())
    }
}

/// Largest `s` with `2s(p-1) ≤ t_max`: every `s` above it is below the
/// vanishing line in the whole window.
pub fn full_column_s_max(p: u64, t_max: u32) -> usize {
    (t_max as u64 / (2 * (p - 1))) as usize
}

/// Computes the whole window, asserting `d∘d = 0` throughout and that every
/// entry other than `(0,0)` is finite.
pub fn ext_table(p: u64, s_max: usize, t_max: u32) -> Result<ExtTable, CobarError> {
    if s_max == 0 && t_max == 0 {
        return Err(CobarError::EmptyWindow);
    }
    let complex = CobarComplex::new(p, t_max)?;
    let degrees: Vec<u32> = (0..=t_max).collect();
    let per_degree = |t: u32| -> Result<Vec<((usize, u32), AbelianPGroup)>, CobarError> {
        let column = complex.column(s_max + 1, t)?;
        let mut out = Vec::with_capacity(s_max + 1);
        for s in 0..=s_max {
            if s + 2 <= s_max + 1 {
                column.check_d_squared(s)?;
            }
            let g = column.ext(s)?;
            if (s, t) != (0, 0) && !g.is_finite() {
                return Err(CobarError::InfiniteGroup {
                    p,
                    s,
                    t,
                    rank: g.free_rank(),
                });
            }
            out.push(((s, t), g));
        }
        Ok(out)
    };

    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        degrees.par_iter().map(|t| per_degree(*t)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = degrees.iter().map(|t| per_degree(*t)).collect();

    let mut entries = BTreeMap::new();
    for r in results {
        entries.extend(r?);
    }
    Ok(ExtTable {
        prime: p,
        s_max,
        t_max,
        generator_scheme: GENERATOR_SCHEME.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        entries,
    })
}

// ---- cache file ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    s: String,
    t: String,
    free_rank: String,
    torsion: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct CachePayload {
    prime: String,
    s_max: String,
    t_max: String,
    generator_scheme: String,
    code_version: String,
    entries: Vec<CacheEntry>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    prime: String,
    s_max: String,
    t_max: String,
    generator_scheme: String,
    code_version: String,
    entries: Vec<CacheEntry>,
    checksum: String,
}

fn payload_checksum(payload: &CachePayload) -> String {
    let bytes = serde_json::to_vec(payload).expect("cache payload serializes");
    hex::encode(Sha256::digest(bytes))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CobarError> {
    s.parse()
        .map_err(|_| CobarError::CorruptCache(format!("bad {what}: {s:?}")))
}

impl ExtTable {
    /// Cache JSON: stable key order, integers as decimal strings, and a
    /// SHA-256 checksum over the compact serialization of everything else.
    pub fn to_cache_json(&self) -> String {
        let entries = self
            .entries
            .iter()
            .map(|((s, t), g)| CacheEntry {
                s: s.to_string(),
                t: t.to_string(),
                free_rank: g.free_rank().to_string(),
                torsion: g.torsion().iter().map(|x| x.to_string()).collect(),
            })
            .collect();
        let payload = CachePayload {
            prime: self.prime.to_string(),
            s_max: self.s_max.to_string(),
            t_max: self.t_max.to_string(),
            generator_scheme: self.generator_scheme.clone(),
            code_version: self.code_version.clone(),
            entries,
        };
        let checksum = payload_checksum(&payload);
        let file = CacheFile {
            prime: payload.prime,
            s_max: payload.s_max,
            t_max: payload.t_max,
            generator_scheme: payload.generator_scheme,
            code_version: payload.code_version,
            entries: payload.entries,
            checksum,
        };
        let mut out = serde_json::to_string_pretty(&file).expect("cache file serializes");
        out.push('\n');
        out
    }

    pub fn from_cache_json(text: &str) -> Result<ExtTable, CobarError> {
        let file: CacheFile = serde_json::from_str(text).map_err(|e| CobarError::CorruptCache(e.to_string()))?;
        let payload = CachePayload {
            prime: file.prime,
            s_max: file.s_max,
            t_max: file.t_max,
            generator_scheme: file.generator_scheme,
            code_version: file.code_version,
            entries: file.entries,
        };
        if payload_checksum(&payload) != file.checksum {
            return Err(CobarError::CorruptCache("checksum mismatch".into()));
        }
        let prime: u64 = parse_num(&payload.prime, "prime")?;
        let s_max: usize = parse_num(&payload.s_max, "s_max")?;
        let t_max: u32 = parse_num(&payload.t_max, "t_max")?;
        let mut entries = BTreeMap::new();
        for e in &payload.entries {
            let torsion = e
                .torsion
                .iter()
                .map(|x| parse_num::<BigUint>(x, "torsion order"))
                .collect::<Result<Vec<_>, _>>()?;
            let g = AbelianPGroup::new(parse_num(&e.free_rank, "free rank")?, torsion)?;
            entries.insert((parse_num(&e.s, "s")?, parse_num(&e.t, "t")?), g);
        }
        let complete = (0..=s_max).all(|s| (0..=t_max).all(|t| entries.contains_key(&(s, t))));
        if !complete || entries.len() != (s_max + 1) * (t_max as usize + 1) {
            return Err(CobarError::CorruptCache("entries do not fill the window".into()));
        }
        Ok(ExtTable {
            prime,
            s_max,
            t_max,
            generator_scheme: payload.generator_scheme,
            code_version: payload.code_version,
            entries,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Computed,
    /// The file existed but failed validation and was recomputed.
    Repaired,
}

pub fn cache_file_name(p: u64, s_max: usize, t_max: u32) -> String {
    format!("ext-p{p}-s{s_max}-t{t_max}.json")
}

#[cfg(feature = "cache")]
mod disk {
    use std::io::Write;
    use std::path::Path;

    use super::*;

    fn io(e: impl std::fmt::Display) -> CobarError {
        CobarError::Io(e.to_string())
    }

    pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CobarError> {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(contents.as_bytes()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(io)?;
        Ok(())
    }

    fn matches_request(table: &ExtTable, p: u64, s_max: usize, t_max: u32) -> bool {
        table.prime == p
            && table.s_max == s_max
            && table.t_max == t_max
            && table.generator_scheme == GENERATOR_SCHEME
            && table.code_version == env!("CARGO_PKG_VERSION")
    }

    /// Loads the table for exactly this window from `path`, or computes and
    /// writes it.
    pub fn ext_table_at(p: u64, s_max: usize, t_max: u32, path: &Path) -> Result<(ExtTable, CacheStatus), CobarError> {
        let mut status = CacheStatus::Computed;
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(io)?;
            match ExtTable::from_cache_json(&text) {
                Ok(table) if matches_request(&table, p, s_max, t_max) => return Ok((table, CacheStatus::Hit)),
                Ok(_) | Err(_) => {
                    log::warn!("discarding invalid cache file {}", path.display());
                    status = CacheStatus::Repaired;
                }
            }
        }
        let table = ext_table(p, s_max, t_max)?;
        write_atomic(path, &table.to_cache_json())?;
        Ok((table, status))
    }

    pub fn ext_table_cached(p: u64, s_max: usize, t_max: u32, dir: &Path) -> Result<(ExtTable, CacheStatus), CobarError> {
        ext_table_at(p, s_max, t_max, &dir.join(cache_file_name(p, s_max, t_max)))
    }

    /// Every valid cached table for `p` in `dir`, ordered by window.
    pub fn cached_tables(dir: &Path, p: u64) -> Vec<ExtTable> {
        let prefix = format!("ext-p{p}-");
        let mut out = Vec::new();
        let Ok(read) = std::fs::read_dir(dir) else { return out };
        for entry in read.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            if !name.starts_with(&prefix) || !name.ends_with(".json") {
                continue;
            }
            let Ok(text) = std::fs::read_to_string(entry.path()) else { continue };
            match ExtTable::from_cache_json(&text) {
                Ok(table) if table.prime == p && table.generator_scheme == GENERATOR_SCHEME => out.push(table),
                Ok(_) => {}
                Err(e) => log::warn!("ignoring {}: {e}", entry.path().display()),
            }
        }
        out.sort_by_key(|t| (t.t_max, t.s_max));
        out
    }

    /// Smallest valid cached table for `p` whose window covers `(s, t)`.
    pub fn find_covering(dir: &Path, p: u64, s: usize, t: u32) -> Option<ExtTable> {
        cached_tables(dir, p)
            .into_iter()
            .filter(|table| table.covers(s, t))
            .min_by_key(|table| (table.s_max, table.t_max))
    }
}

#[cfg(feature = "cache")]
pub use disk::{cached_tables, ext_table_at, ext_table_cached, find_covering, write_atomic};

// ---- MU --------------------------------------------------------------------

/// Per-prime Ext tables from which `E2(MU)` is assembled.
#[derive(Clone, Debug, Default)]
pub struct ExtAtlas {
    tables: BTreeMap<u64, ExtTable>,
}

/// Primes `p` with `2s(p-1) ≤ t`: the only ones that can contribute at `(s,t)`, `s > 0`.
pub fn contributing_primes(s: usize, t: u32) -> Vec<u64> {
    if s == 0 {
        return Vec::new();
    }
    let limit = t as u64 / (2 * s as u64) + 1;
    (2..=limit).filter(|p| is_prime(*p)).collect()
}

impl ExtAtlas {
    pub fn new(tables: impl IntoIterator<Item = ExtTable>) -> Self {
        ExtAtlas {
            tables: tables.into_iter().map(|t| (t.prime, t)).collect(),
        }
    }

    /// Full-column tables for every prime that can contribute below `t_max`.
    pub fn compute(t_max: u32) -> Result<Self, CobarError> {
        let tables = contributing_primes(1, t_max)
            .into_iter()
            .map(|p| ext_table(p, full_column_s_max(p, t_max), t_max))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(tables))
    }

    pub fn insert(&mut self, table: ExtTable) {
        self.tables.insert(table.prime, table);
    }

    pub fn table(&self, p: u64) -> Option<&ExtTable> {
        self.tables.get(&p)
    }

    pub fn tables(&self) -> impl Iterator<Item = &ExtTable> {
        self.tables.values()
    }

    /// Largest `t` such that every `E2^{s,t'}(MU)` with `t' ≤ t` is available.
    pub fn mu_t_max(&self) -> u32 {
        let mut t = 0u32;
        loop {
            let next = t + 1;
            if next % 2 == 0 && !(1..=next as usize / 2).all(|s| self.covers_mu(s, next)) {
                return t;
            }
            t = next;
        }
    }

    fn covers_mu(&self, s: usize, t: u32) -> bool {
        contributing_primes(s, t)
            .iter()
            .all(|p| self.tables.get(p).is_some_and(|tab| tab.covers(s, t)))
    }

    pub fn ext_bp(&self, p: u64, s: usize, t: u32) -> Result<AbelianPGroup, CobarError> {
        let table = self.tables.get(&p).ok_or(CobarError::MissingPrime { p, s, t })?;
        table.get(s, t).cloned()
    }

    /// `E2^{s,t}(MU)`: `Z` at `(0,0)`, zero elsewhere on `s = 0` and for odd
    /// `t`, and for `s > 0` the direct sum of the contributing `p`-primary
    /// tables.
    pub fn ext_mu(&self, s: usize, t: u32) -> Result<AbelianPGroup, CobarError> {
        if t % 2 == 1 {
            return Ok(AbelianPGroup::zero());
        }
        if s == 0 {
            return Ok(if t == 0 { AbelianPGroup::free(1) } else { AbelianPGroup::zero() });
        }
        let mut sum = AbelianPGroup::zero();
        for p in contributing_primes(s, t) {
            let table = self.tables.get(&p).ok_or(CobarError::MissingPrime { p, s, t })?;
            if !table.covers(s, t) {
                return Err(CobarError::MissingPrime { p, s, t });
            }
            sum = sum.direct_sum(table.get(s, t)?);
        }
        Ok(sum)
    }
}
