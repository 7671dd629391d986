//! The p-typical Brown-Peterson Hopf algebroid `(BP_*, BP_*BP)` with
//! Hazewinkel generators, truncated at a degree bound.
//!
//! `BP_* = Z_(p)[v_1, v_2, ...]` and `BP_*BP = BP_*[t_1, t_2, ...]` with
//! `|v_i| = |t_i| = 2(p^i - 1)`. Everything is derived from the logarithm
//! coefficients `λ_n`:
//!
//! * `p λ_n = Σ_{0≤i<n} λ_i v_{n-i}^{p^i}` (Hazewinkel, `λ_0 = 1`)
//! * `η_R(λ_n) = Σ_{i+j=n} λ_i t_j^{p^i}`
//! * `Σ_{i+j=n} λ_i Δ(t_j)^{p^i} = Σ_{i+j+k=n} λ_i t_j^{p^i} ⊗ t_k^{p^{i+j}}`
//!
//! Rational coefficients only ever have `p`-power denominators, which the
//! [`PLocal`] type enforces, so integrality is a syntactic check.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Pow, Signed, Zero};
use thiserror::Error;

use crate::linalg::is_prime;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BpError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("degree bound must be an even integer >= 2, got {0}")]
    BadDegreeBound(u32),
    #[error("element of degree {degree} exceeds the degree bound {bound}")]
    BeyondBound { degree: u32, bound: u32 },
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("expected an element of {expected}, got one with {found} t-blocks")]
    WrongShape { expected: &'static str, found: usize },
    #[error("non-integral coefficient in {0}")]
    NonIntegral(String),
}

/// A rational number `num / p^den_exp`, reduced.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PLocal {
    num: BigInt,
    den_exp: u32,
}

impl PLocal {
    pub fn integer(n: impl Into<BigInt>) -> Self {
        PLocal {
            num: n.into(),
            den_exp: 0,
        }
    }

    /// `num / p^den_exp`, reduced.
    pub fn new(num: impl Into<BigInt>, den_exp: u32, p: u64) -> Self {
        PLocal {
            num: num.into(),
            den_exp,
        }
        .reduce(&BigInt::from(p))
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn denominator_exponent(&self) -> u32 {
        self.den_exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integral(&self) -> bool {
        self.den_exp == 0
    }

    fn reduce(mut self, p: &BigInt) -> Self {
        if self.num.is_zero() {
            self.den_exp = 0;
            return self;
        }
        while self.den_exp > 0 && self.num.is_multiple_of(p) {
            self.num /= p;
            self.den_exp -= 1;
        }
        self
    }

    fn add(&self, other: &PLocal, p: &BigInt) -> PLocal {
        let e = self.den_exp.max(other.den_exp);
        let a = &self.num * p.pow(e - self.den_exp);
        let b = &other.num * p.pow(e - other.den_exp);
        PLocal { num: a + b, den_exp: e }.reduce(p)
    }

    fn mul(&self, other: &PLocal, p: &BigInt) -> PLocal {
        PLocal {
            num: &self.num * &other.num,
            den_exp: self.den_exp + other.den_exp,
        }
        .reduce(p)
    }

    fn neg(&self) -> PLocal {
        PLocal {
            num: -self.num.clone(),
            den_exp: self.den_exp,
        }
    }

    fn div_p(&self, p: &BigInt) -> PLocal {
        PLocal {
            num: self.num.clone(),
            den_exp: self.den_exp + 1,
        }
        .reduce(p)
    }
}

/// Exponent vector over `blocks + 1` families of `gens` generators each:
/// block 0 holds the `v_i`, block `b ≥ 1` the `b`-th tensor factor's `t_i`.
pub type Monomial = Vec<u16>;

/// A polynomial in `v_i` and up to several families of `t_i` with
/// p-local rational coefficients.
///
/// `blocks = 0` is `BP_*`, `blocks = 1` is `BP_*BP`, and `blocks = k` is the
/// k-fold tensor power over `BP_*` with every coefficient gathered on the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPoly {
    prime: u64,
    gens: usize,
    blocks: usize,
    terms: BTreeMap<Monomial, PLocal>,
}

/// An element of `BP_*BP ⊗_{BP_*} BP_*BP`: left coefficient, left `t`-monomial,
/// right `t`-monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorPoly(pub GradedPoly);

pub fn generator_degree(p: u64, i: usize) -> u32 {
    2 * (p.pow(i as u32) as u32 - 1)
}

impl GradedPoly {
    pub fn zero(prime: u64, gens: usize, blocks: usize) -> Self {
        GradedPoly {
            prime,
            gens,
            blocks,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(prime: u64, gens: usize, blocks: usize, c: PLocal) -> Self {
        let mut out = Self::zero(prime, gens, blocks);
        if !c.is_zero() {
            out.terms.insert(vec![0; gens * (blocks + 1)], c);
        }
        out
    }

    pub fn one(prime: u64, gens: usize, blocks: usize) -> Self {
        Self::constant(prime, gens, blocks, PLocal::integer(1))
    }

    /// The generator with 1-based `index` in `block` (0 = `v`, 1.. = `t`).
    pub fn generator(prime: u64, gens: usize, blocks: usize, block: usize, index: usize) -> Self {
        assert!(block <= blocks && (1..=gens).contains(&index));
        let mut mono = vec![0; gens * (blocks + 1)];
        mono[block * gens + index - 1] = 1;
        let mut out = Self::zero(prime, gens, blocks);
        out.terms.insert(mono, PLocal::integer(1));
        out
    }

    pub fn from_terms(
        prime: u64,
        gens: usize,
        blocks: usize,
        terms: impl IntoIterator<Item = (Monomial, PLocal)>,
    ) -> Self {
        let mut out = Self::zero(prime, gens, blocks);
        for (m, c) in terms {
            assert_eq!(m.len(), gens * (blocks + 1));
            out.add_term(m, &c);
        }
        out
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &PLocal)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(PLocal::is_integral)
    }

    fn p_big(&self) -> BigInt {
        BigInt::from(self.prime)
    }

    pub fn monomial_degree(&self, m: &[u16]) -> u32 {
        m.iter()
            .enumerate()
            .map(|(k, e)| *e as u32 * generator_degree(self.prime, k % self.gens + 1))
            .sum()
    }

    /// The common degree of all terms; `Ok(0)` for zero.
    pub fn degree(&self) -> Result<u32, BpError> {
        let mut degrees = self.terms.keys().map(|m| self.monomial_degree(m));
        let first = degrees.next().unwrap_or(0);
        if degrees.all(|d| d == first) {
            Ok(first)
        } else {
            Err(BpError::NotHomogeneous)
        }
    }

    fn add_term(&mut self, m: Monomial, c: &PLocal) {
        let p = self.p_big();
        match self.terms.get_mut(&m) {
            Some(slot) => {
                *slot = slot.add(c, &p);
                if slot.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                if !c.is_zero() {
                    self.terms.insert(m, c.clone());
                }
            }
        }
    }

    fn check_shape(&self, other: &GradedPoly) {
        assert_eq!(
            (self.prime, self.gens, self.blocks),
            (other.prime, other.gens, other.blocks),
            "incompatible polynomial rings"
        );
    }

    pub fn add(&self, other: &GradedPoly) -> GradedPoly {
        self.check_shape(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &GradedPoly) -> GradedPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> GradedPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn mul(&self, other: &GradedPoly) -> GradedPoly {
        self.check_shape(other);
        let p = self.p_big();
        let mut out = Self::zero(self.prime, self.gens, self.blocks);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, &c1.mul(c2, &p));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> GradedPoly {
        let mut base = self.clone();
        let mut acc = Self::one(self.prime, self.gens, self.blocks);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn scale(&self, c: &PLocal) -> GradedPoly {
        let p = self.p_big();
        let mut out = Self::zero(self.prime, self.gens, self.blocks);
        for (m, x) in &self.terms {
            out.add_term(m.clone(), &x.mul(c, &p));
        }
        out
    }

    pub fn div_p(&self) -> GradedPoly {
        let p = self.p_big();
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.div_p(&p);
        }
        out
    }

    /// Re-embeds into a ring with more `t`-blocks, sending block `b` to
    /// `block_map[b]` (block 0 must stay 0).
    pub fn embed(&self, blocks: usize, block_map: &[usize]) -> GradedPoly {
        assert_eq!(block_map.len(), self.blocks + 1);
        assert_eq!(block_map[0], 0);
        let mut out = Self::zero(self.prime, self.gens, blocks);
        for (m, c) in &self.terms {
            let mut nm = vec![0; self.gens * (blocks + 1)];
            for (b, target) in block_map.iter().enumerate() {
                for i in 0..self.gens {
                    nm[target * self.gens + i] += m[b * self.gens + i];
                }
            }
            out.add_term(nm, c);
        }
        out
    }

    /// Ring homomorphism determined by the image of every generator
    /// (`images[block][i]` for 0-based generator `i`).
    pub fn substitute(&self, images: &[Vec<GradedPoly>], target_blocks: usize) -> GradedPoly {
        let mut out = Self::zero(self.prime, self.gens, target_blocks);
        for (m, c) in &self.terms {
            let mut term = Self::constant(self.prime, self.gens, target_blocks, c.clone());
            for (k, e) in m.iter().enumerate() {
                if *e > 0 {
                    term = term.mul(&images[k / self.gens][k % self.gens].pow(*e as u64));
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Sets every variable in `block` to zero.
    pub fn kill_block(&self, block: usize) -> GradedPoly {
        let range = block * self.gens..(block + 1) * self.gens;
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m[range.clone()].iter().all(|e| *e == 0))
            .map(|(m, c)| (m.clone(), c.clone()));
        Self::from_terms(self.prime, self.gens, self.blocks, terms)
    }

    /// Splits a monomial into its per-block exponent slices.
    pub fn split<'a>(&self, m: &'a [u16]) -> Vec<&'a [u16]> {
        m.chunks(self.gens).collect()
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names: Vec<&str> = match self.blocks {
            0 => vec!["v"],
            1 => vec!["v", "t"],
            2 => vec!["v", "t'", "t''"],
            _ => vec!["v", "t1_", "t2_", "t3_", "t4_", "t5_"],
        };
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.num.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let abs = c.num.abs();
            let mut factors = Vec::new();
            for (k, e) in m.iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                let name = format!("{}{}", names[k / self.gens], k % self.gens + 1);
                factors.push(if *e == 1 { name } else { format!("{name}^{e}") });
            }
            let coeff = if c.den_exp == 0 {
                abs.to_string()
            } else {
                format!("{abs}/{}", BigInt::from(self.prime).pow(c.den_exp))
            };
            if factors.is_empty() {
                write!(f, "{coeff}")?;
            } else if coeff == "1" {
                write!(f, "{}", factors.join(" "))?;
            } else {
                write!(f, "{coeff} {}", factors.join(" "))?;
            }
        }
        Ok(())
    }
}

/// Number of generators `v_i` (equivalently `t_i`) of degree at most `bound`.
pub fn generator_count(p: u64, bound: u32) -> usize {
    (1..).take_while(|&i| generator_degree(p, i) <= bound).count()
}

/// Hazewinkel logarithm coefficients `λ_0 = 1, λ_1, ..., λ_N` as polynomials
/// in the `v_i`, for every `n` with `2(p^n - 1) ≤ degree_bound`.
pub fn log_coefficients(p: u64, degree_bound: u32) -> Result<Vec<GradedPoly>, BpError> {
    if !is_prime(p) {
        return Err(BpError::NotPrime(p));
    }
    if degree_bound < 2 || degree_bound % 2 == 1 {
        return Err(BpError::BadDegreeBound(degree_bound));
    }
    let gens = generator_count(p, degree_bound);
    Ok(lambdas(p, gens))
}

fn lambdas(p: u64, gens: usize) -> Vec<GradedPoly> {
    let mut out = vec![GradedPoly::one(p, gens, 0)];
    for n in 1..=gens {
        let mut sum = GradedPoly::zero(p, gens, 0);
        for (i, lambda) in out.iter().enumerate() {
            let v = GradedPoly::generator(p, gens, 0, 0, n - i);
            sum = sum.add(&lambda.mul(&v.pow(p.pow(i as u32))));
        }
        out.push(sum.div_p());
    }
    out
}

/// The Hopf algebroid structure maps up to a fixed degree bound.
#[derive(Clone, Debug)]
pub struct BpPresentation {
    prime: u64,
    degree_bound: u32,
    gens: usize,
    lambdas: Vec<GradedPoly>,
    eta_r_lambda: Vec<GradedPoly>,
    eta_r_v: Vec<GradedPoly>,
    delta_t: Vec<TensorPoly>,
}

impl BpPresentation {
    pub fn new(prime: u64, degree_bound: u32) -> Result<Self, BpError> {
        let lambdas = log_coefficients(prime, degree_bound)?;
        let gens = lambdas.len() - 1;
        let p = prime;

        let t = |block: usize, blocks: usize, i: usize| -> GradedPoly {
            if i == 0 {
                GradedPoly::one(p, gens, blocks)
            } else {
                GradedPoly::generator(p, gens, blocks, block, i)
            }
        };

        // η_R(λ_n) = Σ_{i+j=n} λ_i t_j^{p^i}
        let eta_r_lambda: Vec<GradedPoly> = (0..=gens)
            .map(|n| {
                (0..=n).fold(GradedPoly::zero(p, gens, 1), |acc, i| {
                    let l = lambdas[i].embed(1, &[0]);
                    acc.add(&l.mul(&t(1, 1, n - i).pow(p.pow(i as u32))))
                })
            })
            .collect();

        // v_n = p λ_n - Σ_{0<i<n} λ_i v_{n-i}^{p^i}, hence
        // η_R(v_n) = p η_R(λ_n) - Σ_{0<i<n} η_R(λ_i) η_R(v_{n-i})^{p^i}
        let mut eta_r_v: Vec<GradedPoly> = Vec::with_capacity(gens);
        for n in 1..=gens {
            let mut x = eta_r_lambda[n].scale(&PLocal::integer(p));
            for i in 1..n {
                x = x.sub(&eta_r_lambda[i].mul(&eta_r_v[n - i - 1].pow(p.pow(i as u32))));
            }
            if !x.is_integral() {
                return Err(BpError::NonIntegral(format!("η_R(v{n})")));
            }
            eta_r_v.push(x);
        }

        // Δ(t_n) = Σ_{i+j+k=n} λ_i t'_j^{p^i} t''_k^{p^{i+j}} - Σ_{i=1}^{n} λ_i Δ(t_{n-i})^{p^i}
        let mut delta: Vec<GradedPoly> = vec![GradedPoly::one(p, gens, 2)];
        for n in 1..=gens {
            let mut x = GradedPoly::zero(p, gens, 2);
            for i in 0..=n {
                let l = lambdas[i].embed(2, &[0]);
                for j in 0..=(n - i) {
                    let k = n - i - j;
                    let left = t(1, 2, j).pow(p.pow(i as u32));
                    let right = t(2, 2, k).pow(p.pow((i + j) as u32));
                    x = x.add(&l.mul(&left).mul(&right));
                }
            }
            for i in 1..=n {
                let l = lambdas[i].embed(2, &[0]);
                x = x.sub(&l.mul(&delta[n - i].pow(p.pow(i as u32))));
            }
            if !x.is_integral() {
                return Err(BpError::NonIntegral(format!("Δ(t{n})")));
            }
            delta.push(x);
        }
        let delta_t = delta.into_iter().skip(1).map(TensorPoly).collect();

        Ok(BpPresentation {
            prime,
            degree_bound,
            gens,
            lambdas,
            eta_r_lambda,
            eta_r_v,
            delta_t,
        })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    /// Number of `v_i` (and `t_i`) within the degree bound.
    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn lambdas(&self) -> &[GradedPoly] {
        &self.lambdas
    }

    /// `η_R(λ_n)` from the defining formula, in `BP_*BP`.
    pub fn eta_r_lambda(&self, n: usize) -> &GradedPoly {
        &self.eta_r_lambda[n]
    }

    /// `η_R(v_n)` for `1 ≤ n ≤ gens`.
    pub fn eta_r_generator(&self, n: usize) -> &GradedPoly {
        &self.eta_r_v[n - 1]
    }

    /// `Δ(t_n)` for `1 ≤ n ≤ gens`.
    pub fn coproduct_generator(&self, n: usize) -> &TensorPoly {
        &self.delta_t[n - 1]
    }

    pub fn v(&self, n: usize) -> GradedPoly {
        GradedPoly::generator(self.prime, self.gens, 0, 0, n)
    }

    pub fn t(&self, n: usize) -> GradedPoly {
        GradedPoly::generator(self.prime, self.gens, 1, 1, n)
    }

    fn check_bound(&self, x: &GradedPoly) -> Result<(), BpError> {
        let degree = x.degree()?;
        if degree > self.degree_bound {
            return Err(BpError::BeyondBound {
                degree,
                bound: self.degree_bound,
            });
        }
        Ok(())
    }

    /// `η_R` on an integral element of `BP_*`.
    pub fn right_unit(&self, x: &GradedPoly) -> Result<GradedPoly, BpError> {
        if x.blocks != 0 || x.gens != self.gens || x.prime != self.prime {
            return Err(BpError::WrongShape {
                expected: "BP_*",
                found: x.blocks,
            });
        }
        self.check_bound(x)?;
        if !x.is_integral() {
            return Err(BpError::NonIntegral("right_unit input".into()));
        }
        let images = vec![self.eta_r_v.clone()];
        let out = x.substitute(&images, 1);
        if !out.is_integral() {
            return Err(BpError::NonIntegral("η_R".into()));
        }
        Ok(out)
    }

    /// `Δ` on an element of `BP_*BP` (coefficients stay on the left).
    pub fn coproduct(&self, x: &GradedPoly) -> Result<TensorPoly, BpError> {
        if x.blocks != 1 || x.gens != self.gens || x.prime != self.prime {
            return Err(BpError::WrongShape {
                expected: "BP_*BP",
                found: x.blocks,
            });
        }
        self.check_bound(x)?;
        let v_images: Vec<GradedPoly> = (1..=self.gens)
            .map(|i| GradedPoly::generator(self.prime, self.gens, 2, 0, i))
            .collect();
        let t_images: Vec<GradedPoly> = self.delta_t.iter().map(|d| d.0.clone()).collect();
        let out = x.substitute(&[v_images, t_images], 2);
        if !out.is_integral() {
            return Err(BpError::NonIntegral("Δ".into()));
        }
        Ok(TensorPoly(out))
    }

    /// Counit: `t_i ↦ 0`, `v_i ↦ v_i`.
    pub fn counit(&self, x: &GradedPoly) -> GradedPoly {
        let killed = x.kill_block(1);
        let terms = killed
            .terms()
            .map(|(m, c)| (m[..self.gens].to_vec(), c.clone()));
        GradedPoly::from_terms(self.prime, self.gens, 0, terms)
    }
}
