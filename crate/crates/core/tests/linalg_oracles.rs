//! Smith normal form and chain homology checked against independent,
//! deliberately naive oracles.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use vanishing_core::linalg::{chain_homology, smith_normal_form, AbelianPGroup, SparseIntMatrix};

/// Textbook dense Smith normal form: move the smallest entry to the corner,
/// clear its row and column, and fold in any row it fails to divide.
fn naive_snf(mut a: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut out = Vec::new();
    let mut k = 0;
    while k < rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { return out };
            a.swap(k, bi);
            for row in a.iter_mut() {
                row.swap(k, bj);
            }
            let piv = a[k][k];
            let mut clean = true;
            for i in (k + 1)..rows {
                let q = a[i][k].div_euclid(piv);
                for j in k..cols {
                    a[i][j] -= q * a[k][j];
                }
                clean &= a[i][k] == 0;
            }
            for j in (k + 1)..cols {
                let q = a[k][j].div_euclid(piv);
                for i in k..rows {
                    a[i][j] -= q * a[i][k];
                }
                clean &= a[k][j] == 0;
            }
            if !clean {
                continue;
            }
            let mut bad = None;
            'search: for i in (k + 1)..rows {
                for j in (k + 1)..cols {
                    if a[i][j] % piv != 0 {
                        bad = Some(i);
                        break 'search;
                    }
                }
            }
            match bad {
                Some(i) => {
                    for j in k..cols {
                        a[k][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        out.push(a[k][k].abs());
        k += 1;
    }
    out
}

fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| *v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] * det(&minor)
        })
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Determinantal divisors D_k = gcd of all k x k minors.
fn determinantal_divisors(a: &[Vec<i128>]) -> Vec<i128> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut out = Vec::new();
    for k in 1..=rows.min(cols) {
        let mut g = 0;
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let minor: Vec<Vec<i128>> = rs.iter().map(|r| cs.iter().map(|c| a[*r][*c]).collect()).collect();
                g = gcd(g, det(&minor));
            }
        }
        if g == 0 {
            break;
        }
        out.push(g);
    }
    out
}

fn to_sparse(a: &[Vec<i128>], cols: usize) -> SparseIntMatrix {
    let entries = a
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (i, j, BigInt::from(*v))))
        .filter(|e| !e.2.is_zero());
    SparseIntMatrix::new(a.len(), cols, entries).unwrap()
}

fn impl_factors(a: &[Vec<i128>], cols: usize) -> Vec<i128> {
    smith_normal_form(&to_sparse(a, cols), false)
        .invariant_factors
        .iter()
        .map(|d| d.to_i128().unwrap())
        .collect()
}

fn matrix(rows: usize, cols: usize, lo: i128, hi: i128) -> impl Strategy<Value = Vec<Vec<i128>>> {
    prop::collection::vec(prop::collection::vec(lo..=hi, cols), rows)
}

#[test]
fn random_5x5_matches_naive_oracle_fixed_seeds() {
    // A few hand-picked matrices with awkward gcd structure.
    let cases = vec![
        vec![
            vec![2, 4, 6, 8, 0],
            vec![-3, 9, 0, 6, 3],
            vec![0, 0, 5, -5, 5],
            vec![7, 1, 1, 1, 1],
            vec![4, 8, 12, 16, 0],
        ],
        vec![
            vec![6, 0, 0, 0, 0],
            vec![0, 10, 0, 0, 0],
            vec![0, 0, 15, 0, 0],
            vec![0, 0, 0, 9, 0],
            vec![0, 0, 0, 0, 4],
        ],
    ];
    for a in cases {
        assert_eq!(impl_factors(&a, 5), naive_snf(a.clone()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn snf_matches_naive_oracle(a in matrix(5, 5, -9, 9)) {
        prop_assert_eq!(impl_factors(&a, 5), naive_snf(a.clone()));
    }

    #[test]
    fn snf_rectangular_matches_naive_oracle(a in matrix(4, 6, -5, 5)) {
        prop_assert_eq!(impl_factors(&a, 6), naive_snf(a.clone()));
    }

    #[test]
    fn snf_chain_and_minors((cols, a) in (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| (Just(c), matrix(r, c, -6, 6)))) {
        let d = impl_factors(&a, cols);
        for w in d.windows(2) {
            prop_assert_eq!(w[1] % w[0], 0, "divisibility chain broken: {:?}", d);
        }
        let minors = determinantal_divisors(&a);
        prop_assert_eq!(d.len(), minors.len());
        let mut prod = 1;
        for (k, dk) in d.iter().enumerate() {
            prod *= dk;
            prop_assert_eq!(prod, minors[k]);
        }
    }

    #[test]
    fn snf_transforms_are_unimodular(a in matrix(4, 5, -7, 7)) {
        let m = to_sparse(&a, 5);
        let snf = smith_normal_form(&m, true);
        let t = snf.transforms.unwrap();
        let to_i = |x: &Vec<Vec<BigInt>>| -> Vec<Vec<i128>> {
            x.iter().map(|r| r.iter().map(|v| v.to_i128().unwrap()).collect()).collect()
        };
        prop_assert_eq!(det(&to_i(&t.left)).abs(), 1);
        prop_assert_eq!(det(&to_i(&t.right)).abs(), 1);
    }
}

// ---- chain homology oracle -------------------------------------------------

fn rational_rank(a: &[Vec<i128>], cols: usize) -> usize {
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| r.iter().map(|v| BigRational::from_integer(BigInt::from(*v))).collect())
        .collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &m[rank][c];
                for k in 0..cols {
                    let delta = &f * &m[rank][k];
                    m[r][k] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Size of the subgroup of (Z/modulus)^n spanned by the columns of `a`.
fn image_size(a: &[Vec<i128>], n: usize, cols: usize, modulus: i128) -> usize {
    let encode = |v: &[i128]| v.iter().fold(0u64, |acc, x| acc * modulus as u64 + x.rem_euclid(modulus) as u64);
    let mut elems: HashSet<Vec<i128>> = HashSet::new();
    elems.insert(vec![0; n]);
    for c in 0..cols {
        let g: Vec<i128> = (0..n).map(|r| a[r][c]).collect();
        let current: Vec<Vec<i128>> = elems.iter().cloned().collect();
        let mut seen: HashSet<u64> = current.iter().map(|v| encode(v)).collect();
        for base in current {
            let mut x = base;
            loop {
                x = x.iter().zip(&g).map(|(a, b)| (a + b).rem_euclid(modulus)).collect();
                if !seen.insert(encode(&x)) {
                    break;
                }
                elems.insert(x.clone());
            }
        }
    }
    elems.len()
}

/// Expected p-part of ker(d_out)/im(d_in). Torsion of the cokernel of d_in
/// is read off from |coker(d_in mod p^k)| for k = 1..=max_k; the sequence of
/// successive log-ratios must saturate at the free rank before max_k.
fn oracle_homology(d_in: &[Vec<i128>], d_out: &[Vec<i128>], n: usize, a: usize, p: i128, max_k: u32) -> Option<AbelianPGroup> {
    let rank_in = rational_rank(d_in, a);
    let rank_out = rational_rank(d_out, n);
    let free_coker = n - rank_in;
    let mut logs = vec![0usize];
    for k in 1..=max_k {
        let modulus = p.pow(k);
        let size = image_size(d_in, n, a, modulus);
        // log_p |coker| = k*n - log_p |image|
        let mut s = size;
        let mut log_img = 0usize;
        while s > 1 {
            assert_eq!(s % p as usize, 0);
            s /= p as usize;
            log_img += 1;
        }
        logs.push(k as usize * n - log_img);
    }
    let diffs: Vec<usize> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    if *diffs.last().unwrap() != free_coker || diffs[diffs.len() - 2] != free_coker {
        return None;
    }
    // diffs[k-1] = free + #{e_i >= k}
    let mut torsion = Vec::new();
    for k in 1..max_k as usize {
        let at_least_k = diffs[k - 1] - free_coker;
        let at_least_next = diffs[k] - free_coker;
        for _ in 0..(at_least_k - at_least_next) {
            torsion.push(BigUint::from(p as u64).pow(k as u32));
        }
    }
    Some(AbelianPGroup::new(n - rank_in - rank_out, torsion).unwrap())
}

fn matmul(a: &[Vec<i128>], b: &[Vec<i128>], inner: usize, cols: usize) -> Vec<Vec<i128>> {
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect())
        .collect()
}

/// Random unimodular matrix and its inverse from elementary operations.
fn unimodular(n: usize, ops: &[(usize, usize, i128)]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let mut p: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let mut inv = p.clone();
    for &(i, j, c) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        // P <- E P with E = I + c e_ij;  P^{-1} <- P^{-1} E^{-1}
        for k in 0..n {
            p[i][k] += c * p[j][k];
        }
        for r in 0..n {
            inv[r][j] -= c * inv[r][i];
        }
    }
    (p, inv)
}

#[derive(Debug, Clone)]
struct Complex {
    a: usize,
    n: usize,
    b: usize,
    d_in: Vec<Vec<i128>>,
    d_out: Vec<Vec<i128>>,
}

fn complex_strategy() -> impl Strategy<Value = Complex> {
    (1usize..=3, 1usize..=4, 1usize..=3)
        .prop_flat_map(|(a, n, b)| {
            (
                Just(a),
                Just(n),
                Just(b),
                0..=n,
                matrix(n, a, -3, 3),
                matrix(b, n, -3, 3),
                prop::collection::vec((0usize..8, 0usize..8, -2i128..=2), 0..6),
            )
        })
        .prop_map(|(a, n, b, split, x, y, ops)| {
            let mut x = x;
            let mut y = y;
            for (r, row) in x.iter_mut().enumerate() {
                if r >= split {
                    row.iter_mut().for_each(|v| *v = 0);
                }
            }
            for row in y.iter_mut() {
                for (c, v) in row.iter_mut().enumerate() {
                    if c < split {
                        *v = 0;
                    }
                }
            }
            let (p, p_inv) = unimodular(n, &ops);
            let d_in = matmul(&p, &x, n, a);
            let d_out = matmul(&y, &p_inv, n, n);
            Complex { a, n, b, d_in, d_out }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_homology_matches_enumeration_oracle(c in complex_strategy(), p in prop::sample::select(vec![2i128, 3])) {
        let max_k = if p == 2 { 4 } else { 3 };
        let expected = oracle_homology(&c.d_in, &c.d_out, c.n, c.a, p, max_k);
        prop_assume!(expected.is_some());
        let got = chain_homology(&to_sparse(&c.d_in, c.a), &to_sparse(&c.d_out, c.n), p as u64).unwrap();
        prop_assert_eq!(got, expected.unwrap());
        let _ = c.b;
    }

    #[test]
    fn chain_homology_invariant_under_basis_change(
        c in complex_strategy(),
        ops_a in prop::collection::vec((0usize..8, 0usize..8, -2i128..=2), 0..5),
        ops_b in prop::collection::vec((0usize..8, 0usize..8, -2i128..=2), 0..5),
        ops_n in prop::collection::vec((0usize..8, 0usize..8, -2i128..=2), 0..5),
    ) {
        // C^a -> C^n -> C^b conjugated by independent unimodular changes of basis
        let (_, qa_inv) = unimodular(c.a, &ops_a);
        let (qn, qn_inv) = unimodular(c.n, &ops_n);
        let (qb, _) = unimodular(c.b, &ops_b);
        let d_in2 = matmul(&matmul(&qn, &c.d_in, c.n, c.a), &qa_inv, c.a, c.a);
        let d_out2 = matmul(&matmul(&qb, &c.d_out, c.b, c.n), &qn_inv, c.n, c.n);
        for p in [2u64, 3, 5] {
            let h1 = chain_homology(&to_sparse(&c.d_in, c.a), &to_sparse(&c.d_out, c.n), p).unwrap();
            let h2 = chain_homology(&to_sparse(&d_in2, c.a), &to_sparse(&d_out2, c.n), p).unwrap();
            prop_assert_eq!(h1, h2);
        }
    }
}

#[test]
fn oracle_agrees_on_hand_example() {
    // Z --(2,4)--> Z^2 --(2,-1)--> Z : ker = <(1,2)>, im = <(2,4)> => Z/2
    let d_in = vec![vec![2], vec![4]];
    let d_out = vec![vec![2, -1]];
    let oracle = oracle_homology(&d_in, &d_out, 2, 1, 2, 4).unwrap();
    assert_eq!(oracle, AbelianPGroup::cyclic(2));
    let got = chain_homology(&to_sparse(&d_in, 1), &to_sparse(&d_out, 2), 2).unwrap();
    assert_eq!(got, oracle);
}
