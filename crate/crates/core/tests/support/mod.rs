//! Brute-force reference implementations shared by the integration tests.
//! Nothing here goes through the library's own enumeration routines.

#![allow(dead_code)]

use std::collections::BTreeSet;

use lda_core::field::FpMatrix;
use lda_core::graph::{ExpansionParams, Property, SkeletonGraph};
use rand::Rng;

/// Every vector of `F_p^n` with `Hx = 0`, found by scanning all `p^n` vectors.
pub fn brute_codewords(h: &FpMatrix) -> Vec<Vec<u64>> {
    let (n, p) = (h.cols(), h.modulus());
    let total = p.pow(n as u32);
    let mut out = Vec::new();
    for idx in 0..total {
        let mut x = vec![0u64; n];
        let mut v = idx;
        for j in (0..n).rev() {
            x[j] = v % p;
            v /= p;
        }
        let ok = (0..h.rows()).all(|i| {
            (0..n).map(|j| h.get(i, j) * x[j]).sum::<u64>() % p == 0
        });
        if ok {
            out.push(x);
        }
    }
    out
}

/// Integer membership by direct evaluation of `Hx mod p`.
pub fn brute_member(h: &FpMatrix, x: &[i64]) -> bool {
    let p = h.modulus() as i64;
    (0..h.rows()).all(|i| {
        x.iter()
            .enumerate()
            .map(|(j, &v)| h.get(i, j) as i64 * v)
            .sum::<i64>()
            .rem_euclid(p)
            == 0
    })
}

/// Closest point: for each codeword try both integers of its residue class
/// around every coordinate (all `2^n` combinations). Lexicographically
/// smallest among the nearest.
pub fn brute_closest(words: &[Vec<u64>], p: u64, x: &[f64]) -> (Vec<i64>, f64) {
    let n = x.len();
    let pi = p as i64;
    let mut best: Option<(f64, Vec<i64>)> = None;
    for w in words {
        let lows: Vec<i64> = (0..n)
            .map(|j| {
                let a = w[j] as i64;
                a + pi * ((x[j] - a as f64) / p as f64).floor() as i64
            })
            .collect();
        for mask in 0u32..(1 << n) {
            let y: Vec<i64> = (0..n)
                .map(|j| lows[j] + if mask >> j & 1 == 1 { pi } else { 0 })
                .collect();
            let d2: f64 = (0..n).map(|j| (x[j] - y[j] as f64).powi(2)).sum();
            let take = match &best {
                None => true,
                Some((bd, by)) => d2 < *bd || (d2 == *bd && y < *by),
            };
            if take {
                best = Some((d2, y));
            }
        }
    }
    let (d2, y) = best.unwrap();
    (y, d2.sqrt())
}

/// Squared length of the shortest nonzero lattice vector, scanning the box
/// `[-p, p]^n` (which contains `p e_1`).
pub fn brute_shortest_sq(h: &FpMatrix) -> i64 {
    let n = h.cols();
    let p = h.modulus() as i64;
    let side = 2 * p + 1;
    let total = side.pow(n as u32);
    let mut best = p * p;
    for idx in 0..total {
        let mut v = idx;
        let mut x = vec![0i64; n];
        for slot in x.iter_mut() {
            *slot = v % side - p;
            v /= side;
        }
        let len: i64 = x.iter().map(|a| a * a).sum();
        if len == 0 || len >= best {
            continue;
        }
        if brute_member(h, &x) {
            best = len;
        }
    }
    best
}

/// Subsets of `0..m` of size `k` in lexicographic order.
pub fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, k, &mut Vec::new(), &mut out);
    out
}

pub fn neighbors(lists: &[Vec<usize>], subset: &[usize]) -> usize {
    subset
        .iter()
        .flat_map(|&i| lists[i].iter().copied())
        .collect::<BTreeSet<_>>()
        .len()
}

#[derive(Debug, PartialEq)]
pub enum Oracle {
    Certified,
    Falsified(Vec<usize>),
}

/// Smallest-size, lexicographically first subset violating the property,
/// among sizes up to the property's bound (which must not exceed `cap`).
pub fn brute_property(graph: &SkeletonGraph, params: &ExpansionParams, prop: Property) -> Oracle {
    let c = 1.0 - graph.rate();
    let n = graph.n() as f64;
    let (lists, count, bound, factor): (Vec<Vec<usize>>, usize, f64, f64) = match prop {
        Property::L1 => (var_lists(graph), graph.n(), (params.epsilon * n - 1e-9).ceil(), params.a),
        Property::L2 => (var_lists(graph), graph.n(), (n * c / (2.0 * params.alpha) - 1e-9).ceil(), params.alpha),
        Property::R1 => (graph.check_lists().to_vec(), graph.m(), (params.vartheta * n * c + 1e-9).floor(), params.b),
        Property::R2 => (graph.check_lists().to_vec(), graph.m(), (n * c / 2.0 + 1e-9).floor(), params.beta),
    };
    let bound = (bound.max(0.0) as usize).min(count);
    for k in 1..=bound {
        for s in combinations(count, k) {
            if (neighbors(&lists, &s) as f64) < factor * k as f64 {
                return Oracle::Falsified(s);
            }
        }
    }
    Oracle::Certified
}

pub fn var_lists(graph: &SkeletonGraph) -> Vec<Vec<usize>> {
    (0..graph.n()).map(|v| graph.var_neighbors(v).to_vec()).collect()
}

/// Exact coordinate marginals of `Π prior_j(c_j)` over the codewords.
pub fn brute_marginals(words: &[Vec<u64>], priors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = priors.len();
    let p = priors[0].len();
    let mut m = vec![vec![0.0; p]; n];
    for w in words {
        let weight: f64 = w.iter().enumerate().map(|(j, &a)| priors[j][a as usize]).product();
        for (j, &a) in w.iter().enumerate() {
            m[j][a as usize] += weight;
        }
    }
    for row in &mut m {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    m
}

/// Random `rows x cols` matrix over `F_p`.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, p: u64) -> FpMatrix {
    let data: Vec<Vec<u64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(0..p)).collect())
        .collect();
    FpMatrix::from_rows(&data, cols, p).unwrap()
}
