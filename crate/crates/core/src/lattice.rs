//! Construction-A lattices from randomized skeletons: membership, volume,
//! scaled duals, exact dual bases, nested pairs and the Monte Carlo checks on
//! the random parity-check ensemble.

use std::sync::OnceLock;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{check_modulus, FpMatrix, LinearCode};
use crate::graph::SkeletonGraph;
use crate::rng::{run_blocks, stream_rng};
use crate::stats::{chi_square_uniform, wilson, ChiSquareResult, Interval};

/// Largest codebook enumerated by default.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1_000_000;

const RANDOMIZE_STREAM: u64 = 0x4C44_4100;

pub type Rational = Ratio<i128>;

fn randomize_with(graph: &SkeletonGraph, p: u64, rng: &mut ChaCha8Rng) -> FpMatrix {
    let mut h = FpMatrix::zeros(graph.m(), graph.n(), p).expect("modulus checked by caller");
    for (c, list) in graph.check_lists().iter().enumerate() {
        for &v in list {
            h.set(c, v, rng.random_range(0..p));
        }
    }
    h
}

/// Replace every skeleton edge by an independent uniform element of F_p
/// (zero included). Entries off the skeleton stay zero.
pub fn randomize_skeleton(graph: &SkeletonGraph, p: u64, seed: u64) -> Result<FpMatrix> {
    check_modulus(p)?;
    Ok(randomize_with(graph, p, &mut stream_rng(seed, RANDOMIZE_STREAM)))
}

/// `S(u)`: variables adjacent to some check in the support of `u`.
pub fn support_image(graph: &SkeletonGraph, u: &[u64]) -> Result<Vec<usize>> {
    if u.len() != graph.m() {
        return Err(Error::DimensionMismatch {
            expected: graph.m(),
            got: u.len(),
        });
    }
    let mut mark = vec![false; graph.n()];
    for (c, &ui) in u.iter().enumerate() {
        if ui != 0 {
            for &v in graph.check_neighbors(c) {
                mark[v] = true;
            }
        }
    }
    Ok((0..graph.n()).filter(|&v| mark[v]).collect())
}

/// `{x in Z^n : Hx = 0 mod p}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ConstructionALattice {
    h: FpMatrix,
    code: LinearCode,
    rank: usize,
    #[serde(skip)]
    codewords: OnceLock<Vec<Vec<u64>>>,
}

impl Clone for ConstructionALattice {
    fn clone(&self) -> Self {
        ConstructionALattice {
            h: self.h.clone(),
            code: self.code.clone(),
            rank: self.rank,
            codewords: self.codewords.clone(),
        }
    }
}

impl ConstructionALattice {
    pub fn from_checks(h: FpMatrix) -> Result<Self> {
        check_modulus(h.modulus())?;
        let code = LinearCode::from_check(&h);
        let rank = h.cols() - code.dimension();
        Ok(ConstructionALattice {
            h,
            code,
            rank,
            codewords: OnceLock::new(),
        })
    }

    /// `Z^n`, presented with period `p` (no checks).
    pub fn integer_lattice(n: usize, p: u64) -> Result<Self> {
        Self::from_checks(FpMatrix::zeros(0, n, p)?)
    }

    /// `pZ^n` (identity checks).
    pub fn scaled_integer_lattice(n: usize, p: u64) -> Result<Self> {
        Self::from_checks(FpMatrix::identity(n, p)?)
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn p(&self) -> u64 {
        self.h.modulus()
    }

    pub fn check_matrix(&self) -> &FpMatrix {
        &self.h
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn code_dim(&self) -> usize {
        self.code.dimension()
    }

    /// `vol = p^volume_exponent`.
    pub fn volume_exponent(&self) -> usize {
        self.rank
    }

    pub fn ln_volume(&self) -> f64 {
        self.rank as f64 * (self.p() as f64).ln()
    }

    pub fn volume(&self) -> f64 {
        (self.p() as f64).powi(self.rank as i32)
    }

    pub fn full_rank(&self) -> bool {
        self.rank == self.h.rows()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.n() && self.h.mul_int_vec(x).iter().all(|&s| s == 0)
    }

    /// All `p^k` codewords, cached after the first call. The budget applies
    /// to cached calls too.
    pub fn codewords(&self, budget: u64) -> Result<&[Vec<u64>]> {
        let size = self.code.size_f64();
        if size > budget as f64 {
            return Err(Error::BudgetExceeded { needed: size, budget });
        }
        if let Some(c) = self.codewords.get() {
            return Ok(c);
        }
        let words = self.code.codewords(budget)?;
        Ok(self.codewords.get_or_init(|| words))
    }

    /// Square lattice basis (rows): the reduced code basis lifted to
    /// `[0,p)`, completed by `p e_j` on every non-pivot column. Row `j` is the
    /// generator with pivot `j` or `p e_j`, so the basis is upper triangular
    /// with determinant `p^(n-k)`.
    pub fn basis(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        let p = self.p() as i64;
        let e = self.code.basis.rref();
        let mut rows = vec![Vec::new(); n];
        for (i, &c) in e.pivots.iter().enumerate() {
            rows[c] = e.matrix.row(i).iter().map(|&v| v as i64).collect();
        }
        for (j, row) in rows.iter_mut().enumerate() {
            if row.is_empty() {
                *row = vec![0; n];
                row[j] = p;
            }
        }
        rows
    }
}

pub fn build_lattice(h: FpMatrix) -> Result<ConstructionALattice> {
    ConstructionALattice::from_checks(h)
}

/// `CA(C^perp)`: the generator rows of `C` become the parity checks.
pub fn scaled_dual_lattice(l: &ConstructionALattice) -> Result<ConstructionALattice> {
    ConstructionALattice::from_checks(l.code.basis.clone())
}

fn overflow() -> Error {
    Error::Invariant("rational arithmetic overflowed i128".into())
}

/// Exact inverse by Gauss-Jordan elimination over the rationals.
pub fn rational_inverse(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularBasis)?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] = a[col][j].checked_div(&d).ok_or_else(overflow)?;
            inv[col][j] = inv[col][j].checked_div(&d).ok_or_else(overflow)?;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col];
            for j in 0..n {
                let s = f.checked_mul(&a[col][j]).ok_or_else(overflow)?;
                a[r][j] = a[r][j].checked_sub(&s).ok_or_else(overflow)?;
                let s = f.checked_mul(&inv[col][j]).ok_or_else(overflow)?;
                inv[r][j] = inv[r][j].checked_sub(&s).ok_or_else(overflow)?;
            }
        }
    }
    Ok(inv)
}

/// Exact determinant by fraction-preserving elimination.
pub fn rational_determinant(m: &[Vec<Rational>]) -> Result<Rational> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(Rational::zero());
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let d = a[col][col];
        det = det.checked_mul(&d).ok_or_else(overflow)?;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].checked_div(&d).ok_or_else(overflow)?;
            for j in col..n {
                let s = f.checked_mul(&a[col][j]).ok_or_else(overflow)?;
                a[r][j] = a[r][j].checked_sub(&s).ok_or_else(overflow)?;
            }
        }
    }
    Ok(det)
}

pub fn to_rational(m: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    m.iter()
        .map(|r| r.iter().map(|&v| Rational::from_integer(v as i128)).collect())
        .collect()
}

/// Lattice given by a square rational row basis, with its inverse cached
/// for coordinate recovery.
#[derive(Clone, Debug)]
pub struct RationalLattice {
    pub basis: Vec<Vec<Rational>>,
    inverse: Vec<Vec<Rational>>,
}

impl RationalLattice {
    pub fn new(basis: Vec<Vec<Rational>>) -> Result<Self> {
        let inverse = rational_inverse(&basis)?;
        Ok(RationalLattice { basis, inverse })
    }

    pub fn determinant(&self) -> Result<Rational> {
        rational_determinant(&self.basis)
    }

    /// True when `x = c B` has an integer solution `c`.
    pub fn contains(&self, x: &[Rational]) -> Result<bool> {
        let n = self.basis.len();
        if x.len() != n {
            return Ok(false);
        }
        for j in 0..n {
            let mut c = Rational::zero();
            for (i, xi) in x.iter().enumerate() {
                let t = xi.checked_mul(&self.inverse[i][j]).ok_or_else(overflow)?;
                c = c.checked_add(&t).ok_or_else(overflow)?;
            }
            if !c.is_integer() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equal point sets: each basis lies in the other lattice.
    pub fn same_lattice(&self, other: &RationalLattice) -> Result<bool> {
        for row in &other.basis {
            if !self.contains(row)? {
                return Ok(false);
            }
        }
        for row in &self.basis {
            if !other.contains(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Dual basis `(A^{-1})^T` for the row basis `A` of [`ConstructionALattice::basis`].
#[derive(Clone, Debug)]
pub struct DualBasis {
    pub primal: RationalLattice,
    pub dual: RationalLattice,
}

pub fn exact_dual_basis(l: &ConstructionALattice) -> Result<DualBasis> {
    let a = to_rational(&l.basis());
    let inv = rational_inverse(&a)?;
    let n = a.len();
    let dual: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| inv[j][i]).collect()).collect();
    Ok(DualBasis {
        primal: RationalLattice::new(a)?,
        dual: RationalLattice::new(dual)?,
    })
}

/// Fine lattice from the first `k_f` rows of `H_c`, coarse from all rows.
#[derive(Clone, Debug)]
pub struct NestedPair {
    pub fine: ConstructionALattice,
    pub coarse: ConstructionALattice,
    pub k_f: usize,
    pub k_c: usize,
}

impl NestedPair {
    /// `|fine / coarse| = p^(rank_c - rank_f)`, as a log base p.
    pub fn nesting_exponent(&self) -> usize {
        self.coarse.rank() - self.fine.rank()
    }

    pub fn nesting_ratio(&self) -> f64 {
        (self.fine.p() as f64).powi(self.nesting_exponent() as i32)
    }

    /// Count cosets of the coarse lattice in the fine one by enumerating
    /// fine codewords and collecting their distinct coarse syndromes.
    pub fn coset_count_exhaustive(&self, budget: u64) -> Result<u64> {
        let words = self.fine.code().codewords(budget)?;
        let mut syndromes: Vec<Vec<u64>> = words
            .iter()
            .map(|w| self.coarse.check_matrix().mul_vec(w))
            .collect();
        syndromes.sort_unstable();
        syndromes.dedup();
        Ok(syndromes.len() as u64)
    }
}

pub fn nested_pair(h_c: &FpMatrix, k_f: usize) -> Result<NestedPair> {
    let k_c = h_c.rows();
    if k_f == 0 || k_f >= k_c {
        return Err(Error::config(format!("need 0 < k_f < {k_c}, got {k_f}")));
    }
    Ok(NestedPair {
        fine: ConstructionALattice::from_checks(h_c.top_rows(k_f))?,
        coarse: ConstructionALattice::from_checks(h_c.clone())?,
        k_f,
        k_c,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullRankReport {
    pub p: u64,
    pub trials: u64,
    pub failures: u64,
    pub frequency: f64,
    pub ci: Interval,
}

/// Frequency of `rank(H) < rows` over independent randomizations.
pub fn fullrank_monte_carlo(
    graph: &SkeletonGraph,
    p: u64,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<FullRankReport> {
    check_modulus(p)?;
    if trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    let m = graph.m();
    let counts = run_blocks(workers, seed, 1, trials as usize, |rng, _, len| {
        Ok((0..len)
            .filter(|_| randomize_with(graph, p, rng).rank() < m)
            .count() as u64)
    })?;
    let failures = counts.iter().sum();
    Ok(FullRankReport {
        p,
        trials,
        failures,
        frequency: failures as f64 / trials as f64,
        ci: wilson(failures, trials),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateTest {
    pub coordinate: usize,
    pub chi_square: ChiSquareResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub coordinates: (usize, usize),
    pub chi_square: ChiSquareResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyndromeReport {
    pub p: u64,
    pub trials: u64,
    pub support: Vec<usize>,
    pub marginals: Vec<CoordinateTest>,
    pub pair: Option<PairTest>,
}

impl SyndromeReport {
    pub fn all_pass(&self, significance: f64) -> bool {
        self.marginals
            .iter()
            .all(|t| t.chi_square.p_value > significance)
            && self
                .pair
                .as_ref()
                .is_none_or(|t| t.chi_square.p_value > significance)
    }
}

/// Distribution of `H^T u` over random `H`: zero off `S(u)` (checked on
/// every trial), uniform on each coordinate of `S(u)` and on one pair.
pub fn syndrome_distribution_test(
    graph: &SkeletonGraph,
    p: u64,
    u: &[u64],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<SyndromeReport> {
    check_modulus(p)?;
    let support = support_image(graph, u)?;
    if support.is_empty() {
        return Err(Error::config("syndrome must be nonzero"));
    }
    let u: Vec<u64> = u.iter().map(|&x| x % p).collect();
    let pair = if support.len() >= 2 {
        let mut rng = stream_rng(seed, 3);
        let a = rng.random_range(0..support.len());
        let mut b = rng.random_range(0..support.len() - 1);
        if b >= a {
            b += 1;
        }
        Some((support[a.min(b)], support[a.max(b)]))
    } else {
        None
    };
    let pu = p as usize;
    let s = support.len();
    let in_support = {
        let mut mark = vec![false; graph.n()];
        support.iter().for_each(|&v| mark[v] = true);
        mark
    };
    let parts = run_blocks(workers, seed, 2, trials as usize, |rng, start, len| {
        let mut marg = vec![0u64; s * pu];
        let mut joint = vec![0u64; pu * pu];
        for t in 0..len {
            let x = randomize_with(graph, p, rng).transpose_mul_vec(&u);
            for (v, &xv) in x.iter().enumerate() {
                if !in_support[v] && xv != 0 {
                    return Err(Error::Invariant(format!(
                        "trial {}: coordinate {v} outside S(u) is {xv}",
                        start + t
                    )));
                }
            }
            for (i, &v) in support.iter().enumerate() {
                marg[i * pu + x[v] as usize] += 1;
            }
            if let Some((a, b)) = pair {
                joint[x[a] as usize * pu + x[b] as usize] += 1;
            }
        }
        Ok((marg, joint))
    })?;
    let mut marg = vec![0u64; s * pu];
    let mut joint = vec![0u64; pu * pu];
    for (m, j) in parts {
        marg.iter_mut().zip(m).for_each(|(a, b)| *a += b);
        joint.iter_mut().zip(j).for_each(|(a, b)| *a += b);
    }
    Ok(SyndromeReport {
        p,
        trials,
        marginals: support
            .iter()
            .enumerate()
            .map(|(i, &v)| CoordinateTest {
                coordinate: v,
                chi_square: chi_square_uniform(&marg[i * pu..(i + 1) * pu]),
            })
            .collect(),
        pair: pair.map(|c| PairTest {
            coordinates: c,
            chi_square: chi_square_uniform(&joint),
        }),
        support,
    })
}

/// On-disk lattice description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeBundle {
    pub n: usize,
    pub p: u64,
    /// Where the skeleton came from (a file path or a generator description).
    pub skeleton_ref: String,
    /// Number of parity rows, so trailing zero rows survive a round trip.
    pub rows: usize,
    #[serde(rename = "H")]
    pub h: Vec<(usize, usize, u64)>,
    pub rank: usize,
    pub volume_exponent: usize,
}

impl LatticeBundle {
    pub fn from_lattice(l: &ConstructionALattice, skeleton_ref: impl Into<String>) -> Self {
        LatticeBundle {
            n: l.n(),
            p: l.p(),
            skeleton_ref: skeleton_ref.into(),
            rows: l.check_matrix().rows(),
            h: l.check_matrix().triplets(),
            rank: l.rank(),
            volume_exponent: l.volume_exponent(),
        }
    }

    /// Rebuild the lattice, rejecting bundles whose recorded rank disagrees.
    pub fn to_lattice(&self) -> Result<ConstructionALattice> {
        let h = FpMatrix::from_triplets(self.rows, self.n, self.p, &self.h)?;
        let l = ConstructionALattice::from_checks(h)?;
        if l.rank() != self.rank || l.volume_exponent() != self.volume_exponent {
            return Err(Error::config(format!(
                "bundle records rank {} but H has rank {}",
                self.rank,
                l.rank()
            )));
        }
        Ok(l)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn example_h(p: u64, seed: u64) -> FpMatrix {
        randomize_skeleton(&SkeletonGraph::six_by_four(), p, seed).unwrap()
    }

    #[test]
    fn randomized_support_inside_skeleton() {
        let g = SkeletonGraph::six_by_four();
        for seed in 0..50 {
            let h = example_h(5, seed);
            for (r, c, _) in h.triplets() {
                assert!(g.has_edge(r, c));
            }
        }
        let zero = SkeletonGraph::from_check_lists(4, vec![vec![], vec![]]).unwrap();
        let h = randomize_skeleton(&zero, 7, 1).unwrap();
        assert!(h.triplets().is_empty());
        assert!(randomize_skeleton(&zero, 8, 1).is_err());
    }

    #[test]
    fn support_image_examples() {
        let g = SkeletonGraph::six_by_four();
        assert!(support_image(&g, &[0, 0, 0, 0]).unwrap().is_empty());
        assert_eq!(support_image(&g, &[1, 0, 0, 0]).unwrap(), vec![0, 1, 4]);
        assert_eq!(support_image(&g, &[3, 2, 0, 0]).unwrap(), vec![0, 1, 3, 4, 5]);
        assert!(support_image(&g, &[1]).is_err());
    }

    #[test]
    fn membership_basics() {
        let l = build_lattice(example_h(5, 3)).unwrap();
        assert!(l.contains(&[0; 6]));
        for j in 0..6 {
            let mut x = vec![0i64; 6];
            x[j] = 5;
            assert!(l.contains(&x));
            x[j] = -5;
            assert!(l.contains(&x));
        }
        for row in l.basis() {
            assert!(l.contains(&row));
        }
    }

    #[test]
    fn volume_and_rank() {
        let l = build_lattice(example_h(5, 3)).unwrap();
        assert_eq!(l.rank() + l.code_dim(), 6);
        assert_eq!(l.volume_exponent(), l.rank());
        let z = ConstructionALattice::integer_lattice(4, 3).unwrap();
        assert_eq!(z.volume(), 1.0);
        let pz = ConstructionALattice::scaled_integer_lattice(4, 3).unwrap();
        assert_eq!(pz.volume(), 81.0);
        assert!(pz.full_rank());
    }

    #[test]
    fn scaled_dual_of_trivial_codes() {
        let pz = ConstructionALattice::scaled_integer_lattice(3, 5).unwrap();
        let d = scaled_dual_lattice(&pz).unwrap();
        assert_eq!(d.rank(), 0);
        assert!(d.contains(&[1, 2, 3]));
        let z = ConstructionALattice::integer_lattice(3, 5).unwrap();
        let d = scaled_dual_lattice(&z).unwrap();
        assert_eq!(d.rank(), 3);
        assert!(!d.contains(&[1, 0, 0]));
        assert!(d.contains(&[5, 0, -10]));
    }

    #[test]
    fn basis_determinant_is_volume() {
        let l = build_lattice(example_h(5, 9)).unwrap();
        let det = rational_determinant(&to_rational(&l.basis())).unwrap();
        assert_eq!(det.abs(), Rational::from_integer(l.volume() as i128));
    }

    #[test]
    fn dual_of_integer_lattices() {
        let z = ConstructionALattice::integer_lattice(3, 5).unwrap();
        let d = exact_dual_basis(&z).unwrap();
        assert!(d.dual.same_lattice(&d.primal).unwrap());
        let pz = ConstructionALattice::scaled_integer_lattice(3, 5).unwrap();
        let d = exact_dual_basis(&pz).unwrap();
        let fifth = Rational::new(1, 5);
        let expect: Vec<Vec<Rational>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { fifth } else { Rational::zero() }).collect())
            .collect();
        assert!(d.dual.same_lattice(&RationalLattice::new(expect).unwrap()).unwrap());
    }

    #[test]
    fn singular_inverse_rejected() {
        let m = to_rational(&[vec![1, 2], vec![2, 4]]);
        assert!(matches!(rational_inverse(&m), Err(Error::SingularBasis)));
        assert_eq!(rational_determinant(&m).unwrap(), Rational::zero());
    }

    #[test]
    fn nested_pair_precondition() {
        let h = example_h(5, 1);
        assert!(nested_pair(&h, 0).is_err());
        assert!(nested_pair(&h, 4).is_err());
        let np = nested_pair(&h, 2).unwrap();
        for row in np.coarse.basis() {
            assert!(np.fine.contains(&row));
        }
    }

    #[test]
    fn zero_row_never_full_rank() {
        let g = SkeletonGraph::from_check_lists(4, vec![vec![0, 1], vec![], vec![2, 3]]).unwrap();
        let r = fullrank_monte_carlo(&g, 5, 500, 1, 0).unwrap();
        assert_eq!(r.failures, 500);
        assert_eq!(r.frequency, 1.0);
    }

    #[test]
    fn syndrome_zero_off_support() {
        let g = SkeletonGraph::six_by_four();
        let r = syndrome_distribution_test(&g, 5, &[0, 0, 2, 0], 2000, 4, 0).unwrap();
        assert_eq!(r.support, vec![2, 3, 4]);
        assert_eq!(r.marginals.len(), 3);
        assert!(syndrome_distribution_test(&g, 5, &[0, 0, 0, 0], 10, 4, 0).is_err());
    }

    #[test]
    fn bundle_round_trip() {
        let l = build_lattice(example_h(7, 2)).unwrap();
        let b = LatticeBundle::from_lattice(&l, "six_by_four");
        let back = LatticeBundle::from_json(&b.to_json().unwrap()).unwrap();
        assert_eq!(back, b);
        let l2 = back.to_lattice().unwrap();
        assert_eq!(l2.check_matrix(), l.check_matrix());
        let mut bad = b.clone();
        bad.rank += 1;
        assert!(bad.to_lattice().is_err());
    }
}
