//! Exact small-scale geometry: ball volumes, integer-point counts, closest
//! and shortest vectors by codeword enumeration, radii, and Monte Carlo
//! normalized second moments.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::lattice::{ConstructionALattice, DEFAULT_ENUMERATION_BUDGET};
use crate::rng::run_blocks;
use crate::stats::Moments;

/// `1/(2 pi e)`, the normalized second moment of a ball as `n` grows.
pub const SPHERE_BOUND: f64 = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E);

pub fn ln_unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    h * std::f64::consts::PI.ln() - ln_gamma(h + 1.0)
}

/// `V_n = pi^(n/2) / Gamma(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    ln_unit_ball_volume(n).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Count only points with at most this many nonzero coordinates.
    pub support_cap: Option<usize>,
}

impl BallSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        BallSpec {
            center,
            radius,
            support_cap: None,
        }
    }

    pub fn with_support_cap(mut self, cap: usize) -> Self {
        self.support_cap = Some(cap);
        self
    }
}

const BOUNDARY_TOL: f64 = 1e-9;

struct Counter<'a> {
    center: &'a [f64],
    cap: usize,
    visited: u64,
    budget: u64,
}

impl Counter<'_> {
    fn walk(&mut self, j: usize, rem: f64, support: usize) -> Result<u64> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::BudgetExceeded {
                needed: self.visited as f64,
                budget: self.budget,
            });
        }
        if j == self.center.len() {
            return Ok(1);
        }
        let c = self.center[j];
        let s = rem.max(0.0).sqrt();
        let lo = (c - s - BOUNDARY_TOL).ceil() as i64;
        let hi = (c + s + BOUNDARY_TOL).floor() as i64;
        let mut total = 0;
        for x in lo..=hi {
            let used = support + usize::from(x != 0);
            if used > self.cap {
                continue;
            }
            let d = x as f64 - c;
            let r = rem - d * d;
            if r < -BOUNDARY_TOL {
                continue;
            }
            total += self.walk(j + 1, r, used)?;
        }
        Ok(total)
    }
}

/// Exact `|Z^n ∩ (center + radius B)|`, optionally restricted to points of
/// bounded support. Uncapped balls are refused when `(2r+1)^n` exceeds the
/// budget; the enumeration itself also stops once it has visited `budget` nodes.
pub fn count_integer_points(ball: &BallSpec, budget: u64) -> Result<u64> {
    if !(ball.radius >= 0.0) || !ball.radius.is_finite() {
        return Err(Error::Domain(format!("radius {} must be finite and >= 0", ball.radius)));
    }
    let n = ball.center.len();
    if let Some(cap) = ball.support_cap {
        if cap > n {
            return Err(Error::Domain(format!("support cap {cap} exceeds dimension {n}")));
        }
    } else {
        let box_size = (2.0 * ball.radius + 1.0).powi(n as i32);
        if box_size > budget as f64 {
            return Err(Error::BudgetExceeded {
                needed: box_size,
                budget,
            });
        }
    }
    let mut c = Counter {
        center: &ball.center,
        cap: ball.support_cap.unwrap_or(n),
        visited: 0,
        budget,
    };
    let r2 = ball.radius * ball.radius;
    c.walk(0, r2 + BOUNDARY_TOL * r2.max(1.0), 0)
}

/// Volume-based bounds on the integer-point count of a radius-`r` ball in
/// dimension `n`: `V_n max(0, r - sqrt(n)/2)^n <= count <= V_n (r + sqrt(n)/2)^n`.
pub fn integer_point_sandwich(n: usize, r: f64) -> (f64, f64) {
    let v = unit_ball_volume(n);
    let h = (n as f64).sqrt() / 2.0;
    (
        v * (r - h).max(0.0).powi(n as i32),
        v * (r + h).powi(n as i32),
    )
}

/// Upper bound for support-capped counts: `C(n,m) V_m (r + sqrt(m)/2)^m`.
pub fn capped_count_upper_bound(n: usize, m: usize, r: f64) -> f64 {
    let binom = (0..m).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    binom * unit_ball_volume(m) * (r + (m as f64).sqrt() / 2.0).powi(m as i32)
}

/// Nearest integer to `t`, ties toward the smaller one.
#[inline]
fn round_down_ties(t: f64) -> f64 {
    (t - 0.5).ceil()
}

fn lex_less(a: &[i64], b: &[i64]) -> bool {
    a < b
}

/// Closest lattice point and its distance. Every codeword is tried with
/// per-coordinate rounding to its coset of `pZ^n`; equidistant candidates
/// resolve to the lexicographically smallest point.
pub fn closest_point(l: &ConstructionALattice, x: &[f64]) -> Result<(Vec<i64>, f64)> {
    closest_point_with_budget(l, x, DEFAULT_ENUMERATION_BUDGET)
}

pub fn closest_point_with_budget(
    l: &ConstructionALattice,
    x: &[f64],
    budget: u64,
) -> Result<(Vec<i64>, f64)> {
    let n = l.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let pf = l.p() as f64;
    let p = l.p() as usize;
    if l.code_dim() == n {
        let y: Vec<i64> = x.iter().map(|&v| round_down_ties(v) as i64).collect();
        let d2: f64 = x.iter().zip(&y).map(|(a, &b)| (a - b as f64).powi(2)).sum();
        return Ok((y, d2.sqrt()));
    }
    // table[j*p + a]: best shift and squared distance for residue a at coordinate j.
    let mut shift = vec![0i64; n * p];
    let mut dist = vec![0f64; n * p];
    for (j, &xj) in x.iter().enumerate() {
        for a in 0..p {
            let m = round_down_ties((xj - a as f64) / pf);
            let y = a as f64 + pf * m;
            shift[j * p + a] = a as i64 + l.p() as i64 * m as i64;
            dist[j * p + a] = (xj - y).powi(2);
        }
    }
    let words = l.codewords(budget)?;
    let mut best: Option<(f64, Vec<i64>)> = None;
    for w in words {
        let d2: f64 = w.iter().enumerate().map(|(j, &a)| dist[j * p + a as usize]).sum();
        let better = match &best {
            None => true,
            Some((bd, _)) if d2 < *bd => true,
            Some((bd, bp)) if d2 == *bd => {
                let cand: Vec<i64> = w.iter().enumerate().map(|(j, &a)| shift[j * p + a as usize]).collect();
                lex_less(&cand, bp)
            }
            _ => false,
        };
        if better {
            let cand = w.iter().enumerate().map(|(j, &a)| shift[j * p + a as usize]).collect();
            best = Some((d2, cand));
        }
    }
    let (d2, y) = best.expect("every code contains zero");
    Ok((y, d2.sqrt()))
}

/// `d(x, L)^2`.
pub fn second_moment_distance(l: &ConstructionALattice, x: &[f64]) -> Result<f64> {
    Ok(closest_point(l, x)?.1.powi(2))
}

/// Representative of residue `a` closest to zero (`a` itself on ties).
#[inline]
pub fn centered(a: u64, p: u64) -> i64 {
    if 2 * a <= p {
        a as i64
    } else {
        a as i64 - p as i64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingReport {
    pub r_pack: f64,
    pub shortest_length: f64,
    pub shortest_vector: Vec<i64>,
    pub codewords_checked: u64,
}

/// Packing radius `lambda_1 / 2`. Candidates are the centred lifts of every
/// nonzero codeword and `p e_1`; the first shortest one in enumeration order wins.
pub fn packing_radius(l: &ConstructionALattice) -> Result<PackingReport> {
    packing_radius_with_budget(l, DEFAULT_ENUMERATION_BUDGET)
}

pub fn packing_radius_with_budget(l: &ConstructionALattice, budget: u64) -> Result<PackingReport> {
    let n = l.n();
    let p = l.p();
    let mut best_vec: Vec<i64> = vec![0; n];
    let mut best = (p * p) as f64;
    let mut checked = 0;
    if l.code_dim() == n {
        best_vec[0] = 1;
        best = 1.0;
    } else {
        best_vec[0] = p as i64;
        for w in l.codewords(budget)? {
            checked += 1;
            if w.iter().all(|&a| a == 0) {
                continue;
            }
            let v: Vec<i64> = w.iter().map(|&a| centered(a, p)).collect();
            let len2 = v.iter().map(|&a| (a * a) as f64).sum::<f64>();
            if len2 < best {
                best = len2;
                best_vec = v;
            }
        }
    }
    let len = best.sqrt();
    Ok(PackingReport {
        r_pack: len / 2.0,
        shortest_length: len,
        shortest_vector: best_vec,
        codewords_checked: checked,
    })
}

/// `(vol / V_n)^(1/n)`.
pub fn effective_radius_from(ln_volume: f64, n: usize) -> f64 {
    ((ln_volume - ln_unit_ball_volume(n)) / n as f64).exp()
}

pub fn effective_radius(l: &ConstructionALattice) -> f64 {
    effective_radius_from(l.ln_volume(), l.n())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerKind {
    ExactCvp,
    BpApprox,
}

/// A lattice quantizer with a known volume and a period `q` such that
/// `qZ^n` is a sublattice, so uniform sampling on `[0,q)^n` is enough.
pub trait LatticeQuantizer: Sync {
    fn dimension(&self) -> usize;
    fn ln_volume(&self) -> f64;
    fn period(&self) -> f64;
    fn kind(&self) -> QuantizerKind;
    /// Quantized point for `x`.
    fn quantize(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl LatticeQuantizer for ConstructionALattice {
    fn dimension(&self) -> usize {
        self.n()
    }

    fn ln_volume(&self) -> f64 {
        ConstructionALattice::ln_volume(self)
    }

    fn period(&self) -> f64 {
        self.p() as f64
    }

    fn kind(&self) -> QuantizerKind {
        QuantizerKind::ExactCvp
    }

    fn quantize(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(closest_point(self, x)?.0.into_iter().map(|v| v as f64).collect())
    }
}

/// `factor * L` for an inner quantizer `L`.
pub struct Scaled<Q> {
    pub inner: Q,
    pub factor: f64,
}

impl<Q: LatticeQuantizer> LatticeQuantizer for Scaled<Q> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn ln_volume(&self) -> f64 {
        self.inner.ln_volume() + self.dimension() as f64 * self.factor.ln()
    }

    fn period(&self) -> f64 {
        self.factor * self.inner.period()
    }

    fn kind(&self) -> QuantizerKind {
        self.inner.kind()
    }

    fn quantize(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y: Vec<f64> = x.iter().map(|v| v / self.factor).collect();
        Ok(self.inner.quantize(&y)?.into_iter().map(|v| v * self.factor).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NsmEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub samples: u64,
    pub quantizer: QuantizerKind,
}

impl NsmEstimate {
    pub fn ci(&self) -> (f64, f64) {
        (self.mean - self.half_width, self.mean + self.half_width)
    }
}

/// Monte Carlo `G = E[d^2(U, L)] / (n vol^(2/n))` with `U` uniform on a period cube.
pub fn nsm_estimate(
    q: &dyn LatticeQuantizer,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<NsmEstimate> {
    if samples < 2 {
        return Err(Error::config("need at least 2 samples"));
    }
    let n = q.dimension();
    let period = q.period();
    let blocks = run_blocks(workers, seed, 4, samples as usize, |rng, _, len| {
        let mut m = Moments::default();
        let mut u = vec![0.0; n];
        for _ in 0..len {
            u.iter_mut().for_each(|x| *x = rng.random::<f64>() * period);
            let y = q.quantize(&u)?;
            m.push(u.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum());
        }
        Ok(m)
    })?;
    let m = blocks.into_iter().fold(Moments::default(), |mut acc, b| {
        acc.merge(&b);
        acc
    });
    let norm = n as f64 * (2.0 * q.ln_volume() / n as f64).exp();
    Ok(NsmEstimate {
        mean: m.mean() / norm,
        half_width: m.half_width() / norm,
        samples,
        quantizer: q.kind(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FpMatrix;
    use std::f64::consts::PI;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-13);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-13);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
        let stirling = |n: usize| {
            (ln_unit_ball_volume(n) / n as f64).exp() * (n as f64).sqrt() / (2.0 * PI * std::f64::consts::E).sqrt()
        };
        assert!((stirling(10_000) - 1.0).abs() < (stirling(100) - 1.0).abs());
        assert!((stirling(1_000_000) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_integer_points(&BallSpec::new(vec![0.0], 2.5), 1000).unwrap(), 5);
        assert_eq!(count_integer_points(&BallSpec::new(vec![0.0, 0.0], 1.0), 1000).unwrap(), 5);
        assert_eq!(count_integer_points(&BallSpec::new(vec![0.0; 3], 0.0), 1000).unwrap(), 1);
        let capped = BallSpec::new(vec![0.0, 0.0], 1.5).with_support_cap(1);
        assert_eq!(count_integer_points(&capped, 1000).unwrap(), 5);
        assert!(count_integer_points(&BallSpec::new(vec![0.0; 10], 5.0), 1000).unwrap_err().is_budget());
    }

    #[test]
    fn cvp_on_scaled_integer_lattice() {
        let l = ConstructionALattice::scaled_integer_lattice(3, 5).unwrap();
        let (y, d) = closest_point(&l, &[2.4, -2.6, 7.0]).unwrap();
        assert_eq!(y, vec![0, -5, 5]);
        assert!((d - (2.4f64.powi(2) + 2.4f64.powi(2) + 4.0).sqrt()).abs() < 1e-12);
        // Exactly halfway: the smaller point wins.
        let (y, _) = closest_point(&l, &[2.5, 0.0, 0.0]).unwrap();
        assert_eq!(y, vec![0, 0, 0]);
    }

    #[test]
    fn cvp_member_is_fixed() {
        let h = FpMatrix::from_rows(&[vec![1, 2, 3, 4], vec![0, 1, 1, 2]], 4, 5).unwrap();
        let l = ConstructionALattice::from_checks(h).unwrap();
        for row in l.basis() {
            let x: Vec<f64> = row.iter().map(|&v| v as f64).collect();
            let (y, d) = closest_point(&l, &x).unwrap();
            assert_eq!(y, row);
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn second_moment_on_2z() {
        let l = ConstructionALattice::scaled_integer_lattice(1, 2).unwrap();
        assert_eq!(second_moment_distance(&l, &[1.0]).unwrap(), 1.0);
        assert_eq!(second_moment_distance(&l, &[4.0]).unwrap(), 0.0);
    }

    #[test]
    fn packing_trivial() {
        let pz = ConstructionALattice::scaled_integer_lattice(4, 7).unwrap();
        assert_eq!(packing_radius(&pz).unwrap().r_pack, 3.5);
        let z = ConstructionALattice::integer_lattice(4, 7).unwrap();
        assert_eq!(packing_radius(&z).unwrap().r_pack, 0.5);
    }

    #[test]
    fn effective_radius_trivial() {
        let z = ConstructionALattice::integer_lattice(5, 3).unwrap();
        assert!((effective_radius(&z) - unit_ball_volume(5).powf(-0.2)).abs() < 1e-12);
        let pz = ConstructionALattice::scaled_integer_lattice(5, 3).unwrap();
        assert!((effective_radius(&pz) - 3.0 * unit_ball_volume(5).powf(-0.2)).abs() < 1e-12);
    }

    #[test]
    fn nsm_integer_lattice_small() {
        let z = ConstructionALattice::integer_lattice(2, 2).unwrap();
        let e = nsm_estimate(&z, 20_000, 1, 0).unwrap();
        assert!((e.mean - 1.0 / 12.0).abs() < 3.0 * e.half_width);
        assert_eq!(e.quantizer, QuantizerKind::ExactCvp);
    }
}
