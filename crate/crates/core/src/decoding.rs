//! Closest-point decoding and p-ary sum-product decoding on the Tanner graph.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FpMatrix;
use crate::geometry::{closest_point, LatticeQuantizer, QuantizerKind};
use crate::graph::SkeletonGraph;
use crate::lattice::ConstructionALattice;

pub const DEFAULT_WINDOW: usize = 4;

/// Closest lattice point (lexicographic tie-break).
pub fn ml_decode(l: &ConstructionALattice, y: &[f64]) -> Result<Vec<i64>> {
    Ok(closest_point(l, y)?.0)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Nearest integer, ties toward the smaller one.
#[inline]
fn round_down_ties(t: f64) -> f64 {
    (t - 0.5).ceil()
}

/// Gaussian likelihood of `y` folded onto the residues mod `p`:
/// `mass(a) ∝ Σ_w exp(-(y - a - p w)^2 / (2 sigma^2))`, with `w` running over
/// `window` periods on each side of `floor(y/p)`. `sigma = 0` gives the
/// indicator of the nearest integer's residue.
pub fn coordinate_priors(y: f64, sigma: f64, p: u64, window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::config("window must be at least 1"));
    }
    if !y.is_finite() || !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("bad observation y={y}, sigma={sigma}")));
    }
    let pu = p as usize;
    if sigma == 0.0 {
        let mut m = vec![0.0; pu];
        m[(round_down_ties(y) as i64).rem_euclid(p as i64) as usize] = 1.0;
        return Ok(m);
    }
    let pf = p as f64;
    let base = (y / pf).floor() as i64;
    let w = window as i64;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut terms = Vec::with_capacity(2 * window + 1);
    let logs: Vec<f64> = (0..pu)
        .map(|a| {
            terms.clear();
            for k in base - w..=base + w {
                let d = y - a as f64 - pf * k as f64;
                terms.push(-d * d * inv);
            }
            log_sum_exp(&terms)
        })
        .collect();
    let z = log_sum_exp(&logs);
    Ok(logs.iter().map(|l| (l - z).exp()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub max_iters: usize,
    /// Weight of the previous variable-to-check message, in `[0, 1)`.
    pub damping: f64,
    /// Stop as soon as the hard decision satisfies every check.
    pub early_stop: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            max_iters: 50,
            damping: 0.0,
            early_stop: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpOutcome {
    pub residues: Vec<u64>,
    pub converged: bool,
    pub iterations: usize,
    pub beliefs: Vec<Vec<f64>>,
    /// Largest `|sum - 1|` over every message produced.
    pub max_normalization_error: f64,
}

/// Sum-product decoder for `Hx = 0` over F_p with a flooding schedule.
/// Check updates convolve coefficient-permuted masses with length-`p` DFTs.
pub struct BpDecoder {
    p: usize,
    n: usize,
    check_edges: Vec<std::ops::Range<usize>>,
    edge_var: Vec<usize>,
    edge_coef: Vec<u64>,
    var_edges: Vec<Vec<usize>>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    config: BpConfig,
}

impl BpDecoder {
    /// Edges are the nonzero entries of `h`.
    pub fn new(h: &FpMatrix, config: BpConfig) -> Result<Self> {
        if !(0.0..1.0).contains(&config.damping) {
            return Err(Error::config(format!("damping {} outside [0,1)", config.damping)));
        }
        let p = h.modulus() as usize;
        let n = h.cols();
        let mut check_edges = Vec::with_capacity(h.rows());
        let mut edge_var = Vec::new();
        let mut edge_coef = Vec::new();
        let mut var_edges = vec![Vec::new(); n];
        for i in 0..h.rows() {
            let start = edge_var.len();
            for (j, &c) in h.row(i).iter().enumerate() {
                if c != 0 {
                    var_edges[j].push(edge_var.len());
                    edge_var.push(j);
                    edge_coef.push(c);
                }
            }
            check_edges.push(start..edge_var.len());
        }
        let mut planner = FftPlanner::new();
        Ok(BpDecoder {
            p,
            n,
            check_edges,
            edge_var,
            edge_coef,
            var_edges,
            fft: planner.plan_fft_forward(p),
            ifft: planner.plan_fft_inverse(p),
            config,
        })
    }

    /// As [`BpDecoder::new`], warning about skeleton edges whose random
    /// coefficient came out zero; those edges are left out of the graph.
    pub fn with_skeleton(h: &FpMatrix, skeleton: &SkeletonGraph, config: BpConfig) -> Result<Self> {
        let dropped = skeleton
            .check_lists()
            .iter()
            .enumerate()
            .map(|(c, l)| l.iter().filter(|&&v| h.get(c, v) == 0).count())
            .sum::<usize>();
        if dropped > 0 {
            log::warn!("dropping {dropped} zero-coefficient edges from the decoding graph");
        }
        Self::new(h, config)
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    pub fn config(&self) -> &BpConfig {
        &self.config
    }

    fn satisfied(&self, x: &[u64]) -> bool {
        let p = self.p as u64;
        self.check_edges.iter().all(|r| {
            r.clone()
                .map(|e| self.edge_coef[e] * x[self.edge_var[e]] % p)
                .sum::<u64>()
                % p
                == 0
        })
    }

    /// Leave-one-out convolution for one check. `q` holds the incoming
    /// masses for the check's edges, `out` receives the outgoing ones.
    fn check_update(&self, edges: std::ops::Range<usize>, q: &[f64], out: &mut [f64], scratch: &mut CheckScratch) {
        let p = self.p;
        let d = edges.len();
        let pu = p as u64;
        if d == 0 {
            return;
        }
        let spec = &mut scratch.spectra;
        spec.resize(d * p, Complex64::default());
        for (i, e) in edges.clone().enumerate() {
            let h = self.edge_coef[e];
            let s = &mut spec[i * p..(i + 1) * p];
            for a in 0..p {
                s[(h * a as u64 % pu) as usize] = Complex64::new(q[e * p + a], 0.0);
            }
            self.fft.process_with_scratch(s, &mut scratch.fft);
        }
        let suffix = &mut scratch.suffix;
        suffix.resize((d + 1) * p, Complex64::default());
        suffix[d * p..].fill(Complex64::new(1.0, 0.0));
        for i in (0..d).rev() {
            for k in 0..p {
                suffix[i * p + k] = suffix[(i + 1) * p + k] * spec[i * p + k];
            }
        }
        let prefix = &mut scratch.prefix;
        prefix.clear();
        prefix.resize(p, Complex64::new(1.0, 0.0));
        let buf = &mut scratch.buf;
        buf.resize(p, Complex64::default());
        let scale = 1.0 / p as f64;
        for (i, e) in edges.enumerate() {
            for k in 0..p {
                buf[k] = prefix[k] * suffix[(i + 1) * p + k];
                prefix[k] *= spec[i * p + k];
            }
            self.ifft.process_with_scratch(buf, &mut scratch.fft);
            let h = self.edge_coef[e];
            let o = &mut out[e * p..(e + 1) * p];
            for (a, slot) in o.iter_mut().enumerate() {
                let idx = (pu - h * a as u64 % pu) % pu;
                *slot = (buf[idx as usize].re * scale).max(0.0);
            }
            normalize(o);
        }
    }

    /// Run the decoder on per-coordinate priors (each a mass over F_p).
    pub fn decode(&self, priors: &[Vec<f64>]) -> Result<BpOutcome> {
        let p = self.p;
        if priors.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: priors.len(),
            });
        }
        if let Some(bad) = priors.iter().find(|m| m.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: bad.len(),
            });
        }
        let e_count = self.edge_count();
        let mut v2c = vec![0.0; e_count * p];
        for (e, &v) in self.edge_var.iter().enumerate() {
            v2c[e * p..(e + 1) * p].copy_from_slice(&priors[v]);
        }
        let mut c2v = vec![0.0; e_count * p];
        let mut scratch = CheckScratch::new(self.fft.get_inplace_scratch_len().max(self.ifft.get_inplace_scratch_len()));
        let mut beliefs: Vec<Vec<f64>> = priors.to_vec();
        beliefs.iter_mut().for_each(|b| normalize(b));
        let mut residues: Vec<u64> = beliefs.iter().map(|b| argmax(b)).collect();
        let mut max_err: f64 = 0.0;
        let mut iterations = 0;
        let mut converged = self.satisfied(&residues);
        if converged && self.config.early_stop {
            return Ok(BpOutcome {
                residues,
                converged,
                iterations,
                beliefs,
                max_normalization_error: max_err,
            });
        }
        let mut tmp = vec![0.0; p];
        while iterations < self.config.max_iters {
            iterations += 1;
            for r in &self.check_edges {
                self.check_update(r.clone(), &v2c, &mut c2v, &mut scratch);
                for e in r.clone() {
                    max_err = max_err.max(norm_error(&c2v[e * p..(e + 1) * p]));
                }
            }
            for (v, edges) in self.var_edges.iter().enumerate() {
                // Leave-one-out products via a running prefix and a suffix table.
                let d = edges.len();
                let mut suffix = vec![1.0; (d + 1) * p];
                for i in (0..d).rev() {
                    let e = edges[i];
                    for a in 0..p {
                        suffix[i * p + a] = suffix[(i + 1) * p + a] * c2v[e * p + a];
                    }
                }
                let mut prefix = priors[v].clone();
                for (i, &e) in edges.iter().enumerate() {
                    for a in 0..p {
                        tmp[a] = prefix[a] * suffix[(i + 1) * p + a];
                        prefix[a] *= c2v[e * p + a];
                    }
                    normalize(&mut tmp);
                    let old = &mut v2c[e * p..(e + 1) * p];
                    let dmp = self.config.damping;
                    for a in 0..p {
                        old[a] = (1.0 - dmp) * tmp[a] + dmp * old[a];
                    }
                    normalize(old);
                    max_err = max_err.max(norm_error(old));
                    // Keep the running product on a sane scale.
                    normalize(&mut prefix);
                }
                normalize(&mut prefix);
                beliefs[v] = prefix;
            }
            residues = beliefs.iter().map(|b| argmax(b)).collect();
            converged = self.satisfied(&residues);
            if converged && self.config.early_stop {
                break;
            }
        }
        Ok(BpOutcome {
            residues,
            converged,
            iterations,
            beliefs,
            max_normalization_error: max_err,
        })
    }
}

struct CheckScratch {
    spectra: Vec<Complex64>,
    suffix: Vec<Complex64>,
    prefix: Vec<Complex64>,
    buf: Vec<Complex64>,
    fft: Vec<Complex64>,
}

impl CheckScratch {
    fn new(fft_len: usize) -> Self {
        CheckScratch {
            spectra: Vec::new(),
            suffix: Vec::new(),
            prefix: Vec::new(),
            buf: Vec::new(),
            fft: vec![Complex64::default(); fft_len],
        }
    }
}

/// Scale to unit sum; a mass that vanished or blew up becomes uniform.
fn normalize(m: &mut [f64]) {
    let s: f64 = m.iter().sum();
    if s > 0.0 && s.is_finite() {
        m.iter_mut().for_each(|x| *x /= s);
    } else {
        let u = 1.0 / m.len() as f64;
        m.iter_mut().for_each(|x| *x = u);
    }
}

fn norm_error(m: &[f64]) -> f64 {
    (m.iter().sum::<f64>() - 1.0).abs()
}

/// Index of the largest entry, smallest index on ties.
fn argmax(m: &[f64]) -> u64 {
    let mut best = 0;
    for (i, &x) in m.iter().enumerate() {
        if x > m[best] {
            best = i;
        }
    }
    best as u64
}

/// Naive `O(p^2)` version of the check-to-variable map, for testing the
/// transform-based update: for target edge `i`, mass over `x_i` of
/// `Σ_j h_j x_j = 0` with the other `x_j` drawn from `masses[j]`.
pub fn check_message_naive(coefs: &[u64], masses: &[Vec<f64>], target: usize, p: u64) -> Vec<f64> {
    let pu = p as usize;
    let mut dist = vec![0.0; pu];
    dist[0] = 1.0;
    for (j, (h, m)) in coefs.iter().zip(masses).enumerate() {
        if j == target {
            continue;
        }
        let mut next = vec![0.0; pu];
        for (s, &ds) in dist.iter().enumerate() {
            if ds == 0.0 {
                continue;
            }
            for (a, &ma) in m.iter().enumerate() {
                next[(s + (*h as usize * a) % pu) % pu] += ds * ma;
            }
        }
        dist = next;
    }
    let h = coefs[target];
    let mut out: Vec<f64> = (0..pu)
        .map(|a| dist[((pu as u64 - h * a as u64 % p) % p) as usize])
        .collect();
    normalize(&mut out);
    out
}

/// Transform-based check message for a single isolated check, exposed so
/// it can be compared against [`check_message_naive`].
pub fn check_message_fft(coefs: &[u64], masses: &[Vec<f64>], target: usize, p: u64) -> Result<Vec<f64>> {
    let n = coefs.len();
    let row: Vec<u64> = coefs.iter().map(|c| c % p).collect();
    if row.contains(&0) {
        return Err(Error::config("coefficients must be nonzero"));
    }
    let h = FpMatrix::from_rows(&[row], n, p)?;
    let dec = BpDecoder::new(&h, BpConfig::default())?;
    let pu = p as usize;
    let q: Vec<f64> = masses.iter().flatten().copied().collect();
    let mut out = vec![0.0; n * pu];
    let mut scratch = CheckScratch::new(dec.fft.get_inplace_scratch_len().max(dec.ifft.get_inplace_scratch_len()));
    dec.check_update(0..n, &q, &mut out, &mut scratch);
    Ok(out[target * pu..(target + 1) * pu].to_vec())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpLatticeDecision {
    pub point: Vec<i64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Lift residues to the integers nearest `y` in each residue class.
pub fn lift_residues(residues: &[u64], y: &[f64], p: u64) -> Vec<i64> {
    let pf = p as f64;
    residues
        .iter()
        .zip(y)
        .map(|(&a, &yj)| a as i64 + p as i64 * round_down_ties((yj - a as f64) / pf) as i64)
        .collect()
}

/// BP on folded Gaussian priors followed by a per-coordinate lift. When BP
/// does not reach a codeword the decision falls back to rounding `y`
/// coordinate-wise and is flagged as not converged.
pub fn lattice_decode_bp(
    decoder: &BpDecoder,
    l: &ConstructionALattice,
    y: &[f64],
    sigma: f64,
) -> Result<BpLatticeDecision> {
    let priors = y
        .iter()
        .map(|&yj| coordinate_priors(yj, sigma, l.p(), DEFAULT_WINDOW))
        .collect::<Result<Vec<_>>>()?;
    let out = decoder.decode(&priors)?;
    let point = if out.converged {
        lift_residues(&out.residues, y, l.p())
    } else {
        y.iter().map(|&v| round_down_ties(v) as i64).collect()
    };
    Ok(BpLatticeDecision {
        point,
        converged: out.converged,
        iterations: out.iterations,
    })
}

/// Approximate quantizer: BP decoding of the point with a fixed prior width.
pub struct BpQuantizer<'a> {
    pub lattice: &'a ConstructionALattice,
    pub decoder: BpDecoder,
    pub sigma: f64,
}

impl<'a> BpQuantizer<'a> {
    pub fn new(lattice: &'a ConstructionALattice, sigma: f64, config: BpConfig) -> Result<Self> {
        Ok(BpQuantizer {
            lattice,
            decoder: BpDecoder::new(lattice.check_matrix(), config)?,
            sigma,
        })
    }
}

impl LatticeQuantizer for BpQuantizer<'_> {
    fn dimension(&self) -> usize {
        self.lattice.n()
    }

    fn ln_volume(&self) -> f64 {
        self.lattice.ln_volume()
    }

    fn period(&self) -> f64 {
        self.lattice.p() as f64
    }

    fn kind(&self) -> QuantizerKind {
        QuantizerKind::BpApprox
    }

    fn quantize(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = lattice_decode_bp(&self.decoder, self.lattice, x, self.sigma)?;
        Ok(d.point.into_iter().map(|v| v as f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priors_symmetric_at_zero() {
        let m = coordinate_priors(0.0, 1.3, 5, 4).unwrap();
        assert_eq!(argmax(&m), 0);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((m[1] - m[4]).abs() < 1e-12);
    }

    #[test]
    fn priors_concentrate() {
        let m = coordinate_priors(3.1, 0.0, 5, 4).unwrap();
        assert_eq!(m, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
        let m = coordinate_priors(3.1, 1e-3, 5, 4).unwrap();
        assert!((m[3] - 1.0).abs() < 1e-12);
        assert!(coordinate_priors(1.0, 1.0, 5, 0).is_err());
    }

    #[test]
    fn priors_window_converges() {
        let a = coordinate_priors(1.7, 1.0, 5, 3).unwrap();
        let b = coordinate_priors(1.7, 1.0, 5, 50).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn fft_check_matches_naive() {
        let coefs = [3u64, 1, 4, 2];
        let masses = vec![
            vec![0.1, 0.2, 0.3, 0.25, 0.15],
            vec![0.5, 0.1, 0.1, 0.2, 0.1],
            vec![0.2, 0.2, 0.2, 0.2, 0.2],
            vec![0.05, 0.05, 0.6, 0.1, 0.2],
        ];
        for t in 0..4 {
            let a = check_message_naive(&coefs, &masses, t, 5);
            let b = check_message_fft(&coefs, &masses, t, 5).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_codeword_decodes() {
        let h = FpMatrix::from_rows(&[vec![1, 2, 0, 3], vec![0, 1, 4, 1]], 4, 5).unwrap();
        let code = h.nullspace_basis();
        let words = code.codewords(1000).unwrap();
        let dec = BpDecoder::new(&h, BpConfig::default()).unwrap();
        for w in words {
            let priors: Vec<Vec<f64>> = w
                .iter()
                .map(|&a| {
                    let mut m = vec![0.0; 5];
                    m[a as usize] = 1.0;
                    m
                })
                .collect();
            let out = dec.decode(&priors).unwrap();
            assert!(out.converged);
            assert_eq!(out.residues, w);
            assert!(out.iterations <= 1);
        }
    }

    #[test]
    fn identity_checks_round_to_multiples() {
        let l = ConstructionALattice::scaled_integer_lattice(3, 5).unwrap();
        let dec = BpDecoder::new(l.check_matrix(), BpConfig::default()).unwrap();
        let y = [2.4, -2.6, 7.0];
        let d = lattice_decode_bp(&dec, &l, &y, 1.0).unwrap();
        assert!(d.converged);
        assert_eq!(d.point, vec![0, -5, 5]);
    }

    #[test]
    fn damping_validated() {
        let h = FpMatrix::identity(2, 3).unwrap();
        let cfg = BpConfig {
            damping: 1.0,
            ..BpConfig::default()
        };
        assert!(BpDecoder::new(&h, cfg).is_err());
    }
}
