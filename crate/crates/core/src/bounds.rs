//! Closed-form parameter conditions and finite-n evaluation of the goodness
//! bounds. Every sum is taken in the log domain; nothing is simplified
//! asymptotically before evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{count_integer_points, ln_unit_ball_volume, BallSpec};
use crate::graph::ExpansionParams;

const INDEX_TOL: f64 = 1e-9;

fn default_omega() -> f64 {
    0.1
}

/// Rate, field-size exponent `lambda` (`p = n^lambda`), the expansion
/// parameters and the ball-inflation exponent `omega`. When deserializing,
/// `epsilon`, `vartheta` and `omega` fall back to the defaults of [`ParameterSet::new`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "ParameterInput")]
pub struct ParameterSet {
    #[serde(rename = "R")]
    pub rate: f64,
    pub lambda: f64,
    pub alpha: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub beta: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub epsilon: f64,
    pub vartheta: f64,
    /// `rho = r_eff (1 + n^-omega)` in the variance terms.
    pub omega: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParameterInput {
    #[serde(rename = "R")]
    rate: f64,
    lambda: f64,
    alpha: f64,
    #[serde(rename = "A")]
    a: f64,
    beta: f64,
    #[serde(rename = "B")]
    b: f64,
    epsilon: Option<f64>,
    vartheta: Option<f64>,
    omega: Option<f64>,
}

impl From<ParameterInput> for ParameterSet {
    fn from(i: ParameterInput) -> Self {
        let mut ps = ParameterSet::new(i.rate, i.lambda, i.alpha, i.a, i.beta, i.b);
        ps.epsilon = i.epsilon.unwrap_or(ps.epsilon);
        ps.vartheta = i.vartheta.unwrap_or(ps.vartheta);
        ps.omega = i.omega.unwrap_or(ps.omega);
        ps
    }
}

impl ParameterSet {
    /// Default radii `epsilon = (1-R)/(A+1-R)`, `vartheta = 1/(B(1-R)+1)` and `omega = 0.1`.
    pub fn new(rate: f64, lambda: f64, alpha: f64, a: f64, beta: f64, b: f64) -> Self {
        let e = ExpansionParams::with_default_radii(rate, alpha, a, beta, b);
        ParameterSet {
            rate,
            lambda,
            alpha,
            a,
            beta,
            b,
            epsilon: e.epsilon,
            vartheta: e.vartheta,
            omega: default_omega(),
        }
    }

    /// `R = 1/3, lambda = 10, alpha = 2, A = 8, beta = 2.85, B = 8`: satisfies
    /// every threshold in this module.
    pub fn reference() -> Self {
        Self::new(1.0 / 3.0, 10.0, 2.0, 8.0, 2.85, 8.0)
    }

    pub fn expansion(&self) -> ExpansionParams {
        ExpansionParams {
            alpha: self.alpha,
            a: self.a,
            beta: self.beta,
            b: self.b,
            epsilon: self.epsilon,
            vartheta: self.vartheta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate < 1.0) {
            return Err(Error::Domain(format!("rate {} outside (0,1)", self.rate)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda {} must be positive", self.lambda)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::Domain(format!("omega {} must be positive", self.omega)));
        }
        self.expansion().validate(self.rate)
    }
}

fn positive(name: &'static str, den: f64) -> Result<f64> {
    if den > 0.0 && den.is_finite() {
        Ok(den)
    } else {
        Err(Error::Domain(format!("non-positive denominator in {name}: {den}")))
    }
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn common_terms(ps: &ParameterSet, a_shift: f64) -> Result<[f64; 5]> {
    let r = ps.rate;
    let c = 1.0 - r;
    let ab = positive("1/(AB-1)", ps.a * ps.b - 1.0)?;
    Ok([
        1.0 / positive("1/R", r)?,
        1.0 / positive("1/(1-R)", c)?,
        2.0 / positive("2/(A-2(1+-R))", ps.a - 2.0 * a_shift)?,
        2.0 / positive("2/(B(1-R)-2(1+R))", ps.b * c - 2.0 * (1.0 + r))?,
        2.0 / positive("2(1-1/(AB-1)-1/A)^-1", 1.0 - 1.0 / ab - 1.0 / positive("1/A", ps.a)?)?,
    ])
}

fn main_terms(ps: &ParameterSet, a_shift: f64) -> Result<[f64; 7]> {
    let c = 1.0 - ps.rate;
    let [t1, t2, t3, t4, t5] = common_terms(ps, a_shift)?;
    let t6 = 1.0 / positive("1/(2(alpha-1+R))", 2.0 * (ps.alpha - 1.0 + ps.rate))?;
    let t7 = (2.0 * ps.b + 1.5) / positive("(2B+3/2)/(B(1-R)-1)", ps.b * c - 1.0)?;
    Ok([t1, t2, t3, t4, t5, t6, t7])
}

/// The seven expressions of the simultaneous-goodness condition on `lambda`,
/// with the A-term as printed: `2/(A-2(1-R))`.
pub fn lambda_terms_main(ps: &ParameterSet) -> Result<[f64; 7]> {
    main_terms(ps, 1.0 - ps.rate)
}

/// As [`lambda_terms_main`] with the A-term `2/(A-2(1+R))` used by the
/// quantization condition.
pub fn lambda_terms_main_alt(ps: &ParameterSet) -> Result<[f64; 7]> {
    main_terms(ps, 1.0 + ps.rate)
}

pub fn lambda_threshold_main(ps: &ParameterSet) -> Result<f64> {
    Ok(max_of(&lambda_terms_main(ps)?))
}

pub fn lambda_threshold_main_alt(ps: &ParameterSet) -> Result<f64> {
    Ok(max_of(&lambda_terms_main_alt(ps)?))
}

/// The five expressions of the MSE-quantization condition.
pub fn lambda_terms_mse(ps: &ParameterSet) -> Result<[f64; 5]> {
    common_terms(ps, 1.0 + ps.rate)
}

pub fn lambda_threshold_mse(ps: &ParameterSet) -> Result<f64> {
    Ok(max_of(&lambda_terms_mse(ps)?))
}

/// `[1/(2(alpha-1+R)), 3/(2(A-1+R)), 1/(B(1-R)-1)]`.
pub fn lambda_terms_awgn(ps: &ParameterSet) -> Result<[f64; 3]> {
    let r = ps.rate;
    Ok([
        1.0 / positive("1/(2(alpha-1+R))", 2.0 * (ps.alpha - 1.0 + r))?,
        3.0 / positive("3/(2(A-1+R))", 2.0 * (ps.a - 1.0 + r))?,
        1.0 / positive("1/(B(1-R)-1)", ps.b * (1.0 - r) - 1.0)?,
    ])
}

pub fn lambda_threshold_awgn(ps: &ParameterSet) -> Result<f64> {
    Ok(max_of(&lambda_terms_awgn(ps)?))
}

/// `[1/(2(1-R)), (2B+3/2)/(B(1-R)-1)]`, the dual-packing condition.
pub fn lambda_terms_dual_packing(ps: &ParameterSet) -> Result<[f64; 2]> {
    let c = 1.0 - ps.rate;
    Ok([
        1.0 / positive("1/(2(1-R))", 2.0 * c)?,
        (2.0 * ps.b + 1.5) / positive("(2B+3/2)/(B(1-R)-1)", ps.b * c - 1.0)?,
    ])
}

pub fn lambda_threshold_dual_packing(ps: &ParameterSet) -> Result<f64> {
    Ok(max_of(&lambda_terms_dual_packing(ps)?))
}

/// The two readings of the A-term side by side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ATermDiscrepancy {
    /// `2/(A-2(1-R))`.
    pub printed: f64,
    /// `2/(A-2(1+R))`.
    pub alternative: f64,
    pub threshold_printed: f64,
    pub threshold_alternative: f64,
    /// True when the choice moves the overall threshold.
    pub changes_threshold: bool,
}

pub fn a_term_discrepancy(ps: &ParameterSet) -> Result<ATermDiscrepancy> {
    let a = lambda_terms_main(ps)?;
    let b = lambda_terms_main_alt(ps)?;
    let (tp, ta) = (max_of(&a), max_of(&b));
    Ok(ATermDiscrepancy {
        printed: a[2],
        alternative: b[2],
        threshold_printed: tp,
        threshold_alternative: ta,
        changes_threshold: tp != ta,
    })
}

/// `½ min{lambda(A-2(1+R)) - 2, lambda(B(1-R)-2(1+R)) - 1}`.
pub fn delta_mse(ps: &ParameterSet) -> f64 {
    let r = ps.rate;
    let first = ps.lambda * (ps.a - 2.0 * (1.0 + r)) - 2.0;
    let second = ps.lambda * (ps.b * (1.0 - r) - 2.0 * (1.0 + r)) - 1.0;
    0.5 * first.min(second)
}

/// `A > 2(1+R)`, `B > 2(1+R)/(1-R)` and `lambda` above the MSE threshold.
pub fn mse_hypotheses_hold(ps: &ParameterSet) -> bool {
    let r = ps.rate;
    ps.a > 2.0 * (1.0 + r)
        && ps.b > 2.0 * (1.0 + r) / (1.0 - r)
        && lambda_threshold_mse(ps).is_ok_and(|t| ps.lambda > t)
}

/// Constants of the dual-lattice packing argument at length `n`, with `p = n^lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualConstants {
    pub n: usize,
    pub c1: f64,
    /// `C1 / ((1-R) ln n)`.
    pub x: f64,
    pub zeta: f64,
    pub ln_zeta: f64,
    /// `ln r_n` with `r_n = p^R zeta_n / V_n^(1/n)`.
    pub ln_r_n: f64,
    /// Effective radius of the scaled dual, volume `p^(nR)`.
    pub ln_r_eff_dual: f64,
}

fn ln_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("length {n} must be at least 2")));
    }
    Ok((n as f64).ln())
}

pub fn dual_constants(ps: &ParameterSet, n: usize) -> Result<DualConstants> {
    let ln = ln_n(n)?;
    let nf = n as f64;
    let c = 1.0 - ps.rate;
    let k = 8.0 / positive("C1 numerator", 1.0 - c / (2.0 * ps.alpha))?;
    let c1 = k.ln() / (ps.lambda * positive("C1 denominator", 1.0 - c / ps.alpha)?);
    let x = c1 / (c * ln);
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!(
            "C1/((1-R) ln n) = {x} outside (0,1) at n = {n}"
        )));
    }
    let ln_zeta = -4.0 / nf * ln + 4.0 * x * (c1 / (std::f64::consts::E * c * ln)).ln() + 2.0 * (1.0 - x).ln();
    let ln_r_eff_dual = ps.lambda * ps.rate * ln - ln_unit_ball_volume(n) / nf;
    Ok(DualConstants {
        n,
        c1,
        x,
        zeta: ln_zeta.exp(),
        ln_zeta,
        ln_r_n: ln_r_eff_dual + ln_zeta,
        ln_r_eff_dual,
    })
}

/// `n^-(2 lambda + delta)`.
pub fn fullrank_bound(n: f64, lambda: f64, delta: f64) -> f64 {
    n.powf(-(2.0 * lambda + delta))
}

pub fn ln_fullrank_bound(n: f64, lambda: f64, delta: f64) -> f64 {
    -(2.0 * lambda + delta) * n.ln()
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^x`; `-inf` for an empty sequence.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = max_of(&v);
    if m.is_infinite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn floor_idx(x: f64) -> i64 {
    (x + INDEX_TOL).floor() as i64
}

fn ceil_idx(x: f64) -> i64 {
    (x - INDEX_TOL).ceil() as i64
}

/// `3/2 + lambda + 2B - lambda B (1-R)`: the per-step exponent of the first
/// dual-packing regime, negative exactly when `lambda` clears `(2B+3/2)/(B(1-R)-1)`.
pub fn phi1_exponent(ps: &ParameterSet) -> f64 {
    1.5 + ps.lambda + 2.0 * ps.b - ps.lambda * ps.b * (1.0 - ps.rate)
}

/// Natural logs of the four regime bounds of the dual packing argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPackingPhis {
    pub n: usize,
    pub ln_phi: [f64; 4],
    pub phi1_exponent: f64,
}

pub fn dual_packing_phis(ps: &ParameterSet, n: usize) -> Result<DualPackingPhis> {
    let ln = ln_n(n)?;
    let nf = n as f64;
    let c = 1.0 - ps.rate;
    let lp = ps.lambda * ln;

    let e1 = phi1_exponent(ps);
    if e1 >= -1e-12 {
        return Err(Error::ExponentNonNegative(e1));
    }
    let step = ps.b * std::f64::consts::LN_2 + c.ln() + e1 * ln;
    let t_max = floor_idx(ps.vartheta * nf * c);
    let phi1 = log_sum_exp((1..=t_max).map(|t| t as f64 * step));

    let phi2 = nf * c * std::f64::consts::LN_2 - (ps.beta * c - 1.0) * ps.vartheta * nf * c * lp
        + nf * (4.0 / (ps.beta * ps.vartheta * c)).ln();

    let dc = dual_constants(ps, n)?;
    let k = (8.0 / (1.0 - c / (2.0 * ps.alpha))).ln();
    let lo = ceil_idx(nf * c / 2.0);
    let hi = floor_idx(nf * (c - dc.c1 / ln));
    let shift = nf * c * (1.0 - c / ps.alpha);
    let phi3 = log_sum_exp((lo..=hi).map(|t| {
        let t = t as f64;
        nf * k + lp * (t - shift - t / ps.alpha)
    }));

    let phi4 = ln + 2.0 * nf * dc.c1 / (c * ln) * (std::f64::consts::E * c * ln / dc.c1).ln()
        - nf * (1.0 - dc.x).ln()
        + nf / 2.0 * dc.ln_zeta;

    Ok(DualPackingPhis {
        n,
        ln_phi: [phi1, phi2, phi3, phi4],
        phi1_exponent: e1,
    })
}

/// How `E(rho) = |Z^n ∩ rho B|^2 / p^(2n(1-R))` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EnergyMode {
    Supplied { ln_energy: f64 },
    /// Exact integer-point count; tiny `n` only.
    Exact { budget: u64 },
    /// `V_n (rho + sqrt(n)/2)^n` in place of the count.
    UpperBound,
    /// `V_n max(0, rho - sqrt(n)/2)^n` in place of the count.
    LowerBound,
}

/// `ln rho` with `rho = r_eff (1 + n^-omega)` and `vol = p^(n(1-R))`.
pub fn ln_inflated_radius(ps: &ParameterSet, n: usize) -> Result<f64> {
    let ln = ln_n(n)?;
    let nf = n as f64;
    let ln_r_eff = ps.lambda * (1.0 - ps.rate) * ln - ln_unit_ball_volume(n) / nf;
    Ok(ln_r_eff + (-ps.omega * ln).exp().ln_1p())
}

pub fn ln_energy(ps: &ParameterSet, n: usize, mode: EnergyMode) -> Result<f64> {
    if let EnergyMode::Supplied { ln_energy } = mode {
        return Ok(ln_energy);
    }
    let ln = ln_n(n)?;
    let nf = n as f64;
    let ln_rho = ln_inflated_radius(ps, n)?;
    let rho = ln_rho.exp();
    let h = nf.sqrt() / 2.0;
    let ln_count = match mode {
        EnergyMode::Supplied { .. } => unreachable!(),
        EnergyMode::Exact { budget } => {
            (count_integer_points(&BallSpec::new(vec![0.0; n], rho), budget)? as f64).ln()
        }
        EnergyMode::UpperBound => ln_unit_ball_volume(n) + nf * (ln_rho + (h / rho).ln_1p()),
        EnergyMode::LowerBound => {
            if rho <= h {
                f64::NEG_INFINITY
            } else {
                ln_unit_ball_volume(n) + nf * (ln_rho + (-h / rho).ln_1p())
            }
        }
    };
    Ok(2.0 * (ln_count - nf * (1.0 - ps.rate) * ps.lambda * ln))
}

/// Natural logs of the three variance terms at length `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceTerms {
    pub n: usize,
    pub ln_rho: f64,
    pub energy_mode: EnergyMode,
    pub ln_energy: f64,
    pub ln_terms: [f64; 3],
    /// `ln(3 E n^-(2 lambda R + delta))`, for advisory comparison only.
    pub ln_envelope: f64,
}

impl VarianceTerms {
    /// `[term1, term2/E, term3/E]` in logs.
    pub fn ln_normalized(&self) -> [f64; 3] {
        [
            self.ln_terms[0],
            self.ln_terms[1] - self.ln_energy,
            self.ln_terms[2] - self.ln_energy,
        ]
    }

    /// `ln(term / envelope)` per term; positive entries exceed the envelope.
    pub fn envelope_margins(&self) -> [f64; 3] {
        self.ln_terms.map(|t| t - self.ln_envelope)
    }
}

/// `ln f(i)` with `f(i) = (n/(n-Bi))^((n-Bi+1)/2)`, replaced by its
/// envelope `e^(Bi/2)` once `Bi >= n`.
pub fn ln_f(n: usize, b: f64, i: usize) -> f64 {
    let nf = n as f64;
    let bi = b * i as f64;
    if bi < nf {
        -(nf - bi + 1.0) / 2.0 * (-bi / nf).ln_1p()
    } else {
        bi / 2.0
    }
}

pub fn variance_terms(ps: &ParameterSet, n: usize, mode: EnergyMode) -> Result<VarianceTerms> {
    let ln = ln_n(n)?;
    let nf = n as f64;
    let (r, c, lam, a, b) = (ps.rate, 1.0 - ps.rate, ps.lambda, ps.a, ps.b);
    let ln_rho = ln_inflated_radius(ps, n)?;
    let le = ln_energy(ps, n, mode)?;
    let m = floor_idx(nf * c).max(0) as usize;

    let s_max = floor_idx(nf * c / (a + 1.0 - r));
    let t1 = log_sum_exp((1..=s_max).map(|s| s as f64 * (2.0 - lam * (a - 2.0)) * ln));

    let j_max = (floor_idx(nf * c / (b * c + 1.0)).max(0) as usize).min(m);
    let lf: Vec<f64> = (0..=m).map(|i| ln_f(n, b, i)).collect();

    let g: Vec<f64> = (0..=m)
        .map(|i| lf[i] + i as f64 * (1.0 - lam * (b * c - 2.0)) * ln)
        .collect();
    let mut prefix = g.clone();
    for i in 1..=m {
        prefix[i] = log_add_exp(prefix[i - 1], g[i]);
    }
    let head = log_sum_exp(g[1..].iter().copied());
    let t2 = le
        + log_sum_exp((0..=j_max).map(|j| g[j] + if j == 0 { head } else { prefix[m - j] }));

    let kappa = 1.0 + lam * (1.0 / (a * b - 1.0) + 1.0 / a - 1.0);
    let u: Vec<f64> = (0..=m).map(|i| i as f64 * kappa * ln).collect();
    let mut suffix = u.clone();
    for i in (0..m).rev() {
        suffix[i] = log_add_exp(suffix[i + 1], u[i]);
    }
    let head3 = log_sum_exp(u[..m].iter().copied());
    let t3 = le / 2.0
        + lam * ln
        + log_sum_exp((0..=j_max).map(|j| {
            lf[j] + j as f64 * lam * (2.0 - b * c) * ln + if j == 0 { head3 } else { suffix[j] }
        }));

    let ln_envelope = 3f64.ln() + le - (2.0 * lam * r + delta_mse(ps)) * ln;
    Ok(VarianceTerms {
        n,
        ln_rho,
        energy_mode: mode,
        ln_energy: le,
        ln_terms: [t1, t2, t3],
        ln_envelope,
    })
}

/// A bound evaluated along an increasing grid of lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub label: String,
    pub grid: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoundCurve {
    pub fn new(label: impl Into<String>, grid: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!("{label}: grid not strictly increasing")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("{label}: non-finite value {v}")));
        }
        Ok(BoundCurve { label, grid, values })
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }
}

/// Parse `start:stop:log10` (one point per decade), `start:stop:step`
/// (linear) or a comma-separated list. Values may use exponent notation.
pub fn parse_n_grid(spec: &str) -> Result<Vec<usize>> {
    let num = |s: &str| -> Result<usize> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::config(format!("bad grid value '{s}'")))?;
        if !(v >= 1.0 && v.fract() == 0.0 && v < 1e15) {
            return Err(Error::config(format!("grid value '{s}' is not a positive integer")));
        }
        Ok(v as usize)
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, "log10"] => {
            let (s, e) = (num(start)?, num(stop)?);
            let mut out = Vec::new();
            let mut v = s;
            while v <= e {
                out.push(v);
                v = v
                    .checked_mul(10)
                    .ok_or_else(|| Error::config("grid overflow"))?;
            }
            out
        }
        [start, stop, step] => {
            let (s, e, d) = (num(start)?, num(stop)?, num(step)?);
            (s..=e).step_by(d).collect()
        }
        [list] => list.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::config(format!("bad grid '{spec}'"))),
    };
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config(format!("grid '{spec}' must be non-empty and increasing")));
    }
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub main: f64,
    pub main_terms: [f64; 7],
    pub main_alt: f64,
    pub main_alt_terms: [f64; 7],
    pub mse: f64,
    pub mse_terms: [f64; 5],
    pub awgn: f64,
    pub awgn_terms: [f64; 3],
    pub dual_packing: f64,
    pub dual_packing_terms: [f64; 2],
}

pub fn thresholds(ps: &ParameterSet) -> Result<Thresholds> {
    let main_terms = lambda_terms_main(ps)?;
    let main_alt_terms = lambda_terms_main_alt(ps)?;
    let mse_terms = lambda_terms_mse(ps)?;
    let awgn_terms = lambda_terms_awgn(ps)?;
    let dual_packing_terms = lambda_terms_dual_packing(ps)?;
    Ok(Thresholds {
        main: max_of(&main_terms),
        main_terms,
        main_alt: max_of(&main_alt_terms),
        main_alt_terms,
        mse: max_of(&mse_terms),
        mse_terms,
        awgn: max_of(&awgn_terms),
        awgn_terms,
        dual_packing: max_of(&dual_packing_terms),
        dual_packing_terms,
    })
}

/// Everything the `bounds` command reports for one parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub params: ParameterSet,
    pub thresholds: Thresholds,
    pub delta: f64,
    pub mse_hypotheses: bool,
    pub a_term: ATermDiscrepancy,
    pub energy_mode: EnergyMode,
    /// Log-valued curves except `abs_zeta_minus_1`.
    pub curves: Vec<BoundCurve>,
    /// `ln(term / 3E n^-(2 lambda R + delta))` per variance term; advisory.
    pub envelope_margins: Vec<BoundCurve>,
}

impl BoundsReport {
    pub fn curve(&self, label: &str) -> Option<&BoundCurve> {
        self.curves.iter().find(|c| c.label == label)
    }
}

pub const CURVE_LABELS: [&str; 10] = [
    "ln_phi1",
    "ln_phi2",
    "ln_phi3",
    "ln_phi4",
    "ln_var_term1",
    "ln_var_term2_over_energy",
    "ln_var_term3_over_energy",
    "ln_energy",
    "abs_zeta_minus_1",
    "ln_fullrank_bound",
];

pub fn bounds_report(ps: &ParameterSet, grid: &[usize], mode: EnergyMode) -> Result<BoundsReport> {
    ps.validate()?;
    let th = thresholds(ps)?;
    let delta = delta_mse(ps);
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); CURVE_LABELS.len()];
    let mut margins: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); 3];
    for &n in grid {
        let phis = dual_packing_phis(ps, n)?;
        let var = variance_terms(ps, n, mode)?;
        let dc = dual_constants(ps, n)?;
        let norm = var.ln_normalized();
        let row = [
            phis.ln_phi[0],
            phis.ln_phi[1],
            phis.ln_phi[2],
            phis.ln_phi[3],
            norm[0],
            norm[1],
            norm[2],
            var.ln_energy,
            (dc.zeta - 1.0).abs(),
            ln_fullrank_bound(n as f64, ps.lambda, delta),
        ];
        for (col, v) in cols.iter_mut().zip(row) {
            col.push(v);
        }
        for (col, v) in margins.iter_mut().zip(var.envelope_margins()) {
            col.push(v);
        }
    }
    let curves = CURVE_LABELS
        .iter()
        .zip(cols)
        .map(|(l, v)| BoundCurve::new(*l, grid.to_vec(), v))
        .collect::<Result<Vec<_>>>()?;
    let envelope_margins = ["term1", "term2", "term3"]
        .iter()
        .zip(margins)
        .map(|(l, v)| BoundCurve::new(format!("ln_envelope_margin_{l}"), grid.to_vec(), v))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsReport {
        params: *ps,
        thresholds: th,
        delta,
        mse_hypotheses: mse_hypotheses_hold(ps),
        a_term: a_term_discrepancy(ps)?,
        energy_mode: mode,
        curves,
        envelope_margins,
    })
}
