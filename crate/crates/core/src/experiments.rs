//! Monte Carlo experiments: AWGN word-error curves, norm-concentration checks
//! for i.i.d. noise, per-seed goodness metrics, and CSV/JSON emission.
//!
//! CSV files start with a `# config: {json}` line echoing the run
//! configuration, followed by a header row and one row per record, in the
//! column order of the record struct's fields.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::decoding::{lattice_decode_bp, ml_decode, BpConfig, BpDecoder};
use crate::error::{Error, Result};
use crate::geometry::{effective_radius, nsm_estimate, packing_radius_with_budget};
use crate::graph::SkeletonGraph;
use crate::lattice::{randomize_skeleton, ConstructionALattice, DEFAULT_ENUMERATION_BUDGET};
use crate::rng::run_blocks;
use crate::stats::{median, wilson};

pub const SCHEMA_VERSION: u32 = 1;

const AWGN_COMPONENT: u64 = 5;
const ERGODIC_COMPONENT: u64 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderChoice {
    Ml,
    Bp,
}

/// `vol^(2/n) / (2 pi e sigma^2)`; `None` at `sigma = 0`.
pub fn vnr(ln_volume: f64, n: usize, sigma: f64) -> Option<f64> {
    if sigma == 0.0 {
        return None;
    }
    Some((2.0 * ln_volume / n as f64).exp() / (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma))
}

/// Noise level at which the volume-to-noise ratio equals `target`.
pub fn sigma_for_vnr(ln_volume: f64, n: usize, target: f64) -> f64 {
    ((2.0 * ln_volume / n as f64).exp() / (2.0 * std::f64::consts::PI * std::f64::consts::E * target)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AwgnConfig {
    pub schema_version: u32,
    pub sigmas: Vec<f64>,
    pub trials: u64,
    pub decoder: DecoderChoice,
    pub seed: u64,
    /// Send a uniformly random codeword instead of the zero point.
    pub random_codeword: bool,
    pub bp: BpConfig,
    /// Codeword enumeration budget for the ML decoder.
    pub budget: u64,
}

impl AwgnConfig {
    pub fn new(sigmas: Vec<f64>, trials: u64, decoder: DecoderChoice, seed: u64) -> Self {
        AwgnConfig {
            schema_version: SCHEMA_VERSION,
            sigmas,
            trials,
            decoder,
            seed,
            random_codeword: false,
            bp: BpConfig::default(),
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateRow {
    pub sigma: f64,
    pub vnr: Option<f64>,
    pub trials: u64,
    pub errors: u64,
    pub wer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// BP decodes that did not reach a codeword (always 0 for ML).
    pub nonconverged: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateCurve {
    pub config: Value,
    pub rows: Vec<ErrorRateRow>,
}

fn random_codeword(l: &ConstructionALattice, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let p = l.p();
    let basis = &l.code().basis;
    let mut x = vec![0u64; l.n()];
    for r in 0..basis.rows() {
        let c = rng.random_range(0..p);
        for (xj, &g) in x.iter_mut().zip(basis.row(r)) {
            *xj = (*xj + c * g) % p;
        }
    }
    x.into_iter().map(|v| v as i64).collect()
}

/// Word error rate per noise level. The same Gaussian draws are scaled to
/// every `sigma`, so points along the curve are paired.
pub fn awgn_error_experiment(
    l: &ConstructionALattice,
    cfg: &AwgnConfig,
    workers: usize,
) -> Result<ErrorRateCurve> {
    if cfg.trials == 0 {
        return Err(Error::config("trials must be at least 1"));
    }
    if let Some(s) = cfg.sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::config(format!("bad sigma {s}")));
    }
    let n = l.n();
    let bp = match cfg.decoder {
        DecoderChoice::Bp => Some(BpDecoder::new(l.check_matrix(), cfg.bp)?),
        DecoderChoice::Ml => {
            l.codewords(cfg.budget)?;
            None
        }
    };
    let ns = cfg.sigmas.len();
    let blocks = run_blocks(workers, cfg.seed, AWGN_COMPONENT, cfg.trials as usize, |rng, _, len| {
        let mut errs = vec![0u64; ns];
        let mut nonconv = vec![0u64; ns];
        let mut g = vec![0.0; n];
        let mut y = vec![0.0; n];
        for _ in 0..len {
            let x = if cfg.random_codeword {
                random_codeword(l, rng)
            } else {
                vec![0; n]
            };
            g.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            for (k, &sigma) in cfg.sigmas.iter().enumerate() {
                for j in 0..n {
                    y[j] = x[j] as f64 + sigma * g[j];
                }
                let decided = match &bp {
                    Some(dec) => {
                        let d = lattice_decode_bp(dec, l, &y, sigma)?;
                        if !d.converged {
                            nonconv[k] += 1;
                        }
                        d.point
                    }
                    None => ml_decode(l, &y)?,
                };
                if decided != x {
                    errs[k] += 1;
                }
            }
        }
        Ok((errs, nonconv))
    })?;
    let mut errors = vec![0u64; ns];
    let mut nonconverged = vec![0u64; ns];
    for (e, c) in blocks {
        for k in 0..ns {
            errors[k] += e[k];
            nonconverged[k] += c[k];
        }
    }
    let rows = cfg
        .sigmas
        .iter()
        .enumerate()
        .map(|(k, &sigma)| {
            let ci = wilson(errors[k], cfg.trials);
            ErrorRateRow {
                sigma,
                vnr: vnr(l.ln_volume(), n, sigma),
                trials: cfg.trials,
                errors: errors[k],
                wer: errors[k] as f64 / cfg.trials as f64,
                ci_low: ci.low,
                ci_high: ci.high,
                nonconverged: nonconverged[k],
            }
        })
        .collect();
    Ok(ErrorRateCurve {
        config: serde_json::to_value(cfg)?,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    Uniform,
    /// Student t with `df > 2` degrees of freedom, scaled to unit variance.
    StudentT { df: f64 },
}

impl NoiseKind {
    fn validate(&self) -> Result<()> {
        if let NoiseKind::StudentT { df } = self {
            if !(*df > 2.0) {
                return Err(Error::config(format!("student t needs df > 2 for finite variance, got {df}")));
            }
        }
        Ok(())
    }
}

enum Sampler {
    Gaussian,
    Uniform,
    StudentT(StudentT<f64>, f64),
}

impl Sampler {
    fn new(kind: NoiseKind) -> Result<Self> {
        kind.validate()?;
        Ok(match kind {
            NoiseKind::Gaussian => Sampler::Gaussian,
            NoiseKind::Uniform => Sampler::Uniform,
            NoiseKind::StudentT { df } => Sampler::StudentT(
                StudentT::new(df).map_err(|e| Error::config(format!("student t: {e}")))?,
                ((df - 2.0) / df).sqrt(),
            ),
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Gaussian => rng.sample(StandardNormal),
            Sampler::Uniform => rng.random_range(-3f64.sqrt()..3f64.sqrt()),
            Sampler::StudentT(t, scale) => t.sample(rng) * scale,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicConfig {
    pub schema_version: u32,
    pub noise: NoiseKind,
    pub n_grid: Vec<usize>,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicRow {
    pub n: usize,
    pub trials: u64,
    pub exceed: u64,
    pub frequency: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicTable {
    pub config: Value,
    pub rows: Vec<ErgodicRow>,
}

/// Empirical `Pr[|z|^2 > (1 + delta) n]` for unit-variance i.i.d. noise.
pub fn semi_norm_ergodic_check(cfg: &ErgodicConfig, workers: usize) -> Result<ErgodicTable> {
    let sampler = Sampler::new(cfg.noise)?;
    if cfg.trials == 0 || cfg.n_grid.is_empty() || cfg.n_grid.contains(&0) {
        return Err(Error::config("need trials >= 1 and a non-empty grid of positive lengths"));
    }
    if !(cfg.delta >= 0.0) {
        return Err(Error::config(format!("delta {} must be >= 0", cfg.delta)));
    }
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (idx, &n) in cfg.n_grid.iter().enumerate() {
        let limit = (1.0 + cfg.delta) * n as f64;
        let component = (ERGODIC_COMPONENT << 16) | idx as u64;
        let counts = run_blocks(workers, cfg.seed, component, cfg.trials as usize, |rng, _, len| {
            Ok((0..len)
                .filter(|_| (0..n).map(|_| sampler.draw(rng).powi(2)).sum::<f64>() > limit)
                .count() as u64)
        })?;
        let exceed: u64 = counts.iter().sum();
        let ci = wilson(exceed, cfg.trials);
        rows.push(ErgodicRow {
            n,
            trials: cfg.trials,
            exceed,
            frequency: exceed as f64 / cfg.trials as f64,
            ci_low: ci.low,
            ci_high: ci.high,
        });
    }
    Ok(ErgodicTable {
        config: serde_json::to_value(cfg)?,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub schema_version: u32,
    pub p: u64,
    pub seeds: Vec<u64>,
    pub nsm_samples: u64,
    pub wer_trials: u64,
    /// Volume-to-noise ratios of the two-point error curve.
    pub vnr_points: [f64; 2],
    pub budget: u64,
}

impl ReportConfig {
    pub fn new(p: u64, seeds: Vec<u64>) -> Self {
        ReportConfig {
            schema_version: SCHEMA_VERSION,
            p,
            seeds,
            nsm_samples: 2000,
            wer_trials: 2000,
            vnr_points: [1.0, 1.5],
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

/// Metrics for one lattice. Fields that could not be computed are `None`
/// and the reason is listed in `errors` as `field: message`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub full_rank: bool,
    pub rank: usize,
    pub volume_exponent: usize,
    pub ln_volume: f64,
    pub r_eff: f64,
    pub r_pack: Option<f64>,
    pub ratio: Option<f64>,
    pub nsm: Option<f64>,
    pub nsm_half_width: Option<f64>,
    pub wer_first: Option<f64>,
    pub wer_second: Option<f64>,
    pub errors: String,
}

pub fn seed_metrics(
    l: &ConstructionALattice,
    seed: u64,
    cfg: &ReportConfig,
    workers: usize,
) -> SeedMetrics {
    let mut errors: Vec<String> = Vec::new();
    let mut flag = |field: &str, e: Error| errors.push(format!("{field}: {e}"));
    let r_eff = effective_radius(l);
    let r_pack = match packing_radius_with_budget(l, cfg.budget) {
        Ok(r) => Some(r.r_pack),
        Err(e) => {
            flag("r_pack", e);
            None
        }
    };
    let nsm = match l
        .codewords(cfg.budget)
        .and_then(|_| nsm_estimate(l, cfg.nsm_samples, seed, workers))
    {
        Ok(e) => Some(e),
        Err(e) => {
            flag("nsm", e);
            None
        }
    };
    let sigmas = cfg
        .vnr_points
        .iter()
        .map(|&v| sigma_for_vnr(l.ln_volume(), l.n(), v))
        .collect();
    let awgn = AwgnConfig {
        budget: cfg.budget,
        ..AwgnConfig::new(sigmas, cfg.wer_trials, DecoderChoice::Ml, seed)
    };
    let wer = match awgn_error_experiment(l, &awgn, workers) {
        Ok(c) => Some((c.rows[0].wer, c.rows[1].wer)),
        Err(e) => {
            flag("wer", e);
            None
        }
    };
    SeedMetrics {
        seed,
        full_rank: l.full_rank(),
        rank: l.rank(),
        volume_exponent: l.volume_exponent(),
        ln_volume: l.ln_volume(),
        r_eff,
        r_pack,
        ratio: r_pack.map(|r| r / r_eff),
        nsm: nsm.as_ref().map(|e| e.mean),
        nsm_half_width: nsm.as_ref().map(|e| e.half_width),
        wer_first: wer.map(|w| w.0),
        wer_second: wer.map(|w| w.1),
        errors: errors.join("; "),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Medians {
    pub full_rank_fraction: f64,
    pub r_eff: Option<f64>,
    pub r_pack: Option<f64>,
    pub ratio: Option<f64>,
    pub nsm: Option<f64>,
    pub wer_first: Option<f64>,
    pub wer_second: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodnessReport {
    pub config: Value,
    pub rows: Vec<SeedMetrics>,
    pub medians: Medians,
}

fn median_of(rows: &[SeedMetrics], f: impl Fn(&SeedMetrics) -> Option<f64>) -> Option<f64> {
    let v: Vec<f64> = rows.iter().filter_map(f).collect();
    median(&v)
}

/// Randomize the skeleton once per seed and measure each instance.
pub fn goodness_report(graph: &SkeletonGraph, cfg: &ReportConfig, workers: usize) -> Result<GoodnessReport> {
    if cfg.seeds.is_empty() {
        return Err(Error::config("need at least one seed"));
    }
    let mut rows = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let l = ConstructionALattice::from_checks(randomize_skeleton(graph, cfg.p, seed)?)?;
        rows.push(seed_metrics(&l, seed, cfg, workers));
    }
    let medians = Medians {
        full_rank_fraction: rows.iter().filter(|r| r.full_rank).count() as f64 / rows.len() as f64,
        r_eff: median_of(&rows, |r| Some(r.r_eff)),
        r_pack: median_of(&rows, |r| r.r_pack),
        ratio: median_of(&rows, |r| r.ratio),
        nsm: median_of(&rows, |r| r.nsm),
        wer_first: median_of(&rows, |r| r.wer_first),
        wer_second: median_of(&rows, |r| r.wer_second),
    };
    Ok(GoodnessReport {
        config: serde_json::to_value(cfg)?,
        rows,
        medians,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// CSV text: the config line, then the header and rows of `R`.
pub fn to_csv<R: Serialize>(config: &Value, rows: &[R]) -> Result<String> {
    to_csv_with_summary(config, &Value::Null, rows)
}

/// Like [`to_csv`] with an extra `# summary:` line unless `summary` is null.
pub fn to_csv_with_summary<R: Serialize>(config: &Value, summary: &Value, rows: &[R]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    let body = w.into_inner().map_err(|e| Error::config(format!("csv: {e}")))?;
    let mut out = format!("# config: {}\n", serde_json::to_string(config)?);
    if !summary.is_null() {
        out.push_str(&format!("# summary: {}\n", serde_json::to_string(summary)?));
    }
    out.push_str(&String::from_utf8(body).map_err(|e| Error::config(format!("csv: {e}")))?);
    Ok(out)
}

/// Inverse of [`to_csv`]; any `# summary:` line is skipped.
pub fn from_csv<R: DeserializeOwned>(text: &str) -> Result<(Value, Vec<R>)> {
    let t: Table<R> = Table::from_csv(text)?;
    Ok((t.config, t.rows))
}

fn csv_rows<R: DeserializeOwned>(body: &str) -> Result<Vec<R>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(body.as_bytes());
    r.deserialize()
        .collect::<std::result::Result<Vec<R>, _>>()
        .map_err(csv_error)
}

/// Config, optional summary and rows: the layout every CLI output shares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table<R> {
    pub config: Value,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub summary: Value,
    pub rows: Vec<R>,
}

impl<R: Serialize> Table<R> {
    pub fn new(config: Value, summary: Value, rows: Vec<R>) -> Self {
        Table { config, summary, rows }
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => to_csv_with_summary(&self.config, &self.summary, &self.rows),
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }

}

impl<R: DeserializeOwned> Table<R> {
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let config = lines
            .next()
            .and_then(|l| l.strip_prefix("# config: "))
            .ok_or_else(|| Error::parse(1, "missing '# config:' line"))?;
        let config = serde_json::from_str(config)?;
        let summary = match lines.next().and_then(|l| l.strip_prefix("# summary: ")) {
            Some(s) => serde_json::from_str(s)?,
            None => Value::Null,
        };
        let rest = text.split_once('\n').map_or("", |(_, r)| r);
        Ok(Table { config, summary, rows: csv_rows(rest)? })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Parse either format, sniffing JSON by a leading `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_csv(text)
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize + 1).unwrap_or(0);
    Error::parse(line, e.to_string())
}

/// A result with an echoed config and a table of records.
pub trait Tabular: Serialize + DeserializeOwned {
    type Row: Serialize + DeserializeOwned;
    fn config(&self) -> &Value;
    fn rows(&self) -> &[Self::Row];
}

impl Tabular for ErrorRateCurve {
    type Row = ErrorRateRow;
    fn config(&self) -> &Value {
        &self.config
    }
    fn rows(&self) -> &[ErrorRateRow] {
        &self.rows
    }
}

impl Tabular for ErgodicTable {
    type Row = ErgodicRow;
    fn config(&self) -> &Value {
        &self.config
    }
    fn rows(&self) -> &[ErgodicRow] {
        &self.rows
    }
}

impl Tabular for GoodnessReport {
    type Row = SeedMetrics;
    fn config(&self) -> &Value {
        &self.config
    }
    fn rows(&self) -> &[SeedMetrics] {
        &self.rows
    }
}

pub fn render<T: Tabular>(report: &T, format: Format) -> Result<String> {
    match format {
        Format::Csv => to_csv(report.config(), report.rows()),
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
    }
}

/// Write `report` to `path` in the requested format.
pub fn emit<T: Tabular>(report: &T, format: Format, path: &Path) -> Result<()> {
    std::fs::write(path, render(report, format)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FpMatrix;
    use crate::geometry::unit_ball_volume;

    fn small_lattice() -> ConstructionALattice {
        let h = FpMatrix::from_rows(&[vec![1, 2, 3, 0, 1, 4], vec![0, 1, 1, 2, 3, 1]], 6, 5).unwrap();
        ConstructionALattice::from_checks(h).unwrap()
    }

    #[test]
    fn zero_noise_never_errs() {
        let l = small_lattice();
        for d in [DecoderChoice::Ml, DecoderChoice::Bp] {
            let mut cfg = AwgnConfig::new(vec![0.0], 300, d, 1);
            cfg.random_codeword = true;
            let c = awgn_error_experiment(&l, &cfg, 1).unwrap();
            assert_eq!(c.rows[0].errors, 0);
            assert_eq!(c.rows[0].vnr, None);
        }
    }

    #[test]
    fn vnr_column_matches_volume() {
        let l = small_lattice();
        let cfg = AwgnConfig::new(vec![0.3, 0.6], 50, DecoderChoice::Ml, 2);
        let c = awgn_error_experiment(&l, &cfg, 1).unwrap();
        for r in &c.rows {
            let vol = 25f64;
            let expect = vol.powf(2.0 / 6.0) / (2.0 * std::f64::consts::PI * std::f64::consts::E * r.sigma * r.sigma);
            assert!((r.vnr.unwrap() - expect).abs() < 1e-12 * expect);
            assert!(r.ci_low <= r.wer && r.wer <= r.ci_high);
        }
        let s = sigma_for_vnr(l.ln_volume(), 6, 1.3);
        assert!((vnr(l.ln_volume(), 6, s).unwrap() - 1.3).abs() < 1e-12);
    }

    #[test]
    fn results_do_not_depend_on_workers() {
        let l = small_lattice();
        let cfg = AwgnConfig::new(vec![0.5, 1.0], 3000, DecoderChoice::Ml, 9);
        let a = awgn_error_experiment(&l, &cfg, 1).unwrap();
        let b = awgn_error_experiment(&l, &cfg, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip() {
        let l = small_lattice();
        let cfg = AwgnConfig::new(vec![0.0, 0.37, 0.9], 200, DecoderChoice::Ml, 4);
        let c = awgn_error_experiment(&l, &cfg, 1).unwrap();
        let text = render(&c, Format::Csv).unwrap();
        assert!(text.starts_with("# config: {"));
        assert!(text.lines().nth(1).unwrap().starts_with("sigma,vnr,trials,errors,wer,ci_low,ci_high,nonconverged"));
        let (config, rows): (Value, Vec<ErrorRateRow>) = from_csv(&text).unwrap();
        assert_eq!(ErrorRateCurve { config, rows }, c);
        let json = render(&c, Format::Json).unwrap();
        let back: ErrorRateCurve = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn ergodic_gaussian_decreases() {
        let cfg = ErgodicConfig {
            schema_version: SCHEMA_VERSION,
            noise: NoiseKind::Gaussian,
            n_grid: vec![10, 100, 1000],
            delta: 0.1,
            trials: 20_000,
            seed: 3,
        };
        let t = semi_norm_ergodic_check(&cfg, 0).unwrap();
        for w in t.rows.windows(2) {
            assert!(w[1].ci_high < w[0].ci_low);
        }
    }

    #[test]
    fn noise_kinds_have_unit_variance() {
        let mut rng = crate::rng::stream_rng(1, 0);
        for kind in [NoiseKind::Gaussian, NoiseKind::Uniform, NoiseKind::StudentT { df: 8.0 }] {
            let s = Sampler::new(kind).unwrap();
            let m = 200_000;
            let v = (0..m).map(|_| s.draw(&mut rng).powi(2)).sum::<f64>() / m as f64;
            assert!((v - 1.0).abs() < 0.03, "{kind:?}: {v}");
        }
        assert!(Sampler::new(NoiseKind::StudentT { df: 2.0 }).is_err());
    }

    #[test]
    fn scaled_integer_lattice_ratio() {
        let (n, p) = (4, 7);
        let l = ConstructionALattice::scaled_integer_lattice(n, p).unwrap();
        let cfg = ReportConfig {
            nsm_samples: 100,
            wer_trials: 50,
            ..ReportConfig::new(p, vec![1])
        };
        let m = seed_metrics(&l, 1, &cfg, 1);
        let expect = unit_ball_volume(n).powf(1.0 / n as f64) / 2.0;
        assert!((m.ratio.unwrap() - expect).abs() < 1e-12);
        assert!(m.errors.is_empty());
    }

    #[test]
    fn budget_exhaustion_is_flagged_per_field() {
        let l = small_lattice();
        let cfg = ReportConfig {
            budget: 3,
            nsm_samples: 10,
            wer_trials: 10,
            ..ReportConfig::new(5, vec![1])
        };
        let m = seed_metrics(&l, 1, &cfg, 1);
        assert!(m.r_pack.is_none() && m.wer_first.is_none());
        assert!(m.errors.contains("r_pack:"));
        assert!(m.errors.contains("wer:"));
    }

    #[test]
    fn report_round_trips() {
        let g = SkeletonGraph::six_by_four();
        let cfg = ReportConfig {
            nsm_samples: 100,
            wer_trials: 100,
            ..ReportConfig::new(5, vec![1, 2, 3])
        };
        let r = goodness_report(&g, &cfg, 1).unwrap();
        assert_eq!(r.rows.len(), 3);
        let text = render(&r, Format::Csv).unwrap();
        let (_, rows): (Value, Vec<SeedMetrics>) = from_csv(&text).unwrap();
        assert_eq!(rows, r.rows);
    }

    #[test]
    fn table_keeps_summary_in_both_formats() {
        let l = small_lattice();
        let cfg = AwgnConfig::new(vec![0.0, 0.41], 50, DecoderChoice::Ml, 4);
        let c = awgn_error_experiment(&l, &cfg, 1).unwrap();
        let summary = serde_json::json!({ "n": 4, "ln_volume": 9.656627474604601 });
        let t = Table::new(c.config.clone(), summary, c.rows.clone());
        for format in [Format::Csv, Format::Json] {
            let back: Table<ErrorRateRow> = Table::parse(&t.render(format).unwrap()).unwrap();
            assert_eq!(back, t);
        }
        let bare = Table::new(c.config.clone(), Value::Null, c.rows.clone());
        let text = bare.render(Format::Csv).unwrap();
        assert!(!text.contains("# summary:"));
        assert_eq!(Table::<ErrorRateRow>::parse(&text).unwrap(), bare);
    }
}
