use std::path::Path;

use lda_core::bounds::{bounds_report, parse_n_grid, BoundsReport, EnergyMode, ParameterSet, CURVE_LABELS};
use lda_core::decoding::{BpConfig, BpQuantizer};
use lda_core::experiments::{
    awgn_error_experiment, goodness_report, semi_norm_ergodic_check, sigma_for_vnr, AwgnConfig, DecoderChoice,
    ErgodicConfig, ErgodicRow, Format, NoiseKind, ReportConfig, SCHEMA_VERSION,
};
use lda_core::field::PrimeContext;
use lda_core::geometry::{effective_radius, nsm_estimate, packing_radius_with_budget, LatticeQuantizer};
use lda_core::graph::{
    delta_v_threshold, sample_standard_ensemble_with_budget, small_neighborhood_violation,
    verify_expansion_with_budget, ExpansionParams, SkeletonGraph, Verdict, VerifyMode,
};
use lda_core::lattice::{fullrank_monte_carlo, randomize_skeleton, syndrome_distribution_test, ConstructionALattice};
use lda_core::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::io::{graph_table, lattice_table, load_graph, load_lattice, read, write_table};

/// Options shared by every subcommand.
pub struct Global<'a> {
    pub seed: u64,
    pub workers: usize,
    pub format: Format,
    pub out: Option<&'a Path>,
}

impl Global<'_> {
    fn emit<R: Serialize>(&self, config: Value, summary: Value, rows: Vec<R>) -> Result<()> {
        write_table(config, summary, rows, self.format, self.out)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

/// `fields` plus the schema version, command name and seed.
fn config(command: &str, seed: u64, fields: Value) -> Value {
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "command": command, "seed": seed });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, fields) {
        dst.extend(src);
    }
    v
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn run(command: &Command, g: &Global) -> Result<()> {
    match command {
        Command::GenGraph(a) => gen_graph(a, g),
        Command::CheckExpansion(a) => check_expansion(a, g),
        Command::Build(a) => build(a, g),
        Command::Metrics(a) => metrics(a, g),
        Command::DecodeSim(a) => decode_sim(a, g),
        Command::FullrankMc(a) => fullrank(a, g),
        Command::SyndromeTest(a) => syndrome(a, g),
        Command::Bounds(a) => bounds(a, g),
        Command::SemiErgodic(a) => semi_ergodic(a, g),
        Command::Report(a) => report(a, g),
    }
}

fn gen_graph(a: &GenGraphArgs, g: &Global) -> Result<()> {
    let (graph, fields) = match (a.example, a.n, a.dv, a.dc) {
        (true, ..) => (SkeletonGraph::six_by_four(), json!({ "example": "six_by_four" })),
        (false, Some(n), Some(dv), Some(dc)) => (
            sample_standard_ensemble_with_budget(n, dv, dc, g.seed, a.resample_budget)?,
            json!({ "n": n, "dv": dv, "dc": dc, "resample_budget": a.resample_budget }),
        ),
        _ => return Err(invalid("--n, --dv and --dc are required without --example")),
    };
    let (summary, edges) = graph_table(&graph);
    let cfg = config("gen-graph", g.seed, fields);
    g.emit(cfg, serde_json::to_value(summary)?, edges)
}

#[derive(Serialize)]
struct PropertyRow {
    property: String,
    factor: f64,
    size_bound: usize,
    checked_up_to: usize,
    subsets_checked: u64,
    verdict: &'static str,
    /// Violating subset as `;`-separated indices.
    witness: Option<String>,
    neighbors: Option<usize>,
    required: Option<f64>,
    reason: Option<String>,
}

fn check_expansion(a: &CheckExpansionArgs, g: &Global) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    if !graph.is_regular() {
        return Err(invalid("expansion check needs a regular graph"));
    }
    let rate = graph.rate();
    let mut params = ExpansionParams::with_default_radii(rate, a.alpha, a.a, a.beta, a.b);
    if let Some(e) = a.epsilon {
        params.epsilon = e;
    }
    if let Some(t) = a.vartheta {
        params.vartheta = t;
    }
    let mode = match a.samples {
        Some(samples) => VerifyMode::Sampled { samples, seed: g.seed },
        None => VerifyMode::Exhaustive,
    };
    let report = verify_expansion_with_budget(&graph, &params, a.cap, mode, a.max_subsets)?;
    let rows = report
        .properties
        .iter()
        .map(|r| {
            let mut row = PropertyRow {
                property: format!("{:?}", r.property),
                factor: r.property.factor(&params),
                size_bound: r.size_bound,
                checked_up_to: r.checked_up_to,
                subsets_checked: r.subsets_checked,
                verdict: "certified",
                witness: None,
                neighbors: None,
                required: None,
                reason: None,
            };
            match &r.verdict {
                Verdict::Certified => {}
                Verdict::Falsified { witness, neighbors, required } => {
                    row.verdict = "falsified";
                    row.witness = Some(witness.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"));
                    row.neighbors = Some(*neighbors);
                    row.required = Some(*required);
                }
                Verdict::Undecided { reason } => {
                    row.verdict = "undecided";
                    row.reason = Some(reason.clone());
                }
            }
            row
        })
        .collect::<Vec<_>>();
    let (threshold, threshold_error) = match delta_v_threshold(rate, &params) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    // The small-set contrapositive is only meaningful on certified graphs.
    let small_set = if report.all_certified() && graph.n() <= 24 {
        Some(small_neighborhood_violation(&graph, params.alpha)?)
    } else {
        None
    };
    let summary = json!({
        "n": graph.n(),
        "rate": rate,
        "dv": graph.dv(),
        "all_certified": report.all_certified(),
        "delta_v_threshold": threshold,
        "delta_v_threshold_error": threshold_error,
        "degree_above_threshold": threshold.map(|t| graph.dv() as f64 > t),
        "small_set_checked": small_set.is_some(),
        "small_set_violation": small_set.flatten(),
    });
    let cfg = config(
        "check-expansion",
        g.seed,
        json!({
            "graph": path_str(&a.graph),
            "params": params,
            "cap": a.cap,
            "mode": mode,
            "max_subsets": a.max_subsets,
        }),
    );
    g.emit(cfg, summary, rows)
}

fn build(a: &BuildArgs, g: &Global) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    let p = match (a.p, a.lambda) {
        (Some(p), _) => p,
        (None, Some(lambda)) => PrimeContext::prescribed(graph.n(), lambda)?.p,
        (None, None) => return Err(invalid("one of --p or --lambda is required")),
    };
    let l = ConstructionALattice::from_checks(randomize_skeleton(&graph, p, g.seed)?)?;
    let (summary, entries) = lattice_table(&l, &path_str(&a.graph));
    let cfg = config(
        "build",
        g.seed,
        json!({ "graph": path_str(&a.graph), "p": p, "lambda": a.lambda }),
    );
    g.emit(cfg, serde_json::to_value(summary)?, entries)
}

#[derive(Serialize)]
struct MetricsRow {
    n: usize,
    p: u64,
    rank: usize,
    full_rank: bool,
    volume_exponent: usize,
    ln_volume: f64,
    r_eff: f64,
    r_pack: Option<f64>,
    shortest_length: Option<f64>,
    ratio: Option<f64>,
    nsm: Option<f64>,
    nsm_half_width: Option<f64>,
    nsm_samples: u64,
    quantizer: &'static str,
    errors: String,
}

fn metrics(a: &MetricsArgs, g: &Global) -> Result<()> {
    let l = load_lattice(&a.lattice)?;
    let mut errors = Vec::new();
    let r_eff = effective_radius(&l);
    let packing = match packing_radius_with_budget(&l, a.budget) {
        Ok(r) => Some(r),
        Err(e) if e.is_budget() => {
            errors.push(format!("r_pack: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let (quantizer, nsm) = match a.quantizer {
        DecoderArg::Ml => (
            "ml",
            l.codewords(a.budget)
                .and_then(|_| nsm_estimate(&l, a.nsm_samples, g.seed, g.workers)),
        ),
        DecoderArg::Bp => {
            let bp = BpQuantizer::new(&l, a.bp_sigma, BpConfig::default())?;
            ("bp", nsm_estimate(&bp as &dyn LatticeQuantizer, a.nsm_samples, g.seed, g.workers))
        }
    };
    let nsm = match nsm {
        Ok(e) => Some(e),
        Err(e) if e.is_budget() => {
            errors.push(format!("nsm: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    let row = MetricsRow {
        n: l.n(),
        p: l.p(),
        rank: l.rank(),
        full_rank: l.full_rank(),
        volume_exponent: l.volume_exponent(),
        ln_volume: l.ln_volume(),
        r_eff,
        r_pack: packing.as_ref().map(|r| r.r_pack),
        shortest_length: packing.as_ref().map(|r| r.shortest_length),
        ratio: packing.as_ref().map(|r| r.r_pack / r_eff),
        nsm: nsm.as_ref().map(|e| e.mean),
        nsm_half_width: nsm.as_ref().map(|e| e.half_width),
        nsm_samples: a.nsm_samples,
        quantizer,
        errors: errors.join("; "),
    };
    let cfg = config(
        "metrics",
        g.seed,
        json!({
            "lattice": path_str(&a.lattice),
            "nsm_samples": a.nsm_samples,
            "quantizer": quantizer,
            "bp_sigma": a.bp_sigma,
            "budget": a.budget,
        }),
    );
    let summary = json!({ "shortest_vector": packing.map(|r| r.shortest_vector) });
    g.emit(cfg, summary, vec![row])
}

fn decode_sim(a: &DecodeSimArgs, g: &Global) -> Result<()> {
    let l = load_lattice(&a.lattice)?;
    let sigmas = if a.sigmas.is_empty() {
        if let Some(v) = a.vnrs.iter().find(|v| !(**v > 0.0)) {
            return Err(invalid(format!("volume-to-noise ratio must be positive, got {v}")));
        }
        a.vnrs.iter().map(|&v| sigma_for_vnr(l.ln_volume(), l.n(), v)).collect()
    } else {
        a.sigmas.clone()
    };
    let decoder = match a.decoder {
        DecoderArg::Ml => DecoderChoice::Ml,
        DecoderArg::Bp => DecoderChoice::Bp,
    };
    let cfg = AwgnConfig {
        random_codeword: a.random_codeword,
        bp: BpConfig {
            max_iters: a.bp.max_iters,
            damping: a.bp.damping,
            ..BpConfig::default()
        },
        budget: a.budget,
        ..AwgnConfig::new(sigmas, a.trials, decoder, g.seed)
    };
    let curve = awgn_error_experiment(&l, &cfg, g.workers)?;
    let mut fields = curve.config;
    fields["lattice"] = json!(path_str(&a.lattice));
    let summary = json!({ "n": l.n(), "p": l.p(), "ln_volume": l.ln_volume() });
    g.emit(config("decode-sim", g.seed, fields), summary, curve.rows)
}

#[derive(Serialize)]
struct FullRankRow {
    p: u64,
    trials: u64,
    failures: u64,
    frequency: f64,
    ci_low: f64,
    ci_high: f64,
}

fn fullrank(a: &FullrankArgs, g: &Global) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    let mut reports = Vec::new();
    for &p in &a.p {
        reports.push(fullrank_monte_carlo(&graph, p, a.trials, g.seed, g.workers)?);
    }
    let decreasing = reports.windows(2).all(|w| w[1].frequency < w[0].frequency);
    let separated = reports
        .windows(2)
        .all(|w| w[1].frequency < w[0].frequency && w[1].ci.separated_from(&w[0].ci));
    let rows = reports
        .into_iter()
        .map(|r| FullRankRow {
            p: r.p,
            trials: r.trials,
            failures: r.failures,
            frequency: r.frequency,
            ci_low: r.ci.low,
            ci_high: r.ci.high,
        })
        .collect();
    let cfg = config(
        "fullrank-mc",
        g.seed,
        json!({ "graph": path_str(&a.graph), "p": a.p, "trials": a.trials }),
    );
    let summary = json!({ "strictly_decreasing": decreasing, "ci_separated": separated });
    g.emit(cfg, summary, rows)
}

#[derive(Serialize)]
struct ChiRow {
    test: &'static str,
    /// `;`-separated variable indices.
    coordinates: String,
    statistic: f64,
    dof: usize,
    p_value: f64,
    pass: bool,
}

fn syndrome(a: &SyndromeArgs, g: &Global) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    let u = if a.u.is_empty() {
        let mut u = vec![0; graph.m()];
        u[0] = 1;
        u
    } else {
        a.u.clone()
    };
    if u.len() != graph.m() {
        return Err(Error::DimensionMismatch { expected: graph.m(), got: u.len() });
    }
    let r = syndrome_distribution_test(&graph, a.p, &u, a.trials, g.seed, g.workers)?;
    let pass = |pv: f64| pv > a.significance;
    let mut rows: Vec<ChiRow> = r
        .marginals
        .iter()
        .map(|t| ChiRow {
            test: "marginal",
            coordinates: t.coordinate.to_string(),
            statistic: t.chi_square.statistic,
            dof: t.chi_square.dof,
            p_value: t.chi_square.p_value,
            pass: pass(t.chi_square.p_value),
        })
        .collect();
    if let Some(t) = &r.pair {
        rows.push(ChiRow {
            test: "pair",
            coordinates: format!("{};{}", t.coordinates.0, t.coordinates.1),
            statistic: t.chi_square.statistic,
            dof: t.chi_square.dof,
            p_value: t.chi_square.p_value,
            pass: pass(t.chi_square.p_value),
        });
    }
    let cfg = config(
        "syndrome-test",
        g.seed,
        json!({
            "graph": path_str(&a.graph),
            "p": a.p,
            "u": u,
            "trials": a.trials,
            "significance": a.significance,
        }),
    );
    // Any nonzero coordinate outside the support aborts the test, so reaching
    // this point means every trial was zero there.
    let summary = json!({
        "support": r.support,
        "off_support_zero": true,
        "all_pass": r.all_pass(a.significance),
    });
    g.emit(cfg, summary, rows)
}

#[derive(Serialize)]
struct BoundsRow {
    n: usize,
    ln_phi1: f64,
    ln_phi2: f64,
    ln_phi3: f64,
    ln_phi4: f64,
    ln_var_term1: f64,
    ln_var_term2_over_energy: f64,
    ln_var_term3_over_energy: f64,
    ln_energy: f64,
    abs_zeta_minus_1: f64,
    ln_fullrank_bound: f64,
    ln_envelope_margin_term1: f64,
    ln_envelope_margin_term2: f64,
    ln_envelope_margin_term3: f64,
}

fn bounds_rows(r: &BoundsReport) -> Vec<BoundsRow> {
    let c = |label: &str, i: usize| r.curve(label).expect("every label is reported").values[i];
    let m = |k: usize, i: usize| r.envelope_margins[k].values[i];
    let grid = &r.curves[0].grid;
    (0..grid.len())
        .map(|i| BoundsRow {
            n: grid[i],
            ln_phi1: c("ln_phi1", i),
            ln_phi2: c("ln_phi2", i),
            ln_phi3: c("ln_phi3", i),
            ln_phi4: c("ln_phi4", i),
            ln_var_term1: c("ln_var_term1", i),
            ln_var_term2_over_energy: c("ln_var_term2_over_energy", i),
            ln_var_term3_over_energy: c("ln_var_term3_over_energy", i),
            ln_energy: c("ln_energy", i),
            abs_zeta_minus_1: c("abs_zeta_minus_1", i),
            ln_fullrank_bound: c("ln_fullrank_bound", i),
            ln_envelope_margin_term1: m(0, i),
            ln_envelope_margin_term2: m(1, i),
            ln_envelope_margin_term3: m(2, i),
        })
        .collect()
}

fn bounds(a: &BoundsArgs, g: &Global) -> Result<()> {
    let ps: ParameterSet = match &a.params {
        Some(path) => serde_json::from_str(&read(path)?)?,
        None => ParameterSet::reference(),
    };
    let grid = parse_n_grid(&a.n_grid)?;
    let mode = match (a.ln_energy, a.energy) {
        (Some(ln_energy), _) => EnergyMode::Supplied { ln_energy },
        (None, EnergyArg::Upper) => EnergyMode::UpperBound,
        (None, EnergyArg::Lower) => EnergyMode::LowerBound,
        (None, EnergyArg::Exact) => EnergyMode::Exact { budget: a.exact_budget },
    };
    let report = bounds_report(&ps, &grid, mode)?;
    let decreasing: serde_json::Map<String, Value> = CURVE_LABELS
        .iter()
        .map(|&l| (l.to_string(), json!(report.curve(l).map(|c| c.strictly_decreasing()))))
        .collect();
    let summary = json!({
        "thresholds": report.thresholds,
        "delta": report.delta,
        "mse_hypotheses": report.mse_hypotheses,
        "a_term": report.a_term,
        "energy_mode": report.energy_mode,
        "strictly_decreasing": decreasing,
    });
    let cfg = config("bounds", g.seed, json!({ "params": ps, "n_grid": grid, "energy_mode": mode }));
    g.emit(cfg, summary, bounds_rows(&report))
}

fn decreasing_summary(rows: &[ErgodicRow]) -> Value {
    let decreasing = rows.windows(2).all(|w| w[1].frequency < w[0].frequency);
    let separated = rows
        .windows(2)
        .all(|w| w[1].frequency < w[0].frequency && w[1].ci_high < w[0].ci_low);
    json!({ "strictly_decreasing": decreasing, "ci_separated": separated })
}

fn semi_ergodic(a: &SemiErgodicArgs, g: &Global) -> Result<()> {
    let noise = match a.noise {
        NoiseArg::Gaussian => NoiseKind::Gaussian,
        NoiseArg::Uniform => NoiseKind::Uniform,
        NoiseArg::StudentT => NoiseKind::StudentT { df: a.df },
    };
    let cfg = ErgodicConfig {
        schema_version: SCHEMA_VERSION,
        noise,
        n_grid: parse_n_grid(&a.n_grid)?,
        delta: a.delta,
        trials: a.trials,
        seed: g.seed,
    };
    let table = semi_norm_ergodic_check(&cfg, g.workers)?;
    let summary = decreasing_summary(&table.rows);
    g.emit(config("semi-ergodic", g.seed, table.config), summary, table.rows)
}

fn report(a: &ReportArgs, g: &Global) -> Result<()> {
    let graph = load_graph(&a.graph)?;
    if a.seeds == 0 {
        return Err(invalid("--seeds must be at least 1"));
    }
    let seeds = (0..a.seeds)
        .map(|k| g.seed.checked_add(k).ok_or_else(|| invalid("seed range overflows")))
        .collect::<Result<Vec<u64>>>()?;
    let cfg = ReportConfig {
        nsm_samples: a.nsm_samples,
        wer_trials: a.wer_trials,
        budget: a.budget,
        ..ReportConfig::new(a.p, seeds)
    };
    let r = goodness_report(&graph, &cfg, g.workers)?;
    let mut fields = r.config;
    fields["graph"] = json!(path_str(&a.graph));
    g.emit(config("report", g.seed, fields), serde_json::to_value(r.medians)?, r.rows)
}
