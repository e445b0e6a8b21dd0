//! Input loaders and output writing.
//!
//! Graph files are either the native text form (`n m dv dc` header, then
//! `c: v1 v2 ...`) or a `gen-graph` table of `(check, variable)` edges in CSV
//! or JSON. Lattice files are `build` tables of `(row, col, value)` triplets
//! in CSV or JSON, or a bare lattice bundle JSON with an `H` field.

use std::io::Write;
use std::path::Path;

use lda_core::experiments::{Format, Table};
use lda_core::graph::SkeletonGraph;
use lda_core::lattice::{ConstructionALattice, LatticeBundle};
use lda_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub check: usize,
    pub variable: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: usize,
    pub dv: usize,
    pub dc: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub value: u64,
}

/// Everything in a lattice bundle except the entries, plus derived fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub n: usize,
    pub p: u64,
    pub skeleton_ref: String,
    pub rows: usize,
    pub rank: usize,
    pub volume_exponent: usize,
    pub full_rank: bool,
    pub ln_volume: f64,
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn looks_tabular(text: &str) -> bool {
    let t = text.trim_start();
    t.starts_with('{') || t.starts_with("# config:")
}

pub fn graph_table(g: &SkeletonGraph) -> (GraphSummary, Vec<Edge>) {
    let edges = g
        .check_lists()
        .iter()
        .enumerate()
        .flat_map(|(c, l)| l.iter().map(move |&v| Edge { check: c, variable: v }))
        .collect();
    let summary = GraphSummary {
        n: g.n(),
        m: g.m(),
        dv: g.dv(),
        dc: g.dc(),
    };
    (summary, edges)
}

pub fn parse_graph(text: &str) -> Result<SkeletonGraph> {
    if !looks_tabular(text) {
        return SkeletonGraph::from_text(text);
    }
    let t: Table<Edge> = Table::parse(text)?;
    let s: GraphSummary = serde_json::from_value(t.summary)?;
    let mut checks = vec![Vec::new(); s.m];
    for e in t.rows {
        checks
            .get_mut(e.check)
            .ok_or(Error::IndexOutOfRange { index: e.check, size: s.m })?
            .push(e.variable);
    }
    let g = SkeletonGraph::from_check_lists(s.n, checks)?;
    if g.dv() != s.dv || g.dc() != s.dc {
        return Err(Error::InvalidConfig("graph summary degrees disagree with the edges".into()));
    }
    Ok(g)
}

pub fn load_graph(path: &Path) -> Result<SkeletonGraph> {
    parse_graph(&read(path)?)
}

pub fn lattice_table(l: &ConstructionALattice, skeleton_ref: &str) -> (LatticeSummary, Vec<Entry>) {
    let h = l.check_matrix();
    let summary = LatticeSummary {
        n: l.n(),
        p: l.p(),
        skeleton_ref: skeleton_ref.to_string(),
        rows: h.rows(),
        rank: l.rank(),
        volume_exponent: l.volume_exponent(),
        full_rank: l.full_rank(),
        ln_volume: l.ln_volume(),
    };
    let entries = h
        .triplets()
        .into_iter()
        .map(|(row, col, value)| Entry { row, col, value })
        .collect();
    (summary, entries)
}

pub fn parse_lattice(text: &str) -> Result<ConstructionALattice> {
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text)?;
        if v.get("H").is_some() {
            return LatticeBundle::from_json(text)?.to_lattice();
        }
    }
    let t: Table<Entry> = Table::parse(text)?;
    let s: LatticeSummary = serde_json::from_value(t.summary)?;
    LatticeBundle {
        n: s.n,
        p: s.p,
        skeleton_ref: s.skeleton_ref,
        rows: s.rows,
        h: t.rows.into_iter().map(|e| (e.row, e.col, e.value)).collect(),
        rank: s.rank,
        volume_exponent: s.volume_exponent,
    }
    .to_lattice()
}

pub fn load_lattice(path: &Path) -> Result<ConstructionALattice> {
    parse_lattice(&read(path)?)
}

/// Render a table and write it to `out` or stdout.
pub fn write_table<R: Serialize>(
    config: Value,
    summary: Value,
    rows: Vec<R>,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let text = Table::new(config, summary, rows).render(format)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lda_core::graph::sample_standard_ensemble;
    use lda_core::lattice::randomize_skeleton;
    use serde_json::json;

    fn render<R: Serialize>(summary: impl Serialize, rows: Vec<R>, format: Format) -> String {
        Table::new(json!({"seed": 1}), serde_json::to_value(summary).unwrap(), rows)
            .render(format)
            .unwrap()
    }

    #[test]
    fn graph_round_trips_in_every_format() {
        let g = sample_standard_ensemble(12, 3, 6, 4).unwrap();
        assert_eq!(parse_graph(&g.to_text()).unwrap(), g);
        for f in [Format::Csv, Format::Json] {
            let (s, e) = graph_table(&g);
            assert_eq!(parse_graph(&render(s, e, f)).unwrap(), g);
        }
    }

    #[test]
    fn lattice_round_trips_in_every_format() {
        let g = sample_standard_ensemble(8, 2, 4, 1).unwrap();
        let l = ConstructionALattice::from_checks(randomize_skeleton(&g, 7, 3).unwrap()).unwrap();
        for f in [Format::Csv, Format::Json] {
            let (s, e) = lattice_table(&l, "g.txt");
            let back = parse_lattice(&render(s, e, f)).unwrap();
            assert_eq!(back.check_matrix(), l.check_matrix());
        }
        let bundle = LatticeBundle::from_lattice(&l, "g.txt").to_json().unwrap();
        assert_eq!(parse_lattice(&bundle).unwrap().check_matrix(), l.check_matrix());
    }

    #[test]
    fn inconsistent_summary_is_rejected() {
        let g = SkeletonGraph::six_by_four();
        let (mut s, e) = graph_table(&g);
        s.dv = 3;
        assert!(parse_graph(&render(s, e, Format::Csv)).is_err());
    }
}
