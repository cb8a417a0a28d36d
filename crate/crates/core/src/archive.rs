//! Versioned JSON archives of decompositions, verified on load, and the
//! on-disk cache keyed by tool version and input hash.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::drl::{drl_report, DrlReport};
use crate::error::{DrcError, Result};
use crate::graph::{GraphSpec, LegWeighting, Limits, StableGraph};
use crate::rational::{self, Rational};
use crate::strata::{
    classify_case, enumerate_strata, CaseTag, Decomposition, DecoratedStratum, StrataConfig,
    VertexStratumLabel,
};
use crate::toric::ToricChart;
use crate::twist::{PositiveTwist, Twist, TwistSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveInput {
    pub g: u32,
    pub k: u32,
    pub m: Vec<i64>,
}

impl ArchiveInput {
    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("input serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

/// Summary of the chart equations of a stratum with the divided twist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDigest {
    pub num_cycles: usize,
    pub basis: Vec<usize>,
    pub independent_cycle_variables: usize,
    pub essential_equations: usize,
    /// SHA-256 of the essential equations, one per line.
    pub sha256: String,
}

pub fn chart_digest(graph: &StableGraph, twist: &Twist, root: usize, limits: &Limits) -> Result<ChartDigest> {
    let chart = ToricChart::new(graph, twist, true, root, limits)?;
    let eqs = chart.equation_system(0, limits)?;
    let text: String = eqs.iter().map(|e| e.equation.display() + "\n").collect();
    Ok(ChartDigest {
        num_cycles: chart.cycles.len(),
        basis: chart.basis.clone(),
        independent_cycle_variables: chart.independent_cycle_variables()?,
        essential_equations: eqs.len(),
        sha256: hex::encode(Sha256::digest(text.as_bytes())),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumRecord {
    pub key: String,
    pub num_vertices: usize,
    pub graph: GraphSpec,
    pub twist: TwistSpec,
    pub twist_multiset: Vec<i64>,
    #[serde(with = "rational::serde_text")]
    pub weight: Rational,
    #[serde(with = "rational::serde_text")]
    pub fp_coefficient: Rational,
    pub aut_order: u64,
    pub vertex_labels: Vec<VertexStratumLabel>,
    pub interior: bool,
    pub formal_term: bool,
    pub drl_local: DrlReport,
    pub chart: ChartDigest,
}

impl StratumRecord {
    pub fn from_stratum(s: &DecoratedStratum, limits: &Limits) -> Result<Self> {
        Ok(StratumRecord {
            key: s.key.0.clone(),
            num_vertices: s.graph.num_vertices(),
            graph: s.graph.to_spec(),
            twist: s.twist.twist.to_spec(),
            twist_multiset: s.twist_multiset(),
            weight: s.weight.clone(),
            fp_coefficient: s.fp_coefficient.clone(),
            aut_order: s.aut_order,
            vertex_labels: s.vertex_labels.clone(),
            interior: s.interior,
            formal_term: s.formal_term,
            drl_local: drl_report(s)?,
            chart: chart_digest(&s.graph, &s.twist.twist, s.twist.star.center, limits)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionArchive {
    pub drc_schema: u32,
    pub tool_version: String,
    pub input: ArchiveInput,
    pub input_hash: String,
    pub case: CaseTag,
    pub strata: Vec<StratumRecord>,
}

impl DecompositionArchive {
    pub fn from_decomposition(d: &Decomposition, limits: &Limits) -> Result<Self> {
        let input = ArchiveInput {
            g: d.g,
            k: d.k,
            m: d.m.clone(),
        };
        let strata = d
            .strata
            .par_iter()
            .map(|s| StratumRecord::from_stratum(s, limits))
            .collect::<Result<Vec<_>>>()?;
        Ok(DecompositionArchive {
            drc_schema: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            input_hash: input.hash(),
            input,
            case: d.case,
            strata,
        })
    }

    /// Pretty JSON with a trailing newline; the canonical byte form.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("archive serializes");
        s.push('\n');
        s
    }

    /// Recomputes every stored number and fails on the first mismatch.
    pub fn verify(&self, limits: &Limits) -> Result<()> {
        if self.input_hash != self.input.hash() {
            return Err(DrcError::invariant("input_hash does not match the input"));
        }
        let case = classify_case(self.input.g, &self.input.m, self.input.k)?;
        if case != self.case {
            return Err(DrcError::invariant(format!("case recorded {}, recomputed {case}", self.case)));
        }
        let weighting = LegWeighting::new(self.input.k, self.input.m.clone());
        self.strata
            .par_iter()
            .map(|r| verify_record(r, &weighting, self.input.g, limits))
            .collect::<Result<Vec<()>>>()?;
        for w in self.strata.windows(2) {
            if (w[0].num_vertices, &w[0].key) >= (w[1].num_vertices, &w[1].key) {
                return Err(DrcError::invariant(format!(
                    "strata out of canonical order at {}",
                    w[1].key
                )));
            }
        }
        Ok(())
    }
}

fn mismatch(key: &str, field: &str, recorded: impl std::fmt::Debug, recomputed: impl std::fmt::Debug) -> DrcError {
    DrcError::invariant(format!(
        "stratum {key}: {field} recorded {recorded:?}, recomputed {recomputed:?}"
    ))
}

fn verify_record(r: &StratumRecord, weighting: &LegWeighting, g: u32, limits: &Limits) -> Result<()> {
    let graph = StableGraph::from_spec(&r.graph)?;
    limits.check_graph(&graph)?;
    if graph.genus() != g {
        return Err(mismatch(&r.key, "genus", g, graph.genus()));
    }
    let twist = Twist::from_spec(weighting.k, &r.twist, &graph)?;
    let positive = PositiveTwist::new(&graph, weighting, twist)?;
    let s = DecoratedStratum::new(graph, weighting.clone(), positive, limits)?;
    let fresh = StratumRecord::from_stratum(&s, limits)?;
    macro_rules! same {
        ($f:ident) => {
            if fresh.$f != r.$f {
                return Err(mismatch(&r.key, stringify!($f), &r.$f, &fresh.$f));
            }
        };
    }
    same!(weight);
    same!(key);
    same!(fp_coefficient);
    same!(aut_order);
    same!(num_vertices);
    same!(twist_multiset);
    same!(vertex_labels);
    same!(interior);
    same!(formal_term);
    same!(drl_local);
    same!(chart);
    if r.drl_local.multiplicity != r.weight {
        return Err(mismatch(&r.key, "multiplicity", &r.drl_local.multiplicity, &r.weight));
    }
    Ok(())
}

/// JSON pointer (`/strata/0/weight`) of a serde path.
fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Parses and fully re-verifies an archive. The schema version is checked
/// before anything else.
pub fn parse_archive(bytes: &[u8], limits: &Limits) -> Result<DecompositionArchive> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| DrcError::input(format!("archive is not JSON: {e}")))?;
    match value.get("drc_schema").and_then(serde_json::Value::as_u64) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => {
            return Err(DrcError::input(format!(
                "unsupported archive schema version {v} (expected {SCHEMA_VERSION})"
            )))
        }
        None => return Err(DrcError::input("archive has no numeric drc_schema field at /drc_schema")),
    }
    let archive: DecompositionArchive = serde_path_to_error::deserialize(value).map_err(|e| {
        DrcError::input(format!("schema violation at {}: {}", json_pointer(e.path()), e.inner()))
    })?;
    archive.verify(limits)?;
    Ok(archive)
}

/// Parameters of an enumeration run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub g: u32,
    pub k: u32,
    pub m: Vec<i64>,
    pub strata: StrataConfig,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Checks `m.len() = n` and that all guards are positive.
    pub fn new(g: u32, n: Option<usize>, k: u32, m: Vec<i64>, strata: StrataConfig) -> Result<Self> {
        if let Some(n) = n {
            if n != m.len() {
                return Err(DrcError::input(format!("--n {n} but m has {} entries", m.len())));
            }
        }
        let l = &strata.limits;
        if [strata.max_edges, strata.max_legs, strata.max_strata, l.max_vertices, l.max_edges, l.max_cycles, l.max_orderings]
            .contains(&0)
        {
            return Err(DrcError::input("size guards must be positive"));
        }
        Ok(RunConfig {
            g,
            k,
            m,
            strata,
            cache_dir: None,
        })
    }

    pub fn input(&self) -> ArchiveInput {
        ArchiveInput {
            g: self.g,
            k: self.k,
            m: self.m.clone(),
        }
    }

    pub fn cache_path(&self) -> Option<PathBuf> {
        self.cache_dir
            .as_ref()
            .map(|d| d.join(format!("drc-{TOOL_VERSION}-{}.json", self.input().hash())))
    }
}

/// Where an archive came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Computed,
    /// Loaded from the cache and re-verified.
    Cache,
}

/// Enumerates and archives, consulting the cache when one is configured.
/// A cache entry that fails verification is recomputed and replaced.
pub fn run_enumerate(config: &RunConfig) -> Result<(DecompositionArchive, Provenance)> {
    classify_case(config.g, &config.m, config.k)?;
    let limits = &config.strata.limits;
    if let Some(path) = config.cache_path() {
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(a) = parse_archive(&bytes, limits) {
                if a.input == config.input() && a.tool_version == TOOL_VERSION {
                    return Ok((a, Provenance::Cache));
                }
            }
        }
    }
    let d = enumerate_strata(config.g, &config.m, config.k, &config.strata)?;
    let archive = DecompositionArchive::from_decomposition(&d, limits)?;
    if let Some(path) = config.cache_path() {
        write_atomic(&path, archive.to_json().as_bytes())?;
    }
    Ok((archive, Provenance::Computed))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure_one_config() -> RunConfig {
        RunConfig::new(4, Some(4), 3, vec![-2, 5, 3, 12], StrataConfig::default()).unwrap()
    }

    #[test]
    fn figure_one_archive_round_trips() {
        let (a, prov) = run_enumerate(&figure_one_config()).unwrap();
        assert_eq!(prov, Provenance::Computed);
        let fig = a
            .strata
            .iter()
            .find(|s| s.twist_multiset == vec![3, 3, 6] && s.num_vertices == 3)
            .expect("figure one stratum");
        assert_eq!(rational::to_text(&fig.weight), "6/1");
        let json = a.to_json();
        let back = parse_archive(json.as_bytes(), &Limits::default()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_json(), json);
        let (again, _) = run_enumerate(&figure_one_config()).unwrap();
        assert_eq!(again.to_json(), json);
    }

    #[test]
    fn tampering_and_versions_are_caught() {
        let cfg = RunConfig::new(1, None, 1, vec![2, -2], StrataConfig::default()).unwrap();
        let (a, _) = run_enumerate(&cfg).unwrap();
        let json = a.to_json();
        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["strata"][0]["weight"] = "7/1".into();
        let err = parse_archive(v.to_string().as_bytes(), &Limits::default()).unwrap_err();
        assert!(matches!(err, DrcError::Invariant(ref m) if m.contains("weight")), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["drc_schema"] = 2.into();
        let err = parse_archive(v.to_string().as_bytes(), &Limits::default()).unwrap_err();
        assert!(err.to_string().contains("schema version 2"));

        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["strata"][0]["aut_order"] = "x".into();
        let err = parse_archive(v.to_string().as_bytes(), &Limits::default()).unwrap_err();
        assert!(err.to_string().contains("/strata/0/aut_order"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&json).unwrap();
        v["strata"][0]["weight"] = "2/2".into();
        assert!(parse_archive(v.to_string().as_bytes(), &Limits::default()).is_err());
    }

    #[test]
    fn discrepancy_is_reported() {
        let cfg = RunConfig::new(2, None, 1, vec![3, -2], StrataConfig::default()).unwrap();
        let err = run_enumerate(&cfg).unwrap_err();
        assert!(err.to_string().contains("discrepancy"), "{err}");
        assert!(RunConfig::new(2, Some(3), 1, vec![3, -1], StrataConfig::default()).is_err());
    }

    #[test]
    fn cache_hit_is_verified() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::new(2, None, 1, vec![3, -1], StrataConfig::default()).unwrap();
        cfg.cache_dir = Some(dir.path().to_path_buf());
        let (a, p) = run_enumerate(&cfg).unwrap();
        assert_eq!(p, Provenance::Computed);
        let (b, p) = run_enumerate(&cfg).unwrap();
        assert_eq!(p, Provenance::Cache);
        assert_eq!(a, b);
        // corrupt the cache entry: it is recomputed, not served
        let path = cfg.cache_path().unwrap();
        let text = fs::read_to_string(&path).unwrap().replacen("\"aut_order\": 1", "\"aut_order\": 5", 1);
        fs::write(&path, text).unwrap();
        let (c, p) = run_enumerate(&cfg).unwrap();
        assert_eq!(p, Provenance::Computed);
        assert_eq!(c, a);
    }
}
