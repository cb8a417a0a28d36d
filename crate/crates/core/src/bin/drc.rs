use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use drc_core::archive::{parse_archive, run_enumerate, DecompositionArchive, RunConfig, StratumRecord};
use drc_core::graph::{is_simple_star, GraphSpec, LegWeighting, StableGraph};
use drc_core::laurent::ExponentVector;
use drc_core::rational::{self, Rational};
use drc_core::residue::{k_residue, residue, root_sum_experiment, KDifferential0, Point};
use drc_core::strata::{DecoratedStratum, StrataConfig};
use drc_core::sweep::{run_sweep, FaultInjection, SweepRanges};
use drc_core::toric::ToricChart;
use drc_core::twist::{leg_weights, parse_twist, PositiveTwist};
use drc_core::{DrcError, Result};

#[derive(Parser)]
#[command(name = "drc", version, about = "Twisted k-differential boundary strata, DR-locus invariants and k-residues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// Emit JSON (the default).
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Emit a human-readable table.
    #[arg(long)]
    table: bool,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Guards {
    #[arg(long)]
    guard_vertices: Option<usize>,
    #[arg(long)]
    guard_edges: Option<usize>,
}

impl Guards {
    fn config(&self) -> StrataConfig {
        let mut c = StrataConfig::default();
        if let Some(v) = self.guard_vertices {
            c.limits.max_vertices = v;
        }
        if let Some(e) = self.guard_edges {
            c.limits.max_edges = e;
            c.max_edges = e;
        }
        c
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the boundary strata and their coefficients.
    Enumerate {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: u32,
        /// Leg weights, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        m: Vec<i64>,
        #[command(flatten)]
        guards: Guards,
        #[command(flatten)]
        output: Output,
    },
    /// Coefficients and DR-locus invariants of one stratum.
    StratumReport {
        #[arg(long)]
        graph: PathBuf,
        /// JSON twist, a file holding one, or inline `[e0:3,e1:6]`.
        #[arg(long)]
        twist: String,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        /// Leg weights; required for inline twists.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        m: Option<Vec<i64>>,
        #[command(flatten)]
        guards: Guards,
        #[command(flatten)]
        output: Output,
    },
    /// Binomial equations of the toric chart.
    ChartEquations {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        twist: String,
        #[arg(long)]
        k: u32,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        m: Option<Vec<i64>>,
        /// Use the divided twist I/k.
        #[arg(long)]
        divided: bool,
        /// Audit flows up to this l1 norm.
        #[arg(long, default_value_t = 3)]
        bound: usize,
        #[command(flatten)]
        guards: Guards,
        #[command(flatten)]
        output: Output,
    },
    /// Residues or k-residues of a genus-0 k-differential.
    Residue {
        #[arg(long)]
        k: u32,
        /// `location:multiplicity` pairs, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        factors: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        scalar: String,
        /// A single point (`inf` or a rational); all poles by default.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        /// Force k-residues (implied when k > 1).
        #[arg(long)]
        k_residue: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Seeded search for vanishing sums of k-th roots of k-residues.
    RootSum {
        #[arg(long)]
        k: u32,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        stratum: Vec<i64>,
        /// Markings in the pole subset, comma separated; repeat for several
        /// subsets. All admissible subsets by default.
        #[arg(long)]
        subset: Vec<String>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_choices: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Run every invariant over a parameter range.
    Sweep {
        #[arg(long, default_value_t = 3)]
        max_g: u32,
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        ks: Vec<u32>,
        #[arg(long, default_value_t = 4)]
        max_abs_m: i64,
        #[arg(long, default_value_t = 6)]
        max_chart_edges: usize,
        #[arg(long, hide = true)]
        inject_corrupt_twist: bool,
        #[command(flatten)]
        guards: Guards,
        #[command(flatten)]
        output: Output,
    },
    /// Parse an archive and re-verify every stored invariant.
    VerifyArchive {
        path: PathBuf,
        #[command(flatten)]
        guards: Guards,
    },
}

fn emit(output: &Output, json: &Value, table: impl FnOnce() -> String) -> Result<()> {
    let text = if output.table {
        table()
    } else {
        let mut s = serde_json::to_string_pretty(json).expect("json");
        s.push('\n');
        s
    };
    write_text(output, &text)
}

fn write_text(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_graph(path: &PathBuf) -> Result<StableGraph> {
    let text = fs::read_to_string(path).map_err(|e| DrcError::Io(format!("{}: {e}", path.display())))?;
    let spec: GraphSpec = serde_path_to_error::deserialize(&mut serde_json::Deserializer::from_str(&text))
        .map_err(|e| DrcError::input(format!("graph schema violation at {}: {}", e.path(), e.inner())))?;
    StableGraph::from_spec(&spec)
}

/// The twist argument may be JSON, inline, or a path to a JSON file.
fn twist_text(arg: &str) -> Result<String> {
    let t = arg.trim();
    if t.starts_with('{') || t.starts_with('[') {
        Ok(t.to_string())
    } else {
        fs::read_to_string(t).map_err(|e| DrcError::Io(format!("{t}: {e}")))
    }
}

fn load_stratum(
    graph_path: &PathBuf,
    twist_arg: &str,
    k: u32,
    m: Option<&[i64]>,
    config: &StrataConfig,
) -> Result<(StableGraph, drc_core::twist::Twist, Option<LegWeighting>)> {
    let graph = read_graph(graph_path)?;
    config.limits.check_graph(&graph)?;
    let text = twist_text(twist_arg)?;
    if text.trim().starts_with('[') && m.is_none() && graph.num_legs() > 0 {
        return Err(DrcError::input("inline twists need --m for the leg values"));
    }
    let center = m.and_then(|m| is_simple_star(&graph, &LegWeighting::new(k, m.to_vec()))).map(|s| s.center);
    let twist = parse_twist(&text, &graph, k, m, center)?;
    let weights = m.map(<[i64]>::to_vec).unwrap_or_else(|| leg_weights(&graph, &twist));
    if m.is_some() && leg_weights(&graph, &twist) != weights {
        return Err(DrcError::input("twist leg values disagree with --m"));
    }
    Ok((graph, twist, Some(LegWeighting::new(k, weights))))
}

fn decomposition_table(a: &DecompositionArchive) -> String {
    let i = &a.input;
    let m: Vec<String> = i.m.iter().map(i64::to_string).collect();
    let mut out = format!(
        "g={} k={} m=({}) case {}: {} strata\n",
        i.g,
        i.k,
        m.join(","),
        a.case,
        a.strata.len()
    );
    out.push_str(&format!(
        "{:>4} {:>3} {:>3} {:<16} {:>8} {:>8} {:>4} {:>6} {:>6}  {}\n",
        "#", "V", "E", "I(e)", "weight", "fp", "aut", "fibre", "length", "vertex labels (g; k; signature)"
    ));
    for (j, s) in a.strata.iter().enumerate() {
        out.push_str(&stratum_row(j, s));
    }
    out
}

fn stratum_row(j: usize, s: &StratumRecord) -> String {
    let tw: Vec<String> = s.twist_multiset.iter().map(i64::to_string).collect();
    let labels: Vec<String> = s
        .vertex_labels
        .iter()
        .map(|l| {
            let sig: Vec<String> = l.signature.iter().map(i64::to_string).collect();
            format!("[{}; {}; ({})]", l.genus, l.order, sig.join(","))
        })
        .collect();
    format!(
        "{:>4} {:>3} {:>3} {:<16} {:>8} {:>8} {:>4} {:>6} {:>6}  {}\n",
        j,
        s.num_vertices,
        s.twist_multiset.len(),
        format!("{{{}}}", tw.join(",")),
        rational::to_text(&s.weight),
        rational::to_text(&s.fp_coefficient),
        s.aut_order,
        s.drl_local.fibre_count,
        s.drl_local.length,
        labels.join(" ")
    )
}

fn exponent_json(e: &ExponentVector) -> Value {
    Value::Object(e.iter().map(|(v, x)| (v.to_string(), json!(x))).collect())
}

fn rat(q: &Rational) -> Value {
    json!(rational::to_text(q))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Enumerate { g, n, k, m, guards, output } => {
            let mut config = RunConfig::new(g, n, k, m, guards.config())?;
            config.cache_dir = std::env::var_os("DRC_CACHE_DIR").map(PathBuf::from);
            let (archive, _) = run_enumerate(&config)?;
            if output.table {
                write_text(&output, &decomposition_table(&archive))?;
            } else {
                write_text(&output, &archive.to_json())?;
            }
        }
        Command::StratumReport { graph, twist, g, n, k, m, guards, output } => {
            let config = guards.config();
            let (graph, twist, weighting) = load_stratum(&graph, &twist, k, m.as_deref(), &config)?;
            let weighting = weighting.expect("weighting");
            if graph.genus() != g || graph.num_legs() != n {
                return Err(DrcError::input(format!(
                    "graph has genus {} and {} legs, but --g {g} --n {n}",
                    graph.genus(),
                    graph.num_legs()
                )));
            }
            let positive = PositiveTwist::new(&graph, &weighting, twist)?;
            let s = DecoratedStratum::new(graph, weighting, positive, &config.limits)?;
            let record = StratumRecord::from_stratum(&s, &config.limits)?;
            let value = serde_json::to_value(&record).expect("json");
            emit(&output, &value, || stratum_row(0, &record))?;
        }
        Command::ChartEquations { graph, twist, k, m, divided, bound, guards, output } => {
            let config = guards.config();
            let (graph, twist, weighting) = load_stratum(&graph, &twist, k, m.as_deref(), &config)?;
            let root = weighting
                .and_then(|w| is_simple_star(&graph, &w))
                .map_or(0, |s| s.center);
            let chart = ToricChart::new(&graph, &twist, divided, root, &config.limits)?;
            let eqs = chart.equation_system(bound, &config.limits)?;
            let list: Vec<Value> = eqs
                .iter()
                .map(|e| {
                    json!({
                        "role": e.role,
                        "display": e.equation.display(),
                        "lhs": exponent_json(&e.equation.lhs),
                        "rhs": exponent_json(&e.equation.rhs),
                        "flow": e.equation.flow.iter().map(|(c, x)| (c.to_string(), json!(x))).collect::<serde_json::Map<_, _>>(),
                        "trivial": e.trivial,
                    })
                })
                .collect();
            let cycles: Vec<Value> = chart
                .cycles
                .iter()
                .enumerate()
                .map(|(i, c)| json!({"index": i, "half_edges": c.half_edges()}))
                .collect();
            let value = json!({
                "divided": divided,
                "bound": bound,
                "cycles": cycles,
                "basis": chart.basis,
                "independent_cycle_variables": chart.independent_cycle_variables()?,
                "generators": chart.monoid_generators().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "equations": list,
            });
            emit(&output, &value, || {
                eqs.iter()
                    .filter(|e| !e.trivial)
                    .map(|e| e.equation.display() + "\n")
                    .collect()
            })?;
        }
        Command::Residue { k, factors, scalar, at, k_residue: force_k, output } => {
            let diff = KDifferential0::new(k, rational::parse(&scalar)?, KDifferential0::parse_factors(&factors)?)?;
            let points: Vec<Point> = match at {
                Some(p) => vec![Point::parse(&p)?],
                None => diff.divisor().into_iter().filter(|(_, m)| *m < 0).map(|(p, _)| p).collect(),
            };
            let mut rows = Vec::new();
            for p in &points {
                let order = diff.order_at(p);
                if k == 1 && !force_k {
                    let r = residue(&diff, p)?;
                    rows.push(json!({"point": p, "order": order, "residue": rat(&r.value), "is_pole": r.is_pole}));
                } else {
                    let r = k_residue(&diff, p)?;
                    rows.push(json!({"point": p, "order": order, "k_residue": rat(&r.value),
                        "rational_roots": r.rational_roots, "symbolic_root": r.symbolic_root}));
                }
            }
            let value = json!({
                "k": k,
                "scalar": rat(&diff.scalar),
                "m_infinity": diff.m_infinity(),
                "values": rows,
            });
            emit(&output, &value, || {
                rows.iter()
                    .map(|r| {
                        let v = r.get("residue").or_else(|| r.get("k_residue")).unwrap();
                        format!("{} {}\n", r["point"].as_str().unwrap_or("?"), v.as_str().unwrap_or("?"))
                    })
                    .collect()
            })?;
        }
        Command::RootSum { k, stratum, subset, trials, seed, max_choices, output } => {
            let subsets = if subset.is_empty() {
                None
            } else {
                Some(
                    subset
                        .iter()
                        .map(|s| {
                            s.split(',')
                                .map(|x| x.trim().parse::<usize>().map_err(|_| DrcError::input(format!("bad subset {s:?}"))))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            };
            let report = root_sum_experiment(k, &stratum, subsets, trials, seed, max_choices)?;
            let value = serde_json::to_value(&report).expect("json");
            emit(&output, &value, || {
                report
                    .subsets
                    .iter()
                    .map(|s| {
                        format!(
                            "subset {:?} proper={} nonzero {}/{} zero {} undecided {}\n",
                            s.subset, s.proper, s.nonzero_trials, s.trials, s.zero_trials, s.undecided_trials
                        )
                    })
                    .collect()
            })?;
            if report.subsets.iter().any(|s| s.proper && s.zero_trials > 0) {
                return Ok(ExitCode::from(4));
            }
        }
        Command::Sweep { max_g, max_n, ks, max_abs_m, max_chart_edges, inject_corrupt_twist, guards, output } => {
            let ranges = SweepRanges { max_g, max_n, ks, max_abs_m, max_chart_edges };
            let fault = FaultInjection { corrupt_twist: inject_corrupt_twist };
            let report = run_sweep(&ranges, &guards.config(), fault)?;
            let value = serde_json::to_value(&report).expect("json");
            emit(&output, &value, || {
                let mut t = report.table();
                for v in &report.violations {
                    t.push_str(&format!("violation: {} in stratum {}: {}\n", v.check, v.stratum, v.detail));
                }
                t
            })?;
            if !report.ok() {
                return Ok(ExitCode::from(4));
            }
        }
        Command::VerifyArchive { path, guards } => {
            let bytes = fs::read(&path).map_err(|e| DrcError::Io(format!("{}: {e}", path.display())))?;
            let a = parse_archive(&bytes, &guards.config().limits)?;
            println!("ok: {} strata verified (schema {}, tool {})", a.strata.len(), a.drc_schema, a.tool_version);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("drc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
