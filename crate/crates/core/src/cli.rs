//! Batch command line front end. Every command is a pure function of its
//! arguments, input files and seed, so equal runs print equal bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::chains::{check_system, invariants_json, normal_form_json, reduce, report_json, InvariantKey, Scene};
use crate::compactification::{caps_off, image_class};
use crate::curve::parse_curves;
use crate::error::{Error, Result};
use crate::graph::enumerate;
use crate::homology::{gluing_matrix, is_frame, normalize_frame, FrameInt, LatticeClass};
use crate::knot::{emit_knot, knot_frame_to_l_frame, parse_knot, pushoff};
use crate::linking::{link_matrix, LinkOptions, Method};
use crate::rational::{fmt_q, parse_q};
use crate::rng::DEFAULT_SEED;

pub const SEED_ENV: &str = "FRAMELINK_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "framelink", version, about = "Frame-dependent linking numbers, compactifications and chain systems in ℝ² × S¹")]
pub struct RunConfig {
    /// Seed for generic-position choices; falls back to $FRAMELINK_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Linking matrix of every curve pair in a curve file.
    Link {
        curves: PathBuf,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        frame: i64,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
    },
    #[command(subcommand)]
    Frame(FrameCommand),
    #[command(subcommand)]
    Glue(GlueCommand),
    #[command(subcommand)]
    Graphs(GraphsCommand),
    #[command(subcommand)]
    Chains(ChainsCommand),
    #[command(subcommand)]
    Knot(KnotCommand),
}

#[derive(Clone, Debug, Subcommand)]
pub enum FrameCommand {
    /// Whether `f` is a frame for the kernel generator `v`, and its integer.
    Check {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
    },
}

#[derive(Clone, Debug, Subcommand)]
pub enum GlueCommand {
    /// The gluing matrix with `A·v = f`, `A·f = −v`.
    Matrix {
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
    },
    /// Image of a boundary class and whether it bounds a disk after gluing.
    Class {
        #[arg(allow_hyphen_values = true)]
        c: String,
        #[arg(allow_hyphen_values = true)]
        f: String,
        #[arg(allow_hyphen_values = true)]
        v: String,
    },
}

#[derive(Clone, Debug, Subcommand)]
pub enum GraphsCommand {
    /// Decorated graphs of the family `(g, h)` up to isomorphism.
    Enumerate {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        boundaries: usize,
        #[arg(long)]
        max_edges: usize,
    },
}

#[derive(Clone, Debug, Subcommand)]
pub enum ChainsCommand {
    /// Checks the boundary identity of a scene.
    Check { scene: PathBuf },
    /// Normal form and edgeless coefficients.
    Reduce {
        scene: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        frame: Option<i64>,
    },
    /// Table of invariants read off the edgeless graphs.
    Invariants {
        scene: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        frame: Option<i64>,
    },
}

#[derive(Clone, Debug, Subcommand)]
pub enum KnotCommand {
    /// Framing integer of a framed knot file and the matching frame of L_K.
    Frame { knot: PathBuf },
    /// Pushoff with framing `k`, as a curve file.
    Pushoff {
        knot: PathBuf,
        #[arg(short = 'k', allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        epsilon: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses arguments (program name first) and runs; the environment seed is
/// passed in so callers control it.
pub fn run_args<I, S>(args: I, env_seed: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => run(&config, env_seed),
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

pub fn run(config: &RunConfig, env_seed: Option<&str>) -> Outcome {
    let seed = match resolve_seed(config.seed, env_seed) {
        Ok(s) => s,
        Err(e) => return failure(&e),
    };
    match dispatch(config, seed) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => failure(&e),
    }
}

fn failure(e: &Error) -> Outcome {
    Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") }
}

fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64> {
    match (flag, env) {
        (Some(s), _) => Ok(s),
        (None, Some(text)) => text
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV} must be an unsigned integer, got {text:?}"))),
        (None, None) => Ok(DEFAULT_SEED),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

/// Accepts `a,b`, `(a, b)` or `a b`.
pub fn parse_class(text: &str) -> Result<LatticeClass> {
    let cleaned = text.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = cleaned.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
    match parts.as_slice() {
        [a, b] => {
            let m = a.parse().map_err(|_| Error::InvalidArgument(format!("bad integer {a:?}")))?;
            let w = b.parse().map_err(|_| Error::InvalidArgument(format!("bad integer {b:?}")))?;
            Ok(LatticeClass::new(m, w))
        }
        _ => Err(Error::InvalidArgument(format!("expected a lattice class like \"2,1\", got {text:?}"))),
    }
}

fn render(format: Format, value: Value, text: impl FnOnce() -> String) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
            s.push('\n');
            s
        }
        Format::Text => text(),
    }
}

fn dispatch(config: &RunConfig, seed: u64) -> Result<(i32, String)> {
    let fmt = config.format;
    match &config.command {
        Command::Link { curves, frame, method } => {
            let cs = parse_curves(&read(curves)?)?;
            let opts = LinkOptions::with_seed(seed);
            let m = link_matrix(&cs, FrameInt(*frame), *method, &opts)?;
            let labels: Vec<String> =
                cs.iter().enumerate().map(|(i, c)| c.label.clone().unwrap_or_else(|| format!("c{i}"))).collect();
            let windings: Vec<i64> = cs.iter().map(|c| c.winding()).collect();
            let value = json!({
                "frame": frame,
                "method": method,
                "labels": labels,
                "windings": windings,
                "matrix": m,
            });
            Ok((0, render(fmt, value, || link_text(*frame, *method, &labels, &windings, &m))))
        }
        Command::Frame(FrameCommand::Check { f, v }) => {
            let (f, v) = (parse_class(f)?, parse_class(v)?);
            let ok = is_frame(f, v)?;
            let p = if ok { normalize_frame(f, v).ok() } else { None };
            let det = f.det(v);
            let value = json!({ "is_frame": ok, "det": det, "p": p.map(|x| x.0) });
            Ok((0, render(fmt, value, || match (ok, p) {
                (false, _) => format!("not a frame (det = {det})\n"),
                (true, Some(p)) => format!("frame, p = {p}\n"),
                (true, None) => format!("frame (det = {det}); normalization needs v = ±(1, 0)\n"),
            })))
        }
        Command::Glue(GlueCommand::Matrix { f, v }) => {
            let a = gluing_matrix(parse_class(f)?, parse_class(v)?)?;
            let value = json!({ "matrix": a.rows(), "det": a.det() });
            Ok((0, render(fmt, value, || format!("{a}\n"))))
        }
        Command::Glue(GlueCommand::Class { c, f, v }) => {
            let (c, f, v) = (parse_class(c)?, parse_class(f)?, parse_class(v)?);
            let image = image_class(c, f, v)?;
            let caps = caps_off(c, f, v)?;
            let value = json!({ "image": [image.m, image.w], "caps_off": caps });
            Ok((0, render(fmt, value, || format!("image {image}\ncaps off: {}\n", if caps { "yes" } else { "no" }))))
        }
        Command::Graphs(GraphsCommand::Enumerate { genus, boundaries, max_edges }) => {
            let gs = enumerate(*genus, *boundaries, *max_edges)?;
            let value = Value::Array(
                gs.iter()
                    .map(|g| json!({ "graph": g.to_json(), "aut_order": g.aut_order(), "edges": g.num_edges() }))
                    .collect(),
            );
            Ok((0, render(fmt, value, || {
                let mut out = format!("{} graphs with genus {genus}, {boundaries} boundaries, at most {max_edges} edges\n", gs.len());
                for (i, g) in gs.iter().enumerate() {
                    let zeros: String = (0..g.num_vertices()).map(|v| if g.area_zero(v) { '0' } else { '+' }).collect();
                    let _ = writeln!(out, "{i:>4}  edges {}  vertices {zeros}  valences {:?}  aut {}", g.num_edges(), (0..g.num_vertices()).map(|v| g.valence(v)).collect::<Vec<_>>(), g.aut_order());
                }
                out
            })))
        }
        Command::Chains(cmd) => chains(cmd, fmt, seed),
        Command::Knot(KnotCommand::Frame { knot }) => {
            let fk = parse_knot(&read(knot)?)?;
            let k = fk.framing_integer(seed)?;
            let p = knot_frame_to_l_frame(k);
            let value = json!({ "framing": k, "p": p.0, "component": fk.component_id });
            Ok((0, render(fmt, value, || format!("framing {k}\np {p}\n"))))
        }
        Command::Knot(KnotCommand::Pushoff { knot, k, epsilon }) => {
            let fk = parse_knot(&read(knot)?)?;
            let eps = match epsilon {
                Some(e) => Some(parse_q(e).ok_or_else(|| Error::InvalidArgument(format!("bad epsilon {e:?}")))?),
                None => None,
            };
            let out = pushoff(&fk.knot, *k, eps, seed)?;
            let text = emit_knot(&out);
            let value = json!({ "framing": k, "curve": text });
            Ok((0, render(fmt, value, || text.clone())))
        }
    }
}

fn link_text(frame: i64, method: Method, labels: &[String], windings: &[i64], m: &[Vec<i64>]) -> String {
    let method = match method {
        Method::Chain => "chain",
        Method::Embedding => "embedding",
        Method::Both => "both",
    };
    let mut out = format!("frame {frame}, method {method}\n");
    let width = labels.iter().map(|l| l.len()).chain(m.iter().flatten().map(|x| x.to_string().len())).max().unwrap_or(1) + 2;
    let _ = write!(out, "{:width$}", "");
    for l in labels {
        let _ = write!(out, "{l:>width$}");
    }
    out.push('\n');
    for (i, row) in m.iter().enumerate() {
        let _ = write!(out, "{:width$}", labels[i]);
        for x in row {
            let _ = write!(out, "{x:>width$}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "windings {windings:?}");
    out
}

fn invariants_text(inv: &std::collections::BTreeMap<InvariantKey, crate::rational::Q>) -> String {
    let mut out = String::new();
    if inv.is_empty() {
        out.push_str("all invariants vanish\n");
    }
    for (k, v) in inv {
        let flags: String = k.zero_area.iter().map(|&z| if z { '0' } else { '+' }).collect();
        let class = k.class.as_deref().map(|c| format!(" class {c}")).unwrap_or_default();
        let _ = writeln!(out, "F[g={}, n={:?}, area {flags}{class}] = {}", k.genus, k.windings, fmt_q(v));
    }
    out
}

fn load_scene(path: &Path) -> Result<crate::chains::ChainSystem> {
    let scene = Scene::parse(&read(path)?)?;
    scene.to_system(path.parent().unwrap_or(Path::new(".")))
}

fn chains(cmd: &ChainsCommand, fmt: Format, seed: u64) -> Result<(i32, String)> {
    let opts = LinkOptions::with_seed(seed);
    match cmd {
        ChainsCommand::Check { scene } => {
            let s = load_scene(scene)?;
            let r = check_system(&s);
            let code = if r.is_ok() { 0 } else { 1 };
            Ok((code, render(fmt, report_json(&r), || {
                let mut out = format!("graphs checked {}\nvalence-one contractions {}\n", r.graphs_checked, r.valence_one_contractions);
                for msg in &r.non_transverse {
                    let _ = writeln!(out, "non-transverse: {msg}");
                }
                for v in &r.violations {
                    let _ = writeln!(out, "violation at a graph with {} edges and {} vertices: {} cells", v.graph.num_edges(), v.graph.num_vertices(), v.discrepancy.len());
                }
                out.push_str(if r.is_ok() { "ok\n" } else { "FAILED\n" });
                out
            })))
        }
        ChainsCommand::Reduce { scene, frame } => {
            let s = load_scene(scene)?;
            let p = frame.map(FrameInt).unwrap_or(s.frame);
            let nf = reduce(&s, p, &opts)?;
            Ok((0, render(fmt, normal_form_json(&nf), || {
                let mut out = format!("frame {p}\n");
                for (g, c) in &nf.multipliers {
                    let _ = writeln!(out, "graph with {} edges, {} vertices: {} model cells", g.num_edges(), g.num_vertices(), c.len());
                    for (k, v) in c {
                        let _ = writeln!(out, "  labels {:?} windings {:?}: {}", k.labels, k.windings, fmt_q(v));
                    }
                }
                out.push_str(&invariants_text(&nf.invariants));
                out
            })))
        }
        ChainsCommand::Invariants { scene, frame } => {
            let s = load_scene(scene)?;
            let p = frame.map(FrameInt).unwrap_or(s.frame);
            let inv = reduce(&s, p, &opts)?.invariants;
            Ok((0, render(fmt, json!({ "frame": p.0, "invariants": invariants_json(&inv) }), || invariants_text(&inv))))
        }
    }
}
