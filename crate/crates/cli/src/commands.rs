use std::fmt::Display;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;
use tiltgraph::graph::{self, ExploreLimits, ExportFormat};
use tiltgraph::reach::{Reach, DEFAULT_REACH_BUDGET};
use tiltgraph::rigid::{self, Backend, RigidSet, SearchWindow};
use tiltgraph::seeds::{self, CanonicalMatrix, ExchangeMatrix, Seed};
use tiltgraph::verify::{self, DEFAULT_SEED, PATH_BUDGET, SUITES};
use tiltgraph::{lattice, Coh, Dynkin};

const COH_EXPLORE_NODES: usize = 500;
const SEED_NODES: usize = 10_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn domain(e: impl Display) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "tiltgraph", version, about = "Tilting and cluster-tilting combinatorics for weighted projective lines and Dynkin quivers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Weight type of a weighted projective line, e.g. "(2,3)".
    #[arg(long, global = true)]
    pub weights: Option<String>,
    /// Dynkin quiver: A<n>, D<n>, E6-E8 (optional /bits orientation) or "n; i->j; ...".
    #[arg(long, global = true)]
    pub quiver: Option<String>,
    /// Complement search window: auto, auto:<cap> or <lo>:<hi>.
    #[arg(long, global = true, default_value = "auto")]
    pub window: String,
    /// Node or expansion budget for searches.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Graph export format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Emit a single JSON document on stdout.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Dot,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Genus class and Grothendieck rank of a weight type.
    Classify {
        #[arg(value_name = "WEIGHTS")]
        weight_type: Option<String>,
    },
    /// dim Hom(A, B).
    Hom { a: String, b: String },
    /// dim Ext^1(A, B) (cluster category for quivers).
    Ext { a: String, b: String },
    /// Check whether a set of summands ("X | Y | ...") is tilting.
    TiltCheck { set: String },
    /// Exchange the summand at INDEX of a tilting set.
    Mutate { set: String, index: usize },
    /// Breadth-first exchange graph from a tilting set.
    Explore {
        /// Start set; defaults to the canonical tilting object.
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Mutation path between two tilting sets ("canonical" allowed).
    Path { a: String, b: String },
    /// Exchange graph restricted to sets containing PIN.
    Restrict {
        pin: String,
        #[arg(long)]
        start: Option<String>,
    },
    /// Reachability certificate from M to N.
    Reach { m: String, n: String },
    /// Seed mutation closure of an exchange matrix.
    Seeds {
        /// Rows separated by ';', e.g. "0,1;-1,0"; defaults to the canonical matrix of the backend.
        #[arg(long)]
        matrix: Option<String>,
        /// List every cluster variable.
        #[arg(long)]
        list: bool,
    },
    /// Run a verification suite ("all" runs every suite).
    Verify {
        #[arg(long)]
        suite: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of a static UI bundle to serve at /.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Idle session timeout in seconds.
        #[arg(long, default_value_t = 1800)]
        idle_timeout: u64,
    },
}

pub struct Output {
    pub text: String,
    pub json: Value,
    pub code: u8,
}

impl Output {
    fn ok(text: impl Into<String>, json: Value) -> Self {
        Output { text: text.into(), json, code: 0 }
    }
}

enum AnyBackend {
    Coh(Coh),
    Dynkin(Dynkin),
}

fn backend(cli: &Cli) -> Result<AnyBackend, CliError> {
    match (&cli.weights, &cli.quiver) {
        (Some(w), None) => Ok(AnyBackend::Coh(Coh::parse_weights(w).map_err(usage)?)),
        (None, Some(q)) => Ok(AnyBackend::Dynkin(Dynkin::parse(q).map_err(usage)?)),
        (Some(_), Some(_)) => Err(usage("give only one of --weights and --quiver")),
        (None, None) => Err(usage("this command needs --weights or --quiver")),
    }
}

pub fn run(cli: Cli) -> Result<Output, CliError> {
    let window = SearchWindow::parse(&cli.window).map_err(usage)?;
    match &cli.command {
        Command::Classify { weight_type } => classify(weight_type.as_ref().or(cli.weights.as_ref())),
        Command::Verify { suite } => run_verify(suite, cli.seed),
        Command::Serve { port, host, static_dir, idle_timeout } => {
            serve(host, *port, static_dir.clone(), *idle_timeout)
        }
        Command::Seeds { matrix, list } => run_seeds(&cli, matrix.as_deref(), *list),
        Command::Hom { a, b } => match backend(&cli)? {
            AnyBackend::Coh(x) => {
                let (a, b) = (obj(&x, a)?, obj(&x, b)?);
                dim_output("Hom", &a, &b, x.hom_dim(&a, &b).map_err(domain)?)
            }
            AnyBackend::Dynkin(d) => {
                let (a, b) = (obj(&d, a)?, obj(&d, b)?);
                dim_output("Hom", &a, &b, d.hom_module(&a, &b).map_err(domain)?)
            }
        },
        Command::Ext { a, b } => match backend(&cli)? {
            AnyBackend::Coh(x) => {
                let (a, b) = (obj(&x, a)?, obj(&x, b)?);
                dim_output("Ext^1", &a, &b, x.ext1_dim(&a, &b).map_err(domain)?)
            }
            AnyBackend::Dynkin(d) => {
                let (a, b) = (obj(&d, a)?, obj(&d, b)?);
                dim_output("Ext^1", &a, &b, d.ext1_c(&a, &b).map_err(domain)?)
            }
        },
        _ => match backend(&cli)? {
            AnyBackend::Coh(x) => generic(&x, &cli, &window, COH_EXPLORE_NODES),
            AnyBackend::Dynkin(d) => generic(&d, &cli, &window, usize::MAX),
        },
    }
}

fn obj<B: Backend>(b: &B, s: &str) -> Result<B::Object, CliError> {
    let o = b.parse_object(s).map_err(usage)?;
    b.validate(&o).map_err(usage)?;
    Ok(o)
}

fn set<B: Backend>(b: &B, s: &str) -> Result<RigidSet<B::Object>, CliError> {
    if s.trim() == "canonical" {
        return Ok(rigid::canonical_tilting(b));
    }
    RigidSet::parse(b, s).map_err(usage)
}

fn dim_output(what: &str, a: &impl Display, b: &impl Display, dim: u64) -> Result<Output, CliError> {
    Ok(Output::ok(dim.to_string(), json!({ "quantity": what, "a": a.to_string(), "b": b.to_string(), "dim": dim })))
}

fn classify(weights: Option<&String>) -> Result<Output, CliError> {
    let w = weights.ok_or_else(|| usage("classify needs a weight type"))?;
    let wt = lattice::parse_weights(w).map_err(usage)?;
    let g = wt.genus();
    let text = format!("{}, g={}, rank G0 = {}", g.kind, g.genus, wt.rank_g0());
    let json = json!({
        "weights": wt.weights(),
        "class": g.kind.to_string(),
        "genus": g.genus.to_string(),
        "rank_g0": wt.rank_g0(),
    });
    Ok(Output::ok(text, json))
}

fn strings<T: Display>(xs: &[T]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn generic<B: Reach + CanonicalMatrix>(
    b: &B,
    cli: &Cli,
    window: &SearchWindow,
    default_nodes: usize,
) -> Result<Output, CliError> {
    match &cli.command {
        Command::TiltCheck { set: s } => tilt_check(b, &set(b, s)?),
        Command::Mutate { set: s, index } => {
            let t = set(b, s)?;
            let m = rigid::mutate(b, &t, *index, window).map_err(domain)?;
            let text = format!("{}\nexchanged {} -> {} at index {index}", m.set, m.out, m.incoming);
            let json = json!({
                "elements": strings(m.set.elements()),
                "key": m.set.key(),
                "out": m.out.to_string(),
                "in": m.incoming.to_string(),
                "index": index,
                "new_index": m.new_index,
            });
            Ok(Output::ok(text, json))
        }
        Command::Explore { start, depth } => {
            let t = match start {
                Some(s) => set(b, s)?,
                None => rigid::canonical_tilting(b),
            };
            let limits = ExploreLimits { max_nodes: Some(cli.budget.unwrap_or(default_nodes)), max_depth: *depth };
            let g = graph::explore(b, &t, limits, window).map_err(domain)?;
            Ok(graph_output(&g, cli.format))
        }
        Command::Restrict { pin, start } => {
            let pin = obj(b, pin)?;
            let t = match start {
                Some(s) => set(b, s)?,
                None => rigid::canonical_tilting(b),
            };
            let limits = ExploreLimits { max_nodes: Some(cli.budget.unwrap_or(default_nodes)), max_depth: None };
            let g = graph::explore(b, &t, limits, window).map_err(domain)?;
            let r = g.restrict(b, &pin).map_err(domain)?;
            Ok(graph_output(&r, cli.format))
        }
        Command::Path { a, b: target } => {
            let (from, to) = (set(b, a)?, set(b, target)?);
            let budget = cli.budget.unwrap_or(PATH_BUDGET);
            let path = graph::find_path(b, &from, &to, window, budget).map_err(domain)?;
            let end = graph::replay(b, &from, &path, window).map_err(domain)?;
            if end != to {
                return Err(domain("path replay did not reach the target"));
            }
            let mut text = format!("{} mutations", path.len());
            for (i, s) in path.iter().enumerate() {
                text.push_str(&format!("\n{:>3}. index {}: {} -> {}", i + 1, s.index, s.out, s.incoming));
            }
            let steps: Vec<Value> = path
                .iter()
                .map(|s| json!({ "index": s.index, "out": s.out.to_string(), "in": s.incoming.to_string() }))
                .collect();
            Ok(Output::ok(text, json!({ "from": from.key(), "to": to.key(), "steps": steps })))
        }
        Command::Reach { m, n } => {
            let (m, n) = (obj(b, m)?, obj(b, n)?);
            let cert = b
                .reach(&m, &n, window, cli.budget.unwrap_or(DEFAULT_REACH_BUDGET))
                .map_err(domain)?;
            if !cert.verify(b) {
                return Err(domain("certificate failed re-verification"));
            }
            let ext = cert.edge_ext1(b);
            let text = format!(
                "{}\n{} steps, every consecutive pair has Ext^1 = 0 both ways",
                strings(&cert.chain).join(" ~ "),
                ext.len()
            );
            let edges: Vec<Value> = cert
                .chain
                .windows(2)
                .zip(&ext)
                .map(|(w, (f, r))| json!({ "from": w[0].to_string(), "to": w[1].to_string(), "ext1_forward": f, "ext1_backward": r }))
                .collect();
            Ok(Output::ok(text, json!({ "chain": strings(&cert.chain), "edges": edges, "verified": true })))
        }
        _ => unreachable!("handled by run"),
    }
}

fn tilt_check<B: Backend>(b: &B, t: &RigidSet<B::Object>) -> Result<Output, CliError> {
    let els = t.elements();
    let mut witness = None;
    'outer: for (i, x) in els.iter().enumerate() {
        for y in &els[i..] {
            let (e1, e2) = (b.ext1(x, y), b.ext1(y, x));
            if e1 > 0 || e2 > 0 {
                witness = Some(if e1 > 0 { (x, y, e1) } else { (y, x, e2) });
                break 'outer;
            }
        }
    }
    let n = b.tilting_size();
    let (text, status, code) = match witness {
        Some((x, y, e)) => (format!("not rigid: Ext^1({x}, {y}) = {e}"), "not_rigid", 1),
        None if t.len() == n => (format!("tilting: {n} summands"), "tilting", 0),
        None => (format!("rigid, not tilting: {} of {n} summands", t.len()), "rigid", 1),
    };
    let json = json!({ "key": t.key(), "status": status, "summands": t.len(), "required": n });
    Ok(Output { text, json, code })
}

fn graph_output<O: Clone + Ord + Display>(g: &graph::ExchangeGraph<O>, format: Option<Format>) -> Output {
    let summary = json!({
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "frontier": g.frontier().len(),
        "connected": g.is_connected(),
        "errors": g.errors().values().map(Vec::len).sum::<usize>(),
    });
    match format {
        Some(Format::Dot) => Output::ok(g.export(ExportFormat::Dot), json!({ "summary": summary, "dot": g.to_dot() })),
        Some(Format::Json) => {
            let doc = serde_json::to_value(g.to_document()).expect("serializable");
            Output::ok(g.to_json(), json!({ "summary": summary, "graph": doc }))
        }
        None => {
            let mut text = format!(
                "{} nodes, {} edges, {} frontier, connected: {}",
                g.node_count(),
                g.edge_count(),
                g.frontier().len(),
                g.is_connected()
            );
            for key in g.nodes().keys() {
                let mark = if g.is_frontier(key) { " *" } else { "" };
                text.push_str(&format!("\n{key}{mark}"));
            }
            Output::ok(text, json!({ "summary": summary, "graph": g.to_document() }))
        }
    }
}

fn run_seeds(cli: &Cli, matrix: Option<&str>, list: bool) -> Result<Output, CliError> {
    let b = match matrix {
        Some(m) => ExchangeMatrix::parse(m).map_err(usage)?,
        None => match backend(cli)? {
            AnyBackend::Coh(x) => x.canonical_matrix(),
            AnyBackend::Dynkin(d) => d.canonical_matrix(),
        },
    };
    let g = seeds::seed_explore(&Seed::initial(b.clone()), Some(cli.budget.unwrap_or(SEED_NODES))).map_err(domain)?;
    let vars = g.cluster_variables();
    let rendered: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
    let mut text = format!(
        "{} seeds, {} edges, {} cluster variables{}",
        g.nodes.len(),
        g.edges.len(),
        vars.len(),
        if g.frontier.is_empty() { String::new() } else { format!(" ({} frontier seeds)", g.frontier.len()) }
    );
    if list {
        for v in &rendered {
            text.push_str(&format!("\n{v}"));
        }
    }
    let json = json!({
        "matrix": b.rows(),
        "seeds": g.nodes.len(),
        "edges": g.edges.len(),
        "frontier": g.frontier.len(),
        "variables": rendered,
    });
    Ok(Output::ok(text, json))
}

fn run_verify(suite: &str, seed: u64) -> Result<Output, CliError> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut text = Vec::new();
    let mut reports = Vec::new();
    let mut passed = true;
    for name in names {
        let r = verify::run_suite(name, seed).map_err(usage)?;
        passed &= r.passed();
        text.push(r.to_string());
        reports.push(serde_json::to_value(&r).expect("serializable"));
    }
    Ok(Output {
        text: text.join("\n"),
        json: json!({ "passed": passed, "reports": reports }),
        code: if passed { 0 } else { 1 },
    })
}

fn serve(host: &str, port: u16, static_dir: Option<PathBuf>, idle: u64) -> Result<Output, CliError> {
    let addr: SocketAddr = format!("{host}:{port}").parse().map_err(usage)?;
    let config = tiltgraph_server::ServerConfig {
        idle_timeout: Duration::from_secs(idle),
        static_dir,
        ..Default::default()
    };
    let rt = tokio::runtime::Runtime::new().map_err(domain)?;
    println!("serving on http://{addr}/api/v1");
    rt.block_on(tiltgraph_server::serve(addr, config)).map_err(domain)?;
    Ok(Output::ok("server stopped", json!({ "stopped": true })))
}
