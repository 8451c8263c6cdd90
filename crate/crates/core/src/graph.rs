//! Exchange graphs of tilting objects: breadth-first exploration, path
//! search between tilting objects, pinned restriction and export.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rigid::{self, Backend, Mutation, RigidError, RigidSet, SearchWindow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Rigid(#[from] RigidError),
    #[error("no path found within {expanded} node expansions")]
    NotFoundWithinBudget { expanded: usize },
    #[error("{0} is not rigid")]
    NotRigid(String),
    #[error("unknown export format {0:?}")]
    UnknownFormat(String),
    #[error("malformed graph document: {0}")]
    Import(String),
    #[error("replay diverged at step {step}: {detail}")]
    Replay { step: usize, detail: String },
}

/// Exploration limits; `None` means unbounded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExploreLimits {
    pub max_nodes: Option<usize>,
    pub max_depth: Option<usize>,
}

impl ExploreLimits {
    pub fn nodes(n: usize) -> Self {
        ExploreLimits { max_nodes: Some(n), max_depth: None }
    }

    pub fn depth(d: usize) -> Self {
        ExploreLimits { max_nodes: None, max_depth: Some(d) }
    }
}

/// The exchanged pair of an edge `(a, b)`: `out` is a summand of `a`,
/// `incoming` the summand of `b` replacing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeLabel<O> {
    pub out: O,
    pub incoming: O,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeGraph<O> {
    nodes: BTreeMap<String, RigidSet<O>>,
    edges: BTreeMap<(String, String), EdgeLabel<O>>,
    frontier: BTreeSet<String>,
    errors: BTreeMap<String, Vec<String>>,
}

impl<O> Default for ExchangeGraph<O> {
    fn default() -> Self {
        ExchangeGraph {
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            frontier: BTreeSet::new(),
            errors: BTreeMap::new(),
        }
    }
}

impl<O: Clone + Ord + fmt::Display> ExchangeGraph<O> {
    pub fn nodes(&self) -> &BTreeMap<String, RigidSet<O>> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(String, String), EdgeLabel<O>> {
        &self.edges
    }

    pub fn frontier(&self) -> &BTreeSet<String> {
        &self.frontier
    }

    /// Mutation failures recorded during exploration, by node key.
    pub fn errors(&self) -> &BTreeMap<String, Vec<String>> {
        &self.errors
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.nodes.contains_key(key)
    }

    pub fn is_frontier(&self, key: &str) -> bool {
        self.frontier.contains(key)
    }

    pub fn neighbors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut adj: BTreeMap<&str, Vec<&str>> =
            self.nodes.keys().map(|k| (k.as_str(), Vec::new())).collect();
        for (a, b) in self.edges.keys() {
            adj.get_mut(a.as_str()).expect("edge endpoint").push(b);
            adj.get_mut(b.as_str()).expect("edge endpoint").push(a);
        }
        adj
    }

    pub fn degree(&self, key: &str) -> usize {
        self.edges.keys().filter(|(a, b)| a == key || b == key).count()
    }

    pub fn interior(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().filter(|k| !self.frontier.contains(*k)).map(String::as_str)
    }

    pub fn component_count(&self) -> usize {
        let adj = self.neighbors();
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for start in adj.keys() {
            if !seen.insert(*start) {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([*start]);
            while let Some(u) = queue.pop_front() {
                for v in &adj[u] {
                    if seen.insert(*v) {
                        queue.push_back(v);
                    }
                }
            }
        }
        count
    }

    /// Connected and nonempty.
    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Number of independent cycles, `|E| - |V| + #components`.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + self.component_count() - self.nodes.len()
    }

    /// Every endpoint pair differs in exactly the labeled summand.
    pub fn edges_sound(&self) -> bool {
        self.edges.iter().all(|((a, b), e)| {
            let (a, b) = (&self.nodes[a], &self.nodes[b]);
            a.contains(&e.out)
                && !a.contains(&e.incoming)
                && b.contains(&e.incoming)
                && !b.contains(&e.out)
                && a.elements().iter().filter(|x| !b.contains(x)).count() == 1
        })
    }

    /// Induced subgraph on nodes containing `pinned`.
    pub fn restrict<B: Backend<Object = O>>(
        &self,
        backend: &B,
        pinned: &O,
    ) -> Result<ExchangeGraph<O>, GraphError> {
        backend.validate(pinned)?;
        if !backend.is_rigid(pinned) {
            return Err(GraphError::NotRigid(pinned.to_string()));
        }
        let nodes: BTreeMap<_, _> = self
            .nodes
            .iter()
            .filter(|(_, s)| s.contains(pinned))
            .map(|(k, s)| (k.clone(), s.clone()))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|((a, b), _)| nodes.contains_key(a) && nodes.contains_key(b))
            .map(|(k, e)| (k.clone(), e.clone()))
            .collect();
        let keep = |k: &String| nodes.contains_key(k);
        let frontier = self.frontier.iter().filter(|k| keep(k)).cloned().collect();
        let errors = self
            .errors
            .iter()
            .filter(|(k, _)| keep(k))
            .map(|(k, e)| (k.clone(), e.clone()))
            .collect();
        Ok(ExchangeGraph { nodes, edges, frontier, errors })
    }

    pub fn export(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Dot => self.to_dot(),
            ExportFormat::Json => self.to_json(),
        }
    }

    pub fn to_dot(&self) -> String {
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("graph exchange {\n");
        for key in self.nodes.keys() {
            if self.frontier.contains(key) {
                out.push_str(&format!("  {} [style=dashed];\n", q(key)));
            } else {
                out.push_str(&format!("  {};\n", q(key)));
            }
        }
        for ((a, b), e) in &self.edges {
            let label = format!("{} -> {}", e.out, e.incoming);
            out.push_str(&format!("  {} -- {} [label={}];\n", q(a), q(b), q(&label)));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            nodes: self
                .nodes
                .iter()
                .map(|(k, s)| NodeDocument {
                    key: k.clone(),
                    elements: s.elements().iter().map(|e| e.to_string()).collect(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|((a, b), e)| EdgeDocument {
                    a: a.clone(),
                    b: b.clone(),
                    out: e.out.to_string(),
                    incoming: e.incoming.to_string(),
                })
                .collect(),
            frontier: self.frontier.iter().cloned().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("serializable")
    }

    pub fn from_json<B: Backend<Object = O>>(backend: &B, text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| GraphError::Import(e.to_string()))?;
        Self::from_document(backend, &doc)
    }

    pub fn from_document<B: Backend<Object = O>>(
        backend: &B,
        doc: &GraphDocument,
    ) -> Result<Self, GraphError> {
        let mut g = ExchangeGraph::default();
        for node in &doc.nodes {
            let elements = node
                .elements
                .iter()
                .map(|e| backend.parse_object(e))
                .collect::<Result<Vec<_>, _>>()?;
            let set = RigidSet::new(elements)?;
            if set.key() != node.key {
                return Err(GraphError::Import(format!("key {:?} does not match elements", node.key)));
            }
            g.nodes.insert(node.key.clone(), set);
        }
        for edge in &doc.edges {
            if !g.nodes.contains_key(&edge.a) || !g.nodes.contains_key(&edge.b) || edge.a >= edge.b {
                return Err(GraphError::Import(format!("bad edge {:?} -- {:?}", edge.a, edge.b)));
            }
            let label = EdgeLabel {
                out: backend.parse_object(&edge.out)?,
                incoming: backend.parse_object(&edge.incoming)?,
            };
            g.edges.insert((edge.a.clone(), edge.b.clone()), label);
        }
        for key in &doc.frontier {
            if !g.nodes.contains_key(key) {
                return Err(GraphError::Import(format!("unknown frontier node {key:?}")));
            }
            g.frontier.insert(key.clone());
        }
        if !g.edges_sound() {
            return Err(GraphError::Import("edge labels inconsistent with nodes".into()));
        }
        Ok(g)
    }

    fn insert_edge(&mut self, from: &str, m: &Mutation<O>) {
        let to = m.set.key();
        let (key, label) = if from < to.as_str() {
            ((from.to_string(), to), EdgeLabel { out: m.out.clone(), incoming: m.incoming.clone() })
        } else {
            ((to, from.to_string()), EdgeLabel { out: m.incoming.clone(), incoming: m.out.clone() })
        };
        self.edges.insert(key, label);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, GraphError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            _ => Err(GraphError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<NodeDocument>,
    pub edges: Vec<EdgeDocument>,
    pub frontier: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub key: String,
    pub elements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub a: String,
    pub b: String,
    pub out: String,
    #[serde(rename = "in")]
    pub incoming: String,
}

fn all_mutations<B: Backend>(
    backend: &B,
    set: &RigidSet<B::Object>,
    window: &SearchWindow,
) -> Vec<Result<Mutation<B::Object>, RigidError>> {
    (0..set.len()).map(|k| rigid::mutate_unchecked(backend, set, k, window)).collect()
}

/// Breadth-first closure of `start` under mutation.
///
/// Layers are expanded in parallel and merged in key order, so the result
/// does not depend on scheduling. A node is marked frontier when some of
/// its mutations were not added (limits) or failed (recorded in
/// [`ExchangeGraph::errors`]).
pub fn explore<B: Backend>(
    backend: &B,
    start: &RigidSet<B::Object>,
    limits: ExploreLimits,
    window: &SearchWindow,
) -> Result<ExchangeGraph<B::Object>, GraphError> {
    if !rigid::is_tilting(backend, start) {
        return Err(RigidError::NotTilting(start.key()).into());
    }
    let max_nodes = limits.max_nodes.unwrap_or(usize::MAX);
    let max_depth = limits.max_depth.unwrap_or(usize::MAX);
    let mut g = ExchangeGraph::default();
    if max_nodes == 0 {
        return Ok(g);
    }
    g.nodes.insert(start.key(), start.clone());
    let mut layer = vec![start.key()];
    let mut depth = 0;
    while !layer.is_empty() {
        let expanded: Vec<_> = layer
            .par_iter()
            .map(|key| (key, all_mutations(backend, &g.nodes[key], window)))
            .collect();
        let mut next = Vec::new();
        for (u, results) in expanded {
            for r in results {
                match r {
                    Ok(m) => {
                        let v = m.set.key();
                        if !g.nodes.contains_key(&v) {
                            if g.nodes.len() >= max_nodes || depth >= max_depth {
                                g.frontier.insert(u.clone());
                                continue;
                            }
                            g.nodes.insert(v.clone(), m.set.clone());
                            next.push(v);
                        }
                        g.insert_edge(u, &m);
                    }
                    Err(e) => {
                        g.errors.entry(u.clone()).or_default().push(e.to_string());
                        g.frontier.insert(u.clone());
                    }
                }
            }
        }
        next.sort();
        layer = next;
        depth += 1;
    }
    Ok(g)
}

/// One step of a mutation path: mutate at `index` (position in the current
/// sorted set), replacing `out` by `incoming`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep<O> {
    pub index: usize,
    pub out: O,
    pub incoming: O,
}

/// A mutation path from `a` to `b` by bidirectional breadth-first search.
/// `budget` bounds the number of node expansions.
pub fn find_path<B: Backend>(
    backend: &B,
    a: &RigidSet<B::Object>,
    b: &RigidSet<B::Object>,
    window: &SearchWindow,
    budget: usize,
) -> Result<Vec<PathStep<B::Object>>, GraphError> {
    for s in [a, b] {
        if !rigid::is_tilting(backend, s) {
            return Err(RigidError::NotTilting(s.key()).into());
        }
    }
    if a == b {
        return Ok(Vec::new());
    }
    let mut sets: HashMap<String, RigidSet<B::Object>> = HashMap::new();
    sets.insert(a.key(), a.clone());
    sets.insert(b.key(), b.clone());
    // parent pointers towards the respective root
    let mut parents: [HashMap<String, Option<String>>; 2] =
        [HashMap::from([(a.key(), None)]), HashMap::from([(b.key(), None)])];
    let mut layers = [vec![a.key()], vec![b.key()]];
    let mut expanded = 0;
    loop {
        let side = if layers[0].len() <= layers[1].len() { 0 } else { 1 };
        if layers[side].is_empty() || expanded + layers[side].len() > budget {
            return Err(GraphError::NotFoundWithinBudget { expanded });
        }
        expanded += layers[side].len();
        let results: Vec<_> = layers[side]
            .par_iter()
            .map(|key| (key.clone(), all_mutations(backend, &sets[key], window)))
            .collect();
        let mut next = Vec::new();
        for (u, muts) in results {
            for m in muts.into_iter().flatten() {
                let v = m.set.key();
                if parents[side].contains_key(&v) {
                    continue;
                }
                parents[side].insert(v.clone(), Some(u.clone()));
                sets.entry(v.clone()).or_insert(m.set);
                if parents[1 - side].contains_key(&v) {
                    let chain = join_chains(&parents, &v);
                    return Ok(steps_along(&chain, &sets));
                }
                next.push(v);
            }
        }
        next.sort();
        layers[side] = next;
    }
}

fn join_chains(parents: &[HashMap<String, Option<String>>; 2], meet: &str) -> Vec<String> {
    let walk = |p: &HashMap<String, Option<String>>| {
        let mut out = vec![meet.to_string()];
        while let Some(Some(up)) = p.get(out.last().expect("nonempty")) {
            out.push(up.clone());
        }
        out
    };
    let mut chain = walk(&parents[0]);
    chain.reverse();
    chain.extend(walk(&parents[1]).into_iter().skip(1));
    chain
}

fn steps_along<O: Clone + Ord + fmt::Display>(
    chain: &[String],
    sets: &HashMap<String, RigidSet<O>>,
) -> Vec<PathStep<O>> {
    chain
        .windows(2)
        .map(|w| {
            let (x, y) = (&sets[&w[0]], &sets[&w[1]]);
            let out = x.elements().iter().find(|e| !y.contains(e)).expect("adjacent").clone();
            let incoming = y.elements().iter().find(|e| !x.contains(e)).expect("adjacent").clone();
            PathStep { index: x.index_of(&out).expect("member"), out, incoming }
        })
        .collect()
}

/// Applies `steps` to `start`, checking each exchanged pair.
pub fn replay<B: Backend>(
    backend: &B,
    start: &RigidSet<B::Object>,
    steps: &[PathStep<B::Object>],
    window: &SearchWindow,
) -> Result<RigidSet<B::Object>, GraphError> {
    let mut cur = start.clone();
    for (i, step) in steps.iter().enumerate() {
        let m = rigid::mutate(backend, &cur, step.index, window)?;
        if m.out != step.out || m.incoming != step.incoming {
            return Err(GraphError::Replay {
                step: i,
                detail: format!(
                    "expected {} -> {}, got {} -> {}",
                    step.out, step.incoming, m.out, m.incoming
                ),
            });
        }
        cur = m.set;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coh::Coh;
    use crate::dynkin::Dynkin;
    use crate::rigid::canonical_tilting;

    fn full<B: Backend>(b: &B) -> ExchangeGraph<B::Object> {
        explore(b, &canonical_tilting(b), ExploreLimits::default(), &SearchWindow::default()).unwrap()
    }

    #[test]
    fn a2_pentagon() {
        let a2 = Dynkin::parse("A2").unwrap();
        let g = full(&a2);
        assert_eq!((g.node_count(), g.edge_count()), (5, 5));
        assert!(g.is_connected());
        assert_eq!(g.cycle_rank(), 1);
        assert!(g.frontier().is_empty());
        assert!(g.edges_sound());
    }

    #[test]
    fn a3_is_three_regular() {
        let a3 = Dynkin::parse("A3").unwrap();
        let g = full(&a3);
        assert_eq!(g.node_count(), 14);
        assert_eq!(g.edge_count(), 21);
        assert!(g.nodes().keys().all(|k| g.degree(k) == 3));
        assert!(g.is_connected());
        assert_eq!(g.cycle_rank(), 8);
    }

    #[test]
    fn kronecker_chain_truncated() {
        let k = Coh::parse_weights("(1,1)").unwrap();
        let g = explore(&k, &canonical_tilting(&k), ExploreLimits::nodes(7), &SearchWindow::default())
            .unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (7, 6));
        assert_eq!(g.frontier().len(), 2);
        for key in g.interior() {
            assert_eq!(g.degree(key), 2);
        }
        for key in g.frontier() {
            assert_eq!(g.degree(key), 1);
        }
    }

    #[test]
    fn depth_limit() {
        let a2 = Dynkin::parse("A2").unwrap();
        let g = explore(&a2, &canonical_tilting(&a2), ExploreLimits::depth(1), &SearchWindow::default())
            .unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.frontier().len(), 2);
    }

    #[test]
    fn explore_rejects_non_tilting() {
        let a2 = Dynkin::parse("A2").unwrap();
        let s = RigidSet::parse(&a2, "P1[1]").unwrap();
        assert!(explore(&a2, &s, ExploreLimits::default(), &SearchWindow::default()).is_err());
    }

    #[test]
    fn paths_in_a3_replay() {
        let a3 = Dynkin::parse("A3").unwrap();
        let g = full(&a3);
        let sets: Vec<_> = g.nodes().values().cloned().collect();
        let w = SearchWindow::default();
        for a in &sets {
            for b in &sets {
                let path = find_path(&a3, a, b, &w, 100).unwrap();
                assert!(path.len() <= 6);
                assert_eq!(&replay(&a3, a, &path, &w).unwrap(), b);
                if a == b {
                    assert!(path.is_empty());
                }
            }
        }
    }

    #[test]
    fn coh_path_to_shift_by_c() {
        let x = Coh::parse_weights("(2,3)").unwrap();
        let t = canonical_tilting(&x);
        let c = crate::lattice::LElement::canonical(x.weight());
        let shifted =
            RigidSet::new(t.elements().iter().map(|e| x.shift(e, &c)).collect()).unwrap();
        let w = SearchWindow::default();
        let path = find_path(&x, &t, &shifted, &w, 20_000).unwrap();
        assert_eq!(replay(&x, &t, &path, &w).unwrap(), shifted);
    }

    #[test]
    fn path_budget_exhaustion() {
        let k = Coh::parse_weights("(1,1)").unwrap();
        let t = canonical_tilting(&k);
        let far = RigidSet::parse(&k, "O(40c) | O(41c)").unwrap();
        assert!(matches!(
            find_path(&k, &t, &far, &SearchWindow::default(), 10),
            Err(GraphError::NotFoundWithinBudget { .. })
        ));
    }

    #[test]
    fn restriction_examples() {
        let a2 = Dynkin::parse("A2").unwrap();
        let g = full(&a2);
        let pin = a2.parse_object("M(1,1)").unwrap();
        let r = g.restrict(&a2, &pin).unwrap();
        assert_eq!((r.node_count(), r.edge_count()), (2, 1));

        let k = Coh::parse_weights("(1,1)").unwrap();
        let gk = explore(&k, &canonical_tilting(&k), ExploreLimits::nodes(3), &SearchWindow::default())
            .unwrap();
        let absent = k.parse_object("O(10c)").unwrap();
        assert_eq!(gk.restrict(&k, &absent).unwrap().node_count(), 0);
    }

    #[test]
    fn restriction_rejects_non_rigid() {
        let k = Coh::parse_weights("(1,1)").unwrap();
        let g = explore(&k, &canonical_tilting(&k), ExploreLimits::nodes(3), &SearchWindow::default())
            .unwrap();
        let t = k.parse_object("T(hom; 0; 1)").unwrap();
        assert!(matches!(g.restrict(&k, &t), Err(GraphError::NotRigid(_))));
    }

    #[test]
    fn export_and_reimport() {
        let a2 = Dynkin::parse("A2").unwrap();
        let g = full(&a2);
        let dot = g.to_dot();
        assert_eq!(dot.matches(" -- ").count(), 5);
        assert_eq!(dot.lines().filter(|l| l.trim_end().ends_with("\";")).count(), 5);
        let json = g.export("json".parse().unwrap());
        assert_eq!(ExchangeGraph::from_json(&a2, &json).unwrap(), g);

        let k = Coh::parse_weights("(1,1)").unwrap();
        let gk = explore(&k, &canonical_tilting(&k), ExploreLimits::nodes(4), &SearchWindow::default())
            .unwrap();
        let back = ExchangeGraph::from_json(&k, &gk.to_json()).unwrap();
        assert_eq!(back.frontier(), gk.frontier());
        assert_eq!(back.edges(), gk.edges());

        let empty: ExchangeGraph<crate::dynkin::DynkinObject> = ExchangeGraph::default();
        assert_eq!(empty.to_dot(), "graph exchange {\n}\n");
        assert_eq!(ExchangeGraph::from_json(&a2, &empty.to_json()).unwrap(), empty);
        assert!("svg".parse::<ExportFormat>().is_err());
    }

    #[test]
    fn import_rejects_bad_documents() {
        let a2 = Dynkin::parse("A2").unwrap();
        assert!(ExchangeGraph::from_json(&a2, "{").is_err());
        let bad = r#"{"nodes":[{"key":"x","elements":["P1[1]","P2[1]"]}],"edges":[],"frontier":[]}"#;
        assert!(matches!(ExchangeGraph::from_json(&a2, bad), Err(GraphError::Import(_))));
    }
}
