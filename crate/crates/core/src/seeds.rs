//! Skew-symmetric exchange matrices, seed mutation with exact Laurent
//! arithmetic, seed-graph enumeration and propagation of matrices along an
//! exchange graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::coh::{Coh, SheafObject};
use crate::dynkin::{AcyclicQuiver, Dynkin};
use crate::graph::ExchangeGraph;
use crate::laurent::LaurentPoly;
use crate::lattice::LElement;
use crate::rigid::{Backend, RigidSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeedError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not skew-symmetric at ({0}, {1})")]
    NotSkewSymmetric(usize, usize),
    #[error("index {index} out of range for rank {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cluster has {got} variables, matrix rank is {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("exchange relation at {0} is not divisible by the old variable")]
    InexactDivision(usize),
    #[error("cannot parse matrix {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExchangeMatrix {
    rows: Vec<Vec<i64>>,
}

impl ExchangeMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, SeedError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(SeedError::NotSquare);
        }
        for i in 0..n {
            for j in i..n {
                if rows[i][j] != -rows[j][i] {
                    return Err(SeedError::NotSkewSymmetric(i, j));
                }
            }
        }
        Ok(ExchangeMatrix { rows })
    }

    pub fn zero(n: usize) -> Self {
        ExchangeMatrix { rows: vec![vec![0; n]; n] }
    }

    /// `b_ij = #(i -> j) - #(j -> i)`.
    pub fn from_quiver(q: &AcyclicQuiver) -> Self {
        ExchangeMatrix { rows: q.exchange_matrix() }
    }

    /// Rows separated by `;`, entries by `,` or whitespace: `"0,1;-1,0"`.
    /// Nested brackets `[[0,1],[-1,0]]` are accepted too.
    pub fn parse(s: &str) -> Result<Self, SeedError> {
        let err = || SeedError::Parse(s.to_string());
        let flat = s.replace("],", ";");
        let rows = flat
            .trim()
            .trim_start_matches('[')
            .trim_end_matches(']')
            .split(';')
            .map(|row| {
                row.split(|c: char| c == ',' || c.is_whitespace())
                    .map(|x| x.trim_matches(|c| c == '[' || c == ']'))
                    .filter(|x| !x.is_empty())
                    .map(|x| x.parse::<i64>().map_err(|_| err()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        if rows.iter().any(|r| r.is_empty()) {
            return Err(err());
        }
        Self::new(rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// Matrix mutation at `k`.
    pub fn mutate(&self, k: usize) -> Result<Self, SeedError> {
        let n = self.n();
        if k >= n {
            return Err(SeedError::IndexOutOfRange { index: k, n });
        }
        let b = &self.rows;
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == k || j == k {
                            -b[i][j]
                        } else {
                            b[i][j] + b[i][k].signum() * (b[i][k] * b[k][j]).max(0)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(ExchangeMatrix { rows })
    }

    /// `result[p][q] = self[perm[p]][perm[q]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        ExchangeMatrix {
            rows: perm.iter().map(|&p| perm.iter().map(|&q| self.rows[p][q]).collect()).collect(),
        }
    }

    /// Arrows `i -> j` with multiplicity `b_ij > 0`, 0-based.
    pub fn arrows(&self) -> Vec<(usize, usize, i64)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.rows[i][j] > 0)
            .map(|(i, j)| (i, j, self.rows[i][j]))
            .collect()
    }
}

impl fmt::Display for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

/// Backends with a known exchange matrix at their canonical tilting object,
/// indexed by its sorted summands.
pub trait CanonicalMatrix: Backend {
    fn canonical_matrix(&self) -> ExchangeMatrix;
}

impl CanonicalMatrix for Dynkin {
    fn canonical_matrix(&self) -> ExchangeMatrix {
        ExchangeMatrix::from_quiver(self.quiver())
    }
}

impl CanonicalMatrix for Coh {
    /// Arms `O -> O(x_i) -> ... -> O((p_i - 1)x_i) -> O(c)` (a weight one
    /// arm is a single arrow `O -> O(c)`; at least two arms), plus one arrow
    /// `O(c) -> O` for each of the `arms - 2` relations.
    fn canonical_matrix(&self) -> ExchangeMatrix {
        let wt = self.weight();
        let set = RigidSet::new(self.canonical_elements()).expect("distinct");
        let idx = |x: &LElement| set.index_of(&SheafObject::Line(x.clone())).expect("canonical summand");
        let n = set.len();
        let mut b = vec![vec![0i64; n]; n];
        let mut arrow = |a: usize, c: usize| {
            b[a][c] += 1;
            b[c][a] -= 1;
        };
        let zero = LElement::zero(wt);
        let top = LElement::canonical(wt);
        let arms = wt.t().max(2);
        for i in 1..=arms {
            let p = if i <= wt.t() { wt.weight(i) } else { 1 };
            let mut prev = zero.clone();
            for j in 1..p {
                let next = LElement::x(wt, i).scalar_mul(j);
                arrow(idx(&prev), idx(&next));
                prev = next;
            }
            arrow(idx(&prev), idx(&top));
        }
        for _ in 2..arms {
            arrow(idx(&top), idx(&zero));
        }
        ExchangeMatrix { rows: b }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed {
    b: ExchangeMatrix,
    cluster: Vec<LaurentPoly>,
}

impl Seed {
    pub fn new(b: ExchangeMatrix, cluster: Vec<LaurentPoly>) -> Result<Self, SeedError> {
        if cluster.len() != b.n() {
            return Err(SeedError::SizeMismatch { expected: b.n(), got: cluster.len() });
        }
        Ok(Seed { b, cluster })
    }

    /// Cluster `x_1, ..., x_n`.
    pub fn initial(b: ExchangeMatrix) -> Self {
        let n = b.n();
        Seed { cluster: (0..n).map(|i| LaurentPoly::var(n, i)).collect(), b }
    }

    pub fn matrix(&self) -> &ExchangeMatrix {
        &self.b
    }

    pub fn cluster(&self) -> &[LaurentPoly] {
        &self.cluster
    }

    /// `x_k x_k' = prod x_i^[b_ik]+ + prod x_i^[-b_ik]+`.
    pub fn mutate(&self, k: usize) -> Result<Self, SeedError> {
        let b = self.b.mutate(k)?;
        let n = self.b.n();
        let mut plus = LaurentPoly::one(n);
        let mut minus = LaurentPoly::one(n);
        for i in 0..n {
            let bik = self.b.get(i, k);
            if bik > 0 {
                plus = &plus * &self.cluster[i].pow(bik as u32);
            } else if bik < 0 {
                minus = &minus * &self.cluster[i].pow((-bik) as u32);
            }
        }
        let new = (&plus + &minus).div_exact(&self.cluster[k]).ok_or(SeedError::InexactDivision(k))?;
        let mut cluster = self.cluster.clone();
        cluster[k] = new;
        Ok(Seed { b, cluster })
    }

    /// Variables sorted, matrix permuted to match.
    pub fn canonical(&self) -> Self {
        let mut perm: Vec<usize> = (0..self.cluster.len()).collect();
        perm.sort_by(|&a, &b| self.cluster[a].cmp(&self.cluster[b]));
        Seed {
            b: self.b.permuted(&perm),
            cluster: perm.iter().map(|&i| self.cluster[i].clone()).collect(),
        }
    }

    /// Identity up to simultaneous permutation of variables and matrix.
    pub fn key(&self) -> String {
        let c = self.canonical();
        let vars: Vec<String> = c.cluster.iter().map(|v| v.to_string()).collect();
        format!("{} ; B={}", vars.join(" | "), c.b)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedGraph {
    pub nodes: BTreeMap<String, Seed>,
    pub edges: BTreeSet<(String, String)>,
    pub frontier: BTreeSet<String>,
}

impl SeedGraph {
    pub fn cluster_variables(&self) -> BTreeSet<LaurentPoly> {
        self.nodes.values().flat_map(|s| s.cluster.iter().cloned()).collect()
    }
}

/// Breadth-first closure under seed mutation, at most `max_nodes` seeds.
pub fn seed_explore(initial: &Seed, max_nodes: Option<usize>) -> Result<SeedGraph, SeedError> {
    let max_nodes = max_nodes.unwrap_or(usize::MAX);
    let mut g = SeedGraph::default();
    if max_nodes == 0 {
        return Ok(g);
    }
    let start = initial.canonical();
    g.nodes.insert(start.key(), start.clone());
    let mut layer = vec![start.key()];
    while !layer.is_empty() {
        let expanded = layer
            .par_iter()
            .map(|key| {
                let s = &g.nodes[key];
                let muts = (0..s.b.n()).map(|k| s.mutate(k).map(|m| m.canonical())).collect::<Result<Vec<_>, _>>()?;
                Ok((key, muts))
            })
            .collect::<Result<Vec<_>, SeedError>>()?;
        let mut next = Vec::new();
        for (u, muts) in expanded {
            for m in muts {
                let v = m.key();
                if !g.nodes.contains_key(&v) {
                    if g.nodes.len() >= max_nodes {
                        g.frontier.insert(u.clone());
                        continue;
                    }
                    g.nodes.insert(v.clone(), m);
                    next.push(v.clone());
                }
                let e = if *u < v { (u.clone(), v) } else { (v, u.clone()) };
                g.edges.insert(e);
            }
        }
        next.sort();
        layer = next;
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropagationError {
    #[error("root {0:?} is not a node of the graph")]
    RootMissing(String),
    #[error("root matrix has rank {got}, nodes have {expected} summands")]
    SizeMismatch { expected: usize, got: usize },
    #[error("inconsistent matrices around cycle {}", .cycle.join(" / "))]
    Inconsistent { cycle: Vec<String> },
}

/// Mutates `b` (indexed by `from`) at the summand `out`, then reorders it to
/// the sorted summands of `to`. `None` when the labels do not match `to`.
pub fn transfer_matrix<O: Clone + Ord + fmt::Display>(
    b: &ExchangeMatrix,
    from: &RigidSet<O>,
    out: &O,
    incoming: &O,
    to: &RigidSet<O>,
) -> Option<ExchangeMatrix> {
    let k = from.index_of(out)?;
    let mutated = b.mutate(k).ok()?;
    let mut labels = from.elements().to_vec();
    labels[k] = incoming.clone();
    let perm = to
        .elements()
        .iter()
        .map(|x| labels.iter().position(|y| y == x))
        .collect::<Option<Vec<_>>>()?;
    Some(mutated.permuted(&perm))
}

/// Assigns matrices along a breadth-first spanning tree from `root`, then
/// checks every remaining edge. Nodes unreachable from the root are omitted.
pub fn propagate_quiver<O: Clone + Ord + fmt::Display>(
    g: &ExchangeGraph<O>,
    root: &str,
    b: &ExchangeMatrix,
) -> Result<BTreeMap<String, ExchangeMatrix>, PropagationError> {
    let root_set = g.nodes().get(root).ok_or_else(|| PropagationError::RootMissing(root.to_string()))?;
    if root_set.len() != b.n() {
        return Err(PropagationError::SizeMismatch { expected: root_set.len(), got: b.n() });
    }
    // oriented adjacency: (neighbor, out, incoming) as seen from the node
    let mut adj: BTreeMap<&str, Vec<(&str, &O, &O)>> = BTreeMap::new();
    for ((a, c), e) in g.edges() {
        adj.entry(a).or_default().push((c, &e.out, &e.incoming));
        adj.entry(c).or_default().push((a, &e.incoming, &e.out));
    }
    let mut assigned: BTreeMap<String, ExchangeMatrix> = BTreeMap::new();
    let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
    assigned.insert(root.to_string(), b.clone());
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &(v, out, incoming) in adj.get(u).map(Vec::as_slice).unwrap_or_default() {
            if assigned.contains_key(v) {
                continue;
            }
            let nodes = g.nodes();
            let m = transfer_matrix(&assigned[u], &nodes[u], out, incoming, &nodes[v])
                .ok_or_else(|| PropagationError::Inconsistent { cycle: vec![u.to_string(), v.to_string()] })?;
            assigned.insert(v.to_string(), m);
            parent.insert(v, u);
            queue.push_back(v);
        }
    }
    for ((a, c), e) in g.edges() {
        let (a, c) = (a.as_str(), c.as_str());
        if !assigned.contains_key(a) || parent.get(c) == Some(&a) || parent.get(a) == Some(&c) {
            continue;
        }
        let nodes = g.nodes();
        let predicted = transfer_matrix(&assigned[a], &nodes[a], &e.out, &e.incoming, &nodes[c]);
        if predicted.as_ref() != Some(&assigned[c]) {
            return Err(PropagationError::Inconsistent { cycle: tree_cycle(&parent, a, c) });
        }
    }
    Ok(assigned)
}

/// `a`, up the tree to the common ancestor, down to `c`.
fn tree_cycle<'a>(parent: &BTreeMap<&'a str, &'a str>, a: &'a str, c: &'a str) -> Vec<String> {
    let ancestors = |mut x: &'a str| {
        let mut out = vec![x.to_string()];
        while let Some(p) = parent.get(x) {
            out.push(p.to_string());
            x = p;
        }
        out
    };
    let up_a = ancestors(a);
    let up_c = ancestors(c);
    let lca = up_a.iter().find(|x| up_c.contains(x)).expect("same tree").clone();
    let mut cycle: Vec<String> = up_a.iter().take_while(|x| **x != lca).cloned().collect();
    cycle.push(lca.clone());
    let down: Vec<String> = up_c.iter().take_while(|x| **x != lca).cloned().collect();
    cycle.extend(down.into_iter().rev());
    cycle
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{explore, ExploreLimits};
    use crate::rigid::{canonical_tilting, SearchWindow};
    use proptest::prelude::*;

    fn m(s: &str) -> ExchangeMatrix {
        ExchangeMatrix::parse(s).unwrap()
    }

    #[test]
    fn matrix_examples() {
        assert_eq!(m("0,1;-1,0").mutate(0).unwrap(), m("0,-1;1,0"));
        assert_eq!(m("0,2;-2,0").mutate(0).unwrap(), m("0,-2;2,0"));
        assert_eq!(m("0,1,0;-1,0,1;0,-1,0").mutate(1).unwrap(), m("0,-1,1;1,0,-1;-1,1,0"));
        assert!(matches!(m("0,1;-1,0").mutate(2), Err(SeedError::IndexOutOfRange { .. })));
        assert!(matches!(ExchangeMatrix::parse("0,1;1,0"), Err(SeedError::NotSkewSymmetric(0, 1))));
        assert!(matches!(ExchangeMatrix::parse("0,1"), Err(SeedError::NotSquare)));
        assert!(ExchangeMatrix::parse("0,x;1,0").is_err());
        assert_eq!(m("[[0, 1], [-1, 0]]"), m("0 1; -1 0"));
    }

    #[test]
    fn seed_examples() {
        let a2 = Seed::initial(m("0,1;-1,0"));
        let s = a2.mutate(0).unwrap();
        assert_eq!(s.cluster()[0].to_string(), "(x2 + 1)/x1");
        assert_eq!(s.mutate(0).unwrap(), a2);
        let kr = Seed::initial(m("0,2;-2,0"));
        assert_eq!(kr.mutate(0).unwrap().cluster()[0].to_string(), "(x2^2 + 1)/x1");
    }

    #[test]
    fn rank_two_period_five() {
        let mut s = Seed::initial(m("0,1;-1,0"));
        let start = s.key();
        for step in 0..5 {
            s = s.mutate(step % 2).unwrap();
        }
        assert_eq!(s.key(), start);
    }

    #[test]
    fn finite_type_counts() {
        for (q, seeds, vars) in [("A2", 5, 5), ("A3", 14, 9), ("D4", 50, 16), ("A4", 42, 14)] {
            let quiver = AcyclicQuiver::parse(q).unwrap();
            let g = seed_explore(&Seed::initial(ExchangeMatrix::from_quiver(&quiver)), None).unwrap();
            assert_eq!(g.nodes.len(), seeds, "{q}");
            assert_eq!(g.cluster_variables().len(), vars, "{q}");
            assert!(g.frontier.is_empty());
            assert!(g.cluster_variables().iter().all(|v| v.has_nonnegative_coefficients()));
        }
    }

    #[test]
    fn denominators_are_positive_roots() {
        let d = Dynkin::parse("D4").unwrap();
        let g = seed_explore(&Seed::initial(d.canonical_matrix()), None).unwrap();
        let mut dvecs: Vec<Vec<i64>> = g
            .cluster_variables()
            .iter()
            .map(|v| v.denominator_vector().iter().map(|&x| x as i64).collect::<Vec<_>>())
            .filter(|v| v.iter().all(|&x| x >= 0))
            .collect();
        dvecs.sort();
        let mut roots = d.roots().to_vec();
        roots.sort();
        assert_eq!(dvecs, roots);
    }

    #[test]
    fn seed_budget_marks_frontier() {
        let g = seed_explore(&Seed::initial(m("0,2;-2,0")), Some(9)).unwrap();
        assert_eq!(g.nodes.len(), 9);
        assert!(!g.frontier.is_empty());
    }

    #[test]
    fn propagation_consistent_on_dynkin_graphs() {
        for q in ["A2", "A3", "A3/11", "D4"] {
            let d = Dynkin::parse(q).unwrap();
            let t = canonical_tilting(&d);
            let g = explore(&d, &t, ExploreLimits::default(), &SearchWindow::default()).unwrap();
            let mats = propagate_quiver(&g, &t.key(), &d.canonical_matrix()).unwrap();
            assert_eq!(mats.len(), g.node_count());
        }
    }

    #[test]
    fn propagation_from_any_root_in_a2() {
        let d = Dynkin::parse("A2").unwrap();
        let t = canonical_tilting(&d);
        let g = explore(&d, &t, ExploreLimits::default(), &SearchWindow::default()).unwrap();
        let mats = propagate_quiver(&g, &t.key(), &d.canonical_matrix()).unwrap();
        for (key, b) in &mats {
            assert!(propagate_quiver(&g, key, b).is_ok());
        }
    }

    #[test]
    fn propagation_consistent_on_coh_balls() {
        for ws in ["(1,1)", "(2,2)", "(2,3)", "(3)"] {
            let x = Coh::parse_weights(ws).unwrap();
            let t = canonical_tilting(&x);
            let g = explore(&x, &t, ExploreLimits::nodes(150), &SearchWindow::default()).unwrap();
            assert!(propagate_quiver(&g, &t.key(), &x.canonical_matrix()).is_ok(), "{ws}");
        }
    }

    #[test]
    fn canonical_coh_matrices() {
        let k = Coh::parse_weights("(1,1)").unwrap();
        assert_eq!(k.canonical_matrix(), m("0,2;-2,0"));
        let x = Coh::parse_weights("(2,2,2)").unwrap();
        let b = x.canonical_matrix();
        assert_eq!(b.arrows().iter().map(|a| a.2).sum::<i64>(), 7);
    }

    #[test]
    fn propagation_errors() {
        let d = Dynkin::parse("A3").unwrap();
        let t = canonical_tilting(&d);
        let g = explore(&d, &t, ExploreLimits::default(), &SearchWindow::default()).unwrap();
        assert!(matches!(
            propagate_quiver(&g, "nope", &d.canonical_matrix()),
            Err(PropagationError::RootMissing(_))
        ));
        assert!(matches!(
            propagate_quiver(&g, &t.key(), &m("0,1;-1,0")),
            Err(PropagationError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn wrong_root_matrix_is_inconsistent() {
        let d = Dynkin::parse("A3").unwrap();
        let t = canonical_tilting(&d);
        let g = explore(&d, &t, ExploreLimits::default(), &SearchWindow::default()).unwrap();
        let wrong = m("0,1,0;-1,0,0;0,0,0");
        match propagate_quiver(&g, &t.key(), &wrong) {
            Err(PropagationError::Inconsistent { cycle }) => assert!(cycle.len() >= 3),
            other => panic!("expected inconsistency, got {other:?}"),
        }
    }

    fn skew(n: usize) -> impl Strategy<Value = ExchangeMatrix> {
        proptest::collection::vec(-3i64..4, n * (n - 1) / 2).prop_map(move |upper| {
            let mut rows = vec![vec![0; n]; n];
            let mut it = upper.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    let v = it.next().expect("enough entries");
                    rows[i][j] = v;
                    rows[j][i] = -v;
                }
            }
            ExchangeMatrix::new(rows).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn matrix_mutation_involutive(b in (2usize..6).prop_flat_map(skew), k in 0usize..6) {
            let k = k % b.n();
            let once = b.mutate(k).unwrap();
            prop_assert!(ExchangeMatrix::new(once.rows().to_vec()).is_ok());
            prop_assert_eq!(once.mutate(k).unwrap(), b);
        }

        #[test]
        fn seed_mutation_involutive(b in (2usize..4).prop_flat_map(skew), k in 0usize..4) {
            let b = ExchangeMatrix::new(
                b.rows().iter().map(|r| r.iter().map(|x| (*x).clamp(-2, 2)).collect()).collect(),
            ).unwrap();
            let k = k % b.n();
            let s = Seed::initial(b).mutate(0).unwrap();
            prop_assert_eq!(s.mutate(k).unwrap().mutate(k).unwrap(), s);
        }
    }
}
