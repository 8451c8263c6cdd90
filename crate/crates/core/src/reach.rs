//! Reachability certificates: chains of exceptional objects in which
//! consecutive members have rigid direct sum.

use std::collections::{HashMap, VecDeque};

use crate::coh::{Coh, SheafObject, TubeId};
use crate::dynkin::{Dynkin, DynkinObject};
use crate::graph::GraphError;
use crate::lattice::LElement;
use crate::rigid::{Backend, SearchWindow, WindowRange};

/// Default number of vertex expansions for compatibility-graph search.
pub const DEFAULT_REACH_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachCertificate<O> {
    pub chain: Vec<O>,
}

impl<O: Clone + PartialEq> ReachCertificate<O> {
    /// Every member rigid, every consecutive pair compatible.
    pub fn verify<B: Backend<Object = O>>(&self, backend: &B) -> bool {
        !self.chain.is_empty()
            && self.chain.iter().all(|x| backend.validate(x).is_ok() && backend.is_rigid(x))
            && self.chain.windows(2).all(|w| backend.compatible(&w[0], &w[1]))
    }

    /// `(dim Ext^1(a, b), dim Ext^1(b, a))` for each consecutive pair.
    pub fn edge_ext1<B: Backend<Object = O>>(&self, backend: &B) -> Vec<(u64, u64)> {
        self.chain.windows(2).map(|w| (backend.ext1(&w[0], &w[1]), backend.ext1(&w[1], &w[0]))).collect()
    }

    pub fn first(&self) -> &O {
        &self.chain[0]
    }

    pub fn last(&self) -> &O {
        self.chain.last().expect("nonempty chain")
    }
}

/// Backends able to produce reachability certificates.
pub trait Reach: Backend {
    fn reach(
        &self,
        m: &Self::Object,
        n: &Self::Object,
        window: &SearchWindow,
        budget: usize,
    ) -> Result<ReachCertificate<Self::Object>, GraphError>;
}

fn check_exceptional<B: Backend>(backend: &B, x: &B::Object) -> Result<(), GraphError> {
    backend.validate(x)?;
    if !backend.is_rigid(x) {
        return Err(GraphError::NotRigid(x.to_string()));
    }
    Ok(())
}

/// Drops closed loops so that no object occurs twice.
fn shortcut<O: Clone + PartialEq>(chain: Vec<O>) -> Vec<O> {
    let mut out: Vec<O> = Vec::new();
    for x in chain {
        if let Some(pos) = out.iter().position(|y| *y == x) {
            out.truncate(pos);
        }
        out.push(x);
    }
    out
}

/// Breadth-first search in the compatibility graph on `universe`.
pub fn compatibility_bfs<B: Backend>(
    backend: &B,
    m: &B::Object,
    n: &B::Object,
    universe: &[B::Object],
    budget: usize,
) -> Result<ReachCertificate<B::Object>, GraphError> {
    if m == n {
        return Ok(ReachCertificate { chain: vec![m.clone()] });
    }
    let mut vertices: Vec<B::Object> =
        universe.iter().filter(|x| backend.is_rigid(x)).cloned().collect();
    for x in [m, n] {
        if !vertices.contains(x) {
            vertices.push(x.clone());
        }
    }
    let index: HashMap<&B::Object, usize> = vertices.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let (start, goal) = (index[m], index[n]);
    let mut parent: Vec<Option<usize>> = vec![None; vertices.len()];
    let mut seen = vec![false; vertices.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut expanded = 0;
    while let Some(u) = queue.pop_front() {
        if expanded == budget {
            return Err(GraphError::NotFoundWithinBudget { expanded });
        }
        expanded += 1;
        for v in 0..vertices.len() {
            if seen[v] || !backend.compatible(&vertices[u], &vertices[v]) {
                continue;
            }
            seen[v] = true;
            parent[v] = Some(u);
            if v == goal {
                let mut chain = vec![vertices[v].clone()];
                let mut cur = v;
                while let Some(p) = parent[cur] {
                    chain.push(vertices[p].clone());
                    cur = p;
                }
                chain.reverse();
                return Ok(ReachCertificate { chain });
            }
            queue.push_back(v);
        }
    }
    Err(GraphError::NotFoundWithinBudget { expanded })
}

impl Coh {
    /// A chain from an exceptional line bundle or torsion sheaf down to `O`.
    ///
    /// Line bundles `O(sum l_i x_i + l c)` first move by `c` to `l = 0`,
    /// then drop one `x_i`-component at a time. A rigid torsion sheaf passes
    /// through its simple socle, then to a line bundle `O(k w)` compatible
    /// with it.
    pub fn chain_to_structure_sheaf(&self, x: &SheafObject) -> Option<Vec<SheafObject>> {
        match x {
            SheafObject::Line(y) => Some(self.line_chain(y)),
            SheafObject::Torsion { tube: TubeId::Homogeneous, .. } => None,
            SheafObject::Torsion { tube: TubeId::Exceptional(i), socle, length } => {
                let simple = self.simple(*i, *socle).ok()?;
                let mut chain = vec![x.clone()];
                if *length > 1 {
                    chain.push(simple.clone());
                }
                let p = self.weight().weight(*i);
                let bridge = (0..p)
                    .map(|k| LElement::omega(self.weight()).scalar_mul(k))
                    .find(|y| self.compatible(&simple, &self.line(y.clone())))?;
                chain.extend(self.line_chain(&bridge));
                Some(chain)
            }
        }
    }

    fn line_chain(&self, y: &LElement) -> Vec<SheafObject> {
        let wt = self.weight();
        let c = LElement::canonical(wt);
        let mut cur = y.clone();
        let mut chain = vec![self.line(cur.clone())];
        while cur.l() != 0 {
            cur = if cur.l() > 0 { &cur - &c } else { &cur + &c };
            chain.push(self.line(cur.clone()));
        }
        for i in 0..wt.t() {
            if cur.li()[i] != 0 {
                let strip = LElement::x(wt, i + 1).scalar_mul(cur.li()[i]);
                cur = &cur - &strip;
                chain.push(self.line(cur.clone()));
            }
        }
        chain
    }

    /// Rigid torsion plus line bundles with `c`-coefficient in the window.
    fn reach_universe(&self, m: &SheafObject, n: &SheafObject, window: &SearchWindow) -> Vec<SheafObject> {
        let range = self.windows(&[m.clone(), n.clone()], window).pop().unwrap_or(WindowRange::Full);
        self.candidates(range)
    }
}

impl Reach for Coh {
    fn reach(
        &self,
        m: &SheafObject,
        n: &SheafObject,
        window: &SearchWindow,
        budget: usize,
    ) -> Result<ReachCertificate<SheafObject>, GraphError> {
        check_exceptional(self, m)?;
        check_exceptional(self, n)?;
        if let (Some(a), Some(b)) = (self.chain_to_structure_sheaf(m), self.chain_to_structure_sheaf(n)) {
            let mut chain = a;
            chain.extend(b.into_iter().rev().skip(1));
            let cert = ReachCertificate { chain: shortcut(chain) };
            if cert.verify(self) {
                return Ok(cert);
            }
        }
        let universe = self.reach_universe(m, n, window);
        compatibility_bfs(self, m, n, &universe, budget)
    }
}

impl Reach for Dynkin {
    fn reach(
        &self,
        m: &DynkinObject,
        n: &DynkinObject,
        _window: &SearchWindow,
        budget: usize,
    ) -> Result<ReachCertificate<DynkinObject>, GraphError> {
        check_exceptional(self, m)?;
        check_exceptional(self, n)?;
        compatibility_bfs(self, m, n, &self.indecomposables(), budget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coh(ws: &str) -> Coh {
        Coh::parse_weights(ws).unwrap()
    }

    fn reach<B: Reach>(b: &B, m: &str, n: &str) -> Result<ReachCertificate<B::Object>, GraphError> {
        b.reach(
            &b.parse_object(m).unwrap(),
            &b.parse_object(n).unwrap(),
            &SearchWindow::default(),
            DEFAULT_REACH_BUDGET,
        )
    }

    #[test]
    fn direct_edges() {
        let k = coh("(1,1)");
        let cert = reach(&k, "O(c)", "O(0)").unwrap();
        assert_eq!(cert.chain.len(), 2);
        assert_eq!(cert.edge_ext1(&k), vec![(0, 0)]);

        let x = coh("(2,2,2)");
        for i in 1..=3 {
            let s = x.simple(i, 1).unwrap();
            let cert = x
                .reach(&s, &x.line_c(0), &SearchWindow::default(), DEFAULT_REACH_BUDGET)
                .unwrap();
            assert!(cert.verify(&x));
            assert!(x.compatible(&s, &x.line_c(0)));
        }
    }

    #[test]
    fn a2_simples() {
        let a2 = Dynkin::parse("A2").unwrap();
        let cert = reach(&a2, "S1", "S2").unwrap();
        assert!(cert.verify(&a2));
        assert_eq!(cert.chain.len(), 3);
        assert!(cert.edge_ext1(&a2).iter().all(|&e| e == (0, 0)));
    }

    #[test]
    fn a1_is_not_reachable() {
        let a1 = Dynkin::parse("A1").unwrap();
        assert!(matches!(reach(&a1, "S1", "P1[1]"), Err(GraphError::NotFoundWithinBudget { .. })));
        assert_eq!(reach(&a1, "S1", "S1").unwrap().chain.len(), 1);
    }

    #[test]
    fn non_rigid_endpoints_rejected() {
        let x = coh("(2,3)");
        assert!(matches!(reach(&x, "T(hom; 0; 1)", "O(0)"), Err(GraphError::NotRigid(_))));
        assert!(matches!(reach(&x, "T(1; 0; 2)", "O(0)"), Err(GraphError::NotRigid(_))));
    }

    #[test]
    fn line_steps_strip_one_component() {
        let x = coh("(2,3)");
        let y = LElement::parse(x.weight(), "x1+x2").unwrap();
        // O(x1+x2) (+) O is not rigid, so the chain has an intermediate stop
        assert!(!x.compatible(&x.line(y.clone()), &x.line_c(0)));
        let chain = x.chain_to_structure_sheaf(&x.line(y)).unwrap();
        assert_eq!(chain.len(), 3);
        assert!(ReachCertificate { chain }.verify(&x));
    }

    #[test]
    fn constructive_chains_verify() {
        for ws in ["(2,2,2)", "(2,3,6)", "(2,3)", "(3)", "(2,2,2,2)", "(2,3,7)"] {
            let x = coh(ws);
            let mut objs = x.rigid_torsion();
            objs.extend(x.line_bundles(-4, 4));
            for o in objs {
                let chain = x.chain_to_structure_sheaf(&o).unwrap();
                let cert = ReachCertificate { chain };
                assert!(cert.verify(&x), "{ws}: {o}");
                assert_eq!(cert.last(), &x.line_c(0));
            }
        }
    }

    #[test]
    fn shortcut_removes_loops() {
        assert_eq!(shortcut(vec![1, 2, 3, 2, 4]), vec![1, 2, 4]);
        assert_eq!(shortcut(vec![1, 2, 1]), vec![1]);
    }
}
