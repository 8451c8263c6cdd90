//! Tilting and cluster-tilting objects as canonical sorted sets of
//! indecomposables, over either backend, and single-summand mutation.

use std::fmt;
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coh::{Coh, SheafObject};
use crate::dynkin::{Dynkin, DynkinObject};
use crate::lattice::LElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RigidError {
    #[error("{0}")]
    InvalidObject(String),
    #[error("duplicate summand {0}")]
    Duplicate(String),
    #[error("not a tilting object: {0}")]
    NotTilting(String),
    #[error("{0} is not rigid")]
    NotRigid(String),
    #[error("summand index {index} out of range for {len} summands")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("no complement found in window {0}")]
    ComplementNotInWindow(String),
    #[error("two distinct complements {0} and {1} found")]
    DuplicateComplement(String, String),
    #[error("{0}")]
    Parse(String),
}

/// Bounds the complement search in backends with infinitely many objects.
///
/// For sheaves the window constrains line bundles by the `c`-coefficient of
/// their normal form; all rigid torsion sheaves are always candidates.
/// Dynkin backends ignore it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SearchWindow {
    /// `l` within `2 + span` of the set's extremes, doubled on failure
    /// while the padding stays at most `cap`.
    Auto { cap: i64 },
    /// `lo <= l <= hi`.
    Fixed { lo: i64, hi: i64 },
}

impl Default for SearchWindow {
    fn default() -> Self {
        SearchWindow::Auto { cap: 64 }
    }
}

impl SearchWindow {
    /// Parses `auto`, `auto:<cap>` or `<lo>:<hi>`.
    pub fn parse(s: &str) -> Result<Self, RigidError> {
        let err = || RigidError::Parse(format!("bad window {s:?}"));
        let s = s.trim();
        if s == "auto" {
            return Ok(Self::default());
        }
        if let Some(cap) = s.strip_prefix("auto:") {
            return Ok(SearchWindow::Auto { cap: cap.parse().map_err(|_| err())? });
        }
        let (lo, hi) = s.split_once(':').ok_or_else(err)?;
        let lo = lo.trim().parse().map_err(|_| err())?;
        let hi = hi.trim().parse().map_err(|_| err())?;
        if lo > hi {
            return Err(err());
        }
        Ok(SearchWindow::Fixed { lo, hi })
    }
}

/// A concrete candidate range for one complement search attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowRange {
    Full,
    Lines { lo: i64, hi: i64 },
}

impl fmt::Display for WindowRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowRange::Full => write!(f, "full universe"),
            WindowRange::Lines { lo, hi } => write!(f, "l in [{lo}, {hi}]"),
        }
    }
}

/// A hereditary or cluster category presented through its indecomposables.
pub trait Backend: Send + Sync {
    type Object: Clone + Ord + Hash + fmt::Debug + fmt::Display + Send + Sync;

    fn label(&self) -> String;

    /// Number of summands of a basic (cluster-)tilting object.
    fn tilting_size(&self) -> usize;

    /// `dim Ext^1(a, b)` in the hereditary category (or cluster category).
    fn ext1(&self, a: &Self::Object, b: &Self::Object) -> u64;

    fn validate(&self, a: &Self::Object) -> Result<(), RigidError>;

    fn parse_object(&self, s: &str) -> Result<Self::Object, RigidError>;

    fn canonical_elements(&self) -> Vec<Self::Object>;

    /// Successive candidate ranges to try for a complement of `set`.
    fn windows(&self, set: &[Self::Object], window: &SearchWindow) -> Vec<WindowRange>;

    fn candidates(&self, range: WindowRange) -> Vec<Self::Object>;

    /// Whether every almost complete tilting object has a complement among
    /// the modeled objects.
    fn complements_modeled(&self) -> bool;

    fn is_rigid(&self, a: &Self::Object) -> bool {
        self.ext1(a, a) == 0
    }

    /// `a (+) b` rigid: Ext^1 vanishes in both directions.
    fn compatible(&self, a: &Self::Object, b: &Self::Object) -> bool {
        self.ext1(a, b) == 0 && self.ext1(b, a) == 0
    }
}

impl Backend for Coh {
    type Object = SheafObject;

    fn label(&self) -> String {
        format!("coh{}", self.weight())
    }

    fn tilting_size(&self) -> usize {
        self.weight().rank_g0()
    }

    fn ext1(&self, a: &SheafObject, b: &SheafObject) -> u64 {
        self.ext1_dim_unchecked(a, b)
    }

    fn validate(&self, a: &SheafObject) -> Result<(), RigidError> {
        self.hom_dim(a, a).map(|_| ()).map_err(|e| RigidError::InvalidObject(e.to_string()))
    }

    fn parse_object(&self, s: &str) -> Result<SheafObject, RigidError> {
        Coh::parse_object(self, s).map_err(|e| RigidError::Parse(e.to_string()))
    }

    /// `O(x)` for `0 <= x <= c`.
    fn canonical_elements(&self) -> Vec<SheafObject> {
        let wt = self.weight();
        let mut out = vec![self.line_c(0), self.line_c(1)];
        for i in 1..=wt.t() {
            for j in 1..wt.weight(i) {
                let mut raw = vec![0; wt.t()];
                raw[i - 1] = j;
                out.push(SheafObject::Line(LElement::normal_form(wt, &raw, 0).expect("length")));
            }
        }
        out
    }

    fn windows(&self, set: &[SheafObject], window: &SearchWindow) -> Vec<WindowRange> {
        match *window {
            SearchWindow::Fixed { lo, hi } => vec![WindowRange::Lines { lo, hi }],
            SearchWindow::Auto { cap } => {
                let ls: Vec<i64> = set
                    .iter()
                    .filter_map(|s| match s {
                        SheafObject::Line(x) => Some(x.l()),
                        _ => None,
                    })
                    .collect();
                let (min, max) = match (ls.iter().min(), ls.iter().max()) {
                    (Some(&a), Some(&b)) => (a, b),
                    _ => (0, 0),
                };
                let mut pad = 2 + (max - min);
                let mut out = Vec::new();
                loop {
                    out.push(WindowRange::Lines { lo: min - pad, hi: max + pad });
                    if pad >= cap {
                        return out;
                    }
                    pad = (pad * 2).min(cap);
                }
            }
        }
    }

    fn candidates(&self, range: WindowRange) -> Vec<SheafObject> {
        let mut out = self.rigid_torsion();
        if let WindowRange::Lines { lo, hi } = range {
            out.extend(self.line_bundles(lo, hi));
        }
        out
    }

    fn complements_modeled(&self) -> bool {
        self.weight().t() <= 2
    }
}

impl Backend for Dynkin {
    type Object = DynkinObject;

    fn label(&self) -> String {
        format!("dynkin({})", self.quiver())
    }

    fn tilting_size(&self) -> usize {
        self.n()
    }

    fn ext1(&self, a: &DynkinObject, b: &DynkinObject) -> u64 {
        self.ext1_c_unchecked(a, b)
    }

    fn validate(&self, a: &DynkinObject) -> Result<(), RigidError> {
        self.ext1_c(a, a).map(|_| ()).map_err(|e| RigidError::InvalidObject(e.to_string()))
    }

    fn parse_object(&self, s: &str) -> Result<DynkinObject, RigidError> {
        Dynkin::parse_object(self, s).map_err(|e| RigidError::Parse(e.to_string()))
    }

    /// `P_1[1], ..., P_n[1]`.
    fn canonical_elements(&self) -> Vec<DynkinObject> {
        (0..self.n()).map(DynkinObject::ShiftedProjective).collect()
    }

    fn windows(&self, _set: &[DynkinObject], _window: &SearchWindow) -> Vec<WindowRange> {
        vec![WindowRange::Full]
    }

    fn candidates(&self, _range: WindowRange) -> Vec<DynkinObject> {
        self.indecomposables()
    }

    fn complements_modeled(&self) -> bool {
        true
    }
}

/// A basic object: sorted, duplicate-free list of indecomposable summands.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RigidSet<O> {
    elements: Vec<O>,
}

impl<O: Clone + Ord + fmt::Display> RigidSet<O> {
    pub fn new(mut elements: Vec<O>) -> Result<Self, RigidError> {
        elements.sort();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(RigidError::Duplicate(w[0].to_string()));
        }
        Ok(RigidSet { elements })
    }

    pub fn elements(&self) -> &[O] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: &O) -> bool {
        self.elements.binary_search(x).is_ok()
    }

    pub fn index_of(&self, x: &O) -> Option<usize> {
        self.elements.binary_search(x).ok()
    }

    /// Sorted element literals joined by `" | "`.
    pub fn key(&self) -> String {
        self.elements.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" | ")
    }

    /// Parses a canonical key back into a set.
    pub fn parse<B: Backend<Object = O>>(backend: &B, key: &str) -> Result<Self, RigidError> {
        let elements = key
            .split('|')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| backend.parse_object(s))
            .collect::<Result<Vec<_>, _>>()?;
        for e in &elements {
            backend.validate(e)?;
        }
        Self::new(elements)
    }

    fn replaced(&self, index: usize, with: O) -> Result<Self, RigidError> {
        let mut elements = self.elements.clone();
        elements[index] = with;
        Self::new(elements)
    }
}

impl<O: fmt::Display> fmt::Display for RigidSet<O> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

pub fn is_rigid_set<B: Backend>(backend: &B, set: &RigidSet<B::Object>) -> bool {
    let els = set.elements();
    els.iter().all(|e| backend.is_rigid(e))
        && els
            .iter()
            .enumerate()
            .all(|(i, a)| els[i + 1..].iter().all(|b| backend.compatible(a, b)))
}

/// Rigid with as many summands as the rank of the Grothendieck group.
pub fn is_tilting<B: Backend>(backend: &B, set: &RigidSet<B::Object>) -> bool {
    set.len() == backend.tilting_size() && is_rigid_set(backend, set)
}

pub fn canonical_tilting<B: Backend>(backend: &B) -> RigidSet<B::Object> {
    let set = RigidSet::new(backend.canonical_elements()).expect("canonical elements distinct");
    assert!(
        is_tilting(backend, &set),
        "canonical tilting object of {} failed verification",
        backend.label()
    );
    set
}

/// Result of exchanging one summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutation<O> {
    pub set: RigidSet<O>,
    /// the summand removed
    pub out: O,
    /// the new summand
    pub incoming: O,
    /// position of `incoming` in the new set
    pub new_index: usize,
}

/// All complements of `rest` other than `excluded` in one candidate range.
pub fn complements_in<B: Backend>(
    backend: &B,
    rest: &[B::Object],
    excluded: Option<&B::Object>,
    range: WindowRange,
) -> Vec<B::Object> {
    backend
        .candidates(range)
        .into_iter()
        .filter(|x| Some(x) != excluded && rest.binary_search(x).is_err())
        .filter(|x| backend.is_rigid(x) && rest.iter().all(|r| backend.compatible(x, r)))
        .collect()
}

/// Replaces the `index`-th summand of a tilting object by its other complement.
pub fn mutate<B: Backend>(
    backend: &B,
    set: &RigidSet<B::Object>,
    index: usize,
    window: &SearchWindow,
) -> Result<Mutation<B::Object>, RigidError> {
    if index >= set.len() {
        return Err(RigidError::IndexOutOfRange { index, len: set.len() });
    }
    if !is_tilting(backend, set) {
        return Err(RigidError::NotTilting(set.key()));
    }
    mutate_unchecked(backend, set, index, window)
}

pub(crate) fn mutate_unchecked<B: Backend>(
    backend: &B,
    set: &RigidSet<B::Object>,
    index: usize,
    window: &SearchWindow,
) -> Result<Mutation<B::Object>, RigidError> {
    let out = set.elements()[index].clone();
    let mut rest = set.elements().to_vec();
    rest.remove(index);
    let ranges = backend.windows(set.elements(), window);
    let mut last = WindowRange::Full;
    for range in ranges {
        last = range;
        let found = complements_in(backend, &rest, Some(&out), range);
        match found.as_slice() {
            [] => continue,
            [incoming] => {
                let new = set.replaced(index, incoming.clone())?;
                let new_index = new.index_of(incoming).expect("just inserted");
                return Ok(Mutation { set: new, out, incoming: incoming.clone(), new_index });
            }
            [a, b, ..] => {
                return Err(RigidError::DuplicateComplement(a.to_string(), b.to_string()));
            }
        }
    }
    Err(RigidError::ComplementNotInWindow(last.to_string()))
}

/// Greedily extends `partial` by compatible rigid objects from `universe`
/// (visited in the given order) until it has `tilting_size` summands.
/// Returns the extension if it reached that size.
pub fn complete_greedy<B: Backend>(
    backend: &B,
    partial: &[B::Object],
    universe: &[B::Object],
) -> Option<RigidSet<B::Object>> {
    let mut chosen: Vec<B::Object> = partial.to_vec();
    for x in universe {
        if chosen.len() == backend.tilting_size() {
            break;
        }
        if !chosen.contains(x)
            && backend.is_rigid(x)
            && chosen.iter().all(|c| backend.compatible(x, c))
        {
            chosen.push(x.clone());
        }
    }
    if chosen.len() != backend.tilting_size() {
        return None;
    }
    let set = RigidSet::new(chosen).ok()?;
    is_tilting(backend, &set).then_some(set)
}

/// A tilting object built by greedy completion over a shuffled universe.
pub fn random_tilting<B: Backend, R: Rng>(
    backend: &B,
    universe: &[B::Object],
    rng: &mut R,
    attempts: usize,
) -> Option<RigidSet<B::Object>> {
    let mut pool = universe.to_vec();
    for _ in 0..attempts {
        pool.shuffle(rng);
        if let Some(set) = complete_greedy(backend, &[], &pool) {
            return Some(set);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coh(ws: &str) -> Coh {
        Coh::parse_weights(ws).unwrap()
    }

    fn set<B: Backend>(b: &B, key: &str) -> RigidSet<B::Object> {
        RigidSet::parse(b, key).unwrap()
    }

    #[test]
    fn tilting_examples() {
        let k = coh("(1,1)");
        assert!(is_tilting(&k, &set(&k, "O(0) | O(c)")));
        let x = coh("(2,3)");
        let lines = set(&x, "O(0) | O(x1) | O(x2) | O(2x2) | O(c)");
        assert!(is_tilting(&x, &lines));
        let a2 = Dynkin::parse("A2").unwrap();
        assert!(!is_rigid_set(&a2, &set(&a2, "S1 | S2")));
    }

    #[test]
    fn duplicates_rejected() {
        let k = coh("(1,1)");
        assert!(matches!(RigidSet::parse(&k, "O(0) | O(0)"), Err(RigidError::Duplicate(_))));
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_tilting(&coh("(1,1)")), set(&coh("(1,1)"), "O(0) | O(c)"));
        let x = coh("(2,2,2)");
        assert_eq!(canonical_tilting(&x), set(&x, "O(0) | O(x1) | O(x2) | O(x3) | O(c)"));
        let a3 = Dynkin::parse("A3").unwrap();
        assert_eq!(canonical_tilting(&a3).key(), "P1[1] | P2[1] | P3[1]");
        for ws in ["(2,3,5)", "(2,3,7)", "(2,2,2,2)", "(3)", "(4,1)"] {
            let x = coh(ws);
            assert_eq!(canonical_tilting(&x).len(), x.weight().rank_g0());
        }
    }

    #[test]
    fn mutate_examples() {
        let k = coh("(1,1)");
        let t = set(&k, "O(0) | O(c)");
        let m = mutate(&k, &t, 0, &SearchWindow::default()).unwrap();
        assert_eq!(m.set, set(&k, "O(c) | O(2c)"));
        let back = mutate(&k, &m.set, m.new_index, &SearchWindow::default()).unwrap();
        assert_eq!(back.set, t);

        let a2 = Dynkin::parse("A2").unwrap();
        let t = canonical_tilting(&a2);
        let m = mutate(&a2, &t, 1, &SearchWindow::default()).unwrap();
        assert_eq!(m.set, set(&a2, "P1[1] | M(0,1)"));
    }

    #[test]
    fn mutate_errors() {
        let k = coh("(1,1)");
        let t = set(&k, "O(0) | O(c)");
        assert!(matches!(
            mutate(&k, &t, 2, &SearchWindow::default()),
            Err(RigidError::IndexOutOfRange { .. })
        ));
        let partial = set(&k, "O(0)");
        assert!(matches!(
            mutate(&k, &partial, 0, &SearchWindow::default()),
            Err(RigidError::NotTilting(_))
        ));
        // the complement O(2c) lies above the window
        assert!(matches!(
            mutate(&k, &t, 0, &SearchWindow::Fixed { lo: -3, hi: 1 }),
            Err(RigidError::ComplementNotInWindow(_))
        ));
    }

    #[test]
    fn auto_window_widens_geometrically() {
        let x = coh("(2,3)");
        let t = canonical_tilting(&x);
        let ranges = x.windows(t.elements(), &SearchWindow::Auto { cap: 12 });
        assert_eq!(
            ranges,
            vec![
                WindowRange::Lines { lo: -3, hi: 4 },
                WindowRange::Lines { lo: -6, hi: 7 },
                WindowRange::Lines { lo: -12, hi: 13 },
            ]
        );
    }

    #[test]
    fn window_parse() {
        assert_eq!(SearchWindow::parse("auto").unwrap(), SearchWindow::default());
        assert_eq!(SearchWindow::parse("auto:8").unwrap(), SearchWindow::Auto { cap: 8 });
        assert_eq!(SearchWindow::parse("-6:6").unwrap(), SearchWindow::Fixed { lo: -6, hi: 6 });
        assert!(SearchWindow::parse("6:-6").is_err());
    }

    #[test]
    fn keys_are_injective() {
        let a3 = Dynkin::parse("A3").unwrap();
        let objs = a3.indecomposables();
        let mut keys = std::collections::BTreeMap::new();
        for (i, a) in objs.iter().enumerate() {
            for b in &objs[i + 1..] {
                let s = RigidSet::new(vec![a.clone(), b.clone()]).unwrap();
                let parsed = RigidSet::parse(&a3, &s.key()).unwrap();
                assert_eq!(parsed, s);
                assert!(keys.insert(s.key(), s).is_none());
            }
        }
    }

    #[test]
    fn dynkin_complements_unique_everywhere() {
        let d4 = Dynkin::parse("D4").unwrap();
        let objs = d4.indecomposables();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let t = random_tilting(&d4, &objs, &mut rng, 50).unwrap();
            for k in 0..t.len() {
                let mut rest = t.elements().to_vec();
                let out = rest.remove(k);
                let others = complements_in(&d4, &rest, Some(&out), WindowRange::Full);
                assert_eq!(others.len(), 1, "{t} at {k}");
            }
        }
    }

    #[test]
    fn coh_pq_mutation_is_involutive() {
        let x = coh("(2,3)");
        let mut universe = x.line_bundles(-4, 4);
        universe.extend(x.rigid_torsion());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let t = random_tilting(&x, &universe, &mut rng, 100).unwrap();
            for k in 0..t.len() {
                let m = mutate(&x, &t, k, &SearchWindow::default()).unwrap();
                let back = mutate(&x, &m.set, m.new_index, &SearchWindow::default()).unwrap();
                assert_eq!(back.set, t);
                assert_eq!(back.incoming, m.out);
            }
        }
    }

    #[test]
    fn greedy_completion_extends_partial() {
        let x = coh("(2,3)");
        let s = x.simple(2, 1).unwrap();
        let mut universe = x.line_bundles(-3, 3);
        universe.extend(x.rigid_torsion());
        let t = complete_greedy(&x, std::slice::from_ref(&s), &universe).unwrap();
        assert!(t.contains(&s));
        assert!(is_tilting(&x, &t));
    }
}
