//! Named verification suites, each a batch of exact checks with a report.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coh::{Coh, SheafObject, TubeId};
use crate::dynkin::{AcyclicQuiver, Dynkin};
use crate::graph::{self, ExploreLimits, GraphError};
use crate::lattice::{parse_weights, LElement};
use crate::oracle::{self, CyclicRep};
use crate::reach::{Reach, DEFAULT_REACH_BUDGET};
use crate::rigid::{self, Backend, RigidSet, SearchWindow, WindowRange};
use crate::seeds::{self, CanonicalMatrix, ExchangeMatrix, Seed};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Weight types exercised by the lattice and sheaf suites.
pub const WEIGHT_TYPES: [&str; 7] =
    ["(1,1)", "(2,3)", "(2,2,2)", "(2,3,5)", "(2,3,6)", "(2,3,7)", "(2,2,2,2)"];

/// Node expansions allowed per path search in the connectivity suites.
pub const PATH_BUDGET: usize = 50_000;

pub const SUITES: [&str; 14] = [
    "lattice",
    "graded-dim",
    "tube-oracle",
    "simple-ext",
    "rigidity",
    "canonical-tilting",
    "dynkin-counts",
    "seed-bijection",
    "quiver-propagation",
    "iy-restriction",
    "connectivity-(1,1)",
    "connectivity-(2,3)",
    "reachability",
    "mutation",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown suite {name:?}; available: {list}", name = .0, list = SUITES.join(", "))]
pub struct UnknownSuite(pub String);

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub items: Vec<CheckItem>,
    #[serde(rename = "elapsed_ms")]
    #[serde(serialize_with = "as_millis")]
    pub elapsed: Duration,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u128(d.as_millis())
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.items.is_empty() && self.items.iter().all(|i| i.passed)
    }

    /// Failing item labels, or the item count when all pass.
    pub fn summary(&self) -> String {
        let failed: Vec<&str> =
            self.items.iter().filter(|i| !i.passed).map(|i| i.label.as_str()).collect();
        if failed.is_empty() {
            format!("{} checks", self.items.len())
        } else {
            format!("failed: {}", failed.join(", "))
        }
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            let mark = if item.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{mark} {}: {}", item.label, item.detail)?;
        }
        write!(
            f,
            "suite {} {} ({} ms)",
            self.suite,
            if self.passed() { "passed" } else { "FAILED" },
            self.elapsed.as_millis()
        )
    }
}

struct Items(Vec<CheckItem>);

impl Items {
    fn check(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(CheckItem { label: label.into(), passed, detail: detail.into() });
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport, UnknownSuite> {
    let start = Instant::now();
    let mut items = Items(Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match name {
        "lattice" => lattice(&mut items, &mut rng),
        "graded-dim" => graded_dim(&mut items),
        "tube-oracle" => tube_oracle(&mut items),
        "simple-ext" => simple_ext(&mut items),
        "rigidity" => rigidity(&mut items),
        "canonical-tilting" => canonical(&mut items),
        "dynkin-counts" => dynkin_counts(&mut items),
        "seed-bijection" => seed_bijection(&mut items),
        "quiver-propagation" => quiver_propagation(&mut items),
        "iy-restriction" => iy_restriction(&mut items),
        "connectivity-(1,1)" => connectivity(&mut items, &mut rng, "(1,1)"),
        "connectivity-(2,3)" => connectivity(&mut items, &mut rng, "(2,3)"),
        "reachability" => reachability(&mut items, &mut rng),
        "mutation" => mutation(&mut items, &mut rng),
        _ => return Err(UnknownSuite(name.to_string())),
    }
    Ok(SuiteReport { suite: name.to_string(), seed, items: items.0, elapsed: start.elapsed() })
}

fn coh(ws: &str) -> Coh {
    Coh::parse_weights(ws).expect("listed weight type")
}

fn lattice(items: &mut Items, rng: &mut ChaCha8Rng) {
    for ws in WEIGHT_TYPES {
        let wt = parse_weights(ws).expect("listed weight type");
        let bound = &LElement::canonical(&wt) + &LElement::omega(&wt);
        let mut bad = 0;
        for _ in 0..1000 {
            let li: Vec<i64> = wt.weights().iter().map(|&p| rng.gen_range(0..p)).collect();
            let x = LElement::normal_form(&wt, &li, rng.gen_range(-10..=10)).expect("length");
            let effective = x.is_effective();
            let below = x.leq(&bound).expect("same weights");
            if effective == below {
                bad += 1;
            }
        }
        items.check(format!("trichotomy {ws}"), bad == 0, format!("1000 elements, {bad} violations"));
    }
}

fn graded_dim(items: &mut Items) {
    for ws in WEIGHT_TYPES {
        let wt = parse_weights(ws).expect("listed weight type");
        let grid = oracle::lattice_grid(&wt, 6);
        let bad: Vec<String> = grid
            .iter()
            .filter(|x| x.graded_dim() != oracle::graded_dim_oracle(x))
            .map(|x| x.to_string())
            .collect();
        items.check(
            format!("graded dim {ws}"),
            bad.is_empty(),
            format!("{} elements with |l| <= 6, mismatches {:?}", grid.len(), bad),
        );
    }
}

fn tube_oracle(items: &mut Items) {
    for d in 2..=5i64 {
        let x = coh(&format!("({d},2)"));
        let tube = TubeId::Exceptional(1);
        let mut cases = 0;
        let mut bad = 0;
        for a in 1..=2 * d {
            for b in 1..=2 * d {
                for ja in 0..d {
                    for jb in 0..d {
                        let m = x.torsion(tube, ja, a as u32).expect("valid");
                        let n = x.torsion(tube, jb, b as u32).expect("valid");
                        let rule = x.hom_dim(&m, &n).expect("valid");
                        let matrix = oracle::cyclic_hom_dim(
                            &CyclicRep::uniserial(d as usize, ja as usize, a as usize),
                            &CyclicRep::uniserial(d as usize, jb as usize, b as usize),
                        );
                        cases += 1;
                        if rule != matrix as u64 {
                            bad += 1;
                        }
                    }
                }
            }
        }
        items.check(format!("tube rank {d}"), bad == 0, format!("{cases} pairs, {bad} mismatches"));
    }
}

fn simple_ext(items: &mut Items) {
    for ws in WEIGHT_TYPES {
        let x = coh(ws);
        let mut bad = 0;
        let mut cases = 0;
        for i in 1..=x.weight().t() {
            let p = x.weight().weight(i);
            for j in 0..p {
                for jp in 0..p {
                    let e = x
                        .ext1_dim(&x.simple(i, j).expect("valid"), &x.simple(i, jp).expect("valid"))
                        .expect("valid");
                    let expected = u64::from((j - jp).rem_euclid(p) == 1 % p);
                    cases += 1;
                    if e != expected {
                        bad += 1;
                    }
                }
            }
        }
        let s = x.torsion(TubeId::Homogeneous, 0, 1).expect("valid");
        let hom_self = x.ext1_dim(&s, &s).expect("valid");
        items.check(
            format!("simple extensions {ws}"),
            bad == 0 && hom_self == 1,
            format!("{cases} exceptional pairs, {bad} mismatches; homogeneous self-extension {hom_self}"),
        );
    }
}

fn rigidity(items: &mut Items) {
    for ws in WEIGHT_TYPES {
        let x = coh(ws);
        let mut bad = 0;
        let mut cases = 0;
        for i in 1..=x.weight().t() {
            let d = x.weight().weight(i);
            for socle in 0..d {
                for len in 1..=2 * d {
                    let t = x.torsion(TubeId::Exceptional(i), socle, len as u32).expect("valid");
                    cases += 1;
                    if x.is_rigid(&t) != (len < d) {
                        bad += 1;
                    }
                }
            }
        }
        for len in 1..=4 {
            cases += 1;
            if x.is_rigid(&x.torsion(TubeId::Homogeneous, 0, len).expect("valid")) {
                bad += 1;
            }
        }
        items.check(format!("rigid iff short {ws}"), bad == 0, format!("{cases} torsion sheaves, {bad} mismatches"));
    }
}

fn canonical(items: &mut Items) {
    for ws in WEIGHT_TYPES {
        let x = coh(ws);
        let set = RigidSet::new(x.canonical_elements()).expect("distinct");
        let ok = rigid::is_tilting(&x, &set) && set.len() == x.weight().rank_g0();
        items.check(
            format!("canonical tilting {ws}"),
            ok,
            format!("{} summands, rank G0 = {}", set.len(), x.weight().rank_g0()),
        );
    }
}

fn full_graph(d: &Dynkin) -> graph::ExchangeGraph<crate::dynkin::DynkinObject> {
    graph::explore(d, &rigid::canonical_tilting(d), ExploreLimits::default(), &SearchWindow::default())
        .expect("canonical object is cluster-tilting")
}

fn dynkin_counts(items: &mut Items) {
    for (name, expected) in [("A2", 5), ("A3", 14), ("D4", 50)] {
        let base = AcyclicQuiver::parse(name).expect("preset");
        let mut counts = BTreeSet::new();
        let mut all_ok = true;
        let orientations = base.all_orientations();
        for q in &orientations {
            let d = Dynkin::new(q.clone()).expect("Dynkin");
            let g = full_graph(&d);
            let regular = g.nodes().keys().all(|k| g.degree(k) == d.n());
            all_ok &= regular && g.is_connected() && g.frontier().is_empty() && g.edges_sound();
            counts.insert(g.node_count());
        }
        let ok = all_ok && counts.len() == 1 && counts.contains(&expected);
        items.check(
            format!("{name} cluster-tilting objects"),
            ok,
            format!("{} orientations, node counts {:?}, expected {expected}", orientations.len(), counts),
        );
    }
}

fn seed_bijection(items: &mut Items) {
    for (name, nodes) in [("A2", 5), ("A3", 14), ("D4", 50)] {
        let d = Dynkin::parse(name).expect("preset");
        let g = match seeds::seed_explore(&Seed::initial(d.canonical_matrix()), None) {
            Ok(g) => g,
            Err(e) => {
                items.check(format!("{name} seeds"), false, e.to_string());
                continue;
            }
        };
        let vars = g.cluster_variables();
        let positive = vars.iter().all(|v| v.has_nonnegative_coefficients());
        let indec = d.indecomposables().len();
        let tilting = full_graph(&d).node_count();
        items.check(
            format!("{name} variables vs indecomposables"),
            vars.len() == indec && positive,
            format!("{} cluster variables, {indec} indecomposables, positive coefficients {positive}", vars.len()),
        );
        items.check(
            format!("{name} seeds vs cluster-tilting objects"),
            g.nodes.len() == nodes && g.nodes.len() == tilting && g.edges.len() == full_graph(&d).edge_count(),
            format!("{} seeds, {} edges, {tilting} cluster-tilting objects", g.nodes.len(), g.edges.len()),
        );
    }
}

fn quiver_propagation(items: &mut Items) {
    let d = Dynkin::parse("A3").expect("preset");
    let g = full_graph(&d);
    let root = rigid::canonical_tilting(&d).key();
    let result = seeds::propagate_quiver(&g, &root, &d.canonical_matrix());
    items.check(
        "A3 propagation",
        matches!(&result, Ok(m) if m.len() == g.node_count()),
        format!(
            "{} nodes, {} edges, {} independent cycles: {}",
            g.node_count(),
            g.edge_count(),
            g.cycle_rank(),
            match &result {
                Ok(_) => "consistent".to_string(),
                Err(e) => e.to_string(),
            }
        ),
    );
    let wrong = ExchangeMatrix::new(vec![vec![0, 1, 0], vec![-1, 0, 0], vec![0, 0, 0]]).expect("skew");
    let detected = matches!(
        seeds::propagate_quiver(&g, &root, &wrong),
        Err(seeds::PropagationError::Inconsistent { .. })
    );
    items.check("A3 wrong root matrix detected", detected, "root matrix missing one arrow");
}

fn iy_restriction(items: &mut Items) {
    let d = Dynkin::parse("A3").expect("preset");
    let g = full_graph(&d);
    let objs = d.indecomposables();
    // independent count: all rigid 3-subsets of indecomposables
    let mut tilting_sets = Vec::new();
    for a in 0..objs.len() {
        for b in a + 1..objs.len() {
            for c in b + 1..objs.len() {
                let s = RigidSet::new(vec![objs[a].clone(), objs[b].clone(), objs[c].clone()])
                    .expect("distinct");
                if rigid::is_tilting(&d, &s) {
                    tilting_sets.push(s);
                }
            }
        }
    }
    for pin in &objs {
        let r = g.restrict(&d, pin).expect("indecomposables are rigid");
        let expected = tilting_sets.iter().filter(|s| s.contains(pin)).count();
        let two_regular = r.interior().all(|k| r.degree(k) == 2);
        items.check(
            format!("pinned {pin}"),
            r.is_connected() && two_regular && r.node_count() == expected,
            format!("{} nodes ({expected} sets contain it), connected {}, 2-regular {two_regular}", r.node_count(), r.is_connected()),
        );
    }
}

fn coh_universe(x: &Coh, lo: i64, hi: i64) -> Vec<SheafObject> {
    let mut u = x.line_bundles(lo, hi);
    u.extend(x.rigid_torsion());
    u
}

fn connectivity(items: &mut Items, rng: &mut ChaCha8Rng, ws: &str) {
    let x = coh(ws);
    let canonical = rigid::canonical_tilting(&x);
    let universe = coh_universe(&x, -6, 6);
    let window = SearchWindow::default();
    let mut found = 0;
    let mut replayed = 0;
    let mut longest = 0;
    let mut failures = Vec::new();
    for n in 0..50 {
        let Some(t) = rigid::random_tilting(&x, &universe, rng, 1000) else {
            failures.push(format!("#{n}: no random tilting object"));
            continue;
        };
        match graph::find_path(&x, &t, &canonical, &window, PATH_BUDGET) {
            Ok(path) => {
                found += 1;
                longest = longest.max(path.len());
                match graph::replay(&x, &t, &path, &window) {
                    Ok(end) if end == canonical => replayed += 1,
                    Ok(end) => failures.push(format!("#{n}: replay ended at {end}")),
                    Err(e) => failures.push(format!("#{n}: {e}")),
                }
            }
            Err(e) => failures.push(format!("#{n} {t}: {e}")),
        }
    }
    items.check(
        format!("paths to canonical {ws}"),
        found == 50,
        format!("{found}/50 paths found, longest {longest}; {}", failures.join("; ")),
    );
    items.check(format!("paths replay {ws}"), replayed == 50, format!("{replayed}/50 replayed"));
}

fn verify_reach<B: Reach>(b: &B, m: &B::Object, n: &B::Object) -> Result<usize, String> {
    let cert = b.reach(m, n, &SearchWindow::default(), DEFAULT_REACH_BUDGET).map_err(|e: GraphError| e.to_string())?;
    let edges_ok = cert.edge_ext1(b).iter().all(|&e| e == (0, 0));
    if cert.first() == m && cert.last() == n && edges_ok && cert.verify(b) {
        Ok(cert.chain.len())
    } else {
        Err(format!("certificate {m} ~> {n} failed re-verification"))
    }
}

fn reachability(items: &mut Items, rng: &mut ChaCha8Rng) {
    for ws in ["(2,2,2)", "(2,3,6)"] {
        let x = coh(ws);
        let fragment: Vec<SheafObject> =
            coh_universe(&x, -4, 4).into_iter().filter(|o| x.is_rigid(o)).collect();
        let o = x.line_c(0);
        let sample: Vec<_> = fragment.choose_multiple(rng, 20).cloned().collect();
        let mut longest = 0;
        let mut failures = Vec::new();
        for e in &sample {
            match verify_reach(&x, e, &o) {
                Ok(len) => longest = longest.max(len),
                Err(msg) => failures.push(msg),
            }
        }
        items.check(
            format!("reach O from {ws} fragment"),
            failures.is_empty() && sample.len() == 20,
            format!("{} objects, longest chain {longest}; {}", sample.len(), failures.join("; ")),
        );
    }
    for name in ["A2", "A3"] {
        let d = Dynkin::parse(name).expect("preset");
        let objs = d.indecomposables();
        let mut failures = Vec::new();
        for m in &objs {
            for n in &objs {
                if let Err(msg) = verify_reach(&d, m, n) {
                    failures.push(msg);
                }
            }
        }
        items.check(
            format!("{name} mutual reachability"),
            failures.is_empty(),
            format!("{} ordered pairs; {}", objs.len() * objs.len(), failures.join("; ")),
        );
    }
}

fn check_mutations<B: Backend>(
    backend: &B,
    sets: &[RigidSet<B::Object>],
    rng: &mut ChaCha8Rng,
    widest: WindowRange,
) -> (usize, Vec<String>) {
    let window = SearchWindow::default();
    let mut failures = Vec::new();
    let mut done = 0;
    for _ in 0..100 {
        let t = sets.choose(rng).expect("nonempty");
        let k = rng.gen_range(0..t.len());
        done += 1;
        let m = match rigid::mutate(backend, t, k, &window) {
            Ok(m) => m,
            Err(e) => {
                failures.push(format!("{t} at {k}: {e}"));
                continue;
            }
        };
        match rigid::mutate(backend, &m.set, m.new_index, &window) {
            Ok(back) if back.set == *t && back.incoming == m.out => {}
            Ok(back) => failures.push(format!("{t} at {k}: came back to {}", back.set)),
            Err(e) => failures.push(format!("{t} at {k}: {e}")),
        }
        let mut rest = t.elements().to_vec();
        rest.remove(k);
        let all: BTreeSet<_> = rigid::complements_in(backend, &rest, None, widest).into_iter().collect();
        let expected: BTreeSet<_> = [m.out.clone(), m.incoming.clone()].into_iter().collect();
        if all != expected {
            failures.push(format!("{t} at {k}: {} complements", all.len()));
        }
    }
    (done, failures)
}

fn mutation(items: &mut Items, rng: &mut ChaCha8Rng) {
    for ws in ["(1,1)", "(2,3)"] {
        let x = coh(ws);
        let universe = coh_universe(&x, -4, 4);
        let sets: Vec<_> = (0..30).filter_map(|_| rigid::random_tilting(&x, &universe, rng, 1000)).collect();
        let widest = *x
            .windows(&[], &SearchWindow::Fixed { lo: -40, hi: 40 })
            .last()
            .expect("one range");
        let (done, failures) = check_mutations(&x, &sets, rng, widest);
        items.check(
            format!("coh{ws} involution and two complements"),
            failures.is_empty() && done == 100,
            format!("{done} (set, index) pairs, complements in l in [-40, 40]; {}", failures.join("; ")),
        );
    }
    for name in ["A3", "D4"] {
        let d = Dynkin::parse(name).expect("preset");
        let sets: Vec<_> = full_graph(&d).nodes().values().cloned().collect();
        let (done, failures) = check_mutations(&d, &sets, rng, WindowRange::Full);
        items.check(
            format!("{name} involution and two complements"),
            failures.is_empty() && done == 100,
            format!("{done} (set, index) pairs; {}", failures.join("; ")),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", DEFAULT_SEED).is_err());
    }

    #[test]
    fn quick_suites_pass() {
        for name in ["lattice", "simple-ext", "rigidity", "canonical-tilting", "iy-restriction"] {
            let r = run_suite(name, DEFAULT_SEED).unwrap();
            assert!(r.passed(), "{r}");
        }
    }
}
