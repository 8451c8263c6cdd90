//! Cluster categories of Dynkin quivers, modeled through positive roots.
//!
//! Indecomposables of the cluster category are the indecomposable modules
//! (one per positive root, by Gabriel's theorem) together with the shifted
//! projectives `P_i[1]`. All Hom and Ext dimensions come from the Euler form
//! and the directedness of the module category.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynkinError {
    #[error("cannot parse quiver {0:?}")]
    ParseQuiver(String),
    #[error("cannot parse object {0:?}")]
    ParseObject(String),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("quiver has an oriented cycle")]
    Cyclic,
    #[error("quiver is not of Dynkin type (Tits form not positive definite)")]
    NotDynkin,
    #[error("expected vectors of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{0:?} is not a positive root")]
    NotARoot(Vec<i64>),
    #[error("directedness violated between roots {0:?} and {1:?}")]
    NotDirected(Vec<i64>, Vec<i64>),
    #[error("root search is not stable under enlarging the coefficient bound")]
    UnstableRootBound,
    #[error("{0} is not a module")]
    NotAModule(String),
}

/// A finite quiver without oriented cycles. Vertices are `0..n` internally
/// and `1..=n` in text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AcyclicQuiver {
    n: usize,
    arrows: Vec<(usize, usize)>,
}

impl AcyclicQuiver {
    pub fn new(n: usize, arrows: Vec<(usize, usize)>) -> Result<Self, DynkinError> {
        for &(i, j) in &arrows {
            if i >= n || j >= n {
                return Err(DynkinError::VertexOutOfRange(i.max(j) + 1));
            }
            if i == j {
                return Err(DynkinError::Loop(i + 1));
            }
        }
        // Kahn's algorithm
        let mut indeg = vec![0usize; n];
        for &(_, j) in &arrows {
            indeg[j] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &(i, j) in &arrows {
                if i == v {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        stack.push(j);
                    }
                }
            }
        }
        if seen != n {
            return Err(DynkinError::Cyclic);
        }
        Ok(AcyclicQuiver { n, arrows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    /// Parses `"n; i->j; i->j; ..."` or a preset `A<n>`, `D<n>`, `E6`..`E8`,
    /// optionally followed by `/` and one bit per edge reversing it.
    pub fn parse(s: &str) -> Result<Self, DynkinError> {
        let err = || DynkinError::ParseQuiver(s.to_string());
        let text = s.trim();
        if text.contains(';') || text.chars().all(|c| c.is_ascii_digit()) {
            let mut parts = text.split(';').map(str::trim).filter(|p| !p.is_empty());
            let n: usize = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
            let arrows = parts
                .map(|p| {
                    let (a, b) = p.split_once("->").ok_or_else(err)?;
                    let a: usize = a.trim().parse().map_err(|_| err())?;
                    let b: usize = b.trim().parse().map_err(|_| err())?;
                    if a == 0 || b == 0 {
                        return Err(DynkinError::VertexOutOfRange(0));
                    }
                    Ok((a - 1, b - 1))
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Self::new(n, arrows);
        }
        let (name, bits) = match text.split_once('/') {
            Some((name, bits)) => (name, Some(bits)),
            None => (text, None),
        };
        let mut edges = preset_edges(name).ok_or_else(err)?;
        if let Some(bits) = bits {
            if bits.len() != edges.1.len() || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(err());
            }
            for (edge, bit) in edges.1.iter_mut().zip(bits.chars()) {
                if bit == '1' {
                    *edge = (edge.1, edge.0);
                }
            }
        }
        Self::new(edges.0, edges.1)
    }

    /// Every orientation of the same underlying graph, in bit order.
    pub fn all_orientations(&self) -> Vec<AcyclicQuiver> {
        let m = self.arrows.len();
        (0..1u64 << m)
            .filter_map(|mask| {
                let arrows = self
                    .arrows
                    .iter()
                    .enumerate()
                    .map(|(k, &(i, j))| if mask >> k & 1 == 1 { (j, i) } else { (i, j) })
                    .collect();
                AcyclicQuiver::new(self.n, arrows).ok()
            })
            .collect()
    }

    /// `<d, e> = sum di ei - sum_{i->j} di ej`.
    pub fn euler_form(&self, d: &[i64], e: &[i64]) -> Result<i64, DynkinError> {
        for v in [d, e] {
            if v.len() != self.n {
                return Err(DynkinError::LengthMismatch { expected: self.n, got: v.len() });
            }
        }
        Ok(self.euler_unchecked(d, e))
    }

    fn euler_unchecked(&self, d: &[i64], e: &[i64]) -> i64 {
        let diag: i64 = d.iter().zip(e).map(|(a, b)| a * b).sum();
        diag - self.arrows.iter().map(|&(i, j)| d[i] * e[j]).sum::<i64>()
    }

    /// Tits form `q(d) = <d, d>`.
    pub fn tits_form(&self, d: &[i64]) -> i64 {
        self.euler_unchecked(d, d)
    }

    /// Positive definiteness of the Tits form (Sylvester's criterion on the
    /// symmetrized matrix `2I - A`, exact integer determinants).
    pub fn is_dynkin(&self) -> bool {
        let n = self.n;
        let mut m = vec![vec![0i128; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 2;
        }
        for &(i, j) in &self.arrows {
            m[i][j] -= 1;
            m[j][i] -= 1;
        }
        (1..=n).all(|k| {
            let minor: Vec<Vec<i128>> = m[..k].iter().map(|r| r[..k].to_vec()).collect();
            bareiss_det(minor) > 0
        })
    }

    /// Skew-symmetric matrix with `b_ij = #(i -> j) - #(j -> i)`.
    pub fn exchange_matrix(&self) -> Vec<Vec<i64>> {
        let mut b = vec![vec![0i64; self.n]; self.n];
        for &(i, j) in &self.arrows {
            b[i][j] += 1;
            b[j][i] -= 1;
        }
        b
    }
}

impl fmt::Display for AcyclicQuiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n)?;
        for (i, j) in &self.arrows {
            write!(f, "; {}->{}", i + 1, j + 1)?;
        }
        Ok(())
    }
}

fn preset_edges(name: &str) -> Option<(usize, Vec<(usize, usize)>)> {
    let (kind, n) = name.split_at(1);
    let n: usize = n.parse().ok()?;
    let chain = |len: usize| (0..len.saturating_sub(1)).map(|i| (i, i + 1)).collect::<Vec<_>>();
    match kind {
        "A" if n >= 1 => Some((n, chain(n))),
        "D" if n >= 4 => {
            let mut e = chain(n - 1);
            e.push((n - 3, n - 1));
            Some((n, e))
        }
        "E" if (6..=8).contains(&n) => {
            let mut e = chain(n - 1);
            e.push((2, n - 1));
            Some((n, e))
        }
        _ => None,
    }
}

fn bareiss_det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// An indecomposable object of the cluster category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DynkinObject {
    /// The indecomposable module with this dimension vector.
    Module(Vec<i64>),
    /// `P_i[1]` for vertex `i` (0-based).
    ShiftedProjective(usize),
}

impl fmt::Display for DynkinObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynkinObject::Module(d) => {
                write!(f, "M(")?;
                for (k, x) in d.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            DynkinObject::ShiftedProjective(i) => write!(f, "P{}[1]", i + 1),
        }
    }
}

/// Largest coefficient of the highest root over all simply-laced types.
pub const ROOT_COEFF_BOUND: i64 = 6;

/// A Dynkin quiver with its positive roots enumerated once.
#[derive(Debug, Clone)]
pub struct Dynkin {
    quiver: AcyclicQuiver,
    roots: Vec<Vec<i64>>,
}

impl Dynkin {
    pub fn new(quiver: AcyclicQuiver) -> Result<Self, DynkinError> {
        let roots = positive_roots(&quiver)?;
        Ok(Dynkin { quiver, roots })
    }

    pub fn parse(s: &str) -> Result<Self, DynkinError> {
        Self::new(AcyclicQuiver::parse(s)?)
    }

    pub fn quiver(&self) -> &AcyclicQuiver {
        &self.quiver
    }

    pub fn n(&self) -> usize {
        self.quiver.n
    }

    pub fn roots(&self) -> &[Vec<i64>] {
        &self.roots
    }

    /// Modules for all positive roots followed by the shifted projectives.
    pub fn indecomposables(&self) -> Vec<DynkinObject> {
        self.roots
            .iter()
            .cloned()
            .map(DynkinObject::Module)
            .chain((0..self.n()).map(DynkinObject::ShiftedProjective))
            .collect()
    }

    fn check(&self, a: &DynkinObject) -> Result<(), DynkinError> {
        match a {
            DynkinObject::Module(d) if d.len() != self.n() => {
                Err(DynkinError::LengthMismatch { expected: self.n(), got: d.len() })
            }
            DynkinObject::Module(d) if self.roots.binary_search(d).is_err() => {
                Err(DynkinError::NotARoot(d.clone()))
            }
            DynkinObject::ShiftedProjective(i) if *i >= self.n() => {
                Err(DynkinError::VertexOutOfRange(i + 1))
            }
            _ => Ok(()),
        }
    }

    /// `dim Ext^1` in the cluster category; symmetric in its arguments.
    pub fn ext1_c(&self, a: &DynkinObject, b: &DynkinObject) -> Result<u64, DynkinError> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.ext1_c_unchecked(a, b))
    }

    pub(crate) fn ext1_c_unchecked(&self, a: &DynkinObject, b: &DynkinObject) -> u64 {
        use DynkinObject::*;
        match (a, b) {
            (Module(d), Module(e)) => {
                let de = self.quiver.euler_unchecked(d, e);
                let ed = self.quiver.euler_unchecked(e, d);
                ((-de).max(0) + (-ed).max(0)) as u64
            }
            (ShiftedProjective(i), Module(d)) | (Module(d), ShiftedProjective(i)) => d[*i] as u64,
            (ShiftedProjective(_), ShiftedProjective(_)) => 0,
        }
    }

    fn module_pair<'a>(
        &self,
        a: &'a DynkinObject,
        b: &'a DynkinObject,
    ) -> Result<(&'a [i64], &'a [i64]), DynkinError> {
        self.check(a)?;
        self.check(b)?;
        match (a, b) {
            (DynkinObject::Module(d), DynkinObject::Module(e)) => Ok((d, e)),
            (DynkinObject::Module(_), other) | (other, _) => {
                Err(DynkinError::NotAModule(other.to_string()))
            }
        }
    }

    /// `dim Hom(a, b)` in the module category. Indecomposables of a Dynkin
    /// quiver are directed, so Hom and Ext^1 are never both nonzero and the
    /// Euler form determines each.
    pub fn hom_module(&self, a: &DynkinObject, b: &DynkinObject) -> Result<u64, DynkinError> {
        let (d, e) = self.module_pair(a, b)?;
        Ok(self.quiver.euler_unchecked(d, e).max(0) as u64)
    }

    /// `dim Ext^1(a, b)` in the module category.
    pub fn ext1_module(&self, a: &DynkinObject, b: &DynkinObject) -> Result<u64, DynkinError> {
        let (d, e) = self.module_pair(a, b)?;
        Ok((-self.quiver.euler_unchecked(d, e)).max(0) as u64)
    }

    /// Parses `M(d1,...,dn)`, a bare `(d1,...,dn)`, `P<i>[1]` or `S<i>`
    /// (the simple module at vertex i).
    pub fn parse_object(&self, s: &str) -> Result<DynkinObject, DynkinError> {
        let err = || DynkinError::ParseObject(s.to_string());
        let text = s.trim();
        let obj = if let Some(rest) = text.strip_prefix('P').and_then(|r| r.strip_suffix("[1]")) {
            let i: usize = rest.trim().parse().map_err(|_| err())?;
            if i == 0 {
                return Err(err());
            }
            DynkinObject::ShiftedProjective(i - 1)
        } else if let Some(rest) = text.strip_prefix('S') {
            let i: usize = rest.trim().parse().map_err(|_| err())?;
            if i == 0 || i > self.n() {
                return Err(err());
            }
            let mut d = vec![0; self.n()];
            d[i - 1] = 1;
            DynkinObject::Module(d)
        } else {
            let inner = text.strip_prefix('M').unwrap_or(text);
            let inner = inner
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(err)?;
            let d = inner
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| err()))
                .collect::<Result<Vec<_>, _>>()?;
            DynkinObject::Module(d)
        };
        self.check(&obj)?;
        Ok(obj)
    }
}

/// Positive roots by exhaustive search over `0..=bound` per vertex, sorted
/// lexicographically. The search is repeated with `bound + 1` and must agree;
/// every pair of roots is checked for directedness.
pub fn positive_roots(q: &AcyclicQuiver) -> Result<Vec<Vec<i64>>, DynkinError> {
    if !q.is_dynkin() {
        return Err(DynkinError::NotDynkin);
    }
    let roots = roots_with_bound(q, ROOT_COEFF_BOUND);
    if roots != roots_with_bound(q, ROOT_COEFF_BOUND + 1) {
        return Err(DynkinError::UnstableRootBound);
    }
    for (k, d) in roots.iter().enumerate() {
        for e in &roots[k + 1..] {
            if q.euler_unchecked(d, e) < 0 && q.euler_unchecked(e, d) < 0 {
                return Err(DynkinError::NotDirected(d.clone(), e.clone()));
            }
        }
    }
    Ok(roots)
}

fn roots_with_bound(q: &AcyclicQuiver, bound: i64) -> Vec<Vec<i64>> {
    let n = q.n;
    let mut found = BTreeSet::new();
    let mut d = vec![0i64; n];
    loop {
        let mut k = 0;
        loop {
            if k == n {
                return found.into_iter().collect();
            }
            d[k] += 1;
            if d[k] <= bound {
                break;
            }
            d[k] = 0;
            k += 1;
        }
        if q.tits_form(&d) == 1 {
            found.insert(d.clone());
        }
    }
}
