//! Brute-force reference computations used to cross-check the closed-form
//! rules elsewhere in the crate. Nothing here calls into the code paths it
//! is meant to validate.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::lattice::{LElement, WeightType};

/// Counts monomials `X1^a1 ... Xt^at` of degree `x` in the coordinate ring,
/// using the basis with `a1, a2` free and `ai < pi` for `i >= 3`.
///
/// A single weight `(p)` is treated as `(p, 1)`: the second variable then has
/// degree `c`.
pub fn graded_dim_oracle(x: &LElement) -> u64 {
    let wt = x.weight();
    let t = wt.t();
    // every monomial has c-coefficient >= floor(a1/p1) + floor(a2/p2) >= 0
    let reach = x.l().max(0) + 1;
    let p1 = wt.weight(1);
    let p2 = if t >= 2 { wt.weight(2) } else { 1 };
    let mut count = 0;
    let mut tail = vec![0i64; t.saturating_sub(2)];
    loop {
        for a1 in 0..p1 * reach {
            for a2 in 0..p2 * reach {
                let mut raw = vec![0i64; t];
                raw[0] = a1;
                let mut raw_l = 0;
                if t >= 2 {
                    raw[1] = a2;
                } else {
                    raw_l = a2;
                }
                raw[2.min(t)..].copy_from_slice(&tail);
                let deg = LElement::normal_form(wt, &raw, raw_l).expect("length matches");
                if deg == *x {
                    count += 1;
                }
            }
        }
        // odometer over 0 <= ai < pi for i >= 3
        let mut k = 0;
        loop {
            if k == tail.len() {
                return count;
            }
            tail[k] += 1;
            if tail[k] < wt.weight(k + 3) {
                break;
            }
            tail[k] = 0;
            k += 1;
        }
    }
}

/// Convenience wrapper: every element with `|l| <= bound` and all `li`.
pub fn lattice_grid(wt: &Arc<WeightType>, bound: i64) -> Vec<LElement> {
    let mut out = Vec::new();
    let mut li = vec![0i64; wt.t()];
    loop {
        for l in -bound..=bound {
            out.push(LElement::normal_form(wt, &li, l).expect("length matches"));
        }
        let mut k = 0;
        loop {
            if k == li.len() {
                return out;
            }
            li[k] += 1;
            if li[k] < wt.weight(k + 1) {
                break;
            }
            li[k] = 0;
            k += 1;
        }
    }
}

/// A nilpotent representation of the cyclic quiver with `rank` vertices,
/// arrows `v -> v - 1`. Uniserial with the given socle vertex and length.
#[derive(Debug, Clone)]
pub struct CyclicRep {
    rank: usize,
    /// vertex of each basis vector; basis vector `k` maps to `k - 1`
    vertex_of: Vec<usize>,
}

impl CyclicRep {
    pub fn uniserial(rank: usize, socle: usize, length: usize) -> Self {
        let vertex_of = (0..length).map(|k| (socle + k) % rank).collect();
        CyclicRep { rank, vertex_of }
    }

    fn basis_at(&self, v: usize) -> Vec<usize> {
        (0..self.vertex_of.len()).filter(|&k| self.vertex_of[k] == v).collect()
    }

    /// Matrix entry of the arrow leaving `v`, from basis vector `from` to `to`.
    fn arrow(&self, from: usize, to: usize) -> i64 {
        i64::from(from >= 1 && to == from - 1)
    }
}

/// `dim Hom(M, N)` computed as the kernel dimension of the linear system
/// `f_{v-1} A_v = B_v f_v` over all arrows `v -> v - 1`.
pub fn cyclic_hom_dim(m: &CyclicRep, n: &CyclicRep) -> usize {
    assert_eq!(m.rank, n.rank, "representations of different quivers");
    let d = m.rank;
    let mb: Vec<Vec<usize>> = (0..d).map(|v| m.basis_at(v)).collect();
    let nb: Vec<Vec<usize>> = (0..d).map(|v| n.basis_at(v)).collect();
    // unknown (v, r, s): entry of f_v mapping M basis mb[v][s] to N basis nb[v][r]
    let mut offset = vec![0usize; d + 1];
    for v in 0..d {
        offset[v + 1] = offset[v] + mb[v].len() * nb[v].len();
    }
    let unknowns = offset[d];
    if unknowns == 0 {
        return 0;
    }
    let var = |v: usize, r: usize, s: usize| offset[v] + r * mb[v].len() + s;

    let mut rows: Vec<Vec<i64>> = Vec::new();
    for v in 0..d {
        let w = (v + d - 1) % d;
        // (f_w A_v)[r][s] - (B_v f_v)[r][s] = 0 for r in nb[w], s in mb[v]
        for r in 0..nb[w].len() {
            for s in 0..mb[v].len() {
                let mut row = vec![0i64; unknowns];
                for (q, &mq) in mb[w].iter().enumerate() {
                    let a = m.arrow(mb[v][s], mq);
                    if a != 0 {
                        row[var(w, r, q)] += a;
                    }
                }
                for (q, &nq) in nb[v].iter().enumerate() {
                    let b = n.arrow(nq, nb[w][r]);
                    if b != 0 {
                        row[var(v, q, s)] -= b;
                    }
                }
                if row.iter().any(|&e| e != 0) {
                    rows.push(row);
                }
            }
        }
    }
    unknowns - rational_rank(rows, unknowns)
}

/// Rank of an integer matrix by Gaussian elimination over the rationals.
pub fn rational_rank(rows: Vec<Vec<i64>>, cols: usize) -> usize {
    let mut mat: Vec<Vec<BigRational>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(|e| BigRational::from_integer(BigInt::from(e))).collect())
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..mat.len()).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, p);
        let inv = BigRational::one() / mat[rank][col].clone();
        for e in mat[rank].iter_mut() {
            *e *= inv.clone();
        }
        for r in 0..mat.len() {
            if r != rank && !mat[r][col].is_zero() {
                let factor = mat[r][col].clone();
                for c in col..cols {
                    let sub = factor.clone() * mat[rank][c].clone();
                    mat[r][c] -= sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::parse_weights;

    #[test]
    fn graded_dim_oracle_examples() {
        let wt = parse_weights("(2,3)").unwrap();
        assert_eq!(graded_dim_oracle(&LElement::canonical(&wt)), 2);
        let wt = parse_weights("(2,3,5)").unwrap();
        let x = &LElement::x(&wt, 1) + &LElement::canonical(&wt);
        assert_eq!(graded_dim_oracle(&x), 2);
        assert_eq!(graded_dim_oracle(&LElement::c_multiple(&wt, -1)), 0);
        assert_eq!(graded_dim_oracle(&LElement::omega(&wt)), 0);
        let wt = parse_weights("(2,2,2)").unwrap();
        assert_eq!(graded_dim_oracle(&LElement::canonical(&wt)), 2);
    }

    #[test]
    fn single_weight_is_padded() {
        let wt = parse_weights("(3)").unwrap();
        for x in lattice_grid(&wt, 3) {
            assert_eq!(graded_dim_oracle(&x), x.graded_dim(), "{x}");
        }
    }

    #[test]
    fn cyclic_oracle_small_cases() {
        // simple to itself
        let s = CyclicRep::uniserial(3, 0, 1);
        assert_eq!(cyclic_hom_dim(&s, &s), 1);
        // rank 3: socle 0 length 2 into socle 1 length 2
        let a = CyclicRep::uniserial(3, 0, 2);
        let b = CyclicRep::uniserial(3, 1, 2);
        assert_eq!(cyclic_hom_dim(&a, &b), 1);
        // homogeneous tube, length 3 endomorphisms: k[x]/x^3
        let h = CyclicRep::uniserial(1, 0, 3);
        assert_eq!(cyclic_hom_dim(&h, &h), 3);
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(rational_rank(vec![vec![1, 2], vec![2, 4]], 2), 1);
        assert_eq!(rational_rank(vec![vec![1, 0], vec![0, 1]], 2), 2);
        assert_eq!(rational_rank(vec![], 3), 0);
    }
}
