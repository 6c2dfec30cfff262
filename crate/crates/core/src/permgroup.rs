//! Symmetric-group combinatorics for the replica model.
//!
//! Permutations are stored in one-line notation: position `i` maps to
//! `images[i]`. The canonical index of a permutation is the lexicographic
//! rank of its one-line notation, so index 0 is always the identity.
//!
//! Replicas are laid out in four bundles `[n | k | k | n]`. Group 1 is the
//! first `n + k` replicas and group 2 the remaining `n + k`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weingarten::PermIndexedMatrix;

/// Largest replica count handled anywhere in the crate.
pub const MAX_M: usize = 8;

/// Largest replica count for which dense `m! × m!` matrices are built.
pub const MAX_DENSE_M: usize = 6;

/// An element of `S_m`, `m ≤ 8`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    m: u8,
    images: [u8; MAX_M],
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.images())
    }
}

impl Permutation {
    pub fn identity(m: usize) -> Result<Self> {
        check_m(m)?;
        let mut images = [0u8; MAX_M];
        for (i, x) in images.iter_mut().enumerate().take(m) {
            *x = i as u8;
        }
        Ok(Permutation { m: m as u8, images })
    }

    /// Build from one-line notation; fails unless `images` is a bijection.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let m = images.len();
        check_m(m)?;
        let mut seen = [false; MAX_M];
        let mut out = [0u8; MAX_M];
        for (i, &x) in images.iter().enumerate() {
            if x >= m || seen[x] {
                return Err(Error::Shape(format!("{images:?} is not a permutation")));
            }
            seen[x] = true;
            out[i] = x as u8;
        }
        Ok(Permutation { m: m as u8, images: out })
    }

    /// The transposition exchanging `a` and `b` in `S_m`.
    pub fn transposition(m: usize, a: usize, b: usize) -> Result<Self> {
        let mut p = Self::identity(m)?;
        if a >= m || b >= m {
            return Err(Error::Shape(format!("transposition ({a} {b}) outside S_{m}")));
        }
        p.images.swap(a, b);
        Ok(p)
    }

    pub fn m(&self) -> usize {
        self.m as usize
    }

    pub fn images(&self) -> &[u8] {
        &self.images[..self.m()]
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// `(self ∘ other)[i] = self[other[i]]`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        same_m(self, other)?;
        Ok(self.compose_unchecked(other))
    }

    pub fn inverse(&self) -> Permutation {
        let mut out = [0u8; MAX_M];
        for i in 0..self.m() {
            out[self.images[i] as usize] = i as u8;
        }
        Permutation { m: self.m, images: out }
    }

    pub fn cycle_count(&self) -> usize {
        let m = self.m();
        let mut seen = [false; MAX_M];
        let mut cycles = 0;
        for start in 0..m {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.images[j] as usize;
            }
        }
        cycles
    }

    /// Lexicographic rank of the one-line notation.
    pub fn rank(&self) -> usize {
        let m = self.m();
        let mut rank = 0;
        for i in 0..m {
            let smaller_later = (i + 1..m).filter(|&j| self.images[j] < self.images[i]).count();
            rank = rank * (m - i) + smaller_later;
        }
        rank
    }

    fn compose_unchecked(&self, other: &Permutation) -> Permutation {
        let mut out = [0u8; MAX_M];
        for (i, o) in out.iter_mut().enumerate().take(self.m()) {
            *o = self.images[other.images[i] as usize];
        }
        Permutation { m: self.m, images: out }
    }

    /// Transposition distance without the shape check.
    pub(crate) fn distance_unchecked(&self, other: &Permutation) -> usize {
        // d(a, b) = m − #cycles(a ∘ b⁻¹); walk the cycles of a∘b⁻¹ directly.
        let m = self.m();
        let mut inv_b = [0u8; MAX_M];
        for i in 0..m {
            inv_b[other.images[i] as usize] = i as u8;
        }
        let mut seen = [false; MAX_M];
        let mut cycles = 0;
        for start in 0..m {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.images[inv_b[j] as usize] as usize;
            }
        }
        m - cycles
    }

    fn is_factorized_unchecked(&self) -> bool {
        let h = self.m() / 2;
        (0..self.m()).all(|i| (self.image(i) < h) == (i < h))
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 || m > MAX_M {
        return Err(Error::SizeLimit(format!("replica count m = {m} outside 1..={MAX_M}")));
    }
    Ok(())
}

fn same_m(a: &Permutation, b: &Permutation) -> Result<()> {
    if a.m != b.m {
        return Err(Error::Shape(format!("permutations of S_{} and S_{}", a.m, b.m)));
    }
    Ok(())
}

/// Replica bookkeeping: `n` auxiliary replicas, moment order `k`, `m = 2(n + k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReplicaShape {
    pub n: usize,
    pub k: usize,
}

impl ReplicaShape {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Shape("moment order k must be positive".into()));
        }
        let shape = ReplicaShape { n, k };
        check_m(shape.m())?;
        Ok(shape)
    }

    pub fn m(&self) -> usize {
        2 * (self.n + self.k)
    }
}

/// All of `S_m` in lexicographic order.
pub fn enumerate(m: usize) -> Result<Vec<Permutation>> {
    let mut p = Permutation::identity(m)?;
    let mut out = Vec::with_capacity((1..=m).product());
    loop {
        out.push(p);
        // Standard next-permutation step on the first m entries.
        let a = &mut p.images[..m];
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| a[i] < a[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| a[j] > a[i]).expect("successor exists");
        a.swap(i, j);
        a[i + 1..].reverse();
    }
    Ok(out)
}

pub fn compose(a: &Permutation, b: &Permutation) -> Result<Permutation> {
    a.compose(b)
}

pub fn inverse(a: &Permutation) -> Permutation {
    a.inverse()
}

/// Cayley distance under all transpositions: `m − #cycles(a ∘ b⁻¹)`.
pub fn transposition_distance(a: &Permutation, b: &Permutation) -> Result<usize> {
    same_m(a, b)?;
    Ok(a.distance_unchecked(b))
}

/// The boundary permutation on region `A`: swaps replica `n + j` with
/// `n + k + j` for `j < k` and fixes the rest.
pub fn sigma_a(shape: ReplicaShape) -> Permutation {
    let (n, k) = (shape.n, shape.k);
    let mut p = Permutation::identity(shape.m()).expect("shape validated on construction");
    for j in 0..k {
        p.images.swap(n + j, n + k + j);
    }
    p
}

/// Whether `a` preserves both replica groups.
pub fn is_factorized(a: &Permutation) -> Result<bool> {
    if !a.m().is_multiple_of(2) {
        return Err(Error::Shape(format!("is_factorized needs even m, got {}", a.m())));
    }
    Ok(a.is_factorized_unchecked())
}

/// Factorized permutations at distance exactly `k` from `σ_A`.
pub fn ground_states(shape: ReplicaShape) -> Result<Vec<Permutation>> {
    let group = SymmetricGroup::get(shape.m())?;
    let sa = sigma_a(shape);
    Ok(group
        .elements()
        .iter()
        .filter(|p| p.is_factorized_unchecked() && p.distance_unchecked(&sa) == shape.k)
        .copied()
        .collect())
}

/// `A^(α)_{σπ} = 1` if `d(σ, π) = α`, else 0.
pub fn adjacency_matrix(m: usize, alpha: usize) -> Result<PermIndexedMatrix> {
    let group = SymmetricGroup::get(m)?;
    let dist = group.distance_matrix()?;
    let size = group.order();
    let entries = dist.iter().map(|&d| if d as usize == alpha { 1.0 } else { 0.0 }).collect();
    Ok(PermIndexedMatrix::from_raw(m, size, entries))
}

/// `S_m` with its canonical enumeration and lookup tables, built once per `m`.
pub struct SymmetricGroup {
    m: usize,
    elements: Vec<Permutation>,
    distances: OnceLock<Vec<u8>>,
    swaps: OnceLock<Vec<u32>>,
}

static GROUPS: [OnceLock<SymmetricGroup>; MAX_M + 1] = [const { OnceLock::new() }; MAX_M + 1];

impl SymmetricGroup {
    /// Shared instance for `S_m`.
    pub fn get(m: usize) -> Result<&'static SymmetricGroup> {
        check_m(m)?;
        Ok(GROUPS[m].get_or_init(|| SymmetricGroup {
            m,
            elements: enumerate(m).expect("m checked"),
            distances: OnceLock::new(),
            swaps: OnceLock::new(),
        }))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `m!`.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn index_of(&self, p: &Permutation) -> usize {
        p.rank()
    }

    /// Row-major `m! × m!` table of transposition distances (dense sizes only).
    pub fn distance_matrix(&self) -> Result<&[u8]> {
        if self.m > MAX_DENSE_M {
            return Err(Error::SizeLimit(format!(
                "dense S_m tables need m ≤ {MAX_DENSE_M}, got {}",
                self.m
            )));
        }
        Ok(self.distances.get_or_init(|| {
            let els = &self.elements;
            let mut out = Vec::with_capacity(els.len() * els.len());
            for a in els {
                out.extend(els.iter().map(|b| a.distance_unchecked(b) as u8));
            }
            out
        }))
    }

    /// Distances from every element to `target`.
    pub fn distances_to(&self, target: &Permutation) -> Vec<usize> {
        self.elements.iter().map(|p| p.distance_unchecked(target)).collect()
    }

    /// Factorization indicator for every element.
    pub fn factorized_mask(&self) -> Vec<bool> {
        self.elements.iter().map(|p| p.is_factorized_unchecked()).collect()
    }

    /// Number of transpositions `(i j)`, `i < j`.
    pub fn transposition_count(&self) -> usize {
        self.m * (self.m - 1) / 2
    }

    /// Position of transposition `(i j)`, `i < j`, in the swap table.
    pub fn transposition_slot(i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        j * (j - 1) / 2 + i
    }

    /// `table[p · T + slot(i, j)]` is the index of `σ_p ∘ (i j)`, i.e. `σ_p`
    /// with positions `i` and `j` of its one-line notation exchanged.
    pub fn swap_table(&self) -> &[u32] {
        self.swaps.get_or_init(|| {
            let t = self.transposition_count();
            let mut out = vec![0u32; self.order() * t];
            for (idx, p) in self.elements.iter().enumerate() {
                for j in 1..self.m {
                    for i in 0..j {
                        let mut q = *p;
                        q.images.swap(i, j);
                        out[idx * t + Self::transposition_slot(i, j)] = q.rank() as u32;
                    }
                }
            }
            out
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, VecDeque};

    fn p(images: &[usize]) -> Permutation {
        Permutation::from_images(images).unwrap()
    }

    // Breadth-first search over the Cayley graph generated by all transpositions.
    fn bfs_distances(m: usize) -> HashMap<Permutation, usize> {
        let id = Permutation::identity(m).unwrap();
        let mut dist = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([id]);
        while let Some(cur) = queue.pop_front() {
            let dc = dist[&cur];
            for a in 0..m {
                for b in a + 1..m {
                    let t = Permutation::transposition(m, a, b).unwrap();
                    let next = cur.compose(&t).unwrap();
                    dist.entry(next).or_insert_with(|| {
                        queue.push_back(next);
                        dc + 1
                    });
                }
            }
        }
        dist
    }

    #[test]
    fn enumerate_sizes_and_order() {
        assert_eq!(enumerate(1).unwrap(), vec![Permutation::identity(1).unwrap()]);
        let s3 = enumerate(3).unwrap();
        assert_eq!(s3.len(), 6);
        assert_eq!(s3[0], Permutation::identity(3).unwrap());
        assert_eq!(enumerate(4).unwrap().len(), 24);
        assert_eq!(enumerate(8).unwrap().len(), 40320);
        for (i, q) in enumerate(5).unwrap().iter().enumerate() {
            assert_eq!(q.rank(), i);
        }
        let s4 = enumerate(4).unwrap();
        assert!(s4.windows(2).all(|w| w[0].images() < w[1].images()));
    }

    #[test]
    fn enumerate_rejects_out_of_range() {
        assert!(matches!(enumerate(0), Err(Error::SizeLimit(_))));
        assert!(matches!(enumerate(9), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn compose_and_inverse() {
        let id = Permutation::identity(4).unwrap();
        let s = p(&[2, 0, 3, 1]);
        assert_eq!(compose(&id, &s).unwrap(), s);
        let t = Permutation::transposition(4, 1, 3).unwrap();
        assert_eq!(inverse(&t), t);
        for a in enumerate(4).unwrap() {
            assert_eq!(a.compose(&a.inverse()).unwrap(), id);
        }
        // compose(a, b)[i] = a[b[i]]
        let a = p(&[1, 2, 0]);
        let b = p(&[0, 2, 1]);
        assert_eq!(a.compose(&b).unwrap().images(), &[1, 0, 2]);
        assert!(matches!(a.compose(&id), Err(Error::Shape(_))));
    }

    #[test]
    fn distance_examples() {
        let id = Permutation::identity(4).unwrap();
        assert_eq!(transposition_distance(&id, &id).unwrap(), 0);
        let t = Permutation::transposition(4, 0, 2).unwrap();
        assert_eq!(transposition_distance(&id, &t).unwrap(), 1);
        let two = p(&[1, 0, 3, 2]);
        assert_eq!(transposition_distance(&id, &two).unwrap(), 2);
        let bfs = bfs_distances(4);
        assert_eq!(bfs[&two], 2);
        assert!(transposition_distance(&id, &Permutation::identity(3).unwrap()).is_err());
    }

    #[test]
    fn distance_matches_cayley_bfs() {
        for m in 1..=6 {
            let bfs = bfs_distances(m);
            let id = Permutation::identity(m).unwrap();
            for q in enumerate(m).unwrap() {
                assert_eq!(transposition_distance(&q, &id).unwrap(), bfs[&q]);
            }
        }
    }

    #[test]
    fn metric_axioms_exhaustive() {
        for m in 1..=5 {
            let g = SymmetricGroup::get(m).unwrap();
            let d = g.distance_matrix().unwrap();
            let n = g.order();
            for a in 0..n {
                assert_eq!(d[a * n + a], 0);
                for b in 0..n {
                    assert_eq!(d[a * n + b], d[b * n + a]);
                    if a != b {
                        assert!(d[a * n + b] > 0);
                    }
                }
            }
            if m <= 4 {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            assert!(d[a * n + c] <= d[a * n + b] + d[b * n + c]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn left_invariance() {
        for m in 1..=4 {
            let els = enumerate(m).unwrap();
            for g in &els {
                for a in &els {
                    for b in &els {
                        let ga = g.compose(a).unwrap();
                        let gb = g.compose(b).unwrap();
                        assert_eq!(
                            transposition_distance(&ga, &gb).unwrap(),
                            transposition_distance(a, b).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_a_examples() {
        let s = sigma_a(ReplicaShape::new(0, 1).unwrap());
        assert_eq!(s.images(), &[1, 0]);
        let s = sigma_a(ReplicaShape::new(1, 1).unwrap());
        assert_eq!(s.images(), &[0, 2, 1, 3]);
        for n in 0..4 {
            for k in 1..4 {
                let Ok(shape) = ReplicaShape::new(n, k) else { continue };
                let s = sigma_a(shape);
                let id = Permutation::identity(shape.m()).unwrap();
                assert_eq!(transposition_distance(&s, &id).unwrap(), k);
                assert_eq!(s.compose(&s).unwrap(), id);
            }
        }
    }

    #[test]
    fn factorized_examples() {
        assert!(is_factorized(&Permutation::identity(4).unwrap()).unwrap());
        assert!(!is_factorized(&sigma_a(ReplicaShape::new(0, 1).unwrap())).unwrap());
        let count = enumerate(4).unwrap().iter().filter(|q| is_factorized(q).unwrap()).count();
        assert_eq!(count, 4);
        assert!(is_factorized(&Permutation::identity(3).unwrap()).is_err());
    }

    #[test]
    fn ground_state_examples() {
        let g = ground_states(ReplicaShape::new(0, 1).unwrap()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(ground_states(ReplicaShape::new(0, 2).unwrap()).unwrap().len(), 2);

        // (n, k) = (1, 1): the single ground state acts as the identity on the
        // auxiliary replicas 0 and 3.
        let g = ground_states(ReplicaShape::new(1, 1).unwrap()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].image(0), 0);
        assert_eq!(g[0].image(3), 3);
    }

    #[test]
    fn ground_state_count_is_k_factorial() {
        for n in 0..4 {
            for k in 1..5 {
                let Ok(shape) = ReplicaShape::new(n, k) else { continue };
                let sa = sigma_a(shape);
                let gs = ground_states(shape).unwrap();
                let kfact: usize = (1..=k).product();
                assert_eq!(gs.len(), kfact, "n={n} k={k}");
                for q in &gs {
                    assert!(is_factorized(q).unwrap());
                    assert_eq!(transposition_distance(q, &sa).unwrap(), k);
                }
                // No factorized permutation is closer to σ_A.
                let min = SymmetricGroup::get(shape.m())
                    .unwrap()
                    .elements()
                    .iter()
                    .filter(|q| is_factorized(q).unwrap())
                    .map(|q| transposition_distance(q, &sa).unwrap())
                    .min()
                    .unwrap();
                assert_eq!(min, k);
            }
        }
    }

    #[test]
    fn adjacency_examples() {
        let a0 = adjacency_matrix(3, 0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(a0.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        let a1 = adjacency_matrix(3, 1).unwrap();
        assert!(a1.row_sums().iter().all(|&s| s == 3.0));
        let a1 = adjacency_matrix(4, 1).unwrap();
        assert!(a1.row_sums().iter().all(|&s| s == 6.0));
    }

    #[test]
    fn adjacency_partitions_all_pairs() {
        for m in 1..=5 {
            let n = SymmetricGroup::get(m).unwrap().order();
            let mut total = vec![0.0; n * n];
            for alpha in 0..m {
                let a = adjacency_matrix(m, alpha).unwrap();
                for (t, v) in total.iter_mut().zip(a.entries()) {
                    *t += v;
                }
            }
            assert!(total.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn swap_table_is_right_multiplication() {
        let g = SymmetricGroup::get(5).unwrap();
        let table = g.swap_table();
        let t = g.transposition_count();
        for (idx, q) in g.elements().iter().enumerate() {
            for j in 1..5 {
                for i in 0..j {
                    let tr = Permutation::transposition(5, i, j).unwrap();
                    let expected = q.compose(&tr).unwrap().rank();
                    let got = table[idx * t + SymmetricGroup::transposition_slot(i, j)];
                    assert_eq!(got as usize, expected);
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn perm(m: usize) -> impl Strategy<Value = Permutation> {
            Just((0..m).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::from_images(&v).unwrap())
        }

        proptest! {
            #[test]
            fn distance_is_left_and_right_invariant(a in perm(8), b in perm(8), g in perm(8)) {
                let d = transposition_distance(&a, &b).unwrap();
                prop_assert_eq!(d, transposition_distance(&g.compose(&a).unwrap(), &g.compose(&b).unwrap()).unwrap());
                prop_assert_eq!(d, transposition_distance(&a.compose(&g).unwrap(), &b.compose(&g).unwrap()).unwrap());
            }

            #[test]
            fn rank_round_trips(a in perm(7)) {
                let els = enumerate(7).unwrap();
                prop_assert_eq!(els[a.rank()], a);
            }
        }
    }
}
