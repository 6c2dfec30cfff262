//! Gram and Weingarten matrices over `S_m`.
//!
//! `G(q)_{σπ} = q^{m − d(σ,π)}` is the Gram matrix of the permutation states
//! on a `q`-dimensional leg, and the Weingarten matrix `W(q)` is its
//! Moore–Penrose pseudoinverse. The Haar average of `U^{⊗m} ⊗ Ū^{⊗m}` over
//! `U(q)` is `Σ_{σπ} W_{σπ}(q) |σ⟩⟩⟨⟨π|`; the Gaussian ensemble of variance `ς²`
//! replaces `W` by `ς^{2m}·1`.
//!
//! Dense matrices are available up to `m = 6`. The [`matrix_free`] module
//! applies `G` and `W` to vectors for any `m ≤ 8` without forming them.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permgroup::{SymmetricGroup, MAX_DENSE_M};

/// Eigenvalues of `G(q)/q^m` below this fraction of the largest are treated
/// as zero when forming the pseudoinverse.
pub const PINV_RELATIVE_TOLERANCE: f64 = 1e-12;

/// A real `m! × m!` matrix indexed by the canonical enumeration of `S_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermIndexedMatrix {
    m: usize,
    size: usize,
    entries: Vec<f64>,
}

impl PermIndexedMatrix {
    pub(crate) fn from_raw(m: usize, size: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), size * size);
        PermIndexedMatrix { m, size, entries }
    }

    pub fn identity(m: usize) -> Result<Self> {
        let size = dense_order(m)?;
        let mut entries = vec![0.0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1.0;
        }
        Ok(PermIndexedMatrix { m, size, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `m!`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.size + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.size..(row + 1) * self.size]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.size).map(|r| self.row(r).iter().sum()).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PermIndexedMatrix {
            m: self.m,
            size: self.size,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &PermIndexedMatrix) -> Result<Self> {
        if self.m != other.m {
            return Err(Error::Shape(format!("S_{} matrix times S_{} matrix", self.m, other.m)));
        }
        let prod = self.to_nalgebra() * other.to_nalgebra();
        Ok(Self::from_nalgebra(self.m, &prod))
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.size {
            return Err(Error::Shape(format!(
                "vector of length {} for a {}×{} matrix",
                v.len(),
                self.size,
                self.size
            )));
        }
        Ok((0..self.size).map(|r| dot(self.row(r), v)).collect())
    }

    /// Largest absolute entry of `self − other`.
    pub fn max_abs_diff(&self, other: &PermIndexedMatrix) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.size, self.size, &self.entries)
    }

    fn from_nalgebra(m: usize, mat: &DMatrix<f64>) -> Self {
        let size = mat.nrows();
        let mut entries = Vec::with_capacity(size * size);
        for r in 0..size {
            entries.extend(mat.row(r).iter());
        }
        PermIndexedMatrix { m, size, entries }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dense_order(m: usize) -> Result<usize> {
    if m > MAX_DENSE_M {
        return Err(Error::SizeLimit(format!(
            "dense S_m matrices need m ≤ {MAX_DENSE_M}, got m = {m}"
        )));
    }
    Ok(SymmetricGroup::get(m)?.order())
}

/// Random-gate ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Haar-random unitaries (isometries where inputs are fixed).
    Haar,
    /// I.i.d. complex Gaussian entries of variance `ς²`.
    ///
    /// `None` selects `ς² = 1/q` for a gate of dimension `q`, i.e.
    /// `1/(dχ)` for staircase gates, `1/(dχ²)` for glued block gates and
    /// `1/χ²` for glued auxiliary gates.
    Gaussian { variance: Option<f64> },
}

impl EnsembleKind {
    pub const GAUSSIAN: EnsembleKind = EnsembleKind::Gaussian { variance: None };

    /// Entry variance `ς²` for a Gaussian gate of dimension `q`.
    pub fn variance(&self, q: f64) -> f64 {
        match self {
            EnsembleKind::Gaussian { variance: Some(v) } => *v,
            _ => 1.0 / q,
        }
    }

    pub fn is_haar(&self) -> bool {
        matches!(self, EnsembleKind::Haar)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnsembleKind::Gaussian { variance: Some(v) } if !(*v > 0.0 && v.is_finite()) => {
                Err(Error::Precondition(format!("Gaussian variance must be positive, got {v}")))
            }
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnsembleKind::Haar => write!(f, "haar"),
            EnsembleKind::Gaussian { variance: None } => write!(f, "gaussian"),
            EnsembleKind::Gaussian { variance: Some(v) } => write!(f, "gaussian({v})"),
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" | "unitary" => Ok(EnsembleKind::Haar),
            "gaussian" => Ok(EnsembleKind::GAUSSIAN),
            other => Err(Error::Parse(format!("unknown ensemble '{other}'"))),
        }
    }
}

/// `G(q)_{σπ} = q^{m − d(σ,π)}`.
pub fn gram_matrix(m: usize, q: f64) -> Result<PermIndexedMatrix> {
    let size = dense_order(m)?;
    check_q(q)?;
    let dist = SymmetricGroup::get(m)?.distance_matrix()?;
    let powers: Vec<f64> = (0..=m).map(|d| q.powi((m - d) as i32)).collect();
    let entries = dist.iter().map(|&d| powers[d as usize]).collect();
    Ok(PermIndexedMatrix::from_raw(m, size, entries))
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Precondition(format!("dimension q must be positive, got {q}")));
    }
    Ok(())
}

type CacheKey = (usize, u64);

fn weingarten_cache() -> &'static RwLock<HashMap<CacheKey, Arc<PermIndexedMatrix>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<PermIndexedMatrix>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Pseudoinverse of [`gram_matrix`], cached per `(m, q)`.
pub fn weingarten_matrix(m: usize, q: f64) -> Result<Arc<PermIndexedMatrix>> {
    let key = (m, q.to_bits());
    if let Some(w) = weingarten_cache().read().expect("cache lock").get(&key) {
        return Ok(Arc::clone(w));
    }
    let w = Arc::new(weingarten_uncached(m, q)?);
    let mut cache = weingarten_cache().write().expect("cache lock");
    Ok(Arc::clone(cache.entry(key).or_insert(w)))
}

fn weingarten_uncached(m: usize, q: f64) -> Result<PermIndexedMatrix> {
    // Work with G/q^m, whose entries are q^{-d} ∈ (0, 1], then rescale.
    let g = gram_matrix(m, q)?.scaled(q.powi(-(m as i32)));
    let eig = SymmetricEigen::new(g.to_nalgebra());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cutoff = PINV_RELATIVE_TOLERANCE * max;
    let inv: Vec<f64> =
        eig.eigenvalues.iter().map(|&l| if l.abs() > cutoff { 1.0 / l } else { 0.0 }).collect();
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * inv[c]);
    let pinv = scaled * v.transpose();
    let mut out = PermIndexedMatrix::from_nalgebra(m, &pinv);
    let s = q.powi(-(m as i32));
    out.entries.iter_mut().for_each(|e| *e *= s);
    Ok(out)
}

/// `c^W(q)`: the row sum of `W(q)` for Haar, `ς^{2m}` for Gaussian.
pub fn weingarten_sum_constant(m: usize, q: f64, kind: EnsembleKind) -> f64 {
    weingarten_sum_constant_ln(m, q, kind).exp()
}

/// Natural logarithm of [`weingarten_sum_constant`].
pub fn weingarten_sum_constant_ln(m: usize, q: f64, kind: EnsembleKind) -> f64 {
    match kind {
        EnsembleKind::Haar => -(0..m).map(|i| (q + i as f64).ln()).sum::<f64>(),
        EnsembleKind::Gaussian { .. } => m as f64 * kind.variance(q).ln(),
    }
}

/// `T(χ, d)`: `W(dχ)·G(χ)` for Haar, `ς^{2m}·G(χ)` for Gaussian.
pub fn interaction_matrix(m: usize, chi: usize, d: usize, kind: EnsembleKind) -> Result<PermIndexedMatrix> {
    if chi == 0 || d < 2 {
        return Err(Error::Shape(format!("interaction matrix needs χ ≥ 1, d ≥ 2 (got χ={chi}, d={d})")));
    }
    let q = (d * chi) as f64;
    let g = gram_matrix(m, chi as f64)?;
    match kind {
        EnsembleKind::Haar => weingarten_matrix(m, q)?.matmul(&g),
        EnsembleKind::Gaussian { .. } => Ok(g.scaled(kind.variance(q).powi(m as i32))),
    }
}

/// Vector actions of `G(q)` and `W(q)` through Jucys–Murphy elements.
///
/// In the group algebra of `S_m`, `Σ_τ q^{#cycles(τ)} τ = Π_{j<m} (q + J_j)`
/// with `J_j = Σ_{i<j} (i j)`. The matrix `G(q)` is the right-regular action
/// of this element, so `G v` costs `O(m!·m²)`. The `J_j` commute and are
/// simultaneously diagonal with integer spectra in `[−j, j]`, so the
/// pseudoinverse `W = G⁺` is the product of the factor pseudoinverses, each
/// evaluated through spectral projectors.
pub mod matrix_free {
    use super::*;

    /// Apply `R(J_j)`: `(J_j v)(σ) = Σ_{i<j} v(σ ∘ (i j))`.
    fn apply_jm(group: &SymmetricGroup, j: usize, v: &[f64], out: &mut [f64]) {
        let table = group.swap_table();
        let t = group.transposition_count();
        let base = SymmetricGroup::transposition_slot(0, j.max(1));
        for (idx, o) in out.iter_mut().enumerate() {
            let row = &table[idx * t + base..idx * t + base + j];
            *o = row.iter().map(|&s| v[s as usize]).sum();
        }
    }

    fn check(group: &SymmetricGroup, v: &[f64]) -> Result<()> {
        if v.len() != group.order() {
            return Err(Error::Shape(format!(
                "vector of length {} on S_{} (order {})",
                v.len(),
                group.m(),
                group.order()
            )));
        }
        Ok(())
    }

    /// `G(q)·v`.
    pub fn gram_apply(m: usize, q: f64, v: &[f64]) -> Result<Vec<f64>> {
        let group = SymmetricGroup::get(m)?;
        check(group, v)?;
        let mut cur: Vec<f64> = v.iter().map(|x| x * q).collect();
        let mut tmp = vec![0.0; v.len()];
        for j in 1..m {
            apply_jm(group, j, &cur, &mut tmp);
            for (c, t) in cur.iter_mut().zip(&tmp) {
                *c = q * *c + t;
            }
        }
        Ok(cur)
    }

    /// `W(q)·v` with `W(q) = G(q)⁺`.
    pub fn weingarten_apply(m: usize, q: f64, v: &[f64]) -> Result<Vec<f64>> {
        let group = SymmetricGroup::get(m)?;
        check(group, v)?;
        let mut cur: Vec<f64> = v.iter().map(|x| x / q).collect();
        for j in 1..m {
            cur = factor_pinv_apply(group, j, q, &cur);
        }
        Ok(cur)
    }

    /// `(q + J_j)⁺ v = Σ_c f(q + c) P_c v` over the integer nodes `c ∈ [−j, j]`,
    /// where `P_c = Π_{c'≠c} (J_j − c')/(c − c')` and `f(x) = 1/x`, or 0 when
    /// `x` vanishes.
    fn factor_pinv_apply(group: &SymmetricGroup, j: usize, q: f64, v: &[f64]) -> Vec<f64> {
        let nodes: Vec<f64> = (-(j as i64)..=j as i64).map(|c| c as f64).collect();
        let mut out = vec![0.0; v.len()];
        let mut tmp = vec![0.0; v.len()];
        for (ci, &c) in nodes.iter().enumerate() {
            let x = q + c;
            if x.abs() <= PINV_RELATIVE_TOLERANCE * q.max(1.0) {
                continue;
            }
            let mut proj = v.to_vec();
            for (cj, &c2) in nodes.iter().enumerate() {
                if ci == cj {
                    continue;
                }
                apply_jm(group, j, &proj, &mut tmp);
                let denom = c - c2;
                for (p, t) in proj.iter_mut().zip(&tmp) {
                    *p = (t - c2 * *p) / denom;
                }
            }
            for (o, p) in out.iter_mut().zip(&proj) {
                *o += p / x;
            }
        }
        out
    }
}
