//! Random matrix-product states from the two circuit architectures.
//!
//! A state is a chain of tensors `M[l, z, r]` (left bond, physical index,
//! right bond). Sites belong to region `A` (kept) or `B` (measured).
//!
//! * Staircase: `N_A` sites of dimension `d` in `A`, then `N_B − 1` sites of
//!   dimension `d` and a final site of dimension `χ` (the exposed auxiliary
//!   leg) in `B`.
//! * Glued: `B A B … A B` with `N_A` sites of dimension `d` and
//!   `N_B = N_A + 1` sites of dimension `χ²`.
//!
//! [`circuit`] samples the gates, [`sampler`] draws Born-rule outcomes and
//! [`oracle`] simulates the same gates on a dense statevector.

pub mod circuit;
pub mod haar;
pub mod oracle;
pub mod sampler;

use std::io::Write;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weingarten::EnsembleKind;
use crate::Setup;

pub use circuit::Circuit;
pub use haar::{gaussian_matrix, haar_isometry, haar_unitary};
pub use sampler::{born_sample, BornSampler};

/// Largest region-`A` dimension for dense post-measurement states.
pub const MAX_DENSE_A: usize = 1 << 20;

/// Which region a chain site belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SiteRole {
    A,
    B,
}

/// Region assignment of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLayout {
    pub setup: Setup,
    pub roles: Vec<SiteRole>,
    pub n_a: usize,
    pub n_b: usize,
}

impl RegionLayout {
    pub fn staircase(n_a: usize, n_b: usize) -> Self {
        let mut roles = vec![SiteRole::A; n_a];
        roles.extend(std::iter::repeat_n(SiteRole::B, n_b));
        RegionLayout { setup: Setup::Staircase, roles, n_a, n_b }
    }

    pub fn glued(n_a: usize) -> Self {
        let mut roles = vec![SiteRole::B];
        for _ in 0..n_a {
            roles.push(SiteRole::A);
            roles.push(SiteRole::B);
        }
        RegionLayout { setup: Setup::Glued, roles, n_a, n_b: n_a + 1 }
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn a_sites(&self) -> Vec<usize> {
        self.sites_with(SiteRole::A)
    }

    pub fn b_sites(&self) -> Vec<usize> {
        self.sites_with(SiteRole::B)
    }

    fn sites_with(&self, role: SiteRole) -> Vec<usize> {
        self.roles.iter().enumerate().filter(|(_, r)| **r == role).map(|(i, _)| i).collect()
    }
}

/// Matrix-product state with open boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsState {
    tensors: Vec<Array3<Complex64>>,
}

impl MpsState {
    /// Build from tensors of shape `(left, phys, right)`; adjacent bonds must
    /// match and both outer bonds must be 1.
    pub fn new(tensors: Vec<Array3<Complex64>>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Shape("empty MPS".into()));
        }
        if tensors[0].dim().0 != 1 || tensors[tensors.len() - 1].dim().2 != 1 {
            return Err(Error::Shape("outer bonds of an MPS must have dimension 1".into()));
        }
        for (i, w) in tensors.windows(2).enumerate() {
            if w[0].dim().2 != w[1].dim().0 {
                return Err(Error::Shape(format!(
                    "bond {i}: right dimension {} vs left dimension {}",
                    w[0].dim().2,
                    w[1].dim().0
                )));
            }
        }
        Ok(MpsState { tensors })
    }

    /// Product state `|0…0⟩` with the given physical dimensions.
    pub fn product_zero(phys_dims: &[usize]) -> Result<Self> {
        let tensors = phys_dims
            .iter()
            .map(|&p| {
                let mut t = Array3::zeros((1, p, 1));
                t[[0, 0, 0]] = Complex64::new(1.0, 0.0);
                t
            })
            .collect();
        Self::new(tensors)
    }

    pub fn tensors(&self) -> &[Array3<Complex64>] {
        &self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.tensors.iter().map(|t| t.dim().1).collect()
    }

    /// Interior bond dimensions, `len() − 1` entries.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.len() - 1].iter().map(|t| t.dim().2).collect()
    }

    /// `⟨ψ|ψ⟩`, by a left-to-right transfer-matrix sweep.
    pub fn norm_squared(&self) -> f64 {
        let mut env = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
        for t in &self.tensors {
            env = transfer_left(&env, t);
        }
        env[[0, 0]].re
    }

    /// Dense amplitudes in site order (first site most significant).
    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let total: usize = self.phys_dims().iter().product();
        if total > oracle::MAX_ORACLE_DIM {
            return Err(Error::SizeLimit(format!("dense MPS of dimension {total}")));
        }
        // rows = configurations so far, columns = current right bond
        let mut acc = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
        for t in &self.tensors {
            let (l, p, r) = t.dim();
            let mat = t.view().into_shape_with_order((l, p * r)).expect("contiguous");
            let next = acc.dot(&mat);
            let rows = next.nrows() * p;
            acc = next.into_shape_with_order((rows, r)).expect("contiguous");
        }
        Ok(acc.column(0).to_vec())
    }

    /// Write a self-describing text dump: site count, then per site the
    /// shape `(left, phys, right)` followed by row-major `re im` pairs.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "mps sites={}", self.len())?;
        for (i, t) in self.tensors.iter().enumerate() {
            let (l, p, r) = t.dim();
            writeln!(w, "site {i} left={l} phys={p} right={r}")?;
            for z in t.iter() {
                writeln!(w, "{:e} {:e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// `E' = Σ_z M(z)† E M(z)` for a left environment `E`.
pub(crate) fn transfer_left(env: &Array2<Complex64>, t: &Array3<Complex64>) -> Array2<Complex64> {
    let (_, p, r) = t.dim();
    let mut out = Array2::zeros((r, r));
    for z in 0..p {
        let m = t.index_axis(ndarray::Axis(1), z);
        let em = env.dot(&m);
        let mh = m.t().mapv(|c| c.conj());
        out += &mh.dot(&em);
    }
    out
}

/// Outcome of a projective measurement of region `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    /// One outcome per `B` site, in chain order.
    pub outcomes: Vec<usize>,
    /// Born probability `p(z_B)`.
    pub probability: f64,
    /// Normalized post-measurement state on `A`, length `D_A`.
    pub post_state: Vec<Complex64>,
}

/// `⟨a|b⟩ = Σ_i conj(a_i) b_i`.
pub fn overlap(a: &[Complex64], b: &[Complex64]) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("overlap of vectors of length {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x.conj() * y).sum())
}

/// Random staircase MPS with `N_A` kept sites and `N_B` measured sites (the
/// last of which is the `χ`-dimensional auxiliary leg).
pub fn build_staircase<R: Rng + ?Sized>(
    n_a: usize,
    n_b: usize,
    d: usize,
    chi: usize,
    kind: EnsembleKind,
    rng: &mut R,
) -> Result<(MpsState, RegionLayout)> {
    let circuit = Circuit::staircase(n_a, n_b, d, chi, kind, rng)?;
    Ok((circuit.to_mps()?, circuit.layout.clone()))
}

/// Random glued-circuit MPS with `N_A` kept sites and `N_A + 1` measured
/// `χ²`-dimensional sites.
pub fn build_glued<R: Rng + ?Sized>(
    n_a: usize,
    d: usize,
    chi: usize,
    kind: EnsembleKind,
    rng: &mut R,
) -> Result<(MpsState, RegionLayout)> {
    let circuit = Circuit::glued(n_a, d, chi, kind, rng)?;
    Ok((circuit.to_mps()?, circuit.layout.clone()))
}
