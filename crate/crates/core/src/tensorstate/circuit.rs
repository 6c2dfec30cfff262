//! Gate-level description of the two circuit architectures.
//!
//! Qudits that enter a gate in the fresh state `|0⟩` are marked as such, and
//! only the gate columns reachable from those inputs are stored: a gate on
//! qudits with dimensions `q_1, …, q_r` is a `(Π q) × (Π live q)` matrix whose
//! row index is the mixed-radix number of the outputs (first qudit most
//! significant) and whose column index is the mixed-radix number of the live
//! inputs. For Haar gates these columns are a Haar isometry, which has the same
//! law as the corresponding columns of a Haar unitary.
//!
//! Staircase qudit order: `p_1, …, p_{N−1}, a` with `a` the auxiliary leg.
//! Gate `i` acts on `(p_i, a)`.
//!
//! Glued qudit order: `f_0, l_1, p_1, r_1, l_2, p_2, r_2, …, r_{N_A}, f_1`.
//! Layer 1 applies `V_j ∈ U(dχ²)` to `(l_j, p_j, r_j)`; layer 2 applies
//! `W_j ∈ U(χ²)` to `(r_j, l_{j+1})` and edge gates in `U(χ²)` to `(f_0, l_1)`
//! and `(r_{N_A}, f_1)`, where `f_0, f_1` are extra fresh `χ`-qudits.

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tensorstate::haar::{gaussian_matrix, haar_isometry};
use crate::tensorstate::{MpsState, RegionLayout};
use crate::weingarten::EnsembleKind;
use crate::Setup;

/// A gate restricted to its live input columns.
#[derive(Debug, Clone)]
pub struct Gate {
    pub qudits: Vec<usize>,
    /// Per qudit in `qudits`: whether it enters in the fresh state `|0⟩`.
    pub fresh: Vec<bool>,
    pub matrix: Array2<Complex64>,
}

/// A sampled circuit together with its chain grouping.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub kind: EnsembleKind,
    pub d: usize,
    pub chi: usize,
    pub qudit_dims: Vec<usize>,
    /// Gates in application order.
    pub gates: Vec<Gate>,
    /// Qudits forming each chain site; sites are contiguous in qudit order.
    pub sites: Vec<Vec<usize>>,
    pub layout: RegionLayout,
}

fn check_dims(d: usize, chi: usize) -> Result<()> {
    if d < 2 || chi < 1 {
        return Err(Error::Shape(format!("need d ≥ 2 and χ ≥ 1, got d={d}, χ={chi}")));
    }
    Ok(())
}

fn sample_gate<R: Rng + ?Sized>(rows: usize, cols: usize, kind: EnsembleKind, rng: &mut R) -> Result<Array2<Complex64>> {
    match kind {
        EnsembleKind::Haar => haar_isometry(rows, cols, rng),
        EnsembleKind::Gaussian { .. } => Ok(gaussian_matrix(rows, cols, kind.variance(rows as f64), rng)),
    }
}

impl Circuit {
    /// Sample a staircase circuit.
    pub fn staircase<R: Rng + ?Sized>(
        n_a: usize,
        n_b: usize,
        d: usize,
        chi: usize,
        kind: EnsembleKind,
        rng: &mut R,
    ) -> Result<Self> {
        check_dims(d, chi)?;
        kind.validate()?;
        if n_a == 0 || n_b == 0 {
            return Err(Error::Shape(format!("staircase needs N_A ≥ 1 and N_B ≥ 1, got {n_a}, {n_b}")));
        }
        let n_gates = n_a + n_b - 1;
        let aux = n_gates;
        let mut qudit_dims = vec![d; n_gates];
        qudit_dims.push(chi);
        let mut gates = Vec::with_capacity(n_gates);
        for i in 0..n_gates {
            let cols = if i == 0 { 1 } else { chi };
            gates.push(Gate {
                qudits: vec![i, aux],
                fresh: vec![true, i == 0],
                matrix: sample_gate(d * chi, cols, kind, rng)?,
            });
        }
        let sites = (0..=n_gates).map(|q| vec![q]).collect();
        Ok(Circuit { kind, d, chi, qudit_dims, gates, sites, layout: RegionLayout::staircase(n_a, n_b) })
    }

    /// Sample a glued shallow circuit.
    pub fn glued<R: Rng + ?Sized>(n_a: usize, d: usize, chi: usize, kind: EnsembleKind, rng: &mut R) -> Result<Self> {
        check_dims(d, chi)?;
        kind.validate()?;
        if n_a == 0 {
            return Err(Error::Shape("glued circuit needs N_A ≥ 1".into()));
        }
        // qudit indices
        let left = |j: usize| 1 + 3 * j;
        let phys = |j: usize| 2 + 3 * j;
        let right = |j: usize| 3 + 3 * j;
        let f0 = 0;
        let f1 = 3 * n_a + 1;
        let mut qudit_dims = vec![chi];
        for _ in 0..n_a {
            qudit_dims.extend([chi, d, chi]);
        }
        qudit_dims.push(chi);

        let mut gates = Vec::with_capacity(2 * n_a + 1);
        for j in 0..n_a {
            gates.push(Gate {
                qudits: vec![left(j), phys(j), right(j)],
                fresh: vec![true, true, true],
                matrix: sample_gate(d * chi * chi, 1, kind, rng)?,
            });
        }
        gates.push(Gate {
            qudits: vec![f0, left(0)],
            fresh: vec![true, false],
            matrix: sample_gate(chi * chi, chi, kind, rng)?,
        });
        for j in 0..n_a - 1 {
            gates.push(Gate {
                qudits: vec![right(j), left(j + 1)],
                fresh: vec![false, false],
                matrix: sample_gate(chi * chi, chi * chi, kind, rng)?,
            });
        }
        gates.push(Gate {
            qudits: vec![right(n_a - 1), f1],
            fresh: vec![false, true],
            matrix: sample_gate(chi * chi, chi, kind, rng)?,
        });

        let mut sites = vec![vec![f0, left(0)]];
        for j in 0..n_a {
            sites.push(vec![phys(j)]);
            let next = if j + 1 < n_a { left(j + 1) } else { f1 };
            sites.push(vec![right(j), next]);
        }
        Ok(Circuit { kind, d, chi, qudit_dims, gates, sites, layout: RegionLayout::glued(n_a) })
    }

    pub fn setup(&self) -> Setup {
        self.layout.setup
    }

    /// Physical dimension of each chain site.
    pub fn site_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.iter().map(|&q| self.qudit_dims[q]).product()).collect()
    }

    /// Read the MPS tensors off the gate matrices.
    pub fn to_mps(&self) -> Result<MpsState> {
        match self.setup() {
            Setup::Staircase => self.staircase_mps(),
            Setup::Glued => self.glued_mps(),
        }
    }

    fn staircase_mps(&self) -> Result<MpsState> {
        let (d, chi) = (self.d, self.chi);
        let mut tensors = Vec::with_capacity(self.gates.len() + 1);
        for gate in &self.gates {
            let u = &gate.matrix;
            let l_dim = u.ncols();
            // M[l, z, r] = U[z·χ + r, l]
            tensors.push(Array3::from_shape_fn((l_dim, d, chi), |(l, z, r)| u[[z * chi + r, l]]));
        }
        tensors.push(Array3::from_shape_fn((chi, chi, 1), |(l, b, _)| {
            if l == b {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }));
        MpsState::new(tensors)
    }

    fn glued_mps(&self) -> Result<MpsState> {
        let (d, chi) = (self.d, self.chi);
        let n_a = self.layout.n_a;
        let chi2 = chi * chi;
        let blocks = &self.gates[..n_a];
        let edge0 = &self.gates[n_a].matrix;
        let glue = &self.gates[n_a + 1..2 * n_a];
        let edge1 = &self.gates[2 * n_a].matrix;

        let mut tensors = Vec::with_capacity(2 * n_a + 1);
        // B_0[0, b, l] = E_0[b, l]
        tensors.push(Array3::from_shape_fn((1, chi2, chi), |(_, b, l)| edge0[[b, l]]));
        for j in 0..n_a {
            let v = &blocks[j].matrix;
            // A_j[l, p, r] = V_j[(l·d + p)·χ + r, 0]
            tensors.push(Array3::from_shape_fn((chi, d, chi), |(l, p, r)| v[[(l * d + p) * chi + r, 0]]));
            if j + 1 < n_a {
                let w = &glue[j].matrix;
                // B_j[r, b, l'] = W_j[b, r·χ + l']
                tensors.push(Array3::from_shape_fn((chi, chi2, chi), |(r, b, l)| w[[b, r * chi + l]]));
            } else {
                // B_N[r, b, 0] = E_N[b, r]
                tensors.push(Array3::from_shape_fn((chi, chi2, 1), |(r, b, _)| edge1[[b, r]]));
            }
        }
        MpsState::new(tensors)
    }
}
