//! Brute-force statevector simulation of the sampled circuits.
//!
//! Gates are applied to the full register directly, without any tensor-network
//! structure, and the projected ensemble is enumerated outcome by outcome.
//! This is the reference the MPS code and the replica engine are checked
//! against on tiny systems.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::EnsembleConfig;
use crate::tensorstate::circuit::{Circuit, Gate};
use crate::tensorstate::{overlap, SiteRole};

/// Largest register dimension the oracle will allocate.
pub const MAX_ORACLE_DIM: usize = 1 << 24;

/// Apply every gate of `circuit` to `|0…0⟩`.
pub fn dense_state(circuit: &Circuit) -> Result<Vec<Complex64>> {
    let total: usize = circuit.qudit_dims.iter().product();
    if total > MAX_ORACLE_DIM {
        return Err(Error::SizeLimit(format!("register dimension {total} exceeds {MAX_ORACLE_DIM}")));
    }
    let mut psi = vec![Complex64::new(0.0, 0.0); total];
    psi[0] = Complex64::new(1.0, 0.0);
    let strides = strides(&circuit.qudit_dims);
    for gate in &circuit.gates {
        apply_gate(&mut psi, &circuit.qudit_dims, &strides, gate);
    }
    Ok(psi)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

fn apply_gate(psi: &mut [Complex64], dims: &[usize], strides: &[usize], gate: &Gate) {
    let gdims: Vec<usize> = gate.qudits.iter().map(|&q| dims[q]).collect();
    let out_dim: usize = gdims.iter().product();
    // offsets of every output configuration and of every live-input configuration
    let out_offsets = mixed_radix_offsets(&gdims, &gate.qudits, strides, None);
    let live: Vec<bool> = gate.fresh.iter().map(|f| !f).collect();
    let in_offsets = mixed_radix_offsets(&gdims, &gate.qudits, strides, Some(&live));
    debug_assert_eq!(gate.matrix.dim(), (out_dim, in_offsets.len()));

    let mut input = vec![Complex64::new(0.0, 0.0); in_offsets.len()];
    for base in 0..psi.len() {
        // visit each base index where all gate qudits are zero
        if gate.qudits.iter().zip(&gdims).any(|(&q, &g)| !(base / strides[q]).is_multiple_of(g)) {
            continue;
        }
        for (x, &o) in input.iter_mut().zip(&in_offsets) {
            *x = psi[base + o];
        }
        for (row, &o) in out_offsets.iter().enumerate() {
            psi[base + o] = gate.matrix.row(row).iter().zip(&input).map(|(u, x)| u * x).sum();
        }
    }
}

/// Register offsets of all configurations of the gate qudits (mixed radix,
/// first qudit most significant); with `mask`, only the masked qudits vary.
fn mixed_radix_offsets(gdims: &[usize], qudits: &[usize], strides: &[usize], mask: Option<&[bool]>) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for (i, (&g, &q)) in gdims.iter().zip(qudits).enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        offsets = offsets.iter().flat_map(|&o| (0..g).map(move |v| o + v * strides[q])).collect();
    }
    offsets
}

/// One member of the projected ensemble.
#[derive(Debug, Clone)]
pub struct OracleEntry {
    pub outcomes: Vec<usize>,
    /// `p(z_B) = ⟨ψ̃|ψ̃⟩`.
    pub probability: f64,
    /// Unnormalized post-measurement state `ψ̃(z_B)` on `A`.
    pub amplitudes: Vec<Complex64>,
}

impl OracleEntry {
    pub fn post_state(&self) -> Vec<Complex64> {
        let n = self.probability.sqrt();
        self.amplitudes.iter().map(|a| a / n).collect()
    }
}

/// The full projected ensemble of one state.
#[derive(Debug, Clone)]
pub struct ProjectedEnsemble {
    pub d_a: usize,
    pub entries: Vec<OracleEntry>,
}

impl ProjectedEnsemble {
    /// Split a dense chain state into region `A` and the outcomes on `B`.
    pub fn from_dense(psi: &[Complex64], site_dims: &[usize], roles: &[SiteRole]) -> Result<Self> {
        let total: usize = site_dims.iter().product();
        if psi.len() != total || roles.len() != site_dims.len() {
            return Err(Error::Shape("dense state does not match the site layout".into()));
        }
        let s = strides(site_dims);
        let a_sites: Vec<usize> = (0..roles.len()).filter(|&i| roles[i] == SiteRole::A).collect();
        let b_sites: Vec<usize> = (0..roles.len()).filter(|&i| roles[i] == SiteRole::B).collect();
        let a_dims: Vec<usize> = a_sites.iter().map(|&i| site_dims[i]).collect();
        let b_dims: Vec<usize> = b_sites.iter().map(|&i| site_dims[i]).collect();
        let a_offsets = mixed_radix_offsets(&a_dims, &a_sites, &s, None);
        let b_offsets = mixed_radix_offsets(&b_dims, &b_sites, &s, None);
        let b_strides = strides(&b_dims);
        let entries = b_offsets
            .iter()
            .enumerate()
            .map(|(zi, &bo)| {
                let amplitudes: Vec<Complex64> = a_offsets.iter().map(|&ao| psi[bo + ao]).collect();
                let probability = amplitudes.iter().map(|a| a.norm_sqr()).sum();
                let outcomes = b_dims.iter().zip(&b_strides).map(|(&g, &st)| (zi / st) % g).collect();
                OracleEntry { outcomes, probability, amplitudes }
            })
            .collect();
        Ok(ProjectedEnsemble { d_a: a_offsets.len(), entries })
    }

    /// Simulate `circuit` densely and enumerate its projected ensemble.
    pub fn from_circuit(circuit: &Circuit) -> Result<Self> {
        let psi = dense_state(circuit)?;
        Self::from_dense(&psi, &circuit.site_dims(), &circuit.layout.roles)
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// `F^(k) = Σ_{z z'} p(z) p(z') |⟨ψ(z)|ψ(z')⟩|^{2k}` over normalized states.
    pub fn frame_potential(&self, k: u32) -> f64 {
        self.double_sum(|e, f| {
            if e.probability == 0.0 || f.probability == 0.0 {
                return 0.0;
            }
            let o = overlap(&e.amplitudes, &f.amplitudes).expect("equal lengths").norm_sqr();
            let (p, q) = (e.probability, f.probability);
            p * q * (o / (p * q)).powi(k as i32)
        })
    }

    /// `F^(k,n) = Σ_{z z'} (p(z) p(z'))^n |⟨ψ̃(z)|ψ̃(z')⟩|^{2k}` over the
    /// unnormalized states; `n = 1 − k` gives [`frame_potential`](Self::frame_potential).
    pub fn generalized_frame_potential(&self, k: u32, n: i32) -> f64 {
        self.double_sum(|e, f| {
            let pq = e.probability * f.probability;
            if pq == 0.0 {
                return 0.0;
            }
            let o = overlap(&e.amplitudes, &f.amplitudes).expect("equal lengths").norm_sqr();
            pq.powi(n) * o.powi(k as i32)
        })
    }

    /// `Tr ρ_A²` from the reduced density matrix `ρ_A = Σ_z ψ̃ ψ̃†`.
    pub fn purity(&self) -> f64 {
        let n = self.d_a;
        let mut rho = vec![Complex64::new(0.0, 0.0); n * n];
        for e in &self.entries {
            for i in 0..n {
                for j in 0..n {
                    rho[i * n + j] += e.amplitudes[i] * e.amplitudes[j].conj();
                }
            }
        }
        rho.iter().map(|z| z.norm_sqr()).sum()
    }

    fn double_sum(&self, f: impl Fn(&OracleEntry, &OracleEntry) -> f64) -> f64 {
        self.entries.iter().map(|e| self.entries.iter().map(|g| f(e, g)).sum::<f64>()).sum()
    }
}

/// Sample one circuit for `config` and enumerate its projected ensemble.
pub fn statevector_oracle<R: Rng + ?Sized>(config: &EnsembleConfig, rng: &mut R) -> Result<ProjectedEnsemble> {
    let circuit = config.sample_circuit(rng)?;
    ProjectedEnsemble::from_circuit(&circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::weingarten::EnsembleKind;

    #[test]
    fn probabilities_sum_to_one() {
        for seed in 0..5 {
            let mut rng = stream_rng(seed, 0);
            let c = Circuit::staircase(2, 2, 2, 2, EnsembleKind::Haar, &mut rng).unwrap();
            let ens = ProjectedEnsemble::from_circuit(&c).unwrap();
            assert!((ens.total_probability() - 1.0).abs() < 1e-12);
            let c = Circuit::glued(2, 2, 2, EnsembleKind::Haar, &mut rng).unwrap();
            let ens = ProjectedEnsemble::from_circuit(&c).unwrap();
            assert!((ens.total_probability() - 1.0).abs() < 1e-12);
            assert_eq!(ens.entries.len(), 64);
        }
    }

    #[test]
    fn first_frame_potential_is_purity() {
        for seed in 0..5 {
            let mut rng = stream_rng(seed, 1);
            let c = Circuit::staircase(2, 3, 2, 3, EnsembleKind::Haar, &mut rng).unwrap();
            let ens = ProjectedEnsemble::from_circuit(&c).unwrap();
            assert!((ens.frame_potential(1) - ens.purity()).abs() < 1e-10);
            let c = Circuit::glued(2, 2, 2, EnsembleKind::Haar, &mut rng).unwrap();
            let ens = ProjectedEnsemble::from_circuit(&c).unwrap();
            assert!((ens.frame_potential(1) - ens.purity()).abs() < 1e-10);
        }
    }

    #[test]
    fn generalized_reduces_to_physical_at_replica_limit() {
        let mut rng = stream_rng(3, 2);
        let c = Circuit::staircase(2, 2, 2, 2, EnsembleKind::Haar, &mut rng).unwrap();
        let ens = ProjectedEnsemble::from_circuit(&c).unwrap();
        for k in 1..4u32 {
            let a = ens.frame_potential(k);
            let b = ens.generalized_frame_potential(k, 1 - k as i32);
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn dense_state_matches_mps_contraction() {
        for seed in 0..3 {
            let mut rng = stream_rng(seed, 3);
            for c in [
                Circuit::staircase(2, 3, 2, 3, EnsembleKind::Haar, &mut rng).unwrap(),
                Circuit::glued(2, 2, 2, EnsembleKind::Haar, &mut rng).unwrap(),
                Circuit::glued(1, 3, 2, EnsembleKind::GAUSSIAN, &mut rng).unwrap(),
            ] {
                let dense = dense_state(&c).unwrap();
                let from_mps = c.to_mps().unwrap().to_dense().unwrap();
                let err = dense.iter().zip(&from_mps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-12, "{err}");
            }
        }
    }

    #[test]
    fn size_cap_enforced() {
        let mut rng = stream_rng(0, 0);
        let c = Circuit::staircase(20, 10, 2, 2, EnsembleKind::Haar, &mut rng).unwrap();
        assert!(matches!(dense_state(&c), Err(Error::SizeLimit(_))));
    }
}
