//! Born-rule sampling of region `B` and post-measurement states on `A`.
//!
//! Outcomes are drawn right to left. Left environments
//! `E_s = Σ_{z} M(z)† E_{s−1} M(z)` (everything left of site `s` traced out)
//! are computed once per state. A sample then carries a right block `R` with
//! the measured outcomes fixed and the `A` indices to the right of the
//! current site kept open; the conditional weight of outcome `z` at a `B` site
//! is `Tr[(M(z) R)† E_s (M(z) R)]`. When the `A` sites form a prefix of the
//! chain (staircase) their contraction `Φ` is cached, so a sample only pays
//! for the `B` sites plus one `D_A × χ` product at the end.

use ndarray::{s, Array2, Axis};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tensorstate::{transfer_left, MeasurementRecord, MpsState, RegionLayout, SiteRole, MAX_DENSE_A};

/// Norm tolerance for the normalized-input precondition.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Largest cached `A`-prefix map, in complex entries.
const MAX_PREFIX_ENTRIES: usize = 1 << 23;

/// Reusable sampler for one normalized state.
pub struct BornSampler<'a> {
    mps: &'a MpsState,
    roles: Vec<SiteRole>,
    /// Left environment of every site (identity-like 1×1 at the left edge).
    envs: Vec<Array2<Complex64>>,
    /// Sites `0..prefix_len` are all `A` and contracted into `prefix`.
    prefix_len: usize,
    prefix: Option<Array2<Complex64>>,
    /// Conditional weights of the rightmost site when it is a `B` site.
    last_weights: Option<Vec<f64>>,
    d_a: usize,
}

impl<'a> BornSampler<'a> {
    pub fn new(mps: &'a MpsState, layout: &RegionLayout) -> Result<Self> {
        if layout.len() != mps.len() {
            return Err(Error::Shape(format!("layout has {} sites, state has {}", layout.len(), mps.len())));
        }
        let dims = mps.phys_dims();
        let d_a: usize = layout.a_sites().iter().map(|&i| dims[i]).product();
        if d_a > MAX_DENSE_A {
            return Err(Error::SizeLimit(format!("D_A = {d_a} exceeds {MAX_DENSE_A}")));
        }

        let mut envs = Vec::with_capacity(mps.len() + 1);
        envs.push(Array2::from_elem((1, 1), Complex64::new(1.0, 0.0)));
        for t in mps.tensors() {
            let next = transfer_left(envs.last().expect("non-empty"), t);
            envs.push(next);
        }
        let norm = envs[mps.len()][[0, 0]].re;
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Precondition(format!("Born sampling needs a normalized state, ⟨ψ|ψ⟩ = {norm}")));
        }
        envs.pop();

        let prefix_len = layout.roles.iter().take_while(|r| **r == SiteRole::A).count();
        let all_a_in_prefix = layout.roles[prefix_len..].iter().all(|r| *r == SiteRole::B);
        let prefix = if prefix_len > 0 && all_a_in_prefix {
            let chi = mps.tensors()[prefix_len - 1].dim().2;
            (d_a * chi <= MAX_PREFIX_ENTRIES).then(|| contract_prefix(mps, prefix_len))
        } else {
            None
        };
        let prefix_len = if prefix.is_some() { prefix_len } else { 0 };

        let mut sampler =
            BornSampler { mps, roles: layout.roles.clone(), envs, prefix_len, prefix, last_weights: None, d_a };
        let last = mps.len() - 1;
        if sampler.roles[last] == SiteRole::B && last >= sampler.prefix_len {
            let r = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
            sampler.last_weights = Some(sampler.weights(last, &r).0);
        }
        Ok(sampler)
    }

    /// Region-`A` dimension `D_A`.
    pub fn d_a(&self) -> usize {
        self.d_a
    }

    /// Draw one measurement record.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MeasurementRecord {
        self.sample_traced(rng, None)
    }

    /// Draw a record and report, for each `B` site in sampling order, how far
    /// the conditional weights summed from 1 before normalization.
    pub fn sample_with_defects<R: Rng + ?Sized>(&self, rng: &mut R) -> (MeasurementRecord, Vec<f64>) {
        let mut defects = Vec::new();
        let rec = self.sample_traced(rng, Some(&mut defects));
        (rec, defects)
    }

    fn sample_traced<R: Rng + ?Sized>(&self, rng: &mut R, mut defects: Option<&mut Vec<f64>>) -> MeasurementRecord {
        let tensors = self.mps.tensors();
        let mut right = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
        let mut outcomes_rev = Vec::new();
        let mut probability = 1.0;
        for s in (self.prefix_len..tensors.len()).rev() {
            match self.roles[s] {
                SiteRole::B => {
                    let (weights, y) = match (&self.last_weights, s == tensors.len() - 1) {
                        (Some(w), true) => (w.clone(), None),
                        _ => {
                            let (w, y) = self.weights(s, &right);
                            (w, Some(y))
                        }
                    };
                    let total: f64 = weights.iter().sum();
                    if let Some(d) = defects.as_deref_mut() {
                        d.push((total - 1.0).abs());
                    }
                    let z = draw(&weights, total, rng);
                    probability *= weights[z] / total;
                    let slice = match y {
                        Some(y) => y.slice(s![.., z, ..]).to_owned(),
                        None => tensors[s].slice(s![.., z, ..]).to_owned(),
                    };
                    right = slice.mapv(|c| c / weights[z].sqrt());
                    outcomes_rev.push(z);
                }
                SiteRole::A => {
                    let t = &tensors[s];
                    let (l, p, r) = t.dim();
                    let cols = right.ncols();
                    let flat = t.view().into_shape_with_order((l * p, r)).expect("contiguous tensor");
                    right = flat.dot(&right).into_shape_with_order((l, p * cols)).expect("contiguous product");
                }
            }
        }
        let amplitudes = match &self.prefix {
            Some(phi) => phi.dot(&right),
            None => right,
        };
        let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let post_state = amplitudes.iter().map(|c| c / norm).collect();
        outcomes_rev.reverse();
        MeasurementRecord { outcomes: outcomes_rev, probability, post_state }
    }

    /// Conditional weights at `B` site `s` given the right block, plus the
    /// products `M(z)·R` arranged as `(left, z, cols)`.
    fn weights(&self, s: usize, right: &Array2<Complex64>) -> (Vec<f64>, ndarray::Array3<Complex64>) {
        let t = &self.mps.tensors()[s];
        let (l, p, r) = t.dim();
        let cols = right.ncols();
        let flat = t.view().into_shape_with_order((l * p, r)).expect("contiguous tensor");
        let y = flat.dot(right).into_shape_with_order((l, p, cols)).expect("contiguous product");
        let env = &self.envs[s];
        let weights = (0..p)
            .map(|z| {
                let yz = y.index_axis(Axis(1), z);
                let ey = env.dot(&yz);
                yz.iter().zip(ey.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>().max(0.0)
            })
            .collect();
        (weights, y)
    }
}

fn draw<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // rounding at the top end: fall back to the last outcome with weight
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Contraction of sites `0..len` as a `(Π phys) × χ_len` matrix.
fn contract_prefix(mps: &MpsState, len: usize) -> Array2<Complex64> {
    let mut acc = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
    for t in &mps.tensors()[..len] {
        let (l, p, r) = t.dim();
        let mat = t.view().into_shape_with_order((l, p * r)).expect("contiguous tensor");
        let next = acc.dot(&mat);
        let rows = next.nrows() * p;
        acc = next.into_shape_with_order((rows, r)).expect("contiguous product");
    }
    acc
}

/// One Born-rule measurement of region `B`.
pub fn born_sample<R: Rng + ?Sized>(state: &MpsState, layout: &RegionLayout, rng: &mut R) -> Result<MeasurementRecord> {
    Ok(BornSampler::new(state, layout)?.sample(rng))
}

/// Unnormalized post-measurement state `ψ̃(z_B)` on `A` for fixed outcomes
/// (one per `B` site, chain order). Works for unnormalized states.
pub fn project_outcomes(state: &MpsState, layout: &RegionLayout, outcomes: &[usize]) -> Result<Vec<Complex64>> {
    let b_sites = layout.b_sites();
    if outcomes.len() != b_sites.len() || layout.len() != state.len() {
        return Err(Error::Shape(format!("{} outcomes for {} measured sites", outcomes.len(), b_sites.len())));
    }
    let mut right = Array2::from_elem((1, 1), Complex64::new(1.0, 0.0));
    let mut next_outcome = outcomes.len();
    for (s, t) in state.tensors().iter().enumerate().rev() {
        let (l, p, r) = t.dim();
        match layout.roles[s] {
            SiteRole::B => {
                next_outcome -= 1;
                let z = outcomes[next_outcome];
                if z >= p {
                    return Err(Error::Shape(format!("outcome {z} at a site of dimension {p}")));
                }
                right = t.slice(s![.., z, ..]).dot(&right);
            }
            SiteRole::A => {
                let cols = right.ncols();
                let flat = t.view().into_shape_with_order((l * p, r)).expect("contiguous tensor");
                right = flat.dot(&right).into_shape_with_order((l, p * cols)).expect("contiguous product");
            }
        }
    }
    Ok(right.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use crate::tensorstate::circuit::Circuit;
    use crate::tensorstate::oracle::ProjectedEnsemble;
    use crate::tensorstate::overlap;
    use crate::weingarten::EnsembleKind;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn product_state_always_gives_zeros() {
        let mps = MpsState::product_zero(&[2, 2, 3, 3]).unwrap();
        let layout = RegionLayout::staircase(2, 2);
        let mut rng = stream_rng(0, 0);
        for _ in 0..20 {
            let rec = born_sample(&mps, &layout, &mut rng).unwrap();
            assert_eq!(rec.outcomes, vec![0, 0]);
            assert_eq!(rec.probability, 1.0);
            assert!((rec.post_state[0].re - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn probabilities_and_states_match_oracle() {
        for seed in 0..4 {
            let mut rng = stream_rng(seed, 7);
            for c in [
                Circuit::staircase(2, 2, 2, 2, EnsembleKind::Haar, &mut rng).unwrap(),
                Circuit::staircase(1, 3, 3, 2, EnsembleKind::Haar, &mut rng).unwrap(),
                Circuit::glued(2, 2, 2, EnsembleKind::Haar, &mut rng).unwrap(),
            ] {
                let ens = ProjectedEnsemble::from_circuit(&c).unwrap();
                let mps = c.to_mps().unwrap();
                let sampler = BornSampler::new(&mps, &c.layout).unwrap();
                let mut total = 0.0;
                for e in &ens.entries {
                    let amp = project_outcomes(&mps, &c.layout, &e.outcomes).unwrap();
                    let p: f64 = amp.iter().map(|a| a.norm_sqr()).sum();
                    assert!((p - e.probability).abs() < 1e-10);
                    total += p;
                    let diff = amp.iter().zip(&e.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    assert!(diff < 1e-12);
                }
                assert!((total - 1.0).abs() < 1e-10);
                for _ in 0..50 {
                    let rec = sampler.sample(&mut rng);
                    let e = ens.entries.iter().find(|e| e.outcomes == rec.outcomes).unwrap();
                    assert!((rec.probability - e.probability).abs() < 1e-10);
                    let o = overlap(&rec.post_state, &e.post_state()).unwrap().norm_sqr();
                    assert!((o - 1.0).abs() < 1e-10);
                    assert!((overlap(&rec.post_state, &rec.post_state).unwrap().norm_sqr() - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn gaussian_projections_match_oracle() {
        let mut rng = stream_rng(1, 8);
        let c = Circuit::glued(2, 2, 2, EnsembleKind::GAUSSIAN, &mut rng).unwrap();
        let ens = ProjectedEnsemble::from_circuit(&c).unwrap();
        let mps = c.to_mps().unwrap();
        for e in &ens.entries {
            let amp = project_outcomes(&mps, &c.layout, &e.outcomes).unwrap();
            let diff = amp.iter().zip(&e.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
        assert!(BornSampler::new(&mps, &c.layout).is_err());
    }

    #[test]
    fn conditional_weights_are_consistent() {
        let mut rng = stream_rng(2, 9);
        let c = Circuit::staircase(3, 5, 2, 4, EnsembleKind::Haar, &mut rng).unwrap();
        let mps = c.to_mps().unwrap();
        let sampler = BornSampler::new(&mps, &c.layout).unwrap();
        for _ in 0..100 {
            let (_, defects) = sampler.sample_with_defects(&mut rng);
            assert!(defects.iter().all(|&d| d < 1e-12), "{defects:?}");
        }
        let c = Circuit::glued(3, 2, 2, EnsembleKind::Haar, &mut rng).unwrap();
        let mps = c.to_mps().unwrap();
        let sampler = BornSampler::new(&mps, &c.layout).unwrap();
        for _ in 0..100 {
            let (_, defects) = sampler.sample_with_defects(&mut rng);
            assert!(defects.iter().all(|&d| d < 1e-12), "{defects:?}");
        }
    }

    #[test]
    fn frequencies_pass_chi_squared() {
        let mut rng = stream_rng(3, 10);
        let c = Circuit::staircase(2, 2, 2, 2, EnsembleKind::Haar, &mut rng).unwrap();
        let ens = ProjectedEnsemble::from_circuit(&c).unwrap();
        let mps = c.to_mps().unwrap();
        let sampler = BornSampler::new(&mps, &c.layout).unwrap();
        let draws = 100_000;
        let mut counts = vec![0usize; ens.entries.len()];
        for _ in 0..draws {
            let rec = sampler.sample(&mut rng);
            let idx = ens.entries.iter().position(|e| e.outcomes == rec.outcomes).unwrap();
            counts[idx] += 1;
        }
        let stat: f64 = ens
            .entries
            .iter()
            .zip(&counts)
            .map(|(e, &c)| {
                let expected = e.probability * draws as f64;
                (c as f64 - expected).powi(2) / expected
            })
            .sum();
        let dof = (ens.entries.len() - 1) as f64;
        let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
        assert!(p > 0.001, "chi2 = {stat}, p = {p}");
    }

    #[test]
    fn rejects_unnormalized_and_oversized() {
        let mut rng = stream_rng(4, 11);
        let (mps, layout) = crate::tensorstate::build_staircase(2, 2, 2, 3, EnsembleKind::GAUSSIAN, &mut rng).unwrap();
        assert!(matches!(BornSampler::new(&mps, &layout), Err(Error::Precondition(_))));
        let big = MpsState::product_zero(&[2; 22]).unwrap();
        let layout = RegionLayout::staircase(21, 1);
        assert!(matches!(BornSampler::new(&big, &layout), Err(Error::SizeLimit(_))));
    }
}
