//! Exact circuit averages as permutation-chain partition functions.
//!
//! Averaging `m = 2(n + k)` replicas of a random circuit turns the
//! generalized frame potential into
//!
//! ```text
//! E F^(k,n) = e^{log_prefactor} · v_Lᵀ S_1 B_1 S_2 B_2 … B_{L−1} S_L v_R
//! ```
//!
//! with diagonal site weights `S_i` and bond matrices `B_i` over `S_m`.
//!
//! Staircase: one site per gate, `S_i = υ_A` for the `N_A` gates whose
//! physical output lies in `A` and `υ_B` for the rest, bonds
//! `T = W(dχ)·G(χ)`, `v_R` the weight of the exposed `χ`-leg and prefactor
//! `c^W(dχ)` (the row sum of the first gate's Weingarten matrix).
//!
//! Glued: sites `B_0, A_1, B_1, …, A_{N_A}, B_{N_A}`, every gap a `G(χ)`
//! bond, both boundaries all-ones.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::estimator::EnsembleConfig;
use crate::numeric::LogValue;
use crate::permgroup::{sigma_a, ReplicaShape, SymmetricGroup, MAX_DENSE_M};
use crate::weingarten::{
    gram_matrix, interaction_matrix, matrix_free, weingarten_matrix, weingarten_sum_constant, EnsembleKind,
    PermIndexedMatrix,
};
use crate::Setup;

/// A diagonal operator over `S_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteWeight {
    pub values: Vec<f64>,
}

impl SiteWeight {
    pub fn ones(m: usize) -> Result<Self> {
        Ok(SiteWeight { values: vec![1.0; SymmetricGroup::get(m)?.order()] })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SiteWeight { values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// `υ_A(σ) = d^{m − d(σ, σ_A)}`.
pub fn site_weight_a(shape: ReplicaShape, d: usize) -> Result<SiteWeight> {
    let group = SymmetricGroup::get(shape.m())?;
    let m = shape.m() as i32;
    let dist = group.distances_to(&sigma_a(shape));
    Ok(SiteWeight { values: dist.iter().map(|&x| (d as f64).powi(m - x as i32)).collect() })
}

/// `υ_B(σ) = d²` on factorized permutations, `d` otherwise.
pub fn site_weight_b_staircase(shape: ReplicaShape, d: usize) -> Result<SiteWeight> {
    factorized_weight(shape.m(), (d * d) as f64, d as f64)
}

fn factorized_weight(m: usize, on: f64, off: f64) -> Result<SiteWeight> {
    let mask = SymmetricGroup::get(m)?.factorized_mask();
    Ok(SiteWeight { values: mask.iter().map(|&f| if f { on } else { off }).collect() })
}

/// Measured `χ²` site of the glued chain:
/// `b(σ) = Σ_{σ'} W_{σ'σ}(χ²)·[χ⁴ if σ' factorized else χ²]` for Haar and
/// `ς^{2m}·[χ⁴ or χ²]` for Gaussian.
pub fn site_weight_b_glued(shape: ReplicaShape, chi: usize, kind: EnsembleKind) -> Result<SiteWeight> {
    let m = shape.m();
    let c2 = (chi * chi) as f64;
    let full = factorized_weight(m, c2 * c2, c2)?;
    match kind {
        EnsembleKind::Haar => {
            let values = if m <= MAX_DENSE_M {
                weingarten_matrix(m, c2)?.matvec(&full.values)?
            } else {
                matrix_free::weingarten_apply(m, c2, &full.values)?
            };
            Ok(SiteWeight { values })
        }
        EnsembleKind::Gaussian { .. } => Ok(full.scaled(kind.variance(c2).powi(m as i32))),
    }
}

/// Which bond operator sits in a gap of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondSelector {
    /// `T(χ, d)`: `W(dχ)·G(χ)` (Haar) or `ς^{2m}·G(χ)` (Gaussian).
    StaircaseBulk,
    /// `G(χ)`.
    GluedAtoB,
    Identity,
}

/// Dense bond matrix for a selector.
pub fn bond_matrix(
    shape: ReplicaShape,
    chi: usize,
    d: usize,
    kind: EnsembleKind,
    location: BondSelector,
) -> Result<PermIndexedMatrix> {
    let m = shape.m();
    match location {
        BondSelector::StaircaseBulk => interaction_matrix(m, chi, d, kind),
        BondSelector::GluedAtoB => gram_matrix(m, chi as f64),
        BondSelector::Identity => PermIndexedMatrix::identity(m),
    }
}

/// Left and right boundary vectors of the chain for `setup`.
///
/// Left is all ones. The staircase right vector is the weight of the exposed
/// auxiliary leg, `χ²` on factorized permutations and `χ` otherwise; the
/// glued chain ends in measured sites, so its right vector is all ones.
pub fn boundary_vectors(setup: Setup, shape: ReplicaShape, chi: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = shape.m();
    let ones = SiteWeight::ones(m)?.values;
    let right = match setup {
        Setup::Staircase => factorized_weight(m, (chi * chi) as f64, chi as f64)?.values,
        Setup::Glued => ones.clone(),
    };
    Ok((ones, right))
}

/// The staircase right vector with the last gate folded in:
/// `(v_R)_π = Σ_{π'} W_{ππ'}(dχ)·[d²χ² if π' factorized else dχ]`
/// (Gaussian: `W → ς^{2m}·1`). With it,
/// `E F = c^W · 1ᵀ S_1 T S_2 … T S_{G−1} G(χ) v_R` for a chain of `G` gates.
pub fn folded_right_vector(shape: ReplicaShape, chi: usize, d: usize, kind: EnsembleKind) -> Result<Vec<f64>> {
    let m = shape.m();
    let q = (d * chi) as f64;
    let last = factorized_weight(m, q * q, q)?;
    match kind {
        EnsembleKind::Haar if m <= MAX_DENSE_M => weingarten_matrix(m, q)?.matvec(&last.values),
        EnsembleKind::Haar => matrix_free::weingarten_apply(m, q, &last.values),
        EnsembleKind::Gaussian { .. } => Ok(last.scaled(kind.variance(q).powi(m as i32)).values),
    }
}

/// Declarative permutation-chain partition function.
#[derive(Debug, Clone)]
pub struct ReplicaChainSpec {
    pub shape: ReplicaShape,
    pub chi: usize,
    pub d: usize,
    pub kind: EnsembleKind,
    pub sites: Vec<SiteWeight>,
    pub bonds: Vec<BondSelector>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Natural log of a scalar multiplying the whole chain.
    pub log_prefactor: f64,
}

impl ReplicaChainSpec {
    /// Staircase chain with `N_A` kept and `N_B` measured sites (the last
    /// measured site being the `χ`-leg).
    pub fn staircase(
        shape: ReplicaShape,
        n_a: usize,
        n_b: usize,
        d: usize,
        chi: usize,
        kind: EnsembleKind,
    ) -> Result<Self> {
        check_params(n_a, d, chi, kind)?;
        if n_b == 0 {
            return Err(Error::Shape("staircase needs N_B ≥ 1".into()));
        }
        let gates = n_a + n_b - 1;
        let wa = site_weight_a(shape, d)?;
        let wb = site_weight_b_staircase(shape, d)?;
        let sites = (0..gates).map(|i| if i < n_a { wa.clone() } else { wb.clone() }).collect();
        let (left, right) = boundary_vectors(Setup::Staircase, shape, chi)?;
        let q = (d * chi) as f64;
        Ok(ReplicaChainSpec {
            shape,
            chi,
            d,
            kind,
            sites,
            bonds: vec![BondSelector::StaircaseBulk; gates - 1],
            left,
            right,
            log_prefactor: weingarten_sum_constant(shape.m(), q, kind).ln(),
        })
    }

    /// Glued chain `B A B … A B` with `N_A` kept sites.
    pub fn glued(shape: ReplicaShape, n_a: usize, d: usize, chi: usize, kind: EnsembleKind) -> Result<Self> {
        check_params(n_a, d, chi, kind)?;
        let m = shape.m();
        let c_a = weingarten_sum_constant(m, (d * chi * chi) as f64, kind);
        let wa = site_weight_a(shape, d)?.scaled(c_a);
        let wb = site_weight_b_glued(shape, chi, kind)?;
        let mut sites = vec![wb.clone()];
        for _ in 0..n_a {
            sites.push(wa.clone());
            sites.push(wb.clone());
        }
        let (left, right) = boundary_vectors(Setup::Glued, shape, chi)?;
        Ok(ReplicaChainSpec {
            shape,
            chi,
            d,
            kind,
            sites,
            bonds: vec![BondSelector::GluedAtoB; 2 * n_a],
            left,
            right,
            log_prefactor: 0.0,
        })
    }

    fn validate(&self) -> Result<usize> {
        let n = SymmetricGroup::get(self.shape.m())?.order();
        if self.sites.is_empty() || self.sites.len() != self.bonds.len() + 1 {
            return Err(Error::Shape(format!(
                "{} sites need {} bonds, got {}",
                self.sites.len(),
                self.sites.len().saturating_sub(1),
                self.bonds.len()
            )));
        }
        let bad = self.sites.iter().any(|s| s.values.len() != n) || self.left.len() != n || self.right.len() != n;
        if bad {
            return Err(Error::Shape(format!("all chain vectors must have length m! = {n}")));
        }
        Ok(n)
    }
}

fn check_params(n_a: usize, d: usize, chi: usize, kind: EnsembleKind) -> Result<()> {
    kind.validate()?;
    if n_a == 0 || d < 2 || chi == 0 {
        return Err(Error::Shape(format!("need N_A ≥ 1, d ≥ 2, χ ≥ 1 (got {n_a}, {d}, {chi})")));
    }
    Ok(())
}

/// How bond operators are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionPath {
    /// Dense for `m ≤ 6`, matrix-free above.
    Auto,
    Dense,
    MatrixFree,
}

enum BondOp {
    Dense(PermIndexedMatrix),
    Free { selector: BondSelector, m: usize, chi: f64, q: f64, kind: EnsembleKind },
}

impl BondOp {
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        match self {
            BondOp::Dense(mat) => mat.matvec(v),
            BondOp::Free { selector, m, chi, q, kind } => match selector {
                BondSelector::Identity => Ok(v.to_vec()),
                BondSelector::GluedAtoB => matrix_free::gram_apply(*m, *chi, v),
                BondSelector::StaircaseBulk => {
                    let g = matrix_free::gram_apply(*m, *chi, v)?;
                    match kind {
                        EnsembleKind::Haar => matrix_free::weingarten_apply(*m, *q, &g),
                        EnsembleKind::Gaussian { .. } => {
                            let s = kind.variance(*q).powi(*m as i32);
                            Ok(g.iter().map(|x| x * s).collect())
                        }
                    }
                }
            },
        }
    }
}

/// Contract with the default path.
pub fn contract(spec: &ReplicaChainSpec) -> Result<LogValue> {
    contract_with(spec, ContractionPath::Auto)
}

/// `v_Lᵀ S_1 B_1 … B_{L−1} S_L v_R` by right-to-left matrix-vector
/// products, rescaling to unit max-norm after every step.
pub fn contract_with(spec: &ReplicaChainSpec, path: ContractionPath) -> Result<LogValue> {
    spec.validate()?;
    let m = spec.shape.m();
    let dense = match path {
        ContractionPath::Auto => m <= MAX_DENSE_M,
        ContractionPath::Dense => true,
        ContractionPath::MatrixFree => false,
    };
    let mut ops: HashMap<BondSelector, BondOp> = HashMap::new();
    for &sel in &spec.bonds {
        if ops.contains_key(&sel) {
            continue;
        }
        let op = if dense {
            BondOp::Dense(bond_matrix(spec.shape, spec.chi, spec.d, spec.kind, sel)?)
        } else {
            BondOp::Free { selector: sel, m, chi: spec.chi as f64, q: (spec.d * spec.chi) as f64, kind: spec.kind }
        };
        ops.insert(sel, op);
    }

    let mut log_scale = spec.log_prefactor;
    let mut v = spec.right.clone();
    for i in (0..spec.sites.len()).rev() {
        for (x, w) in v.iter_mut().zip(&spec.sites[i].values) {
            *x *= w;
        }
        if i > 0 {
            v = ops[&spec.bonds[i - 1]].apply(&v)?;
        }
        let s = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if s == 0.0 {
            return Ok(LogValue::new(0.0, 0.0));
        }
        v.iter_mut().for_each(|x| *x /= s);
        log_scale += s.ln();
    }
    let mantissa: f64 = spec.left.iter().zip(&v).map(|(a, b)| a * b).sum();
    Ok(LogValue::new(mantissa, log_scale))
}

/// `E F^(k,n)` for a setup. `n_b` is ignored for the glued chain.
#[allow(clippy::too_many_arguments)]
pub fn frame_potential(
    setup: Setup,
    shape: ReplicaShape,
    n_a: usize,
    n_b: usize,
    d: usize,
    chi: usize,
    kind: EnsembleKind,
) -> Result<LogValue> {
    let spec = match setup {
        Setup::Staircase => ReplicaChainSpec::staircase(shape, n_a, n_b, d, chi, kind)?,
        Setup::Glued => ReplicaChainSpec::glued(shape, n_a, d, chi, kind)?,
    };
    contract(&spec)
}

/// `E F^(k,n)` for `k = config.k_max` and `n = config.n`.
pub fn generalized_frame_potential(config: &EnsembleConfig) -> Result<LogValue> {
    if config.n < 0 {
        return Err(Error::Unsupported(format!(
            "n = {} < 0: the replica limit is only available as a closed form",
            config.n
        )));
    }
    let shape = ReplicaShape::new(config.n as usize, config.k_max)?;
    frame_potential(config.setup, shape, config.n_a, config.n_b, config.d, config.chi, config.kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::ground_states;

    fn shape(n: usize, k: usize) -> ReplicaShape {
        ReplicaShape::new(n, k).unwrap()
    }

    #[test]
    fn site_weight_a_examples() {
        let sh = shape(1, 2);
        let w = site_weight_a(sh, 3).unwrap();
        let group = SymmetricGroup::get(sh.m()).unwrap();
        let sa = sigma_a(sh);
        assert_eq!(w.values[group.index_of(&sa)], 3f64.powi(6));
        for g in ground_states(sh).unwrap() {
            assert_eq!(w.values[group.index_of(&g)], 3f64.powi(4));
        }
        let mask = group.factorized_mask();
        let max_fact = w.values.iter().zip(&mask).filter(|(_, &f)| f).map(|(v, _)| *v).fold(0.0, f64::max);
        assert_eq!(max_fact, 3f64.powi(4));
    }

    #[test]
    fn site_weight_b_staircase_examples() {
        let sh = shape(0, 2);
        let w = site_weight_b_staircase(sh, 3).unwrap();
        assert_eq!(w.values[0], 9.0);
        let sa = sigma_a(sh);
        assert_eq!(w.values[sa.rank()], 3.0);
        assert_eq!(w.values.iter().filter(|&&v| v == 9.0).count(), 4);
    }

    #[test]
    fn site_weight_b_glued_examples() {
        let sh = shape(0, 2);
        let g = site_weight_b_glued(sh, 3, EnsembleKind::GAUSSIAN).unwrap();
        assert!((g.values[0] / 3f64.powi(-4) - 1.0).abs() < 1e-14);

        // Explicit 24×24 Weingarten product at χ = 2: χ⁴ = 16, χ² = 4.
        let h = site_weight_b_glued(sh, 2, EnsembleKind::Haar).unwrap();
        let w = weingarten_matrix(4, 4.0).unwrap();
        let mask = SymmetricGroup::get(4).unwrap().factorized_mask();
        for s in 0..24 {
            let terms: Vec<f64> = (0..24).map(|t| w.get(t, s) * if mask[t] { 16.0 } else { 4.0 }).collect();
            let scale: f64 = terms.iter().map(|x| x.abs()).sum();
            assert!((h.values[s] - terms.iter().sum::<f64>()).abs() <= 1e-12 * scale);
        }

        let chi = 1000;
        let h = site_weight_b_glued(sh, chi, EnsembleKind::Haar).unwrap();
        let g = site_weight_b_glued(sh, chi, EnsembleKind::GAUSSIAN).unwrap();
        // factorized entries agree up to O(χ⁻²); the others carry an O(1)
        // Weingarten correction from adjacent factorized permutations
        for ((a, b), f) in h.values.iter().zip(&g.values).zip(&mask) {
            if *f {
                assert!((a / b - 1.0).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn bond_matrix_examples() {
        let sh = shape(0, 2);
        let g1 = bond_matrix(sh, 1, 2, EnsembleKind::Haar, BondSelector::GluedAtoB).unwrap();
        assert!(g1.entries().iter().all(|&v| v == 1.0));
        let t = bond_matrix(sh, 1 << 20, 2, EnsembleKind::Haar, BondSelector::StaircaseBulk).unwrap();
        let id = PermIndexedMatrix::identity(4).unwrap().scaled(1.0 / 16.0);
        assert!(t.max_abs_diff(&id) < 1e-6 / 16.0);
        let c = weingarten_sum_constant(4, 8.0, EnsembleKind::Haar);
        assert!((c - 1.0 / (8.0 * 9.0 * 10.0 * 11.0)).abs() < 1e-18);
    }

    #[test]
    fn boundary_vector_examples() {
        for setup in [Setup::Staircase, Setup::Glued] {
            let (left, _) = boundary_vectors(setup, shape(1, 1), 5).unwrap();
            assert!(left.iter().all(|&v| v == 1.0));
        }
        // Gaussian folded right vector at large χ: 1_F · d²χ² ς^{2m}.
        let (d, chi) = (2usize, 4096usize);
        let sh = shape(0, 2);
        let v = folded_right_vector(sh, chi, d, EnsembleKind::GAUSSIAN).unwrap();
        let mask = SymmetricGroup::get(4).unwrap().factorized_mask();
        let s2m = (1.0 / (d * chi) as f64).powi(4);
        let lead = (d * d * chi * chi) as f64 * s2m;
        for (x, &f) in v.iter().zip(&mask) {
            if f {
                assert!((x / lead - 1.0).abs() < 1e-12);
            } else {
                assert!(x / lead < 1.0 / chi as f64);
            }
        }
    }

    #[test]
    fn folded_right_vector_gives_same_result() {
        for kind in [EnsembleKind::Haar, EnsembleKind::GAUSSIAN] {
            for (n, k) in [(0, 1), (0, 2), (1, 1)] {
                let sh = shape(n, k);
                let (n_a, n_b, d, chi) = (2, 3, 2, 3);
                let direct = frame_potential(Setup::Staircase, sh, n_a, n_b, d, chi, kind).unwrap();
                let gates = n_a + n_b - 1;
                let wa = site_weight_a(sh, d).unwrap();
                let wb = site_weight_b_staircase(sh, d).unwrap();
                let mut sites: Vec<SiteWeight> =
                    (0..gates - 1).map(|i| if i < n_a { wa.clone() } else { wb.clone() }).collect();
                // fold the final G(χ) bond into an extra unit site
                sites.push(SiteWeight::ones(sh.m()).unwrap());
                let mut bonds = vec![BondSelector::StaircaseBulk; gates - 2];
                bonds.push(BondSelector::GluedAtoB);
                let spec = ReplicaChainSpec {
                    shape: sh,
                    chi,
                    d,
                    kind,
                    sites,
                    bonds,
                    left: vec![1.0; wa.values.len()],
                    right: folded_right_vector(sh, chi, d, kind).unwrap(),
                    log_prefactor: weingarten_sum_constant(sh.m(), (d * chi) as f64, kind).ln(),
                };
                let folded = contract(&spec).unwrap();
                assert!((folded.ratio(&direct) - 1.0).abs() < 1e-10, "{kind} n={n} k={k}");
            }
        }
    }

    #[test]
    fn unit_chain_counts_permutations() {
        for m in [2, 4, 6] {
            let sh = shape(0, m / 2);
            let spec = ReplicaChainSpec {
                shape: sh,
                chi: 1,
                d: 2,
                kind: EnsembleKind::Haar,
                sites: vec![SiteWeight::ones(m).unwrap(); 4],
                bonds: vec![BondSelector::Identity; 3],
                left: vec![1.0; SymmetricGroup::get(m).unwrap().order()],
                right: vec![1.0; SymmetricGroup::get(m).unwrap().order()],
                log_prefactor: 0.0,
            };
            let v = contract(&spec).unwrap().value();
            assert!((v - SymmetricGroup::get(m).unwrap().order() as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn contraction_is_linear() {
        let sh = shape(0, 2);
        let base = ReplicaChainSpec::glued(sh, 3, 2, 3, EnsembleKind::Haar).unwrap();
        let f0 = contract(&base).unwrap();
        let mut s = base.clone();
        s.left.iter_mut().for_each(|x| *x *= 2.0);
        assert!((contract(&s).unwrap().ratio(&f0) - 2.0).abs() < 1e-13);
        let mut s = base.clone();
        s.right.iter_mut().for_each(|x| *x *= 2.0);
        assert!((contract(&s).unwrap().ratio(&f0) - 2.0).abs() < 1e-13);
        let mut s = base.clone();
        s.sites[3] = s.sites[3].scaled(2.0);
        assert!((contract(&s).unwrap().ratio(&f0) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn dense_and_matrix_free_agree_at_m6() {
        for kind in [EnsembleKind::Haar, EnsembleKind::GAUSSIAN] {
            let sh = shape(1, 2);
            let spec = ReplicaChainSpec::staircase(sh, 3, 3, 2, 5, kind).unwrap();
            let a = contract_with(&spec, ContractionPath::Dense).unwrap();
            let b = contract_with(&spec, ContractionPath::MatrixFree).unwrap();
            assert!((a.ratio(&b) - 1.0).abs() < 1e-10, "{kind}");
            let spec = ReplicaChainSpec::glued(sh, 3, 2, 3, kind).unwrap();
            let a = contract_with(&spec, ContractionPath::Dense).unwrap();
            let b = contract_with(&spec, ContractionPath::MatrixFree).unwrap();
            assert!((a.ratio(&b) - 1.0).abs() < 1e-10, "{kind}");
        }
    }

    #[test]
    fn matrix_free_runs_at_m8() {
        // (k, n) = (4, 0): leading order k!·d^{-kN_A}·χ^{(4−2m)(N_A+1)} holds
        // as χ grows; at moderate χ it is within a few percent.
        let sh = shape(0, 4);
        let f = frame_potential(Setup::Glued, sh, 1, 0, 2, 64, EnsembleKind::GAUSSIAN).unwrap();
        assert!(f.mantissa > 0.0 && f.ln().is_finite());
        assert!(matches!(bond_matrix(sh, 4, 2, EnsembleKind::Haar, BondSelector::GluedAtoB), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn purity_decreases_with_n_a() {
        let sh = shape(0, 1);
        let vals: Vec<f64> = (2..=6)
            .map(|n_a| frame_potential(Setup::Staircase, sh, n_a, 3, 2, 4, EnsembleKind::Haar).unwrap().value())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }

    #[test]
    fn seed_independent_and_rejects_negative_n() {
        let mut cfg = EnsembleConfig { n: -1, ..Default::default() };
        assert!(matches!(generalized_frame_potential(&cfg), Err(Error::Unsupported(_))));
        cfg.n = 0;
        let a = generalized_frame_potential(&cfg).unwrap();
        cfg.seed = 12345;
        let b = generalized_frame_potential(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn inconsistent_spec_rejected() {
        let mut spec = ReplicaChainSpec::glued(shape(0, 1), 2, 2, 2, EnsembleKind::Haar).unwrap();
        spec.bonds.pop();
        assert!(matches!(contract(&spec), Err(Error::Shape(_))));
    }
}
