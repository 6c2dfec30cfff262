//! Closed-form predictions in the scaling limit.
//!
//! Staircase (setup I): a single domain wall pinned near the `A`/`B`
//! interface gives the discrete sum [`setup1_ratio`] and the overlap law
//! [`setup1_pdf`], a mixture of exponentials. Glued (setup II): dilute
//! excitations exponentiate, giving [`setup2_ratio`] and a log-normal mixture
//! of exponentials [`setup2_pdf`].
//!
//! Infinite sums are truncated once a term drops below `1e-14` of the
//! partial sum.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::hermite::GaussHermite;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial, factorial, LogValue};
use crate::permgroup::{sigma_a, ReplicaShape, SymmetricGroup};
use crate::weingarten::EnsembleKind;
use crate::Setup;

const SERIES_RTOL: f64 = 1e-14;
const MAX_TERMS: usize = 100_000;

/// Inputs of a scaling-limit prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionParams {
    pub d: usize,
    pub k: usize,
    /// Replica parameter; `1 − k` is the physical ensemble.
    pub n: i64,
    pub x: f64,
    pub setup: Setup,
    pub kind: EnsembleKind,
}

impl PredictionParams {
    /// Physical (`n = 1 − k`) parameters.
    pub fn physical(setup: Setup, kind: EnsembleKind, d: usize, k: usize, x: f64) -> Self {
        PredictionParams { d, k, n: 1 - k as i64, x, setup, kind }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.k == 0 || self.x < 0.0 || !self.x.is_finite() {
            return Err(Error::Precondition(format!(
                "need d ≥ 2, k ≥ 1, finite x ≥ 0 (got d={}, k={}, x={})",
                self.d, self.k, self.x
            )));
        }
        if self.n < 0 && self.n != 1 - self.k as i64 {
            return Err(Error::Precondition(format!("n = {} must be ≥ 0 or 1 − k", self.n)));
        }
        Ok(())
    }

    /// Log-normal location of the glued overlap law.
    pub fn mu(&self) -> f64 {
        lognormal_mu(self.x, self.d)
    }

    /// Log-normal width of the glued overlap law.
    pub fn sigma(&self) -> f64 {
        (2.0 * self.x).sqrt()
    }

    /// `F^(k,n) / F^(k,n,0)` for these parameters.
    pub fn ratio(&self) -> Result<f64> {
        self.validate()?;
        match self.setup {
            Setup::Staircase => {
                if self.n != 1 - self.k as i64 {
                    return Err(Error::Unsupported("staircase predictions exist only at n = 1 − k".into()));
                }
                Ok(setup1_ratio(self.k, self.x, self.d))
            }
            Setup::Glued => {
                let m = 2 * (self.n + self.k as i64);
                Ok((self.x * setup2_exponent(self.k, m as f64, self.d, self.kind)).exp())
            }
        }
    }

    /// Overlap density at `u` (physical replica limit only).
    pub fn pdf(&self, u: f64) -> Result<f64> {
        self.validate()?;
        Ok(match self.setup {
            Setup::Staircase => setup1_pdf(u, self.x, self.d),
            Setup::Glued => setup2_pdf(u, self.x, self.d),
        })
    }
}

/// The scaling variable: `(D_A/χ)(d−1)/d` for the Haar staircase, `D_A/χ`
/// for the Gaussian staircase, `N_A/χ²` for the glued chain.
pub fn scaling_variable(setup: Setup, kind: EnsembleKind, d: usize, chi: usize, n_a: usize) -> f64 {
    let chi = chi as f64;
    match setup {
        Setup::Staircase => {
            let ratio = (d as f64).powi(n_a as i32) / chi;
            if kind.is_haar() {
                ratio * (d as f64 - 1.0) / d as f64
            } else {
                ratio
            }
        }
        Setup::Glued => n_a as f64 / (chi * chi),
    }
}

/// Inverse of [`scaling_variable`] in `χ`, rounded down and clamped to ≥ 1.
pub fn chi_for_scaling_variable(setup: Setup, kind: EnsembleKind, d: usize, n_a: usize, x: f64) -> usize {
    let unit = scaling_variable(setup, kind, d, 1, n_a);
    let chi = match setup {
        Setup::Staircase => unit / x,
        Setup::Glued => (unit / x).sqrt(),
    };
    (chi.floor() as usize).max(1)
}

/// `k!·D_A^{-k}`.
pub fn haar_frame_potential(k: usize, d_a: f64) -> f64 {
    factorial(k as u32) * d_a.powi(-(k as i32))
}

fn lognormal_mu(x: f64, d: usize) -> f64 {
    let d = d as f64;
    x * (d * d - d - 1.0) / d
}

/// Logarithm of the vacuum weight common to every dominant factorized
/// permutation, excluding the `d^{-(dist(σ, σ_A)) N_A}` site factor.
fn vacuum_prefactor_ln(
    setup: Setup,
    shape: ReplicaShape,
    n_a: usize,
    n_b: usize,
    d: usize,
    chi: usize,
    kind: EnsembleKind,
) -> f64 {
    let m = shape.m() as f64;
    let (d, chi, n_af) = (d as f64, chi as f64, n_a as f64);
    let lnd = d.ln();
    let lnchi = chi.ln();
    match setup {
        Setup::Staircase => {
            let gates = (n_a + n_b - 1) as f64;
            let ln_var = kind.variance(d * chi).ln();
            2.0 * lnchi + (m * n_af + 2.0 * (n_b as f64 - 1.0)) * lnd
                + m * (gates - 1.0) * lnchi
                + m * gates * ln_var
        }
        Setup::Glued => {
            let ln_var_a = kind.variance(d * chi * chi).ln();
            let ln_var_b = kind.variance(chi * chi).ln();
            n_af * (m * ln_var_a + m * lnd) + (n_af + 1.0) * (m * ln_var_b + 4.0 * lnchi) + 2.0 * m * n_af * lnchi
        }
    }
}

/// Large-`χ` value `k!·(vacuum weight)`: for the staircase
/// `k!·χ²·d^{(m−k)N_A + 2(N_B−1)}·χ^{m(G−1)}·ς^{2mG}` with `G = N_A + N_B − 1`
/// gates, for the glued chain
/// `k!·(ς_A^{2m} d^{m−k})^{N_A}·(ς_B^{2m} χ⁴)^{N_A+1}·χ^{2mN_A}`.
/// Haar gates use `ς² = 1/q` for a gate of dimension `q`.
pub fn leading_order(
    setup: Setup,
    shape: ReplicaShape,
    n_a: usize,
    n_b: usize,
    d: usize,
    chi: usize,
    kind: EnsembleKind,
) -> LogValue {
    let k = shape.k;
    let ln = vacuum_prefactor_ln(setup, shape, n_a, n_b, d, chi, kind) + factorial(k as u32).ln()
        - (k * n_a) as f64 * (d as f64).ln();
    LogValue::from_ln(ln)
}

/// The `χ → ∞` limit of the chain restricted to factorized permutations,
/// keeping every factorized `σ` with its weight `d^{-dist(σ, σ_A) N_A}`
/// instead of only the `k!` closest ones. This is the quantity the exact
/// contraction approaches at fixed `N_A` as `χ` grows.
pub fn vacuum_limit(
    setup: Setup,
    shape: ReplicaShape,
    n_a: usize,
    n_b: usize,
    d: usize,
    chi: usize,
    kind: EnsembleKind,
) -> Result<LogValue> {
    let group = SymmetricGroup::get(shape.m())?;
    let mask = group.factorized_mask();
    let dist = group.distances_to(&sigma_a(shape));
    let lnd = (d as f64).ln();
    let sum: f64 = mask
        .iter()
        .zip(&dist)
        .filter(|(&f, _)| f)
        .map(|(_, &x)| (-(x as f64 - shape.k as f64) * n_a as f64 * lnd).exp())
        .sum();
    let ln = vacuum_prefactor_ln(setup, shape, n_a, n_b, d, chi, kind) + sum.ln() - (shape.k * n_a) as f64 * lnd;
    Ok(LogValue::from_ln(ln))
}

/// Sum `Σ_{j≥0} term(j)` of positive terms that eventually decrease.
fn positive_series(mut term: impl FnMut(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for j in 0..MAX_TERMS {
        let t = term(j);
        sum += t;
        if t <= prev && t <= SERIES_RTOL * sum {
            break;
        }
        prev = t;
    }
    sum
}

fn z_j(j: usize, x: f64, d: f64) -> f64 {
    1.0 + x * d / (d - 1.0) + x * j as f64
}

/// `F^(k)/F^(k)_Haar = ((d−1)/d) Σ_{j≥0} d^{-j} z_j^k` with
/// `z_j = 1 + x d/(d−1) + x j`.
pub fn setup1_ratio(k: usize, x: f64, d: usize) -> f64 {
    let df = d as f64;
    (df - 1.0) / df * positive_series(|j| df.powi(-(j as i32)) * z_j(j, x, df).powi(k as i32))
}

/// Staircase overlap density `P(u) = ((d−1)/d) Σ_j d^{-j} e^{-u/z_j}/z_j`.
pub fn setup1_pdf(u: f64, x: f64, d: usize) -> f64 {
    let df = d as f64;
    (df - 1.0) / df
        * positive_series(|j| {
            let z = z_j(j, x, df);
            df.powi(-(j as i32)) * (-u / z).exp() / z
        })
}

/// Exponent `E(k, m, d)` of the glued scaling form
/// `F^(k,n) = F^(k,n,0)·exp(x E)`, `m = 2(n + k)`.
///
/// Gaussian gates contribute the single-site, flip and double-flip
/// excitations; Haar gates add the expansion of `c^W(dχ²)` and the first
/// Weingarten correction on `B` sites.
pub fn setup2_exponent(k: usize, m: f64, d: usize, kind: EnsembleKind) -> f64 {
    let (k, d) = (k as f64, d as f64);
    let half = m / 2.0;
    let transpositions = m * (m - 1.0) / 2.0;
    let factorized_moves = half * (half - 1.0);
    let gaussian = k * d
        + (transpositions - k - factorized_moves) / d
        + m * (half - 1.0) * (d + 3.0) / (d - 1.0)
        + k * (k - 1.0);
    match kind {
        EnsembleKind::Haar => gaussian - transpositions / d - factorized_moves,
        EnsembleKind::Gaussian { .. } => gaussian,
    }
}

/// Physical glued ratio `exp(x (k(d − 1 − 1/d) + k²))`.
pub fn setup2_ratio(k: usize, x: f64, d: usize) -> f64 {
    let (kf, df) = (k as f64, d as f64);
    (x * (kf * (df - 1.0 - 1.0 / df) + kf * kf)).exp()
}

/// Haar glued ratio `F^(k,n)/F^(k,n,0)` for `n ≥ 0` or `n = 1 − k`.
pub fn setup2_generalized_ratio(k: usize, n: i64, x: f64, d: usize) -> Result<f64> {
    let params = PredictionParams { d, k, n, x, setup: Setup::Glued, kind: EnsembleKind::Haar };
    params.ratio()
}

fn hermite_rule(nodes: usize) -> &'static GaussHermite {
    static R64: OnceLock<GaussHermite> = OnceLock::new();
    static R128: OnceLock<GaussHermite> = OnceLock::new();
    let cell = if nodes <= 64 { &R64 } else { &R128 };
    cell.get_or_init(|| GaussHermite::new(NonZeroUsize::new(if nodes <= 64 { 64 } else { 128 }).unwrap()))
}

/// Glued overlap density: an exponential whose mean `e^{σw + μ}` is
/// log-normal, `μ = x(d² − d − 1)/d`, `σ = √(2x)`, integrated over `w` by
/// Gauss–Hermite quadrature (64 nodes, 128 for `x > 1`).
pub fn setup2_pdf(u: f64, x: f64, d: usize) -> f64 {
    if x == 0.0 {
        return (-u).exp();
    }
    let mu = lognormal_mu(x, d);
    let sigma = (2.0 * x).sqrt();
    let rule = hermite_rule(if x > 1.0 { 128 } else { 64 });
    // w = √2 t turns the standard normal weight into e^{-t²}/√π
    let integral = rule.integrate(|t| {
        let rate = (-sigma * std::f64::consts::SQRT_2 * t - mu).exp();
        rate * (-u * rate).exp()
    });
    integral / std::f64::consts::PI.sqrt()
}

/// `V_A + V_B` with `V_A = Σ max(−ℓ_i, 0)` and `V_B = max(ℓ_1, …, ℓ_α, 0)`.
pub fn confinement_potential(ells: &[i64]) -> u64 {
    let va: i64 = ells.iter().map(|&l| (-l).max(0)).sum();
    let vb = ells.iter().copied().fold(0, i64::max);
    (va + vb) as u64
}

/// How to evaluate [`f_alpha`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FAlphaMode {
    /// Brute-force lattice sum of `d^{-V}`.
    Direct,
    /// `(d/(d−1))^{α−1} (1 + Σ_{j≥1} d^{-j} (1 + j(d−1)/d)^α)`.
    Closed,
}

/// Partition function `f_α = Σ_{ℓ ∈ ℤ^α} d^{-V(ℓ)}` of `α` domain walls.
pub fn f_alpha(alpha: usize, d: usize, mode: FAlphaMode) -> Result<f64> {
    if alpha > 6 || d < 2 {
        return Err(Error::Precondition(format!("need α ≤ 6 and d ≥ 2, got α={alpha}, d={d}")));
    }
    let df = d as f64;
    if alpha == 0 {
        return Ok(1.0);
    }
    Ok(match mode {
        FAlphaMode::Closed => {
            let tail = positive_series(|j| {
                let j = j + 1;
                df.powi(-(j as i32)) * (1.0 + j as f64 * (df - 1.0) / df).powi(alpha as i32)
            });
            (df / (df - 1.0)).powi(alpha as i32 - 1) * (1.0 + tail)
        }
        FAlphaMode::Direct => f_alpha_direct(alpha, df),
    })
}

/// Bound on the weight of configurations with some `|ℓ_i| > cut`.
fn lattice_tail_bound(alpha: usize, d: f64, cut: usize) -> f64 {
    if alpha == 0 {
        return 0.0;
    }
    let a = d / (d - 1.0);
    let tail_b = |from: usize, power: usize| {
        positive_series(|j| {
            let t = (from + j) as f64;
            d.powf(-t) * (t + a).powi(power as i32)
        })
    };
    // f_{α−1} ≤ Σ_{t≥0} d^{-t} (t + d/(d−1))^{α−1}
    let f_rest = tail_b(0, alpha - 1);
    alpha as f64 * (d.powf(-(cut as f64)) / (d - 1.0) * f_rest + tail_b(cut + 1, alpha - 1))
}

fn f_alpha_direct(alpha: usize, d: f64) -> f64 {
    if alpha == 0 {
        return 1.0;
    }
    let mut cut = 1;
    while lattice_tail_bound(alpha, d, cut) > 1e-13 {
        cut += 1;
    }
    let cut = cut as i64;
    let pow: Vec<f64> = (0..=(alpha as i64 + 1) * cut).map(|v| d.powi(-(v as i32))).collect();
    let mut ells = vec![-cut; alpha];
    // Neumaier-compensated: up to ~10⁸ terms of very different sizes
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    loop {
        let term = pow[confinement_potential(&ells) as usize];
        let t = sum + term;
        carry += if sum.abs() >= term { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        // odometer increment
        let mut i = 0;
        loop {
            if i == alpha {
                return sum + carry;
            }
            if ells[i] < cut {
                ells[i] += 1;
                break;
            }
            ells[i] = -cut;
            i += 1;
        }
    }
}

/// `Σ_{α=0}^{k} C(k, α) x^α f_α`, the domain-wall expansion of
/// [`setup1_ratio`].
pub fn series_ratio_setup1(k: usize, x: f64, d: usize) -> Result<f64> {
    if k > 6 {
        return Err(Error::Precondition(format!("k = {k} > 6")));
    }
    (0..=k).try_fold(0.0, |acc, a| {
        Ok(acc + binomial(k as u32, a as u32) * x.powi(a as i32) * f_alpha(a, d, FAlphaMode::Closed)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn haar_values() {
        assert_eq!(haar_frame_potential(1, 8.0), 0.125);
        assert_eq!(haar_frame_potential(2, 4.0), 0.125);
        assert_eq!(haar_frame_potential(3, 512.0), 6.0 * 2f64.powi(-27));
    }

    #[test]
    fn setup1_ratio_values() {
        for d in [2, 3, 7] {
            for k in 1..5 {
                assert!((setup1_ratio(k, 0.0, d) - 1.0).abs() < 1e-13);
            }
            let x = 0.3;
            let closed = 1.0 + x * (d as f64 + 1.0) / (d as f64 - 1.0);
            assert!(rel(setup1_ratio(1, x, d), closed) < 1e-13);
        }
        // (1/2) Σ 2^{-j} (3 + j)² = (1/2)(9·2 + 6·2 + 6) = 18
        assert!(rel(setup1_ratio(2, 1.0, 2), 18.0) < 1e-13);
        assert!(rel(setup1_ratio(1, 1.0, 2), 4.0) < 1e-13);
        assert!(rel(setup1_ratio(3, 0.5, 1_000_000), 1.5f64.powi(3)) < 1e-4);
    }

    #[test]
    fn setup1_ratio_is_monotone() {
        for d in [2, 3] {
            for k in 1..5 {
                let mut prev = setup1_ratio(k, 0.0, d);
                for i in 1..40 {
                    let v = setup1_ratio(k, i as f64 * 0.1, d);
                    assert!(v > prev);
                    assert!(setup1_ratio(k + 1, i as f64 * 0.1, d) > v);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn setup2_values() {
        assert_eq!(setup2_ratio(3, 0.0, 2), 1.0);
        assert!(rel(setup2_ratio(1, 0.1, 2), 0.15f64.exp()) < 1e-15);
        for k in 1..4 {
            let a = setup2_ratio(k, 0.2, 3).ln();
            let b = setup2_ratio(k, 0.4, 3).ln();
            assert!(rel(b, 2.0 * a) < 1e-14);
        }
    }

    #[test]
    fn generalized_reduces_at_replica_limit() {
        for d in [2, 3, 5] {
            for k in 1..5usize {
                for x in [0.0, 0.05, 0.7] {
                    let g = setup2_generalized_ratio(k, 1 - k as i64, x, d).unwrap();
                    assert!(rel(g, setup2_ratio(k, x, d)) < 1e-14);
                }
            }
        }
        assert_eq!(setup2_generalized_ratio(2, 0, 0.0, 2).unwrap(), 1.0);
        assert!(setup2_generalized_ratio(2, -3, 0.1, 2).is_err());
    }

    #[test]
    fn setup2_exponent_excitation_counts() {
        // m = 4, k = 2, d = 2 Gaussian: kd + (6 − 2 − 2)/d + 4·(5) + 2 = 4 + 1 + 20 + 2
        assert!((setup2_exponent(2, 4.0, 2, EnsembleKind::GAUSSIAN) - 27.0).abs() < 1e-12);
        // Haar subtracts 6/2 + 2
        assert!((setup2_exponent(2, 4.0, 2, EnsembleKind::Haar) - 22.0).abs() < 1e-12);
    }

    #[test]
    fn confinement_examples() {
        assert_eq!(confinement_potential(&[0, 0, 0]), 0);
        assert_eq!(confinement_potential(&[-2, -1]), 3);
        assert_eq!(confinement_potential(&[3, -1]), 4);
        assert_eq!(confinement_potential(&[]), 0);
    }

    #[test]
    fn f_alpha_modes_agree() {
        for d in [2, 3, 5] {
            assert_eq!(f_alpha(0, d, FAlphaMode::Closed).unwrap(), 1.0);
            assert_eq!(f_alpha(0, d, FAlphaMode::Direct).unwrap(), 1.0);
            let df = d as f64;
            assert!(rel(f_alpha(1, d, FAlphaMode::Closed).unwrap(), (df + 1.0) / (df - 1.0)) < 1e-13);
            for a in 1..=3 {
                let c = f_alpha(a, d, FAlphaMode::Closed).unwrap();
                let x = f_alpha(a, d, FAlphaMode::Direct).unwrap();
                assert!(rel(c, x) < 1e-10, "α={a} d={d}: {c} vs {x}");
            }
        }
        assert!(f_alpha(7, 2, FAlphaMode::Closed).is_err());
    }

    #[test]
    fn a_alpha_building_block() {
        // Σ over non-positive ℓ of d^{-V_A} = (d/(d−1))^α, checked by enumeration
        for d in [2.0f64, 3.0] {
            for alpha in 1..4u32 {
                let one: f64 = (0..200).map(|l| d.powi(-l)).sum();
                assert!(rel(one.powi(alpha as i32), (d / (d - 1.0)).powi(alpha as i32)) < 1e-12);
            }
        }
    }

    #[test]
    fn series_expansion_matches_sum() {
        for d in [2, 3] {
            for k in 0..=4 {
                for x in [0.1, 1.0, 5.0] {
                    let s = series_ratio_setup1(k, x, d).unwrap();
                    let r = if k == 0 { 1.0 } else { setup1_ratio(k, x, d) };
                    assert!(rel(s, r) < 1e-10, "k={k} d={d} x={x}");
                }
            }
        }
        assert_eq!(series_ratio_setup1(0, 3.0, 2).unwrap(), 1.0);
    }

    #[test]
    fn pdfs_recover_porter_thomas() {
        for i in 0..=100 {
            let u = i as f64 * 0.1;
            assert!((setup1_pdf(u, 0.0, 2) - (-u).exp()).abs() < 1e-14);
            assert!((setup2_pdf(u, 0.0, 2) - (-u).exp()).abs() < 1e-15);
            assert!((setup2_pdf(u, 1e-6, 2) - (-u).exp()).abs() < 1e-4);
            assert!(setup1_pdf(u, 1.0, 2) >= 0.0 && setup2_pdf(u, 0.3, 2) >= 0.0);
        }
    }

    #[test]
    fn scaling_variable_rules() {
        let haar = scaling_variable(Setup::Staircase, EnsembleKind::Haar, 2, 32, 6);
        assert!((haar - 1.0).abs() < 1e-15);
        let gauss = scaling_variable(Setup::Staircase, EnsembleKind::GAUSSIAN, 2, 32, 6);
        assert!((gauss - 2.0).abs() < 1e-15);
        assert!((scaling_variable(Setup::Glued, EnsembleKind::Haar, 2, 10, 5) - 0.05).abs() < 1e-15);
        assert_eq!(chi_for_scaling_variable(Setup::Glued, EnsembleKind::Haar, 2, 25, 0.05), 22);
        assert_eq!(chi_for_scaling_variable(Setup::Staircase, EnsembleKind::Haar, 2, 6, 1.0), 32);
    }

    #[test]
    fn leading_order_replica_limit_is_haar() {
        // m = 2 is the single shape (n, k) = (0, 1)
        let shape = ReplicaShape::new(0, 1).unwrap();
        for setup in [Setup::Staircase, Setup::Glued] {
            for kind in [EnsembleKind::Haar, EnsembleKind::GAUSSIAN] {
                let v = leading_order(setup, shape, 5, 4, 2, 37, kind).value();
                assert!(rel(v, haar_frame_potential(1, 32.0)) < 1e-12, "{setup} {kind}");
            }
        }
    }

    #[test]
    fn params_dispatch() {
        let p = PredictionParams::physical(Setup::Staircase, EnsembleKind::Haar, 2, 2, 1.0);
        assert!(rel(p.ratio().unwrap(), 18.0) < 1e-13);
        let p = PredictionParams::physical(Setup::Glued, EnsembleKind::Haar, 2, 1, 0.0);
        assert_eq!(p.ratio().unwrap(), 1.0);
        assert!((p.pdf(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        let p = PredictionParams { x: 0.5, ..p };
        assert!(rel(p.mu(), 0.25) < 1e-15);
        assert!(rel(p.sigma(), 1.0) < 1e-15);
        let bad = PredictionParams { x: -1.0, ..p };
        assert!(bad.ratio().is_err());
    }
}
