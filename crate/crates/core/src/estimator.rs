//! Monte-Carlo estimates of frame potentials and overlap histograms.
//!
//! Each realization `r` samples its own circuit from the stream
//! `(seed, r)`; realizations run in parallel and are reduced in index order,
//! so results are bit-identical for any thread count. Error bars are
//! leave-one-realization-out jackknife estimates.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::factorial;
use crate::rng::stream_rng;
use crate::tensorstate::circuit::Circuit;
use crate::tensorstate::oracle::statevector_oracle;
use crate::tensorstate::sampler::{project_outcomes, BornSampler};
use crate::tensorstate::{overlap, MpsState, RegionLayout, MAX_DENSE_A};
use crate::theory::scaling_variable;
use crate::weingarten::EnsembleKind;
use crate::Setup;

/// How measurement outcomes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Born rule; overlaps of normalized post-measurement states.
    Born,
    /// Uniform outcomes; overlaps of unnormalized projected states.
    Forced,
}

/// How outcome pairs are formed from draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// Two fresh draws per pair.
    Independent,
    /// `pairs_per_state` draws per state and every unordered pair of them.
    AllPairs,
}

macro_rules! str_enum {
    ($ty:ty, $($name:literal => $variant:expr),+) => {
        impl std::str::FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(Error::Parse(format!("unknown {} '{other}'", stringify!($ty)))),
                }
            }
        }
    };
}

str_enum!(SamplingMode, "born" => SamplingMode::Born, "forced" => SamplingMode::Forced);
str_enum!(PairMode, "independent" => PairMode::Independent, "all_pairs" => PairMode::AllPairs, "all-pairs" => PairMode::AllPairs);

/// Experiment hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub setup: Setup,
    pub kind: EnsembleKind,
    pub n_a: usize,
    /// Measured sites of the staircase, counting the final `χ` leg. The glued
    /// chain always has `N_A + 1` and ignores this field.
    pub n_b: usize,
    pub d: usize,
    pub chi: usize,
    pub k_max: usize,
    /// Replica parameter for the exact routes (`n ≥ 0`).
    pub n: i64,
    pub pairs_per_state: usize,
    pub realizations: usize,
    pub seed: u64,
    pub sampling_mode: SamplingMode,
    pub pair_mode: PairMode,
    /// Drop pairs whose two outcome strings coincide.
    pub exclude_coincidences: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            setup: Setup::Staircase,
            kind: EnsembleKind::Haar,
            n_a: 2,
            n_b: 2,
            d: 2,
            chi: 2,
            k_max: 2,
            n: 0,
            pairs_per_state: 100,
            realizations: 100,
            seed: 0,
            sampling_mode: SamplingMode::Born,
            pair_mode: PairMode::Independent,
            exclude_coincidences: false,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        if self.n_a == 0 || self.d < 2 || self.chi == 0 || self.k_max == 0 {
            return Err(Error::Shape("need N_A ≥ 1, d ≥ 2, χ ≥ 1, k_max ≥ 1".into()));
        }
        if self.setup == Setup::Staircase && self.n_b == 0 {
            return Err(Error::Shape("staircase needs N_B ≥ 1".into()));
        }
        if self.realizations == 0 || self.pairs_per_state == 0 {
            return Err(Error::Precondition("need at least one realization and one pair".into()));
        }
        Ok(())
    }

    /// Measured site count, resolved per setup.
    pub fn measured_sites(&self) -> usize {
        match self.setup {
            Setup::Staircase => self.n_b,
            Setup::Glued => self.n_a + 1,
        }
    }

    /// `D_A = d^{N_A}` (saturating).
    pub fn d_a(&self) -> usize {
        self.d.checked_pow(self.n_a as u32).unwrap_or(usize::MAX)
    }

    /// Scaling variable for `(setup, kind)`.
    pub fn x(&self) -> f64 {
        scaling_variable(self.setup, self.kind, self.d, self.chi, self.n_a)
    }

    /// Sample one circuit.
    pub fn sample_circuit<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Circuit> {
        match self.setup {
            Setup::Staircase => Circuit::staircase(self.n_a, self.n_b, self.d, self.chi, self.kind, rng),
            Setup::Glued => Circuit::glued(self.n_a, self.d, self.chi, self.kind, rng),
        }
    }

    /// Sample one circuit and read off its MPS.
    pub fn build_state<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(MpsState, RegionLayout)> {
        let circuit = self.sample_circuit(rng)?;
        Ok((circuit.to_mps()?, circuit.layout.clone()))
    }

    /// Set a field from its snake_case name and a textual value.
    pub fn set_field(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse(format!("invalid value '{v}' for {key}")))
        }
        match key {
            "setup" => self.setup = value.parse()?,
            "kind" => {
                let variance = match self.kind {
                    EnsembleKind::Gaussian { variance } => variance,
                    EnsembleKind::Haar => None,
                };
                self.kind = match value.parse()? {
                    EnsembleKind::Gaussian { .. } => EnsembleKind::Gaussian { variance },
                    k => k,
                };
            }
            "variance" => self.kind = EnsembleKind::Gaussian { variance: Some(num(key, value)?) },
            "n_a" | "na" => self.n_a = num(key, value)?,
            "n_b" | "nb" => self.n_b = num(key, value)?,
            "d" => self.d = num(key, value)?,
            "chi" => self.chi = num(key, value)?,
            "k_max" | "k" => self.k_max = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "pairs_per_state" | "pairs" => self.pairs_per_state = num(key, value)?,
            "realizations" => self.realizations = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "sampling_mode" | "mode" => self.sampling_mode = value.parse()?,
            "pair_mode" => self.pair_mode = value.parse()?,
            "exclude_coincidences" => self.exclude_coincidences = num(key, value)?,
            other => return Err(Error::Parse(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }
}

/// One estimated moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub k: usize,
    /// Born mode: `E[u^k]` with `u = D_A |⟨ψ|ψ'⟩|²`. Forced and oracle
    /// modes: the frame potential `F^(k,n)` itself.
    pub mean: f64,
    pub stderr: f64,
    /// Pairs (or exact realizations) contributing.
    pub n_samples: usize,
    /// `F^(k) / (k! D_A^{-k})`.
    pub ratio_to_haar: f64,
    pub ratio_to_haar_stderr: f64,
    /// `F^(k) / (k! (F^(1))^k)`.
    pub ratio_to_first_moment: f64,
    pub ratio_to_first_moment_stderr: f64,
}

/// Jackknife estimate of `f(mean)` from per-realization vectors of means.
///
/// Returns `(f(grand mean), stderr)`; with one realization the error is
/// reported as infinite.
pub fn jackknife(samples: &[Vec<f64>], f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let r = samples.len();
    let dim = samples.first().map_or(0, Vec::len);
    let mut total = vec![0.0; dim];
    for s in samples {
        for (t, v) in total.iter_mut().zip(s) {
            *t += v;
        }
    }
    let grand: Vec<f64> = total.iter().map(|t| t / r as f64).collect();
    let estimate = f(&grand);
    if r < 2 {
        return (estimate, f64::INFINITY);
    }
    let loo: Vec<f64> = samples
        .iter()
        .map(|s| {
            let m: Vec<f64> = total.iter().zip(s).map(|(t, v)| (t - v) / (r - 1) as f64).collect();
            f(&m)
        })
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / r as f64;
    let var = loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>() * (r - 1) as f64 / r as f64;
    (estimate, var.sqrt())
}

/// Per-realization sums `Σ_pairs w^k` for `k = 1..k_max` and the pair count.
struct RealizationSums {
    sums: Vec<f64>,
    pairs: usize,
}

impl RealizationSums {
    fn new(k_max: usize) -> Self {
        RealizationSums { sums: vec![0.0; k_max], pairs: 0 }
    }

    fn add(&mut self, w: f64) {
        let mut p = 1.0;
        for s in self.sums.iter_mut() {
            p *= w;
            *s += p;
        }
        self.pairs += 1;
    }

    fn means(&self) -> Vec<f64> {
        self.sums.iter().map(|s| s / self.pairs.max(1) as f64).collect()
    }
}

/// Turn per-realization means into estimates. `haar_unit` is the value of
/// `mean` that a Haar ensemble would have at `k = 1`, relative to `D_A^{-1}`
/// (1 for `u`-moments, `D_A^{-1}` for frame potentials).
fn summarize(per_real: &[Vec<f64>], n_samples: usize, mean_to_haar: impl Fn(usize) -> f64) -> Vec<MomentEstimate> {
    let k_max = per_real.first().map_or(0, Vec::len);
    (1..=k_max)
        .map(|k| {
            let kf = factorial(k as u32);
            let (mean, stderr) = jackknife(per_real, |m| m[k - 1]);
            let scale = mean_to_haar(k) / kf;
            let (r1, r1_err) = jackknife(per_real, |m| m[k - 1] / (kf * m[0].powi(k as i32)));
            MomentEstimate {
                k,
                mean,
                stderr,
                n_samples,
                ratio_to_haar: mean * scale,
                ratio_to_haar_stderr: stderr * scale,
                ratio_to_first_moment: r1,
                ratio_to_first_moment_stderr: r1_err,
            }
        })
        .collect()
}

fn check_sampling(config: &EnsembleConfig, mode: SamplingMode) -> Result<()> {
    config.validate()?;
    if config.sampling_mode != mode {
        return Err(Error::Precondition(format!("configuration asks for {:?} sampling", config.sampling_mode)));
    }
    if mode == SamplingMode::Born && !config.kind.is_haar() {
        return Err(Error::Precondition("Born sampling needs normalized (Haar) states".into()));
    }
    if config.d_a() > MAX_DENSE_A {
        return Err(Error::SizeLimit(format!("D_A = d^N_A exceeds {MAX_DENSE_A}")));
    }
    Ok(())
}

fn for_each_realization<T: Send>(
    config: &EnsembleConfig,
    f: impl Fn(&mut crate::rng::StreamRng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..config.realizations as u64)
        .into_par_iter()
        .map(|r| f(&mut stream_rng(config.seed, r)))
        .collect()
}

/// Draw outcome pairs under `config.pair_mode` and feed each pair's weight
/// to `sums`. `draw` returns `(outcomes, vector)` and `weight` maps a pair
/// of vectors to the accumulated quantity.
fn accumulate_pairs<R: Rng + ?Sized, D, W>(
    config: &EnsembleConfig,
    rng: &mut R,
    mut draw: D,
    weight: W,
) -> Result<RealizationSums>
where
    D: FnMut(&mut R) -> Result<(Vec<usize>, Vec<num_complex::Complex64>, f64)>,
    W: Fn(&[num_complex::Complex64], f64, &[num_complex::Complex64], f64) -> Result<f64>,
{
    let mut sums = RealizationSums::new(config.k_max);
    let skip = |a: &[usize], b: &[usize]| config.exclude_coincidences && a == b;
    match config.pair_mode {
        PairMode::Independent => {
            for _ in 0..config.pairs_per_state {
                let (za, va, pa) = draw(rng)?;
                let (zb, vb, pb) = draw(rng)?;
                if !skip(&za, &zb) {
                    sums.add(weight(&va, pa, &vb, pb)?);
                }
            }
        }
        PairMode::AllPairs => {
            let draws: Vec<_> = (0..config.pairs_per_state).map(|_| draw(rng)).collect::<Result<_>>()?;
            for i in 0..draws.len() {
                for j in i + 1..draws.len() {
                    if !skip(&draws[i].0, &draws[j].0) {
                        sums.add(weight(&draws[i].1, draws[i].2, &draws[j].1, draws[j].2)?);
                    }
                }
            }
        }
    }
    Ok(sums)
}

/// Born-mode moments `E[u^k]`, `u = D_A |⟨ψ(z)|ψ(z')⟩|²`, for `k = 1..k_max`.
pub fn sample_moments(config: &EnsembleConfig) -> Result<Vec<MomentEstimate>> {
    check_sampling(config, SamplingMode::Born)?;
    let d_a = config.d_a() as f64;
    let per_real = for_each_realization(config, |rng| {
        let (mps, layout) = config.build_state(rng)?;
        let sampler = BornSampler::new(&mps, &layout)?;
        accumulate_pairs(
            config,
            rng,
            |rng| {
                let rec = sampler.sample(rng);
                Ok((rec.outcomes, rec.post_state, rec.probability))
            },
            |a, _, b, _| Ok(d_a * overlap(a, b)?.norm_sqr()),
        )
    })?;
    let n_samples = per_real.iter().map(|s| s.pairs).sum();
    let means: Vec<Vec<f64>> = per_real.iter().map(RealizationSums::means).collect();
    Ok(summarize(&means, n_samples, |_| 1.0))
}

/// Forced-mode estimates of `F^(k,n) = Σ_{z z'} (p p')^n |⟨ψ̃(z)|ψ̃(z')⟩|^{2k}`
/// from uniformly drawn outcome pairs, rescaled by the squared number of
/// outcome strings.
pub fn forced_moments(config: &EnsembleConfig) -> Result<Vec<MomentEstimate>> {
    check_sampling(config, SamplingMode::Forced)?;
    if config.n < 0 {
        return Err(Error::Unsupported("forced sampling needs n ≥ 0".into()));
    }
    let n = config.n as i32;
    let d_a = config.d_a() as f64;
    let per_real = for_each_realization(config, |rng| {
        let (mps, layout) = config.build_state(rng)?;
        let dims = mps.phys_dims();
        let b_dims: Vec<usize> = layout.b_sites().iter().map(|&s| dims[s]).collect();
        let sums = accumulate_pairs(
            config,
            rng,
            |rng| {
                let z: Vec<usize> = b_dims.iter().map(|&d| rng.random_range(0..d)).collect();
                let v = project_outcomes(&mps, &layout, &z)?;
                let p = v.iter().map(|a| a.norm_sqr()).sum();
                Ok((z, v, p))
            },
            |a, pa, b, pb| Ok((pa * pb).powi(n) * overlap(a, b)?.norm_sqr()),
        )?;
        Ok((sums, b_dims))
    })?;
    let cardinality: f64 = per_real.first().map_or(1.0, |(_, b)| b.iter().map(|&d| d as f64).product());
    let n_samples = per_real.iter().map(|(s, _)| s.pairs).sum();
    let scale = cardinality * cardinality;
    let means: Vec<Vec<f64>> =
        per_real.iter().map(|(s, _)| s.means().iter().map(|m| m * scale).collect()).collect();
    Ok(summarize(&means, n_samples, |k| d_a.powi(k as i32)))
}

/// Exact per-realization frame potentials `F^(k,n)` from the statevector
/// oracle, averaged over `config.realizations` circuits. `n = 1 − k`
/// (physical) is used when `config.n` is negative.
pub fn oracle_moments(config: &EnsembleConfig) -> Result<Vec<MomentEstimate>> {
    config.validate()?;
    let d_a = config.d_a() as f64;
    let means = for_each_realization(config, |rng| {
        let ens = statevector_oracle(config, rng)?;
        Ok((1..=config.k_max)
            .map(|k| {
                let n = if config.n < 0 { 1 - k as i32 } else { config.n as i32 };
                ens.generalized_frame_potential(k as u32, n)
            })
            .collect::<Vec<f64>>())
    })?;
    Ok(summarize(&means, config.realizations, |k| d_a.powi(k as i32)))
}

/// Density histogram of Born-mode overlaps `u` on `[0, u_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapHistogram {
    pub bin_centers: Vec<f64>,
    pub densities: Vec<f64>,
    /// Poisson error `√count / (N_in · width)`.
    pub errors: Vec<f64>,
    pub counts: Vec<u64>,
    pub width: f64,
    /// Samples falling inside `[0, u_max]`.
    pub in_range: u64,
    pub out_of_range: u64,
}

impl OverlapHistogram {
    /// `Σ density · width`, 1 by construction when any sample is in range.
    pub fn total_mass(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.width
    }
}

/// Histogram of `u = D_A |⟨ψ(z)|ψ(z')⟩|²` over all pairs of all realizations.
pub fn overlap_histogram(config: &EnsembleConfig, bins: usize, u_max: f64) -> Result<OverlapHistogram> {
    check_sampling(config, SamplingMode::Born)?;
    if bins == 0 || u_max.is_nan() || u_max <= 0.0 {
        return Err(Error::Precondition("need bins ≥ 1 and u_max > 0".into()));
    }
    let d_a = config.d_a() as f64;
    let width = u_max / bins as f64;
    let per_real = for_each_realization(config, |rng| {
        let (mps, layout) = config.build_state(rng)?;
        let sampler = BornSampler::new(&mps, &layout)?;
        let mut counts = vec![0u64; bins];
        let mut outside = 0u64;
        let cfg = EnsembleConfig { k_max: 1, ..config.clone() };
        let counter = std::cell::RefCell::new((&mut counts, &mut outside));
        accumulate_pairs(
            &cfg,
            rng,
            |rng| {
                let rec = sampler.sample(rng);
                Ok((rec.outcomes, rec.post_state, rec.probability))
            },
            |a, _, b, _| {
                let u = d_a * overlap(a, b)?.norm_sqr();
                let mut c = counter.borrow_mut();
                let bin = (u / width).floor();
                if (0.0..bins as f64).contains(&bin) {
                    c.0[bin as usize] += 1;
                } else if u == u_max {
                    c.0[bins - 1] += 1;
                } else {
                    *c.1 += 1;
                }
                Ok(u)
            },
        )?;
        Ok((counts, outside))
    })?;
    let mut counts = vec![0u64; bins];
    let mut out_of_range = 0;
    for (c, o) in &per_real {
        for (t, v) in counts.iter_mut().zip(c) {
            *t += v;
        }
        out_of_range += o;
    }
    let in_range: u64 = counts.iter().sum();
    let norm = in_range.max(1) as f64 * width;
    Ok(OverlapHistogram {
        bin_centers: (0..bins).map(|i| (i as f64 + 0.5) * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / norm).collect(),
        errors: counts.iter().map(|&c| (c as f64).sqrt() / norm).collect(),
        counts,
        width,
        in_range,
        out_of_range,
    })
}
