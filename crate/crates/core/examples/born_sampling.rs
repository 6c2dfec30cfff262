//! Monte-Carlo moments of the projected ensemble from Born-rule sampling.

use projected_ensemble::estimator::{sample_moments, EnsembleConfig, PairMode};
use projected_ensemble::theory::setup1_ratio;
use projected_ensemble::Result;

fn main() -> Result<()> {
    let config = EnsembleConfig {
        n_a: 5,
        n_b: 10,
        chi: 32,
        k_max: 3,
        pairs_per_state: 200,
        realizations: 40,
        pair_mode: PairMode::AllPairs,
        seed: 1,
        ..Default::default()
    };
    let x = config.x();
    println!("staircase N_A={} chi={} x={x:.4}", config.n_a, config.chi);
    for est in sample_moments(&config)? {
        println!(
            "  k={}: D_A^k F/k! = {:.4} ± {:.4}   scaling limit {:.4}",
            est.k,
            est.ratio_to_haar,
            est.ratio_to_haar_stderr,
            setup1_ratio(est.k, x, config.d)
        );
    }
    Ok(())
}
