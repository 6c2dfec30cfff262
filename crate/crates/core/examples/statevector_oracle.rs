//! Brute-force projected ensemble of a small chain, checked against the replica engine.

use projected_ensemble::estimator::{oracle_moments, EnsembleConfig};
use projected_ensemble::replica::frame_potential;
use projected_ensemble::rng::stream_rng;
use projected_ensemble::tensorstate::oracle::statevector_oracle;
use projected_ensemble::{ReplicaShape, Result, Setup};

fn main() -> Result<()> {
    let config = EnsembleConfig { setup: Setup::Glued, n_a: 2, d: 2, chi: 2, k_max: 3, realizations: 4000, ..Default::default() };

    let one = statevector_oracle(&config, &mut stream_rng(0, 0))?;
    println!(
        "one state: {} outcomes, total probability {:.12}, purity {:.6}",
        one.entries.len(),
        one.total_probability(),
        one.purity()
    );

    for est in oracle_moments(&config)? {
        let exact = frame_potential(
            config.setup,
            ReplicaShape::new(0, est.k)?,
            config.n_a,
            config.n_b,
            config.d,
            config.chi,
            config.kind,
        )?;
        println!("k={}: oracle {:.6} ± {:.6}   replica chain {:.6}", est.k, est.mean, est.stderr, exact.value());
    }
    Ok(())
}
