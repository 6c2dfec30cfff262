//! Histogram of rescaled overlaps against the scaling-limit density.

use projected_ensemble::estimator::{overlap_histogram, EnsembleConfig};
use projected_ensemble::theory::setup1_pdf;
use projected_ensemble::Result;

fn main() -> Result<()> {
    let config = EnsembleConfig { n_a: 6, n_b: 8, chi: 64, pairs_per_state: 400, realizations: 20, seed: 3, ..Default::default() };
    let x = config.x();
    let hist = overlap_histogram(&config, 16, 8.0)?;
    println!("x = {x:.4}, mass in range {:.4}", hist.total_mass());
    println!("    u   measured            theory");
    for ((u, p), e) in hist.bin_centers.iter().zip(&hist.densities).zip(&hist.errors) {
        println!("{u:5.2}   {p:.4} ± {e:.4}   {:.4}", setup1_pdf(*u, x, config.d));
    }
    Ok(())
}
