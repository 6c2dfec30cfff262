//! Exact frame potentials from the replica chain, compared with the large-χ forms.

use projected_ensemble::replica::frame_potential;
use projected_ensemble::theory::{leading_order, scaling_variable, vacuum_limit};
use projected_ensemble::{EnsembleKind, ReplicaShape, Result, Setup};

fn main() -> Result<()> {
    let (n_a, n_b, d) = (6, 10, 2);
    let kind = EnsembleKind::Haar;
    for setup in [Setup::Staircase, Setup::Glued] {
        println!("{setup:?}");
        for chi in [16, 64, 256, 1024] {
            let x = scaling_variable(setup, kind, d, chi, n_a);
            for k in 1..=3 {
                let shape = ReplicaShape::new(0, k)?;
                let f = frame_potential(setup, shape, n_a, n_b, d, chi, kind)?;
                let lo = leading_order(setup, shape, n_a, n_b, d, chi, kind);
                let vac = vacuum_limit(setup, shape, n_a, n_b, d, chi, kind)?;
                println!(
                    "  chi={chi:5} x={x:.4} k={k}: ln F = {:10.4}  F/leading = {:.5}  F/vacuum = {:.5}",
                    f.ln(),
                    f.ratio(&lo),
                    f.ratio(&vac)
                );
            }
        }
    }
    Ok(())
}
