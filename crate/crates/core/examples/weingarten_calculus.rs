//! Gram and Weingarten matrices over `S_m`, and the transfer matrix they build.

use projected_ensemble::permgroup::{ground_states, sigma_a, transposition_distance, SymmetricGroup};
use projected_ensemble::weingarten::{gram_matrix, interaction_matrix, weingarten_matrix, weingarten_sum_constant};
use projected_ensemble::{EnsembleKind, ReplicaShape, Result};

fn main() -> Result<()> {
    let shape = ReplicaShape::new(0, 2)?;
    let m = shape.m();
    let group = SymmetricGroup::get(m)?;
    let target = sigma_a(shape);
    println!("S_{m}: {} elements, sigma_A = {:?}", group.order(), target.images());
    for g in ground_states(shape)? {
        println!("  ground state {:?} at distance {}", g.images(), transposition_distance(&g, &target)?);
    }

    let q = 8.0;
    let gram = gram_matrix(m, q)?;
    let wg = weingarten_matrix(m, q)?;
    let residual = wg.matmul(&gram)?.max_abs_diff(&projected_ensemble::PermIndexedMatrix::identity(m)?);
    println!("q = {q}: |W G - 1|_max = {residual:.2e}");
    println!("row sum of W = {:.12}, 1/prod(q+i) = {:.12}", wg.row_sums()[0], weingarten_sum_constant(m, q, EnsembleKind::Haar));

    let t = interaction_matrix(m, 16, 2, EnsembleKind::Haar)?;
    println!("transfer matrix (d=2, chi=16): T[e,e] = {:.6}, max entry {:.6}", t.get(0, 0), t.max_abs());
    Ok(())
}
