//! Random gates: Haar unitaries, Haar isometries and Gaussian matrices.

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// `rows × cols` matrix of i.i.d. complex Gaussians with `E|z|² = variance`.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> Array2<Complex64> {
    let s = (variance / 2.0).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

/// Haar-random `q × q` unitary.
pub fn haar_unitary<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<Array2<Complex64>> {
    haar_isometry(q, q, rng)
}

/// The first `cols` columns of a Haar-random `rows × rows` unitary.
///
/// Obtained from the QR factorization of a standard complex Gaussian
/// `rows × cols` matrix, with each column of `Q` multiplied by the phase of
/// the matching diagonal entry of `R` so that the law is exactly Haar.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Array2<Complex64>> {
    if rows == 0 || cols == 0 || cols > rows {
        return Err(Error::Shape(format!("isometry of shape {rows}×{cols}")));
    }
    let z = gaussian_matrix(rows, cols, 1.0, rng);
    let mat = DMatrix::from_fn(rows, cols, |r, c| z[[r, c]]);
    let qr = mat.qr();
    let q = qr.q();
    let r = qr.r();
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 { d / norm } else { Complex64::new(1.0, 0.0) };
        q[(i, j)] * phase
    }))
}
