//! Scaling-limit moment ratios, overlap densities and the confinement series.

use projected_ensemble::theory::{f_alpha, series_ratio_setup1, setup1_pdf, setup1_ratio, setup2_pdf, setup2_ratio, FAlphaMode};
use projected_ensemble::Result;

fn main() -> Result<()> {
    let d = 2;
    println!("  x    k  staircase   glued");
    for x in [0.0, 0.25, 0.5, 1.0] {
        for k in 1..=3 {
            println!("{x:5} {k:2} {:10.5} {:10.5}", setup1_ratio(k, x, d), setup2_ratio(k, x, d));
        }
    }

    println!("\noverlap density at x = 0.5");
    for u in [0.1, 0.5, 1.0, 2.0, 4.0] {
        println!("  u={u:4}: staircase {:.6}  glued {:.6}  Porter-Thomas {:.6}", setup1_pdf(u, 0.5, d), setup2_pdf(u, 0.5, d), (-u).exp());
    }

    println!("\nconfinement coefficients f_alpha (d = 2)");
    for alpha in 0..=4 {
        let direct = f_alpha(alpha, d, FAlphaMode::Direct)?;
        let closed = f_alpha(alpha, d, FAlphaMode::Closed)?;
        println!("  alpha={alpha}: direct {direct:.12}  closed {closed:.12}");
    }
    println!("series k=2, x=0.3: {:.10} vs {:.10}", series_ratio_setup1(2, 0.3, d)?, setup1_ratio(2, 0.3, d));
    Ok(())
}
