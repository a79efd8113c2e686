//! Ring spectrum on the Bloch circle E(q) = kappa1 e^{iq} + kappa2 e^{-iq},
//! checked against the dense eigensolver.

use std::f64::consts::PI;

use unihop::spectral::{bloch_dispersion, ring_spectrum};
use unihop::{LatticeSpec, C64};

fn main() -> unihop::Result<()> {
    let samples: Vec<f64> = (0..8).map(|k| -PI + k as f64 * PI / 4.0).collect();
    for s in bloch_dispersion(C64::new(1.0, 0.0), &samples)? {
        println!("q = {:+.3}: E = {:+.3} {:+.3}i", s.q, s.energy.re, s.energy.im);
    }
    for (k1, k2) in [(1.0, 0.0), (1.0, 0.5), (1.0, 1.0)] {
        let report = ring_spectrum(&LatticeSpec::ring(6, C64::new(k1, 0.0), C64::new(k2, 0.0)))?;
        println!(
            "kappa1 = {k1}, kappa2 = {k2}: max |Im E| = {:.3}, dense check {:.1e}",
            report.max_imag(),
            report.dense_check.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
