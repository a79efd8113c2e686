//! Unidirectional hopping from modulated complex potentials: averaged
//! hopping at a rounded guess, then the exact root where the backward
//! hopping vanishes.

use std::f64::consts::PI;

use unihop::engineering::{effective_hopping, solve_unidirectional, solve_unidirectional_scan, ModulationProtocol};
use unihop::C64;

fn main() -> unihop::Result<()> {
    let (theta, x) = (PI / 2.0, 0.8);
    let rough = ModulationProtocol::from_dimensionless(theta, x, C64::new(3.0, 0.7), 1.0)?;
    let h = effective_hopping(&rough, 1.0)?;
    println!(
        "Gamma = 3+0.7i: rho = {:.4}{:+.4}i, |sigma| = {:.2e}, quadrature check {:.1e}",
        h.rho.re,
        h.rho.im,
        h.sigma.norm(),
        h.quadrature_deviation.unwrap_or(f64::NAN)
    );

    let root = solve_unidirectional(theta, x, C64::new(3.0, 0.7))?;
    println!(
        "root: Gamma* = {:.10}{:+.10}i after {} iterations, |sigma| = {:.1e}, rho = {:.6}{:+.6}i",
        root.gamma.re, root.gamma.im, root.iterations, root.sigma_residual, root.rho.re, root.rho.im
    );
    let p = ModulationProtocol::from_dimensionless(theta, x, root.gamma, 1.0)?;
    println!(
        "drive amplitude alpha + i beta = {:.4}{:+.4}i over T1 = {}",
        p.alpha, p.beta, p.t1
    );

    for x in [0.5, 0.6, 0.7, 0.9] {
        let r = solve_unidirectional_scan(theta, x, (0.5, 6.0), (-2.0, 2.0))?;
        println!(
            "x = {x}: Gamma* = {:.6}{:+.6}i, rho = {:+.3}i",
            r.gamma.re, r.gamma.im, r.rho.im
        );
    }
    Ok(())
}
