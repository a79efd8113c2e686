//! Bloch oscillations of a Gaussian wavepacket in a truncated lattice with a
//! dc force, for reciprocal and unidirectional hopping.

use std::f64::consts::PI;

use unihop::dynamics::{com_periodicity_error, evolve_rk4, revival_error, EvolveConfig};
use unihop::{LatticeSpec, StateVector, C64};

fn main() -> unihop::Result<()> {
    let force: f64 = -0.6;
    let period = 2.0 * PI / force.abs();
    let kappa = C64::new(1.0, 0.0);
    for (label, kappa2) in [("reciprocal", kappa), ("unidirectional", C64::new(0.0, 0.0))] {
        let spec = LatticeSpec::chain(16, kappa, kappa2, force);
        let c0 = StateVector::gaussian(&spec, 7.5, 3.0)?;
        let cfg = EvolveConfig::rk4(3.0 * period, period / 1e4).recording_every(100);
        let traj = evolve_rk4(&spec, &c0, &cfg, None)?;
        println!(
            "{label:>15}: revival error {:.3e}, <n> periodicity error {:.3e}",
            revival_error(&traj, period)?,
            com_periodicity_error(&traj, period)?
        );
    }
    Ok(())
}
