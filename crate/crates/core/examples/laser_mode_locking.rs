//! Mode-locked laser with amplitude and phase modulators. With equal
//! modulation depths and a quarter-period offset the modal coupling is
//! unidirectional, and the spectrum breathes periodically.

use std::f64::consts::PI;

use unihop::dynamics::{revival_error, EvolveConfig};
use unihop::engineering::{laser_effective_couplings, laser_evolve, LaserParams, LaserWindow};
use unihop::StateVector;

fn main() -> unihop::Result<()> {
    let base = LaserParams {
        g: 0.0,
        l: 0.0,
        dg: 0.0,
        delta_am: 0.5,
        delta_fm: 0.5,
        phi: -PI / 2.0,
        force: 0.5,
    };
    let window = LaserWindow::default();
    let mut c0 = StateVector::zeros(window.modes.n_min, window.modes.len());
    c0.amps[32] = 1.0.into();
    let period = 2.0 * PI / base.force;

    for (label, p) in [
        ("unidirectional", base),
        ("FM only", LaserParams { delta_am: 0.0, ..base }),
        (
            "lossy, uncoupled",
            LaserParams {
                l: 0.05,
                delta_am: 0.0,
                delta_fm: 0.0,
                ..base
            },
        ),
    ] {
        let c = laser_effective_couplings(&p);
        let traj = laser_evolve(
            &p,
            &window,
            &c0,
            &EvolveConfig::rk4(2.0 * period, period / 1e4).recording_every(100),
        )?;
        let last = traj.observables.last().unwrap();
        println!(
            "{label:>16}: forward {:.2}{:+.2}i backward {:.2}{:+.2}i, revival error {:.1e}, weight after 2 T_B {:.4}",
            c.forward.re,
            c.forward.im,
            c.backward.re,
            c.backward.im,
            revival_error(&traj, period)?,
            last.total_weight
        );
    }
    Ok(())
}
