//! Free unidirectional dynamics: the propagator is a truncated exponential
//! series, so amplitude only ever moves toward lower sites. Closed-form and
//! RK4 evolution agree.

use unihop::dynamics::{evolve_closed_form, evolve_rk4, EvolveConfig};
use unihop::{LatticeSpec, StateVector, C64};

fn main() -> unihop::Result<()> {
    let spec = LatticeSpec::chain(12, C64::new(1.0, 0.0), C64::new(0.0, 0.0), 0.0);
    let c0 = StateVector::single_site(&spec, 8)?;
    let cfg = EvolveConfig::rk4(4.0, 1e-3).recording_every(1000);
    let exact = evolve_closed_form(&spec, &c0, &cfg.record_times())?;
    let rk4 = evolve_rk4(&spec, &c0, &cfg, None)?;
    for (i, t) in exact.times.iter().enumerate() {
        let (a, b) = (&exact.states[i], &rk4.states[i]);
        let err = a
            .amps
            .iter()
            .zip(&b.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let above = a.amps[9..].iter().map(|z| z.norm()).fold(0.0, f64::max);
        println!(
            "t = {t:.1}: <n> = {:.4}, weight = {:.4}, |c_n>8| = {above:.0e}, RK4 deviation {err:.1e}",
            exact.observables[i].center_of_mass, exact.observables[i].total_weight
        );
    }
    Ok(())
}
