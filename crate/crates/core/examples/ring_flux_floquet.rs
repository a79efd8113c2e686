//! A unidirectional ring threaded by a linearly growing flux: every
//! quasi-energy collapses to zero and the one-period propagator is the
//! identity, whatever the hopping strength.

use unihop::floquet::{monodromy, quasi_energies_analytic, DriveProfile, FluxDrive};
use unihop::{LatticeSpec, C64};

fn main() -> unihop::Result<()> {
    for sites in [3, 6, 10] {
        let drive = FluxDrive::new(1.0, sites)?;
        let spec = LatticeSpec::ring(sites, C64::new(1.5, 0.0), C64::new(0.0, 0.0));
        let report = monodromy(&spec, &drive, drive.period() / 1e4)?;
        let max_mu = report.mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
        println!(
            "sites {sites:>2}: F = {:.4}, monodromy defect {:.1e}, max |mu| = {max_mu:.1e}",
            drive.force(),
            report.monodromy_defect.unwrap_or(f64::NAN)
        );
    }

    let drive = FluxDrive::new(1.0, 6)?;
    let static_ring = quasi_energies_analytic(C64::new(1.5, 0.0), &drive, DriveProfile::Static)?;
    let reciprocal = monodromy(
        &LatticeSpec::ring(6, C64::new(1.5, 0.0), C64::new(1.5, 0.0)),
        &drive,
        drive.period() / 1e4,
    )?;
    let spread = |mu: &[C64]| mu.iter().map(|m| m.norm()).fold(0.0, f64::max);
    println!("without flux: max |mu| = {:.3}", spread(&static_ring.mu));
    println!("reciprocal ring with flux: max |mu| = {:.3}", spread(&reciprocal.mu));
    Ok(())
}
