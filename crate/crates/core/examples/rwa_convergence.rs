//! Exact simulation of the modulated lattice against the averaged
//! unidirectional model as the modulation gets faster.

use std::f64::consts::PI;

use unihop::engineering::{rwa_validate, solve_unidirectional, KickConvention, ModulationProtocol};
use unihop::{LatticeSpec, StateVector, C64};

fn main() -> unihop::Result<()> {
    let root = solve_unidirectional(PI / 2.0, 0.8, C64::new(3.0, 0.7))?;
    let protocol = ModulationProtocol::from_dimensionless(PI / 2.0, 0.8, root.gamma, 1.0)?;
    let sites = 10;
    let basis = LatticeSpec::chain(sites, C64::new(1.0, 0.0), C64::new(1.0, 0.0), 0.0);
    let c0 = StateVector::single_site(&basis, 9)?;
    let ratios = [5.0, 10.0, 20.0, 40.0, 80.0];
    for kick in [KickConvention::Resetting, KickConvention::Accumulating] {
        println!("{kick:?} phase gradient");
        for row in rwa_validate(&protocol.with_kick(kick), 1.0, &ratios, sites, &c0, 2.0 * PI)? {
            println!("  omega/kappa = {:>4}: discrepancy {:.4}", row.ratio, row.discrepancy);
        }
    }
    Ok(())
}
