//! The free unidirectional chain is a single Jordan block: all eigenvalues
//! coalesce at zero with one eigenvector. A dc force lifts the degeneracy.

use unihop::spectral::{analyze_spectrum, AnalyzeOptions};
use unihop::{build_hamiltonian, LatticeSpec, C64};

fn main() -> unihop::Result<()> {
    let k1 = C64::new(1.0, 0.0);
    for sites in [2, 4, 8, 12] {
        let h = build_hamiltonian(&LatticeSpec::chain(sites, k1, C64::new(0.0, 0.0), 0.0))?;
        let report = analyze_spectrum(&h, AnalyzeOptions::default())?;
        let c = &report.clusters[0];
        println!(
            "sites {sites:>2}: {} cluster(s) at {:.1e}, EP order {}, ranks of (H - E)^k: {:?}",
            report.clusters.len(),
            c.value.norm(),
            c.ep_order,
            c.rank_sequence
        );
    }

    // a small backward hopping splits the EP into a ring of radius ~ |kappa2|^(1/N)
    let h = build_hamiltonian(&LatticeSpec::chain(8, k1, C64::new(1e-6, 0.0), 0.0))?;
    let split = analyze_spectrum(&h, AnalyzeOptions::default())?;
    let radius = split.eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max);
    println!(
        "kappa2 = 1e-6: {} distinct eigenvalues, max |E| = {radius:.4}",
        split.clusters.len()
    );

    let forced = build_hamiltonian(&LatticeSpec::chain(8, k1, C64::new(0.0, 0.0), 0.5))?;
    let forced = analyze_spectrum(&forced, AnalyzeOptions::default())?;
    println!(
        "F = 0.5: defective = {}, spectrum {:?}",
        forced.is_defective,
        forced.eigenvalues.iter().map(|e| e.re).collect::<Vec<_>>()
    );
    Ok(())
}
