//! Wannier-Stark ladder of the forced unidirectional chain: real, equally
//! spaced energies E_l = l F with one-sided eigenvectors.

use unihop::spectral::{analyze_spectrum, eigen_residual, wannier_stark_states, AnalyzeOptions};
use unihop::{build_hamiltonian, LatticeSpec, C64};

fn main() -> unihop::Result<()> {
    let spec = LatticeSpec::chain(16, C64::new(1.0, 0.0), C64::new(0.0, 0.0), 0.6);
    let h = build_hamiltonian(&spec)?;
    let report = analyze_spectrum(&h, AnalyzeOptions::default())?;
    let ladder: Vec<String> = report.eigenvalues.iter().map(|e| format!("{:.3}", e.re)).collect();
    println!("eigenvalues: {}", ladder.join(" "));
    println!("max |Im E| = {:.2e}", report.max_imag());

    for ws in wannier_stark_states(&spec, &[0, 5, 15])? {
        let profile: Vec<String> = ws.state.amps.iter().map(|a| format!("{:.2e}", a.norm())).collect();
        println!(
            "l = {:>2}, E = {:.2}, residual {:.1e}, |a_n| = [{}]",
            ws.ladder_index,
            ws.energy.re,
            eigen_residual(&h, ws.energy, &ws.state)?,
            profile.join(", ")
        );
    }
    Ok(())
}
