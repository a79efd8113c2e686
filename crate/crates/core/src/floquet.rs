//! Floquet analysis of the ring threaded by a linearly growing flux.
//!
//! The flux adds the Peierls phase `exp(i F t)` to the hopping with
//! `F = 2 pi Phi0 / (N + 1)`, so the Hamiltonian is periodic with
//! `T_B = 2 pi / F`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{param, Error, Result};
use crate::lattice::{apply_rhs, Geometry, LatticeSpec, C64, ONE, ZERO};
use crate::ode::{step_count, Rk4};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxDrive {
    /// Flux growth rate in flux quanta per unit time.
    pub phi0_rate: f64,
    /// Number of ring sites `N + 1`.
    pub sites: usize,
}

impl FluxDrive {
    pub fn new(phi0_rate: f64, sites: usize) -> Result<Self> {
        let d = Self { phi0_rate, sites };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi0_rate.is_finite() || self.phi0_rate == 0.0 {
            return param("flux rate must be finite and nonzero");
        }
        if self.sites < 2 {
            return param("a ring needs at least 2 sites");
        }
        Ok(())
    }

    /// Peierls phase rate `F = 2 pi Phi0 / (N + 1)`.
    pub fn force(&self) -> f64 {
        2.0 * PI * self.phi0_rate / self.sites as f64
    }

    /// Bloch period `T_B = 2 pi / |F|`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.force().abs()
    }
}

/// Time dependence of the hopping used by [`quasi_energies_analytic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveProfile {
    /// `exp(i F t)`, the flux-threaded ring.
    Peierls,
    /// Constant 1: the static ring, as a limiting check.
    Static,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiEnergyReport {
    pub force: f64,
    pub period: f64,
    /// Quasi-energies with real parts folded into `(-|F|/2, |F|/2]`.
    pub mu: Vec<C64>,
    /// One-period propagator, row-major.
    pub monodromy: Option<Vec<Vec<C64>>>,
    /// `max |M - I|` entrywise.
    pub monodromy_defect: Option<f64>,
}

/// Folds `Re mu` into the strip `(-|F|/2, |F|/2]`.
pub fn fold_quasi_energy(mu: C64, force: f64) -> C64 {
    let w = force.abs();
    let mut r = mu.re - w * ((mu.re + 0.5 * w) / w).floor();
    if r <= -0.5 * w {
        r += w;
    }
    if r > 0.5 * w {
        r -= w;
    }
    C64::new(r, mu.im)
}

/// Quasi-energies from the period-averaged hopping,
/// `mu_l = (kappa1 / T_B) int_0^{T_B} f(t) e^{-i q_l} dt`.
pub fn quasi_energies_analytic(kappa1: C64, drive: &FluxDrive, profile: DriveProfile) -> Result<QuasiEnergyReport> {
    drive.validate()?;
    let force = drive.force();
    let period = drive.period();
    let integral = match profile {
        DriveProfile::Peierls => (C64::new(0.0, force * period).exp() - ONE) / C64::new(0.0, force),
        DriveProfile::Static => C64::new(period, 0.0),
    };
    let m = drive.sites;
    let mu = (0..m)
        .map(|l| {
            let q = 2.0 * PI * l as f64 / m as f64;
            let raw = kappa1 / period * C64::from_polar(1.0, -q) * integral;
            fold_quasi_energy(raw, force)
        })
        .collect();
    Ok(QuasiEnergyReport {
        force,
        period,
        mu,
        monodromy: None,
        monodromy_defect: None,
    })
}

/// One-period propagator of `i dc/dt = H(t) c` by RK4 on the columns of the
/// identity, and the quasi-energies `mu = i log(eig M) / T_B`.
pub fn monodromy(spec: &LatticeSpec, drive: &FluxDrive, dt: f64) -> Result<QuasiEnergyReport> {
    spec.validate()?;
    drive.validate()?;
    if spec.geometry != Geometry::Ring {
        return param("the monodromy is defined for the flux-threaded ring");
    }
    if spec.sites != drive.sites {
        return param(format!("drive has {} sites, lattice has {}", drive.sites, spec.sites));
    }
    let force = drive.force();
    let period = drive.period();
    let rate = spec.kappa1.norm().max(spec.kappa2.norm()).max(force.abs());
    if !(dt > 0.0) || dt > 0.05 / rate {
        return param(format!(
            "dt = {dt} does not resolve the drive; need dt <= {}",
            0.05 / rate
        ));
    }
    let n = spec.sites;
    let steps = step_count(period, dt);
    let h = period / steps as f64;
    let mut m = DMatrix::from_element(n, n, ZERO);
    let mut rk = Rk4::new(n);
    let mut f = |t: f64, c: &[C64], out: &mut [C64]| apply_rhs(spec, t, Some(force), c, out);
    for col in 0..n {
        let mut y = vec![ZERO; n];
        y[col] = ONE;
        for s in 0..steps {
            rk.step(&mut f, s as f64 * h, h, &mut y);
        }
        for (row, z) in y.into_iter().enumerate() {
            m[(row, col)] = z;
        }
    }
    let defect = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| (m[(r, c)] - if r == c { ONE } else { ZERO }).norm())
        .fold(0.0, f64::max);
    let mu = eigen::eigenvalues(&m)?
        .into_iter()
        .map(|lambda| {
            if lambda.norm() == 0.0 {
                return Err(Error::Computation("monodromy has a zero eigenvalue".into()));
            }
            Ok(fold_quasi_energy(C64::new(0.0, 1.0) * lambda.ln() / period, force))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuasiEnergyReport {
        force,
        period,
        mu,
        monodromy: Some((0..n).map(|r| (0..n).map(|c| m[(r, c)]).collect()).collect()),
        monodromy_defect: Some(defect),
    })
}

/// `max |M^H M - I|` entrywise, for a row-major matrix.
pub fn unitarity_defect(rows: &[Vec<C64>]) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
    let p = m.adjoint() * &m;
    (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| (p[(r, c)] - if r == c { ONE } else { ZERO }).norm())
        .fold(0.0, f64::max)
}
