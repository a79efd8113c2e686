//! Lattice geometries, Hamiltonian matrices and the equation-of-motion
//! right-hand side `i dc/dt = H(t) c`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Infinite chain, simulated on a finite window of absolute site indices.
    InfiniteChain,
    /// Open chain with sites `0..=N`.
    FiniteChain,
    /// Closed ring with sites `0..=N` and the bond `N -> 0`.
    Ring,
}

/// Inclusive range of absolute site indices `n_min..=n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub n_min: i64,
    pub n_max: i64,
}

impl Window {
    pub fn new(n_min: i64, n_max: i64) -> Self {
        Self { n_min, n_max }
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n_max < self.n_min
    }
}

/// Full description of a homogeneous lattice.
///
/// `kappa1` is the coefficient of `c_{n+1}` in the equation for `c_n`
/// (`H[n][n+1]`), `kappa2` the coefficient of `c_{n-1}` (`H[n+1][n]`).
/// `kappa2 = 0` selects unidirectional hopping. The Stark term is `F n`
/// with the absolute site index `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub geometry: Geometry,
    /// Number of sites `N + 1`; unused for [`Geometry::InfiniteChain`].
    pub sites: usize,
    pub kappa1: C64,
    pub kappa2: C64,
    pub force: f64,
    /// Simulation window; only used for [`Geometry::InfiniteChain`].
    pub window: Window,
}

impl LatticeSpec {
    pub fn chain(sites: usize, kappa1: C64, kappa2: C64, force: f64) -> Self {
        Self {
            geometry: Geometry::FiniteChain,
            sites,
            kappa1,
            kappa2,
            force,
            window: Window::new(0, sites as i64 - 1),
        }
    }

    pub fn ring(sites: usize, kappa1: C64, kappa2: C64) -> Self {
        Self {
            geometry: Geometry::Ring,
            sites,
            kappa1,
            kappa2,
            force: 0.0,
            window: Window::new(0, sites as i64 - 1),
        }
    }

    pub fn infinite(window: Window, kappa1: C64, kappa2: C64, force: f64) -> Self {
        Self {
            geometry: Geometry::InfiniteChain,
            sites: window.len(),
            kappa1,
            kappa2,
            force,
            window,
        }
    }

    pub fn with_force(mut self, force: f64) -> Self {
        self.force = force;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("kappa1", self.kappa1)?;
        check_finite("kappa2", self.kappa2)?;
        if !self.force.is_finite() {
            return param("force must be finite");
        }
        match self.geometry {
            Geometry::FiniteChain if self.sites < 1 => param("a finite chain needs at least 1 site"),
            Geometry::Ring if self.sites < 2 => param("a ring needs at least 2 sites"),
            Geometry::InfiniteChain if self.window.n_min >= self.window.n_max => param(format!(
                "degenerate window [{}, {}]: need n_min < n_max",
                self.window.n_min, self.window.n_max
            )),
            _ => Ok(()),
        }
    }

    /// Dimension of the simulated Hilbert space.
    pub fn dim(&self) -> usize {
        match self.geometry {
            Geometry::InfiniteChain => self.window.len(),
            _ => self.sites,
        }
    }

    /// Absolute site index of the first basis state.
    pub fn offset(&self) -> i64 {
        match self.geometry {
            Geometry::InfiniteChain => self.window.n_min,
            _ => 0,
        }
    }

    pub fn is_unidirectional(&self) -> bool {
        self.kappa2 == ZERO
    }

    /// Hopping amplitudes at time `t` with the ring Peierls phase applied.
    ///
    /// The forward bond carries `exp(i r t)` and the backward bond the
    /// opposite phase, so a Hermitian ring stays Hermitian under flux.
    fn phased_hopping(&self, t: f64, flux_rate: Option<f64>) -> (C64, C64) {
        match flux_rate {
            Some(rate) => {
                let phase = C64::from_polar(1.0, rate * t);
                (self.kappa1 * phase, self.kappa2 * phase.conj())
            }
            None => (self.kappa1, self.kappa2),
        }
    }

    fn check_flux(&self, flux_rate: Option<f64>) -> Result<()> {
        match flux_rate {
            Some(_) if self.geometry != Geometry::Ring => param("a flux rate is only meaningful for the ring geometry"),
            Some(r) if !r.is_finite() => param("flux rate must be finite"),
            _ => Ok(()),
        }
    }
}

pub(crate) fn check_finite(name: &str, z: C64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        param(format!("{name} must be finite, got {z}"))
    }
}

/// Dense Hamiltonian over the Wannier basis, `H[n][m] = <n|H|m>`.
///
/// Row and column `i` correspond to the absolute site index `offset + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub offset: i64,
    pub matrix: DMatrix<C64>,
}

impl HamiltonianMatrix {
    pub fn new(offset: i64, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return param(format!(
                "Hamiltonian must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        if matrix.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return param("Hamiltonian has non-finite entries");
        }
        Ok(Self { offset, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.len() != self.dim() {
            return param(format!(
                "state length {} does not match dimension {}",
                state.len(),
                self.dim()
            ));
        }
        let v = nalgebra::DVector::from_column_slice(&state.amps);
        let out = &self.matrix * v;
        Ok(StateVector {
            offset: state.offset,
            amps: out.iter().copied().collect(),
        })
    }
}

#[derive(Serialize)]
struct HamiltonianJson<'a> {
    dim: usize,
    offset: i64,
    entries: Vec<Vec<&'a C64>>,
}

impl Serialize for HamiltonianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let entries = (0..n).map(|r| (0..n).map(|c| &self.matrix[(r, c)]).collect()).collect();
        HamiltonianJson {
            dim: n,
            offset: self.offset,
            entries,
        }
        .serialize(s)
    }
}

/// Amplitudes `c_n` over consecutive absolute site indices starting at `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub offset: i64,
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn new(offset: i64, amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return param("state vector must have at least one amplitude");
        }
        if amps.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return param("state vector has non-finite amplitudes");
        }
        Ok(Self { offset, amps })
    }

    pub fn zeros(offset: i64, len: usize) -> Self {
        Self {
            offset,
            amps: vec![ZERO; len],
        }
    }

    /// `c_n = delta_{n, site}` on the basis of `spec`.
    pub fn single_site(spec: &LatticeSpec, site: i64) -> Result<Self> {
        let mut s = Self::zeros(spec.offset(), spec.dim());
        let idx = s
            .index_of(site)
            .ok_or_else(|| Error::Parameter(format!("site {site} lies outside the lattice")))?;
        s.amps[idx] = ONE;
        Ok(s)
    }

    /// Gaussian `c_n = exp[-(n - center)^2 / width^2]`.
    pub fn gaussian(spec: &LatticeSpec, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !center.is_finite() {
            return param("Gaussian needs a finite center and a positive width");
        }
        let offset = spec.offset();
        let amps = (0..spec.dim())
            .map(|i| {
                let n = (offset + i as i64) as f64;
                C64::new((-(n - center).powi(2) / (width * width)).exp(), 0.0)
            })
            .collect();
        Ok(Self { offset, amps })
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn site(&self, i: usize) -> i64 {
        self.offset + i as i64
    }

    pub fn index_of(&self, site: i64) -> Option<usize> {
        let i = site - self.offset;
        (i >= 0 && (i as usize) < self.amps.len()).then_some(i as usize)
    }

    /// Amplitude at an absolute site index, zero outside the stored range.
    pub fn amp(&self, site: i64) -> C64 {
        self.index_of(site).map_or(ZERO, |i| self.amps[i])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.amps.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Builds `<n|H|m>` for a finite geometry or an infinite-chain window.
pub fn build_hamiltonian(spec: &LatticeSpec) -> Result<HamiltonianMatrix> {
    hamiltonian_at(spec, 0.0, None)
}

/// The Hamiltonian at time `t`, with the ring Peierls phase when `flux_rate`
/// is given.
pub fn hamiltonian_at(spec: &LatticeSpec, t: f64, flux_rate: Option<f64>) -> Result<HamiltonianMatrix> {
    spec.validate()?;
    spec.check_flux(flux_rate)?;
    let dim = spec.dim();
    let offset = spec.offset();
    let (fwd, bwd) = spec.phased_hopping(t, flux_rate);
    let mut h = DMatrix::from_element(dim, dim, ZERO);
    for i in 0..dim {
        h[(i, i)] = C64::new(spec.force * (offset + i as i64) as f64, 0.0);
    }
    for i in 0..dim.saturating_sub(1) {
        h[(i, i + 1)] += fwd;
        h[(i + 1, i)] += bwd;
    }
    if spec.geometry == Geometry::Ring {
        h[(dim - 1, 0)] += fwd;
        h[(0, dim - 1)] += bwd;
    }
    HamiltonianMatrix::new(offset, h)
}

/// Writes `dc/dt = -i H(t) c` into `out` without forming the matrix.
pub(crate) fn apply_rhs(spec: &LatticeSpec, t: f64, flux_rate: Option<f64>, c: &[C64], out: &mut [C64]) {
    let dim = c.len();
    let offset = spec.offset();
    let (fwd, bwd) = spec.phased_hopping(t, flux_rate);
    for i in 0..dim {
        let mut acc = c[i] * (spec.force * (offset + i as i64) as f64);
        if i + 1 < dim {
            acc += fwd * c[i + 1];
        }
        if i > 0 {
            acc += bwd * c[i - 1];
        }
        out[i] = acc;
    }
    if spec.geometry == Geometry::Ring && dim >= 2 {
        out[dim - 1] += fwd * c[0];
        out[0] += bwd * c[dim - 1];
    }
    for z in out.iter_mut() {
        *z = C64::new(z.im, -z.re);
    }
}

/// Time derivative `dc/dt = -i H(t) c` of a state.
pub fn rhs(spec: &LatticeSpec, t: f64, state: &StateVector, flux_rate: Option<f64>) -> Result<StateVector> {
    spec.validate()?;
    spec.check_flux(flux_rate)?;
    if state.len() != spec.dim() || state.offset != spec.offset() {
        return param(format!(
            "state (offset {}, length {}) does not match lattice (offset {}, dimension {})",
            state.offset,
            state.len(),
            spec.offset(),
            spec.dim()
        ));
    }
    let mut out = StateVector::zeros(state.offset, state.len());
    apply_rhs(spec, t, flux_rate, &state.amps, &mut out.amps);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn dense(h: &HamiltonianMatrix) -> Vec<Vec<C64>> {
        (0..h.dim())
            .map(|r| (0..h.dim()).map(|c| h.matrix[(r, c)]).collect())
            .collect()
    }

    #[test]
    fn free_chain_is_a_jordan_block() {
        let h = build_hamiltonian(&LatticeSpec::chain(3, ONE, ZERO, 0.0)).unwrap();
        let z = ZERO;
        assert_eq!(dense(&h), vec![vec![z, ONE, z], vec![z, z, ONE], vec![z, z, z]]);
    }

    #[test]
    fn forced_chain_has_stark_diagonal() {
        let h = build_hamiltonian(&LatticeSpec::chain(3, ONE, ZERO, 0.5)).unwrap();
        assert_eq!(h.matrix[(0, 0)], c(0.0));
        assert_eq!(h.matrix[(1, 1)], c(0.5));
        assert_eq!(h.matrix[(2, 2)], c(1.0));
        assert_eq!(h.matrix[(0, 1)], ONE);
        assert_eq!(h.matrix[(1, 2)], ONE);
        assert_eq!(h.matrix[(1, 0)], ZERO);
    }

    #[test]
    fn two_site_ring_wraps() {
        let k = C64::new(0.3, -0.7);
        let h = build_hamiltonian(&LatticeSpec::ring(2, k, ZERO)).unwrap();
        assert_eq!(dense(&h), vec![vec![ZERO, k], vec![k, ZERO]]);
    }

    #[test]
    fn single_site_chain() {
        let h = build_hamiltonian(&LatticeSpec::chain(1, C64::new(2.0, 1.0), ONE, 0.3)).unwrap();
        assert_eq!(dense(&h), vec![vec![ZERO]]);
    }

    #[test]
    fn infinite_window_uses_absolute_indices() {
        let spec = LatticeSpec::infinite(Window::new(-2, 1), ONE, ZERO, 0.5);
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.offset, -2);
        assert_eq!(h.matrix[(0, 0)], c(-1.0));
        assert_eq!(h.matrix[(3, 3)], c(0.5));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(build_hamiltonian(&LatticeSpec::chain(0, ONE, ZERO, 0.0)).is_err());
        assert!(build_hamiltonian(&LatticeSpec::ring(1, ONE, ZERO)).is_err());
        let w = LatticeSpec::infinite(Window::new(3, 3), ONE, ZERO, 0.0);
        assert!(matches!(build_hamiltonian(&w), Err(Error::Parameter(_))));
        let nan = LatticeSpec::chain(3, C64::new(f64::NAN, 0.0), ZERO, 0.0);
        assert!(build_hamiltonian(&nan).is_err());
    }

    #[test]
    fn rhs_of_two_site_chain() {
        let spec = LatticeSpec::chain(2, ONE, ZERO, 0.0);
        let s = StateVector::new(0, vec![ZERO, ONE]).unwrap();
        let d = rhs(&spec, 0.0, &s, None).unwrap();
        assert_eq!(d.amps, vec![C64::new(0.0, -1.0), ZERO]);
    }

    #[test]
    fn rhs_ring_with_flux_half_period() {
        let f = 0.8;
        let spec = LatticeSpec::ring(2, ONE, ZERO);
        let s = StateVector::new(0, vec![ONE, ZERO]).unwrap();
        let d = rhs(&spec, PI / f, &s, Some(f)).unwrap();
        // -i * e^{i pi} * c_0 lands on site 1 through the wrap bond
        assert_abs_diff_eq!(d.amps[0].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.amps[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.amps[1].im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_errors() {
        let chain = LatticeSpec::chain(3, ONE, ZERO, 0.0);
        let s = StateVector::zeros(0, 3);
        assert!(rhs(&chain, 0.0, &s, Some(1.0)).is_err());
        assert!(rhs(&chain, 0.0, &StateVector::zeros(0, 2), None).is_err());
        let d = rhs(&chain, 1.3, &s, None).unwrap();
        assert!(d.amps.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn hamiltonian_json_layout() {
        let h = build_hamiltonian(&LatticeSpec::chain(2, C64::new(1.0, -2.0), ZERO, 0.0)).unwrap();
        let v = serde_json::to_value(&h).unwrap();
        assert_eq!(v["dim"], 2);
        assert_eq!(v["entries"][0][1], serde_json::json!([1.0, -2.0]));
        assert_eq!(v["entries"][1][0], serde_json::json!([0.0, 0.0]));
    }
}
