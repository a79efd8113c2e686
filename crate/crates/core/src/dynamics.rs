//! Time evolution: exact propagators for the free unidirectional lattice,
//! fixed-step RK4 for everything else, and Bloch-oscillation observables.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::lattice::{apply_rhs, Geometry, LatticeSpec, StateVector, C64, ONE, ZERO};
use crate::ode::{step_count, Rk4};

/// Amplitudes beyond this magnitude abort an integration.
pub const OVERFLOW_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    pub method: Method,
    pub record_every: usize,
    /// Renormalize after every step and track the accumulated log scale.
    #[serde(default)]
    pub normalize: bool,
}

impl EvolveConfig {
    pub fn rk4(t_end: f64, dt: f64) -> Self {
        Self {
            t_end,
            dt,
            method: Method::Rk4,
            record_every: 1,
            normalize: false,
        }
    }

    pub fn recording_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return param("t_end must be finite and non-negative");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return param("dt must be positive");
        }
        if self.t_end > 0.0 && self.dt > self.t_end {
            return param(format!("dt = {} exceeds t_end = {}", self.dt, self.t_end));
        }
        if self.record_every == 0 {
            return param("record_every must be at least 1");
        }
        Ok(())
    }

    /// Equally spaced record times `0, dt * record_every, ..., t_end`.
    pub fn record_times(&self) -> Vec<f64> {
        if self.t_end == 0.0 {
            return vec![0.0];
        }
        let steps = step_count(self.t_end, self.dt);
        let h = self.t_end / steps as f64;
        (0..=steps)
            .filter(|s| s % self.record_every == 0 || *s == steps)
            .map(|s| if s == steps { self.t_end } else { s as f64 * h })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    /// `<n> = sum n |c_n|^2 / sum |c_n|^2`.
    pub center_of_mass: f64,
    /// `sum |c_n|^2` of the raw (unnormalized) amplitudes.
    pub total_weight: f64,
    /// `|<c(0)|c(t)>|^2 / (||c(0)||^2 ||c(t)||^2)`; phase and scale invariant.
    pub revival_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub observables: Vec<Observables>,
    /// Natural log of the factor removed from each recorded state when the
    /// integration renormalizes; raw amplitudes are `state * exp(log_scale)`.
    pub log_scale: Option<Vec<f64>>,
}

impl StateTrajectory {
    fn build(times: Vec<f64>, states: Vec<StateVector>, log_scale: Option<Vec<f64>>) -> Result<Self> {
        let c0 = &states[0];
        let observables = states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let scale = log_scale.as_ref().map_or(0.0, |l| l[i]);
                Ok(Observables {
                    center_of_mass: center_of_mass(s)?,
                    total_weight: s.norm_sqr() * (2.0 * scale).exp(),
                    revival_fidelity: fidelity(c0, s),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times,
            states,
            observables,
            log_scale,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Raw amplitudes of record `i`.
    pub fn raw_state(&self, i: usize) -> Vec<C64> {
        let scale = self.log_scale.as_ref().map_or(1.0, |l| l[i].exp());
        self.states[i].amps.iter().map(|z| z * scale).collect()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectories are never empty")
    }

    /// Writes the amplitude table `t,site,re,im`, one row per site and record.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "site", "re", "im"])?;
        for (i, (&t, s)) in self.times.iter().zip(&self.states).enumerate() {
            for (j, z) in self.raw_state(i).iter().enumerate() {
                out.serialize((t, s.site(j), z.re, z.im))?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Writes the observables table `t,com,weight,revival`.
    pub fn write_observables_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "com", "weight", "revival"])?;
        for (&t, o) in self.times.iter().zip(&self.observables) {
            out.serialize((t, o.center_of_mass, o.total_weight, o.revival_fidelity))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    let overlap: C64 = a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum();
    let denom = a.norm_sqr() * b.norm_sqr();
    if denom == 0.0 {
        0.0
    } else {
        overlap.norm_sqr() / denom
    }
}

/// Weighted mean absolute site index `sum n |c_n|^2 / sum |c_n|^2`.
pub fn center_of_mass(state: &StateVector) -> Result<f64> {
    let weight = state.norm_sqr();
    if !(weight > 0.0) || !weight.is_finite() {
        return Err(Error::UndefinedValue(format!(
            "center of mass of a state with weight {weight}"
        )));
    }
    let moment: f64 = state
        .amps
        .iter()
        .enumerate()
        .map(|(i, z)| state.site(i) as f64 * z.norm_sqr())
        .sum();
    Ok(moment / weight)
}

/// Fraction of the weight sitting on the `edge_sites` outermost sites at
/// either end of the stored range.
pub fn boundary_weight(state: &StateVector, edge_sites: usize) -> f64 {
    let n = state.len();
    let total = state.norm_sqr();
    if total == 0.0 {
        return 0.0;
    }
    let k = edge_sites.min(n);
    let edge: f64 = (0..n)
        .filter(|&i| i < k || i + k >= n)
        .map(|i| state.amps[i].norm_sqr())
        .sum();
    edge / total
}

/// Series terms up to this order are formed by direct products.
const DIRECT_TERMS: u64 = 64;

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `U_{n,l}(t) = (-i kappa1 t)^{l-n} / (l-n)!` for `l >= n`, zero otherwise.
pub fn propagator_entry_unidirectional(kappa1: C64, t: f64, n: i64, l: i64) -> C64 {
    if l < n {
        return ZERO;
    }
    let k = (l - n) as u64;
    if k == 0 {
        return ONE;
    }
    let z = C64::new(0.0, -t) * kappa1;
    if z.norm() == 0.0 {
        return ZERO;
    }
    if k <= DIRECT_TERMS {
        return (1..=k).fold(ONE, |acc, i| acc * z / i as f64);
    }
    let log_mag = k as f64 * z.norm().ln() - ln_factorial(k);
    C64::from_polar(log_mag.exp(), k as f64 * z.arg())
}

fn check_state(spec: &LatticeSpec, c0: &StateVector) -> Result<()> {
    if c0.len() != spec.dim() || c0.offset != spec.offset() {
        return param(format!(
            "initial state (offset {}, length {}) does not match lattice (offset {}, dimension {})",
            c0.offset,
            c0.len(),
            spec.offset(),
            spec.dim()
        ));
    }
    StateVector::new(c0.offset, c0.amps.clone()).map(|_| ())
}

/// Exact evolution of the free unidirectional lattice at the given times.
///
/// Chains use the triangular factorial kernel (amplitudes that would leave
/// the chain through site 0 or the window's lower edge are dropped); the
/// ring uses the discrete Bloch-wave sum.
pub fn evolve_closed_form(spec: &LatticeSpec, c0: &StateVector, times: &[f64]) -> Result<StateTrajectory> {
    spec.validate()?;
    check_state(spec, c0)?;
    if spec.force != 0.0 || !spec.is_unidirectional() {
        return param("closed-form evolution needs F = 0 and kappa2 = 0; use the RK4 method");
    }
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return param("times must be finite and strictly increasing");
    }
    let dim = spec.dim();
    let states: Vec<StateVector> = match spec.geometry {
        Geometry::FiniteChain | Geometry::InfiniteChain => times
            .iter()
            .map(|&t| {
                let amps = (0..dim)
                    .map(|i| {
                        (i..dim)
                            .map(|j| propagator_entry_unidirectional(spec.kappa1, t, i as i64, j as i64) * c0.amps[j])
                            .sum()
                    })
                    .collect();
                StateVector {
                    offset: c0.offset,
                    amps,
                }
            })
            .collect(),
        Geometry::Ring => {
            let m = dim as f64;
            let qs: Vec<f64> = (0..dim).map(|k| 2.0 * PI * k as f64 / m).collect();
            // Bloch components b_k = sum_l e^{-i q_k l} c_l
            let b: Vec<C64> = qs
                .iter()
                .map(|&q| {
                    c0.amps
                        .iter()
                        .enumerate()
                        .map(|(l, c)| c * C64::from_polar(1.0, -q * l as f64))
                        .sum()
                })
                .collect();
            times
                .iter()
                .map(|&t| {
                    let weights: Vec<C64> = qs
                        .iter()
                        .zip(&b)
                        .map(|(&q, bk)| {
                            let e = spec.kappa1 * C64::from_polar(1.0, q);
                            bk * (C64::new(0.0, -t) * e).exp() / m
                        })
                        .collect();
                    let amps = (0..dim)
                        .map(|n| {
                            qs.iter()
                                .zip(&weights)
                                .map(|(&q, w)| w * C64::from_polar(1.0, q * n as f64))
                                .sum()
                        })
                        .collect();
                    StateVector { offset: 0, amps }
                })
                .collect()
        }
    };
    StateTrajectory::build(times.to_vec(), states, None)
}

/// Largest rate in the generator, used for the step-size rule.
fn fastest_rate(spec: &LatticeSpec, flux_rate: Option<f64>) -> f64 {
    let stark = match spec.geometry {
        Geometry::InfiniteChain => {
            spec.force.abs()
                * (spec.dim() as f64)
                    .max(spec.window.n_min.unsigned_abs() as f64)
                    .max(spec.window.n_max.unsigned_abs() as f64)
        }
        _ => spec.force.abs() * spec.dim() as f64,
    };
    spec.kappa1
        .norm()
        .max(spec.kappa2.norm())
        .max(stark)
        .max(flux_rate.map_or(0.0, f64::abs))
}

/// Fixed-step RK4 for an arbitrary right-hand side `dc/dt = f(t, c)`.
///
/// `fastest_rate` sets the step-size rule `dt <= 0.05 / fastest_rate`.
pub fn integrate<F>(mut f: F, c0: &StateVector, cfg: &EvolveConfig, fastest_rate: f64) -> Result<StateTrajectory>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    cfg.validate()?;
    StateVector::new(c0.offset, c0.amps.clone())?;
    if fastest_rate > 0.0 && cfg.dt > 0.05 / fastest_rate * (1.0 + 1e-12) {
        return param(format!(
            "dt = {} does not resolve the fastest rate {fastest_rate}; need dt <= {}",
            cfg.dt,
            0.05 / fastest_rate
        ));
    }
    let mut times = vec![0.0];
    let mut states = vec![c0.clone()];
    let mut scales = vec![0.0];
    if cfg.t_end > 0.0 {
        let steps = step_count(cfg.t_end, cfg.dt);
        let h = cfg.t_end / steps as f64;
        let mut y = c0.amps.clone();
        let mut log_scale = 0.0;
        let mut rk = Rk4::new(y.len());
        for s in 0..steps {
            let t = s as f64 * h;
            rk.step(&mut f, t, h, &mut y);
            let max_abs = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !(max_abs <= OVERFLOW_LIMIT) {
                return Err(Error::Overflow {
                    time: t + h,
                    max_amplitude: max_abs,
                });
            }
            if cfg.normalize {
                let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 {
                    y.iter_mut().for_each(|z| *z /= norm);
                    log_scale += norm.ln();
                }
            }
            let done = s + 1;
            if done % cfg.record_every == 0 || done == steps {
                times.push(if done == steps { cfg.t_end } else { done as f64 * h });
                states.push(StateVector {
                    offset: c0.offset,
                    amps: y.clone(),
                });
                scales.push(log_scale);
            }
        }
    }
    StateTrajectory::build(times, states, cfg.normalize.then_some(scales))
}

/// RK4 integration of `i dc/dt = H(t) c` for any lattice, with the ring
/// Peierls phase `exp(i flux_rate t)` when `flux_rate` is given.
pub fn evolve_rk4(
    spec: &LatticeSpec,
    c0: &StateVector,
    cfg: &EvolveConfig,
    flux_rate: Option<f64>,
) -> Result<StateTrajectory> {
    spec.validate()?;
    check_state(spec, c0)?;
    if flux_rate.is_some() && spec.geometry != Geometry::Ring {
        return param("a flux rate is only meaningful for the ring geometry");
    }
    let spec_copy = *spec;
    integrate(
        move |t, c, out| apply_rhs(&spec_copy, t, flux_rate, c, out),
        c0,
        cfg,
        fastest_rate(spec, flux_rate),
    )
}

/// Dispatches on `cfg.method`.
pub fn evolve(
    spec: &LatticeSpec,
    c0: &StateVector,
    cfg: &EvolveConfig,
    flux_rate: Option<f64>,
) -> Result<StateTrajectory> {
    match cfg.method {
        Method::Rk4 => evolve_rk4(spec, c0, cfg, flux_rate),
        Method::ClosedForm => {
            cfg.validate()?;
            if flux_rate.is_some() {
                return param("no closed form with a time-dependent flux; use the RK4 method");
            }
            evolve_closed_form(spec, c0, &cfg.record_times())
        }
    }
}

/// Raw amplitudes at time `t`, linearly interpolated between records.
pub fn state_at(traj: &StateTrajectory, t: f64) -> Result<Vec<C64>> {
    let times = &traj.times;
    let last = *times.last().expect("trajectories are never empty");
    let slack = 1e-9 * t.abs().max(1.0);
    if t < times[0] - slack || t > last + slack {
        return param(format!("t = {t} outside the recorded range [{}, {last}]", times[0]));
    }
    let j = times.partition_point(|&s| s < t);
    if j == 0 {
        return Ok(traj.raw_state(0));
    }
    if j >= times.len() {
        return Ok(traj.raw_state(times.len() - 1));
    }
    if (times[j] - t).abs() <= slack {
        return Ok(traj.raw_state(j));
    }
    let w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    let a = traj.raw_state(j - 1);
    let b = traj.raw_state(j);
    Ok(a.iter().zip(&b).map(|(x, y)| x * (1.0 - w) + y * w).collect())
}

/// `||c(period) - c(0)|| / ||c(0)||` on raw amplitudes.
pub fn revival_error(traj: &StateTrajectory, period: f64) -> Result<f64> {
    if !(period > 0.0) {
        return param("period must be positive");
    }
    let spacing = if traj.len() > 1 {
        traj.times[1] - traj.times[0]
    } else {
        0.0
    };
    if traj.times[0].abs() > spacing.max(1e-12) {
        return param("trajectory does not start at t = 0");
    }
    let last = *traj.times.last().unwrap();
    if last < period * (1.0 - 1e-9) {
        return param(format!("trajectory ends at {last}, before one period {period}"));
    }
    let start = traj.raw_state(0);
    let end = state_at(traj, period)?;
    let norm0 = start.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return Err(Error::UndefinedValue("revival of the zero state".into()));
    }
    let diff = start
        .iter()
        .zip(&end)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm0)
}

/// Largest `|<n>(t + period) - <n>(t)|` over the recorded times that have a
/// partner one period later.
pub fn com_periodicity_error(traj: &StateTrajectory, period: f64) -> Result<f64> {
    let last = *traj.times.last().unwrap();
    let mut worst: f64 = 0.0;
    let mut any = false;
    for (i, &t) in traj.times.iter().enumerate() {
        if t + period > last * (1.0 + 1e-12) {
            break;
        }
        any = true;
        let later = StateVector {
            offset: traj.states[i].offset,
            amps: state_at(traj, t + period)?,
        };
        worst = worst.max((center_of_mass(&later)? - traj.observables[i].center_of_mass).abs());
    }
    if !any {
        return param("trajectory shorter than one period");
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn propagator_entries() {
        let i = C64::new(0.0, 1.0);
        assert_eq!(propagator_entry_unidirectional(ONE, 1.0, 0, 0), ONE);
        assert!(close(propagator_entry_unidirectional(ONE, 1.0, -1, 0), -i, 1e-15));
        assert!(close(
            propagator_entry_unidirectional(ONE, 1.0, -2, 0),
            C64::new(-0.5, 0.0),
            1e-15
        ));
        assert!(close(
            propagator_entry_unidirectional(ONE, 2.0, 0, 3),
            i * (4.0 / 3.0),
            1e-14
        ));
        assert_eq!(propagator_entry_unidirectional(ONE, 1.0, 1, 0), ZERO);
        assert_eq!(propagator_entry_unidirectional(ONE, 0.0, 3, 3), ONE);
        assert_eq!(propagator_entry_unidirectional(ONE, 0.0, 2, 3), ZERO);
        // large separations stay finite and tiny
        let far = propagator_entry_unidirectional(C64::new(30.0, 0.0), 1.0, 0, 200);
        let log_expected = 200.0 * 30f64.ln() - ln_factorial(200);
        assert!((far.norm().ln() - log_expected).abs() < 1e-10);
        let direct = propagator_entry_unidirectional(C64::new(3.0, 0.0), 1.0, 0, 64);
        let via_log = (64.0 * 3f64.ln() - ln_factorial(64)).exp();
        assert!((direct.norm() - via_log).abs() < 1e-12 * via_log);
    }

    #[test]
    fn closed_form_chain_single_site() {
        let spec = LatticeSpec::chain(4, ONE, ZERO, 0.0);
        let c0 = StateVector::single_site(&spec, 3).unwrap();
        let traj = evolve_closed_form(&spec, &c0, &[1.0]).unwrap();
        let c = &traj.states[0].amps;
        let i = C64::new(0.0, 1.0);
        assert!(close(c[3], ONE, 1e-15));
        assert!(close(c[2], -i, 1e-15));
        assert!(close(c[1], C64::new(-0.5, 0.0), 1e-15));
        assert!(close(c[0], i / 6.0, 1e-15));
    }

    #[test]
    fn closed_form_ground_site_is_stationary() {
        let spec = LatticeSpec::chain(5, C64::new(0.7, -0.2), ZERO, 0.0);
        let c0 = StateVector::single_site(&spec, 0).unwrap();
        let traj = evolve_closed_form(&spec, &c0, &[0.5, 3.0, 11.0]).unwrap();
        for s in &traj.states {
            assert_eq!(s.amps, c0.amps);
        }
    }

    #[test]
    fn closed_form_two_site_ring() {
        let spec = LatticeSpec::ring(2, ONE, ZERO);
        let c0 = StateVector::single_site(&spec, 0).unwrap();
        let times = [0.3, 1.1, 2.5];
        let traj = evolve_closed_form(&spec, &c0, &times).unwrap();
        for (t, s) in times.iter().zip(&traj.states) {
            assert!(close(s.amps[0], C64::new(t.cos(), 0.0), 1e-14));
            assert!(close(s.amps[1], C64::new(0.0, -t.sin()), 1e-14));
        }
    }

    #[test]
    fn closed_form_rejects_forced_or_bidirectional() {
        let spec = LatticeSpec::chain(3, ONE, ZERO, 0.5);
        let c0 = StateVector::single_site(&spec, 1).unwrap();
        assert!(matches!(evolve_closed_form(&spec, &c0, &[1.0]), Err(Error::Parameter(m)) if m.contains("RK4")));
        let spec = LatticeSpec::chain(3, ONE, ONE, 0.0);
        assert!(evolve_closed_form(&spec, &c0, &[1.0]).is_err());
    }

    #[test]
    fn hermitian_norm_is_conserved() {
        let spec = LatticeSpec::chain(12, ONE, ONE, 0.0);
        let c0 = StateVector::gaussian(&spec, 5.5, 2.0).unwrap();
        let traj = evolve_rk4(&spec, &c0, &EvolveConfig::rk4(20.0, 0.002).recording_every(100), None).unwrap();
        let w0 = c0.norm_sqr();
        for o in &traj.observables {
            assert!((o.total_weight - w0).abs() < 1e-8 * w0);
        }
    }

    #[test]
    fn rk4_matches_closed_form_at_spot_times() {
        let spec = LatticeSpec::chain(6, ONE, ZERO, 0.0);
        let c0 = StateVector::single_site(&spec, 5).unwrap();
        let traj = evolve_rk4(&spec, &c0, &EvolveConfig::rk4(2.0, 0.001), None).unwrap();
        let exact = evolve_closed_form(&spec, &c0, &[0.5, 1.0, 2.0]).unwrap();
        for (t, s) in [0.5, 1.0, 2.0].iter().zip(&exact.states) {
            let got = state_at(&traj, *t).unwrap();
            for (a, b) in got.iter().zip(&s.amps) {
                assert!(close(*a, *b, 1e-6));
            }
        }
    }

    #[test]
    fn t_end_zero_records_initial_state() {
        let spec = LatticeSpec::chain(3, ONE, ZERO, 0.0);
        let c0 = StateVector::single_site(&spec, 2).unwrap();
        let traj = evolve_rk4(&spec, &c0, &EvolveConfig::rk4(0.0, 0.01), None).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.states[0], c0);
    }

    #[test]
    fn coarse_dt_is_rejected() {
        let spec = LatticeSpec::chain(3, C64::new(10.0, 0.0), ZERO, 0.0);
        let c0 = StateVector::single_site(&spec, 2).unwrap();
        assert!(evolve_rk4(&spec, &c0, &EvolveConfig::rk4(1.0, 0.1), None).is_err());
    }

    #[test]
    fn secular_growth_overflows() {
        let spec = LatticeSpec::ring(3, C64::new(0.0, 1.0), ZERO);
        let c0 = StateVector::gaussian(&spec, 1.0, 1.0).unwrap();
        let err = evolve_rk4(&spec, &c0, &EvolveConfig::rk4(400.0, 0.01), None).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
        let mut cfg = EvolveConfig::rk4(400.0, 0.01).recording_every(1000);
        cfg.normalize = true;
        let traj = evolve_rk4(&spec, &c0, &cfg, None).unwrap();
        assert!(traj.log_scale.as_ref().unwrap().last().unwrap() > &300.0);
        assert!((traj.final_state().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn center_of_mass_examples() {
        let s = StateVector::new(5, vec![ONE]).unwrap();
        assert_eq!(center_of_mass(&s).unwrap(), 5.0);
        let s = StateVector::new(0, vec![ONE, ONE]).unwrap();
        assert_eq!(center_of_mass(&s).unwrap(), 0.5);
        let s = StateVector::new(0, vec![ONE, C64::new(2.0, 0.0), ONE]).unwrap();
        assert_abs_diff_eq!(center_of_mass(&s).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            center_of_mass(&StateVector::zeros(0, 3)),
            Err(Error::UndefinedValue(_))
        ));
    }

    #[test]
    fn revival_of_an_eigenstate_is_a_phase() {
        // site 0 of the free chain is an exact E = 0 eigenstate; use a forced
        // chain so the energy is nonzero: a_0 of the l = 0 ladder state
        let spec = LatticeSpec::chain(3, ONE, ZERO, 0.8);
        let c0 = StateVector::single_site(&spec, 0).unwrap();
        let cfg = EvolveConfig::rk4(5.0, 0.001).recording_every(10);
        let traj = evolve_rk4(&spec, &c0, &cfg, None).unwrap();
        assert!(revival_error(&traj, 2.5).unwrap() < 1e-10);
        // the l = 1 ladder state has E = 0.8
        let s1 = StateVector::new(0, vec![C64::new(1.25, 0.0), ONE, ZERO]).unwrap();
        let traj = evolve_rk4(&spec, &s1, &cfg, None).unwrap();
        let p = 2.0;
        let expected = (C64::new(0.0, -0.8 * p).exp() - ONE).norm();
        assert_abs_diff_eq!(revival_error(&traj, p).unwrap(), expected, epsilon = 1e-9);
        assert!(revival_error(&traj, 6.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let spec = LatticeSpec::chain(2, ONE, ZERO, 0.0);
        let c0 = StateVector::single_site(&spec, 1).unwrap();
        let traj = evolve_closed_form(&spec, &c0, &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,site,re,im");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[3], "1.0,0,0.0,-1.0");
        let mut buf = Vec::new();
        traj.write_observables_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,com,weight,revival\n0.0,1.0,1.0,1.0\n"));
    }

    #[test]
    fn boundary_weight_counts_both_ends() {
        let s = StateVector::new(0, vec![ONE, ZERO, ZERO, ONE]).unwrap();
        assert_eq!(boundary_weight(&s, 1), 1.0);
        let s = StateVector::new(0, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        assert_eq!(boundary_weight(&s, 1), 0.0);
    }
}
