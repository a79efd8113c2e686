//! Synthesis of unidirectional hopping from periodically modulated complex
//! site potentials, and the mode-locked laser realization.
//!
//! The drive acts on even sites with a complex amplitude `alpha + i beta`
//! switched through `+1, -1, +1` over the active segment `(0, T1)`, and a
//! lumped transverse phase gradient `theta n` is impressed at `t = T1`.
//! Averaging the interaction-picture hopping over one period gives
//!
//! ```text
//! rho   = kappa [x sinc(Gamma) + (1 - x) e^{-i theta}]   (coefficient of c_{n+1})
//! sigma = kappa [x sinc(Gamma) + (1 - x) e^{+i theta}]   (coefficient of c_{n-1})
//! ```
//!
//! with `x = T1 / T` and `Gamma = (alpha + i beta) T1 / 4`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{boundary_weight, integrate, EvolveConfig, StateTrajectory};
use crate::error::{param, Error, Result};
use crate::lattice::{check_finite, HamiltonianMatrix, StateVector, Window, C64, I, ONE, ZERO};

/// How the lumped phase gradient repeats from one period to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickConvention {
    /// The gradient `theta n` is impressed at `T1` and removed again at the
    /// end of the period, so the interaction-picture phases are periodic.
    #[default]
    Resetting,
    /// A single kick `theta n` at every `T1 + mT`; the gradients add up.
    Accumulating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationProtocol {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Length of the active (modulated) segment.
    pub t1: f64,
    /// Full modulation period `T = 2 pi / omega`.
    pub period: f64,
    #[serde(default)]
    pub kick: KickConvention,
}

/// Instantaneous phase event `c_n -> exp(-i phase_per_site n) c_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickEvent {
    pub time: f64,
    pub phase_per_site: f64,
}

impl ModulationProtocol {
    pub fn new(theta: f64, alpha: f64, beta: f64, t1: f64, period: f64) -> Result<Self> {
        let p = Self {
            theta,
            alpha,
            beta,
            t1,
            period,
            kick: KickConvention::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Protocol with the given duty cycle `x`, complex area `Gamma` and period.
    pub fn from_dimensionless(theta: f64, x: f64, gamma: C64, period: f64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return param(format!("duty cycle x = {x} outside (0, 1)"));
        }
        let t1 = x * period;
        let drive = gamma * 4.0 / t1;
        Self::new(theta, drive.re, drive.im, t1, period)
    }

    pub fn with_kick(mut self, kick: KickConvention) -> Self {
        self.kick = kick;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.theta, self.alpha, self.beta, self.t1, self.period]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return param("protocol parameters must be finite");
        }
        if !(self.t1 > 0.0 && self.t1 < self.period) {
            return param(format!("need 0 < T1 < T, got T1 = {}, T = {}", self.t1, self.period));
        }
        Ok(())
    }

    pub fn x(&self) -> f64 {
        self.t1 / self.period
    }

    pub fn gamma(&self) -> C64 {
        C64::new(self.alpha, self.beta) * self.t1 / 4.0
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Same `x`, `Gamma`, `theta` and kick convention at a new period.
    pub fn rescaled(&self, period: f64) -> Result<Self> {
        Self::from_dimensionless(self.theta, self.x(), self.gamma(), period).map(|p| p.with_kick(self.kick))
    }

    /// Phase kicks within one period `[0, T]`.
    pub fn kicks(&self) -> Vec<KickEvent> {
        let first = KickEvent {
            time: self.t1,
            phase_per_site: self.theta,
        };
        match self.kick {
            KickConvention::Accumulating => vec![first],
            KickConvention::Resetting => vec![
                first,
                KickEvent {
                    time: self.period,
                    phase_per_site: -self.theta,
                },
            ],
        }
    }

    /// The four constant-drive segments `(start, end, switching sign)`.
    fn segments(&self) -> [(f64, f64, f64); 4] {
        let q = self.t1 / 4.0;
        [
            (0.0, q, 1.0),
            (q, 3.0 * q, -1.0),
            (3.0 * q, self.t1, 1.0),
            (self.t1, self.period, 0.0),
        ]
    }
}

/// Switching function: `+1` on `[0, T1/4)`, `-1` on `[T1/4, 3T1/4)`,
/// `+1` on `[3T1/4, T1)`, `0` on `[T1, T)`, after folding `t` into `[0, T)`.
pub fn switching(protocol: &ModulationProtocol, t: f64) -> f64 {
    let s = t.rem_euclid(protocol.period);
    let q = protocol.t1 / 4.0;
    if s < q {
        1.0
    } else if s < 3.0 * q {
        -1.0
    } else if s < protocol.t1 {
        1.0
    } else {
        0.0
    }
}

/// Smooth part of the site potential, `[(1 + (-1)^n) / 2] (alpha + i beta) H(t)`.
/// The lumped phase gradient is returned separately by
/// [`ModulationProtocol::kicks`].
pub fn potential(protocol: &ModulationProtocol, n: i64, t: f64) -> C64 {
    if n.rem_euclid(2) == 1 {
        return ZERO;
    }
    C64::new(protocol.alpha, protocol.beta) * switching(protocol, t)
}

fn sinc(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        ONE - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

fn sinc_derivative(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        -z / 3.0 + z * z * z / 30.0
    } else {
        (z * z.cos() - z.sin()) / (z * z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveHopping {
    /// Forward hopping, the coefficient of `c_{n+1}` (plays `kappa1`).
    pub rho: C64,
    /// Backward hopping, the coefficient of `c_{n-1}` (plays `kappa2`).
    pub sigma: C64,
    /// Largest relative gap between the closed forms and direct time
    /// averaging, when the check was run.
    pub quadrature_deviation: Option<f64>,
}

/// Closed-form averaged hopping.
pub fn closed_form_hopping(protocol: &ModulationProtocol, kappa: f64) -> (C64, C64) {
    let x = protocol.x();
    let s = sinc(protocol.gamma()) * x;
    let rest = 1.0 - x;
    (
        (s + C64::from_polar(rest, -protocol.theta)) * kappa,
        (s + C64::from_polar(rest, protocol.theta)) * kappa,
    )
}

/// Relative tolerance of the closed-form versus quadrature cross-check.
pub const QUADRATURE_TOL: f64 = 1e-8;

/// Averaged hopping from the closed forms, verified against direct time
/// averaging on an even and an odd site.
pub fn effective_hopping(protocol: &ModulationProtocol, kappa: f64) -> Result<EffectiveHopping> {
    protocol.validate()?;
    if !kappa.is_finite() {
        return param("kappa must be finite");
    }
    let (rho, sigma) = closed_form_hopping(protocol, kappa);
    let mut deviation: f64 = 0.0;
    for n in [0, 1] {
        let (qr, qs) = quadrature_hopping(protocol, kappa, n);
        let scale = rho.norm().max(sigma.norm()).max(kappa.abs()).max(f64::MIN_POSITIVE);
        deviation = deviation
            .max((qr - rho).norm() / scale)
            .max((qs - sigma).norm() / scale);
    }
    if deviation > QUADRATURE_TOL {
        return Err(Error::Computation(format!(
            "closed-form hopping disagrees with time averaging by {deviation:e}"
        )));
    }
    Ok(EffectiveHopping {
        rho,
        sigma,
        quadrature_deviation: Some(deviation),
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    (0..order)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

const GL_ORDER: usize = 16;
const SUBINTERVALS: usize = 32;

/// Time averages `kappa <exp(i int_0^t (V_n - V_{n +/- 1}) dt')>` over one
/// period by nested Gauss-Legendre quadrature of [`potential`], with kicks
/// counted only once strictly passed (left limit at the kick instant).
pub fn quadrature_hopping(protocol: &ModulationProtocol, kappa: f64, n: i64) -> (C64, C64) {
    let rule = gauss_legendre(GL_ORDER);
    let average = |m: i64| -> C64 {
        let dv = |t: f64| potential(protocol, n, t) - potential(protocol, m, t);
        let kick_gap = (n - m) as f64;
        let mut phase = ZERO;
        let mut total = ZERO;
        let mut breaks: Vec<f64> = protocol.segments().iter().map(|s| s.0).collect();
        breaks.push(protocol.period);
        for seg in breaks.windows(2) {
            // kicks at the segment start have been passed
            for k in protocol.kicks() {
                if (k.time - seg[0]).abs() < 1e-15 * protocol.period {
                    phase += C64::new(k.phase_per_site * kick_gap, 0.0);
                }
            }
            let h = (seg[1] - seg[0]) / SUBINTERVALS as f64;
            for j in 0..SUBINTERVALS {
                let a = seg[0] + j as f64 * h;
                for &(xi, wi) in &rule {
                    let t = a + 0.5 * h * (xi + 1.0);
                    let inner: C64 = rule
                        .iter()
                        .map(|&(xj, wj)| dv(a + 0.5 * (t - a) * (xj + 1.0)) * wj)
                        .sum::<C64>()
                        * (0.5 * (t - a));
                    total += (I * (phase + inner)).exp() * (0.5 * h * wi);
                }
                phase += rule
                    .iter()
                    .map(|&(xj, wj)| dv(a + 0.5 * h * (xj + 1.0)) * wj)
                    .sum::<C64>()
                    * (0.5 * h);
            }
        }
        total * kappa / protocol.period
    };
    (average(n + 1), average(n - 1))
}

/// Root of `x sinc(Gamma) + (1 - x) e^{i theta} = 0`, where the backward
/// hopping vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnidirectionalRoot {
    pub gamma: C64,
    /// `|sigma| / kappa` at the root.
    pub sigma_residual: f64,
    /// Forward hopping `rho / kappa` at the root.
    pub rho: C64,
    pub iterations: usize,
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_MAX_HALVINGS: usize = 8;
pub const ROOT_TOL: f64 = 1e-10;

fn check_root_problem(theta: f64, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return param(format!("duty cycle x = {x} outside (0, 1)"));
    }
    if !theta.is_finite() || theta.sin().abs() < 1e-12 {
        return param("sin(theta) = 0: sigma = 0 would force rho = 0 as well");
    }
    Ok(())
}

/// Damped Newton iteration from `guess`.
pub fn solve_unidirectional(theta: f64, x: f64, guess: C64) -> Result<UnidirectionalRoot> {
    newton(theta, x, guess, NEWTON_MAX_ITER)
}

fn newton(theta: f64, x: f64, guess: C64, max_iter: usize) -> Result<UnidirectionalRoot> {
    check_root_problem(theta, x)?;
    check_finite("gamma guess", guess)?;
    let offset = C64::from_polar(1.0 - x, theta);
    let f = |g: C64| sinc(g) * x + offset;
    let mut g = guess;
    let mut fg = f(g);
    for iter in 0..max_iter {
        if fg.norm() < 1e-14 {
            return finish(theta, x, g, fg, iter);
        }
        let d = sinc_derivative(g) * x;
        if d.norm() < 1e-300 {
            return Err(Error::Stalled { re: g.re, im: g.im });
        }
        let step = fg / d;
        let mut lambda = 1.0;
        let mut candidate = g - step;
        let mut fc = f(candidate);
        for _ in 0..NEWTON_MAX_HALVINGS {
            if fc.norm() < fg.norm() {
                break;
            }
            lambda *= 0.5;
            candidate = g - step * lambda;
            fc = f(candidate);
        }
        if (candidate - g).norm() <= f64::EPSILON * g.norm() {
            return finish(theta, x, candidate, fc, iter + 1);
        }
        g = candidate;
        fg = fc;
    }
    if fg.norm() < ROOT_TOL {
        return finish(theta, x, g, fg, max_iter);
    }
    Err(Error::RootNotFound {
        iterations: max_iter,
        residual: fg.norm(),
    })
}

fn finish(theta: f64, x: f64, g: C64, fg: C64, iterations: usize) -> Result<UnidirectionalRoot> {
    if !(fg.norm() < ROOT_TOL) {
        return Err(Error::RootNotFound {
            iterations,
            residual: fg.norm(),
        });
    }
    Ok(UnidirectionalRoot {
        gamma: g,
        sigma_residual: fg.norm(),
        rho: sinc(g) * x + C64::from_polar(1.0 - x, -theta),
        iterations,
    })
}

/// Grid points of `[re_min, re_max] x [im_min, im_max]` where `|sigma|` is
/// a local minimum over the eight neighbours, best first.
pub fn scan_sigma_minima(theta: f64, x: f64, re: (f64, f64), im: (f64, f64), resolution: usize) -> Result<Vec<C64>> {
    check_root_problem(theta, x)?;
    if resolution < 3 || !(re.0 < re.1) || !(im.0 < im.1) {
        return param("scan needs a non-empty box and at least 3 points per axis");
    }
    let offset = C64::from_polar(1.0 - x, theta);
    let at = |i: usize, j: usize| {
        C64::new(
            re.0 + (re.1 - re.0) * i as f64 / (resolution - 1) as f64,
            im.0 + (im.1 - im.0) * j as f64 / (resolution - 1) as f64,
        )
    };
    let grid: Vec<Vec<f64>> = (0..resolution)
        .map(|i| (0..resolution).map(|j| (sinc(at(i, j)) * x + offset).norm()).collect())
        .collect();
    let mut minima = Vec::new();
    for i in 1..resolution - 1 {
        for j in 1..resolution - 1 {
            let v = grid[i][j];
            let is_min = (i - 1..=i + 1)
                .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                .filter(|&(a, b)| (a, b) != (i, j))
                .all(|(a, b)| grid[a][b] > v);
            if is_min {
                minima.push((v, at(i, j)));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(minima.into_iter().map(|m| m.1).collect())
}

/// Grid scan followed by Newton polishing of the best candidates.
pub fn solve_unidirectional_scan(theta: f64, x: f64, re: (f64, f64), im: (f64, f64)) -> Result<UnidirectionalRoot> {
    let candidates = scan_sigma_minima(theta, x, re, im, 201)?;
    let mut last_err = Error::RootNotFound {
        iterations: 0,
        residual: f64::INFINITY,
    };
    for c in candidates {
        match solve_unidirectional(theta, x, c) {
            Ok(root) => return Ok(root),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// One row of the rotating-wave validation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwaPoint {
    /// `omega / kappa`.
    pub ratio: f64,
    pub period: f64,
    pub periods: usize,
    /// `||a_full - c_eff|| / ||c_eff||` at `t_end`, with `a_full` the exact
    /// state with the accumulated on-site phases removed.
    pub discrepancy: f64,
}

fn expm(m: &DMatrix<C64>) -> DMatrix<C64> {
    m.clone().exp()
}

/// Exact one-period propagator of the modulated lattice: matrix exponentials
/// over the constant-drive segments and diagonal phase kicks in between.
fn one_period_propagator(protocol: &ModulationProtocol, kappa: f64, sites: usize) -> DMatrix<C64> {
    let mut u = DMatrix::<C64>::identity(sites, sites);
    let kicks = protocol.kicks();
    let apply_kicks_at = |u: &mut DMatrix<C64>, t: f64| {
        for k in kicks.iter().filter(|k| (k.time - t).abs() < 1e-12 * protocol.period) {
            for n in 0..sites {
                let phase = C64::from_polar(1.0, -k.phase_per_site * n as f64);
                u.row_mut(n).iter_mut().for_each(|z| *z *= phase);
            }
        }
    };
    for (start, end, _) in protocol.segments() {
        apply_kicks_at(&mut u, start);
        let mid = 0.5 * (start + end);
        let mut h = DMatrix::from_element(sites, sites, ZERO);
        for n in 0..sites {
            h[(n, n)] = potential(protocol, n as i64, mid);
            if n + 1 < sites {
                h[(n, n + 1)] = C64::new(kappa, 0.0);
                h[(n + 1, n)] = C64::new(kappa, 0.0);
            }
        }
        u = expm(&(h * (-I * (end - start)))) * u;
    }
    apply_kicks_at(&mut u, protocol.period);
    u
}

/// Per-period on-site phase `int_0^T V_n dt + kicks` accumulated by site `n`.
fn period_phase(protocol: &ModulationProtocol, n: i64) -> C64 {
    let smooth: C64 = protocol
        .segments()
        .iter()
        .map(|&(a, b, _)| potential(protocol, n, 0.5 * (a + b)) * (b - a))
        .sum();
    let kicks: f64 = protocol.kicks().iter().map(|k| k.phase_per_site * n as f64).sum();
    smooth + kicks
}

/// Compares the exactly propagated modulated lattice with the averaged
/// model at `t_end` for each `omega / kappa` in `ratios`.
///
/// The period at ratio `r` is `2 pi / (r kappa)` (`kappa = 1` is used for
/// the time scale when `kappa = 0`); `x`, `Gamma` and `theta` are held fixed.
/// States are compared stroboscopically after removing the on-site phase
/// each site has accumulated.
pub fn rwa_validate(
    protocol: &ModulationProtocol,
    kappa: f64,
    ratios: &[f64],
    sites: usize,
    c0: &StateVector,
    t_end: f64,
) -> Result<Vec<RwaPoint>> {
    protocol.validate()?;
    if sites < 2 {
        return param("rwa validation needs at least 2 sites");
    }
    if c0.len() != sites || c0.offset != 0 {
        return param("initial state must cover sites 0..sites");
    }
    if !(t_end > 0.0) || !t_end.is_finite() || !kappa.is_finite() {
        return param("t_end must be positive and kappa finite");
    }
    let time_unit = if kappa == 0.0 { 1.0 } else { kappa.abs() };
    let c0v = DVector::from_column_slice(&c0.amps);
    ratios
        .iter()
        .map(|&ratio| {
            if !(ratio > 0.0) || !ratio.is_finite() {
                return param(format!("invalid frequency ratio {ratio}"));
            }
            let period = 2.0 * PI / (ratio * time_unit);
            let p = protocol.rescaled(period)?;
            let cycles = t_end / period;
            let periods = cycles.round();
            if periods < 1.0 || (cycles - periods).abs() > 1e-6 * periods {
                return param(format!(
                    "t_end = {t_end} is not a multiple of the period {period} at ratio {ratio}"
                ));
            }
            let periods = periods as usize;
            let u = one_period_propagator(&p, kappa, sites);
            let mut full = c0v.clone();
            for _ in 0..periods {
                full = &u * full;
            }
            for n in 0..sites {
                full[n] *= (I * period_phase(&p, n as i64) * periods as f64).exp();
            }
            let hop = effective_hopping(&p, kappa)?;
            let mut h_eff = DMatrix::from_element(sites, sites, ZERO);
            for n in 0..sites - 1 {
                h_eff[(n, n + 1)] = hop.rho;
                h_eff[(n + 1, n)] = hop.sigma;
            }
            let eff = expm(&(h_eff * (-I * periods as f64 * period))) * &c0v;
            let scale = if eff.norm() > 0.0 { eff.norm() } else { c0v.norm() };
            Ok(RwaPoint {
                ratio,
                period,
                periods,
                discrepancy: (full - &eff).norm() / scale,
            })
        })
        .collect()
}

/// Parameters of the mode-locked laser with intracavity amplitude and phase
/// modulators, in round-trip units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    /// Saturated single-pass gain.
    pub g: f64,
    /// Cavity loss.
    pub l: f64,
    /// Gain-bandwidth curvature `(nu_m / nu_g)^2`.
    pub dg: f64,
    pub delta_am: f64,
    pub delta_fm: f64,
    /// Phase offset between the modulators.
    pub phi: f64,
    /// Normalized detuning `2 pi (nu_m - nu_ax) / nu_m`.
    pub force: f64,
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.g,
            self.l,
            self.dg,
            self.delta_am,
            self.delta_fm,
            self.phi,
            self.force,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return param("laser parameters must be finite");
        }
        if self.dg < 0.0 {
            return param("gain curvature Dg must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserOnsite {
    /// Coefficient of `n` (the detuning force).
    pub force: f64,
    /// Constant term `i (g - l)`.
    pub net_gain: C64,
    /// Coefficient of `n^2`, `-i Dg`.
    pub dispersion: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserCouplings {
    /// Coefficient of `c_{n+1}`: `Delta_FM + i Delta_AM e^{i phi}`.
    pub forward: C64,
    /// Coefficient of `c_{n-1}`: `Delta_FM + i Delta_AM e^{-i phi}`.
    pub backward: C64,
    pub onsite: LaserOnsite,
}

pub fn laser_effective_couplings(p: &LaserParams) -> LaserCouplings {
    LaserCouplings {
        forward: C64::new(p.delta_fm, 0.0) + I * C64::from_polar(p.delta_am, p.phi),
        backward: C64::new(p.delta_fm, 0.0) + I * C64::from_polar(p.delta_am, -p.phi),
        onsite: LaserOnsite {
            force: p.force,
            net_gain: I * (p.g - p.l),
            dispersion: -I * p.dg,
        },
    }
}

/// Axial-mode window of the laser simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserWindow {
    pub modes: Window,
    /// Abort when the weight on the outermost mode at either end exceeds
    /// this fraction of the total.
    pub edge_tolerance: Option<f64>,
}

impl Default for LaserWindow {
    fn default() -> Self {
        Self {
            modes: Window::new(-32, 31),
            edge_tolerance: Some(1e-6),
        }
    }
}

/// Generator `K` of `i dc/dt = K c` for the modal equations on a window.
pub fn laser_generator(p: &LaserParams, window: &Window) -> Result<HamiltonianMatrix> {
    p.validate()?;
    if window.n_min >= window.n_max {
        return param("laser window needs n_min < n_max");
    }
    let c = laser_effective_couplings(p);
    let dim = window.len();
    let mut k = DMatrix::from_element(dim, dim, ZERO);
    for i in 0..dim {
        let n = (window.n_min + i as i64) as f64;
        k[(i, i)] = C64::new(c.onsite.force * n, 0.0) + c.onsite.net_gain + c.onsite.dispersion * (n * n);
        if i + 1 < dim {
            k[(i, i + 1)] = c.forward;
            k[(i + 1, i)] = c.backward;
        }
    }
    HamiltonianMatrix::new(window.n_min, k)
}

/// RK4 integration of the full modal equations.
pub fn laser_evolve(
    p: &LaserParams,
    window: &LaserWindow,
    c0: &StateVector,
    cfg: &EvolveConfig,
) -> Result<StateTrajectory> {
    let k = laser_generator(p, &window.modes)?;
    if c0.offset != window.modes.n_min || c0.len() != window.modes.len() {
        return param("initial state does not cover the laser mode window");
    }
    let rate = k.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dim = c0.len();
    let diag: Vec<C64> = (0..dim).map(|i| k.matrix[(i, i)]).collect();
    let (fwd, bwd) = (k.matrix[(0, 1)], k.matrix[(1, 0)]);
    let traj = integrate(
        move |_t, c, out| {
            for i in 0..dim {
                let mut acc = diag[i] * c[i];
                if i + 1 < dim {
                    acc += fwd * c[i + 1];
                }
                if i > 0 {
                    acc += bwd * c[i - 1];
                }
                out[i] = -I * acc;
            }
        },
        c0,
        cfg,
        rate,
    )?;
    if let Some(tol) = window.edge_tolerance {
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let w = boundary_weight(s, 1);
            if w > tol {
                return Err(Error::Computation(format!(
                    "edge weight {w:e} exceeds {tol:e} at t = {t}; widen the mode window"
                )));
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn worked_point() -> ModulationProtocol {
        ModulationProtocol::from_dimensionless(PI / 2.0, 0.8, C64::new(3.0, 0.7), 1.0).unwrap()
    }

    #[test]
    fn potential_branches() {
        let p = ModulationProtocol::new(0.3, 1.5, -0.5, 2.0, 3.0).unwrap();
        let drive = C64::new(1.5, -0.5);
        for t in [0.1, 1.0, 2.5] {
            assert_eq!(potential(&p, 3, t), ZERO);
        }
        assert_eq!(potential(&p, 0, 0.25), drive);
        assert_eq!(potential(&p, 2, 1.0), -drive);
        assert_eq!(potential(&p, -2, 1.75), drive);
        assert_eq!(potential(&p, 4, 2.5), ZERO);
        assert_eq!(potential(&p, 0, 3.0 + 1.0), -drive);
    }

    #[test]
    fn protocol_validation() {
        assert!(ModulationProtocol::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModulationProtocol::new(0.0, 1.0, 1.0, 0.0, 1.0).is_err());
        let p = worked_point();
        assert_abs_diff_eq!(p.x(), 0.8, epsilon = 1e-15);
        assert!((p.gamma() - C64::new(3.0, 0.7)).norm() < 1e-14);
        assert_eq!(p.kicks().len(), 2);
        assert_eq!(p.with_kick(KickConvention::Accumulating).kicks().len(), 1);
    }

    #[test]
    fn worked_point_hopping() {
        let h = effective_hopping(&worked_point(), 1.0).unwrap();
        assert!(h.sigma.norm() < 5e-3);
        assert!((h.rho - C64::new(0.0, -0.4)).norm() < 5e-3);
        assert!(h.quadrature_deviation.unwrap() < 1e-10);
    }

    #[test]
    fn hopping_limits() {
        let p = ModulationProtocol::new(0.9, 0.0, 0.0, 0.3, 1.0).unwrap();
        let h = effective_hopping(&p, 2.0).unwrap();
        let x = 0.3;
        assert!((h.rho - (C64::new(x, 0.0) + C64::from_polar(1.0 - x, -0.9)) * 2.0).norm() < 1e-14);
        assert!((h.sigma - (C64::new(x, 0.0) + C64::from_polar(1.0 - x, 0.9)) * 2.0).norm() < 1e-14);

        let p = ModulationProtocol::new(0.0, 2.0, 1.0, 0.6, 1.0).unwrap();
        let h = effective_hopping(&p, 1.0).unwrap();
        assert!((h.rho - h.sigma).norm() < 1e-15);
        let expect = sinc(p.gamma()) * 0.6 + 0.4;
        assert!((h.rho - expect).norm() < 1e-14);
    }

    #[test]
    fn newton_refines_worked_point() {
        let r = solve_unidirectional(PI / 2.0, 0.8, C64::new(3.0, 0.7)).unwrap();
        assert!(r.sigma_residual < ROOT_TOL);
        assert!((r.gamma - C64::new(3.0, 0.7)).norm() < 0.01);
        // at an exact root rho - sigma = -2i (1 - x) sin(theta)
        assert!((r.rho - C64::new(0.0, -0.4)).norm() < 1e-10);
    }

    #[test]
    fn scan_finds_the_same_root() {
        let best = scan_sigma_minima(PI / 2.0, 0.8, (0.5, 6.0), (-2.0, 2.0), 201).unwrap();
        assert!(!best.is_empty());
        let scanned = solve_unidirectional_scan(PI / 2.0, 0.8, (0.5, 6.0), (-2.0, 2.0)).unwrap();
        let direct = solve_unidirectional(PI / 2.0, 0.8, C64::new(3.0, 0.7)).unwrap();
        assert!((scanned.gamma - direct.gamma).norm() < 1e-9);
    }

    #[test]
    fn half_duty_cycle_root() {
        let r = solve_unidirectional_scan(PI / 2.0, 0.5, (0.5, 6.0), (-2.0, 2.0)).unwrap();
        // substitution: sinc(Gamma) = -i
        assert!((sinc(r.gamma) + I).norm() < 1e-9);
        assert!(r.sigma_residual < ROOT_TOL);
    }

    #[test]
    fn root_errors() {
        assert!(matches!(solve_unidirectional(0.0, 0.8, ONE), Err(Error::Parameter(_))));
        assert!(solve_unidirectional(1.0, 1.2, ONE).is_err());
        // sinc' vanishes at the origin
        assert!(matches!(
            solve_unidirectional(PI / 2.0, 0.8, ZERO),
            Err(Error::Stalled { .. })
        ));
        assert!(matches!(
            newton(PI / 2.0, 0.8, C64::new(1.0, 1.0), 2),
            Err(Error::RootNotFound { iterations: 2, .. })
        ));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(GL_ORDER);
        let w: f64 = rule.iter().map(|r| r.1).sum();
        assert_abs_diff_eq!(w, 2.0, epsilon = 1e-14);
        let x30: f64 = rule.iter().map(|&(x, w)| w * x.powi(30)).sum();
        assert_abs_diff_eq!(x30, 2.0 / 31.0, epsilon = 1e-14);
    }

    #[test]
    fn rwa_trivial_cases() {
        let c0 = StateVector::single_site(&crate::lattice::LatticeSpec::chain(6, ONE, ZERO, 0.0), 4).unwrap();
        let t_end = 2.0 * PI / 5.0 * 2.0;
        let rows = rwa_validate(&worked_point(), 0.0, &[5.0, 10.0], 6, &c0, t_end).unwrap();
        assert!(rows.iter().all(|r| r.discrepancy < 1e-10));
        let bare = ModulationProtocol::new(0.0, 0.0, 0.0, 0.5, 1.0).unwrap();
        let rows = rwa_validate(&bare, 1.0, &[5.0, 10.0, 20.0], 6, &c0, t_end).unwrap();
        assert!(rows.iter().all(|r| r.discrepancy < 1e-8), "{rows:?}");
        assert!(rwa_validate(&bare, 1.0, &[5.0], 6, &c0, 1.0).is_err());
    }

    #[test]
    fn accumulating_kicks_do_not_average_to_the_effective_model() {
        let c0 = StateVector::single_site(&crate::lattice::LatticeSpec::chain(10, ONE, ZERO, 0.0), 9).unwrap();
        let p = worked_point().with_kick(KickConvention::Accumulating);
        let rows = rwa_validate(&p, 1.0, &[5.0, 10.0, 20.0], 10, &c0, 2.0 * PI).unwrap();
        // the net gradient theta per period acts as a dc force omega theta / 2 pi
        assert!(rows.iter().all(|r| r.discrepancy > 0.5), "{rows:?}");
        assert!(rows[2].discrepancy > rows[0].discrepancy);
    }

    #[test]
    fn laser_couplings() {
        let base = LaserParams {
            g: 0.1,
            l: 0.1,
            dg: 0.0,
            delta_am: 0.3,
            delta_fm: 0.3,
            phi: -PI / 2.0,
            force: 0.2,
        };
        let c = laser_effective_couplings(&base);
        assert!((c.forward - C64::new(0.6, 0.0)).norm() < 1e-15);
        assert!(c.backward.norm() < 1e-15);
        let mirror = laser_effective_couplings(&LaserParams { phi: PI / 2.0, ..base });
        assert!(mirror.forward.norm() < 1e-15);
        assert!((mirror.backward - C64::new(0.6, 0.0)).norm() < 1e-15);
        let fm = laser_effective_couplings(&LaserParams { delta_am: 0.0, ..base });
        assert_eq!(fm.forward, C64::new(0.3, 0.0));
        assert_eq!(fm.backward, C64::new(0.3, 0.0));
    }

    #[test]
    fn laser_decay_without_coupling() {
        let p = LaserParams {
            g: 0.1,
            l: 0.3,
            dg: 0.0,
            delta_am: 0.0,
            delta_fm: 0.0,
            phi: 0.0,
            force: 0.0,
        };
        let window = LaserWindow {
            modes: Window::new(-4, 4),
            edge_tolerance: None,
        };
        let c0 = StateVector::new(-4, (0..9).map(|i| C64::new(1.0 + i as f64, 0.5)).collect()).unwrap();
        let traj = laser_evolve(&p, &window, &c0, &EvolveConfig::rk4(3.0, 0.01)).unwrap();
        let decay = (-0.2f64 * 3.0).exp();
        for (a, b) in traj.final_state().amps.iter().zip(&c0.amps) {
            assert!((a.norm() - b.norm() * decay).abs() < 1e-9);
        }
    }

    #[test]
    fn laser_edge_monitor_aborts() {
        let p = LaserParams {
            g: 0.0,
            l: 0.0,
            dg: 0.0,
            delta_am: 0.0,
            delta_fm: 1.0,
            phi: 0.0,
            force: 0.0,
        };
        let window = LaserWindow {
            modes: Window::new(-5, 5),
            edge_tolerance: Some(1e-6),
        };
        let mut c0 = StateVector::zeros(-5, 11);
        c0.amps[5] = ONE;
        let err = laser_evolve(&p, &window, &c0, &EvolveConfig::rk4(5.0, 0.01)).unwrap_err();
        assert!(matches!(err, Error::Computation(m) if m.contains("edge weight")));
    }
}
