//! Classical fixed-step fourth-order Runge-Kutta for complex linear systems.

use crate::lattice::C64;

/// Scratch buffers for repeated RK4 steps on systems of a fixed size.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advances `y` from `t` to `t + h` for `dy/dt = f(t, y)`, where `f`
    /// writes the derivative into its last argument.
    pub fn step<F>(&mut self, f: &mut F, t: f64, h: f64, y: &mut [C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        debug_assert_eq!(n, self.k1.len());
        f(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k1[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k2[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + self.k3[i] * h;
        }
        f(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * (h / 6.0);
        }
    }
}

/// Number of equal steps covering `duration` with steps no longer than `dt`.
pub fn step_count(duration: f64, dt: f64) -> usize {
    let ratio = duration / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let lambda = C64::new(-0.3, 2.0);
        let exact = (lambda * 2.0).exp();
        let err = |steps: usize| {
            let h = 2.0 / steps as f64;
            let mut y = [C64::new(1.0, 0.0)];
            let mut rk = Rk4::new(1);
            let mut f = |_t: f64, y: &[C64], out: &mut [C64]| out[0] = lambda * y[0];
            for s in 0..steps {
                rk.step(&mut f, s as f64 * h, h, &mut y);
            }
            (y[0] - exact).norm()
        };
        let ratio = err(40) / err(80);
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn step_count_rounds_near_integers() {
        assert_eq!(step_count(1.0, 0.1), 10);
        assert_eq!(step_count(1.0, 0.3), 4);
        assert_eq!(
            step_count(2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI / 1e4),
            10_000
        );
    }
}
