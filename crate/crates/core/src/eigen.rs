//! Eigenvalues of general complex matrices.
//!
//! Householder reduction to upper Hessenberg form followed by the shifted
//! QR iteration with Givens rotations. Wilkinson shifts are used, with an
//! exceptional shift every tenth iteration so that permutation-like
//! matrices (the ring Hamiltonian) cannot stall the iteration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::{C64, ZERO};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Reduces `a` in place to upper Hessenberg form by a unitary similarity.
fn hessenberg(a: &mut DMatrix<C64>) {
    let n = a.nrows();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A <- (I - 2 v v^H) A
        for j in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(p, vp)| vp.conj() * a[(k + 1 + p, j)]).sum();
            for (p, vp) in v.iter().enumerate() {
                a[(k + 1 + p, j)] -= *vp * dot * 2.0;
            }
        }
        // A <- A (I - 2 v v^H)
        for i in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(p, vp)| a[(i, k + 1 + p)] * vp).sum();
            for (p, vp) in v.iter().enumerate() {
                a[(i, k + 1 + p)] -= dot * vp.conj() * 2.0;
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All eigenvalues of a square complex matrix, in no particular order.
pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Computation("eigenvalues of a non-square matrix".into()));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Computation("matrix has non-finite entries".into()));
    }
    let mut h = m.clone();
    hessenberg(&mut h);
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut out = vec![ZERO; n];
    if n == 0 {
        return Ok(out);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        // locate the start of the unreduced block ending at `hi`
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let s = if s == 0.0 { scale } else { s };
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::Computation(format!(
                "QR iteration failed to converge for eigenvalue {hi}"
            )));
        }
        let shift = if iter.is_multiple_of(10) {
            h[(hi, hi)] + C64::new(0.75, 0.4) * h[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for k in lo..=hi {
            h[(k, k)] -= shift;
        }
        rots.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            for i in lo..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + s.conj() * y;
                h[(i, k + 1)] = -s * x + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += shift;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn det(m: &DMatrix<C64>) -> C64 {
        m.clone().lu().determinant()
    }

    #[test]
    fn trace_determinant_and_singularity() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (12, 4), (30, 5)] {
            let m = random_matrix(n, seed);
            let ev = eigenvalues(&m).unwrap();
            let tr: C64 = ev.iter().sum();
            assert!((tr - m.trace()).norm() < 1e-10 * n as f64);
            let prod: C64 = ev.iter().product();
            assert!((prod - det(&m)).norm() < 1e-9 * det(&m).norm().max(1.0));
            for &l in &ev {
                let shifted = &m - DMatrix::<C64>::identity(n, n) * l;
                let smin = shifted.singular_values().min();
                assert!(smin < 1e-10 * n as f64, "sigma_min {smin} for n = {n}");
            }
        }
    }

    #[test]
    fn cyclic_shift_converges() {
        for n in 2..=48 {
            let mut m = DMatrix::from_element(n, n, ZERO);
            for i in 0..n {
                m[(i, (i + 1) % n)] = C64::new(1.0, 0.0);
            }
            let ev = eigenvalues(&m).unwrap();
            for l in ev {
                assert!((l.norm() - 1.0).abs() < 1e-12);
                assert!((l.powu(n as u32) - 1.0).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn triangular_input_is_exact() {
        let mut m = DMatrix::from_element(4, 4, ZERO);
        for i in 0..4 {
            m[(i, i)] = C64::new(0.7 * i as f64, 0.0);
            if i < 3 {
                m[(i, i + 1)] = C64::new(1.0, 0.0);
            }
        }
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (i, l) in ev.iter().enumerate() {
            assert_eq!(*l, C64::new(0.7 * i as f64, 0.0));
        }
    }
}
