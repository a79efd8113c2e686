//! Dispersion relations, point spectra, Wannier-Stark ladders and numerical
//! Jordan-structure (exceptional point) analysis.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigen;
use crate::error::{param, Error, Result};
use crate::lattice::{
    build_hamiltonian, check_finite, Geometry, HamiltonianMatrix, LatticeSpec, StateVector, C64, ONE, ZERO,
};

/// Default eigenvalue clustering tolerance, relative to the largest |H| entry.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub q: f64,
    pub energy: C64,
}

/// `E(q) = kappa1 exp(iq)` for every `q` in `[-pi, pi)`.
pub fn bloch_dispersion(kappa1: C64, q_values: &[f64]) -> Result<Vec<DispersionSample>> {
    check_finite("kappa1", kappa1)?;
    q_values
        .iter()
        .map(|&q| {
            if !q.is_finite() || !(-PI..PI).contains(&q) {
                return param(format!("Bloch wave number {q} outside [-pi, pi)"));
            }
            Ok(DispersionSample {
                q,
                energy: kappa1 * C64::from_polar(1.0, q),
            })
        })
        .collect()
}

/// A group of numerically coincident eigenvalues and its Jordan structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: C64,
    pub multiplicity: usize,
    /// Jordan block sizes, largest first; they sum to `multiplicity`.
    pub jordan_blocks: Vec<usize>,
    /// Order of the exceptional point, i.e. the largest block (1 if none).
    pub ep_order: usize,
    /// `rank((H - value I)^k)` for `k = 0, 1, ...` as used for the blocks.
    pub rank_sequence: Vec<usize>,
    /// Radius over which rounding at the level of machine epsilon scatters
    /// the eigenvalues of a block of this order: `max|H| eps^(1/ep_order)`.
    pub spread_radius: f64,
    /// Some singular value fell within a factor of 10 of the rank threshold.
    pub rank_ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<C64>,
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`; absent when defective.
    pub eigenvectors: Option<Vec<Vec<C64>>>,
    pub clusters: Vec<Cluster>,
    pub is_defective: bool,
    pub rank_ambiguous: bool,
    /// Largest deviation from an independent dense eigensolve, when one was run.
    pub dense_check: Option<f64>,
}

impl SpectrumReport {
    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    /// Eigenvalues closer than `cluster_tol * max|H_ij|` are merged.
    pub cluster_tol: f64,
    /// Relative rank threshold; `None` means `dim * eps`.
    pub rank_tol: Option<f64>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            cluster_tol: DEFAULT_CLUSTER_TOL,
            rank_tol: None,
        }
    }
}

fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Single-linkage grouping of values closer than `tol`.
fn group(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut i = i;
        while p[i] != r {
            let next = p[i];
            p[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

struct RankInfo {
    rank: usize,
    ambiguous: bool,
}

fn numerical_rank(m: &DMatrix<C64>, rel_tol: f64) -> RankInfo {
    let sv = m.clone().singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let tau = rel_tol * smax;
    let rank = sv.iter().filter(|&&s| s > tau).count();
    let ambiguous = tau > 0.0 && sv.iter().any(|&s| s > tau / 10.0 && s < tau * 10.0);
    RankInfo { rank, ambiguous }
}

/// Jordan block sizes of the eigenvalue `value` with algebraic multiplicity `m`.
fn jordan_structure(h: &DMatrix<C64>, value: C64, m: usize, rel_tol: f64) -> (Vec<usize>, Vec<usize>, bool) {
    let dim = h.nrows();
    let b = h - DMatrix::<C64>::identity(dim, dim) * value;
    let mut power = DMatrix::<C64>::identity(dim, dim);
    let mut ranks = vec![dim];
    let mut ambiguous = false;
    for _ in 0..m {
        power = &power * &b;
        let info = numerical_rank(&power, rel_tol);
        ambiguous |= info.ambiguous;
        let prev = *ranks.last().unwrap();
        ranks.push(info.rank.min(prev));
        if dim - info.rank >= m || info.rank == prev {
            break;
        }
    }
    // number of blocks of size >= k is the nullity increment at step k
    let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    let mut blocks = Vec::new();
    for k in (1..=at_least.len()).rev() {
        let exact = at_least[k - 1] - at_least.get(k).copied().unwrap_or(0).min(at_least[k - 1]);
        blocks.extend(std::iter::repeat_n(k, exact));
    }
    let total: usize = blocks.iter().sum();
    if total != m {
        ambiguous = true;
        if blocks.is_empty() {
            blocks.push(m);
        } else if total < m {
            blocks[0] += m - total;
        } else {
            let mut excess = total - m;
            while excess > 0 {
                let last = blocks.len() - 1;
                let take = excess.min(blocks[last]);
                blocks[last] -= take;
                excess -= take;
                if blocks[last] == 0 {
                    blocks.pop();
                }
            }
        }
    }
    (blocks, ranks, ambiguous)
}

/// The `count` right singular vectors of `h - value I` with the smallest
/// singular values, each normalized with its largest entry real positive.
fn null_vectors(h: &DMatrix<C64>, value: C64, count: usize) -> Vec<Vec<C64>> {
    let dim = h.nrows();
    let b = h - DMatrix::<C64>::identity(dim, dim) * value;
    let svd = b.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    order
        .into_iter()
        .take(count)
        .map(|row| {
            let mut v: Vec<C64> = (0..dim).map(|c| v_t[(row, c)].conj()).collect();
            normalize_phase(&mut v);
            v
        })
        .collect()
}

fn normalize_phase(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .fold(ZERO, |best, z| if z.norm() > best.norm() { z } else { best });
    if norm == 0.0 || pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot.conj() / pivot.norm() / norm;
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// Eigenvalues, eigenvectors (when diagonalizable) and Jordan structure of
/// a dense matrix.
pub fn analyze_spectrum(h: &HamiltonianMatrix, opts: AnalyzeOptions) -> Result<SpectrumReport> {
    if !(opts.cluster_tol > 0.0) {
        return param("cluster tolerance must be positive");
    }
    if let Some(t) = opts.rank_tol {
        if !(t > 0.0) {
            return param("rank tolerance must be positive");
        }
    }
    let dim = h.dim();
    let scale = h.max_abs_entry();
    let abs_tol = opts.cluster_tol * if scale > 0.0 { scale } else { 1.0 };
    let rel_rank_tol = opts.rank_tol.unwrap_or(dim as f64 * f64::EPSILON);

    let mut eigenvalues = eigen::eigenvalues(&h.matrix)?;
    sort_complex(&mut eigenvalues);

    let mut clusters = Vec::new();
    for members in group(&eigenvalues, abs_tol) {
        let m = members.len();
        let value = members.iter().map(|&i| eigenvalues[i]).sum::<C64>() / m as f64;
        let (jordan_blocks, rank_sequence, rank_ambiguous) = if m > 1 {
            jordan_structure(&h.matrix, value, m, rel_rank_tol)
        } else {
            (vec![1], vec![dim, dim - 1], false)
        };
        let ep_order = jordan_blocks.iter().copied().max().unwrap_or(1);
        clusters.push(Cluster {
            value,
            multiplicity: m,
            jordan_blocks,
            ep_order,
            rank_sequence,
            spread_radius: scale * f64::EPSILON.powf(1.0 / ep_order as f64),
            rank_ambiguous,
        });
    }
    let is_defective = clusters.iter().any(|c| c.ep_order > 1);
    let rank_ambiguous = clusters.iter().any(|c| c.rank_ambiguous);

    let eigenvectors = if is_defective {
        None
    } else {
        let mut vecs = vec![Vec::new(); dim];
        let groups = group(&eigenvalues, abs_tol);
        for (members, cluster) in groups.iter().zip(&clusters) {
            let target = if members.len() == 1 {
                eigenvalues[members[0]]
            } else {
                cluster.value
            };
            for (slot, v) in members.iter().zip(null_vectors(&h.matrix, target, members.len())) {
                vecs[*slot] = v;
            }
        }
        Some(vecs)
    };

    Ok(SpectrumReport {
        eigenvalues,
        eigenvectors,
        clusters,
        is_defective,
        rank_ambiguous,
        dense_check: None,
    })
}

/// Largest distance between two equally sized multisets under greedy
/// nearest pairing.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for &x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, &y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("b has an unused element");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Analytic ring spectrum `E_k = kappa1 e^{i q_k} + kappa2 e^{-i q_k}` with
/// `q_k = 2 pi k / (N + 1)`, cross-checked against a dense eigensolve.
pub fn ring_spectrum(spec: &LatticeSpec) -> Result<SpectrumReport> {
    spec.validate()?;
    if spec.geometry != Geometry::Ring {
        return param("ring_spectrum needs the ring geometry");
    }
    if spec.force != 0.0 {
        return param("ring_spectrum needs zero static force");
    }
    let m = spec.sites;
    let qs: Vec<f64> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
    let eigenvalues: Vec<C64> = qs
        .iter()
        .map(|&q| spec.kappa1 * C64::from_polar(1.0, q) + spec.kappa2 * C64::from_polar(1.0, -q))
        .collect();
    let norm = (m as f64).sqrt().recip();
    let eigenvectors: Vec<Vec<C64>> = qs
        .iter()
        .map(|&q| (0..m).map(|n| C64::from_polar(norm, q * n as f64)).collect())
        .collect();

    let scale = spec.kappa1.norm().max(spec.kappa2.norm());
    let abs_tol = DEFAULT_CLUSTER_TOL * if scale > 0.0 { scale } else { 1.0 };
    // circulant matrices are normal, so every block has size one
    let clusters = group(&eigenvalues, abs_tol)
        .into_iter()
        .map(|members| {
            let mult = members.len();
            Cluster {
                value: members.iter().map(|&i| eigenvalues[i]).sum::<C64>() / mult as f64,
                multiplicity: mult,
                jordan_blocks: vec![1; mult],
                ep_order: 1,
                rank_sequence: vec![m, m - mult],
                spread_radius: scale * f64::EPSILON,
                rank_ambiguous: false,
            }
        })
        .collect();

    let dense = eigen::eigenvalues(&build_hamiltonian(spec)?.matrix)?;
    let dense_check = multiset_distance(&eigenvalues, &dense);
    if dense_check > 1e-8 * scale.max(1.0) {
        return Err(Error::Computation(format!(
            "ring spectrum disagrees with dense eigensolve by {dense_check:e}"
        )));
    }
    Ok(SpectrumReport {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
        clusters,
        is_defective: false,
        rank_ambiguous: false,
        dense_check: Some(dense_check),
    })
}

/// Wannier-Stark eigenstate of the forced unidirectional chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WannierStarkState {
    pub ladder_index: i64,
    pub energy: C64,
    /// Amplitudes `a_n` on the full basis of the lattice.
    pub state: StateVector,
    /// Fraction of the squared norm that lies below the window (infinite
    /// chain only; zero for the finite chain).
    pub tail_weight: f64,
}

/// Closed-form ladder states `E_l = l F`, `a_l = 1`,
/// `a_{l-k} = (kappa1 / F)^k / k!` and `a_n = 0` for `n > l`.
pub fn wannier_stark_states(spec: &LatticeSpec, ladder: &[i64]) -> Result<Vec<WannierStarkState>> {
    spec.validate()?;
    if spec.force == 0.0 {
        return param("WS ladder undefined for F = 0; use analyze_spectrum");
    }
    if !spec.is_unidirectional() {
        return param("closed-form WS states need kappa2 = 0");
    }
    let (lo, hi) = match spec.geometry {
        Geometry::FiniteChain => (0, spec.sites as i64 - 1),
        Geometry::InfiniteChain => (spec.window.n_min, spec.window.n_max),
        Geometry::Ring => return param("WS states are defined for chain geometries only"),
    };
    let ratio = spec.kappa1 / spec.force;
    ladder
        .iter()
        .map(|&l| {
            if l < lo || l > hi {
                return param(format!("ladder index {l} outside [{lo}, {hi}]"));
            }
            let mut state = StateVector::zeros(spec.offset(), spec.dim());
            let mut a = ONE;
            let mut k = 0i64;
            loop {
                let idx = state.index_of(l - k).expect("site inside window");
                state.amps[idx] = a;
                if l - k == lo {
                    break;
                }
                k += 1;
                a *= ratio / k as f64;
            }
            let tail_weight = if spec.geometry == Geometry::InfiniteChain {
                tail_weight(ratio.norm(), (l - lo) as u64, state.norm_sqr())
            } else {
                0.0
            };
            Ok(WannierStarkState {
                ladder_index: l,
                energy: C64::new(l as f64 * spec.force, 0.0),
                state,
                tail_weight,
            })
        })
        .collect()
}

/// Relative squared weight of the terms `k > kmax` of `sum_k r^{2k} / (k!)^2`.
fn tail_weight(r: f64, kmax: u64, inside: f64) -> f64 {
    let mut term = 1.0f64;
    for k in 1..=kmax {
        term *= r / k as f64;
    }
    let mut tail = 0.0;
    let mut k = kmax;
    loop {
        k += 1;
        term *= r / k as f64;
        let w = term * term;
        tail += w;
        if w <= f64::EPSILON * f64::EPSILON * (inside + tail) || k > kmax + 100_000 {
            break;
        }
    }
    tail / (inside + tail)
}

/// `||H a - E a|| / (||H|| ||a||)` with the Frobenius norm of `H`.
pub fn eigen_residual(h: &HamiltonianMatrix, energy: C64, state: &StateVector) -> Result<f64> {
    let ha = h.apply(state)?;
    let r: f64 = ha
        .amps
        .iter()
        .zip(&state.amps)
        .map(|(x, a)| (x - energy * a).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let denom = h.frobenius_norm() * state.norm();
    Ok(if denom == 0.0 { r } else { r / denom })
}
