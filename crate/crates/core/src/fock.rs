//! Truncated Fock-space oracle.
//!
//! Builds the three-mode state amplitude by amplitude in a basis
//! `|n_A, n_I, n_II⟩` with `n < d` per mode and recomputes covariances and
//! negativities from it, sharing no code path with the phase-space
//! construction.
//!
//! Sign convention: [`crate::symplectic::two_mode_squeezer`] uses
//! `q_i -> q_i cosh ξ − q_j sinh ξ`, which is the Heisenberg action of
//! `exp{ξ(ab − a†b†)}`. The oracle therefore applies
//! [`TruncatedState::squeeze_pair`] with `−ξ`, so its amplitudes carry a
//! factor `(−1)^{n_I}` relative to the textbook `tanhᵐ ξ / cosh ξ`
//! expansion. The two states differ by a phase rotation of mode I, which
//! changes no entanglement quantity.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::symplectic::{normalize_modes, CovarianceMatrix, ModeLabel, ScenarioParams};

pub type C64 = Complex<f64>;

/// Default per-mode cutoff.
pub const DEFAULT_CUTOFF: usize = 24;

/// Largest truncation tail the oracle accepts.
pub const ORACLE_TAIL_LIMIT: f64 = 1e-8;

const N_MODES: usize = 3;
const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Annihilation operator truncated to `d` levels: `a|n⟩ = √n |n−1⟩`.
pub fn ladder_matrix(d: usize) -> Result<DMatrix<f64>> {
    if d < 2 {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d as f64,
            reason: "cutoff must be at least 2",
        });
    }
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    Ok(a)
}

/// Norm dropped by truncating the scenario state at `d` levels per mode.
///
/// Every squeezing step creates quanta in pairs, one of them always in
/// mode I, so `n_I = n_A + n_II` and the truncated basis misses exactly the
/// components with `n_I ≥ d`. Mode I alone is thermal with mean occupation
/// `n̄ = cosh²r cosh²s − 1`, so the lost probability is
/// `(n̄ / (n̄ + 1))^d`; at `r = 0` this is the geometric tail `tanh^{2d} s`.
pub fn truncation_tail(params: &ScenarioParams, d: usize) -> f64 {
    let (s, r) = (params.s(), params.r());
    // cosh²r cosh²s − 1 without the cancellation at small s, r
    let nbar = s.sinh().powi(2) + r.sinh().powi(2) * s.cosh().powi(2);
    if nbar == 0.0 {
        return 0.0;
    }
    let ratio = nbar / (nbar + 1.0);
    ratio.powf(d as f64)
}

/// Complex amplitudes over `|n_A, n_I, n_II⟩`, `0 ≤ n < cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedState {
    cutoff: usize,
    amplitudes: Vec<C64>,
}

impl TruncatedState {
    pub fn vacuum(cutoff: usize) -> Result<Self> {
        ladder_matrix(cutoff)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); cutoff.pow(N_MODES as u32)];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(Self { cutoff, amplitudes })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n_a: usize, n_i: usize, n_ii: usize) -> C64 {
        self.amplitudes[self.flat([n_a, n_i, n_ii])]
    }

    /// `⟨ψ|ψ⟩`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    fn flat(&self, n: [usize; N_MODES]) -> usize {
        (n[0] * self.cutoff + n[1]) * self.cutoff + n[2]
    }

    fn occupations(&self, mut idx: usize) -> [usize; N_MODES] {
        let d = self.cutoff;
        let n_ii = idx % d;
        idx /= d;
        [idx / d, idx % d, n_ii]
    }

    fn stride(&self, mode: ModeLabel) -> usize {
        self.cutoff.pow((N_MODES - 1 - mode.index()) as u32)
    }

    /// Applies `exp{ξ(a_i† a_j† − a_i a_j)}` in the normally ordered form
    ///
    /// ```text
    /// exp(Γ a†b†) · (cosh ξ)^{−(a†a + b†b + 1)} · exp(−Γ ab),   Γ = tanh ξ
    /// ```
    ///
    /// Each exponential series terminates inside the truncated space;
    /// components pushed above the cutoff are dropped.
    pub fn squeeze_pair(&self, xi: f64, mode_i: ModeLabel, mode_j: ModeLabel) -> Result<Self> {
        if mode_i == mode_j {
            return Err(Error::SameMode(mode_i));
        }
        let gamma = xi.tanh();
        let sech = 1.0 / xi.cosh();
        let (si, sj) = (self.stride(mode_i), self.stride(mode_j));
        let (ii, jj) = (mode_i.index(), mode_j.index());
        let zero = C64::new(0.0, 0.0);

        // exp(−Γ ab): lowers both modes together
        let mut lowered = vec![zero; self.amplitudes.len()];
        for (idx, &amp) in self.amplitudes.iter().enumerate() {
            if amp == zero {
                continue;
            }
            let n = self.occupations(idx);
            let mut coeff = 1.0;
            for k in 0..=n[ii].min(n[jj]) {
                if k > 0 {
                    coeff *=
                        -gamma / k as f64 * (((n[ii] - k + 1) * (n[jj] - k + 1)) as f64).sqrt();
                }
                lowered[idx - k * (si + sj)] += amp * coeff;
            }
        }

        // (cosh ξ)^{−(n_i + n_j + 1)}
        for (idx, amp) in lowered.iter_mut().enumerate() {
            let n = self.occupations(idx);
            *amp *= sech.powi((n[ii] + n[jj] + 1) as i32);
        }

        // exp(Γ a†b†): raises both modes together
        let d = self.cutoff;
        let mut raised = vec![zero; self.amplitudes.len()];
        for (idx, &amp) in lowered.iter().enumerate() {
            if amp == zero {
                continue;
            }
            let n = self.occupations(idx);
            let mut coeff = 1.0;
            for k in 0.. {
                if n[ii] + k >= d || n[jj] + k >= d {
                    break;
                }
                if k > 0 {
                    coeff *= gamma / k as f64 * (((n[ii] + k) * (n[jj] + k)) as f64).sqrt();
                }
                raised[idx + k * (si + sj)] += amp * coeff;
            }
        }
        Ok(Self {
            cutoff: d,
            amplitudes: raised,
        })
    }

    /// `op` acting on one mode's factor of the tensor.
    fn apply_single_mode(&self, op: &DMatrix<f64>, mode: ModeLabel) -> Vec<C64> {
        let stride = self.stride(mode);
        let axis = mode.index();
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let n = self.occupations(idx)[axis];
            let base = idx - n * stride;
            *slot = (0..self.cutoff)
                .map(|m| self.amplitudes[base + m * stride] * op[(n, m)])
                .sum();
        }
        out
    }

    fn lowered(&self, mode: ModeLabel) -> TruncatedState {
        let a = ladder_matrix(self.cutoff).expect("cutoff validated at construction");
        TruncatedState {
            cutoff: self.cutoff,
            amplitudes: self.apply_single_mode(&a, mode),
        }
    }

    /// `⟨[a, a†]⟩` for one mode with both operators truncated, normalized by
    /// `⟨ψ|ψ⟩`. Equals 1 up to the weight on the top level.
    pub fn commutator_expectation(&self, mode: ModeLabel) -> f64 {
        let a = ladder_matrix(self.cutoff).expect("cutoff validated at construction");
        let comm = &a * a.transpose() - a.transpose() * &a;
        let out = self.apply_single_mode(&comm, mode);
        inner(&self.amplitudes, &out).re / self.norm_sqr()
    }

    /// `⟨X_k⟩` for `X = (q_A, p_A, q_I, p_I, q_II, p_II)`.
    pub fn first_moments(&self) -> [f64; 2 * N_MODES] {
        let norm = self.norm_sqr();
        let mut out = [0.0; 2 * N_MODES];
        for mode in ModeLabel::ALL {
            let a = inner(&self.amplitudes, &self.lowered(mode).amplitudes) / norm;
            // q = √2 Re⟨a⟩, p = √2 Im⟨a⟩
            out[2 * mode.index()] = std::f64::consts::SQRT_2 * a.re;
            out[2 * mode.index() + 1] = std::f64::consts::SQRT_2 * a.im;
        }
        out
    }
}

fn inner(bra: &[C64], ket: &[C64]) -> C64 {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).sum()
}

/// The scenario state: squeeze `(A, I)` by `s`, then `(I, II)` by `r`, in
/// that order. Refuses cutoffs whose truncation tail exceeds
/// [`ORACLE_TAIL_LIMIT`].
pub fn build_state_fock(params: &ScenarioParams, d: usize) -> Result<TruncatedState> {
    let vacuum = TruncatedState::vacuum(d)?;
    let tail = truncation_tail(params, d);
    if tail > ORACLE_TAIL_LIMIT {
        return Err(Error::CutoffTooSmall {
            cutoff: d,
            tail,
            limit: ORACLE_TAIL_LIMIT,
        });
    }
    vacuum
        .squeeze_pair(-params.s(), ModeLabel::A, ModeLabel::I)?
        .squeeze_pair(-params.r(), ModeLabel::I, ModeLabel::II)
}

/// `V_ij = Re⟨X_i X_j⟩` (the symmetrized second moment) for all six
/// quadratures, computed from normally ordered moments `⟨a_k a_l⟩` and
/// `⟨a_k† a_l⟩`. The one anti-normally ordered term uses the exact
/// commutator `a a† = a†a + 1` rather than the truncated product.
pub fn covariance_from_state(state: &TruncatedState) -> CovarianceMatrix {
    let norm = state.norm_sqr();
    let lowered: Vec<TruncatedState> = ModeLabel::ALL.iter().map(|&m| state.lowered(m)).collect();

    // ⟨a_k† a_l⟩ and ⟨a_k a_l⟩
    let mut normal = [[C64::new(0.0, 0.0); N_MODES]; N_MODES];
    let mut pair = [[C64::new(0.0, 0.0); N_MODES]; N_MODES];
    for k in 0..N_MODES {
        for l in 0..N_MODES {
            normal[k][l] = inner(&lowered[k].amplitudes, &lowered[l].amplitudes) / norm;
            let al = &lowered[l];
            let ak_al = al.lowered(ModeLabel::ALL[k]);
            pair[k][l] = inner(&state.amplitudes, &ak_al.amplitudes) / norm;
        }
    }

    // X = (u a + v a†)/√2, so ⟨X_i X_j⟩ carries an overall ½
    let coeffs = |quad: usize| -> (C64, C64) {
        if quad == 0 {
            (C64::new(1.0, 0.0), C64::new(1.0, 0.0))
        } else {
            (C64::new(0.0, -1.0), C64::new(0.0, 1.0))
        }
    };

    let mut v = DMatrix::zeros(2 * N_MODES, 2 * N_MODES);
    for i in 0..2 * N_MODES {
        for j in 0..2 * N_MODES {
            let (k, l) = (i / 2, j / 2);
            let (ui, vi) = coeffs(i % 2);
            let (uj, vj) = coeffs(j % 2);
            let delta = if k == l { 1.0 } else { 0.0 };
            let a_adag = normal[l][k] + delta;
            let adag_adag = pair[l][k].conj();
            let xx = ui * uj * pair[k][l]
                + ui * vj * a_adag
                + vi * uj * normal[k][l]
                + vi * vj * adag_adag;
            v[(i, j)] = 0.5 * xx.re;
        }
    }
    let v = (&v + v.transpose()) * 0.5;
    CovarianceMatrix::from_parts_unchecked(ModeLabel::ALL.to_vec(), v)
}

/// Density matrix over a subset of modes, basis ordered like the
/// amplitude tensor (last mode fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    modes: Vec<ModeLabel>,
    cutoff: usize,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|c| c.re).sum()
    }

    /// `tr(ρ²) / tr(ρ)²`.
    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        // ρ is Hermitian, so tr(ρ²) = Σ |ρ_ij|²
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>() / (tr * tr)
    }

    /// Largest `|ρ − ρ†|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Partial trace over every mode not in `keep`.
pub fn reduced_density(state: &TruncatedState, keep: &[ModeLabel]) -> Result<DensityMatrix> {
    let keep = normalize_modes(keep, &ModeLabel::ALL)?;
    let traced: Vec<ModeLabel> = ModeLabel::ALL
        .iter()
        .copied()
        .filter(|m| !keep.contains(m))
        .collect();
    let d = state.cutoff;
    let dim_keep = d.pow(keep.len() as u32);
    let dim_traced = d.pow(traced.len() as u32);

    let offset = |modes: &[ModeLabel], mut idx: usize| -> usize {
        let mut flat = 0;
        for &m in modes.iter().rev() {
            flat += (idx % d) * state.stride(m);
            idx /= d;
        }
        flat
    };
    let psi = DMatrix::from_fn(dim_keep, dim_traced, |row, col| {
        state.amplitudes[offset(&keep, row) + offset(&traced, col)]
    });
    Ok(DensityMatrix {
        modes: keep,
        cutoff: d,
        entries: &psi * psi.adjoint(),
    })
}

/// `max(0, ln ‖ρ^{T_left}‖₁)` with `ρ` normalized to unit trace.
///
/// The partial transpose swaps the bra and ket indices of the `left`
/// modes. Its trace norm is the sum of absolute eigenvalues; the matrix is
/// first split into the connected components of its sparsity pattern (a
/// permutation to block-diagonal form) so each block is diagonalized
/// separately.
pub fn log_negativity_fock(rho: &DensityMatrix, left: &[ModeLabel]) -> Result<f64> {
    let left = normalize_modes(left, &rho.modes)?;
    if left.len() == rho.modes.len() {
        return Err(Error::InvalidPartition(
            "left side must leave at least one mode on the right".into(),
        ));
    }
    let d = rho.cutoff;
    let k = rho.modes.len();
    let dim = rho.entries.nrows();
    let flip: Vec<bool> = rho.modes.iter().map(|m| left.contains(m)).collect();

    let digits = |mut idx: usize| -> Vec<usize> {
        let mut out = vec![0; k];
        for slot in out.iter_mut().rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    };
    let compose = |ds: &[usize]| ds.iter().fold(0, |acc, &x| acc * d + x);

    let pt = DMatrix::from_fn(dim, dim, |row, col| {
        let (mut x, mut y) = (digits(row), digits(col));
        for pos in 0..k {
            if flip[pos] {
                std::mem::swap(&mut x[pos], &mut y[pos]);
            }
        }
        rho.entries[(compose(&x), compose(&y))]
    });

    let mut trace_norm = 0.0;
    for block in connected_components(&pt) {
        let sub = DMatrix::from_fn(block.len(), block.len(), |i, j| pt[(block[i], block[j])]);
        let eig =
            SymmetricEigen::try_new(sub, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenSolver)?;
        trace_norm += eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>();
    }
    Ok((trace_norm / rho.trace()).ln().max(0.0))
}

fn connected_components(m: &DMatrix<C64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let zero = C64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..j {
            if m[(i, j)] != zero || m[(j, i)] != zero {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}
