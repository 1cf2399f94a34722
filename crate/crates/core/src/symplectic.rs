//! Covariance matrices, symplectic maps and the three-mode scenario state.
//!
//! Phase-space vectors are ordered `(q_A, p_A, q_I, p_I, q_II, p_II)`; a
//! state over a subset of modes keeps the same relative order. A Gaussian
//! unitary acts on quadratures as `X -> S X` and on covariance matrices as
//! `V -> S V Sᵀ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use twofloat::TwoFloat;

use crate::entanglement::symplectic_eigenvalues;
use crate::error::{Error, Result};

/// Tolerance for the symmetry check on covariance matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Slack below 1/2 still accepted by the physicality check.
pub const PHYSICAL_TOL: f64 = 1e-10;

/// Largest `s` or `r` accepted: `cosh(2x)` must stay representable.
pub const MAX_PARAMETER: f64 = 350.0;

/// One of the three field modes: Alice's inertial mode and the two Rindler
/// wedge modes seen by the accelerated observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeLabel {
    A,
    I,
    II,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 3] = [ModeLabel::A, ModeLabel::I, ModeLabel::II];

    /// Position in the canonical ordering.
    pub fn index(self) -> usize {
        match self {
            ModeLabel::A => 0,
            ModeLabel::I => 1,
            ModeLabel::II => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeLabel::A => "A",
            ModeLabel::I => "I",
            ModeLabel::II => "II",
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" => Ok(ModeLabel::A),
            "I" => Ok(ModeLabel::I),
            "II" => Ok(ModeLabel::II),
            other => Err(Error::InvalidPartition(format!("unknown mode {other:?}"))),
        }
    }
}

/// The first `n` modes in canonical order.
pub(crate) fn canonical_modes(n_modes: usize) -> Result<Vec<ModeLabel>> {
    if n_modes == 0 || n_modes > ModeLabel::ALL.len() {
        return Err(Error::InvalidModeCount(n_modes));
    }
    Ok(ModeLabel::ALL[..n_modes].to_vec())
}

/// Sorts and deduplicates a mode selection, checking it against `available`.
pub(crate) fn normalize_modes(
    requested: &[ModeLabel],
    available: &[ModeLabel],
) -> Result<Vec<ModeLabel>> {
    if requested.is_empty() {
        return Err(Error::EmptyModeSet);
    }
    let mut modes = requested.to_vec();
    modes.sort();
    modes.dedup();
    if let Some(missing) = modes.iter().find(|m| !available.contains(m)) {
        return Err(Error::MissingMode(*missing));
    }
    Ok(modes)
}

fn position(modes: &[ModeLabel], mode: ModeLabel) -> Result<usize> {
    modes
        .iter()
        .position(|&m| m == mode)
        .ok_or(Error::MissingMode(mode))
}

/// Block-diagonal symplectic form with one `[[0, 1], [-1, 0]]` block per mode.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Real symmetric matrix of symmetrized quadrature second moments,
/// `V_ij = ½⟨{X_i, X_j}⟩`. First moments are zero for every state here.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    modes: Vec<ModeLabel>,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a raw matrix. The modes must be distinct and the matrix
    /// `2n x 2n` and symmetric; physicality is checked separately.
    pub fn new(modes: Vec<ModeLabel>, entries: DMatrix<f64>) -> Result<Self> {
        let normalized = normalize_modes(&modes, &ModeLabel::ALL)?;
        if normalized != modes {
            return Err(Error::InvalidPartition(format!(
                "modes must be distinct and in canonical order, got {modes:?}"
            )));
        }
        let dim = 2 * modes.len();
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::BadShape {
                rows: entries.nrows(),
                cols: entries.ncols(),
                expected: dim,
            });
        }
        let asym = max_asymmetry(&entries);
        let scale = entries.amax().max(1.0);
        if asym.is_nan() || asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self { modes, entries })
    }

    pub(crate) fn from_parts_unchecked(modes: Vec<ModeLabel>, entries: DMatrix<f64>) -> Self {
        Self { modes, entries }
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    /// Entry addressed by quadrature: `quad` is 0 for `q` and 1 for `p`.
    pub fn entry(
        &self,
        row_mode: ModeLabel,
        row_quad: usize,
        col_mode: ModeLabel,
        col_quad: usize,
    ) -> Result<f64> {
        let i = 2 * position(&self.modes, row_mode)? + row_quad;
        let j = 2 * position(&self.modes, col_mode)? + col_quad;
        Ok(self.entries[(i, j)])
    }

    /// Checks the uncertainty relation: every symplectic eigenvalue must be
    /// at least `1/2 - PHYSICAL_TOL - ε·max|V|²`.
    ///
    /// The second term is the spread that rounding the entries to `f64`
    /// alone causes in the spectrum; it reaches ~2e-8 at `s = r = 3` and is
    /// negligible for moderate entries.
    pub fn check_physical(&self) -> Result<()> {
        let nu = symplectic_eigenvalues(self)?;
        let slack = PHYSICAL_TOL + f64::EPSILON * self.entries.amax().powi(2);
        match nu.first() {
            Some(&min) if min < 0.5 - slack => Err(Error::Unphysical(min)),
            _ => Ok(()),
        }
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical().is_ok()
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// Real `2n x 2n` matrix `S` with `S Ω Sᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    modes: Vec<ModeLabel>,
    entries: DMatrix<f64>,
}

impl SymplecticMap {
    pub fn identity(n_modes: usize) -> Result<Self> {
        let modes = canonical_modes(n_modes)?;
        Ok(Self {
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
            modes,
        })
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `‖S Ω Sᵀ − Ω‖_max`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        (&self.entries * &omega * self.entries.transpose() - omega).amax()
    }

    /// `self ∘ other`: the map that applies `other` first.
    pub fn compose(&self, other: &SymplecticMap) -> Result<SymplecticMap> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch {
                map: self.modes.clone(),
                state: other.modes.clone(),
            });
        }
        Ok(SymplecticMap {
            modes: self.modes.clone(),
            entries: &self.entries * &other.entries,
        })
    }

    /// `S⁻¹ = Ω Sᵀ Ωᵀ`, exact for symplectic matrices.
    pub fn inverse(&self) -> SymplecticMap {
        let omega = symplectic_form(self.n_modes());
        SymplecticMap {
            modes: self.modes.clone(),
            entries: &omega * self.entries.transpose() * omega.transpose(),
        }
    }
}

/// The only physical inputs: initial squeezing `s` and acceleration
/// parameter `r` (related to proper acceleration through
/// `tanh r = exp(-2π|k|c/a)`, which is not modelled here).
///
/// Both must be finite and in `[0, 350]` so that `cosh 2s` and `cosh 2r`
/// are representable. Covariance entries grow like `e^{2(s+r)}`, so the
/// three-mode state itself overflows once `s + r` exceeds about 356, and
/// the symplectic spectra (which square the entries) stop being finite
/// beyond `s + r ≈ 170`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    s: f64,
    r: f64,
}

impl ScenarioParams {
    pub fn new(s: f64, r: f64) -> Result<Self> {
        check_parameter("s", s)?;
        check_parameter("r", r)?;
        Ok(Self { s, r })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

fn check_parameter(name: &'static str, value: f64) -> Result<()> {
    let reason = if !value.is_finite() {
        "must be finite"
    } else if value < 0.0 {
        "must be non-negative"
    } else if value > MAX_PARAMETER {
        "exceeds 350, cosh(2x) would overflow"
    } else {
        return Ok(());
    };
    Err(Error::InvalidParameter {
        name,
        value,
        reason,
    })
}

/// `(1/2)·I` over the first `n_modes` canonical modes.
pub fn vacuum_covariance(n_modes: usize) -> Result<CovarianceMatrix> {
    let modes = canonical_modes(n_modes)?;
    Ok(CovarianceMatrix {
        entries: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        modes,
    })
}

/// Two-mode squeezer on `(mode_i, mode_j)` acting on the first `n_modes`
/// canonical modes:
///
/// ```text
/// q_i -> q_i cosh ξ − q_j sinh ξ     p_i -> p_i cosh ξ + p_j sinh ξ
/// q_j -> q_j cosh ξ − q_i sinh ξ     p_j -> p_j cosh ξ + p_i sinh ξ
/// ```
pub fn two_mode_squeezer(
    xi: f64,
    mode_i: ModeLabel,
    mode_j: ModeLabel,
    n_modes: usize,
) -> Result<SymplecticMap> {
    if mode_i == mode_j {
        return Err(Error::SameMode(mode_i));
    }
    if !xi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "xi",
            value: xi,
            reason: "must be finite",
        });
    }
    let mut map = SymplecticMap::identity(n_modes)?;
    let i = position(&map.modes, mode_i)?;
    let j = position(&map.modes, mode_j)?;
    let (ch, sh) = (xi.cosh(), xi.sinh());
    let m = &mut map.entries;
    for (a, b) in [(i, j), (j, i)] {
        m[(2 * a, 2 * a)] = ch;
        m[(2 * a, 2 * b)] = -sh;
        m[(2 * a + 1, 2 * a + 1)] = ch;
        m[(2 * a + 1, 2 * b + 1)] = sh;
    }
    Ok(map)
}

/// Bogoliubov transformation between the Minkowski mode and the Rindler
/// pair: a two-mode squeezer of strength `r` on `(I, II)`.
pub fn unruh_map(r: f64) -> Result<SymplecticMap> {
    check_parameter("r", r)?;
    two_mode_squeezer(r, ModeLabel::I, ModeLabel::II, 3)
}

/// `S V Sᵀ`, symmetrized.
pub fn apply(map: &SymplecticMap, cov: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if map.modes != cov.modes {
        return Err(Error::ModeMismatch {
            map: map.modes.clone(),
            state: cov.modes.clone(),
        });
    }
    let out = &map.entries * &cov.entries * map.entries.transpose();
    let sym = (&out + out.transpose()) * 0.5;
    Ok(CovarianceMatrix {
        modes: cov.modes.clone(),
        entries: sym,
    })
}

/// The three-mode state: squeeze `(A, I)` by `s`, then apply the Unruh map
/// on `(I, II)`.
pub fn build_scenario_state(params: &ScenarioParams) -> Result<CovarianceMatrix> {
    // Same as apply(unruh_map(r), apply(two_mode_squeezer(s, A, I), vacuum)),
    // but V = ½ M Mᵀ is accumulated in double-double from a map that is
    // symplectic to that precision, then rounded once. Rounding each stage
    // separately costs up to ~1e-8 in the symplectic spectrum at s = r = 3.
    let squeezer = squeezer_dd(params.s, 0, 1);
    let unruh = squeezer_dd(params.r, 1, 2);
    let zero = TwoFloat::from(0.0);
    let mut m = [[zero; 6]; 6];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = (0..6).fold(zero, |acc, k| acc + unruh[i][k] * squeezer[k][j]);
        }
    }
    let entries = DMatrix::from_fn(6, 6, |i, j| {
        let acc = m[i]
            .iter()
            .zip(&m[j])
            .fold(zero, |acc, (&x, &y)| acc + x * y);
        f64::from(acc * 0.5)
    });
    let state = CovarianceMatrix {
        modes: ModeLabel::ALL.to_vec(),
        entries,
    };
    if state.entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::Overflow {
            s: params.s,
            r: params.r,
        });
    }
    Ok(state)
}

/// Three-mode two-mode squeezer on mode slots `a`, `b` in double-double.
/// `sinh ξ` is the rounded libm value and `cosh ξ = √(1 + sinh² ξ)`, so the
/// block is symplectic to double-double precision.
fn squeezer_dd(xi: f64, a: usize, b: usize) -> [[TwoFloat; 6]; 6] {
    let sh = TwoFloat::from(xi.sinh());
    let ch = (sh * sh + 1.0).sqrt();
    let zero = TwoFloat::from(0.0);
    let mut m = [[zero; 6]; 6];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = TwoFloat::from(1.0);
    }
    for (x, y) in [(a, b), (b, a)] {
        m[2 * x][2 * x] = ch;
        m[2 * x][2 * y] = -sh;
        m[2 * x + 1][2 * x + 1] = ch;
        m[2 * x + 1][2 * y + 1] = sh;
    }
    m
}

/// Restriction of `cov` to `modes`; rows and columns come out in canonical
/// order whatever order `modes` is given in.
pub fn marginal(cov: &CovarianceMatrix, modes: &[ModeLabel]) -> Result<CovarianceMatrix> {
    let keep = normalize_modes(modes, &cov.modes)?;
    let idx: Vec<usize> = keep
        .iter()
        .map(|&m| position(&cov.modes, m))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flat_map(|k| [2 * k, 2 * k + 1])
        .collect();
    let entries = DMatrix::from_fn(idx.len(), idx.len(), |i, j| cov.entries[(idx[i], idx[j])]);
    Ok(CovarianceMatrix {
        modes: keep,
        entries,
    })
}

/// Closed-form `(A, I)` marginal
/// `[[A, 0, −C, 0], [0, A, 0, C], [−C, 0, B, 0], [0, C, 0, B]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticEntries {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AnalyticEntries {
    pub fn covariance(&self) -> CovarianceMatrix {
        let AnalyticEntries { a, b, c } = *self;
        #[rustfmt::skip]
        let entries = DMatrix::from_row_slice(4, 4, &[
            a, 0.0, -c, 0.0,
            0.0, a, 0.0, c,
            -c, 0.0, b, 0.0,
            0.0, c, 0.0, b,
        ]);
        CovarianceMatrix {
            modes: vec![ModeLabel::A, ModeLabel::I],
            entries,
        }
    }
}

/// `A = ½ cosh 2s`, `B = cosh²r cosh²s − ½`, `C = ½ sinh 2s cosh r`.
///
/// These are the covariance entries themselves; there is no extra global
/// factor of ½ in front of the matrix (that reading would contradict
/// `V₁₁ = ½ cosh 2s`).
pub fn analytic_entries(params: &ScenarioParams) -> AnalyticEntries {
    let (s, r) = (params.s, params.r);
    let (ch_s, ch_r) = (s.cosh(), r.cosh());
    AnalyticEntries {
        a: 0.5 * (2.0 * s).cosh(),
        b: ch_r * ch_r * ch_s * ch_s - 0.5,
        c: 0.5 * (2.0 * s).sinh() * ch_r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ModeLabel::*;

    fn params(s: f64, r: f64) -> ScenarioParams {
        ScenarioParams::new(s, r).unwrap()
    }

    #[test]
    fn vacuum_is_half_identity() {
        let v1 = vacuum_covariance(1).unwrap();
        assert_eq!(v1.entries(), &DMatrix::from_diagonal_element(2, 2, 0.5));
        let v3 = vacuum_covariance(3).unwrap();
        assert_eq!(v3.entries(), &(DMatrix::identity(6, 6) * 0.5));
        assert_eq!(v3.modes(), &[A, I, II]);
    }

    #[test]
    fn vacuum_saturates_uncertainty() {
        let nu = symplectic_eigenvalues(&vacuum_covariance(2).unwrap()).unwrap();
        assert_eq!(nu.len(), 2);
        for v in nu {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn vacuum_rejects_bad_mode_counts() {
        assert_eq!(vacuum_covariance(0), Err(Error::InvalidModeCount(0)));
        assert_eq!(vacuum_covariance(4), Err(Error::InvalidModeCount(4)));
    }

    #[test]
    fn symplectic_form_squares_to_minus_identity() {
        let omega = symplectic_form(3);
        assert_eq!(omega.transpose(), -&omega);
        assert_eq!(&omega * &omega, -DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn squeezer_zero_is_identity() {
        let s = two_mode_squeezer(0.0, A, I, 3).unwrap();
        assert_eq!(s.entries(), &DMatrix::identity(6, 6));
    }

    #[test]
    fn squeezer_block_layout() {
        let (xi, ch, sh) = (0.7f64, 0.7f64.cosh(), 0.7f64.sinh());
        let s = two_mode_squeezer(xi, I, II, 3).unwrap();
        let block = s.entries().view((2, 2), (4, 4)).clone_owned();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            ch, 0.0, -sh, 0.0,
            0.0, ch, 0.0, sh,
            -sh, 0.0, ch, 0.0,
            0.0, sh, 0.0, ch,
        ]);
        assert_eq!(block, expected);
        // mode A untouched
        assert_eq!(s.entries()[(0, 0)], 1.0);
        assert_eq!(s.entries()[(0, 2)], 0.0);
        assert!(s.symplectic_defect() < 1e-14);
    }

    #[test]
    fn squeezer_rejects_same_mode_and_missing_mode() {
        assert_eq!(two_mode_squeezer(0.1, I, I, 3), Err(Error::SameMode(I)));
        assert_eq!(
            two_mode_squeezer(0.1, A, II, 2),
            Err(Error::MissingMode(II))
        );
    }

    #[test]
    fn squeezer_on_vacuum_gives_cosh_two_s() {
        let s = 0.8;
        let v = apply(
            &two_mode_squeezer(s, A, I, 2).unwrap(),
            &vacuum_covariance(2).unwrap(),
        )
        .unwrap();
        assert!((v.get(0, 0) - 0.5 * (2.0 * s).cosh()).abs() < 1e-14);
    }

    #[test]
    fn squeezer_group_property() {
        let (a, b) = (0.3, 1.1);
        let sa = two_mode_squeezer(a, A, I, 3).unwrap();
        let sb = two_mode_squeezer(b, A, I, 3).unwrap();
        let sab = two_mode_squeezer(a + b, A, I, 3).unwrap();
        let composed = sa.compose(&sb).unwrap();
        assert!((composed.entries() - sab.entries()).amax() < 1e-10);
    }

    #[test]
    fn unruh_map_matches_squeezer_and_is_symplectic() {
        assert_eq!(unruh_map(0.0).unwrap().entries(), &DMatrix::identity(6, 6));
        let g = unruh_map(5.0).unwrap();
        assert_eq!(g, two_mode_squeezer(5.0, I, II, 3).unwrap());
        assert!(g.symplectic_defect() < 1e-10);
        assert!(unruh_map(-1.0).is_err());
    }

    #[test]
    fn unruh_map_thermalizes_mode_one() {
        let r = 0.9;
        let v = apply(&unruh_map(r).unwrap(), &vacuum_covariance(3).unwrap()).unwrap();
        let m = marginal(&v, &[I]).unwrap();
        let c = 0.5 * (2.0 * r).cosh();
        assert!((m.get(0, 0) - c).abs() < 1e-14);
        assert!((m.get(1, 1) - c).abs() < 1e-14);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn apply_identity_and_inverse() {
        let state = build_scenario_state(&params(0.4, 0.6)).unwrap();
        let id = SymplecticMap::identity(3).unwrap();
        assert_eq!(apply(&id, &state).unwrap(), state);

        let sq = two_mode_squeezer(1.3, A, II, 3).unwrap();
        let inv = two_mode_squeezer(-1.3, A, II, 3).unwrap();
        assert!((sq.inverse().entries() - inv.entries()).amax() < 1e-12);
        let vac = vacuum_covariance(3).unwrap();
        let back = apply(&inv, &apply(&sq, &vac).unwrap()).unwrap();
        assert!((back.entries() - vac.entries()).amax() < 1e-10);
    }

    #[test]
    fn apply_rejects_mode_mismatch() {
        let sq = two_mode_squeezer(0.3, A, I, 2).unwrap();
        let err = apply(&sq, &vacuum_covariance(3).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ModeMismatch { .. }));
    }

    #[test]
    fn apply_at_zero_acceleration_reproduces_closed_form() {
        let s = 0.75;
        let v = apply(
            &two_mode_squeezer(s, A, I, 2).unwrap(),
            &vacuum_covariance(2).unwrap(),
        )
        .unwrap();
        let expected = analytic_entries(&params(s, 0.0)).covariance();
        assert!((v.entries() - expected.entries()).amax() < 1e-14);
    }

    #[test]
    fn scenario_at_origin_is_vacuum() {
        let v = build_scenario_state(&params(0.0, 0.0)).unwrap();
        assert_eq!(v.entries(), &(DMatrix::identity(6, 6) * 0.5));
    }

    #[test]
    fn scenario_marginal_entries() {
        for &(s, r) in &[(0.3, 0.0), (0.3, 1.7), (1.2, 0.4)] {
            let v = build_scenario_state(&params(s, r)).unwrap();
            assert!((v.entry(A, 0, A, 0).unwrap() - 0.5 * (2.0 * s).cosh()).abs() < 1e-12);

            let a2 = marginal(&v, &[A, II]).unwrap();
            let want = 0.5 * r.sinh() * (2.0 * s).sinh();
            assert!((a2.get(0, 2) - want).abs() < 1e-12);
            assert!((a2.get(1, 3) - want).abs() < 1e-12);

            let i2 = marginal(&v, &[II, I]).unwrap();
            let want = -0.5 * (2.0 * r).sinh() * s.cosh().powi(2);
            assert!((i2.get(0, 2) - want).abs() < 1e-12);
            assert!((i2.get(1, 3) + want).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_edge_cases() {
        let vac = vacuum_covariance(3).unwrap();
        let a = marginal(&vac, &[A]).unwrap();
        assert_eq!(a.entries(), &DMatrix::from_diagonal_element(2, 2, 0.5));

        let state = build_scenario_state(&params(0.5, 0.5)).unwrap();
        assert_eq!(marginal(&state, &[II, A, I]).unwrap(), state);

        assert_eq!(marginal(&state, &[]), Err(Error::EmptyModeSet));
        let two = marginal(&state, &[A, I]).unwrap();
        assert_eq!(marginal(&two, &[II]), Err(Error::MissingMode(II)));
    }

    #[test]
    fn analytic_entries_limits() {
        let e = analytic_entries(&params(0.0, 1.3));
        assert_eq!(e.a, 0.5);
        assert_eq!(e.c, 0.0);
        assert!((e.b - (1.3f64.cosh().powi(2) - 0.5)).abs() < 1e-14);

        let s = 0.9;
        let e = analytic_entries(&params(s, 0.0));
        assert!((e.a - e.b).abs() < 1e-14);
        assert!((e.c - 0.5 * (2.0 * s).sinh()).abs() < 1e-15);
        let built = marginal(&build_scenario_state(&params(s, 0.0)).unwrap(), &[A, I]).unwrap();
        assert!((built.entries() - e.covariance().entries()).amax() < 1e-14);
    }

    #[test]
    fn analytic_entries_match_built_state() {
        let p = params(0.5, 0.5);
        let built = marginal(&build_scenario_state(&p).unwrap(), &[A, I]).unwrap();
        let closed = analytic_entries(&p).covariance();
        assert!((built.entries() - closed.entries()).amax() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(ScenarioParams::new(-0.1, 0.0).is_err());
        assert!(ScenarioParams::new(0.0, f64::NAN).is_err());
        assert!(ScenarioParams::new(351.0, 0.0).is_err());
        assert!(ScenarioParams::new(300.0, 0.0).is_ok());
    }

    #[test]
    fn overflow_is_reported() {
        let err = build_scenario_state(&params(200.0, 200.0)).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
    }

    #[test]
    fn covariance_constructor_checks() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(
            CovarianceMatrix::new(vec![A], asym),
            Err(Error::NotSymmetric(_))
        ));
        assert!(matches!(
            CovarianceMatrix::new(vec![A, I], DMatrix::identity(2, 2)),
            Err(Error::BadShape { .. })
        ));
        assert!(CovarianceMatrix::new(vec![I, A], DMatrix::identity(4, 4)).is_err());
        let squeezed_single = CovarianceMatrix::new(
            vec![A],
            DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.1]),
        )
        .unwrap();
        assert!(matches!(
            squeezed_single.check_physical(),
            Err(Error::Unphysical(_))
        ));
    }

    #[test]
    fn mode_label_parsing() {
        assert_eq!("II".parse::<ModeLabel>().unwrap(), II);
        assert!("III".parse::<ModeLabel>().is_err());
        assert!(A < I && I < II);
    }
}
