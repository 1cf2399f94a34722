//! Partial transposition, symplectic spectra and logarithmic negativity.
//!
//! For one mode against one mode, positivity of the partial transpose is
//! necessary and sufficient for separability of a Gaussian state, so the
//! smallest partially transposed symplectic eigenvalue `λ̃` decides
//! everything: the state is entangled iff `λ̃ < 1/2`, and
//! `E_N = max(0, −ln 2λ̃)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::symplectic::{normalize_modes, CovarianceMatrix, ModeLabel};

/// Half-width of the band around 1/2 inside which a verdict is flagged as
/// a boundary case (and classified separable).
pub const SEPARABILITY_BAND: f64 = 1e-12;

/// Normalized discriminant below which the closed form is rejected.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// A bipartition of a state's modes into two disjoint, non-empty sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    left: Vec<ModeLabel>,
    right: Vec<ModeLabel>,
}

impl Partition {
    pub fn new(left: &[ModeLabel], right: &[ModeLabel]) -> Result<Self> {
        let left = normalize_modes(left, &ModeLabel::ALL)?;
        let right = normalize_modes(right, &ModeLabel::ALL)?;
        if let Some(m) = left.iter().find(|m| right.contains(m)) {
            return Err(Error::InvalidPartition(format!("mode {m} on both sides")));
        }
        Ok(Self { left, right })
    }

    /// Alice against Rob in region I.
    pub fn a_i() -> Self {
        Self::single(ModeLabel::A, ModeLabel::I)
    }

    /// Alice against the region II mode.
    pub fn a_ii() -> Self {
        Self::single(ModeLabel::A, ModeLabel::II)
    }

    /// The two Rindler wedge modes.
    pub fn i_ii() -> Self {
        Self::single(ModeLabel::I, ModeLabel::II)
    }

    /// The three single-mode bipartitions, in output order.
    pub fn all_pairs() -> [Partition; 3] {
        [Self::a_i(), Self::a_ii(), Self::i_ii()]
    }

    fn single(left: ModeLabel, right: ModeLabel) -> Self {
        Self {
            left: vec![left],
            right: vec![right],
        }
    }

    pub fn left(&self) -> &[ModeLabel] {
        &self.left
    }

    pub fn right(&self) -> &[ModeLabel] {
        &self.right
    }

    /// All modes of both sides in canonical order.
    pub fn modes(&self) -> Vec<ModeLabel> {
        let mut all: Vec<_> = self.left.iter().chain(&self.right).copied().collect();
        all.sort();
        all
    }

    /// Token used on the command line and in CSV output, e.g. `A-II`.
    pub fn token(&self) -> String {
        format!("{}-{}", join(&self.left), join(&self.right))
    }
}

fn join(modes: &[ModeLabel]) -> String {
    modes
        .iter()
        .map(|m| m.as_str())
        .collect::<Vec<_>>()
        .join("+")
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", join(&self.left), join(&self.right))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `A-I`, `A|I`, and `+`-joined multi-mode sides such as `A-I+II`.
    fn from_str(s: &str) -> Result<Self> {
        let (l, r) = s
            .split_once(['-', '|'])
            .ok_or_else(|| Error::InvalidPartition(format!("expected LEFT-RIGHT, got {s:?}")))?;
        let side = |t: &str| -> Result<Vec<ModeLabel>> { t.split('+').map(str::parse).collect() };
        Partition::new(&side(l)?, &side(r)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementReport {
    pub partition: Partition,
    /// Smallest symplectic eigenvalue of the partially transposed matrix.
    pub lambda_min: f64,
    /// Logarithmic negativity in nats.
    pub e_n: f64,
    pub separable: bool,
    /// `lambda_min` fell within `SEPARABILITY_BAND` of 1/2.
    pub boundary: bool,
}

impl EntanglementReport {
    pub fn from_lambda(partition: Partition, lambda_min: f64) -> Self {
        let boundary = (lambda_min - 0.5).abs() <= SEPARABILITY_BAND;
        Self {
            partition,
            lambda_min,
            e_n: negativity_from_lambda(lambda_min),
            separable: boundary || lambda_min >= 0.5,
            boundary,
        }
    }
}

/// `max(0, −ln 2λ)`.
pub fn negativity_from_lambda(lambda: f64) -> f64 {
    (-(2.0 * lambda).ln()).max(0.0)
}

/// `P V P` with `P` flipping the sign of every momentum quadrature of the
/// modes in `side`.
pub fn partial_transpose(cov: &CovarianceMatrix, side: &[ModeLabel]) -> Result<CovarianceMatrix> {
    let side = normalize_modes(side, cov.modes())?;
    let sign: Vec<f64> = cov
        .modes()
        .iter()
        .flat_map(|m| [1.0, if side.contains(m) { -1.0 } else { 1.0 }])
        .collect();
    let v = cov.entries();
    let out = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| sign[i] * sign[j] * v[(i, j)]);
    Ok(CovarianceMatrix::from_parts_unchecked(
        cov.modes().to_vec(),
        out,
    ))
}

/// The `n` symplectic eigenvalues of a positive-definite covariance matrix,
/// ascending: the moduli of the eigenvalues of `iΩV`.
///
/// With `V = L Lᵀ` (Cholesky), `iΩV` is similar to the Hermitian matrix
/// `i Lᵀ Ω L`, whose eigenvalues `±ν_k` are computed directly. `L` and
/// `Lᵀ Ω L` are formed in double-double; the smallest `ν` is then taken
/// from `√det V / ∏_{k>0} ν_k`, so it keeps its relative accuracy even when
/// the largest `ν` is many orders of magnitude bigger.
pub fn symplectic_eigenvalues(cov: &CovarianceMatrix) -> Result<Vec<f64>> {
    let v = cov.entries();
    let n = cov.n_modes();
    for i in 0..v.nrows() {
        for j in (i + 1)..v.ncols() {
            let d = (v[(i, j)] - v[(j, i)]).abs();
            if d.is_nan() || d > 1e-12 * v.amax().max(1.0) {
                return Err(Error::NotSymmetric(d));
            }
        }
    }
    let l = cholesky_dd(v)?;
    let dim = 2 * n;
    // K = Lᵀ Ω L, accumulated in double-double and rounded once
    let k = DMatrix::from_fn(dim, dim, |i, j| {
        let mut acc = TwoFloat::from(0.0);
        for m in 0..n {
            acc += l[2 * m][i] * l[2 * m + 1][j] - l[2 * m + 1][i] * l[2 * m][j];
        }
        f64::from(acc)
    });
    let h = k.map(|x| Complex::new(0.0, x));
    let eig = SymmetricEigen::try_new(h, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenSolver)?;
    let mut moduli: Vec<f64> = eig.eigenvalues.iter().map(|x| x.abs()).collect();
    moduli.sort_by(f64::total_cmp);
    let mut nu: Vec<f64> = moduli.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    // The eigensolver's absolute error scales with the largest ν, so the
    // smallest one is recovered from ∏ ν_k = √det V instead.
    let others: f64 = nu[1..].iter().product();
    let refined = f64::from(root_det_dd(&l) / others);
    if refined.is_finite() && refined > 0.0 {
        nu[0] = refined;
    }
    Ok(nu)
}

/// Smallest partially transposed symplectic eigenvalue of the matrix
/// `[[A, 0, −C, 0], [0, A, 0, C], [−C, 0, B, 0], [0, C, 0, B]]`:
///
/// ```text
/// λ² = (Σ − √(Σ² − 4 det V)) / 2,   Σ = A² + B² + 2C²,   det V = (AB − C²)²
/// ```
///
/// evaluated as `2 det V / (Σ + √(Σ² − 4 det V))`, which has no cancellation
/// when `λ` is small relative to the largest eigenvalue. The discriminant
/// is checked in the normalized form `1 − (2√det V / Σ)²`; slightly
/// negative values (down to `−DISCRIMINANT_TOL`) are clamped to zero.
pub fn lambda_closed_form(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(Error::InvalidClosedForm(format!(
            "non-finite entries A = {a}, B = {b}, C = {c}"
        )));
    }
    if a < 0.5 - SEPARABILITY_BAND || b < 0.5 - SEPARABILITY_BAND {
        return Err(Error::InvalidClosedForm(format!(
            "diagonal entries must be at least 1/2, got A = {a}, B = {b}"
        )));
    }
    let sigma = a * a + b * b + 2.0 * c * c;
    let root_det = difference_of_products(a, b, c, c).abs();
    let ratio = 2.0 * root_det / sigma;
    let disc = 1.0 - ratio * ratio;
    if disc < -DISCRIMINANT_TOL {
        return Err(Error::InvalidClosedForm(format!(
            "negative discriminant {disc:e}"
        )));
    }
    let lambda_sq = 2.0 * root_det * root_det / (sigma * (1.0 + disc.max(0.0).sqrt()));
    Ok(lambda_sq.sqrt())
}

/// `ab − cd` with a single rounding error (Kahan's fused-multiply-add trick).
fn difference_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = (-c).mul_add(d, cd);
    a.mul_add(b, -cd) + err
}

/// Logarithmic negativity of a two-mode state across a one-mode-per-side
/// partition, using the generic symplectic eigen-backend.
pub fn log_negativity(cov: &CovarianceMatrix, partition: &Partition) -> Result<EntanglementReport> {
    if partition.left.len() != 1 || partition.right.len() != 1 {
        return Err(Error::InvalidPartition(format!(
            "{partition}: only one mode per side is supported"
        )));
    }
    if partition.modes() != cov.modes() {
        return Err(Error::InvalidPartition(format!(
            "{partition} does not cover the state's modes {:?}",
            cov.modes()
        )));
    }
    let pt = partial_transpose(cov, &partition.left)?;
    let nu = symplectic_eigenvalues(&pt)?;
    Ok(EntanglementReport::from_lambda(partition.clone(), nu[0]))
}

/// `1 / (2ⁿ √det V)`; equals 1 exactly for pure states.
pub fn purity(cov: &CovarianceMatrix) -> Result<f64> {
    let l = cholesky_dd(cov.entries())?;
    let scale = 2f64.powi(cov.n_modes() as i32);
    Ok(f64::from(TwoFloat::from(1.0) / (root_det_dd(&l) * scale)))
}

/// Lower Cholesky factor in double-double, stored row-major.
fn cholesky_dd(v: &DMatrix<f64>) -> Result<Vec<Vec<TwoFloat>>> {
    let dim = v.nrows();
    let zero = TwoFloat::from(0.0);
    let mut l = vec![vec![zero; dim]; dim];
    for j in 0..dim {
        let d = TwoFloat::from(v[(j, j)]) - dot_dd(&l[j][..j], &l[j][..j]);
        if d.hi().is_nan() || d.hi() <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let ljj = d.sqrt();
        l[j][j] = ljj;
        for i in (j + 1)..dim {
            let x = TwoFloat::from(0.5 * (v[(i, j)] + v[(j, i)])) - dot_dd(&l[i][..j], &l[j][..j]);
            l[i][j] = x / ljj;
        }
    }
    Ok(l)
}

fn dot_dd(a: &[TwoFloat], b: &[TwoFloat]) -> TwoFloat {
    a.iter()
        .zip(b)
        .fold(TwoFloat::from(0.0), |acc, (&x, &y)| acc + x * y)
}

/// `√det V = ∏ L_kk`.
fn root_det_dd(l: &[Vec<TwoFloat>]) -> TwoFloat {
    l.iter()
        .enumerate()
        .fold(TwoFloat::from(1.0), |acc, (k, row)| acc * row[k])
}
