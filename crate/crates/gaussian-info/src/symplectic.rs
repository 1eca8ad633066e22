//! Symplectic linear algebra over 2n-dimensional phase space.
//!
//! Mode ordering is `(Q_1, P_1, ..., Q_n, P_n)` and the symplectic form is
//! the block diagonal `J = diag([[0,1],[-1,0]], ...)`. Covariance matrices
//! follow the anticommutator convention in which the vacuum has covariance
//! `I`, so a real symmetric `M` describes a quantum state iff the Hermitian
//! matrix `M + iJ` is positive semidefinite; equivalently, iff every
//! symplectic eigenvalue (positive member of `spec(iJM)`) is at least 1.
//!
//! Numerical routes, chosen for stability and recorded here as the
//! implementation contract:
//!
//! * symplectic spectra come from the antisymmetric kernel
//!   `K = M^{1/2} J M^{1/2}` (whose eigenvalues are `±i λ_j`): the
//!   eigenvalues of the symmetric PSD matrix `K^T K` are the `λ_j^2`, each
//!   doubled;
//! * validity checks use the real embedding `[[M, -J], [J, M]]`, whose
//!   spectrum is that of `M + iJ` with every eigenvalue doubled — no complex
//!   arithmetic required;
//! * the Williamson symplectic `S` is assembled from paired eigenvectors of
//!   the antisymmetric `A = M^{-1/2} J M^{-1/2}` with a deterministic
//!   ordering (descending `λ`) and sign convention (each pair's generator
//!   has its first significant component positive), so downstream formulas
//!   that consume `S` entrywise are reproducible bit-for-bit.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default tolerance for covariance validity checks.
pub const VALIDITY_TOL: f64 = 1e-9;

/// Symplectic eigenvalues within this distance of 1 are clamped to exactly
/// 1, so floating error can neither manufacture sub-quantum spectra nor hide
/// pure modes from exact comparisons.
pub const PURITY_TOL: f64 = 1e-9;

/// Relative tolerance under which two spectrum values count as one
/// degenerate eigenvalue (gap computation, cluster detection).
pub const DEGENERACY_TOL: f64 = 1e-9;

/// The symplectic form `J_n`: block diagonal with `[[0,1],[-1,0]]` per mode.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

fn check_phase_space_dim(mat: &DMatrix<f64>) -> Result<usize> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::NonSquare {
            rows: mat.nrows(),
            cols: mat.ncols(),
        });
    }
    if mat.nrows() % 2 != 0 || mat.nrows() == 0 {
        return Err(Error::OddDimension { dim: mat.nrows() });
    }
    Ok(mat.nrows() / 2)
}

fn max_abs(mat: &DMatrix<f64>) -> f64 {
    mat.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Outcome of a covariance validity check.
#[derive(Clone, Debug)]
pub struct ValidityReport {
    /// True iff symmetric within tolerance and `M + iJ` is PSD within tolerance.
    pub ok: bool,
    /// Minimum eigenvalue of the Hermitian matrix `M + iJ`.
    pub min_eigenvalue: f64,
    /// `max |M - M^T|`.
    pub asymmetry: f64,
    /// Tolerance the check was run at.
    pub tol: f64,
}

/// Check whether `mat` is a valid quantum covariance matrix.
///
/// Reports the minimum eigenvalue of `M + iJ` (computed via the doubled real
/// embedding `[[M, -J], [J, M]]`) and the asymmetry norm. Structural
/// problems (non-square, odd dimension) are errors; physical invalidity is
/// reported through `ok = false`.
pub fn validate_covariance(mat: &DMatrix<f64>, tol: f64) -> Result<ValidityReport> {
    let n = check_phase_space_dim(mat)?;
    let asymmetry = max_abs(&(mat - mat.transpose()));
    let sym = (mat + mat.transpose()) * 0.5;
    let j = symplectic_form(n);
    let dim = 2 * n;
    let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
    embed.view_mut((0, 0), (dim, dim)).copy_from(&sym);
    embed.view_mut((dim, dim), (dim, dim)).copy_from(&sym);
    embed.view_mut((0, dim), (dim, dim)).copy_from(&(-&j));
    embed.view_mut((dim, 0), (dim, dim)).copy_from(&j);
    let eigs = embed.symmetric_eigen().eigenvalues;
    let min_eigenvalue = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ValidityReport {
        ok: asymmetry <= tol && min_eigenvalue >= -tol,
        min_eigenvalue,
        asymmetry,
        tol,
    })
}

/// A validated quantum covariance matrix (symmetric, `M + iJ` PSD).
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    mat: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validate `mat` at the default tolerance and wrap it.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(mat, VALIDITY_TOL)
    }

    /// Validate `mat` at a caller-supplied tolerance and wrap it.
    pub fn with_tolerance(mat: DMatrix<f64>, tol: f64) -> Result<Self> {
        let report = validate_covariance(&mat, tol)?;
        if report.asymmetry > tol {
            return Err(Error::NotSymmetric {
                asymmetry: report.asymmetry,
                tol,
            });
        }
        if report.min_eigenvalue < -tol {
            return Err(Error::UncertaintyViolation {
                min_eigenvalue: report.min_eigenvalue,
                tol,
            });
        }
        let n_modes = mat.nrows() / 2;
        Ok(Self { n_modes, mat })
    }

    /// Wrap a matrix known to be valid by construction (outputs of Gaussian
    /// maps applied to validated inputs). Skips the eigenvalue check.
    pub(crate) fn from_trusted(mat: DMatrix<f64>) -> Self {
        debug_assert!(mat.is_square() && mat.nrows() % 2 == 0);
        let n_modes = mat.nrows() / 2;
        Self { n_modes, mat }
    }

    /// Thermal covariance `nu * I` on `n_modes` modes (`nu = 2*Nbar + 1 >= 1`).
    pub fn thermal(n_modes: usize, nu: f64) -> Result<Self> {
        if nu < 1.0 {
            return Err(Error::SubQuantumEigenvalue { value: nu });
        }
        Ok(Self::from_trusted(
            DMatrix::identity(2 * n_modes, 2 * n_modes) * nu,
        ))
    }

    /// Vacuum covariance: the identity.
    pub fn vacuum(n_modes: usize) -> Self {
        Self::from_trusted(DMatrix::identity(2 * n_modes, 2 * n_modes))
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    /// Validity report for this matrix at tolerance `tol`.
    pub fn validate(&self, tol: f64) -> ValidityReport {
        validate_covariance(&self.mat, tol).expect("dimensions checked at construction")
    }

    /// Symplectic eigenvalues, sorted descending, one entry per mode.
    ///
    /// Values within [`PURITY_TOL`] of 1 are clamped to exactly 1 so pure
    /// modes are detected reliably despite floating error.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let mut spec = symplectic_spectrum_of(&self.mat)
            .expect("validated covariance matrices are PSD");
        for v in &mut spec {
            if (*v - 1.0).abs() <= PURITY_TOL {
                *v = 1.0;
            }
        }
        spec
    }
}

/// Symplectic eigenvalues of an arbitrary symmetric PSD matrix, sorted
/// descending. No quantum-validity clamping is applied, so the result may
/// legitimately contain values below 1 (perturbation expansions rely on
/// this).
pub fn symplectic_spectrum_of(mat: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = check_phase_space_dim(mat)?;
    let sym = (mat + mat.transpose()) * 0.5;
    let scale = max_abs(&sym).max(1.0);
    let eig = sym.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * scale {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    let sqrt_vals = DVector::from_iterator(
        2 * n,
        eig.eigenvalues.iter().map(|&w| w.max(0.0).sqrt()),
    );
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let k = &root * symplectic_form(n) * &root;
    // K is antisymmetric with eigenvalues ±i λ_j, so K^T K is symmetric PSD
    // with each λ_j² appearing twice.
    let mut sq: Vec<f64> = (k.transpose() * &k).symmetric_eigen().eigenvalues.iter().cloned().collect();
    sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok((0..n)
        .map(|j| ((sq[2 * j].max(0.0) + sq[2 * j + 1].max(0.0)) / 2.0).sqrt())
        .collect())
}

/// Minimum distance between distinct spectrum values; `+inf` when all values
/// coincide (within [`DEGENERACY_TOL`] relative tolerance).
pub fn symplectic_gap(spectrum: &[f64]) -> Result<f64> {
    let reps = distinct_values(spectrum)?;
    if reps.len() < 2 {
        return Ok(f64::INFINITY);
    }
    let mut gap = f64::INFINITY;
    for w in reps.windows(2) {
        gap = gap.min(w[0] - w[1]);
    }
    Ok(gap)
}

/// Distinct spectrum values (cluster representatives), sorted descending.
/// Values within `DEGENERACY_TOL * (1 + |λ|)` of each other merge into one
/// cluster represented by the cluster mean.
pub(crate) fn distinct_values(spectrum: &[f64]) -> Result<Vec<f64>> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut sorted = spectrum.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut reps = Vec::new();
    let mut cluster = vec![sorted[0]];
    for &v in &sorted[1..] {
        let head = *cluster.last().unwrap();
        if (head - v).abs() <= DEGENERACY_TOL * (1.0 + head.abs()) {
            cluster.push(v);
        } else {
            reps.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
            cluster = vec![v];
        }
    }
    reps.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    Ok(reps)
}

/// A real matrix satisfying `S J S^T = J` (within tolerance).
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix {
    n_modes: usize,
    mat: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Wrap `mat`, checking the symplectic condition within `1e-8`.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let n = check_phase_space_dim(&mat)?;
        let j = symplectic_form(n);
        let residual = max_abs(&(&mat * &j * mat.transpose() - &j));
        if residual > 1e-8 {
            return Err(Error::NotSymplectic {
                residual,
                tol: 1e-8,
            });
        }
        Ok(Self { n_modes: n, mat })
    }

    pub(crate) fn from_trusted(mat: DMatrix<f64>) -> Self {
        debug_assert!(mat.is_square() && mat.nrows() % 2 == 0);
        let n_modes = mat.nrows() / 2;
        Self { n_modes, mat }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// `max |S J S^T - J|`.
    pub fn form_residual(&self) -> f64 {
        let j = symplectic_form(self.n_modes);
        max_abs(&(&self.mat * &j * self.mat.transpose() - &j))
    }

    /// The exact symplectic inverse `S^{-1} = -J S^T J` (no linear solve).
    pub fn symplectic_inverse(&self) -> SymplecticMatrix {
        let j = symplectic_form(self.n_modes);
        SymplecticMatrix::from_trusted(-(&j * self.mat.transpose() * &j))
    }
}

/// Result of a Williamson decomposition `S M S^T = diag(λ_1, λ_1, ..., λ_n, λ_n)`.
#[derive(Clone, Debug)]
pub struct SymplecticDecomposition {
    pub s: SymplecticMatrix,
    /// Symplectic eigenvalues, descending, one per mode.
    pub spectrum: Vec<f64>,
    /// Minimum distance between distinct spectrum values (`+inf` if none).
    pub gap: f64,
    /// `max |S J S^T - J|`.
    pub residual_form: f64,
    /// `max |S M S^T - D|`.
    pub residual_diag: f64,
}

/// Williamson decomposition of a validated covariance matrix.
pub fn williamson(m: &CovarianceMatrix) -> Result<SymplecticDecomposition> {
    williamson_of(m.matrix())
}

/// Orthonormal basis (size `keep`) of the span of `cands` after projecting
/// out `against`, selected by largest-residual (rank-revealing) pivoting so
/// the one linearly dependent direction is shed no matter how its weight is
/// distributed across the candidates.
fn pivoted_complement(
    cands: Vec<DVector<f64>>,
    against: &[&DVector<f64>],
    keep: usize,
) -> Vec<DVector<f64>> {
    let mut residuals: Vec<DVector<f64>> = cands
        .into_iter()
        .map(|mut v| {
            for a in against {
                v -= *a * a.dot(&v);
            }
            v
        })
        .collect();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(keep);
    while out.len() < keep && !residuals.is_empty() {
        let idx = residuals
            .iter()
            .enumerate()
            .max_by(|l, r| l.1.norm().partial_cmp(&r.1.norm()).unwrap())
            .map(|(i, _)| i)
            .expect("nonempty residual set");
        let mut v = residuals.swap_remove(idx);
        // Second projection pass cleans up first-pass rounding.
        for a in against {
            v -= *a * a.dot(&v);
        }
        for o in &out {
            v -= o * o.dot(&v);
        }
        v /= v.norm();
        for r in &mut residuals {
            *r -= &v * v.dot(r);
        }
        out.push(v);
    }
    out
}

/// Williamson decomposition of an arbitrary symmetric positive definite
/// matrix (spectrum values below 1 allowed).
pub fn williamson_of(mat: &DMatrix<f64>) -> Result<SymplecticDecomposition> {
    let n = check_phase_space_dim(mat)?;
    let dim = 2 * n;
    let sym = (mat + mat.transpose()) * 0.5;
    let scale = max_abs(&sym).max(1.0);
    let eig = sym.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 1e-12 * scale {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let inv_root_vals = DVector::from_iterator(
        dim,
        eig.eigenvalues.iter().map(|&w| 1.0 / w.sqrt()),
    );
    let inv_root =
        &eig.eigenvectors * DMatrix::from_diagonal(&inv_root_vals) * eig.eigenvectors.transpose();

    // A = M^{-1/2} J M^{-1/2} is antisymmetric with eigenvalues ±i/λ_j; the
    // symmetric PSD matrix A^T A has eigenvalue 1/λ_j² with multiplicity 2
    // per mode. Pair up each (necessarily even-dimensional) eigenspace into
    // generators (x, y = A x / μ).
    let a = &inv_root * symplectic_form(n) * &inv_root;
    let gram = a.transpose() * &a;
    let geig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    // μ² ascending <=> λ descending, the emission order.
    order.sort_by(|&i, &j| {
        geig.eigenvalues[i]
            .partial_cmp(&geig.eigenvalues[j])
            .unwrap()
    });

    // Group into degeneracy clusters on μ² (relative tolerance generous
    // against eigensolver noise, far below any physical spectral spacing).
    let mut clusters: Vec<(f64, Vec<DVector<f64>>)> = Vec::new();
    for &i in &order {
        let musq = geig.eigenvalues[i];
        let vec = geig.eigenvectors.column(i).into_owned();
        match clusters.last_mut() {
            Some((head, members)) if (musq - *head).abs() <= 1e-10 * (1.0 + head.abs()) => {
                members.push(vec);
            }
            _ => clusters.push((musq, vec![vec])),
        }
    }

    let mut pairs: Vec<(DVector<f64>, DVector<f64>, f64)> = Vec::with_capacity(n);
    for (head, members) in &clusters {
        if members.len() % 2 != 0 {
            // Cannot happen for a genuine antisymmetric kernel; guards
            // against clustering tolerance splitting an eigenspace.
            return Err(Error::ClusterMismatch {
                lambda: if *head > 0.0 { 1.0 / head.sqrt() } else { 0.0 },
                expected: members.len() + 1,
                found: members.len(),
            });
        }
        let mut basis = members.clone();
        while !basis.is_empty() {
            let mut x = basis.remove(0);
            // Deterministic sign: first significant component positive.
            if let Some(lead) = x.iter().find(|v| v.abs() > 1e-8) {
                if *lead < 0.0 {
                    x = -x;
                }
            }
            let xn = x.norm();
            x /= xn;
            let mu = ((&a * &x).norm()).max(f64::MIN_POSITIVE);
            let mut y = (&a * &x) / mu;
            y -= &x * x.dot(&y);
            for (px, py, _) in &pairs {
                y -= px * px.dot(&y);
                y -= py * py.dot(&y);
            }
            let yn = y.norm();
            y /= yn;
            if basis.len() >= 2 {
                // After extracting span(x, y) one direction of the remaining
                // basis is consumed by y; rebuild an orthonormal basis of the
                // complement by rank-revealing (pivoted) Gram–Schmidt.
                let keep = basis.len() - 1;
                basis = pivoted_complement(basis, &[&x, &y], keep);
            } else {
                basis.clear();
            }
            pairs.push((x, y, mu));
        }
    }

    let mut o = DMatrix::zeros(dim, dim);
    let mut spectrum = Vec::with_capacity(n);
    let mut root_d = DVector::zeros(dim);
    for (jm, (x, y, mu)) in pairs.iter().enumerate() {
        let lambda = 1.0 / mu;
        spectrum.push(lambda);
        o.column_mut(2 * jm).copy_from(y);
        o.column_mut(2 * jm + 1).copy_from(x);
        root_d[2 * jm] = lambda.sqrt();
        root_d[2 * jm + 1] = lambda.sqrt();
    }
    let s_mat = DMatrix::from_diagonal(&root_d) * o.transpose() * &inv_root;

    let j = symplectic_form(n);
    let residual_form = max_abs(&(&s_mat * &j * s_mat.transpose() - &j));
    let mut d = DMatrix::zeros(dim, dim);
    for (jm, &lambda) in spectrum.iter().enumerate() {
        d[(2 * jm, 2 * jm)] = lambda;
        d[(2 * jm + 1, 2 * jm + 1)] = lambda;
    }
    let residual_diag = max_abs(&(&s_mat * &sym * s_mat.transpose() - d));
    let gap = symplectic_gap(&spectrum)?;
    Ok(SymplecticDecomposition {
        s: SymplecticMatrix::from_trusted(s_mat),
        spectrum,
        gap,
        residual_form,
        residual_diag,
    })
}

/// Haar-ish random orthosymplectic rotation: the real representation of an
/// n×n unitary drawn by QR of a complex Ginibre matrix (with the standard
/// phase fix), mapped per 2×2 mode block as `[[Re U, -Im U], [Im U, Re U]]`.
fn random_orthosymplectic(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    use nalgebra::Complex;
    let z = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(re / f64::sqrt(2.0), im / f64::sqrt(2.0))
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for rr in 0..n {
            q[(rr, c)] *= phase;
        }
    }
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for jm in 0..n {
        for km in 0..n {
            let u = q[(jm, km)];
            o[(2 * jm, 2 * km)] = u.re;
            o[(2 * jm, 2 * km + 1)] = -u.im;
            o[(2 * jm + 1, 2 * km)] = u.im;
            o[(2 * jm + 1, 2 * km + 1)] = u.re;
        }
    }
    o
}

/// Deterministic random symplectic matrix, built as
/// rotation × squeeze × rotation.
///
/// The draw order is fixed (first rotation's Ginibre matrix row-major, then
/// `n` squeeze exponents uniform in `[-intensity, intensity]`, then the
/// second rotation), so a seed pins the matrix bit-for-bit. `intensity = 0`
/// yields an orthogonal symplectic.
pub fn random_symplectic(seed: u64, n_modes: usize, intensity: f64) -> SymplecticMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symplectic_with(&mut rng, n_modes, intensity)
}

pub(crate) fn random_symplectic_with(
    rng: &mut ChaCha8Rng,
    n_modes: usize,
    intensity: f64,
) -> SymplecticMatrix {
    assert!(intensity >= 0.0, "squeezing intensity must be nonnegative");
    let o1 = random_orthosymplectic(rng, n_modes);
    let mut squeeze = DVector::zeros(2 * n_modes);
    for jm in 0..n_modes {
        let r: f64 = if intensity > 0.0 {
            rng.random_range(-intensity..intensity)
        } else {
            0.0
        };
        squeeze[2 * jm] = r.exp();
        squeeze[2 * jm + 1] = (-r).exp();
    }
    let o2 = random_orthosymplectic(rng, n_modes);
    SymplecticMatrix::from_trusted(o1 * DMatrix::from_diagonal(&squeeze) * o2)
}

/// Deterministic random covariance matrix `M = S^{-1} D(λ) S^{-T}` with the
/// symplectic spectrum drawn uniformly from `spectrum_range` and `S` from
/// [`random_symplectic`]. Symplectic eigenvalues are drawn first, then `S`
/// (same stream).
pub fn random_gaussian_covariance(
    seed: u64,
    n_modes: usize,
    spectrum_range: (f64, f64),
    intensity: f64,
) -> Result<CovarianceMatrix> {
    let (lo, hi) = spectrum_range;
    if !(1.0 <= lo && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "spectrum range must satisfy 1 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = DVector::zeros(2 * n_modes);
    for jm in 0..n_modes {
        let lambda = if hi > lo { rng.random_range(lo..hi) } else { lo };
        d[2 * jm] = lambda;
        d[2 * jm + 1] = lambda;
    }
    let s = random_symplectic_with(&mut rng, n_modes, intensity);
    let s_inv = s.symplectic_inverse();
    let m = s_inv.matrix() * DMatrix::from_diagonal(&d) * s_inv.matrix().transpose();
    let m = (&m + m.transpose()) * 0.5;
    CovarianceMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dm(rows: usize, data: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, rows, data)
    }

    #[test]
    fn form_single_mode() {
        assert_eq!(symplectic_form(1), dm(2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn form_is_direct_sum_and_squares_to_minus_identity() {
        let j2 = symplectic_form(2);
        assert_eq!(j2.view((0, 0), (2, 2)), symplectic_form(1).view((0, 0), (2, 2)));
        assert_eq!(j2.view((2, 2), (2, 2)), symplectic_form(1).view((0, 0), (2, 2)));
        for n in 1..=4 {
            let j = symplectic_form(n);
            let expect = -DMatrix::<f64>::identity(2 * n, 2 * n);
            assert_abs_diff_eq!(&j * &j, expect, epsilon = 0.0);
        }
    }

    #[test]
    fn vacuum_is_valid() {
        let report = validate_covariance(&DMatrix::identity(2, 2), VALIDITY_TOL).unwrap();
        assert!(report.ok);
        assert_abs_diff_eq!(report.min_eigenvalue, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sub_vacuum_variance_rejected() {
        let report = validate_covariance(&dm(2, &[0.5, 0.0, 0.0, 0.5]), VALIDITY_TOL).unwrap();
        assert!(!report.ok);
        assert!(CovarianceMatrix::new(dm(2, &[0.5, 0.0, 0.0, 0.5])).is_err());
    }

    #[test]
    fn slightly_squeezed_thermal_rejected_with_known_eigenvalue() {
        // min eig of [[1, i], [-i, 0.9]] is 0.95 - sqrt(1.0025)
        let report = validate_covariance(&dm(2, &[1.0, 0.0, 0.0, 0.9]), VALIDITY_TOL).unwrap();
        assert!(!report.ok);
        assert_abs_diff_eq!(report.min_eigenvalue, -0.051_249_219_725_039_29, epsilon = 1e-12);
    }

    #[test]
    fn odd_dimension_is_an_error() {
        assert!(validate_covariance(&DMatrix::identity(3, 3), 1e-9).is_err());
    }

    #[test]
    fn asymmetric_matrix_reported() {
        let mut m = DMatrix::identity(2, 2) * 2.0;
        m[(0, 1)] = 0.3;
        let report = validate_covariance(&m, VALIDITY_TOL).unwrap();
        assert!(!report.ok);
        assert_abs_diff_eq!(report.asymmetry, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn vacuum_spectrum_is_all_ones() {
        for n in 1..=3 {
            let spec = CovarianceMatrix::vacuum(n).symplectic_eigenvalues();
            assert_eq!(spec, vec![1.0; n]);
        }
    }

    #[test]
    fn squeezed_pure_mode_spectrum_is_one() {
        let a = 2.7;
        let m = CovarianceMatrix::new(dm(2, &[a, 0.0, 0.0, 1.0 / a])).unwrap();
        assert_eq!(m.symplectic_eigenvalues(), vec![1.0]);
    }

    #[test]
    fn correlated_two_mode_spectrum_matches_independent_eigensolver() {
        // [[2I, Z], [Z, 2I]] has symplectic spectrum (sqrt 3, sqrt 3).
        let m = dm(
            4,
            &[
                2.0, 0.0, 1.0, 0.0, //
                0.0, 2.0, 0.0, -1.0, //
                1.0, 0.0, 2.0, 0.0, //
                0.0, -1.0, 0.0, 2.0,
            ],
        );
        let spec = symplectic_spectrum_of(&m).unwrap();
        let s3 = 3.0_f64.sqrt();
        assert_abs_diff_eq!(spec[0], s3, epsilon = 1e-12);
        assert_abs_diff_eq!(spec[1], s3, epsilon = 1e-12);
    }

    #[test]
    fn spectrum_of_direct_sum_is_multiset_union() {
        for seed in 0..20u64 {
            let m1 = random_gaussian_covariance(seed, 2, (1.1, 4.0), 0.8).unwrap();
            let m2 = random_gaussian_covariance(seed + 1000, 1, (1.1, 4.0), 0.8).unwrap();
            let mut direct = DMatrix::zeros(6, 6);
            direct.view_mut((0, 0), (4, 4)).copy_from(m1.matrix());
            direct.view_mut((4, 4), (2, 2)).copy_from(m2.matrix());
            let mut sum_spec = symplectic_spectrum_of(&direct).unwrap();
            let mut union: Vec<f64> = m1
                .symplectic_eigenvalues()
                .into_iter()
                .chain(m2.symplectic_eigenvalues())
                .collect();
            union.sort_by(|a, b| b.partial_cmp(a).unwrap());
            sum_spec.sort_by(|a, b| b.partial_cmp(a).unwrap());
            for (a, b) in sum_spec.iter().zip(&union) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn spectrum_is_symplectic_invariant() {
        for seed in 0..20u64 {
            let m = random_gaussian_covariance(seed, 3, (1.05, 6.0), 1.0).unwrap();
            let s = random_symplectic(seed + 77, 3, 0.9);
            let conj = s.matrix() * m.matrix() * s.matrix().transpose();
            let spec_m = m.symplectic_eigenvalues();
            let spec_c = symplectic_spectrum_of(&conj).unwrap();
            for (a, b) in spec_m.iter().zip(&spec_c) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn gap_examples() {
        assert_abs_diff_eq!(symplectic_gap(&[2.0, 5.0]).unwrap(), 3.0);
        assert!(symplectic_gap(&[3.0, 3.0]).unwrap().is_infinite());
        assert_abs_diff_eq!(symplectic_gap(&[1.0, 1.5, 1.5, 4.0]).unwrap(), 0.5);
        assert!(symplectic_gap(&[]).is_err());
    }

    #[test]
    fn williamson_thermal_is_trivial() {
        let m = CovarianceMatrix::thermal(1, 3.0).unwrap();
        let dec = williamson(&m).unwrap();
        assert_abs_diff_eq!(dec.spectrum[0], 3.0, epsilon = 1e-12);
        // S is an orthosymplectic phase rotation; conjugation must fix 3I.
        let conj = dec.s.matrix() * m.matrix() * dec.s.matrix().transpose();
        assert_abs_diff_eq!(conj, m.matrix().clone(), epsilon = 1e-10);
    }

    #[test]
    fn williamson_squeezed_pure_state() {
        let m = CovarianceMatrix::new(dm(2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        let dec = williamson(&m).unwrap();
        assert_abs_diff_eq!(dec.spectrum[0], 1.0, epsilon = 1e-12);
        let conj = dec.s.matrix() * m.matrix() * dec.s.matrix().transpose();
        assert_abs_diff_eq!(conj, DMatrix::identity(2, 2), epsilon = 1e-10);
    }

    #[test]
    fn williamson_residuals_on_random_instances() {
        for seed in 0..100u64 {
            let n = 1 + (seed as usize % 4);
            let m = random_gaussian_covariance(seed, n, (1.05, 6.0), 1.0).unwrap();
            let dec = williamson(&m).unwrap();
            assert!(dec.residual_form < 1e-10, "form residual {}", dec.residual_form);
            assert!(dec.residual_diag < 1e-9, "diag residual {}", dec.residual_diag);
            // spectrum agrees with the independent K^T K route
            let spec = m.symplectic_eigenvalues();
            for (a, b) in dec.spectrum.iter().zip(&spec) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn williamson_handles_degenerate_spectra() {
        let m = dm(
            4,
            &[
                2.0, 0.0, 1.0, 0.0, //
                0.0, 2.0, 0.0, -1.0, //
                1.0, 0.0, 2.0, 0.0, //
                0.0, -1.0, 0.0, 2.0,
            ],
        );
        let dec = williamson_of(&m).unwrap();
        assert!(dec.residual_form < 1e-10);
        assert!(dec.residual_diag < 1e-9);
        assert!(dec.gap.is_infinite());
    }

    #[test]
    fn williamson_is_deterministic() {
        let m = random_gaussian_covariance(42, 3, (1.2, 5.0), 0.9).unwrap();
        let d1 = williamson(&m).unwrap();
        let d2 = williamson(&m).unwrap();
        assert_eq!(d1.s.matrix(), d2.s.matrix());
    }

    #[test]
    fn williamson_rejects_singular_input() {
        let mut m = DMatrix::identity(4, 4);
        m[(2, 2)] = 0.0;
        m[(3, 3)] = 0.0;
        assert!(matches!(
            williamson_of(&m),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn random_symplectic_is_symplectic_and_deterministic() {
        let s1 = random_symplectic(1, 2, 1.0);
        let s2 = random_symplectic(1, 2, 1.0);
        assert_eq!(s1.matrix(), s2.matrix());
        assert!(s1.form_residual() < 1e-10, "residual {}", s1.form_residual());
        let s3 = random_symplectic(2, 2, 1.0);
        assert_ne!(s1.matrix(), s3.matrix());
    }

    #[test]
    fn zero_intensity_gives_rotation() {
        let s = random_symplectic(9, 3, 0.0);
        let gram = s.matrix().transpose() * s.matrix();
        assert_abs_diff_eq!(gram, DMatrix::identity(6, 6), epsilon = 1e-12);
        assert!(s.form_residual() < 1e-10);
    }

    #[test]
    fn symplectic_inverse_is_exact_inverse() {
        let s = random_symplectic(5, 2, 1.1);
        let prod = s.matrix() * s.symplectic_inverse().matrix();
        assert_abs_diff_eq!(prod, DMatrix::identity(4, 4), epsilon = 1e-10);
    }

    #[test]
    fn random_covariance_has_requested_spectrum() {
        // replay the documented draw order to recover the drawn eigenvalues
        let (lo, hi) = (1.3, 4.2);
        let m = random_gaussian_covariance(31, 3, (lo, hi), 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut drawn: Vec<f64> = (0..3).map(|_| rng.random_range(lo..hi)).collect();
        drawn.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let spec = m.symplectic_eigenvalues();
        for (a, b) in spec.iter().zip(&drawn) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn random_covariance_pure_range_and_validity() {
        let m = random_gaussian_covariance(3, 2, (1.0, 1.0), 0.7).unwrap();
        assert_eq!(m.symplectic_eigenvalues(), vec![1.0, 1.0]);
        for seed in 0..30u64 {
            let m = random_gaussian_covariance(seed, 2, (1.0, 5.0), 1.2).unwrap();
            assert!(m.validate(VALIDITY_TOL).ok);
        }
    }

    #[test]
    fn trusted_spectrum_clamps_near_pure_values() {
        let eps = 5e-10; // inside the clamp window
        let m = CovarianceMatrix::from_trusted(DMatrix::identity(2, 2) * (1.0 - eps));
        assert_eq!(m.symplectic_eigenvalues(), vec![1.0]);
    }
}
