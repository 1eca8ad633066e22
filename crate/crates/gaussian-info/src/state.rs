//! Gaussian states with named mode partitions, and their entropies.
//!
//! A state is `(M, d, partition)`: a validated covariance matrix, a first
//! moment vector, and an ordered list of named contiguous mode blocks that
//! tile the modes exactly once. Entropies are reported in nats and depend
//! only on the symplectic spectrum, so partial traces (principal submatrix
//! selection on mode boundaries) and displacements never need matrix
//! functions beyond the spectrum routines in [`crate::symplectic`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::symplectic::{
    williamson, CovarianceMatrix, SymplecticMatrix, PURITY_TOL,
};

/// Symplectic eigenvalues below `1 - SUBQUANTUM_TOL` make entropy
/// evaluation fail; values in `[1 - SUBQUANTUM_TOL, 1]` clamp to 1. Wider
/// than the validity tolerance so marginally valid matrices stay usable.
pub const SUBQUANTUM_TOL: f64 = 1e-8;

/// Entropy of a thermal mode with mean photon number `n`:
/// `(n+1) ln(n+1) - n ln n`, with the `n = 0` limit 0.
///
/// Arguments in `[-1e-12, 0)` are treated as 0 (rounding guard); anything
/// more negative is an error.
pub fn g_function(n: f64) -> Result<f64> {
    if n < -1e-12 {
        return Err(Error::NegativeGArgument(n));
    }
    if n <= 0.0 {
        return Ok(0.0);
    }
    Ok((n + 1.0) * (n + 1.0).ln() - n * n.ln())
}

/// Inverse temperature of the eigenmode with symplectic eigenvalue `lambda`:
/// `ln((lambda+1)/(lambda-1))`. Pure modes (`lambda = 1` within
/// [`PURITY_TOL`]) return `+inf`; `lambda < 1` is an error.
pub fn inverse_temperature(lambda: f64) -> Result<f64> {
    if lambda < 1.0 - PURITY_TOL {
        return Err(Error::SubQuantumEigenvalue { value: lambda });
    }
    if lambda <= 1.0 + PURITY_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(((lambda + 1.0) / (lambda - 1.0)).ln())
}

/// Mean photon number of the eigenmode with symplectic eigenvalue `lambda`:
/// `(lambda - 1) / 2`.
pub fn mean_photon_eigenmode(lambda: f64) -> Result<f64> {
    if lambda < 1.0 - PURITY_TOL {
        return Err(Error::SubQuantumEigenvalue { value: lambda });
    }
    Ok(((lambda - 1.0) / 2.0).max(0.0))
}

/// Von Neumann entropy (nats) of a state with the given symplectic
/// spectrum: the sum of `g((lambda_j - 1)/2)`.
pub fn entropy_of_spectrum(spectrum: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &lambda in spectrum {
        if lambda < 1.0 - SUBQUANTUM_TOL {
            return Err(Error::SubQuantumEigenvalue { value: lambda });
        }
        total += g_function(((lambda - 1.0) / 2.0).max(0.0))?;
    }
    Ok(total)
}

/// Entropy difference bound between two states from their symplectic
/// spectra alone: with `delta = max_j |nu_j - lambda_j|` and
/// `lambda_* = min_j lambda_j`,
/// `(N/2) * (delta * beta(lambda_*) + delta^2 / (lambda_*^2 - 1))`.
///
/// All `lambda_j` must exceed 1 (the bound diverges at purity). The
/// inequality `|S(nu) - S(lambda)| <= bound` is guaranteed when every
/// `nu_j >= lambda_*` (in particular for upward perturbations, the heat-flow
/// direction): the quadratic remainder is evaluated at `lambda_*`, so
/// spectra dipping below the reference minimum can escape it.
pub fn entropy_continuity_bound(nu: &[f64], lambda: &[f64]) -> Result<f64> {
    if nu.len() != lambda.len() {
        return Err(Error::SpectrumLengthMismatch {
            left: nu.len(),
            right: lambda.len(),
        });
    }
    if lambda.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let lambda_star = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    if lambda_star <= 1.0 + PURITY_TOL {
        return Err(Error::PureMode {
            lambda: lambda_star,
            tol: PURITY_TOL,
        });
    }
    let delta = nu
        .iter()
        .zip(lambda)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let beta_star = inverse_temperature(lambda_star)?;
    let n = lambda.len() as f64;
    Ok(n / 2.0 * (delta * beta_star + delta * delta / (lambda_star * lambda_star - 1.0)))
}

/// One named contiguous block of modes within a state's partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: String,
    pub n_modes: usize,
}

impl Block {
    pub fn new(name: impl Into<String>, n_modes: usize) -> Self {
        Self {
            name: name.into(),
            n_modes,
        }
    }
}

/// An immutable Gaussian state: covariance, displacement, named partition.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    cov: CovarianceMatrix,
    displacement: DVector<f64>,
    partition: Vec<Block>,
}

impl GaussianState {
    /// Build a state, checking displacement length and that the partition
    /// tiles the modes with unique nonempty blocks.
    pub fn new(
        cov: CovarianceMatrix,
        displacement: DVector<f64>,
        partition: Vec<Block>,
    ) -> Result<Self> {
        let n = cov.n_modes();
        if displacement.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                context: "displacement".into(),
                expected: 2 * n,
                found: displacement.len(),
            });
        }
        let mut covered = 0;
        for (i, b) in partition.iter().enumerate() {
            if b.n_modes == 0 {
                return Err(Error::InvalidParameter(format!(
                    "partition block '{}' has zero modes",
                    b.name
                )));
            }
            if partition[..i].iter().any(|p| p.name == b.name) {
                return Err(Error::DuplicateSubsystem(b.name.clone()));
            }
            covered += b.n_modes;
        }
        if covered != n {
            return Err(Error::PartitionMismatch { covered, total: n });
        }
        Ok(Self {
            cov,
            displacement,
            partition,
        })
    }

    /// Zero-displacement state with a single named block.
    pub fn from_covariance(cov: CovarianceMatrix, name: impl Into<String>) -> Self {
        let n = cov.n_modes();
        Self {
            displacement: DVector::zeros(2 * n),
            partition: vec![Block::new(name, n)],
            cov,
        }
    }

    /// Thermal state `lambda * I` on one named block (`lambda >= 1`).
    pub fn thermal(name: impl Into<String>, n_modes: usize, lambda: f64) -> Result<Self> {
        Ok(Self::from_covariance(
            CovarianceMatrix::thermal(n_modes, lambda)?,
            name,
        ))
    }

    /// Vacuum on one named block.
    pub fn vacuum(name: impl Into<String>, n_modes: usize) -> Self {
        Self::from_covariance(CovarianceMatrix::vacuum(n_modes), name)
    }

    pub(crate) fn from_trusted_parts(
        cov: DMatrix<f64>,
        displacement: DVector<f64>,
        partition: Vec<Block>,
    ) -> Self {
        Self {
            cov: CovarianceMatrix::from_trusted(cov),
            displacement,
            partition,
        }
    }

    pub fn cov(&self) -> &CovarianceMatrix {
        &self.cov
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        self.cov.matrix()
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn partition(&self) -> &[Block] {
        &self.partition
    }

    pub fn n_modes(&self) -> usize {
        self.cov.n_modes()
    }

    fn block_position(&self, name: &str) -> Result<usize> {
        self.partition
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| Error::UnknownSubsystem(name.to_owned()))
    }

    /// Half-open mode index range `[start, end)` of the named block.
    pub fn mode_range(&self, name: &str) -> Result<std::ops::Range<usize>> {
        let pos = self.block_position(name)?;
        let start: usize = self.partition[..pos].iter().map(|b| b.n_modes).sum();
        Ok(start..start + self.partition[pos].n_modes)
    }

    /// Phase-space coordinate indices of the named blocks, in list order.
    pub(crate) fn coordinate_indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut idx = Vec::new();
        for name in names {
            let modes = self.mode_range(name)?;
            for k in modes {
                idx.push(2 * k);
                idx.push(2 * k + 1);
            }
        }
        Ok(idx)
    }

    /// Symplectic eigenvalues of the full covariance, descending.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        self.cov.symplectic_eigenvalues()
    }

    /// Von Neumann entropy in nats (displacement-independent).
    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(&self.symplectic_eigenvalues())
            .expect("validated covariance has spectrum >= 1 - tol")
    }

    /// Partial trace onto the named blocks, relabeled in the requested
    /// order. Requesting all blocks in a new order permutes the state.
    pub fn reduce(&self, names: &[&str]) -> Result<GaussianState> {
        if names.is_empty() {
            return Err(Error::InvalidParameter(
                "cannot reduce onto an empty selection".into(),
            ));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::OverlappingSelection((*n).to_owned()));
            }
        }
        let idx = self.coordinate_indices(names)?;
        let dim = idx.len();
        let mut cov = DMatrix::zeros(dim, dim);
        let mut disp = DVector::zeros(dim);
        for (r, &ir) in idx.iter().enumerate() {
            disp[r] = self.displacement[ir];
            for (c, &ic) in idx.iter().enumerate() {
                cov[(r, c)] = self.cov.matrix()[(ir, ic)];
            }
        }
        let partition = names
            .iter()
            .map(|name| {
                let pos = self.block_position(name).expect("checked above");
                self.partition[pos].clone()
            })
            .collect();
        // A principal submatrix on mode boundaries is the covariance of the
        // reduced state of a valid state, hence valid.
        Ok(GaussianState::from_trusted_parts(cov, disp, partition))
    }

    /// `S(target | condition) = S(target, condition) - S(condition)`;
    /// an empty condition gives the plain entropy of the target.
    pub fn conditional_entropy(&self, target: &[&str], condition: &[&str]) -> Result<f64> {
        for t in target {
            if condition.contains(t) {
                return Err(Error::OverlappingSelection((*t).to_owned()));
            }
        }
        let joint: Vec<&str> = target.iter().chain(condition).cloned().collect();
        let s_joint = self.reduce(&joint)?.entropy();
        if condition.is_empty() {
            return Ok(s_joint);
        }
        let s_cond = self.reduce(condition)?.entropy();
        Ok(s_joint - s_cond)
    }

    /// Mean photon number of one named block:
    /// per mode, `(M_qq + M_pp)/4 + (d_q^2 + d_p^2)/2 - 1/2`.
    pub fn mean_photon_number(&self, name: &str) -> Result<f64> {
        let modes = self.mode_range(name)?;
        let m = self.cov.matrix();
        let d = &self.displacement;
        Ok(modes
            .map(|k| {
                let (q, p) = (2 * k, 2 * k + 1);
                (m[(q, q)] + m[(p, p)]) / 4.0 + (d[q] * d[q] + d[p] * d[p]) / 2.0 - 0.5
            })
            .sum())
    }

    /// Tensor product: block-direct-sum covariance, concatenated
    /// displacement and partition. Block names must not clash.
    pub fn tensor(&self, other: &GaussianState) -> Result<GaussianState> {
        for b in &other.partition {
            if self.partition.iter().any(|p| p.name == b.name) {
                return Err(Error::DuplicateSubsystem(b.name.clone()));
            }
        }
        let (da, db) = (2 * self.n_modes(), 2 * other.n_modes());
        let mut cov = DMatrix::zeros(da + db, da + db);
        cov.view_mut((0, 0), (da, da)).copy_from(self.cov.matrix());
        cov.view_mut((da, da), (db, db))
            .copy_from(other.cov.matrix());
        let mut disp = DVector::zeros(da + db);
        disp.rows_mut(0, da).copy_from(&self.displacement);
        disp.rows_mut(da, db).copy_from(&other.displacement);
        let partition = self
            .partition
            .iter()
            .chain(&other.partition)
            .cloned()
            .collect();
        Ok(GaussianState::from_trusted_parts(cov, disp, partition))
    }

    /// Standard Gaussian purification on `2n` modes.
    ///
    /// With `S M S^T = D` from the Williamson decomposition, the output
    /// covariance is `[[M, C], [C^T, D]]` with `C = S^{-1} sqrt(D^2 - I) Z`,
    /// `Z = diag(1, -1, 1, -1, ...)`: a thermal purification conjugated back
    /// by `S^{-1}` on the first factor. The reference block is named `ref`
    /// (uniquified on clash), carries zero displacement, and the reduction
    /// to the original blocks returns the input state.
    pub fn purify(&self) -> Result<GaussianState> {
        let n = self.n_modes();
        let dec = williamson(&self.cov)?;
        let s_inv = dec.s.symplectic_inverse();
        let dim = 2 * n;
        let mut root = DVector::zeros(dim);
        let mut d = DMatrix::zeros(dim, dim);
        for (j, &lambda) in dec.spectrum.iter().enumerate() {
            let c = (lambda * lambda - 1.0).max(0.0).sqrt();
            // fold Z = diag(1,-1) into the root factor
            root[2 * j] = c;
            root[2 * j + 1] = -c;
            d[(2 * j, 2 * j)] = lambda;
            d[(2 * j + 1, 2 * j + 1)] = lambda;
        }
        let c = s_inv.matrix() * DMatrix::from_diagonal(&root);
        let mut cov = DMatrix::zeros(2 * dim, 2 * dim);
        cov.view_mut((0, 0), (dim, dim)).copy_from(self.cov.matrix());
        cov.view_mut((0, dim), (dim, dim)).copy_from(&c);
        cov.view_mut((dim, 0), (dim, dim)).copy_from(&c.transpose());
        cov.view_mut((dim, dim), (dim, dim)).copy_from(&d);
        let mut disp = DVector::zeros(2 * dim);
        disp.rows_mut(0, dim).copy_from(&self.displacement);

        let mut ref_name = "ref".to_owned();
        let mut k = 0;
        while self.partition.iter().any(|b| b.name == ref_name) {
            k += 1;
            ref_name = format!("ref{k}");
        }
        let mut partition = self.partition.clone();
        partition.push(Block::new(ref_name, n));
        Ok(GaussianState::from_trusted_parts(cov, disp, partition))
    }
}

/// `apply_symplectic` lives in the channels module; re-exported trait-style
/// helpers are unnecessary — states are plain values.
impl GaussianState {
    /// Replace covariance and displacement with `(S M S^T, S d)` without
    /// re-validating (symplectic conjugation preserves validity).
    pub(crate) fn conjugated(&self, s: &SymplecticMatrix) -> Result<GaussianState> {
        if s.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                context: "symplectic conjugation".into(),
                expected: 2 * self.n_modes(),
                found: 2 * s.n_modes(),
            });
        }
        let m = s.matrix() * self.cov.matrix() * s.matrix().transpose();
        let m = (&m + m.transpose()) * 0.5;
        Ok(GaussianState::from_trusted_parts(
            m,
            s.matrix() * &self.displacement,
            self.partition.clone(),
        ))
    }

    /// Verify this state is pure: all symplectic eigenvalues within `tol`
    /// of 1.
    pub fn is_pure(&self, tol: f64) -> bool {
        self.symplectic_eigenvalues()
            .iter()
            .all(|&l| (l - 1.0).abs() <= tol)
    }

}
