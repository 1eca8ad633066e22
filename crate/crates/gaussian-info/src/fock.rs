//! Brute-force oracle in a truncated number basis, independent of the
//! covariance-matrix machinery: thermal states, displacements, beam
//! splitters, entropies, and relative entropies for one and two modes.
//!
//! Agreement between this module and the Gaussian closed forms is what
//! certifies the latter; nothing here reuses symplectic code paths.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Geometric-tail threshold of the cutoff rule: the truncated thermal weight
/// `(N̄/(N̄+1))^{cutoff+1}` must fall below this.
pub const FOCK_TAIL_THRESHOLD: f64 = 1e-12;

/// Absolute Hermiticity tolerance for density-matrix entries.
const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues above this count toward entropies; more-negative values than
/// `-EIGENVALUE_TOL` fail the positivity check.
const EIGENVALUE_TOL: f64 = 1e-12;
const ENTROPY_SUPPORT_TOL: f64 = 1e-15;

/// A density matrix on one or two modes truncated at `cutoff` photons per
/// mode, with the truncated-away probability tracked in `deficit`.
#[derive(Clone, Debug)]
pub struct FockDensityMatrix {
    cutoff: usize,
    n_modes: usize,
    entries: DMatrix<Complex64>,
    deficit: f64,
}

impl FockDensityMatrix {
    /// Wrap explicit entries. The dimension must be `cutoff+1` (one mode) or
    /// `(cutoff+1)²` (two modes); entries must be Hermitian and have trace
    /// within `[1 − deficit, 1]` up to numerical slack. Positivity is checked
    /// where eigenvalues are computed (entropies), not here.
    pub fn new(entries: DMatrix<Complex64>, cutoff: usize, deficit: f64) -> Result<Self> {
        let one_mode = cutoff + 1;
        let n_modes = if entries.nrows() == one_mode {
            1
        } else if entries.nrows() == one_mode * one_mode {
            2
        } else {
            return Err(Error::DimensionMismatch {
                context: "Fock entries for the given cutoff".into(),
                expected: one_mode,
                found: entries.nrows(),
            });
        };
        if entries.nrows() != entries.ncols() {
            return Err(Error::NonSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        let asymmetry = (&entries - entries.adjoint())
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.norm()));
        if asymmetry > HERMITICITY_TOL {
            return Err(Error::NotSymmetric {
                asymmetry,
                tol: HERMITICITY_TOL,
            });
        }
        if !(0.0..=1.0).contains(&deficit) {
            return Err(Error::InvalidParameter(format!(
                "trace deficit must lie in [0, 1], got {deficit}"
            )));
        }
        let trace = entries.trace();
        if trace.im.abs() > HERMITICITY_TOL
            || trace.re > 1.0 + 1e-10
            || trace.re < 1.0 - deficit - 1e-10
        {
            return Err(Error::InvalidParameter(format!(
                "trace {} outside [1 - {deficit}, 1]",
                trace.re
            )));
        }
        Ok(Self {
            cutoff,
            n_modes,
            entries,
            deficit,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Probability weight lost to truncation (including evolution losses).
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `U ρ U†` for a same-dimension (possibly truncated) unitary; any trace
    /// lost to truncation is added to the deficit.
    pub fn evolved(&self, u: &DMatrix<Complex64>) -> Result<FockDensityMatrix> {
        if u.nrows() != self.entries.nrows() || u.ncols() != self.entries.ncols() {
            return Err(Error::DimensionMismatch {
                context: "unitary applied to Fock state".into(),
                expected: self.entries.nrows(),
                found: u.nrows(),
            });
        }
        let raw = u * &self.entries * u.adjoint();
        let entries = (&raw + raw.adjoint()).map(|x| x * 0.5);
        let lost = (self.trace() - entries.trace().re).max(0.0);
        Ok(FockDensityMatrix {
            cutoff: self.cutoff,
            n_modes: self.n_modes,
            entries,
            deficit: self.deficit + lost,
        })
    }

    /// Reduce a two-mode state to its first mode.
    pub fn trace_out_second(&self) -> Result<FockDensityMatrix> {
        if self.n_modes != 2 {
            return Err(Error::InvalidParameter(
                "partial trace needs a two-mode state".into(),
            ));
        }
        let dim = self.cutoff + 1;
        let entries = DMatrix::from_fn(dim, dim, |m, mp| {
            (0..dim)
                .map(|n| self.entries[(m * dim + n, mp * dim + n)])
                .sum()
        });
        Ok(FockDensityMatrix {
            cutoff: self.cutoff,
            n_modes: 1,
            entries,
            deficit: self.deficit,
        })
    }

    /// Mean total photon number.
    pub fn mean_photon(&self) -> f64 {
        let dim = self.cutoff + 1;
        self.entries
            .diagonal()
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                let photons = if self.n_modes == 1 {
                    idx
                } else {
                    idx / dim + idx % dim
                };
                photons as f64 * p.re
            })
            .sum()
    }

    /// Diagonal photon-number probabilities.
    pub fn photon_distribution(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|p| p.re).collect()
    }

    fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eigen = self.entries.clone().symmetric_eigen();
        let values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        if let Some(&min) = values
            .iter()
            .min_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"))
        {
            if min < -EIGENVALUE_TOL {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: min,
                });
            }
        }
        Ok(values)
    }
}

fn ln_factorials(up_to: usize) -> Vec<f64> {
    let mut table = vec![0.0; up_to + 1];
    for k in 1..=up_to {
        table[k] = table[k - 1] + (k as f64).ln();
    }
    table
}

/// Smallest cutoff satisfying the tail rule for mean photon number `nbar`,
/// plus `10·(1 + |α|²)` headroom for a displacement of squared magnitude
/// `alpha_norm_sq`.
pub fn suggested_cutoff(nbar: f64, alpha_norm_sq: f64) -> usize {
    let tail = if nbar > 0.0 {
        let r = nbar / (nbar + 1.0);
        (FOCK_TAIL_THRESHOLD.ln() / r.ln()).ceil() as usize - 1
    } else {
        0
    };
    let headroom = (10.0 * (1.0 + alpha_norm_sq)).ceil() as usize;
    (tail + headroom).max(1)
}

/// Thermal state with mean photon number `nbar`: diagonal probabilities
/// `p_n = N̄ⁿ/(N̄+1)^{n+1}` up to the cutoff, with the geometric tail
/// recorded as the deficit.
pub fn fock_thermal(nbar: f64, cutoff: usize) -> Result<FockDensityMatrix> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::NegativeInput {
            name: "nbar",
            value: nbar,
        });
    }
    if cutoff < 1 {
        return Err(Error::InvalidParameter(
            "thermal cutoff must be at least 1".into(),
        ));
    }
    let ratio = nbar / (nbar + 1.0);
    let mut entries = DMatrix::zeros(cutoff + 1, cutoff + 1);
    let mut p = 1.0 / (nbar + 1.0);
    for n in 0..=cutoff {
        entries[(n, n)] = Complex64::new(p, 0.0);
        p *= ratio;
    }
    let deficit = ratio.powi(cutoff as i32 + 1);
    FockDensityMatrix::new(entries, cutoff, deficit)
}

/// Truncated displacement operator `D(α)` in the convention
/// `α = (ξ_Q + i·ξ_P)/√2`, built from the associated-Laguerre closed form
/// `⟨m|D(α)|n⟩ = √(n!/m!) α^{m−n} e^{−|α|²/2} L_n^{(m−n)}(|α|²)` (and its
/// adjoint-symmetric partner for `m < n`).
pub fn fock_displacement(alpha: Complex64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    let a2 = alpha.norm_sqr();
    let required = (10.0 * (1.0 + a2)).ceil() as usize;
    if cutoff < required {
        return Err(Error::CutoffTooSmall { cutoff, required });
    }
    let ln_fact = ln_factorials(cutoff);
    let gauss = (-a2 / 2.0).exp();
    let dim = cutoff + 1;
    let mut d = DMatrix::zeros(dim, dim);
    for m in 0..dim {
        for n in 0..dim {
            let (lo, hi, power_base) = if m >= n {
                (n, m, alpha)
            } else {
                (m, n, -alpha.conj())
            };
            let order = hi - lo;
            let magnitude = ((ln_fact[lo] - ln_fact[hi]) / 2.0).exp()
                * gauss
                * associated_laguerre(lo, order, a2);
            d[(m, n)] = power_base.powu(order as u32) * magnitude;
        }
    }
    Ok(d)
}

/// `L_k^{(a)}(x)` by the stable three-term recurrence.
fn associated_laguerre(k: usize, a: usize, x: f64) -> f64 {
    let a = a as f64;
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut current = 1.0 + a - x;
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + a - x) * current - (j + a) * prev) / (j + 1.0);
        prev = current;
        current = next;
    }
    current
}

fn check_transmissivity(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidTransmissivity(lambda));
    }
    Ok(())
}

/// Photon numbers of mode 1 representable in the total-photon sector `s`.
fn sector_range(s: usize, cutoff: usize) -> std::ops::RangeInclusive<usize> {
    s.saturating_sub(cutoff)..=s.min(cutoff)
}

/// `⟨k_out, s−k_out| U_λ |k_in, s−k_in⟩` from the binomial expansion of the
/// creation-operator transform `b₁† → √λ b₁† + √(1−λ) b₂†`,
/// `b₂† → √(1−λ) b₁† − √λ b₂†` (the involutive convention of the Gaussian
/// beam-splitter matrix).
fn sector_amplitude(s: usize, k_out: usize, k_in: usize, lambda: f64, ln_fact: &[f64]) -> f64 {
    let mu_sq = 1.0 - lambda;
    let norm = ((ln_fact[k_out] + ln_fact[s - k_out] - ln_fact[k_in] - ln_fact[s - k_in]) / 2.0)
        .exp();
    let mut sum = 0.0;
    let i_min = k_out.saturating_sub(s - k_in);
    let i_max = k_in.min(k_out);
    for i in i_min..=i_max {
        let j = k_out - i;
        let lambda_pow = (2 * i + s - k_in - k_out) as f64 / 2.0;
        let mu_pow = (k_in + k_out - 2 * i) as f64 / 2.0;
        let sign = if (s - k_in - j) % 2 == 0 { 1.0 } else { -1.0 };
        let ln_binom = ln_fact[k_in] - ln_fact[i] - ln_fact[k_in - i] + ln_fact[s - k_in]
            - ln_fact[j]
            - ln_fact[s - k_in - j];
        sum += sign * ln_binom.exp() * lambda.powf(lambda_pow) * mu_sq.powf(mu_pow);
    }
    norm * sum
}

/// The full two-mode beam-splitter unitary on the product basis
/// `|m⟩⊗|n⟩ ↦ index m·(cutoff+1)+n`, block diagonal in total photon number.
/// Sectors with more than `cutoff` total photons are truncated and therefore
/// sub-unitary; complete sectors are unitary to machine precision.
pub fn fock_beam_splitter(lambda: f64, cutoff: usize) -> Result<DMatrix<Complex64>> {
    check_transmissivity(lambda)?;
    let dim = cutoff + 1;
    let ln_fact = ln_factorials(2 * cutoff);
    let mut u = DMatrix::zeros(dim * dim, dim * dim);
    for s in 0..=2 * cutoff {
        for k_out in sector_range(s, cutoff) {
            for k_in in sector_range(s, cutoff) {
                let amp = sector_amplitude(s, k_out, k_in, lambda, &ln_fact);
                u[(k_out * dim + (s - k_out), k_in * dim + (s - k_in))] =
                    Complex64::new(amp, 0.0);
            }
        }
    }
    Ok(u)
}

/// Apply the beam splitter to a two-mode state sector pair by sector pair
/// (numerically identical to conjugating by [`fock_beam_splitter`], but
/// avoiding the full-dimension matrix products).
pub fn fock_beam_splitter_apply(
    rho: &FockDensityMatrix,
    lambda: f64,
) -> Result<FockDensityMatrix> {
    check_transmissivity(lambda)?;
    if rho.n_modes() != 2 {
        return Err(Error::InvalidParameter(
            "beam splitter application needs a two-mode state".into(),
        ));
    }
    let cutoff = rho.cutoff();
    let dim = cutoff + 1;
    let ln_fact = ln_factorials(2 * cutoff);
    let blocks: Vec<(Vec<usize>, DMatrix<f64>)> = (0..=2 * cutoff)
        .map(|s| {
            let ks: Vec<usize> = sector_range(s, cutoff).collect();
            let u = DMatrix::from_fn(ks.len(), ks.len(), |r, c| {
                sector_amplitude(s, ks[r], ks[c], lambda, &ln_fact)
            });
            let indices = ks.iter().map(|&k| k * dim + (s - k)).collect();
            (indices, u)
        })
        .collect();
    let mut out = DMatrix::zeros(dim * dim, dim * dim);
    for (rows, u_left) in &blocks {
        for (cols, u_right) in &blocks {
            let cross = DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
                rho.entries()[(rows[r], cols[c])]
            });
            let mapped = u_left.map(|x| Complex64::new(x, 0.0)) * cross
                * u_right.map(|x| Complex64::new(x, 0.0)).transpose();
            for (r, &row) in rows.iter().enumerate() {
                for (c, &col) in cols.iter().enumerate() {
                    out[(row, col)] = mapped[(r, c)];
                }
            }
        }
    }
    let entries = (&out + out.adjoint()).map(|x| x * 0.5);
    let lost = (rho.trace() - entries.trace().re).max(0.0);
    Ok(FockDensityMatrix {
        cutoff,
        n_modes: 2,
        entries,
        deficit: rho.deficit() + lost,
    })
}

/// Product state of two equal-cutoff single-mode states.
pub fn fock_tensor(a: &FockDensityMatrix, b: &FockDensityMatrix) -> Result<FockDensityMatrix> {
    if a.n_modes() != 1 || b.n_modes() != 1 {
        return Err(Error::InvalidParameter(
            "tensor product takes two single-mode states".into(),
        ));
    }
    if a.cutoff() != b.cutoff() {
        return Err(Error::DimensionMismatch {
            context: "tensor factors must share a cutoff".into(),
            expected: a.cutoff(),
            found: b.cutoff(),
        });
    }
    Ok(FockDensityMatrix {
        cutoff: a.cutoff(),
        n_modes: 2,
        entries: a.entries().kronecker(b.entries()),
        deficit: a.deficit() + b.deficit(),
    })
}

/// Von Neumann entropy `−Σ eᵢ ln eᵢ` over eigenvalues above support
/// tolerance, in nats.
pub fn fock_entropy(rho: &FockDensityMatrix) -> Result<f64> {
    Ok(rho
        .eigenvalues()?
        .into_iter()
        .filter(|&e| e > ENTROPY_SUPPORT_TOL)
        .map(|e| -e * e.ln())
        .sum())
}

/// Relative entropy `S(ρ‖σ) = tr ρ(ln ρ − ln σ)` in nats, computed from both
/// eigendecompositions. Returns `+∞` when `ρ` has weight outside the
/// numerical support of `σ`.
pub fn fock_relative_entropy(rho: &FockDensityMatrix, sigma: &FockDensityMatrix) -> Result<f64> {
    if rho.entries().nrows() != sigma.entries().nrows() {
        return Err(Error::DimensionMismatch {
            context: "relative entropy arguments".into(),
            expected: rho.entries().nrows(),
            found: sigma.entries().nrows(),
        });
    }
    let rho_eigen = rho.entries().clone().symmetric_eigen();
    let sigma_eigen = sigma.entries().clone().symmetric_eigen();
    if rho_eigen.eigenvalues.min() < -EIGENVALUE_TOL
        || sigma_eigen.eigenvalues.min() < -EIGENVALUE_TOL
    {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: rho_eigen.eigenvalues.min().min(sigma_eigen.eigenvalues.min()),
        });
    }
    let entropy_term: f64 = rho_eigen
        .eigenvalues
        .iter()
        .filter(|&&p| p > ENTROPY_SUPPORT_TOL)
        .map(|&p| p * p.ln())
        .sum();
    // weight of rho on each sigma eigenvector
    let overlap = rho_eigen.eigenvectors.adjoint() * &sigma_eigen.eigenvectors;
    let mut cross_term = 0.0;
    for (j, &q) in sigma_eigen.eigenvalues.iter().enumerate() {
        let weight: f64 = rho_eigen
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > ENTROPY_SUPPORT_TOL)
            .map(|(i, &p)| p * overlap[(i, j)].norm_sqr())
            .sum();
        if q <= ENTROPY_SUPPORT_TOL {
            if weight > 1e-12 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross_term += weight * q.ln();
    }
    Ok(entropy_term - cross_term)
}
