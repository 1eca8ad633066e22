//! Divergence-based Fisher information for displacement families, the
//! conditional-entropy production rate under diffusion, and the de Bruijn
//! consistency check connecting them.
//!
//! All formulas consume the Williamson decomposition `S M S^T = D` of the
//! full covariance. Two deliberately distinct code paths compute the same
//! quantity: [`conditional_fisher`] accumulates per-coordinate column sums
//! `J_k = sum_j beta(lambda_j) (S_{2j,k}^2 + S_{2j+1,k}^2)`, while
//! [`entropy_rate`] forms the matrix `S P_A S^T` and takes per-mode block
//! traces. Their agreement (rate = J/4) is a verified identity, so the
//! paths must stay independent — do not fold one into the other.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::state::{entropy_of_spectrum, inverse_temperature, GaussianState};
use crate::symplectic::{
    symplectic_spectrum_of, williamson, CovarianceMatrix, SymplecticDecomposition, PURITY_TOL,
};

/// Default step for first-derivative (rate) finite differences.
pub const RATE_FD_STEP: f64 = 1e-4;
/// Default step for second-derivative finite differences.
pub const CURVATURE_FD_STEP: f64 = 1e-3;

/// Per-direction Fisher information over a coordinate selection.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FisherReport {
    /// Selected phase-space coordinate indices (0-based), in order.
    pub coordinates: Vec<usize>,
    /// `J_k` for each selected coordinate.
    pub per_direction: Vec<f64>,
    /// Sum of `per_direction`.
    pub total: f64,
    /// Human-readable selection label (block names joined by `+`).
    pub subsystem: String,
}

fn decomposition_with_betas(m: &CovarianceMatrix) -> Result<(SymplecticDecomposition, Vec<f64>)> {
    let dec = williamson(m)?;
    let betas = dec
        .spectrum
        .iter()
        .map(|&lambda| {
            if lambda <= 1.0 + PURITY_TOL {
                Err(Error::PureMode {
                    lambda,
                    tol: PURITY_TOL,
                })
            } else {
                inverse_temperature(lambda)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((dec, betas))
}

/// Relative entropy (nats) between a Gaussian state and its displacement by
/// `xi`: `(1/2) sum_j beta(lambda_j) ((S xi)_{2j}^2 + (S xi)_{2j+1}^2)`.
///
/// Exactly quadratic in `xi`; zero iff `xi = 0`. Pure modes make the
/// divergence infinite and are refused.
pub fn relative_entropy_displaced(m: &CovarianceMatrix, xi: &DVector<f64>) -> Result<f64> {
    let dim = 2 * m.n_modes();
    if xi.len() != dim {
        return Err(Error::DimensionMismatch {
            context: "displacement direction".into(),
            expected: dim,
            found: xi.len(),
        });
    }
    let (dec, betas) = decomposition_with_betas(m)?;
    let s_xi = dec.s.matrix() * xi;
    Ok(betas
        .iter()
        .enumerate()
        .map(|(j, beta)| beta * (s_xi[2 * j].powi(2) + s_xi[2 * j + 1].powi(2)))
        .sum::<f64>()
        / 2.0)
}

fn fisher_over_coordinates(
    state: &GaussianState,
    coordinates: Vec<usize>,
    subsystem: String,
) -> Result<FisherReport> {
    let (dec, betas) = decomposition_with_betas(state.cov())?;
    let s = dec.s.matrix();
    let per_direction: Vec<f64> = coordinates
        .iter()
        .map(|&k| {
            betas
                .iter()
                .enumerate()
                .map(|(j, beta)| beta * (s[(2 * j, k)].powi(2) + s[(2 * j + 1, k)].powi(2)))
                .sum()
        })
        .collect();
    let total = per_direction.iter().sum();
    Ok(FisherReport {
        coordinates,
        per_direction,
        total,
        subsystem,
    })
}

/// Fisher information of the family displaced along coordinate `k`
/// (0-based, `k < 2n`): `sum_j beta(lambda_j) (S_{2j,k}^2 + S_{2j+1,k}^2)`.
///
/// Equals twice [`relative_entropy_displaced`] at `xi = e_k` (the relative
/// entropy is exactly quadratic).
pub fn fisher_direction(state: &GaussianState, k: usize) -> Result<f64> {
    let dim = 2 * state.n_modes();
    if k >= dim {
        return Err(Error::DimensionMismatch {
            context: "fisher coordinate index".into(),
            expected: dim,
            found: k,
        });
    }
    Ok(fisher_over_coordinates(state, vec![k], format!("coordinate {k}"))?.total)
}

/// Fisher information summed over every phase-space coordinate.
pub fn fisher_total(state: &GaussianState) -> Result<FisherReport> {
    let label = state
        .partition()
        .iter()
        .map(|b| b.name.as_str())
        .collect::<Vec<_>>()
        .join("+");
    fisher_over_coordinates(state, (0..2 * state.n_modes()).collect(), label)
}

/// Conditional Fisher information `J(A|B)`: the per-coordinate sums
/// restricted to the named blocks, with `S` taken from the Williamson
/// decomposition of the full covariance (conditioning enters through `S`).
pub fn conditional_fisher(state: &GaussianState, subsystems: &[&str]) -> Result<FisherReport> {
    let coordinates = state.coordinate_indices(subsystems)?;
    fisher_over_coordinates(state, coordinates, subsystems.join("+"))
}

/// Production rate of `S(A|B)` under diffusion of the named blocks:
/// `(1/4) sum_l beta(lambda_l) tr([S P_A S^T]^{(l)})` with `P_A` the
/// coordinate projector and `[.]^{(l)}` the 2x2 diagonal block of mode `l`.
///
/// An empty selection returns 0 (zero projector).
pub fn entropy_rate(state: &GaussianState, subsystems: &[&str]) -> Result<f64> {
    if subsystems.is_empty() {
        return Ok(0.0);
    }
    let coords = state.coordinate_indices(subsystems)?;
    let (dec, betas) = decomposition_with_betas(state.cov())?;
    let dim = 2 * state.n_modes();
    let mut projector = DMatrix::zeros(dim, dim);
    for &i in &coords {
        projector[(i, i)] = 1.0;
    }
    let t = dec.s.matrix() * projector * dec.s.matrix().transpose();
    Ok(betas
        .iter()
        .enumerate()
        .map(|(l, beta)| beta * (t[(2 * l, 2 * l)] + t[(2 * l + 1, 2 * l + 1)]))
        .sum::<f64>()
        / 4.0)
}

/// Joint entropy of the covariance with `t` added on the selected
/// coordinates, evaluated without quantum-validity checks so small negative
/// `t` (central differences) stays representable.
fn joint_entropy_diffused(state: &GaussianState, coords: &[usize], t: f64) -> Result<f64> {
    let mut m = state.covariance().clone();
    for &i in coords {
        m[(i, i)] += t;
    }
    entropy_of_spectrum(&symplectic_spectrum_of(&m)?)
}

/// Central-difference derivative of `S(A|B)` under diffusion of `A` at
/// `t = 0`. The conditioned marginal is diffusion-invariant, so the joint
/// entropy carries the whole derivative.
pub fn conditional_entropy_rate_fd(
    state: &GaussianState,
    subsystems: &[&str],
    h: f64,
) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::NegativeInput {
            name: "h".into(),
            value: h,
        });
    }
    let coords = state.coordinate_indices(subsystems)?;
    let plus = joint_entropy_diffused(state, &coords, h)?;
    let minus = joint_entropy_diffused(state, &coords, -h)?;
    Ok((plus - minus) / (2.0 * h))
}

/// `|d S(A|B)/dt - J(A|B)/4|` at `t = 0`, the derivative taken by central
/// differences with step `h` and the Fisher side by the closed formula.
/// Expected `O(h^2)` for spectra bounded away from 1.
pub fn debruijn_residual(state: &GaussianState, subsystems: &[&str], h: f64) -> Result<f64> {
    let fd = conditional_entropy_rate_fd(state, subsystems, h)?;
    let fisher = conditional_fisher(state, subsystems)?;
    Ok((fd - fisher.total / 4.0).abs())
}

/// `|d S(A|B)/dt - J(A|B)/4|` with both sides in closed form; zero up to
/// rounding for every valid state.
pub fn debruijn_identity_residual(state: &GaussianState, subsystems: &[&str]) -> Result<f64> {
    let rate = entropy_rate(state, subsystems)?;
    let fisher = conditional_fisher(state, subsystems)?;
    Ok((rate - fisher.total / 4.0).abs())
}

/// Ratio of finite-difference residuals at steps `h` and `h/2`; near 4 when
/// the residual shrinks quadratically. `NaN` when the fine residual is zero.
pub fn debruijn_richardson_ratio(
    state: &GaussianState,
    subsystems: &[&str],
    h: f64,
) -> Result<f64> {
    let coarse = debruijn_residual(state, subsystems, h)?;
    let fine = debruijn_residual(state, subsystems, h / 2.0)?;
    Ok(coarse / fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Block;
    use crate::symplectic::{random_gaussian_covariance, random_symplectic, SymplecticMatrix};
    use approx::assert_abs_diff_eq;

    const LN2: f64 = std::f64::consts::LN_2;

    fn random_state(seed: u64, blocks: &[(&str, usize)], lo: f64) -> GaussianState {
        let n = blocks.iter().map(|b| b.1).sum();
        let cov = random_gaussian_covariance(seed, n, (lo, 6.0), 0.8).unwrap();
        GaussianState::new(
            cov,
            DVector::zeros(2 * n),
            blocks.iter().map(|(s, m)| Block::new(*s, *m)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn relative_entropy_zero_displacement() {
        let m = CovarianceMatrix::thermal(2, 3.0).unwrap();
        assert_eq!(
            relative_entropy_displaced(&m, &DVector::zeros(4)).unwrap(),
            0.0
        );
    }

    #[test]
    fn relative_entropy_thermal_unit_shift() {
        // lambda = 3, xi = (1, 0): (beta(3)/2) = ln(2)/2
        let m = CovarianceMatrix::thermal(1, 3.0).unwrap();
        let re = relative_entropy_displaced(&m, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(re, LN2 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn relative_entropy_rejects_pure_modes_and_bad_lengths() {
        let vac = CovarianceMatrix::vacuum(1);
        assert!(matches!(
            relative_entropy_displaced(&vac, &DVector::from_vec(vec![1.0, 0.0])),
            Err(Error::PureMode { .. })
        ));
        let m = CovarianceMatrix::thermal(1, 3.0).unwrap();
        assert!(relative_entropy_displaced(&m, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn relative_entropy_symplectic_invariance() {
        for seed in 0..20u64 {
            let m = random_gaussian_covariance(seed, 2, (1.1, 5.0), 0.9).unwrap();
            let t = random_symplectic(seed + 500, 2, 0.8);
            let xi = DVector::from_fn(4, |i, _| 0.3 + 0.2 * i as f64);
            let before = relative_entropy_displaced(&m, &xi).unwrap();
            let conj = t.matrix() * m.matrix() * t.matrix().transpose();
            let conj = CovarianceMatrix::new((&conj + conj.transpose()) * 0.5).unwrap();
            let after = relative_entropy_displaced(&conj, &(t.matrix() * &xi)).unwrap();
            assert_abs_diff_eq!(before, after, epsilon = 1e-8);
        }
    }

    #[test]
    fn relative_entropy_is_quadratic() {
        let m = random_gaussian_covariance(3, 2, (1.2, 4.0), 0.7).unwrap();
        let xi = DVector::from_vec(vec![0.4, -0.1, 0.7, 0.2]);
        let base = relative_entropy_displaced(&m, &xi).unwrap();
        for c in [0.5, 2.0, -3.0] {
            let scaled = relative_entropy_displaced(&m, &(&xi * c)).unwrap();
            assert_abs_diff_eq!(scaled, c * c * base, epsilon = 1e-12 * (1.0 + c * c));
        }
    }

    #[test]
    fn fisher_direction_thermal_and_consistency() {
        let st = GaussianState::thermal("A", 1, 3.0).unwrap();
        assert_abs_diff_eq!(fisher_direction(&st, 0).unwrap(), LN2, epsilon = 1e-12);
        assert_abs_diff_eq!(fisher_direction(&st, 1).unwrap(), LN2, epsilon = 1e-12);
        assert!(fisher_direction(&st, 2).is_err());

        // J_k = 2 RE(M, e_k): the relative entropy is exactly quadratic
        let st = random_state(9, &[("A", 2)], 1.1);
        for k in 0..4 {
            let jk = fisher_direction(&st, k).unwrap();
            let mut e = DVector::zeros(4);
            e[k] = 1.0;
            let re = relative_entropy_displaced(st.cov(), &e).unwrap();
            assert_abs_diff_eq!(jk, 2.0 * re, epsilon = 1e-8);
        }
    }

    #[test]
    fn fisher_direction_matches_second_derivative() {
        let st = random_state(12, &[("A", 2)], 1.2);
        let h = CURVATURE_FD_STEP;
        for k in 0..4 {
            let mut e = DVector::zeros(4);
            e[k] = 1.0;
            let re = |theta: f64| relative_entropy_displaced(st.cov(), &(&e * theta)).unwrap();
            let second = (re(h) - 2.0 * re(0.0) + re(-h)) / (h * h);
            assert_abs_diff_eq!(fisher_direction(&st, k).unwrap(), second, epsilon = 1e-5);
        }
    }

    #[test]
    fn fisher_total_cases() {
        let st = GaussianState::thermal("A", 1, 4.0).unwrap();
        let report = fisher_total(&st).unwrap();
        assert_abs_diff_eq!(
            report.total,
            2.0 * inverse_temperature(4.0).unwrap(),
            epsilon = 1e-12
        );
        assert_eq!(report.per_direction.len(), 2);
        assert_abs_diff_eq!(
            report.total,
            report.per_direction.iter().sum::<f64>(),
            epsilon = 0.0
        );
        assert!(report.per_direction.iter().all(|&j| j >= 0.0));

        assert!(matches!(
            fisher_total(&GaussianState::vacuum("A", 1)),
            Err(Error::PureMode { .. })
        ));
    }

    #[test]
    fn fisher_total_is_additive_over_tensor_products() {
        let a = random_state(21, &[("A", 1)], 1.15);
        let b = random_state(22, &[("B", 2)], 1.15);
        let joint = a.tensor(&b).unwrap();
        let total = fisher_total(&joint).unwrap().total;
        let parts = fisher_total(&a).unwrap().total + fisher_total(&b).unwrap().total;
        assert_abs_diff_eq!(total, parts, epsilon = 1e-8);
    }

    #[test]
    fn conditional_fisher_whole_system_is_total() {
        let st = random_state(31, &[("A", 2)], 1.1);
        let cond = conditional_fisher(&st, &["A"]).unwrap();
        let total = fisher_total(&st).unwrap();
        assert_abs_diff_eq!(cond.total, total.total, epsilon = 1e-12);
    }

    #[test]
    fn conditional_fisher_product_case() {
        let a = random_state(41, &[("A", 1)], 1.2);
        let b = random_state(42, &[("B", 2)], 1.2);
        let joint = a.tensor(&b).unwrap();
        let cond = conditional_fisher(&joint, &["A"]).unwrap();
        assert_abs_diff_eq!(
            cond.total,
            fisher_total(&a).unwrap().total,
            epsilon = 1e-8
        );
        assert_eq!(cond.coordinates, vec![0, 1]);
        assert_eq!(cond.subsystem, "A");
    }

    #[test]
    fn conditional_fisher_invariant_under_b_conjugation() {
        for seed in 0..10u64 {
            let st = random_state(100 + seed, &[("A", 1), ("B", 2)], 1.1);
            let t_b = random_symplectic(seed + 900, 2, 0.7);
            let mut s_full = DMatrix::identity(6, 6);
            s_full.view_mut((2, 2), (4, 4)).copy_from(t_b.matrix());
            let conj = crate::channels::apply_symplectic(
                &st,
                &SymplecticMatrix::from_trusted(s_full),
            )
            .unwrap();
            let before = conditional_fisher(&st, &["A"]).unwrap().total;
            let after = conditional_fisher(&conj, &["A"]).unwrap().total;
            assert_abs_diff_eq!(before, after, epsilon = 1e-8);
        }
    }

    #[test]
    fn conditional_fisher_monotone_under_partial_trace_of_condition() {
        for seed in 0..10u64 {
            let st = random_state(200 + seed, &[("A", 1), ("B1", 1), ("B2", 1)], 1.1);
            let full = conditional_fisher(&st, &["A"]).unwrap().total;
            let reduced = st.reduce(&["A", "B1"]).unwrap();
            let partial = conditional_fisher(&reduced, &["A"]).unwrap().total;
            assert!(
                full >= partial - 1e-9,
                "monotonicity violated at seed {seed}: {full} < {partial}"
            );
        }
    }

    #[test]
    fn entropy_rate_thermal_and_empty() {
        let st = GaussianState::thermal("A", 1, 3.0).unwrap();
        assert_abs_diff_eq!(
            entropy_rate(&st, &["A"]).unwrap(),
            LN2 / 2.0,
            epsilon = 1e-12
        );
        assert_eq!(entropy_rate(&st, &[]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_rate_equals_quarter_conditional_fisher() {
        for seed in 0..50u64 {
            let (m, n) = (1 + (seed as usize) % 3, 1 + (seed as usize / 3) % 3);
            let st = random_state(300 + seed, &[("A", m), ("B", n)], 1.1);
            let rate = entropy_rate(&st, &["A"]).unwrap();
            let fisher = conditional_fisher(&st, &["A"]).unwrap().total;
            assert_abs_diff_eq!(rate, fisher / 4.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn entropy_rate_matches_finite_difference_of_conditional_entropy() {
        use crate::channels::{diffuse, DiffusionSpec};
        let st = random_state(77, &[("A", 2), ("B", 1)], 1.2);
        let h = RATE_FD_STEP;
        let at = |t: f64| {
            diffuse(&st, &DiffusionSpec::new(t, "A").unwrap())
                .unwrap()
                .conditional_entropy(&["A"], &["B"])
                .unwrap()
        };
        // centered at t = h so both evaluations stay at nonnegative times
        let fd = (at(2.0 * h) - at(0.0)) / (2.0 * h);
        let rate = entropy_rate(
            &diffuse(&st, &DiffusionSpec::new(h, "A").unwrap()).unwrap(),
            &["A"],
        )
        .unwrap();
        assert_abs_diff_eq!(fd, rate, epsilon = 2e-5);
    }

    #[test]
    fn debruijn_residual_thermal() {
        let st = GaussianState::thermal("A", 1, 3.0).unwrap();
        let res = debruijn_residual(&st, &["A"], 1e-3).unwrap();
        assert!(res < 1e-6, "residual {res}");
    }

    #[test]
    fn debruijn_residual_richardson_ratio() {
        for seed in [5u64, 17, 29] {
            let st = random_state(400 + seed, &[("A", 1), ("B", 1)], 1.2);
            let r1 = debruijn_residual(&st, &["A"], 1e-3).unwrap();
            let r2 = debruijn_residual(&st, &["A"], 5e-4).unwrap();
            let ratio = r1 / r2;
            assert!(
                (3.5..=4.5).contains(&ratio),
                "ratio {ratio} outside window at seed {seed} (r1={r1}, r2={r2})"
            );
        }
    }

    #[test]
    fn debruijn_residual_product_reduces_to_unconditional() {
        let a = random_state(55, &[("A", 1)], 1.3);
        let b = random_state(56, &[("B", 1)], 1.3);
        let joint = a.tensor(&b).unwrap();
        let cond = debruijn_residual(&joint, &["A"], 1e-3).unwrap();
        let plain = debruijn_residual(&a, &["A"], 1e-3).unwrap();
        assert_abs_diff_eq!(cond, plain, epsilon = 1e-10);
    }

    #[test]
    fn reparametrization_scales_quadratically() {
        let st = random_state(60, &[("A", 2)], 1.15);
        let k = 2;
        let jk = fisher_direction(&st, k).unwrap();
        for c in [0.5, 3.0] {
            let mut e = DVector::zeros(4);
            e[k] = c;
            let re = relative_entropy_displaced(st.cov(), &e).unwrap();
            assert_abs_diff_eq!(2.0 * re, c * c * jk, epsilon = 1e-8 * (1.0 + c * c));
        }
    }
}
