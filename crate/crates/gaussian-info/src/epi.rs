//! Conditional entropy-power-inequality diagnostics.
//!
//! The central object is [`EpiInstance`]: two product inputs whose leading
//! blocks ("arms") meet on a beam splitter while trailing blocks ride along as
//! side information. [`epi_gap`] evaluates the inequality gap
//! `δ = S(Y|E₁E₂) − λ·S(X₁|E₁) − (1−λ)·S(X₂|E₂)`, [`delta_trajectory`] follows
//! it under arm diffusion, and [`fisher_inequality_residual`] checks the
//! Fisher-information inequality that drives `δ′(t) ≤ 0`. The module also
//! hosts the infinite-time scaling check ([`asymptotic_residual`]) and the
//! symplectic-spectrum perturbation validators ([`perturb_check_zeroth`],
//! [`perturb_check_first_infinite`], [`perturb_check_first_infinitesimal`]).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::channels::{beam_splitter_stabilized, diffuse, DiffusionSpec};
use crate::error::{Error, Result};
use crate::fisher::{conditional_fisher, debruijn_identity_residual};
use crate::state::{g_function, Block, GaussianState};
use crate::symplectic::{
    distinct_values, random_gaussian_covariance, symplectic_gap, symplectic_spectrum_of,
    williamson, CovarianceMatrix, PURITY_TOL,
};

/// Symplectic-spectrum range for randomly drawn instances: bounded away from
/// purity (so inverse temperatures stay finite) yet reaching well into the
/// high-temperature regime.
pub const RANDOM_SPECTRUM_RANGE: (f64, f64) = (1.05, 6.0);

/// Squeezing intensity used when drawing random instance states.
pub const RANDOM_SQUEEZE_INTENSITY: f64 = 0.6;

/// Scale of the Gaussian displacement entries drawn for random instances.
const RANDOM_DISPLACEMENT_SCALE: f64 = 0.5;

/// Default diffusion-time grid used by [`sweep_instance`].
pub const DEFAULT_TRAJECTORY_GRID: [f64; 4] = [0.0, 0.5, 2.0, 8.0];

/// How the beam-splitter transmissivity is chosen when drawing instances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaPolicy {
    /// Always use the given transmissivity.
    Fixed(f64),
    /// Draw uniformly from `[0, 1]`.
    Uniform,
}

/// Two independent Gaussian inputs feeding a transmissivity-`λ` beam
/// splitter. The first block of each state is the arm that gets mixed; any
/// remaining blocks are that input's environment (side information).
#[derive(Clone, Debug)]
pub struct EpiInstance {
    rho1: GaussianState,
    rho2: GaussianState,
    lambda: f64,
}

impl EpiInstance {
    /// Build an instance. Arms (the first blocks) must have equal mode
    /// counts, `lambda` must lie in `[0, 1]`, and the environment names of
    /// `rho2` must not collide with any block of `rho1` (the combined output
    /// keeps both environments side by side).
    pub fn new(rho1: GaussianState, rho2: GaussianState, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidTransmissivity(lambda));
        }
        let arm1 = rho1.partition()[0].n_modes;
        let arm2 = rho2.partition()[0].n_modes;
        if arm1 != arm2 {
            return Err(Error::ArmMismatch {
                left: arm1,
                right: arm2,
            });
        }
        for b in rho2.partition().iter().skip(1) {
            if rho1.partition().iter().any(|p| p.name == b.name) {
                return Err(Error::DuplicateSubsystem(b.name.clone()));
            }
        }
        Ok(Self { rho1, rho2, lambda })
    }

    /// First input (arm `X₁` plus its environment).
    pub fn rho1(&self) -> &GaussianState {
        &self.rho1
    }

    /// Second input (arm `X₂` plus its environment).
    pub fn rho2(&self) -> &GaussianState {
        &self.rho2
    }

    /// Beam-splitter transmissivity.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Mode count of each arm.
    pub fn arm_modes(&self) -> usize {
        self.rho1.partition()[0].n_modes
    }

    /// The same instance with both arms diffused for time `t ≥ 0`
    /// (environments untouched).
    pub fn diffused(&self, t: f64) -> Result<EpiInstance> {
        let spec1 = DiffusionSpec::new(t, self.rho1.partition()[0].name.clone())?;
        let spec2 = DiffusionSpec::new(t, self.rho2.partition()[0].name.clone())?;
        Ok(EpiInstance {
            rho1: diffuse(&self.rho1, &spec1)?,
            rho2: diffuse(&self.rho2, &spec2)?,
            lambda: self.lambda,
        })
    }

    /// The combined output state `(Y, E₁…, E₂…)`.
    pub fn combined(&self) -> Result<GaussianState> {
        beam_splitter_stabilized(&self.rho1, &self.rho2, self.lambda)
    }
}

/// `S(first block | remaining blocks)`.
fn arm_conditional_entropy(state: &GaussianState) -> Result<f64> {
    let names: Vec<&str> = state.partition().iter().map(|b| b.name.as_str()).collect();
    state.conditional_entropy(&names[..1], &names[1..])
}

/// `J(first block | remaining blocks)`.
fn arm_conditional_fisher(state: &GaussianState) -> Result<f64> {
    let arm = state.partition()[0].name.clone();
    Ok(conditional_fisher(state, &[arm.as_str()])?.total)
}

/// The conditional entropy-power-inequality gap
/// `δ = S(Y|E₁E₂) − λ·S(X₁|E₁) − (1−λ)·S(X₂|E₂)` with
/// `Y = X₁ ⊞_λ X₂` formed by [`beam_splitter_stabilized`]. Expected `≥ 0`
/// for every valid instance.
pub fn epi_gap(inst: &EpiInstance) -> Result<f64> {
    let combined = inst.combined()?;
    let s_y = arm_conditional_entropy(&combined)?;
    let s1 = arm_conditional_entropy(&inst.rho1)?;
    let s2 = arm_conditional_entropy(&inst.rho2)?;
    Ok(s_y - inst.lambda * s1 - (1.0 - inst.lambda) * s2)
}

fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter(
            "time grid entries must be finite and >= 0".into(),
        ));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "time grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// `δ(t)` sampled on a strictly ascending, nonnegative time grid; both arms
/// are diffused for time `t` before combining. The trajectory is expected to
/// be nonincreasing and to decay toward 0.
pub fn delta_trajectory(inst: &EpiInstance, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_time_grid(t_grid)?;
    t_grid
        .iter()
        .map(|&t| Ok((t, epi_gap(&inst.diffused(t)?)?)))
        .collect()
}

/// Residual of the conditional Fisher-information inequality after both arms
/// diffuse for time `t`:
/// `λ·J(X₁|E₁) + (1−λ)·J(X₂|E₂) − J(Y|E₁E₂)`; expected `≥ 0`. This equals
/// `−4·δ′(t)`, which is what makes the gap trajectory nonincreasing.
///
/// Pure arm modes make `J` diverge, so instances with pure inputs need
/// `t > 0` (diffusion lifts purity immediately).
pub fn fisher_inequality_residual(inst: &EpiInstance, t: f64) -> Result<f64> {
    let at_t = inst.diffused(t)?;
    let j_y = arm_conditional_fisher(&at_t.combined()?)?;
    let j1 = arm_conditional_fisher(&at_t.rho1)?;
    let j2 = arm_conditional_fisher(&at_t.rho2)?;
    Ok(at_t.lambda * j1 + (1.0 - at_t.lambda) * j2 - j_y)
}

/// `|S(A|B)_{diffused} − m·g((t−1)/2)|` where the named block (of `m` modes)
/// diffuses for time `t > 1` and `B` is everything else. For large `t` the
/// conditional entropy approaches `m` times the entropy of a thermal mode
/// with symplectic eigenvalue `t`, and the residual decays like `1/t`.
pub fn asymptotic_residual(state: &GaussianState, subsystem: &str, t: f64) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "asymptotic reference g((t-1)/2) needs t > 1, got {t}"
        )));
    }
    let m = state.mode_range(subsystem)?.len();
    let diffused = diffuse(state, &DiffusionSpec::new(t, subsystem)?)?;
    let rest: Vec<&str> = diffused
        .partition()
        .iter()
        .map(|b| b.name.as_str())
        .filter(|name| *name != subsystem)
        .collect();
    let s = diffused.conditional_entropy(&[subsystem], &rest)?;
    let reference = m as f64 * g_function((t - 1.0) / 2.0)?;
    Ok((s - reference).abs())
}

/// Outcome of one spectrum-perturbation check: predicted and exact perturbed
/// spectra (both descending), the worst prediction error, and the ratio of
/// that error between reruns at `ε/2` and `ε`. First-order-accurate
/// predictions give a ratio near 1/2, second-order-accurate ones near 1/4;
/// the ratio is NaN when the error at `ε` vanishes.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    pub epsilon: f64,
    pub predicted: Vec<f64>,
    pub exact: Vec<f64>,
    pub max_error: f64,
    pub ratio_at_half_eps: f64,
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "perturbation size must be finite and >= 0, got {eps}"
        )));
    }
    Ok(())
}

fn error_ratio(half: f64, full: f64) -> f64 {
    if full == 0.0 {
        f64::NAN
    } else {
        half / full
    }
}

fn sort_descending(values: &mut [f64]) {
    values.sort_by(|a, b| b.partial_cmp(a).expect("spectra are finite"));
}

/// Check that every symplectic eigenvalue of `I + εM` sits within `O(ε)`
/// of 1: the prediction is the all-ones spectrum and the error shrinks
/// linearly with `ε`.
pub fn perturb_check_zeroth(m: &CovarianceMatrix, eps: f64) -> Result<PerturbationReport> {
    let (predicted, exact, max_error) = zeroth_errors(m, eps)?;
    let (_, _, half_error) = zeroth_errors(m, eps / 2.0)?;
    Ok(PerturbationReport {
        epsilon: eps,
        predicted,
        exact,
        max_error,
        ratio_at_half_eps: error_ratio(half_error, max_error),
    })
}

fn zeroth_errors(m: &CovarianceMatrix, eps: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    check_epsilon(eps)?;
    let dim = 2 * m.n_modes();
    let shifted = DMatrix::identity(dim, dim) + m.matrix() * eps;
    let exact = symplectic_spectrum_of(&shifted)?;
    let predicted = vec![1.0; m.n_modes()];
    let max_error = exact.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    Ok((predicted, exact, max_error))
}

fn check_split(m: &CovarianceMatrix, a_modes: usize, allow_whole: bool) -> Result<()> {
    let n = m.n_modes();
    let ok = a_modes >= 1 && if allow_whole { a_modes <= n } else { a_modes < n };
    if !ok {
        return Err(Error::InvalidParameter(format!(
            "block split needs 1 <= a_modes {} {n}, got {a_modes}",
            if allow_whole { "<=" } else { "<" }
        )));
    }
    Ok(())
}

/// Coordinate projector onto the first `a_modes` modes.
fn leading_projector(n_modes: usize, a_modes: usize) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut p = DMatrix::zeros(dim, dim);
    for i in 0..2 * a_modes {
        p[(i, i)] = 1.0;
    }
    p
}

/// First-order check for `P_A + εM` where `P_A` projects onto the leading
/// `a_modes` modes: the exact symplectic spectrum should match the symplectic
/// eigenvalues of `I_A + εM_A` together with `ε` times the symplectic
/// eigenvalues of `M_B`, with error `O(ε²)`.
pub fn perturb_check_first_infinite(
    m: &CovarianceMatrix,
    a_modes: usize,
    eps: f64,
) -> Result<PerturbationReport> {
    let (predicted, exact, max_error) = first_infinite_errors(m, a_modes, eps)?;
    let (_, _, half_error) = first_infinite_errors(m, a_modes, eps / 2.0)?;
    Ok(PerturbationReport {
        epsilon: eps,
        predicted,
        exact,
        max_error,
        ratio_at_half_eps: error_ratio(half_error, max_error),
    })
}

fn first_infinite_errors(
    m: &CovarianceMatrix,
    a_modes: usize,
    eps: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    check_epsilon(eps)?;
    check_split(m, a_modes, false)?;
    let n = m.n_modes();
    let a_dim = 2 * a_modes;
    let b_dim = 2 * (n - a_modes);

    let shifted = leading_projector(n, a_modes) + m.matrix() * eps;
    let exact = symplectic_spectrum_of(&shifted)?;

    let m_a = m.matrix().view((0, 0), (a_dim, a_dim)).into_owned();
    let m_b = m.matrix().view((a_dim, a_dim), (b_dim, b_dim)).into_owned();
    let shifted_a = DMatrix::identity(a_dim, a_dim) + m_a * eps;
    let mut predicted = symplectic_spectrum_of(&shifted_a)?;
    predicted.extend(symplectic_spectrum_of(&m_b)?.into_iter().map(|v| v * eps));
    sort_descending(&mut predicted);

    let max_error = exact
        .iter()
        .zip(&predicted)
        .map(|(e, p)| (e - p).abs())
        .fold(0.0, f64::max);
    Ok((predicted, exact, max_error))
}

/// Degenerate-cluster check for `M + εP_A` with `P_A` the projector onto the
/// leading `a_modes` modes (the whole system is allowed). Each distinct
/// symplectic eigenvalue `λ` of `M` must keep its multiplicity inside the
/// window `[λ − Δ/2, λ + Δ/2]` (`Δ` = spectral gap), and the sum of the
/// perturbed values in that window moves by
/// `(ε/2) Σ_ℓ tr[S P_A Sᵀ]^{(ℓ)}` over the cluster's modes, up to `O(ε²)`.
///
/// `predicted`/`exact` list per-mode values; `max_error` compares cluster
/// sums, because individual splittings inside a degenerate cluster are not
/// pinned at first order.
pub fn perturb_check_first_infinitesimal(
    m: &CovarianceMatrix,
    a_modes: usize,
    eps: f64,
) -> Result<PerturbationReport> {
    let (predicted, exact, max_error) = first_infinitesimal_errors(m, a_modes, eps)?;
    let (_, _, half_error) = first_infinitesimal_errors(m, a_modes, eps / 2.0)?;
    Ok(PerturbationReport {
        epsilon: eps,
        predicted,
        exact,
        max_error,
        ratio_at_half_eps: error_ratio(half_error, max_error),
    })
}

fn first_infinitesimal_errors(
    m: &CovarianceMatrix,
    a_modes: usize,
    eps: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    check_epsilon(eps)?;
    check_split(m, a_modes, true)?;
    let n = m.n_modes();

    let dec = williamson(m)?;
    let min_lambda = *dec
        .spectrum
        .last()
        .expect("validated covariance has at least one mode");
    if min_lambda <= 1.0 + PURITY_TOL {
        return Err(Error::PureMode {
            lambda: min_lambda,
            tol: PURITY_TOL,
        });
    }
    let gap = dec.gap;
    if eps >= gap / 10.0 {
        return Err(Error::EpsilonTooLarge { eps, gap });
    }

    let projector = leading_projector(n, a_modes);
    let conjugated = dec.s.matrix() * &projector * dec.s.matrix().transpose();
    let predicted: Vec<f64> = dec
        .spectrum
        .iter()
        .enumerate()
        .map(|(l, &lambda)| {
            let trace = conjugated[(2 * l, 2 * l)] + conjugated[(2 * l + 1, 2 * l + 1)];
            lambda + eps / 2.0 * trace
        })
        .collect();

    let shifted = m.matrix() + projector * eps;
    let exact = symplectic_spectrum_of(&shifted)?;

    let representatives = distinct_values(&dec.spectrum)?;
    let half_window = gap / 2.0;
    let mut max_error = 0.0f64;
    for &rep in &representatives {
        let members: Vec<usize> = (0..n)
            .filter(|&l| nearest_representative(&representatives, dec.spectrum[l]) == rep)
            .collect();
        let in_window: Vec<f64> = exact
            .iter()
            .copied()
            .filter(|v| (v - rep).abs() <= half_window)
            .collect();
        if in_window.len() != members.len() {
            return Err(Error::ClusterMismatch {
                lambda: rep,
                expected: members.len(),
                found: in_window.len(),
            });
        }
        let sum_exact: f64 = in_window.iter().sum();
        let sum_predicted: f64 = members.iter().map(|&l| predicted[l]).sum();
        max_error = max_error.max((sum_exact - sum_predicted).abs());
    }

    let mut predicted = predicted;
    sort_descending(&mut predicted);
    Ok((predicted, exact, max_error))
}

fn nearest_representative(representatives: &[f64], value: f64) -> f64 {
    representatives
        .iter()
        .copied()
        .min_by(|a, b| {
            (a - value)
                .abs()
                .partial_cmp(&(b - value).abs())
                .expect("spectra are finite")
        })
        .expect("at least one representative")
}

/// Recommended perturbation size for [`perturb_check_first_infinitesimal`]:
/// a thousandth of the spectral gap, capped at `1e-3` (the cap also covers
/// fully degenerate spectra, whose gap is infinite).
pub fn suggested_epsilon(m: &CovarianceMatrix) -> Result<f64> {
    let gap = symplectic_gap(&m.symplectic_eigenvalues())?;
    Ok((gap / 1000.0).min(1e-3))
}

/// Deterministic random instance: `m`-mode arms (`X1`/`X2`), `l` environment
/// modes per input (`E1`/`E2`; 0 for none), covariances drawn by
/// [`random_gaussian_covariance`] over [`RANDOM_SPECTRUM_RANGE`]. Draw order
/// from the seeded stream: transmissivity (only under
/// [`LambdaPolicy::Uniform`]), one covariance seed per input, then both
/// displacement vectors.
pub fn random_epi_instance(
    seed: u64,
    m: usize,
    l: usize,
    policy: LambdaPolicy,
) -> Result<EpiInstance> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "arm needs at least one mode".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lambda = match policy {
        LambdaPolicy::Fixed(x) => x,
        LambdaPolicy::Uniform => rng.random::<f64>(),
    };
    let seed1 = rng.random::<u64>();
    let seed2 = rng.random::<u64>();
    let rho1 = random_instance_state(seed1, &mut rng, m, l, "X1", "E1")?;
    let rho2 = random_instance_state(seed2, &mut rng, m, l, "X2", "E2")?;
    EpiInstance::new(rho1, rho2, lambda)
}

fn random_instance_state(
    cov_seed: u64,
    rng: &mut ChaCha8Rng,
    m: usize,
    l: usize,
    arm: &str,
    env: &str,
) -> Result<GaussianState> {
    let cov = random_gaussian_covariance(
        cov_seed,
        m + l,
        RANDOM_SPECTRUM_RANGE,
        RANDOM_SQUEEZE_INTENSITY,
    )?;
    let displacement = DVector::from_fn(2 * (m + l), |_, _| {
        RANDOM_DISPLACEMENT_SCALE * rng.sample::<f64, _>(StandardNormal)
    });
    let mut partition = vec![Block::new(arm, m)];
    if l > 0 {
        partition.push(Block::new(env, l));
    }
    GaussianState::new(cov, displacement, partition)
}

/// One row of an inequality sweep over seeded instances: the gap at `t = 0`,
/// the smallest discrete downward slope of `δ(t)` over
/// [`DEFAULT_TRAJECTORY_GRID`] (nonnegative within tolerance when the
/// trajectory is monotone), and the largest disagreement between the
/// closed-form entropy production rate and a quarter of the conditional
/// Fisher information along the trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub seed: u64,
    pub m: usize,
    pub l: usize,
    pub lambda: f64,
    pub delta0: f64,
    pub min_delta_slope: f64,
    pub max_fisher_residual: f64,
}

/// Evaluate one seeded instance on [`DEFAULT_TRAJECTORY_GRID`].
pub fn sweep_instance(seed: u64, m: usize, l: usize, policy: LambdaPolicy) -> Result<SweepRecord> {
    let inst = random_epi_instance(seed, m, l, policy)?;
    let trajectory = delta_trajectory(&inst, &DEFAULT_TRAJECTORY_GRID)?;
    let delta0 = trajectory[0].1;
    let min_delta_slope = trajectory
        .windows(2)
        .map(|w| (w[0].1 - w[1].1) / (w[1].0 - w[0].0))
        .fold(f64::INFINITY, f64::min);
    let mut max_fisher_residual = 0.0f64;
    for &(t, _) in &trajectory {
        let combined = inst.diffused(t)?.combined()?;
        let arm = combined.partition()[0].name.clone();
        let residual = debruijn_identity_residual(&combined, &[arm.as_str()])?;
        max_fisher_residual = max_fisher_residual.max(residual);
    }
    Ok(SweepRecord {
        seed,
        m,
        l,
        lambda: inst.lambda(),
        delta0,
        min_delta_slope,
        max_fisher_residual,
    })
}
