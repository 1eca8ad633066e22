//! Entanglement-assisted capacity bounds for the additive-noise channel
//! `ρ ↦ tr_E[U_λ (ρ ⊗ σ_E) U_λ†]`.
//!
//! Three quantities are computed per channel point: the exact thermal-input
//! capacity ([`holevo_werner_capacity`]), the entropy-power-inequality upper
//! bound ([`epi_capacity_bound`], valid for any Gaussian environment
//! entropy), and the maximum-output-entropy bound ([`naive_capacity_bound`]).
//! For thermal environments they satisfy `C_E ≤ epi ≤ naive` pointwise.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::g_function;

/// Tolerance within which a supplied environment entropy counts as thermal.
const THERMAL_ENTROPY_TOL: f64 = 1e-12;

/// One channel configuration: transmissivity `λ`, input mean photon number
/// `N`, environment mean photon number `N_E`, and environment entropy `S_E`
/// in nats (equal to `g(N_E)` for thermal environments).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    lambda: f64,
    n: f64,
    n_e: f64,
    s_e: f64,
}

impl ChannelParams {
    /// Channel with a thermal environment: `S_E = g(N_E)`.
    pub fn thermal(lambda: f64, n: f64, n_e: f64) -> Result<Self> {
        let s_e = g_function(n_e)?;
        Self::with_environment_entropy(lambda, n, n_e, s_e)
    }

    /// Channel with an explicit Gaussian environment entropy.
    pub fn with_environment_entropy(lambda: f64, n: f64, n_e: f64, s_e: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidTransmissivity(lambda));
        }
        for (name, value) in [("N", n), ("N_E", n_e), ("S_E", s_e)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeInput { name, value });
            }
        }
        Ok(Self { lambda, n, n_e, s_e })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn n_e(&self) -> f64 {
        self.n_e
    }

    pub fn s_e(&self) -> f64 {
        self.s_e
    }

    /// Output mean photon number `N_max = λN + (1−λ)N_E`.
    pub fn n_max(&self) -> f64 {
        self.lambda * self.n + (1.0 - self.lambda) * self.n_e
    }

    fn require_thermal_environment(&self) -> Result<()> {
        let thermal = g_function(self.n_e).expect("validated N_E is nonnegative");
        if (self.s_e - thermal).abs() > THERMAL_ENTROPY_TOL {
            return Err(Error::NonThermalEnvironment {
                s_env: self.s_e,
                thermal,
            });
        }
        Ok(())
    }
}

/// Entropy-power-inequality upper bound on the entanglement-assisted
/// capacity: `g(N_max) + λ·g(N) − (1−λ)·S_E`. Valid for any Gaussian
/// environment with entropy `S_E`.
pub fn epi_capacity_bound(p: &ChannelParams) -> Result<f64> {
    Ok(g_function(p.n_max())? + p.lambda * g_function(p.n)? - (1.0 - p.lambda) * p.s_e)
}

/// Twice the maximum output entropy, `2·g(N_max)`: the bound that ignores
/// the environment entirely.
pub fn naive_capacity_bound(p: &ChannelParams) -> Result<f64> {
    Ok(2.0 * g_function(p.n_max())?)
}

/// Exact entanglement-assisted capacity of the thermal-noise channel at
/// thermal input `N`:
/// `g(N) + g(N_max) − g((D+N_max−N−1)/2) − g((D−N_max+N−1)/2)` with
/// `D = √((N+N_max+1)² − 4λN(N+1))`. Refuses non-thermal environment
/// entropies, for which this closed form does not apply.
pub fn holevo_werner_capacity(p: &ChannelParams) -> Result<f64> {
    p.require_thermal_environment()?;
    let n_max = p.n_max();
    let d = ((p.n + n_max + 1.0).powi(2) - 4.0 * p.lambda * p.n * (p.n + 1.0)).sqrt();
    Ok(g_function(p.n)? + g_function(n_max)?
        - g_function((d + n_max - p.n - 1.0) / 2.0)?
        - g_function((d - n_max + p.n - 1.0) / 2.0)?)
}

/// One row of a capacity sweep, in nats.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SweepRecord {
    pub lambda: f64,
    pub n: f64,
    pub n_e: f64,
    pub c_e_exact: f64,
    pub epi_bound: f64,
    pub naive_bound: f64,
}

impl SweepRecord {
    /// Worst violation of the thermal-case ordering
    /// `C_E ≤ epi_bound ≤ naive_bound` (nonpositive when the ordering
    /// holds).
    pub fn ordering_violation(&self) -> f64 {
        (self.c_e_exact - self.epi_bound).max(self.epi_bound - self.naive_bound)
    }
}

/// Evaluate all three capacity quantities on the Cartesian grid
/// `lambda_grid × n_grid` at a fixed thermal environment `N_E`. Rows are
/// ordered by `lambda` index, then `n` index.
pub fn capacity_sweep(
    lambda_grid: &[f64],
    n_grid: &[f64],
    n_e: f64,
) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::with_capacity(lambda_grid.len() * n_grid.len());
    for &lambda in lambda_grid {
        for &n in n_grid {
            let p = ChannelParams::thermal(lambda, n, n_e)?;
            let record = SweepRecord {
                lambda,
                n,
                n_e,
                c_e_exact: holevo_werner_capacity(&p)?,
                epi_bound: epi_capacity_bound(&p)?,
                naive_bound: naive_capacity_bound(&p)?,
            };
            debug_assert!(
                record.ordering_violation() <= 1e-9,
                "bound ordering violated at lambda={lambda}, N={n}, N_E={n_e}: {}",
                record.ordering_violation()
            );
            records.push(record);
        }
    }
    Ok(records)
}

/// Convert an entropy or capacity from nats to bits.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
