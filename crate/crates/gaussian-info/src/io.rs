//! JSON wire format for Gaussian states and numeric formatting helpers for
//! tabular output.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Block, GaussianState};
use crate::symplectic::CovarianceMatrix;

/// Wire form of a state: mode count, row-major covariance, displacement,
/// and an optional named partition (defaulting to one block `X`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateRecord {
    pub n_modes: usize,
    pub covariance: Vec<f64>,
    pub displacement: Vec<f64>,
    #[serde(default)]
    pub partition: Vec<PartitionEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionEntry {
    pub name: String,
    pub n_modes: usize,
}

impl StateRecord {
    pub fn from_state(state: &GaussianState) -> Self {
        let dim = 2 * state.n_modes();
        let mat = state.covariance();
        let covariance = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| mat[(r, c)]))
            .collect();
        Self {
            n_modes: state.n_modes(),
            covariance,
            displacement: state.displacement().iter().copied().collect(),
            partition: state
                .partition()
                .iter()
                .map(|b| PartitionEntry {
                    name: b.name.clone(),
                    n_modes: b.n_modes,
                })
                .collect(),
        }
    }

    /// Validate shapes and physicality and build the state.
    pub fn into_state(self) -> Result<GaussianState> {
        let dim = 2 * self.n_modes;
        if self.covariance.len() != dim * dim {
            return Err(Error::StateFormat(format!(
                "covariance has {} entries; {} modes need {}",
                self.covariance.len(),
                self.n_modes,
                dim * dim
            )));
        }
        if self.displacement.len() != dim {
            return Err(Error::StateFormat(format!(
                "displacement has {} entries; {} modes need {}",
                self.displacement.len(),
                self.n_modes,
                dim
            )));
        }
        let cov = CovarianceMatrix::new(DMatrix::from_row_slice(dim, dim, &self.covariance))?;
        let partition = if self.partition.is_empty() {
            vec![Block::new("X", self.n_modes)]
        } else {
            self.partition
                .into_iter()
                .map(|p| Block::new(p.name, p.n_modes))
                .collect()
        };
        GaussianState::new(cov, DVector::from_vec(self.displacement), partition)
    }
}

pub fn state_to_json(state: &GaussianState) -> String {
    serde_json::to_string_pretty(&StateRecord::from_state(state))
        .expect("state record always serializes")
}

pub fn state_from_json(text: &str) -> Result<GaussianState> {
    let record: StateRecord =
        serde_json::from_str(text).map_err(|e| Error::StateFormat(e.to_string()))?;
    record.into_state()
}

/// Format with `digits` significant digits, plain decimal notation inside
/// a moderate exponent window and scientific notation outside it (the
/// `%.{digits}g` convention, without zero trimming so columns align run to
/// run).
pub fn format_sig(value: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if value == 0.0 {
        return "0".into();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let exponent = value.abs().log10().floor() as i32;
    if exponent < -4 || exponent >= digits as i32 {
        format!("{value:.*e}", digits - 1)
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        format!("{value:.decimals$}")
    }
}
