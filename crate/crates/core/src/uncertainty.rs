//! Per-point uncertainty of the power and service maps, normalized to [0, 1].

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{invalid, Result, SurveyError};
use crate::estimator::PosteriorState;

/// Probabilities are kept this far away from 0 and 1 before taking logs.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Power,
    Service,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyField {
    pub values: Vec<f64>,
    pub kind: MapKind,
}

impl UncertaintyField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Posterior variance normalized by the prior variance.
pub fn power_uncertainty(
    state: &PosteriorState,
    params: &ChannelParams,
) -> Result<UncertaintyField> {
    let prior = params.prior_var();
    if prior.is_nan() || prior <= 0.0 {
        return Err(invalid(
            "shadow_var",
            "power uncertainty needs a positive prior variance",
        ));
    }
    Ok(UncertaintyField {
        values: state
            .cov
            .diagonal()
            .iter()
            .map(|v| (v / prior).clamp(0.0, 1.0))
            .collect(),
        kind: MapKind::Power,
    })
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let q = 1.0 - p;
    -(p * p.log2() + q * q.log2())
}

/// Posterior entropy of the service indicator at each point.
pub fn service_uncertainty(p: &[f64]) -> UncertaintyField {
    UncertaintyField {
        values: p.iter().map(|&pj| binary_entropy(pj)).collect(),
        kind: MapKind::Service,
    }
}

/// Combines per-transmitter fields point by point.
pub fn aggregate(fields: &[UncertaintyField], mode: Aggregation) -> Result<UncertaintyField> {
    let first = fields
        .first()
        .ok_or(SurveyError::Empty("uncertainty fields"))?;
    let n = first.len();
    if let Some(bad) = fields.iter().find(|f| f.len() != n) {
        return Err(SurveyError::LengthMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let values = (0..n)
        .map(|j| {
            let it = fields.iter().map(|f| f.values[j]);
            match mode {
                Aggregation::Max => it.fold(f64::NEG_INFINITY, f64::max),
                Aggregation::Mean => it.sum::<f64>() / fields.len() as f64,
            }
        })
        .collect();
    Ok(UncertaintyField {
        values,
        kind: first.kind,
    })
}

/// Spatial average of the field.
pub fn total_uncertainty(field: &UncertaintyField) -> f64 {
    if field.is_empty() {
        return 0.0;
    }
    field.values.iter().sum::<f64>() / field.len() as f64
}
