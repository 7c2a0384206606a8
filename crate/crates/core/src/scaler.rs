//! Min-max scaling of feature components onto the rotation-angle interval.
//!
//! Fit on training-set features only; transformed test values are clipped
//! back into the interval so an out-of-range component can never wrap
//! around the Bloch sphere.

use crate::encoding::FeatureVector;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    /// Upper end of the target interval [0, target_max]; π by default.
    pub target_max: f64,
}

impl FeatureScaler {
    /// Fit per-component minima and maxima over training feature vectors.
    pub fn fit<'a>(rows: impl Iterator<Item = &'a FeatureVector>, target_max: f64) -> Result<Self> {
        if target_max <= 0.0 || !target_max.is_finite() {
            return Err(Error::Config(format!(
                "scaling interval end must be positive, got {target_max}"
            )));
        }
        let mut mins: Vec<f64> = Vec::new();
        let mut maxs: Vec<f64> = Vec::new();
        let mut seen = 0usize;
        for fv in rows {
            if seen == 0 {
                mins = fv.values.clone();
                maxs = fv.values.clone();
            } else {
                if fv.len() != mins.len() {
                    return Err(Error::Validation(format!(
                        "feature width changed from {} to {}",
                        mins.len(),
                        fv.len()
                    )));
                }
                for (i, &v) in fv.values.iter().enumerate() {
                    mins[i] = mins[i].min(v);
                    maxs[i] = maxs[i].max(v);
                }
            }
            seen += 1;
        }
        if seen == 0 {
            return Err(Error::Degenerate("no feature rows to fit scaler".into()));
        }
        Ok(FeatureScaler {
            mins,
            maxs,
            target_max,
        })
    }

    /// Affine map onto [0, target_max], clipped. A constant training
    /// component (max == min) maps to the interval midpoint.
    pub fn transform(&self, features: &FeatureVector) -> Result<FeatureVector> {
        if features.len() != self.mins.len() {
            return Err(Error::Validation(format!(
                "feature width {} != fitted width {}",
                features.len(),
                self.mins.len()
            )));
        }
        let values: Vec<f64> = features
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let range = self.maxs[i] - self.mins[i];
                if range == 0.0 {
                    return self.target_max / 2.0;
                }
                ((v - self.mins[i]) / range * self.target_max).clamp(0.0, self.target_max)
            })
            .collect();
        let mut out = features.clone();
        out.values = values;
        Ok(out)
    }
}
