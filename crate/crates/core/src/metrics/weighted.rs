use super::MetricsError;
use crate::model::{Pattern, SbInstance, WeightConfig};
use crate::scalar::Scalar;

/// `Σ w·m / Σ w` over the eight patterns; lands in `[0, 1]` for metrics in
/// range.
pub fn weighted_score<T: Scalar>(instance: &SbInstance<T>, weights: &WeightConfig<T>) -> Result<T, MetricsError> {
    let mut num = T::zero();
    let mut den = T::zero();
    for p in Pattern::ALL {
        let w = weights.get(p).ok_or(MetricsError::MissingWeight(p))?;
        num = num + w * instance.value(p);
        den = den + w;
    }
    Ok(if den == T::zero() { T::zero() } else { num / den })
}

pub fn weighted_scores<T: Scalar>(instances: &[SbInstance<T>], weights: &WeightConfig<T>) -> Result<Vec<T>, MetricsError> {
    if let Some(p) = weights.missing() {
        return Err(MetricsError::MissingWeight(p));
    }
    instances.iter().map(|i| weighted_score(i, weights)).collect()
}
