use crate::features::FeatureVector;
use crate::scalar::Real;

use super::{ClassifyError, Result};

/// `exp(-gamma * |a - b|^2)` for binary vectors.
pub fn rbf_kernel<F: Real>(a: &FeatureVector, b: &FeatureVector, gamma: F) -> Result<F> {
    if a.dim() != b.dim() {
        return Err(ClassifyError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok((-gamma * F::from_count(a.squared_distance(b) as u64)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors_have_unit_similarity() {
        let a = FeatureVector::new(5, vec![0, 2, 4]);
        assert_eq!(rbf_kernel(&a, &a, 0.7f64).unwrap(), 1.0);
    }

    #[test]
    fn distance_two() {
        let a = FeatureVector::new(3, vec![0]);
        let b = FeatureVector::new(3, vec![1]);
        let k = rbf_kernel(&a, &b, 0.5f64).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);
        let k32 = rbf_kernel(&a, &b, 0.5f32).unwrap();
        assert!((k32 - (-1.0f32).exp()).abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = FeatureVector::new(3, vec![0]);
        let b = FeatureVector::new(4, vec![0]);
        assert!(matches!(
            rbf_kernel(&a, &b, 1.0f64),
            Err(ClassifyError::DimensionMismatch { .. })
        ));
    }
}
