use crate::error::{Error, Result};

/// A spectral window of the resolvents at `-1`, `θ ∈ (0, 1)`, paired with the
/// corresponding window of the operators, `α = 1/θ − 1 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ThetaAlpha {
    theta: f64,
    alpha: f64,
}

impl ThetaAlpha {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub fn theta_to_alpha(theta: f64) -> Result<ThetaAlpha> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::invalid(format!("theta must lie in (0,1), got {theta}")));
    }
    Ok(ThetaAlpha {
        theta,
        alpha: 1.0 / theta - 1.0,
    })
}

pub fn alpha_to_theta(alpha: f64) -> Result<ThetaAlpha> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok(ThetaAlpha {
        theta: 1.0 / (1.0 + alpha),
        alpha,
    })
}

/// Nonzero eigenvalue `1/(2(λ+1))` of the resolvent difference at `-1`
/// contributed by a fiber value `λ ≥ 0`.
pub fn resolvent_eigenvalue_map(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("fiber eigenvalue must be nonnegative, got {lambda}")));
    }
    Ok(0.5 / (lambda + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let ta = theta_to_alpha(0.5).unwrap();
        assert_eq!(ta.alpha(), 1.0);
        assert_eq!(resolvent_eigenvalue_map(0.0).unwrap(), 0.5);
        let ta = alpha_to_theta(3.0).unwrap();
        assert_eq!(ta.theta(), 0.25);
        assert_eq!(theta_to_alpha(ta.theta()).unwrap().alpha(), 3.0);
    }

    #[test]
    fn out_of_range() {
        for bad in [0.0, 1.0, 1.5, -0.2, f64::NAN] {
            let err = theta_to_alpha(bad).unwrap_err().to_string();
            assert!(err.contains("theta must lie in (0,1)"), "{err}");
        }
        assert!(alpha_to_theta(0.0).is_err());
        assert!(alpha_to_theta(-1.0).is_err());
        assert!(resolvent_eigenvalue_map(-0.1).is_err());
    }

    proptest! {
        #[test]
        fn round_trips(theta in 1e-3f64..0.999) {
            let ta = theta_to_alpha(theta).unwrap();
            prop_assert!((ta.alpha() * ta.theta() + ta.theta() - 1.0).abs() <= 1e-14);
            let back = alpha_to_theta(ta.alpha()).unwrap();
            prop_assert!((back.theta() - theta).abs() <= 1e-14);
        }
    }
}
