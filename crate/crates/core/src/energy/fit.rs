use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use super::ScmCoefficients;

/// One characterization point: port width and capacity in bytes, energy in fJ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmSample {
    pub width: f64,
    pub capacity: f64,
    pub energy: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("samples do not determine all three coefficients")]
    RankDeficient,
    #[error("sample {0} is not finite")]
    NonFinite(usize),
}

fn features(s: &ScmSample) -> Vector3<f64> {
    Vector3::new(s.width, s.width * s.capacity, s.capacity)
}

/// Least-squares fit of `energy = a·W + b·W·K + c·K`.
///
/// Solves the normal equations on unit-norm columns, then refines once against the
/// unscaled residual.
pub fn fit_scm_coefficients(samples: &[ScmSample]) -> Result<ScmCoefficients, FitError> {
    if samples.len() < 3 {
        return Err(FitError::TooFewSamples(samples.len()));
    }
    if let Some(i) = samples
        .iter()
        .position(|s| !(s.width.is_finite() && s.capacity.is_finite() && s.energy.is_finite()))
    {
        return Err(FitError::NonFinite(i));
    }

    let mut scale = Vector3::zeros();
    for s in samples {
        scale += features(s).component_mul(&features(s));
    }
    if scale.iter().any(|v| *v == 0.0) {
        return Err(FitError::RankDeficient);
    }
    let scale = scale.map(|v| 1.0 / v.sqrt());

    let mut gram = Matrix3::zeros();
    for s in samples {
        let x = features(s).component_mul(&scale);
        gram += x * x.transpose();
    }
    let singular = gram.singular_values();
    if singular.min() <= singular.max() * 1e-13 {
        return Err(FitError::RankDeficient);
    }
    let lu = gram.lu();

    let solve_rhs = |residual: &dyn Fn(&ScmSample) -> f64| -> Option<Vector3<f64>> {
        let mut rhs = Vector3::zeros();
        for s in samples {
            rhs += features(s).component_mul(&scale) * residual(s);
        }
        lu.solve(&rhs)
    };

    let mut coef = solve_rhs(&|s| s.energy).ok_or(FitError::RankDeficient)?;
    let current = coef;
    let correction = solve_rhs(&|s| s.energy - features(s).component_mul(&scale).dot(&current))
        .ok_or(FitError::RankDeficient)?;
    coef += correction;
    let coef = coef.component_mul(&scale);
    Ok(ScmCoefficients {
        a: coef[0],
        b: coef[1],
        c: coef[2],
    })
}

/// Sum of squared residuals of `coef` over `samples`.
pub fn residual_norm_sq(coef: &ScmCoefficients, samples: &[ScmSample]) -> f64 {
    samples
        .iter()
        .map(|s| (s.energy - coef.eval(s.width, s.capacity)).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::ScmEnergyModel;

    fn grid(coef: &ScmCoefficients) -> Vec<ScmSample> {
        let mut out = Vec::new();
        for w in [8.0, 16.0, 32.0, 64.0] {
            for k in [256.0, 1024.0, 4096.0] {
                out.push(ScmSample {
                    width: w,
                    capacity: k,
                    energy: coef.eval(w, k),
                });
            }
        }
        out
    }

    #[test]
    fn exact_recovery() {
        let truth = ScmEnergyModel::reconciled().read;
        let fit = fit_scm_coefficients(&grid(&truth)).unwrap();
        for (got, want) in [(fit.a, truth.a), (fit.b, truth.b), (fit.c, truth.c)] {
            assert!(((got - want) / want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn too_few_and_degenerate() {
        let truth = ScmEnergyModel::reconciled().write;
        let samples = grid(&truth);
        assert_eq!(
            fit_scm_coefficients(&samples[..2]),
            Err(FitError::TooFewSamples(2))
        );
        let same_width: Vec<_> = samples.iter().filter(|s| s.width == 8.0).copied().collect();
        assert_eq!(
            fit_scm_coefficients(&same_width),
            Err(FitError::RankDeficient)
        );
    }
}
