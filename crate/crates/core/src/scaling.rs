//! Critical exponents, lifespan scaling-law predictions, and least-squares
//! fits of measured lifespans against them.
//!
//! Blow-up theory on a graph with volume growth Vol(B(x₀,r)) ~ rⁿ and
//! distance-Laplacian decay order ν predicts how the lifespan T_ε of small
//! data scales as the data size ε → 0:
//!
//! * scalar, subcritical (n(p−1) < 1+ν):  T_ε ~ ε^{−(1+ν)(p−1)/((1+ν)−n(p−1))}
//!   — a power law, slope −2(p−1)/(2−n(p−1)) when ν = 1;
//! * scalar, critical (n(p−1) = 1+ν):     log T_ε ~ ε^{−(p−1)} — exponential;
//! * system with exponents (p, q): the same dichotomy driven by
//!   Γ(p,q) = (max{p,q}+1)/(pq−1) against n/(1+ν): subcritical slope
//!   −(1+ν)/((1+ν)Γ−n), critical κ = p−1 when p = q and max{p,q}/Γ otherwise;
//! * supercritical: nothing is predicted (no-prediction error).
//!
//! Fits are plain least squares in the model's linearizing coordinates:
//! (log ε, log T) for power laws, (ε^{−κ}, log T) for exponential laws.

use crate::error::ScalingError;
use crate::solver::ProblemKind;
use serde::Serialize;

/// Result of a straight-line least-squares fit y ≈ slope·x + intercept.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares for y against x. Needs ≥ 2 points and nonconstant x.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit, ScalingError> {
    assert_eq!(xs.len(), ys.len(), "x/y length mismatch");
    let n = xs.len();
    if n < 2 {
        return Err(ScalingError::InsufficientData { need: 2, got: n });
    }
    let xbar = xs.iter().sum::<f64>() / n as f64;
    let ybar = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if sxx == 0.0 {
        return Err(ScalingError::DegenerateFit(
            "all x values identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..n {
        let fit = slope * xs[i] + intercept;
        ss_res += (ys[i] - fit) * (ys[i] - fit);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res.abs() < 1e-30 {
        1.0
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Γ(p, q) = (max{p,q} + 1)/(pq − 1), the system's critical quantity.
pub fn gamma(p: f64, q: f64) -> Result<f64, ScalingError> {
    if p * q <= 1.0 {
        return Err(ScalingError::GammaDomain { p, q });
    }
    Ok((p.max(q) + 1.0) / (p * q - 1.0))
}

/// The Fujita exponent 1 + 2/n.
pub fn fujita(n: usize) -> f64 {
    1.0 + 2.0 / n as f64
}

/// Which scaling law the theory predicts for the lifespan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LifespanModel {
    /// T_ε ~ ε^slope (slope < 0); fit log T against log ε.
    Power { slope: f64 },
    /// log T_ε ~ C·ε^{−κ}; fit log T against ε^{−κ}.
    Exponential { kappa: f64 },
}

const CRITICAL_TOL: f64 = 1e-9;

/// Predicts the lifespan scaling model for data on a graph with volume-growth
/// exponent `n` and decay order `nu`. `q` is only read for systems (defaults
/// to p if absent). Supercritical parameters yield a no-prediction error —
/// the theory proves nothing there.
pub fn predicted_lifespan_model(
    kind: ProblemKind,
    n: usize,
    nu: f64,
    p: f64,
    q: Option<f64>,
) -> Result<LifespanModel, ScalingError> {
    let one_nu = 1.0 + nu;
    match kind {
        ProblemKind::Scalar | ProblemKind::ScalarDoubleDamping => {
            let margin = one_nu - n as f64 * (p - 1.0);
            if margin > CRITICAL_TOL {
                Ok(LifespanModel::Power {
                    slope: -one_nu * (p - 1.0) / margin,
                })
            } else if margin.abs() <= CRITICAL_TOL {
                Ok(LifespanModel::Exponential { kappa: p - 1.0 })
            } else {
                Err(ScalingError::NoPrediction(format!(
                    "scalar p={p} on volume growth n={n}: n(p-1) = {} exceeds 1+nu = {one_nu}",
                    n as f64 * (p - 1.0)
                )))
            }
        }
        ProblemKind::System => {
            let q = q.unwrap_or(p);
            let g = gamma(p, q)?;
            let margin = one_nu * g - n as f64;
            if margin > CRITICAL_TOL {
                Ok(LifespanModel::Power {
                    slope: -one_nu / margin,
                })
            } else if margin.abs() <= CRITICAL_TOL {
                let kappa = if (p - q).abs() <= CRITICAL_TOL {
                    p - 1.0
                } else {
                    p.max(q) / g
                };
                Ok(LifespanModel::Exponential { kappa })
            } else {
                Err(ScalingError::NoPrediction(format!(
                    "system (p,q)=({p},{q}): (1+nu)Γ = {} is below n = {n}",
                    one_nu * g
                )))
            }
        }
    }
}

/// A fitted scaling law with the prediction it was measured against.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub model: LifespanModel,
    /// Fitted slope in the linearizing coordinates.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// The theory's slope (power model only; exponential laws predict the
    /// shape, not the constant).
    pub predicted_slope: Option<f64>,
    pub relative_error: Option<f64>,
    pub points: usize,
}

/// Minimum record count for a meaningful scaling fit.
pub const MIN_FIT_POINTS: usize = 5;

/// Fits `(ε, T)` records in the model's linearizing coordinates.
pub fn fit_scaling(records: &[(f64, f64)], model: LifespanModel) -> Result<ScalingFit, ScalingError> {
    for &(eps, t) in records {
        if !(eps > 0.0) || !(t > 0.0) || !eps.is_finite() || !t.is_finite() {
            return Err(ScalingError::DegenerateFit(format!(
                "record (eps={eps}, T={t}) is not positive finite"
            )));
        }
    }
    if records.len() < MIN_FIT_POINTS {
        return Err(ScalingError::InsufficientData {
            need: MIN_FIT_POINTS,
            got: records.len(),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = match model {
        LifespanModel::Power { .. } => records.iter().map(|&(e, t)| (e.ln(), t.ln())).unzip(),
        LifespanModel::Exponential { kappa } => records
            .iter()
            .map(|&(e, t)| (e.powf(-kappa), t.ln()))
            .unzip(),
    };
    let fit = linear_fit(&xs, &ys)?;
    let predicted_slope = match model {
        LifespanModel::Power { slope } => Some(slope),
        LifespanModel::Exponential { .. } => None,
    };
    let relative_error = predicted_slope.map(|p| (fit.slope - p).abs() / p.abs());
    Ok(ScalingFit {
        model,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        predicted_slope,
        relative_error,
        points: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_closed_forms() {
        assert_eq!(gamma(2.0, 3.0).unwrap(), 4.0 / 5.0);
        // Γ(p,p) = 1/(p−1)
        for p in [1.5, 2.0, 3.0, 4.5] {
            assert!((gamma(p, p).unwrap() - 1.0 / (p - 1.0)).abs() < 1e-15);
        }
        // symmetric
        assert_eq!(gamma(2.0, 3.0).unwrap(), gamma(3.0, 2.0).unwrap());
        assert!(matches!(
            gamma(0.5, 1.0),
            Err(ScalingError::GammaDomain { .. })
        ));
    }

    #[test]
    fn fujita_values() {
        assert_eq!(fujita(1), 3.0);
        assert_eq!(fujita(2), 2.0);
        assert!(fujita(100) > 1.0 && fujita(100) < fujita(99));
    }

    #[test]
    fn scalar_predictions() {
        // n=1, p=2, ν=1: slope −2(p−1)/(2−n(p−1)) = −2.
        match predicted_lifespan_model(ProblemKind::Scalar, 1, 1.0, 2.0, None).unwrap() {
            LifespanModel::Power { slope } => assert!((slope + 2.0).abs() < 1e-12),
            other => panic!("expected power law, got {other:?}"),
        }
        // n=1, p=3 is critical (p_Fuj(1) = 3): exponential with κ = 2.
        match predicted_lifespan_model(ProblemKind::Scalar, 1, 1.0, 3.0, None).unwrap() {
            LifespanModel::Exponential { kappa } => assert_eq!(kappa, 2.0),
            other => panic!("expected exponential law, got {other:?}"),
        }
        // n=1, p=4 is supercritical: no prediction.
        assert!(matches!(
            predicted_lifespan_model(ProblemKind::Scalar, 1, 1.0, 4.0, None),
            Err(ScalingError::NoPrediction(_))
        ));
    }

    #[test]
    fn system_predictions() {
        // n=1, p=q=2: Γ = 1 > 1/2 → power slope −1/(Γ − n/2) = −2.
        match predicted_lifespan_model(ProblemKind::System, 1, 1.0, 2.0, Some(2.0)).unwrap() {
            LifespanModel::Power { slope } => assert!((slope + 2.0).abs() < 1e-12),
            other => panic!("expected power law, got {other:?}"),
        }
        // n=2, p=q=2: Γ = 1 = n/2 → critical, κ = p−1 = 1.
        match predicted_lifespan_model(ProblemKind::System, 2, 1.0, 2.0, Some(2.0)).unwrap() {
            LifespanModel::Exponential { kappa } => assert_eq!(kappa, 1.0),
            other => panic!("expected exponential law, got {other:?}"),
        }
        // n=2, unequal critical pair needs Γ = 1, i.e. max{p,q}+1 = pq−1:
        // p=3, q=5/3 gives pq−1 = 4 = max+1 ✓, and κ = max{p,q}/Γ = 3.
        match predicted_lifespan_model(ProblemKind::System, 2, 1.0, 3.0, Some(5.0 / 3.0)).unwrap()
        {
            LifespanModel::Exponential { kappa } => assert!((kappa - 3.0).abs() < 1e-9),
            other => panic!("expected exponential law, got {other:?}"),
        }
        // n=2, (4,4): Γ = 1/3 < 1 → supercritical.
        assert!(matches!(
            predicted_lifespan_model(ProblemKind::System, 2, 1.0, 4.0, Some(4.0)),
            Err(ScalingError::NoPrediction(_))
        ));
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let records: Vec<(f64, f64)> = (1..=8)
            .map(|k| {
                let eps = 0.05 * 1.3f64.powi(k);
                (eps, eps.powf(-2.0))
            })
            .collect();
        let fit = fit_scaling(&records, LifespanModel::Power { slope: -2.0 }).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
        assert!(fit.relative_error.unwrap() < 1e-9);
    }

    #[test]
    fn exact_exponential_law_is_recovered() {
        let records: Vec<(f64, f64)> = (1..=6)
            .map(|k| {
                let eps = 0.5 + 0.1 * k as f64;
                (eps, (3.0 * eps.powf(-2.0)).exp())
            })
            .collect();
        let fit = fit_scaling(&records, LifespanModel::Exponential { kappa: 2.0 }).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9, "slope {}", fit.slope);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
        assert!(fit.predicted_slope.is_none());
    }

    #[test]
    fn fit_guards() {
        let few = vec![(0.1, 10.0); 4];
        assert!(matches!(
            fit_scaling(&few, LifespanModel::Power { slope: -2.0 }),
            Err(ScalingError::InsufficientData { .. })
        ));
        let bad = vec![(0.1, -1.0); 6];
        assert!(matches!(
            fit_scaling(&bad, LifespanModel::Power { slope: -2.0 }),
            Err(ScalingError::DegenerateFit(_))
        ));
        let constant_x = vec![(0.1, 1.0), (0.1, 2.0), (0.1, 3.0), (0.1, 4.0), (0.1, 5.0)];
        assert!(matches!(
            fit_scaling(&constant_x, LifespanModel::Power { slope: -2.0 }),
            Err(ScalingError::DegenerateFit(_))
        ));
    }
}
