//! Power-law weight schedules and the two-point Kiefer-Wolfowitz gradient
//! estimator.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::objective::{Objective, ZerothOrderOracle};

/// Consensus, innovation and finite-difference weights
/// `α_k = α₀/(k+1)`, `β_k = β₀/(k+1)^τ`, `c_k = c₀/(k+1)^δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSchedule {
    pub alpha0: f64,
    pub beta0: f64,
    pub c0: f64,
    pub delta: f64,
    pub tau: f64,
}

/// The weights in force at one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepWeights {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

impl WeightSchedule {
    /// Rejects non-positive or non-finite scales. Exponent conditions are
    /// checked separately by [`validate_schedule`].
    pub fn new(alpha0: f64, beta0: f64, c0: f64, delta: f64, tau: f64) -> Result<Self> {
        for (name, v) in [("alpha0", alpha0), ("beta0", beta0), ("c0", c0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("delta", delta), ("tau", tau)] {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(WeightSchedule {
            alpha0,
            beta0,
            c0,
            delta,
            tau,
        })
    }

    /// `α₀ = 1`, `β₀ = 1/θ`, `c₀ = 1`, `δ = 1/4`, `τ = 1/2` for a network of
    /// maximum degree `θ`.
    pub fn reference(max_degree: usize) -> Self {
        WeightSchedule {
            alpha0: 1.0,
            beta0: 1.0 / max_degree.max(1) as f64,
            c0: 1.0,
            delta: 0.25,
            tau: 0.5,
        }
    }

    pub fn at(&self, k: u64) -> StepWeights {
        schedule_values(self, k)
    }

    /// Decay exponent `min{1−2δ, 2−2τ−2δ, 2δ}` of the mean-square error bound.
    pub fn mse_rate_exponent(&self) -> f64 {
        (1.0 - 2.0 * self.delta)
            .min(2.0 - 2.0 * self.tau - 2.0 * self.delta)
            .min(2.0 * self.delta)
    }

    /// Decay exponent `2−2τ−2δ` of the squared disagreement bound.
    pub fn disagreement_rate_exponent(&self) -> f64 {
        2.0 - 2.0 * self.tau - 2.0 * self.delta
    }
}

pub fn schedule_values(s: &WeightSchedule, k: u64) -> StepWeights {
    let t = (k + 1) as f64;
    StepWeights {
        alpha: s.alpha0 / t,
        beta: s.beta0 / t.powf(s.tau),
        c: s.c0 / t.powf(s.delta),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleViolation {
    /// `Σ α_k²/c_k²` diverges: needs `2 − 2δ > 1`.
    Summability { delta: f64 },
    DeltaNotPositive { delta: f64 },
    TauOutOfRange { tau: f64 },
    /// Needs `μ·α₀ < 1`.
    StepTooLarge { mu_alpha0: f64 },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScheduleViolation::Summability { delta } => write!(
                f,
                "summability violated: 2 - 2*delta = {} <= 1 (delta = {delta})",
                2.0 - 2.0 * delta
            ),
            ScheduleViolation::DeltaNotPositive { delta } => {
                write!(f, "delta must be positive, got {delta}")
            }
            ScheduleViolation::TauOutOfRange { tau } => write!(f, "tau = {tau} outside (0, 1)"),
            ScheduleViolation::StepTooLarge { mu_alpha0 } => {
                write!(f, "mu*alpha0 = {mu_alpha0} must be < 1")
            }
        }
    }
}

/// Every condition a schedule failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub violations: Vec<ScheduleViolation>,
}

impl fmt::Display for ScheduleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check the step-size conditions against the strong convexity modulus `mu`.
pub fn validate_schedule(s: &WeightSchedule, mu: f64) -> std::result::Result<(), ScheduleReport> {
    let mut violations = Vec::new();
    if s.delta <= 0.0 {
        violations.push(ScheduleViolation::DeltaNotPositive { delta: s.delta });
    }
    if 2.0 - 2.0 * s.delta <= 1.0 {
        violations.push(ScheduleViolation::Summability { delta: s.delta });
    }
    if !(s.tau > 0.0 && s.tau < 1.0) {
        violations.push(ScheduleViolation::TauOutOfRange { tau: s.tau });
    }
    if mu * s.alpha0 >= 1.0 {
        violations.push(ScheduleViolation::StepTooLarge {
            mu_alpha0: mu * s.alpha0,
        });
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ScheduleReport { violations })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KwGradientEstimate {
    pub value: Vec<f64>,
    pub spacing: f64,
    pub queries: u64,
}

/// Symmetric-difference gradient estimate from `2d` oracle calls.
///
/// Component `j` is `[f̂(x + c e_j) − f̂(x − c e_j)] / (2c)`. Queries go out in
/// dimension order, plus before minus, each with its own noise draw.
pub fn kw_gradient<O: Objective, R: Rng + ?Sized>(
    oracle: &mut ZerothOrderOracle<O>,
    x: &[f64],
    c: f64,
    rng: &mut R,
) -> Result<KwGradientEstimate> {
    if !(c > 0.0) {
        return Err(Error::InvalidSpacing(c));
    }
    oracle.objective().check_dim(x)?;
    let before = oracle.queries();
    let mut probe = x.to_vec();
    let mut value = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        probe[j] = x[j] + c;
        let plus = oracle.query(&probe, rng)?;
        probe[j] = x[j] - c;
        let minus = oracle.query(&probe, rng)?;
        probe[j] = x[j];
        value.push((plus - minus) / (2.0 * c));
    }
    Ok(KwGradientEstimate {
        value,
        spacing: c,
        queries: oracle.queries() - before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{LocalObjective, NoiseModel};
    use crate::rng::{stream, Purpose, StreamKey};
    use nalgebra::{DMatrix, DVector};

    fn reference() -> WeightSchedule {
        WeightSchedule::new(1.0, 1.0 / 7.0, 1.0, 0.25, 0.5).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15 * b.abs().max(1.0)
    }

    #[test]
    fn schedule_examples() {
        let s = reference();
        let w0 = s.at(0);
        assert!(close(w0.alpha, 1.0) && close(w0.beta, 1.0 / 7.0) && close(w0.c, 1.0));
        let w15 = s.at(15);
        assert!(close(w15.alpha, 1.0 / 16.0) && close(w15.beta, 1.0 / 28.0) && close(w15.c, 0.5));
        let w255 = s.at(255);
        assert!(
            close(w255.alpha, 1.0 / 256.0) && close(w255.beta, 1.0 / 112.0) && close(w255.c, 0.25)
        );
    }

    #[test]
    fn schedules_decrease() {
        let s = reference();
        let mut prev = s.at(0);
        for k in 1..2000 {
            let w = s.at(k);
            assert!(w.alpha < prev.alpha && w.beta < prev.beta && w.c < prev.c);
            prev = w;
        }
        assert!(s.at(1_000_000).alpha / s.at(1_000_000).c.powi(2) < 1e-2);
    }

    #[test]
    fn validation_examples() {
        assert_eq!(validate_schedule(&reference(), 0.3), Ok(()));
        let wide = WeightSchedule {
            delta: 0.6,
            ..reference()
        };
        let report = validate_schedule(&wide, 0.3).unwrap_err();
        assert_eq!(report.violations, vec![ScheduleViolation::Summability { delta: 0.6 }]);
        assert!(report.to_string().contains("summability violated"));
        let steep = validate_schedule(&reference(), 2.0).unwrap_err();
        assert_eq!(steep.violations, vec![ScheduleViolation::StepTooLarge { mu_alpha0: 2.0 }]);
    }

    #[test]
    fn validation_lists_every_violation() {
        let bad = WeightSchedule {
            delta: -0.1,
            tau: 1.0,
            ..reference()
        };
        let report = validate_schedule(&bad, 5.0).unwrap_err();
        assert_eq!(report.violations.len(), 3);
        assert!(WeightSchedule::new(0.0, 1.0, 1.0, 0.25, 0.5).is_err());
    }

    #[test]
    fn rate_exponents_at_reference() {
        let s = reference();
        assert_eq!(s.mse_rate_exponent(), 0.5);
        assert_eq!(s.disagreement_rate_exponent(), 0.5);
    }

    #[test]
    fn exact_on_cubic_expansion() {
        // f(x) = x³ is not one of the library objectives; build it inline.
        struct Cubic;
        impl Objective for Cubic {
            fn dim(&self) -> usize {
                1
            }
            fn evaluate(&self, x: &[f64]) -> Result<f64> {
                Ok(x[0].powi(3))
            }
            fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![3.0 * x[0] * x[0]])
            }
            fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
                Ok(DMatrix::from_element(1, 1, 6.0 * x[0]))
            }
        }
        let mut oracle = ZerothOrderOracle::new(Cubic, NoiseModel::noiseless());
        let mut rng = stream(0, StreamKey::new(0, 0, Purpose::Noise));
        let g = kw_gradient(&mut oracle, &[1.0], 0.1, &mut rng).unwrap();
        assert!((g.value[0] - 3.01).abs() < 1e-12);
        assert_eq!(g.queries, 2);
    }

    #[test]
    fn spacing_must_be_positive() {
        let f = LocalObjective::quadratic(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let mut oracle = ZerothOrderOracle::new(&f, NoiseModel::noiseless());
        let mut rng = stream(0, StreamKey::new(0, 0, Purpose::Noise));
        assert!(matches!(
            kw_gradient(&mut oracle, &[0.0, 0.0], 0.0, &mut rng),
            Err(Error::InvalidSpacing(_))
        ));
        assert!(kw_gradient(&mut oracle, &[0.0, 0.0], -1.0, &mut rng).is_err());
        assert_eq!(oracle.queries(), 0);
    }

    #[test]
    fn noise_variance_matches_closed_form() {
        // Var[(v⁺ − v⁻)/(2c)] = 2σ²/(4c²) = σ²/(2c²).
        let f = LocalObjective::quadratic(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        let sigma = 1.5;
        let c = 0.2;
        let mut oracle = ZerothOrderOracle::new(&f, NoiseModel::Gaussian { sigma });
        let mut rng = stream(21, StreamKey::new(0, 0, Purpose::Noise));
        let x = [0.3, -0.4];
        let m = 100_000;
        let samples: Vec<f64> = (0..m)
            .map(|_| kw_gradient(&mut oracle, &x, c, &mut rng).unwrap().value[0])
            .collect();
        let mean = samples.iter().sum::<f64>() / m as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let expected = sigma * sigma / (2.0 * c * c);
        assert!((var / expected - 1.0).abs() < 0.05, "var {var} vs {expected}");
        assert_eq!(oracle.queries(), 4 * m as u64);
    }
}
