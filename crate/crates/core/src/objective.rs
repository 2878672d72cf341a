//! Local cost functions, the noisy zeroth-order oracle, the synthetic
//! logistic-regression instance generator, and a ground-truth solver.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::graph::symmetric_eigenvalues;

/// A smooth, strongly convex function of a `dim()`-vector.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            })
        }
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        (**self).evaluate(x)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        (**self).hessian(x)
    }
}

/// `½ xᵀAx − bᵀx` with `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

/// ℓ2-regularized logistic loss over a node's local datapoints.
///
/// The optimization variable is `(w, x0)` with the intercept `x0` stored as
/// the last coordinate, so `dim = feature_dim + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticL2 {
    /// Row-major `n × feature_dim`.
    features: Vec<f64>,
    labels: Vec<f64>,
    feature_dim: usize,
    kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalObjective {
    Quadratic(Quadratic),
    LogisticL2(LogisticL2),
}

impl LocalObjective {
    pub fn quadratic(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.len() || b.is_empty() {
            return Err(Error::InvalidSpec(format!(
                "quadratic needs a square A matching b, got {}x{} and {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        let spectrum = symmetric_eigenvalues(&a)?;
        if spectrum[0] <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "quadratic A is not positive definite (smallest eigenvalue {})",
                spectrum[0]
            )));
        }
        Ok(LocalObjective::Quadratic(Quadratic { a, b }))
    }

    /// `features` holds one row per datapoint; `labels` must be ±1.
    pub fn logistic(features: Vec<Vec<f64>>, labels: Vec<f64>, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidSpec(format!("kappa must be positive, got {kappa}")));
        }
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::InvalidSpec(format!(
                "logistic objective needs matching nonempty features/labels, got {} and {}",
                features.len(),
                labels.len()
            )));
        }
        let feature_dim = features[0].len();
        if features.iter().any(|row| row.len() != feature_dim) {
            return Err(Error::InvalidSpec("ragged feature rows".into()));
        }
        if let Some(bad) = labels.iter().find(|&&b| b != 1.0 && b != -1.0) {
            return Err(Error::InvalidSpec(format!("label {bad} is not ±1")));
        }
        Ok(LocalObjective::LogisticL2(LogisticL2 {
            features: features.into_iter().flatten().collect(),
            labels,
            feature_dim,
            kappa,
        }))
    }

    /// `(μ, L)` with `μ I ⪯ ∇²f(x) ⪯ L I` for every `x`.
    pub fn strong_convexity_bounds(&self) -> (f64, f64) {
        match self {
            LocalObjective::Quadratic(q) => {
                let spectrum = symmetric_eigenvalues(&q.a).expect("validated at construction");
                (spectrum[0], spectrum[spectrum.len() - 1])
            }
            LocalObjective::LogisticL2(l) => {
                let aug = l.augmented();
                let gram = aug.transpose() * &aug;
                let spectrum = symmetric_eigenvalues(&gram).expect("Gram matrix is symmetric");
                (l.kappa, l.kappa + 0.25 * spectrum[spectrum.len() - 1])
            }
        }
    }

    /// The closed-form minimizer, for quadratics.
    pub fn quadratic_minimizer(&self) -> Option<Vec<f64>> {
        match self {
            LocalObjective::Quadratic(q) => q
                .a
                .clone()
                .cholesky()
                .map(|c| c.solve(&q.b).iter().copied().collect()),
            LocalObjective::LogisticL2(_) => None,
        }
    }

    pub fn as_logistic(&self) -> Option<&LogisticL2> {
        match self {
            LocalObjective::LogisticL2(l) => Some(l),
            LocalObjective::Quadratic(_) => None,
        }
    }
}

impl Quadratic {
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticL2 {
    pub fn num_points(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn features(&self, point: usize) -> &[f64] {
        &self.features[point * self.feature_dim..(point + 1) * self.feature_dim]
    }

    /// Rows `(a_j, 1)`.
    fn augmented(&self) -> DMatrix<f64> {
        let n = self.num_points();
        DMatrix::from_fn(n, self.feature_dim + 1, |r, c| {
            if c < self.feature_dim {
                self.features(r)[c]
            } else {
                1.0
            }
        })
    }

    fn margin(&self, point: usize, x: &[f64]) -> f64 {
        let w = &x[..self.feature_dim];
        let dot: f64 = self.features(point).iter().zip(w).map(|(a, w)| a * w).sum();
        dot + x[self.feature_dim]
    }

    /// Gradient of the unregularized loss on a single datapoint.
    pub fn point_loss_gradient(&self, point: usize, x: &[f64]) -> Vec<f64> {
        let b = self.labels[point];
        let scale = -b * sigmoid(-b * self.margin(point, x));
        let mut g: Vec<f64> = self.features(point).iter().map(|a| scale * a).collect();
        g.push(scale);
        g
    }
}

impl Objective for LocalObjective {
    fn dim(&self) -> usize {
        match self {
            LocalObjective::Quadratic(q) => q.b.len(),
            LocalObjective::LogisticL2(l) => l.feature_dim + 1,
        }
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match self {
            LocalObjective::Quadratic(q) => {
                let d = x.len();
                let mut quad = 0.0;
                for i in 0..d {
                    let row: f64 = (0..d).map(|j| q.a[(i, j)] * x[j]).sum();
                    quad += x[i] * row;
                }
                let lin: f64 = q.b.iter().zip(x).map(|(b, x)| b * x).sum();
                0.5 * quad - lin
            }
            LocalObjective::LogisticL2(l) => {
                let loss: f64 = (0..l.num_points())
                    .map(|j| softplus(-l.labels[j] * l.margin(j, x)))
                    .sum();
                let norm_sq: f64 = x.iter().map(|v| v * v).sum();
                loss + 0.5 * l.kappa * norm_sq
            }
        })
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(match self {
            LocalObjective::Quadratic(q) => {
                let d = x.len();
                (0..d)
                    .map(|i| (0..d).map(|j| q.a[(i, j)] * x[j]).sum::<f64>() - q.b[i])
                    .collect()
            }
            LocalObjective::LogisticL2(l) => {
                let mut g: Vec<f64> = x.iter().map(|v| l.kappa * v).collect();
                for j in 0..l.num_points() {
                    for (gi, pi) in g.iter_mut().zip(l.point_loss_gradient(j, x)) {
                        *gi += pi;
                    }
                }
                g
            }
        })
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(x)?;
        Ok(match self {
            LocalObjective::Quadratic(q) => q.a.clone(),
            LocalObjective::LogisticL2(l) => {
                let d = l.feature_dim + 1;
                let mut h = DMatrix::identity(d, d) * l.kappa;
                let aug = l.augmented();
                for j in 0..l.num_points() {
                    let s = sigmoid(l.margin(j, x));
                    let row = aug.row(j);
                    h += row.transpose() * row * (s * (1.0 - s));
                }
                h
            }
        })
    }
}

/// The average `(1/N) Σ f_i`, summed in index order starting from `f_0`.
#[derive(Debug, Clone, Copy)]
pub struct MeanObjective<'a> {
    parts: &'a [LocalObjective],
}

impl<'a> MeanObjective<'a> {
    pub fn new(parts: &'a [LocalObjective]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidSpec("mean of zero objectives".into()))?;
        if let Some(p) = parts.iter().find(|p| p.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                got: p.dim(),
            });
        }
        Ok(MeanObjective { parts })
    }

    pub fn parts(&self) -> &'a [LocalObjective] {
        self.parts
    }
}

impl Objective for MeanObjective<'_> {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let mut total = self.parts[0].evaluate(x)?;
        for p in &self.parts[1..] {
            total += p.evaluate(x)?;
        }
        Ok(total / self.parts.len() as f64)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut total = self.parts[0].gradient(x)?;
        for p in &self.parts[1..] {
            for (t, g) in total.iter_mut().zip(p.gradient(x)?) {
                *t += g;
            }
        }
        let n = self.parts.len() as f64;
        Ok(total.into_iter().map(|t| t / n).collect())
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let mut total = self.parts[0].hessian(x)?;
        for p in &self.parts[1..] {
            total += p.hessian(x)?;
        }
        Ok(total / self.parts.len() as f64)
    }
}

/// Additive measurement noise of the zeroth-order oracle. All variants are
/// zero-mean Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Variance `sigma²`, independent of the query point.
    Gaussian { sigma: f64 },
    /// Variance `c_f·‖x‖² + sigma²` at query point `x`.
    StateScaled { sigma: f64, c_f: f64 },
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel::Gaussian { sigma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let (sigma, c_f) = match *self {
            NoiseModel::Gaussian { sigma } => (sigma, 0.0),
            NoiseModel::StateScaled { sigma, c_f } => (sigma, c_f),
        };
        if sigma >= 0.0 && c_f >= 0.0 && sigma.is_finite() && c_f.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "noise needs sigma, c_f >= 0, got sigma={sigma}, c_f={c_f}"
            )))
        }
    }

    pub fn variance_at(&self, x: &[f64]) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => sigma * sigma,
            NoiseModel::StateScaled { sigma, c_f } => {
                c_f * x.iter().map(|v| v * v).sum::<f64>() + sigma * sigma
            }
        }
    }

    /// One draw; always consumes exactly one standard normal from `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.variance_at(x).sqrt() * z
    }
}

/// Returns noisy values of its objective and counts every call.
#[derive(Debug, Clone)]
pub struct ZerothOrderOracle<O> {
    objective: O,
    noise: NoiseModel,
    queries: u64,
}

impl<O: Objective> ZerothOrderOracle<O> {
    pub fn new(objective: O, noise: NoiseModel) -> Self {
        ZerothOrderOracle {
            objective,
            noise,
            queries: 0,
        }
    }

    pub fn objective(&self) -> &O {
        &self.objective
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    /// `f(x) + v` with `v` drawn from the noise model at `x`.
    pub fn query<R: Rng + ?Sized>(&mut self, x: &[f64], rng: &mut R) -> Result<f64> {
        let value = self.objective.evaluate(x)?;
        self.queries += 1;
        Ok(value + self.noise.draw(x, rng))
    }
}

/// Shape of the synthetic logistic-regression instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSpec {
    pub num_nodes: usize,
    pub points_per_node: usize,
    pub feature_dim: usize,
    pub kappa: f64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            num_nodes: 10,
            points_per_node: 10,
            feature_dim: 4,
            kappa: 0.3,
        }
    }
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_nodes == 0 || self.points_per_node == 0 || self.feature_dim == 0 {
            return Err(Error::InvalidSpec(format!(
                "dataset sizes must be positive: nodes={}, points={}, feature_dim={}",
                self.num_nodes, self.points_per_node, self.feature_dim
            )));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidSpec(format!("kappa must be positive, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Synthetic classification data, one logistic objective per node.
///
/// A ground-truth classifier `(w', x0')` is drawn from a standard normal.
/// At node `i` (counting from 1) each feature is a standard normal plus a
/// uniform on `[0, 5i]`, and the label is `sign(w'·a + x0' + ε)` with
/// standard normal `ε` (a zero argument maps to +1). Draw order: `w'`, `x0'`,
/// then per node, per point, the features followed by `ε`.
pub fn generate_dataset<R: Rng + ?Sized>(
    spec: &DatasetSpec,
    rng: &mut R,
) -> Result<Vec<LocalObjective>> {
    spec.validate()?;
    let p = spec.feature_dim;
    let truth: Vec<f64> = (0..=p).map(|_| StandardNormal.sample(rng)).collect();
    (1..=spec.num_nodes)
        .map(|node| {
            let shift = Uniform::new_inclusive(0.0, 5.0 * node as f64).expect("finite bounds");
            let mut features = Vec::with_capacity(spec.points_per_node);
            let mut labels = Vec::with_capacity(spec.points_per_node);
            for _ in 0..spec.points_per_node {
                let row: Vec<f64> = (0..p)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        z + shift.sample(rng)
                    })
                    .collect();
                let eps: f64 = StandardNormal.sample(rng);
                let score: f64 =
                    row.iter().zip(&truth[..p]).map(|(a, w)| a * w).sum::<f64>() + truth[p] + eps;
                labels.push(if score >= 0.0 { 1.0 } else { -1.0 });
                features.push(row);
            }
            LocalObjective::logistic(features, labels, spec.kappa)
        })
        .collect()
}

const MAX_SOLVER_ITERATIONS: usize = 10_000_000;

/// Minimizer of `Σ f_i`, started from the origin.
pub fn solve_ground_truth(objectives: &[LocalObjective], tol: f64) -> Result<Vec<f64>> {
    let d = objectives
        .first()
        .ok_or_else(|| Error::InvalidSpec("no objectives".into()))?
        .dim();
    solve_ground_truth_from(objectives, &vec![0.0; d], tol)
}

/// Damped Newton iteration on `Σ f_i` with Armijo backtracking, stopping once
/// `‖Σ ∇f_i(x)‖ ≤ tol`. The objective value never increases.
pub fn solve_ground_truth_from(
    objectives: &[LocalObjective],
    start: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!("tolerance must be positive, got {tol}")));
    }
    let mean = MeanObjective::new(objectives)?;
    mean.check_dim(start)?;
    let n = objectives.len() as f64;
    let total = |x: &[f64]| mean.evaluate(x).map(|v| v * n);

    let mut x = DVector::from_column_slice(start);
    let mut value = total(x.as_slice())?;
    for _ in 0..MAX_SOLVER_ITERATIONS {
        let grad = DVector::from_vec(mean.gradient(x.as_slice())?) * n;
        if grad.norm() <= tol {
            return Ok(x.iter().copied().collect());
        }
        let hess = mean.hessian(x.as_slice())? * n;
        let direction = hess
            .cholesky()
            .map(|c| -c.solve(&grad))
            .unwrap_or_else(|| -&grad);
        let slope = grad.dot(&direction);
        let mut step = 1.0;
        loop {
            let candidate = &x + &direction * step;
            let cand_value = total(candidate.as_slice())?;
            if cand_value <= value + 1e-4 * step * slope {
                x = candidate;
                value = cand_value;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                // Line search stalled at the floating-point floor.
                return Err(Error::ConvergenceFailure {
                    tol,
                    iterations: MAX_SOLVER_ITERATIONS,
                });
            }
        }
    }
    Err(Error::ConvergenceFailure {
        tol,
        iterations: MAX_SOLVER_ITERATIONS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose, StreamKey};

    fn quad(a: &[f64], b: &[f64]) -> LocalObjective {
        let d = b.len();
        LocalObjective::quadratic(DMatrix::from_row_slice(d, d, a), DVector::from_column_slice(b))
            .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(quad(&[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]).evaluate(&[0.0, 0.0]).unwrap(), 0.0);
        let f = quad(&[2.0, 0.0, 0.0, 2.0], &[2.0, 0.0]);
        assert_eq!(f.evaluate(&[1.0, 0.0]).unwrap(), -1.0);
        let l = LocalObjective::logistic(vec![vec![0.0]], vec![1.0], 0.3).unwrap();
        assert!((l.evaluate(&[0.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let f = quad(&[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]);
        assert_eq!(f.gradient(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        let l = LocalObjective::logistic(vec![vec![2.0, -4.0]], vec![-1.0], 0.3).unwrap();
        // sigmoid(0) = 1/2, so the gradient is -b/2 · (a, 1).
        assert_eq!(l.gradient(&[0.0; 3]).unwrap(), vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let f = quad(&[1.0], &[0.0]);
        assert!(matches!(
            f.evaluate(&[0.0, 1.0]),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        assert!(f.gradient(&[]).is_err());
    }

    #[test]
    fn convexity_bounds_examples() {
        assert_eq!(quad(&[1.0, 0.0, 0.0, 5.0], &[0.0, 0.0]).strong_convexity_bounds(), (1.0, 5.0));
        assert_eq!(quad(&[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]).strong_convexity_bounds(), (1.0, 1.0));
        // Zero features: only the intercept column contributes, Gram = n·e eᵀ.
        let n = 6;
        let l = LocalObjective::logistic(vec![vec![0.0, 0.0]; n], vec![1.0; n], 0.3).unwrap();
        let (mu, lip) = l.strong_convexity_bounds();
        assert_eq!(mu, 0.3);
        assert!((lip - (0.3 + 0.25 * n as f64)).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_quadratic_and_bad_logistic() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(LocalObjective::quadratic(a, DVector::zeros(2)).is_err());
        assert!(LocalObjective::logistic(vec![vec![1.0]], vec![0.5], 0.3).is_err());
        assert!(LocalObjective::logistic(vec![vec![1.0]], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn noiseless_query_is_exact_and_counted() {
        let f = quad(&[2.0, 0.0, 0.0, 2.0], &[2.0, 0.0]);
        let mut oracle = ZerothOrderOracle::new(&f, NoiseModel::noiseless());
        let mut rng = stream(0, StreamKey::new(0, 0, Purpose::Noise));
        for _ in 0..5 {
            assert_eq!(oracle.query(&[1.0, 0.0], &mut rng).unwrap(), -1.0);
        }
        assert_eq!(oracle.queries(), 5);
    }

    #[test]
    fn gaussian_noise_is_centered() {
        let f = quad(&[1.0], &[0.0]);
        let mut oracle = ZerothOrderOracle::new(&f, NoiseModel::Gaussian { sigma: 1.0 });
        let mut rng = stream(5, StreamKey::new(0, 0, Purpose::Noise));
        let m = 100_000;
        let x = [0.7];
        let exact = f.evaluate(&x).unwrap();
        let mean: f64 = (0..m).map(|_| oracle.query(&x, &mut rng).unwrap() - exact).sum::<f64>()
            / m as f64;
        assert!(mean.abs() <= 4.0 / (m as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn state_scaled_noise_variance() {
        let f = quad(&[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]);
        let noise = NoiseModel::StateScaled { sigma: 0.0, c_f: 1.0 };
        let mut oracle = ZerothOrderOracle::new(&f, noise);
        let mut rng = stream(6, StreamKey::new(0, 0, Purpose::Noise));
        let x = [2.0, 0.0];
        let exact = f.evaluate(&x).unwrap();
        let m = 100_000;
        let draws: Vec<f64> = (0..m).map(|_| oracle.query(&x, &mut rng).unwrap() - exact).collect();
        let mean = draws.iter().sum::<f64>() / m as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        assert!((var - 4.0).abs() < 0.4, "variance {var}");
    }

    #[test]
    fn dataset_shape_and_determinism() {
        let spec = DatasetSpec::default();
        let key = StreamKey::new(0, 0, Purpose::Instance);
        let a = generate_dataset(&spec, &mut stream(7, key)).unwrap();
        let b = generate_dataset(&spec, &mut stream(7, key)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        for obj in &a {
            let l = obj.as_logistic().unwrap();
            assert_eq!(l.num_points(), 10);
            assert_eq!(obj.dim(), 5);
            assert!(l.labels().iter().all(|&b| b == 1.0 || b == -1.0));
        }
        // Node 10 features live on roughly [0, 50] + N(0,1); node 1 on [0, 5].
        let spread = |o: &LocalObjective| {
            let l = o.as_logistic().unwrap();
            (0..l.num_points()).flat_map(|j| l.features(j).to_vec()).fold(f64::MIN, f64::max)
        };
        assert!(spread(&a[9]) > spread(&a[0]));
    }

    #[test]
    fn dataset_rejects_zero_features() {
        let spec = DatasetSpec {
            feature_dim: 0,
            ..DatasetSpec::default()
        };
        let mut rng = stream(7, StreamKey::new(0, 0, Purpose::Instance));
        assert!(matches!(generate_dataset(&spec, &mut rng), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn ground_truth_closed_forms() {
        let objs = vec![
            quad(&[1.0, 0.0, 0.0, 1.0], &[1.0, 2.0]),
            quad(&[1.0, 0.0, 0.0, 1.0], &[3.0, -2.0]),
            quad(&[1.0, 0.0, 0.0, 1.0], &[-1.0, 3.0]),
        ];
        let x = solve_ground_truth(&objs, 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        let single = vec![quad(&[2.0, 0.0, 0.0, 4.0], &[2.0, 4.0])];
        let x = solve_ground_truth(&single, 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ground_truth_is_unique_for_logistic_instance() {
        let objs = generate_dataset(
            &DatasetSpec::default(),
            &mut stream(3, StreamKey::new(0, 0, Purpose::Instance)),
        )
        .unwrap();
        let tol = 1e-8;
        let a = solve_ground_truth(&objs, tol).unwrap();
        let b = solve_ground_truth_from(&objs, &[3.0, -2.0, 1.0, 0.5, -4.0], tol).unwrap();
        let dist = a.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        assert!(dist <= 10.0 * tol, "restart distance {dist}");
    }
}
