//! Closed-form densities used by the experiments.

use std::f64::consts::PI;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, Matrix};

/// Multivariate normal distribution with a validated covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GaussianRepr", into = "GaussianRepr")]
pub struct GaussianSpec {
    mean: Vec<f64>,
    covariance: Matrix,
    precision: Matrix,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussianRepr {
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

impl TryFrom<GaussianRepr> for GaussianSpec {
    type Error = Error;

    fn try_from(repr: GaussianRepr) -> Result<Self> {
        let d = repr.mean.len();
        if repr.covariance.len() != d || repr.covariance.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(format!("covariance must be {d}x{d}")));
        }
        let cov = Matrix::from_fn(d, d, |i, j| repr.covariance[i][j]);
        GaussianSpec::new(repr.mean, cov)
    }
}

impl From<GaussianSpec> for GaussianRepr {
    fn from(spec: GaussianSpec) -> Self {
        let d = spec.mean.len();
        let covariance = (0..d)
            .map(|i| (0..d).map(|j| spec.covariance[(i, j)]).collect())
            .collect();
        GaussianRepr {
            mean: spec.mean,
            covariance,
        }
    }
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        let d = mean.len();
        if d == 0 || covariance.shape() != (d, d) {
            return Err(Error::ShapeMismatch(format!(
                "mean of length {d} with covariance {:?}",
                covariance.shape()
            )));
        }
        if !is_symmetric(&covariance, 1e-12) {
            return Err(Error::NotPositiveDefinite(
                "covariance is not symmetric".into(),
            ));
        }
        let chol = Cholesky::new(covariance.clone())
            .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))?;
        let log_det = chol.ln_determinant();
        if !log_det.is_finite() {
            return Err(Error::NotPositiveDefinite("covariance is singular".into()));
        }
        let log_norm = -0.5 * (d as f64) * (2.0 * PI).ln() - 0.5 * log_det;
        let precision = chol.inverse();
        Ok(GaussianSpec {
            mean,
            covariance,
            precision,
            log_norm,
        })
    }

    /// Zero-mean Gaussian with the given covariance.
    pub fn centered(covariance: Matrix) -> Result<Self> {
        GaussianSpec::new(vec![0.0; covariance.nrows()], covariance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    /// Density at `x`; `x` must have the distribution's dimension.
    pub fn density(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut form = 0.0;
        for i in 0..d {
            let di = x[i] - self.mean[i];
            let mut row = 0.0;
            for (j, (xj, mj)) in x.iter().zip(&self.mean).enumerate() {
                row += self.precision[(i, j)] * (xj - mj);
            }
            form += di * row;
        }
        (self.log_norm - 0.5 * form).exp()
    }
}

pub fn gaussian_pdf(spec: &GaussianSpec, x: &[f64]) -> Result<f64> {
    if x.len() != spec.dim() {
        return Err(Error::ShapeMismatch(format!(
            "point of length {} for a {}-dimensional Gaussian",
            x.len(),
            spec.dim()
        )));
    }
    Ok(spec.density(x))
}

/// How the radial coordinate enters the range term of the radar density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialTerm {
    /// `(sqrt(x1^2 + x2^2) - mu_r)`: a Gaussian in range.
    #[default]
    Radius,
    /// `(x1^2 + x2^2 - mu_r)`: squared radius compared with the range mean.
    SquaredRadius,
}

/// Range/bearing Gaussian of a target seen from a sensor at the origin,
/// expressed in Cartesian coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarSpec {
    pub mu_r: f64,
    pub sigma_r: f64,
    pub mu_a: f64,
    pub sigma_a: f64,
    #[serde(default)]
    pub radial: RadialTerm,
}

impl Default for RadarSpec {
    fn default() -> Self {
        RadarSpec {
            mu_r: 6.0,
            sigma_r: 0.5,
            mu_a: 1.2,
            sigma_a: 0.5,
            radial: RadialTerm::Radius,
        }
    }
}

impl RadarSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.mu_r, self.sigma_r, self.mu_a, self.sigma_a]
            .iter()
            .all(|v| v.is_finite())
            && self.sigma_r > 0.0
            && self.sigma_a > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid radar parameters {self:?}"
            )))
        }
    }

    /// Density value, taking the bearing at the origin as `atan2(0, 0) = 0`.
    ///
    /// Used for grid sampling where the origin may be a node.
    pub fn density(&self, x1: f64, x2: f64) -> f64 {
        let r2 = x1 * x1 + x2 * x2;
        let range = match self.radial {
            RadialTerm::Radius => r2.sqrt(),
            RadialTerm::SquaredRadius => r2,
        };
        let dr = (range - self.mu_r) / self.sigma_r;
        let da = (x2.atan2(x1) - self.mu_a) / self.sigma_a;
        (-0.5 * dr * dr - 0.5 * da * da).exp() / (2.0 * PI * self.sigma_r * self.sigma_a)
    }
}

/// Radar density at `(x1, x2)`; the origin has no bearing and is rejected.
pub fn radar_pdf(spec: &RadarSpec, x1: f64, x2: f64) -> Result<f64> {
    spec.validate()?;
    if x1 == 0.0 && x2 == 0.0 {
        return Err(Error::UndefinedBearing);
    }
    Ok(spec.density(x1, x2))
}
